#ifndef SGW_COST_MODEL_HPP
#define SGW_COST_MODEL_HPP

#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

namespace sgw {

// Per-stage cycle cost coefficients. The defaults are the published
// reference constants for a 3.2 GHz Haswell server core with software
// crypto; `model fit` refits them from local microbenchmarks.
struct CostModelParams {
    double tx_per_pkt = 66.0;
    double rx_per_pkt = 77.0;
    double hash_per_pkt = 62.0;
    double mem_per_conn = 354.0;
    double mem_fixed = 1477.0;
    double table_insert_base = 400.0;
    double table_insert_saw = 170.0;
    double table_lookup_per_pkt = 118.0;
    double hs_fixed = 5759960.0;
    double hs_per_conn = 2325634.0;
    double crypto_per_byte = 12.0;
    double payload_bytes_per_pkt = 500.0;
    // Crypto applications per packet: 1 models one protection pass, 2 the
    // gateway's decrypt-then-re-encrypt echo workload.
    int crypto_passes = 1;
};

// Throws std::invalid_argument when a coefficient is negative, the payload
// size is < 1 or crypto_passes < 1.
void validate_params(const CostModelParams& p);

// Cost components, named for what they charge for. The argument is
// packets for the per-packet components, connections for the
// per-connection ones and bytes for kCryptoBytes.
enum class Component : uint8_t {
    kRx,             // packet receive path
    kTx,             // packet transmit path
    kHash,           // flow-key computation
    kStateMemory,    // connection state memory footprint cost
    kTableInsert,    // state-table insertion including resize sawtooth
    kTableLookup,    // state-table lookup
    kHandshakeSetup, // connection setup (key agreement + key schedule)
    kCryptoBytes,    // record protection per payload byte
};

std::string component_name(Component c);
Component parse_component(const std::string& name);

// Resize-overhead weight of the insertion sawtooth at c connections:
// (2^(floor(log2 c)+1) - 8) / c - 1. In (0, 1) for all c >= 1000.
double sawtooth_weight(double c);

// Exact real-valued evaluation of one component. The insertion sawtooth
// is only calibrated for c >= 1000; smaller arguments throw unless
// allow_small is set (c = 0 evaluates to 0 either way).
double eval_component(const CostModelParams& p, Component which, double arg,
                      bool allow_small = false);

struct PredictionInput {
    double connections = 0;
    double packets = 0;
    std::optional<double> bytes;  // defaults to packets * payload_bytes_per_pkt
    double cpu_hz = 0;
    std::optional<double> bandwidth_cap_bps;
    double wire_bytes_per_pkt = 576;
    double connections_per_sec = 0;  // folded into the cycle budget when > 0
};

// Aggregates, recomputed from the coefficients on every call.
double per_packet_cycles(const CostModelParams& p);      // rx+tx+hash+lookup+crypto
double per_connection_cycles(const CostModelParams& p);  // hs+mem+worst-case insert
double fixed_cycles(const CostModelParams& p);           // hs_fixed+mem_fixed

// Total predicted cycles for a run of c connections and p packets. Uses
// the worst-case per-connection insert cost (base + saw), which makes the
// total linear in c.
double eval_total(const CostModelParams& p, const PredictionInput& in);

struct ThroughputPrediction {
    double pps = 0;  // floor-rounded packets per second
    double bps = 0;  // wire bits per second at that packet rate
    bool bandwidth_limited = false;
};

// Steady-state throughput under a cycle budget and an optional line-rate
// bound. Connection setup cost is charged against the budget only when a
// connection rate is supplied.
ThroughputPrediction predict_throughput(const CostModelParams& p, const PredictionInput& in);

// Symmetric mean absolute percentage error, in percent of [0, 200]:
// (100/n) * sum |F-A| / ((|A|+|F|)/2). A pair with F = A = 0 contributes 0.
double smape(std::span<const double> forecast, std::span<const double> actual);

struct FitResult {
    double slope = 0;
    double intercept = 0;
    double fit_smape = 0;  // sMAPE of the fit on its own training points
};

// Ordinary least squares y = slope*x + intercept over (x, cycles) samples.
// zero_intercept pins the intercept to 0 (per-packet components pass
// through the origin). Throws on fewer than 2 samples or all-equal x.
FitResult fit_linear(std::span<const std::pair<double, double>> samples,
                     bool zero_intercept = false);

struct SawtoothFit {
    double base = 0;
    double saw = 0;
    double fit_smape = 0;
};

// Least squares over the insertion cost form y = base + saw * w(c) where
// y is the average per-insert cycle count at c connections. Requires >= 2
// samples, all with c >= 1000.
SawtoothFit fit_sawtooth(std::span<const std::pair<double, double>> samples);

// JSON round trip using the exact CostModelParams field names.
nlohmann::json params_to_json(const CostModelParams& p);
CostModelParams params_from_json(const nlohmann::json& j);

// Loads params from a JSON file; the literal string "defaults" yields the
// built-in reference constants.
CostModelParams load_params(const std::string& path_or_defaults);
void save_params(const CostModelParams& p, const std::string& path);

}  // namespace sgw

#endif  // SGW_COST_MODEL_HPP
