#include "sgw/cost_model.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>

namespace sgw {

void validate_params(const CostModelParams& p) {
    const double coeffs[] = {p.tx_per_pkt,        p.rx_per_pkt,
                             p.hash_per_pkt,      p.mem_per_conn,
                             p.mem_fixed,         p.table_insert_base,
                             p.table_insert_saw,  p.table_lookup_per_pkt,
                             p.hs_fixed,          p.hs_per_conn,
                             p.crypto_per_byte};
    for (double c : coeffs)
        if (!(c >= 0)) throw std::invalid_argument("cost coefficients must be >= 0");
    if (!(p.payload_bytes_per_pkt >= 1))
        throw std::invalid_argument("payload_bytes_per_pkt must be >= 1");
    if (p.crypto_passes < 1) throw std::invalid_argument("crypto_passes must be >= 1");
}

std::string component_name(Component c) {
    switch (c) {
        case Component::kRx: return "rx";
        case Component::kTx: return "tx";
        case Component::kHash: return "hash";
        case Component::kStateMemory: return "mem";
        case Component::kTableInsert: return "insert";
        case Component::kTableLookup: return "lookup";
        case Component::kHandshakeSetup: return "handshake";
        case Component::kCryptoBytes: return "crypto";
    }
    throw std::invalid_argument("bad component id");
}

Component parse_component(const std::string& name) {
    if (name == "rx") return Component::kRx;
    if (name == "tx") return Component::kTx;
    if (name == "hash") return Component::kHash;
    if (name == "mem") return Component::kStateMemory;
    if (name == "insert") return Component::kTableInsert;
    if (name == "lookup") return Component::kTableLookup;
    if (name == "handshake") return Component::kHandshakeSetup;
    if (name == "crypto") return Component::kCryptoBytes;
    throw std::invalid_argument("unknown component: " + name);
}

double sawtooth_weight(double c) {
    if (c < 1) throw std::domain_error("sawtooth weight needs c >= 1");
    double next_pow2 = std::exp2(std::floor(std::log2(c)) + 1.0);
    return (next_pow2 - 8.0) / c - 1.0;
}

double eval_component(const CostModelParams& p, Component which, double arg, bool allow_small) {
    if (arg < 0) throw std::domain_error("component argument must be >= 0");
    switch (which) {
        case Component::kRx: return p.rx_per_pkt * arg;
        case Component::kTx: return p.tx_per_pkt * arg;
        case Component::kHash: return p.hash_per_pkt * arg;
        case Component::kStateMemory: return p.mem_per_conn * arg + p.mem_fixed;
        case Component::kTableInsert:
            if (arg == 0) return 0;
            if (arg < 1000 && !allow_small)
                throw std::domain_error(
                    "insertion sawtooth is only calibrated for 1000 connections or more");
            return arg * (p.table_insert_base + p.table_insert_saw * sawtooth_weight(arg));
        case Component::kTableLookup: return p.table_lookup_per_pkt * arg;
        case Component::kHandshakeSetup: return p.hs_fixed + p.hs_per_conn * arg;
        case Component::kCryptoBytes: return p.crypto_per_byte * arg;
    }
    throw std::invalid_argument("bad component id");
}

double per_packet_cycles(const CostModelParams& p) {
    return p.rx_per_pkt + p.tx_per_pkt + p.hash_per_pkt + p.table_lookup_per_pkt +
           p.crypto_per_byte * p.payload_bytes_per_pkt * p.crypto_passes;
}

double per_connection_cycles(const CostModelParams& p) {
    // Worst-case insert cost (weight -> 1) keeps the total linear in c.
    return p.hs_per_conn + p.mem_per_conn + p.table_insert_base + p.table_insert_saw;
}

double fixed_cycles(const CostModelParams& p) { return p.hs_fixed + p.mem_fixed; }

double eval_total(const CostModelParams& p, const PredictionInput& in) {
    if (in.connections < 0 || in.packets < 0) throw std::domain_error("c and p must be >= 0");
    double bytes = in.bytes.value_or(in.packets * p.payload_bytes_per_pkt);
    if (bytes < 0) throw std::domain_error("b must be >= 0");
    double per_pkt =
        p.rx_per_pkt + p.tx_per_pkt + p.hash_per_pkt + p.table_lookup_per_pkt;
    return fixed_cycles(p) + per_connection_cycles(p) * in.connections +
           per_pkt * in.packets + p.crypto_per_byte * bytes * p.crypto_passes;
}

ThroughputPrediction predict_throughput(const CostModelParams& p, const PredictionInput& in) {
    if (in.cpu_hz <= 0) throw std::invalid_argument("cpu_hz must be > 0");
    double budget = in.cpu_hz;
    if (in.connections_per_sec > 0)
        budget -= in.connections_per_sec * per_connection_cycles(p);
    if (budget < 0) budget = 0;

    ThroughputPrediction out;
    out.pps = std::floor(budget / per_packet_cycles(p));
    if (in.bandwidth_cap_bps) {
        double cap_pps = std::floor(*in.bandwidth_cap_bps / (in.wire_bytes_per_pkt * 8.0));
        if (cap_pps < out.pps) {
            out.pps = cap_pps;
            out.bandwidth_limited = true;
        }
    }
    out.bps = out.pps * in.wire_bytes_per_pkt * 8.0;
    return out;
}

double smape(std::span<const double> forecast, std::span<const double> actual) {
    if (forecast.size() != actual.size()) throw std::invalid_argument("series length mismatch");
    if (forecast.empty()) throw std::invalid_argument("empty series");
    double sum = 0;
    for (size_t i = 0; i < forecast.size(); ++i) {
        double denom = (std::fabs(actual[i]) + std::fabs(forecast[i])) / 2.0;
        if (denom == 0) continue;  // F = A = 0 contributes nothing
        sum += std::fabs(forecast[i] - actual[i]) / denom;
    }
    return 100.0 * sum / static_cast<double>(forecast.size());
}

namespace {

// sMAPE of a fitted line against its own training points.
double training_smape(std::span<const std::pair<double, double>> samples, double slope,
                      double intercept, double (*xform)(double)) {
    std::vector<double> f, a;
    f.reserve(samples.size());
    a.reserve(samples.size());
    for (auto& [x, y] : samples) {
        f.push_back(slope * (xform ? xform(x) : x) + intercept);
        a.push_back(y);
    }
    return smape(f, a);
}

}  // namespace

FitResult fit_linear(std::span<const std::pair<double, double>> samples, bool zero_intercept) {
    if (samples.size() < 2) throw std::invalid_argument("need at least 2 samples");

    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (auto& [x, y] : samples) {
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    double n = static_cast<double>(samples.size());

    FitResult out;
    if (zero_intercept) {
        if (sxx == 0) throw std::invalid_argument("degenerate fit: all x are zero");
        out.slope = sxy / sxx;
        out.intercept = 0;
    } else {
        double denom = n * sxx - sx * sx;
        if (denom == 0) throw std::invalid_argument("degenerate fit: all x equal");
        out.slope = (n * sxy - sx * sy) / denom;
        out.intercept = (sy - out.slope * sx) / n;
    }
    out.fit_smape = training_smape(samples, out.slope, out.intercept, nullptr);
    return out;
}

SawtoothFit fit_sawtooth(std::span<const std::pair<double, double>> samples) {
    if (samples.size() < 2) throw std::invalid_argument("need at least 2 samples");
    std::vector<std::pair<double, double>> weighted;
    weighted.reserve(samples.size());
    for (auto& [c, y] : samples) {
        if (c < 1000)
            throw std::invalid_argument("sawtooth fit needs samples with c >= 1000");
        weighted.emplace_back(sawtooth_weight(c), y);
    }
    FitResult lin = fit_linear(weighted);
    SawtoothFit out;
    out.base = lin.intercept;
    out.saw = lin.slope;
    out.fit_smape = lin.fit_smape;
    return out;
}

nlohmann::json params_to_json(const CostModelParams& p) {
    return nlohmann::json{{"tx_per_pkt", p.tx_per_pkt},
                          {"rx_per_pkt", p.rx_per_pkt},
                          {"hash_per_pkt", p.hash_per_pkt},
                          {"mem_per_conn", p.mem_per_conn},
                          {"mem_fixed", p.mem_fixed},
                          {"table_insert_base", p.table_insert_base},
                          {"table_insert_saw", p.table_insert_saw},
                          {"table_lookup_per_pkt", p.table_lookup_per_pkt},
                          {"hs_fixed", p.hs_fixed},
                          {"hs_per_conn", p.hs_per_conn},
                          {"crypto_per_byte", p.crypto_per_byte},
                          {"payload_bytes_per_pkt", p.payload_bytes_per_pkt},
                          {"crypto_passes", p.crypto_passes}};
}

CostModelParams params_from_json(const nlohmann::json& j) {
    CostModelParams p;
    p.tx_per_pkt = j.value("tx_per_pkt", p.tx_per_pkt);
    p.rx_per_pkt = j.value("rx_per_pkt", p.rx_per_pkt);
    p.hash_per_pkt = j.value("hash_per_pkt", p.hash_per_pkt);
    p.mem_per_conn = j.value("mem_per_conn", p.mem_per_conn);
    p.mem_fixed = j.value("mem_fixed", p.mem_fixed);
    p.table_insert_base = j.value("table_insert_base", p.table_insert_base);
    p.table_insert_saw = j.value("table_insert_saw", p.table_insert_saw);
    p.table_lookup_per_pkt = j.value("table_lookup_per_pkt", p.table_lookup_per_pkt);
    p.hs_fixed = j.value("hs_fixed", p.hs_fixed);
    p.hs_per_conn = j.value("hs_per_conn", p.hs_per_conn);
    p.crypto_per_byte = j.value("crypto_per_byte", p.crypto_per_byte);
    p.payload_bytes_per_pkt = j.value("payload_bytes_per_pkt", p.payload_bytes_per_pkt);
    p.crypto_passes = j.value("crypto_passes", p.crypto_passes);
    validate_params(p);
    return p;
}

CostModelParams load_params(const std::string& path_or_defaults) {
    if (path_or_defaults == "defaults") return CostModelParams{};
    std::ifstream in(path_or_defaults);
    if (!in) throw std::runtime_error("cannot open params file: " + path_or_defaults);
    nlohmann::json j;
    in >> j;
    return params_from_json(j);
}

void save_params(const CostModelParams& p, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write params file: " + path);
    out << params_to_json(p).dump(2) << "\n";
}

}  // namespace sgw
