#ifndef SGW_BENCH_HPP
#define SGW_BENCH_HPP

#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "sgw/channel.hpp"
#include "sgw/cycle_clock.hpp"

namespace sgw {

// One instrumented measurement, aggregated over the post-warmup timings.
struct StageSample {
    Stage stage = Stage::kHash;
    uint64_t iterations = 0;    // timings kept after warmup
    uint64_t total_cycles = 0;
    double mean = 0;            // per-op cycles
    uint64_t min = 0;
    uint64_t max = 0;
    std::optional<uint64_t> bytes;
    std::optional<uint64_t> connections;
};

struct BlackboxPoint {
    double offered_pps = 0;
    double achieved_pps = 0;
    double achieved_bps = 0;
};

struct RunMeta {
    std::string suite = "chacha20";
    std::string kex = "ecdhe";
    bool reuse_kex = true;
    uint64_t payload_bytes = 500;
    std::string clock_source = "tsc";
    double nominal_hz = 0;
    uint64_t warmup = 0;
    uint64_t repetitions = 0;
};

struct BenchReport {
    RunMeta meta;
    std::vector<StageSample> samples;
    std::vector<BlackboxPoint> blackbox;
    // Raw per-op trace (op index, cycles); written as a third CSV section
    // when present. Feeds the convergence and sawtooth figures.
    std::vector<std::pair<uint64_t, uint64_t>> trace;
};

struct BenchConfig {
    CipherSuite suite = CipherSuite::kChacha20Poly1305;
    KexMethod kex = KexMethod::kEcdhe;
    bool reuse_kex = true;
    size_t payload_bytes = 500;
    size_t connections = 1000;  // working-set size for the table stages
    uint64_t seed = 0;          // 0 = OS randomness
    CycleClock clock = CycleClock::best(1e9);
};

// Default warmup for a stage: 10% of iterations with a floor of 100,
// except for the cold-start stages (HANDSHAKE, TABLE_INSERT, STATE_ALLOC)
// whose first-op costs are the phenomenon being measured.
uint64_t default_warmup(Stage stage, uint64_t iterations);

// Runs the stage's closed micro-loop for `iterations` timed operations,
// discards the first `warmup` timings and aggregates the rest. trace_out,
// when given, receives every timing including the warmup span.
StageSample measure_stage(Stage stage, uint64_t iterations, uint64_t warmup,
                          const BenchConfig& cfg,
                          std::vector<uint64_t>* trace_out = nullptr);

// Two channels with a completed handshake between them, no transport
// involved. Shared helper for crypto micro-loops and protocol tests.
struct ChannelPair {
    Channel client;
    Channel server;
};
ChannelPair establish_pair(CipherSuite suite, KexMethod kex, Rng& rng,
                           std::shared_ptr<KexKeyPair> server_keypair = nullptr);

// Report round trip. CSV layout: '#'-prefixed metadata lines, a samples
// section with the exact header
// stage,iterations,total_cycles,mean,min,max,bytes,connections, then an
// optional blank-line-separated blackbox section
// offered_pps,achieved_pps,achieved_bps and an optional trace section
// op_index,cycles. JSON mirrors the field names.
void emit_report(const BenchReport& report, std::ostream& out, const std::string& format);
void emit_report(const BenchReport& report, const std::string& path, const std::string& format);
BenchReport read_report(const std::string& path);

// Tidy plot series for external tooling: throughput (offered vs achieved),
// packet-trace (per-op cycle trace), stage-means (per-stage breakdown),
// kex-handshake (handshake cost by key agreement), amortization (handshake
// cost over connection count), connection-trace (per-connection cycle trace).
void emit_plotdata(const BenchReport& report, const std::string& series, std::ostream& out);

}  // namespace sgw

#endif  // SGW_BENCH_HPP
