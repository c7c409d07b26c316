// sgw: secure UDP gateway, load generator, microbenchmarks and cost-model
// tooling behind one binary.

#include <atomic>
#include <csignal>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>
#include <thread>

#ifdef __linux__
#include <sched.h>
#endif

#include <CLI11.hpp>

#include "sgw/bench.hpp"
#include "sgw/cost_model.hpp"
#include "sgw/gateway.hpp"
#include "sgw/loadgen.hpp"

namespace {

std::atomic<bool> g_interrupted{false};
void on_sigint(int) { g_interrupted.store(true); }

sgw::HashKey resolve_hash_key(const std::string& hex, uint64_t seed) {
    if (!hex.empty()) return sgw::HashKey::from_hex(hex);
    sgw::Rng rng = seed ? sgw::Rng(seed) : sgw::Rng();
    return sgw::HashKey::random(rng);
}

void pin_to_core(int core) {
#ifdef __linux__
    cpu_set_t set;
    CPU_ZERO(&set);
    CPU_SET(core, &set);
    if (sched_setaffinity(0, sizeof(set), &set) != 0)
        std::cerr << "warning: could not pin to core " << core << "\n";
#else
    (void)core;
    std::cerr << "warning: --pin is not supported on this platform\n";
#endif
}

// "A:B:STEP" inclusive range, or a comma-separated list, or one value.
std::vector<double> parse_rates(const std::string& text) {
    std::vector<double> rates;
    if (text.find(':') != std::string::npos) {
        double a, b, step;
        char c1, c2;
        std::istringstream is(text);
        if (!(is >> a >> c1 >> b >> c2 >> step) || c1 != ':' || c2 != ':' || step <= 0 || b < a)
            throw CLI::ValidationError("--rates", "expected A:B:STEP with STEP > 0, B >= A");
        for (double r = a; r <= b + 1e-9; r += step) rates.push_back(r);
        return rates;
    }
    std::istringstream is(text);
    std::string tok;
    while (std::getline(is, tok, ',')) rates.push_back(std::stod(tok));
    if (rates.empty()) throw CLI::ValidationError("--rates", "empty rate list");
    return rates;
}

std::vector<uint64_t> parse_u64_list(const std::string& text) {
    std::vector<uint64_t> out;
    std::istringstream is(text);
    std::string tok;
    while (std::getline(is, tok, ',')) out.push_back(std::stoull(tok));
    return out;
}

struct CsvRows {
    std::vector<std::vector<std::string>> rows;
};

CsvRows read_csv(const std::string& path, const std::string& expect_header) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open: " + path);
    std::string line;
    bool saw_header = false;
    CsvRows out;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        if (!saw_header) {
            if (line != expect_header)
                throw std::runtime_error(path + ": expected header '" + expect_header + "'");
            saw_header = true;
            continue;
        }
        std::vector<std::string> fields;
        std::string cur;
        for (char c : line) {
            if (c == ',') {
                fields.push_back(cur);
                cur.clear();
            } else {
                cur += c;
            }
        }
        fields.push_back(cur);
        out.rows.push_back(std::move(fields));
    }
    if (!saw_header) throw std::runtime_error(path + ": missing header '" + expect_header + "'");
    return out;
}

void print_worker_stats(const sgw::WorkerStats& s, uint64_t dispatch_drops, bool instrument) {
    std::cout << "packets_in=" << s.packets_in << " packets_out=" << s.packets_out
              << " bytes_in=" << s.bytes_in << " bytes_out=" << s.bytes_out << "\n";
    std::cout << "connections_opened=" << s.connections_opened
              << " connections_established=" << s.connections_established << "\n";
    std::cout << "drops: malformed=" << s.drops_malformed << " no_flow=" << s.drops_no_flow
              << " auth=" << s.drops_auth << " replay=" << s.drops_replay
              << " handshake=" << s.drops_handshake << " capacity=" << s.drops_capacity
              << " dispatch=" << dispatch_drops << "\n";
    if (instrument) {
        for (size_t i = 0; i < sgw::kStageCount; ++i)
            std::cout << "stage " << sgw::stage_name(static_cast<sgw::Stage>(i))
                      << " cycles=" << s.stage_cycles[i] << "\n";
        std::cout << "total_cycles=" << s.total_cycles << "\n";
    }
}

int cmd_gateway_run(const std::string& listen, size_t workers, const std::string& suite,
                    const std::string& kex, bool no_reuse, size_t max_conns, bool instrument,
                    const std::string& hash_key_hex, uint64_t seed, double duration,
                    size_t batch) {
    sgw::GatewayConfig cfg;
    cfg.channel.suite = sgw::parse_suite(suite);
    cfg.channel.kex = sgw::parse_kex(kex);
    cfg.reuse_kex = !no_reuse;
    cfg.worker_count = workers;
    cfg.max_connections = max_conns;
    cfg.instrument = instrument;
    cfg.hash_key = resolve_hash_key(hash_key_hex, seed);
    cfg.seed = seed;
    cfg.batch_size = batch;

    auto driver = std::make_shared<sgw::UdpDriver>(listen);
    // Flushed eagerly: scripts watch for this line to learn an ephemeral port.
    std::cout << "listening on " << sgw::format_endpoint(driver->local_endpoint())
              << " suite=" << suite << " kex=" << kex << " workers=" << workers << std::endl;

    sgw::Gateway gw(cfg, driver);
    std::signal(SIGINT, on_sigint);
    std::signal(SIGTERM, on_sigint);
    gw.start();

    auto t0 = std::chrono::steady_clock::now();
    while (!g_interrupted.load()) {
        std::this_thread::sleep_for(std::chrono::milliseconds(50));
        if (duration > 0 &&
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count() >=
                duration)
            break;
    }
    gw.stop();
    print_worker_stats(gw.stats(), gw.dispatch_drops(), instrument);
    return 0;
}

int cmd_loadgen(const std::string& target, size_t connections, size_t packets, size_t payload,
                double rate, double duration, const std::string& suite, const std::string& kex,
                uint64_t seed, double timeout) {
    sgw::LoadgenConfig cfg;
    cfg.connections = connections;
    cfg.packets_per_conn = packets;
    cfg.payload_bytes = payload;
    cfg.rate_pps = rate;
    cfg.duration_s = duration;
    cfg.suite = sgw::parse_suite(suite);
    cfg.kex = sgw::parse_kex(kex);
    cfg.seed = seed;
    cfg.handshake_timeout_s = timeout;
    cfg.echo_timeout_s = timeout;

    sgw::Endpoint dst = sgw::parse_endpoint(target);
    auto factory = [] { return std::make_shared<sgw::UdpDriver>("0.0.0.0:0"); };
    sgw::LoadgenStats s = sgw::run_loadgen(factory, dst, cfg);

    std::cout << "connections requested=" << s.connections_requested
              << " established=" << s.connections_established
              << " timeouts=" << s.handshake_timeouts << "\n";
    std::cout << "packets sent=" << s.packets_sent << " echoes=" << s.echoes_verified
              << " losses=" << s.losses << "\n";
    char buf[160];
    snprintf(buf, sizeof(buf), "offered_pps=%.3f achieved_pps=%.3f achieved_bps=%.3f",
             s.offered_pps, s.achieved_pps, s.achieved_bps);
    std::cout << buf << "\n";
    return 0;
}

struct MicroArgs {
    std::vector<std::string> stages;
    uint64_t iterations = 10000;
    int64_t warmup = -1;  // -1 = per-stage default
    std::string suite = "chacha20";
    std::string kex = "ecdhe";
    bool no_reuse = false;
    size_t payload = 500;
    size_t connections = 1000;
    uint64_t seed = 0;
    std::string out;
    std::string format = "csv";
    bool trace = false;
    std::string series;  // HANDSHAKE amortization points, e.g. "1,10,100"
    std::string clock = "tsc";
    double nominal_hz = 0;
    int pin = -1;
};

int cmd_bench_micro(const MicroArgs& a) {
    if (a.pin >= 0) pin_to_core(a.pin);

    sgw::BenchConfig cfg;
    cfg.suite = sgw::parse_suite(a.suite);
    cfg.kex = sgw::parse_kex(a.kex);
    cfg.reuse_kex = !a.no_reuse;
    cfg.payload_bytes = a.payload;
    cfg.connections = a.connections;
    cfg.seed = a.seed;
    if (a.clock == "tsc") {
        cfg.clock = sgw::CycleClock::tsc();
    } else if (a.clock == "monotonic") {
        if (a.nominal_hz <= 0)
            throw CLI::ValidationError("--nominal-hz",
                                       "required (> 0) with the monotonic clock source");
        cfg.clock = sgw::CycleClock::monotonic(a.nominal_hz);
    } else {
        throw CLI::ValidationError("--clock", "must be tsc or monotonic");
    }

    if (a.trace && (a.stages.size() != 1 || !a.series.empty()))
        throw CLI::ValidationError("--trace", "needs exactly one stage and no --series");

    sgw::BenchReport report;
    report.meta.suite = a.suite;
    report.meta.kex = a.kex;
    report.meta.reuse_kex = !a.no_reuse;
    report.meta.payload_bytes = a.payload;
    report.meta.clock_source = cfg.clock.source_name();
    report.meta.nominal_hz = cfg.clock.nominal_hz();
    report.meta.repetitions = a.iterations;

    for (const auto& name : a.stages) {
        sgw::Stage stage = sgw::parse_stage(name);

        if (stage == sgw::Stage::kHandshake && !a.series.empty()) {
            for (uint64_t c : parse_u64_list(a.series)) {
                if (c == 0) throw CLI::ValidationError("--series", "counts must be >= 1");
                report.samples.push_back(sgw::measure_stage(stage, c, 0, cfg));
            }
            report.meta.warmup = 0;
            continue;
        }

        uint64_t warmup = a.warmup >= 0 ? static_cast<uint64_t>(a.warmup)
                                        : sgw::default_warmup(stage, a.iterations);
        report.meta.warmup = warmup;
        std::vector<uint64_t> trace;
        report.samples.push_back(
            sgw::measure_stage(stage, a.iterations, warmup, cfg, a.trace ? &trace : nullptr));
        for (size_t i = 0; i < trace.size(); ++i) report.trace.emplace_back(i, trace[i]);
    }

    if (a.out.empty()) {
        sgw::emit_report(report, std::cout, a.format);
    } else {
        sgw::emit_report(report, a.out, a.format);
        std::cout << "wrote " << a.out << "\n";
    }
    return 0;
}

struct BlackboxArgs {
    std::string rates;
    double duration = 1.0;
    std::string target;  // empty = in-memory gateway
    size_t connections = 4;
    size_t payload = 500;
    std::string suite = "chacha20";
    std::string kex = "ecdhe";
    uint64_t seed = 0;
    size_t workers = 1;
    size_t queue_cap = 512;
    bool flood = false;
    std::string out;
    std::string format = "csv";
};

int cmd_bench_blackbox(const BlackboxArgs& a) {
    std::vector<double> rates = parse_rates(a.rates);

    sgw::LoadgenConfig lcfg;
    lcfg.connections = a.connections;
    lcfg.payload_bytes = a.payload;
    lcfg.duration_s = a.duration;
    lcfg.suite = sgw::parse_suite(a.suite);
    lcfg.kex = sgw::parse_kex(a.kex);
    lcfg.seed = a.seed;
    lcfg.presealed_flood = a.flood;

    std::vector<sgw::BlackboxPoint> points;
    if (a.target.empty()) {
        // Deterministic in-process mode: gateway behind a bounded loopback
        // queue so saturation shows up as drops.
        auto net = std::make_shared<sgw::LoopbackSwitch>(
            sgw::LoopbackOptions{a.queue_cap, true});
        sgw::Endpoint gw_ep = sgw::parse_endpoint("10.0.0.1:4433");

        sgw::GatewayConfig gcfg;
        gcfg.channel.suite = lcfg.suite;
        gcfg.channel.kex = lcfg.kex;
        gcfg.worker_count = a.workers;
        gcfg.seed = a.seed;
        gcfg.hash_key = resolve_hash_key("", a.seed ? a.seed : 1);

        sgw::Gateway gw(gcfg, net->create_endpoint(gw_ep));
        gw.start();

        std::atomic<uint32_t> next_ip{0x0a000002};  // 10.0.0.2 onward
        auto factory = [&] {
            sgw::Endpoint ep{next_ip.fetch_add(1), 9000};
            return net->create_endpoint(ep);
        };
        points = sgw::blackbox_sweep(factory, gw_ep, rates, lcfg);
        gw.stop();
    } else {
        sgw::Endpoint dst = sgw::parse_endpoint(a.target);
        auto factory = [] { return std::make_shared<sgw::UdpDriver>("0.0.0.0:0"); };
        points = sgw::blackbox_sweep(factory, dst, rates, lcfg);
    }

    sgw::BenchReport report;
    report.meta.suite = a.suite;
    report.meta.kex = a.kex;
    report.meta.payload_bytes = a.payload;
    report.meta.clock_source = "none";
    report.blackbox = points;

    if (a.out.empty()) {
        sgw::emit_report(report, std::cout, a.format);
    } else {
        sgw::emit_report(report, a.out, a.format);
        std::cout << "wrote " << a.out << "\n";
    }
    return 0;
}

int cmd_bench_plotdata(const std::string& in, const std::string& series,
                       const std::string& out) {
    sgw::BenchReport report = sgw::read_report(in);
    if (out.empty()) {
        sgw::emit_plotdata(report, series, std::cout);
    } else {
        std::ofstream os(out);
        if (!os) throw std::runtime_error("cannot write: " + out);
        sgw::emit_plotdata(report, series, os);
        std::cout << "wrote " << out << "\n";
    }
    return 0;
}

int cmd_model_predict(const std::string& params_src, double connections, double packets,
                      double bytes, bool has_bytes, int crypto_passes, double cpu_hz,
                      double bandwidth_cap, double wire_bytes, double conn_rate) {
    sgw::CostModelParams params = sgw::load_params(params_src);
    if (crypto_passes > 0) params.crypto_passes = crypto_passes;
    sgw::validate_params(params);

    sgw::PredictionInput in;
    in.connections = connections;
    in.packets = packets;
    if (has_bytes) in.bytes = bytes;
    in.wire_bytes_per_pkt = wire_bytes;
    in.connections_per_sec = conn_rate;

    char buf[96];
    snprintf(buf, sizeof(buf), "per_packet_cycles=%.3f", sgw::per_packet_cycles(params));
    std::cout << buf << "\n";
    snprintf(buf, sizeof(buf), "per_connection_cycles=%.3f",
             sgw::per_connection_cycles(params));
    std::cout << buf << "\n";
    snprintf(buf, sizeof(buf), "fixed_cycles=%.3f", sgw::fixed_cycles(params));
    std::cout << buf << "\n";
    snprintf(buf, sizeof(buf), "total_cycles=%.3f", sgw::eval_total(params, in));
    std::cout << buf << "\n";

    if (cpu_hz > 0) {
        in.cpu_hz = cpu_hz;
        if (bandwidth_cap > 0) in.bandwidth_cap_bps = bandwidth_cap;
        auto t = sgw::predict_throughput(params, in);
        snprintf(buf, sizeof(buf), "predicted_pps=%.0f predicted_bps=%.0f bandwidth_limited=%d",
                 t.pps, t.bps, t.bandwidth_limited ? 1 : 0);
        std::cout << buf << "\n";
    }
    return 0;
}

int cmd_model_fit(const std::string& in, const std::string& component, bool zero_intercept,
                  const std::string& params_in, const std::string& params_out) {
    sgw::Component comp = sgw::parse_component(component);
    CsvRows csv = read_csv(in, "x,cycles");
    std::vector<std::pair<double, double>> samples;
    for (const auto& row : csv.rows) {
        if (row.size() != 2) throw std::runtime_error("bad sample row in " + in);
        samples.emplace_back(std::stod(row[0]), std::stod(row[1]));
    }

    sgw::CostModelParams params = sgw::load_params(params_in);
    char buf[160];

    if (comp == sgw::Component::kTableInsert) {
        // Samples are (connections, average per-insert cycles).
        auto fit = sgw::fit_sawtooth(samples);
        params.table_insert_base = fit.base;
        params.table_insert_saw = fit.saw;
        snprintf(buf, sizeof(buf), "component=insert base=%.3f saw=%.3f fit_smape=%.3f%%",
                 fit.base, fit.saw, fit.fit_smape);
        std::cout << buf << "\n";
    } else {
        auto fit = sgw::fit_linear(samples, zero_intercept);
        switch (comp) {
            case sgw::Component::kRx: params.rx_per_pkt = fit.slope; break;
            case sgw::Component::kTx: params.tx_per_pkt = fit.slope; break;
            case sgw::Component::kHash: params.hash_per_pkt = fit.slope; break;
            case sgw::Component::kTableLookup: params.table_lookup_per_pkt = fit.slope; break;
            case sgw::Component::kCryptoBytes: params.crypto_per_byte = fit.slope; break;
            case sgw::Component::kStateMemory:
                params.mem_per_conn = fit.slope;
                params.mem_fixed = fit.intercept;
                break;
            case sgw::Component::kHandshakeSetup:
                params.hs_per_conn = fit.slope;
                params.hs_fixed = fit.intercept;
                break;
            default: break;
        }
        snprintf(buf, sizeof(buf),
                 "component=%s slope=%.3f intercept=%.3f fit_smape=%.3f%%",
                 component.c_str(), fit.slope, fit.intercept, fit.fit_smape);
        std::cout << buf << "\n";
    }

    sgw::validate_params(params);
    if (!params_out.empty()) {
        sgw::save_params(params, params_out);
        std::cout << "wrote " << params_out << "\n";
    }
    return 0;
}

int cmd_model_validate(const std::string& in, const std::string& params_src,
                       const std::string& forecast_path, bool allow_small) {
    CsvRows measured = read_csv(in, "component,arg,cycles");

    // Forecast either from the model or from a file with the same schema.
    std::vector<double> forecast;
    if (forecast_path.empty()) {
        sgw::CostModelParams params = sgw::load_params(params_src);
        for (const auto& row : measured.rows) {
            if (row.size() != 3) throw std::runtime_error("bad row in " + in);
            sgw::Component comp = sgw::parse_component(row[0]);
            forecast.push_back(
                sgw::eval_component(params, comp, std::stod(row[1]), allow_small));
        }
    } else {
        CsvRows f = read_csv(forecast_path, "component,arg,cycles");
        if (f.rows.size() != measured.rows.size())
            throw std::runtime_error("forecast and measured files differ in length");
        for (const auto& row : f.rows) {
            if (row.size() != 3) throw std::runtime_error("bad row in " + forecast_path);
            forecast.push_back(std::stod(row[2]));
        }
    }

    std::vector<double> actual;
    for (const auto& row : measured.rows) actual.push_back(std::stod(row[2]));

    // Component-wise sMAPE in first-appearance order, then the total.
    std::vector<std::string> order;
    std::map<std::string, std::pair<std::vector<double>, std::vector<double>>> grouped;
    for (size_t i = 0; i < measured.rows.size(); ++i) {
        const std::string& name = measured.rows[i][0];
        if (!grouped.count(name)) order.push_back(name);
        grouped[name].first.push_back(forecast[i]);
        grouped[name].second.push_back(actual[i]);
    }

    char buf[96];
    for (const auto& name : order) {
        auto& [f, a] = grouped[name];
        snprintf(buf, sizeof(buf), "sMAPE %s=%.3f%%", name.c_str(), sgw::smape(f, a));
        std::cout << buf << "\n";
    }
    snprintf(buf, sizeof(buf), "sMAPE total=%.3f%%", sgw::smape(forecast, actual));
    std::cout << buf << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"secure UDP gateway and performance-model toolkit"};
    app.require_subcommand(1);
    app.failure_message(CLI::FailureMessage::help);

    std::function<int()> action;

    // gateway run
    auto* gateway = app.add_subcommand("gateway", "gateway server");
    gateway->require_subcommand(1);
    {
        auto* run = gateway->add_subcommand("run", "run the UDP gateway");
        auto listen = std::make_shared<std::string>("127.0.0.1:4433");
        auto workers = std::make_shared<size_t>(1);
        auto suite = std::make_shared<std::string>("chacha20");
        auto kex = std::make_shared<std::string>("ecdhe");
        auto no_reuse = std::make_shared<bool>(false);
        auto max_conns = std::make_shared<size_t>(0);
        auto instrument = std::make_shared<bool>(false);
        auto hash_key = std::make_shared<std::string>();
        auto seed = std::make_shared<uint64_t>(0);
        auto duration = std::make_shared<double>(0);
        auto batch = std::make_shared<size_t>(sgw::kDefaultBatch);
        run->add_option("--listen", *listen, "bind address HOST:PORT");
        run->add_option("--workers", *workers, "worker count")->check(CLI::PositiveNumber);
        run->add_option("--suite", *suite, "cipher suite")
            ->check(CLI::IsMember({"aes128gcm", "aes256gcm", "chacha20"}));
        run->add_option("--kex", *kex, "key agreement")->check(CLI::IsMember({"ecdhe", "dhe"}));
        run->add_flag("--no-reuse-kex", *no_reuse, "fresh server key pair per connection");
        run->add_option("--max-connections", *max_conns, "connection cap (0 = unlimited)");
        run->add_flag("--instrument", *instrument, "per-stage cycle accounting");
        run->add_option("--hash-key", *hash_key, "fixed SipHash key, 32 hex chars");
        run->add_option("--seed", *seed, "deterministic randomness (tests only)");
        run->add_option("--duration", *duration, "stop after SEC seconds (0 = until SIGINT)");
        run->add_option("--batch", *batch, "IO batch size")->check(CLI::PositiveNumber);
        run->callback([=, &action] {
            action = [=] {
                return cmd_gateway_run(*listen, *workers, *suite, *kex, *no_reuse, *max_conns,
                                       *instrument, *hash_key, *seed, *duration, *batch);
            };
        });
    }

    // loadgen
    {
        auto* lg = app.add_subcommand("loadgen", "DTLS-style echo load generator");
        auto target = std::make_shared<std::string>();
        auto connections = std::make_shared<size_t>(1);
        auto packets = std::make_shared<size_t>(10);
        auto payload = std::make_shared<size_t>(500);
        auto rate = std::make_shared<double>(0);
        auto duration = std::make_shared<double>(0);
        auto suite = std::make_shared<std::string>("chacha20");
        auto kex = std::make_shared<std::string>("ecdhe");
        auto seed = std::make_shared<uint64_t>(0);
        auto timeout = std::make_shared<double>(1.0);
        lg->add_option("--target", *target, "gateway address HOST:PORT")->required();
        lg->add_option("--connections", *connections, "concurrent connections")
            ->check(CLI::PositiveNumber);
        lg->add_option("--packets", *packets, "packets per connection");
        lg->add_option("--payload", *payload, "payload bytes (>= 16)");
        lg->add_option("--rate", *rate, "offered packets/sec (0 = unpaced)");
        lg->add_option("--duration", *duration, "send for SEC seconds instead of --packets");
        lg->add_option("--suite", *suite, "cipher suite")
            ->check(CLI::IsMember({"aes128gcm", "aes256gcm", "chacha20"}));
        lg->add_option("--kex", *kex, "key agreement")->check(CLI::IsMember({"ecdhe", "dhe"}));
        lg->add_option("--seed", *seed, "deterministic randomness (tests only)");
        lg->add_option("--timeout", *timeout, "handshake/echo timeout seconds");
        lg->callback([=, &action] {
            action = [=] {
                return cmd_loadgen(*target, *connections, *packets, *payload, *rate, *duration,
                                   *suite, *kex, *seed, *timeout);
            };
        });
    }

    // bench micro|blackbox|plotdata
    auto* bench = app.add_subcommand("bench", "measurement harness");
    bench->require_subcommand(1);
    {
        auto* micro = bench->add_subcommand("micro", "per-stage cycle microbenchmarks");
        auto a = std::make_shared<MicroArgs>();
        micro->add_option("--stage", a->stages,
                          "stage name (repeatable): IO_RX IO_TX HASH TABLE_LOOKUP TABLE_INSERT "
                          "STATE_ALLOC CRYPTO_SEAL CRYPTO_OPEN HANDSHAKE")
            ->required();
        micro->add_option("--iterations", a->iterations, "timed operations per stage")
            ->check(CLI::PositiveNumber);
        micro->add_option("--warmup", a->warmup, "discarded leading timings (-1 = default)");
        micro->add_option("--suite", a->suite, "cipher suite")
            ->check(CLI::IsMember({"aes128gcm", "aes256gcm", "chacha20"}));
        micro->add_option("--kex", a->kex, "key agreement")
            ->check(CLI::IsMember({"ecdhe", "dhe"}));
        micro->add_flag("--no-reuse-kex", a->no_reuse, "fresh server key pair per handshake");
        micro->add_option("--payload", a->payload, "payload bytes for IO/crypto stages");
        micro->add_option("--connections", a->connections, "table working-set size");
        micro->add_option("--seed", a->seed, "deterministic randomness (tests only)");
        micro->add_option("--out", a->out, "output path (default stdout)");
        micro->add_option("--format", a->format, "csv or json")
            ->check(CLI::IsMember({"csv", "json"}));
        micro->add_flag("--trace", a->trace, "emit the raw per-op trace section");
        micro->add_option("--series", a->series,
                          "HANDSHAKE amortization points, e.g. 1,10,100");
        micro->add_option("--clock", a->clock, "cycle source: tsc or monotonic");
        micro->add_option("--nominal-hz", a->nominal_hz,
                          "cycles/sec for the monotonic source");
        micro->add_option("--pin", a->pin, "pin to CPU core");
        micro->callback([=, &action] { action = [=] { return cmd_bench_micro(*a); }; });
    }
    {
        auto* bb = bench->add_subcommand("blackbox", "offered-vs-achieved throughput sweep");
        auto a = std::make_shared<BlackboxArgs>();
        bb->add_option("--rates", a->rates, "offered pps: A:B:STEP or comma list")->required();
        bb->add_option("--duration", a->duration, "seconds per rate point");
        bb->add_option("--target", a->target,
                       "external gateway HOST:PORT (default: in-process gateway)");
        bb->add_option("--connections", a->connections, "loadgen connections")
            ->check(CLI::PositiveNumber);
        bb->add_option("--payload", a->payload, "payload bytes");
        bb->add_option("--suite", a->suite, "cipher suite")
            ->check(CLI::IsMember({"aes128gcm", "aes256gcm", "chacha20"}));
        bb->add_option("--kex", a->kex, "key agreement")->check(CLI::IsMember({"ecdhe", "dhe"}));
        bb->add_option("--seed", a->seed, "deterministic randomness (tests only)");
        bb->add_option("--workers", a->workers, "in-process gateway workers")
            ->check(CLI::PositiveNumber);
        bb->add_option("--queue-cap", a->queue_cap,
                       "bounded loopback queue (in-process mode)");
        bb->add_flag("--flood", a->flood,
                     "pre-seal the offered schedule so overload points stay honest "
                     "when sender and gateway share cores");
        bb->add_option("--out", a->out, "output path (default stdout)");
        bb->add_option("--format", a->format, "csv or json")
            ->check(CLI::IsMember({"csv", "json"}));
        bb->callback([=, &action] { action = [=] { return cmd_bench_blackbox(*a); }; });
    }
    {
        auto* pd = bench->add_subcommand("plotdata", "tidy plot series from a report");
        auto in = std::make_shared<std::string>();
        auto series = std::make_shared<std::string>();
        auto out = std::make_shared<std::string>();
        pd->add_option("--in", *in, "report file (csv or json)")->required();
        pd->add_option("--series", *series, "which series to extract")
            ->required()
            ->check(CLI::IsMember({"throughput", "packet-trace", "stage-means", "kex-handshake",
                                   "amortization", "connection-trace"}));
        pd->add_option("--out", *out, "output path (default stdout)");
        pd->callback([=, &action] {
            action = [=] { return cmd_bench_plotdata(*in, *series, *out); };
        });
    }

    // model predict|fit|validate|params
    auto* model = app.add_subcommand("model", "cost model tooling");
    model->require_subcommand(1);
    {
        auto* pr = model->add_subcommand("predict", "evaluate the cost model");
        auto params = std::make_shared<std::string>("defaults");
        auto connections = std::make_shared<double>(0);
        auto packets = std::make_shared<double>(0);
        auto bytes = std::make_shared<double>(0);
        auto passes = std::make_shared<int>(0);
        auto cpu_hz = std::make_shared<double>(0);
        auto cap = std::make_shared<double>(0);
        auto wire = std::make_shared<double>(576);
        auto conn_rate = std::make_shared<double>(0);
        pr->add_option("--params", *params, "params file or 'defaults'");
        pr->add_option("--connections", *connections, "connection count c");
        pr->add_option("--packets", *packets, "packet count p");
        auto* bytes_opt = pr->add_option("--bytes", *bytes, "payload bytes b (default p*payload)");
        pr->add_option("--crypto-passes", *passes, "override crypto passes (1 or 2)");
        pr->add_option("--cpu-hz", *cpu_hz, "cycle budget for throughput prediction");
        pr->add_option("--bandwidth-cap", *cap, "line-rate bound, bits/sec");
        pr->add_option("--wire-bytes", *wire, "wire bytes per packet");
        pr->add_option("--conn-rate", *conn_rate, "connections/sec folded into the budget");
        pr->callback([=, &action] {
            bool has_bytes = bytes_opt->count() > 0;
            action = [=] {
                return cmd_model_predict(*params, *connections, *packets, *bytes, has_bytes,
                                         *passes, *cpu_hz, *cap, *wire, *conn_rate);
            };
        });
    }
    {
        auto* fit = model->add_subcommand("fit", "refit one component from x,cycles samples");
        auto in = std::make_shared<std::string>();
        auto component = std::make_shared<std::string>();
        auto zero = std::make_shared<bool>(false);
        auto pin = std::make_shared<std::string>("defaults");
        auto pout = std::make_shared<std::string>();
        fit->add_option("--in", *in, "CSV with header x,cycles")->required();
        fit->add_option("--component", *component,
                        "rx tx hash mem insert lookup handshake crypto")
            ->required();
        fit->add_flag("--zero-intercept", *zero, "pin the intercept to 0");
        fit->add_option("--params-in", *pin, "base params file or 'defaults'");
        fit->add_option("--params-out", *pout, "write updated params here");
        fit->callback([=, &action] {
            action = [=] { return cmd_model_fit(*in, *component, *zero, *pin, *pout); };
        });
    }
    {
        auto* val = model->add_subcommand("validate", "score forecasts against measurements");
        auto in = std::make_shared<std::string>();
        auto params = std::make_shared<std::string>("defaults");
        auto forecast = std::make_shared<std::string>();
        auto allow_small = std::make_shared<bool>(false);
        val->add_option("--in", *in, "measured CSV with header component,arg,cycles")
            ->required();
        val->add_option("--params", *params, "params file or 'defaults'");
        val->add_option("--forecast", *forecast,
                        "forecast CSV (same schema); default: model-generated");
        val->add_flag("--allow-small", *allow_small,
                      "permit insert args below the sawtooth domain");
        val->callback([=, &action] {
            action = [=] { return cmd_model_validate(*in, *params, *forecast, *allow_small); };
        });
    }
    {
        auto* pw = model->add_subcommand("params", "write a params file");
        auto src = std::make_shared<std::string>("defaults");
        auto out = std::make_shared<std::string>();
        pw->add_option("--params", *src, "source params file or 'defaults'");
        pw->add_option("--out", *out, "destination path")->required();
        pw->callback([=, &action] {
            action = [=] {
                sgw::save_params(sgw::load_params(*src), *out);
                std::cout << "wrote " << *out << "\n";
                return 0;
            };
        });
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (!action) return 2;
        return action();
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
