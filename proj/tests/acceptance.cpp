// Acceptance gate: every release-blocking property of the gateway and its
// cost model, one verdict line per criterion. Exit status is nonzero when
// any gating criterion fails. Criterion 11 downgrades itself to
// REPORT-ONLY when the cycle counter is too unstable to score fairly;
// criterion 12 is informational by design.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <functional>
#include <limits>
#include <string>
#include <unordered_map>
#include <vector>

#include "sgw/bench.hpp"
#include "sgw/cost_model.hpp"
#include "sgw/flow_hash.hpp"
#include "sgw/gateway.hpp"
#include "sgw/loadgen.hpp"
#include "sgw/state_table.hpp"

using namespace sgw;

namespace {

struct Verdict {
    bool pass = true;
    bool gating = true;
    bool report_only = false;
    std::string detail;
};

struct Checks {
    std::vector<std::string> failures;

    void expect(bool ok, const std::string& msg) {
        if (!ok) failures.push_back(msg);
    }

    Verdict verdict(const std::string& pass_detail = "") const {
        Verdict v;
        v.pass = failures.empty();
        if (v.pass) {
            v.detail = pass_detail;
        } else {
            std::string joined;
            for (size_t i = 0; i < failures.size() && i < 4; ++i) {
                if (i) joined += "; ";
                joined += failures[i];
            }
            if (failures.size() > 4)
                joined += "; +" + std::to_string(failures.size() - 4) + " more";
            v.detail = joined;
        }
        return v;
    }
};

std::string fmt(const char* f, ...) {
    char buf[512];
    va_list ap;
    va_start(ap, f);
    vsnprintf(buf, sizeof(buf), f, ap);
    va_end(ap);
    return buf;
}

bool near(double a, double b, double tol = 1e-6) { return std::fabs(a - b) <= tol; }

// ---------------------------------------------------------------- 1
Verdict closed_form_constants() {
    CostModelParams p;
    Checks c;
    c.expect(eval_component(p, Component::kRx, 1) == 77.0, "rx(1) != 77");
    c.expect(eval_component(p, Component::kTx, 1) == 66.0, "tx(1) != 66");
    c.expect(eval_component(p, Component::kHash, 1) == 62.0, "hash(1) != 62");
    c.expect(eval_component(p, Component::kTableLookup, 1) == 118.0, "lookup(1) != 118");
    c.expect(eval_component(p, Component::kStateMemory, 0) == 1477.0, "mem(0) != 1477");
    c.expect(eval_component(p, Component::kStateMemory, 1) == 1831.0, "mem(1) != 1831");
    c.expect(eval_component(p, Component::kCryptoBytes, 500) == 6000.0, "crypto(500) != 6000");
    c.expect(eval_component(p, Component::kHandshakeSetup, 0) == 5759960.0,
             "handshake(0) != 5759960");
    c.expect(eval_component(p, Component::kHandshakeSetup, 1000) == 2331393960.0,
             "handshake(1000) != 2331393960");
    c.expect(near(eval_component(p, Component::kTableInsert, 1000), 402720.0),
             "insert(1000) != 402720");
    c.expect(near(eval_component(p, Component::kTableInsert, 1024), 582320.0),
             "insert(1024) != 582320");

    PredictionInput in;
    in.connections = 1000;
    in.packets = 1e6;
    c.expect(eval_total(p, in) == 8655319437.0, "total(1000 conns, 1e6 pkts) != 8655319437");
    in.packets = 0;
    c.expect(eval_total(p, in) == 2332319437.0, "total(1000 conns, 0 pkts) != 2332319437");
    return c.verdict("all closed-form reference values exact");
}

// ---------------------------------------------------------------- 2
Verdict aggregate_throughput_constants() {
    CostModelParams p;
    Checks c;
    c.expect(per_packet_cycles(p) == 6323.0, "per-packet != 6323");
    c.expect(per_packet_cycles(p) - p.crypto_per_byte * p.payload_bytes_per_pkt == 323.0,
             "per-packet sans crypto != 323");
    c.expect(per_connection_cycles(p) == 2326558.0, "per-connection != 2326558");
    c.expect(fixed_cycles(p) == 5761437.0, "fixed != 5761437");

    PredictionInput in;
    in.cpu_hz = 3.2e9;
    ThroughputPrediction t = predict_throughput(p, in);
    c.expect(t.pps == 506088.0, fmt("pps at 3.2 GHz = %.0f, want 506088", t.pps));
    c.expect(!t.bandwidth_limited, "cycle-bound case flagged bandwidth-limited");

    in.bandwidth_cap_bps = 1e9;
    t = predict_throughput(p, in);
    c.expect(t.pps == 217013.0, fmt("capped pps = %.0f, want 217013", t.pps));
    c.expect(t.bandwidth_limited, "capped case not flagged bandwidth-limited");
    return c.verdict("aggregates and throughput projections exact");
}

// ---------------------------------------------------------------- 3
Verdict keyed_hash_reference_vectors() {
    static constexpr uint64_t kVectors[64] = {
        0x726fdb47dd0e0e31ULL, 0x74f839c593dc67fdULL, 0x0d6c8009d9a94f5aULL,
        0x85676696d7fb7e2dULL, 0xcf2794e0277187b7ULL, 0x18765564cd99a68dULL,
        0xcbc9466e58fee3ceULL, 0xab0200f58b01d137ULL, 0x93f5f5799a932462ULL,
        0x9e0082df0ba9e4b0ULL, 0x7a5dbbc594ddb9f3ULL, 0xf4b32f46226bada7ULL,
        0x751e8fbc860ee5fbULL, 0x14ea5627c0843d90ULL, 0xf723ca908e7af2eeULL,
        0xa129ca6149be45e5ULL, 0x3f2acc7f57c29bdbULL, 0x699ae9f52cbe4794ULL,
        0x4bc1b3f0968dd39cULL, 0xbb6dc91da77961bdULL, 0xbed65cf21aa2ee98ULL,
        0xd0f2cbb02e3b67c7ULL, 0x93536795e3a33e88ULL, 0xa80c038ccd5ccec8ULL,
        0xb8ad50c6f649af94ULL, 0xbce192de8a85b8eaULL, 0x17d835b85bbb15f3ULL,
        0x2f2e6163076bcfadULL, 0xde4daaaca71dc9a5ULL, 0xa6a2506687956571ULL,
        0xad87a3535c49ef28ULL, 0x32d892fad841c342ULL, 0x7127512f72f27cceULL,
        0xa7f32346f95978e3ULL, 0x12e0b01abb051238ULL, 0x15e034d40fa197aeULL,
        0x314dffbe0815a3b4ULL, 0x027990f029623981ULL, 0xcadcd4e59ef40c4dULL,
        0x9abfd8766a33735cULL, 0x0e3ea96b5304a7d0ULL, 0xad0c42d6fc585992ULL,
        0x187306c89bc215a9ULL, 0xd4a60abcf3792b95ULL, 0xf935451de4f21df2ULL,
        0xa9538f0419755787ULL, 0xdb9acddff56ca510ULL, 0xd06c98cd5c0975ebULL,
        0xe612a3cb9ecba951ULL, 0xc766e62cfcadaf96ULL, 0xee64435a9752fe72ULL,
        0xa192d576b245165aULL, 0x0a8787bf8ecb74b2ULL, 0x81b3e73d20b49b6fULL,
        0x7fa8220ba3b2eceaULL, 0x245731c13ca42499ULL, 0xb78dbfaf3a8d83bdULL,
        0xea1ad565322a1a0bULL, 0x60e61c23a3795013ULL, 0x6606d7e446282b93ULL,
        0x6ca4ecb15c5f91e1ULL, 0x9f626da15c9625f3ULL, 0xe51b38608ef25f57ULL,
        0x958a324ceb064572ULL,
    };

    HashKey key = HashKey::from_hex("000102030405060708090a0b0c0d0e0f");
    Checks c;
    uint8_t msg[64];
    for (size_t len = 0; len < 64; ++len) {
        if (len) msg[len - 1] = static_cast<uint8_t>(len - 1);
        uint64_t got = siphash24(key, BytesView(msg, len));
        c.expect(got == kVectors[len],
                 fmt("vector %zu: got %016llx want %016llx", len,
                     static_cast<unsigned long long>(got),
                     static_cast<unsigned long long>(kVectors[len])));
    }
    return c.verdict("64/64 reference vectors match");
}

// ---------------------------------------------------------------- 4
Verdict state_table_oracle_equivalence() {
    Checks c;

    {
        StateTable<uint64_t> t;
        for (uint64_t k = 1; k <= 1000; ++k) t.insert(k, k * 3);
        c.expect(t.size() == 1000, fmt("size %zu after 1000 inserts", t.size()));
        c.expect(t.capacity() == 2048, fmt("capacity %zu, want 2048", t.capacity()));
        c.expect(t.resize_count() == 8, fmt("%zu rebuilds, want 8", t.resize_count()));
        c.expect(t.capacity() == (size_t(8) << t.resize_count()),
                 "capacity != 8 << rebuilds");
    }

    StateTable<uint64_t> t;
    std::unordered_map<uint64_t, uint64_t> oracle;
    Rng rng(66);
    size_t mismatches = 0;
    for (int i = 0; i < 10000; ++i) {
        uint64_t k = 1 + rng.next_u64() % 512;
        uint64_t v = rng.next_u64();
        switch (rng.next_u64() % 4) {
            case 0: {
                bool fresh = t.insert(k, v);
                bool expect_fresh = oracle.find(k) == oracle.end();
                if (fresh != expect_fresh) ++mismatches;
                if (expect_fresh) oracle[k] = v;
                break;
            }
            case 1: {
                const uint64_t* p = t.lookup(k);
                auto it = oracle.find(k);
                if ((p != nullptr) != (it != oracle.end())) ++mismatches;
                else if (p && *p != it->second) ++mismatches;
                break;
            }
            case 2: {
                bool removed = t.remove(k);
                if (removed != (oracle.erase(k) > 0)) ++mismatches;
                break;
            }
            default: {
                if ((t.lookup(k) != nullptr) != (oracle.count(k) > 0)) ++mismatches;
                break;
            }
        }
        if (t.size() != oracle.size()) ++mismatches;
        if (t.size() + t.tombstones() > t.capacity() / 2) {
            c.expect(false, fmt("load invariant broken at op %d", i));
            break;
        }
    }
    c.expect(mismatches == 0, fmt("%zu oracle mismatches over 10000 ops", mismatches));

    size_t sweep_bad = 0;
    for (uint64_t k = 1; k <= 512; ++k) {
        const uint64_t* p = t.lookup(k);
        auto it = oracle.find(k);
        if ((p != nullptr) != (it != oracle.end()) || (p && *p != it->second)) ++sweep_bad;
    }
    c.expect(sweep_bad == 0, fmt("%zu final-sweep mismatches", sweep_bad));
    return c.verdict("10000 randomized ops agree with the reference map");
}

// ---------------------------------------------------------------- 5
Verdict secure_channel_matrix() {
    Checks c;
    Rng rng(55);
    for (CipherSuite suite : {CipherSuite::kAes128Gcm, CipherSuite::kAes256Gcm,
                              CipherSuite::kChacha20Poly1305}) {
        for (KexMethod kex : {KexMethod::kEcdhe, KexMethod::kDhe}) {
            std::string tag = suite_name(suite) + "/" + kex_name(kex);
            ChannelPair pair = establish_pair(suite, kex, rng);
            c.expect(pair.client.phase() == Phase::kEstablished &&
                         pair.server.phase() == Phase::kEstablished,
                     tag + ": not established");

            Bytes first_record;
            size_t bad_roundtrips = 0;
            for (int i = 0; i < 1000; ++i) {
                size_t len = i == 3 ? 0 : (i == 7 ? kMaxSealPlaintext : (i * 37) % 1400);
                Bytes payload = rng.bytes(len);
                Channel& from = (i % 2 == 0) ? pair.client : pair.server;
                Channel& to = (i % 2 == 0) ? pair.server : pair.client;
                Bytes rec = from.seal(BytesView(payload.data(), payload.size()));
                if (i == 0) first_record = rec;
                OpenResult res = to.open(BytesView(rec.data(), rec.size()));
                if (res.status != OpenStatus::kOk || res.plaintext != payload)
                    ++bad_roundtrips;
            }
            c.expect(bad_roundtrips == 0,
                     tag + fmt(": %zu of 1000 roundtrips failed", bad_roundtrips));

            Bytes payload = rng.bytes(64);
            Bytes rec = pair.client.seal(BytesView(payload.data(), payload.size()));
            Bytes tampered = rec;
            tampered[kRecordHeaderLen + (rng.next_u64() % (rec.size() - kRecordHeaderLen))] ^=
                uint8_t(1) << (rng.next_u64() % 8);
            OpenResult bad = pair.server.open(BytesView(tampered.data(), tampered.size()));
            c.expect(bad.status != OpenStatus::kOk, tag + ": tampered record accepted");
            OpenResult good = pair.server.open(BytesView(rec.data(), rec.size()));
            c.expect(good.status == OpenStatus::kOk && good.plaintext == payload,
                     tag + ": original rejected after tamper attempt");

            OpenResult replay =
                pair.server.open(BytesView(first_record.data(), first_record.size()));
            c.expect(replay.status == OpenStatus::kReplayed,
                     tag + ": replayed record not flagged");
        }
    }
    return c.verdict("3 suites x 2 key agreements: roundtrips, tamper and replay checks");
}

// ---------------------------------------------------------------- 6
Verdict end_to_end_echo_zero_loss() {
    auto net = std::make_shared<LoopbackSwitch>();
    Endpoint gw_ep = parse_endpoint("10.0.0.1:4433");

    GatewayConfig gcfg;
    gcfg.worker_count = 2;
    Rng key_rng(12);
    gcfg.hash_key = HashKey::random(key_rng);
    gcfg.seed = 13;

    Gateway gw(gcfg, net->create_endpoint(gw_ep));
    gw.start();

    std::atomic<uint32_t> next_ip{0x0a000002};
    LoadgenConfig lcfg;
    lcfg.connections = 100;
    lcfg.packets_per_conn = 100;
    lcfg.payload_bytes = 500;
    lcfg.seed = 11;
    lcfg.handshake_timeout_s = 5.0;
    lcfg.echo_timeout_s = 5.0;
    LoadgenStats s = run_loadgen(
        [&] { return net->create_endpoint(Endpoint{next_ip.fetch_add(1), 9000}); },
        gw_ep, lcfg);
    gw.stop();
    WorkerStats ws = gw.stats();

    Checks c;
    c.expect(s.connections_established == 100,
             fmt("%zu/100 connections established", s.connections_established));
    c.expect(s.packets_sent == 10000, fmt("sent %llu, want 10000",
                                          static_cast<unsigned long long>(s.packets_sent)));
    c.expect(s.echoes_verified == 10000,
             fmt("verified %llu/10000 echoes",
                 static_cast<unsigned long long>(s.echoes_verified)));
    c.expect(s.losses == 0, fmt("%llu losses", static_cast<unsigned long long>(s.losses)));
    c.expect(s.verify_failures == 0, "payload verification failures");
    c.expect(gw.dispatch_drops() == 0, "dispatcher dropped packets");
    uint64_t gw_drops = ws.drops_malformed + ws.drops_no_flow + ws.drops_auth +
                        ws.drops_replay + ws.drops_handshake + ws.drops_capacity;
    c.expect(gw_drops == 0, fmt("%llu gateway drops",
                                static_cast<unsigned long long>(gw_drops)));
    return c.verdict("100 connections x 100 packets x 500 B echoed without loss");
}

// ---------------------------------------------------------------- 7
Verdict offered_vs_achieved_curve() {
    auto net = std::make_shared<LoopbackSwitch>(LoopbackOptions{512, true});
    Endpoint gw_ep = parse_endpoint("10.0.0.1:4433");

    GatewayConfig gcfg;
    Rng key_rng(21);
    gcfg.hash_key = HashKey::random(key_rng);
    gcfg.seed = 22;
    Gateway gw(gcfg, net->create_endpoint(gw_ep));
    gw.start();

    std::atomic<uint32_t> next_ip{0x0a000002};
    auto factory = [&] { return net->create_endpoint(Endpoint{next_ip.fetch_add(1), 9000}); };

    // Offered load is pre-sealed: sealing inline would make the sender's cost
    // scale with the offered rate, and on a shared core that starves the
    // gateway and buries the very plateau this criterion is after.
    LoadgenConfig base;
    base.connections = 4;
    base.payload_bytes = 500;
    base.handshake_timeout_s = 5.0;
    base.echo_timeout_s = 0.5;
    base.presealed_flood = true;

    // Capacity: highest rung of an ascending rate ladder still delivering 95%.
    // Preemption can only deflate a rung, so a failing rung gets one retry
    // and keeps its best delivery; one unlucky slice must not truncate the
    // calibration a whole ladder step low.
    double cap = 0;
    uint64_t probe_seed = 23;
    std::string ladder;
    for (double rate = 30000; rate <= 330000; rate *= 1.25) {
        double achieved = 0;
        for (int attempt = 0; attempt < 2 && achieved < 0.95 * rate; ++attempt) {
            LoadgenConfig probe = base;
            probe.duration_s = 0.25;
            probe.rate_pps = rate;
            probe.seed = probe_seed++;
            achieved = std::max(achieved, run_loadgen(factory, gw_ep, probe).achieved_pps);
        }
        ladder += fmt(" %.0f:%.2f", rate, achieved / rate);
        if (achieved < 0.95 * rate) break;
        cap = rate;
    }
    fprintf(stderr, "# criterion 7: ladder (rate:delivery)%s -> capacity %.0f pps\n",
            ladder.c_str(), cap);

    Checks c;
    c.expect(cap > 500.0, fmt("no linear regime found; ladder:%s", ladder.c_str()));
    if (!c.failures.empty()) {
        gw.stop();
        return c.verdict();
    }

    LoadgenConfig linear_cfg = base;
    linear_cfg.duration_s = 0.5;
    linear_cfg.seed = 40;
    std::vector<double> linear_rates{0.2 * cap, 0.4 * cap, 0.6 * cap};
    std::vector<BlackboxPoint> lin = blackbox_sweep(factory, gw_ep, linear_rates, linear_cfg);

    // Saturated offers sit well past the knee even if the ladder landed one
    // step low (its granularity is 1.25x).
    LoadgenConfig sat_cfg = base;
    sat_cfg.duration_s = 0.25;
    sat_cfg.seed = 41;
    std::vector<double> sat_rates{1.8 * cap, 2.5 * cap, 3.2 * cap};
    std::vector<BlackboxPoint> sat = blackbox_sweep(factory, gw_ep, sat_rates, sat_cfg);
    gw.stop();

    std::string curve;
    for (const auto& pt : lin) curve += fmt(" %.0f->%.0f", pt.offered_pps, pt.achieved_pps);
    for (const auto& pt : sat) curve += fmt(" %.0f->%.0f", pt.offered_pps, pt.achieved_pps);
    fprintf(stderr, "# criterion 7: curve%s\n", curve.c_str());

    for (const auto& pt : lin) {
        double err = std::fabs(pt.achieved_pps - pt.offered_pps) / pt.offered_pps;
        c.expect(err <= 0.05, fmt("linear point %.0f pps off by %.1f%% (achieved %.0f)",
                                  pt.offered_pps, err * 100, pt.achieved_pps));
    }

    // Past saturation the curve must decouple from the offered rate: every
    // point well below what was offered, near-flat while the offered rate
    // doubles, and holding at the calibrated capacity level.
    std::vector<double> plateau{sat[0].achieved_pps, sat[1].achieved_pps,
                                sat[2].achieved_pps};
    double lo = *std::min_element(plateau.begin(), plateau.end());
    double hi = *std::max_element(plateau.begin(), plateau.end());
    for (size_t i = 0; i < 3; ++i)
        c.expect(plateau[i] < 0.9 * sat[i].offered_pps,
                 fmt("offered %.0f achieved %.0f: not saturated", sat[i].offered_pps,
                     plateau[i]));
    c.expect(hi <= 1.4 * lo,
             fmt("plateau not flat: achieved spans %.0f..%.0f while offered doubles", lo, hi));
    c.expect(lo >= 0.5 * cap && hi <= 1.45 * cap,
             fmt("plateau %.0f..%.0f detached from calibrated capacity %.0f", lo, hi, cap));
    Verdict v = c.verdict(fmt(
        "linear within 5%% up to 0.6x capacity (%.0f pps), plateau %.0f..%.0f", cap, lo, hi));
    if (!v.pass) v.detail += " [curve:" + curve + "]";
    return v;
}

// ---------------------------------------------------------------- 8
Verdict handshake_cost_amortization() {
    // Best-of-k means: preemption spikes only ever inflate a run, so the
    // smallest repetition is the closest to the true amortized cost.
    auto best_mean = [](bool reuse, uint64_t conns, int reps) {
        BenchConfig cfg;
        cfg.seed = 31;
        cfg.reuse_kex = reuse;
        double best = std::numeric_limits<double>::max();
        for (int i = 0; i < reps; ++i)
            best = std::min(best, measure_stage(Stage::kHandshake, conns, 0, cfg).mean);
        return best;
    };
    double m1 = best_mean(true, 1, 5);
    double m10 = best_mean(true, 10, 3);
    double m100 = best_mean(true, 100, 3);
    double n1 = best_mean(false, 1, 5);
    double n100 = best_mean(false, 100, 3);

    Checks c;
    c.expect(m10 <= m1 * 1.05, fmt("reuse mean rose 1->10 conns (%.0f -> %.0f)", m1, m10));
    c.expect(m100 <= m10 * 1.10, fmt("reuse mean rose 10->100 conns (%.0f -> %.0f)", m10, m100));
    double reuse_ratio = m100 / m1;
    double fresh_ratio = n100 / n1;
    c.expect(reuse_ratio < fresh_ratio,
             fmt("reuse does not amortize: reuse ratio %.2f vs fresh-keys ratio %.2f",
                 reuse_ratio, fresh_ratio));
    c.expect(m100 < n100,
             fmt("at 100 conns reuse (%.0f) not cheaper than fresh keys (%.0f)", m100, n100));
    return c.verdict(fmt("reuse %.0f/%.0f/%.0f cycles at 1/10/100 conns; fresh stays ~%.0f",
                         m1, m10, m100, n100));
}

// ---------------------------------------------------------------- 9
Verdict key_agreement_cost_ordering() {
    BenchConfig cfg;
    cfg.seed = 33;
    cfg.kex = KexMethod::kEcdhe;
    double ecdhe = measure_stage(Stage::kHandshake, 10, 0, cfg).mean;
    cfg.kex = KexMethod::kDhe;
    double dhe = measure_stage(Stage::kHandshake, 10, 0, cfg).mean;

    Checks c;
    c.expect(dhe > ecdhe, fmt("dhe %.0f not above ecdhe %.0f", dhe, ecdhe));
    return c.verdict(fmt("dhe %.0f > ecdhe %.0f cycles per handshake at 10 conns", dhe, ecdhe));
}

// ---------------------------------------------------------------- 10
Verdict model_fit_recovery() {
    Checks c;

    std::vector<std::pair<double, double>> mem{{0, 1477}, {1, 1831}, {2, 2185}};
    FitResult lr = fit_linear(mem);
    c.expect(near(lr.slope, 354.0) && near(lr.intercept, 1477.0),
             fmt("exact linear fit gave %.3f x + %.3f", lr.slope, lr.intercept));

    std::vector<std::pair<double, double>> saw_pts;
    for (double cc : {1000.0, 1500.0, 2048.0, 3000.0, 5000.0})
        saw_pts.push_back({cc, 400.0 + 170.0 * sawtooth_weight(cc)});
    SawtoothFit sf = fit_sawtooth(saw_pts);
    c.expect(near(sf.base, 400.0) && near(sf.saw, 170.0),
             fmt("exact sawtooth fit gave base %.3f saw %.3f", sf.base, sf.saw));

    Rng rng(41);
    std::vector<std::pair<double, double>> noisy;
    for (double x = 100; x <= 10000; x += 300) {
        double noise = 1.0 + 0.05 * (static_cast<double>(rng.next_u64() % 2001) - 1000) / 1000.0;
        noisy.push_back({x, 118.0 * x * noise});
    }
    FitResult nf = fit_linear(noisy, true);
    c.expect(std::fabs(nf.slope - 118.0) / 118.0 <= 0.05,
             fmt("5%%-noise slope %.2f strays from 118 by > 5%%", nf.slope));

    std::vector<std::pair<double, double>> noisy_saw;
    for (double cc = 1000; cc <= 60000; cc *= 1.5) {
        double noise = 1.0 + 0.10 * (static_cast<double>(rng.next_u64() % 2001) - 1000) / 1000.0;
        noisy_saw.push_back({cc, (400.0 + 170.0 * sawtooth_weight(cc)) * noise});
    }
    SawtoothFit nsf = fit_sawtooth(noisy_saw);
    c.expect(nsf.fit_smape <= 15.0,
             fmt("10%%-noise sawtooth fit sMAPE %.2f%% > 15%%", nsf.fit_smape));
    return c.verdict("linear and sawtooth coefficients recovered, noise within bounds");
}

// ---------------------------------------------------------------- 11
// One instrumented, paced gateway run; returns the per-stage cycle sums.
struct GatewayRun {
    WorkerStats stats;
    LoadgenStats load;
    double stage_total = 0;
};

GatewayRun run_instrumented_gateway(uint64_t seed) {
    auto net = std::make_shared<LoopbackSwitch>();
    Endpoint gw_ep = parse_endpoint("10.0.0.1:4433");
    GatewayConfig gcfg;
    gcfg.instrument = true;
    Rng key_rng(seed);
    gcfg.hash_key = HashKey::random(key_rng);
    gcfg.seed = seed + 1;
    Gateway gw(gcfg, net->create_endpoint(gw_ep));
    gw.start();

    // Pre-sealed flood at a high rate: the per-packet cost equations describe
    // sustained throughput, where arrivals come in full batches, not the
    // wake-per-wisp economics of a mostly idle gateway.
    std::atomic<uint32_t> next_ip{0x0a000002};
    LoadgenConfig lcfg;
    lcfg.connections = 100;
    lcfg.payload_bytes = 500;
    lcfg.rate_pps = 120000;
    lcfg.duration_s = 0.25;
    lcfg.presealed_flood = true;
    lcfg.seed = seed + 2;
    lcfg.handshake_timeout_s = 5.0;
    lcfg.echo_timeout_s = 5.0;

    GatewayRun run;
    run.load = run_loadgen(
        [&] { return net->create_endpoint(Endpoint{next_ip.fetch_add(1), 9000}); },
        gw_ep, lcfg);
    gw.stop();
    run.stats = gw.stats();
    for (size_t i = 0; i < kStageCount; ++i)
        run.stage_total += static_cast<double>(run.stats.stage_cycles[i]);
    return run;
}

Verdict refit_model_predicts_gateway() {
    // Every coefficient is refit from this host's own micro measurements.
    // Volatile short loops take the best of two repetitions: preemption
    // only ever inflates a run.
    BenchConfig cfg;
    cfg.seed = 51;
    cfg.connections = 100;
    cfg.payload_bytes = 500;
    auto best2 = [&](Stage st, uint64_t iters, uint64_t warmup, const BenchConfig& bc) {
        double a = measure_stage(st, iters, warmup, bc).mean;
        double b = measure_stage(st, iters, warmup, bc).mean;
        return std::min(a, b);
    };

    CostModelParams p;
    p.hash_per_pkt = best2(Stage::kHash, 20000, 2000, cfg);
    p.table_lookup_per_pkt = best2(Stage::kTableLookup, 20000, 2000, cfg);
    p.mem_per_conn = best2(Stage::kStateAlloc, 100, 0, cfg);
    p.mem_fixed = 0;
    p.table_insert_base = best2(Stage::kTableInsert, 100, 0, cfg);
    p.table_insert_saw = 0;
    p.hs_per_conn = best2(Stage::kHandshake, 100, 0, cfg);
    p.hs_fixed = 0;

    double seal = best2(Stage::kCryptoSeal, 2000, 200, cfg);
    double open = best2(Stage::kCryptoOpen, 2000, 200, cfg);
    p.crypto_per_byte = (seal + open) / (2.0 * 500.0);
    p.crypto_passes = 2;  // the gateway both opens and reseals each packet
    p.payload_bytes_per_pkt = 500;

    BenchConfig iocfg = cfg;
    iocfg.payload_bytes = 529;  // sealed 500 B payload on the wire
    p.rx_per_pkt = best2(Stage::kIoRx, 8000, 800, iocfg);
    p.tx_per_pkt = best2(Stage::kIoTx, 8000, 800, iocfg);

    // Two instrumented gateway runs. Their agreement doubles as the
    // stability gate: when the same workload costs wildly different cycle
    // counts back to back, this host cannot score a cycle model fairly
    // and the criterion reports instead of gating.
    GatewayRun r1 = run_instrumented_gateway(46);
    GatewayRun r2 = run_instrumented_gateway(146);
    double spread = std::fabs(r1.stage_total - r2.stage_total) /
                    std::max(r1.stage_total, r2.stage_total);
    bool stable = spread <= 0.15;
    const GatewayRun& r = r1.stage_total <= r2.stage_total ? r1 : r2;

    Checks c;
    c.expect(r.load.connections_established == 100,
             fmt("%zu/100 connections established", r.load.connections_established));
    c.expect(r.load.packets_sent > 10000,
             fmt("only %llu packets offered",
                 static_cast<unsigned long long>(r.load.packets_sent)));
    c.expect(r.load.echoes_verified == r.load.packets_sent && r.load.losses == 0,
             fmt("verified %llu of %llu echoes (%llu lost)",
                 static_cast<unsigned long long>(r.load.echoes_verified),
                 static_cast<unsigned long long>(r.load.packets_sent),
                 static_cast<unsigned long long>(r.load.losses)));

    double measured = r.stage_total;
    PredictionInput in;
    in.connections = 100;
    in.packets = r.load.packets_sent;
    double predicted = eval_total(p, in);

    fprintf(stderr,
            "# criterion 11: refit rx=%.1f tx=%.1f hash=%.1f lookup=%.1f mem=%.1f "
            "insert=%.1f hs=%.0f crypto/B=%.3f\n",
            p.rx_per_pkt, p.tx_per_pkt, p.hash_per_pkt, p.table_lookup_per_pkt,
            p.mem_per_conn, p.table_insert_base, p.hs_per_conn, p.crypto_per_byte);
    for (size_t i = 0; i < kStageCount; ++i)
        fprintf(stderr, "# criterion 11: stage %s measured %llu cycles\n",
                stage_name(static_cast<Stage>(i)).c_str(),
                static_cast<unsigned long long>(r.stats.stage_cycles[i]));
    fprintf(stderr, "# criterion 11: run totals %.4g vs %.4g (spread %.1f%%), %llu packets\n",
            r1.stage_total, r2.stage_total, spread * 100,
            static_cast<unsigned long long>(r.load.packets_sent));

    std::vector<double> f{predicted}, a{measured};
    double err = smape(f, a);
    c.expect(err <= 25.0, fmt("sMAPE %.2f%% > 25%% (predicted %.4g, measured %.4g)",
                              err, predicted, measured));

    Verdict v = c.verdict(fmt("predicted %.3e vs measured %.3e cycles, sMAPE %.2f%%",
                              predicted, measured, err));
    if (!stable) {
        v.report_only = true;
        v.gating = false;
        v.detail += fmt(" [unstable host: back-to-back runs differ by %.0f%%]", spread * 100);
    }
    return v;
}

// ---------------------------------------------------------------- 12
Verdict nominal_frequency_note() {
    CycleClock clk = CycleClock::best(1e9);
    double hz = clk.estimate_hz(std::chrono::milliseconds(200));
    bool within = hz >= 1.6e9 && hz <= 6.4e9;
    Verdict v;
    v.pass = true;
    v.gating = false;
    v.detail = fmt("reference constants assume ~3.2 GHz; this host runs ~%.2f GHz (%s 2x)",
                   hz / 1e9, within ? "within" : "OUTSIDE");
    return v;
}

}  // namespace

int main() {
    struct Criterion {
        int id;
        const char* name;
        std::function<Verdict()> fn;
    };
    std::vector<Criterion> criteria{
        {1, "closed_form_constants", closed_form_constants},
        {2, "aggregate_throughput_constants", aggregate_throughput_constants},
        {3, "keyed_hash_reference_vectors", keyed_hash_reference_vectors},
        {4, "state_table_oracle_equivalence", state_table_oracle_equivalence},
        {5, "secure_channel_matrix", secure_channel_matrix},
        {6, "end_to_end_echo_zero_loss", end_to_end_echo_zero_loss},
        {7, "offered_vs_achieved_curve", offered_vs_achieved_curve},
        {8, "handshake_cost_amortization", handshake_cost_amortization},
        {9, "key_agreement_cost_ordering", key_agreement_cost_ordering},
        {10, "model_fit_recovery", model_fit_recovery},
        {11, "refit_model_predicts_gateway", refit_model_predicts_gateway},
        {12, "cycle_frequency_note", nominal_frequency_note},
    };

    int gating_failures = 0;
    for (const auto& cr : criteria) {
        Verdict v;
        try {
            v = cr.fn();
        } catch (const std::exception& e) {
            v.pass = false;
            v.detail = std::string("exception: ") + e.what();
        }
        const char* verdict = v.pass ? "PASS" : (v.report_only ? "REPORT-ONLY" : "FAIL");
        if (!v.pass && v.report_only) verdict = "REPORT-ONLY";
        printf("ACCEPT %2d %s: %s%s%s\n", cr.id, cr.name, verdict,
               v.detail.empty() ? "" : " (", v.detail.empty() ? "" : (v.detail + ")").c_str());
        if (!v.pass && v.gating && !v.report_only) ++gating_failures;
        fflush(stdout);
    }
    printf("acceptance: %zu criteria, %d gating failure%s\n", criteria.size(),
           gating_failures, gating_failures == 1 ? "" : "s");
    return gating_failures == 0 ? 0 : 1;
}
