#include "sgw/loadgen.hpp"

#include <algorithm>
#include <chrono>
#include <unordered_set>

namespace sgw {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

BytesView record_body(const Bytes& record) {
    return BytesView(record.data() + kRecordHeaderLen, record.size() - kRecordHeaderLen);
}

// Deterministic payload for (connection, sequence): both IDs up front,
// then a cheap byte pattern. Regenerated on echo receipt for comparison.
Bytes make_payload(uint64_t conn, uint64_t seq, size_t size) {
    Bytes p(size);
    put_u32_be(p.data(), static_cast<uint32_t>(conn >> 32));
    put_u32_be(p.data() + 4, static_cast<uint32_t>(conn));
    put_u32_be(p.data() + 8, static_cast<uint32_t>(seq >> 32));
    put_u32_be(p.data() + 12, static_cast<uint32_t>(seq));
    uint8_t x = static_cast<uint8_t>(conn * 131 + seq * 31 + 7);
    for (size_t i = 16; i < size; ++i) p[i] = x += 0x9d;
    return p;
}

struct LoadConn {
    std::shared_ptr<Driver> io;
    std::unique_ptr<Channel> channel;
    uint64_t next_app_seq = 0;  // loadgen-level sequence embedded in payloads
    std::unordered_set<uint64_t> outstanding;
};

}  // namespace

LoadgenStats run_loadgen(const DriverFactory& make_driver, Endpoint target,
                         const LoadgenConfig& cfg) {
    if (cfg.connections < 1) throw std::invalid_argument("need at least 1 connection");
    if (cfg.payload_bytes < 16)
        throw std::invalid_argument("payload must be >= 16 bytes (embeds ids)");
    if (cfg.presealed_flood && (cfg.rate_pps <= 0 || cfg.duration_s <= 0))
        throw std::invalid_argument("presealed flood needs a rate and a duration");

    LoadgenStats stats;
    stats.connections_requested = cfg.connections;

    Rng rng = cfg.seed ? Rng(cfg.seed) : Rng();
    ChannelConfig ccfg{cfg.suite, cfg.kex, nullptr};

    // Handshake phase, one connection at a time.
    std::vector<LoadConn> conns;
    for (size_t i = 0; i < cfg.connections; ++i) {
        LoadConn c;
        c.io = make_driver();
        c.channel = std::make_unique<Channel>(Role::kClient, ccfg, rng);

        Bytes hello = c.channel->start_handshake();
        Datagram d{hello, target, monotonic_ns()};
        c.io->tx_batch(std::span<const Datagram>(&d, 1));

        auto t0 = Clock::now();
        while (c.channel->phase() != Phase::kEstablished &&
               seconds_since(t0) < cfg.handshake_timeout_s) {
            c.io->wait_readable(1'000'000);
            for (auto& in : c.io->rx_batch(cfg.batch_size)) {
                BytesView rv(in.payload.data(), in.payload.size());
                auto h = parse_record_header(rv);
                if (!h || h->content_type != kContentHandshake) continue;
                auto res = c.channel->handshake_step(rv.subspan(kRecordHeaderLen));
                for (auto& r : res.responses) {
                    Datagram out{std::move(r), target, monotonic_ns()};
                    c.io->tx_batch(std::span<const Datagram>(&out, 1));
                }
            }
        }

        if (c.channel->phase() == Phase::kEstablished) {
            conns.push_back(std::move(c));
            stats.connections_established++;
        } else {
            stats.handshake_timeouts++;
        }
    }
    if (conns.empty()) {
        if (cfg.connections > 0 && stats.connections_established == 0)
            throw std::runtime_error("no connection could be established with the target");
        return stats;
    }

    const bool timed_run = cfg.duration_s > 0;
    const uint64_t send_budget =
        timed_run ? UINT64_MAX : static_cast<uint64_t>(cfg.packets_per_conn) * conns.size();
    uint64_t echoed_wire_bytes = 0;

    // Pre-sealed flood schedule: records minted here, in the exact round-robin
    // order the send loop walks, so offered packets cost only a queue handoff.
    struct FloodItem {
        Bytes rec;
        uint64_t seq;
    };
    std::vector<FloodItem> flood;
    if (cfg.presealed_flood) {
        uint64_t total =
            static_cast<uint64_t>(cfg.rate_pps * cfg.duration_s) + 2 * cfg.batch_size;
        if (total > 1'000'000)
            throw std::invalid_argument("presealed flood schedule too large; shorten the window");
        flood.reserve(total);
        for (uint64_t k = 0; k < total; ++k) {
            LoadConn& c = conns[k % conns.size()];
            uint64_t seq = c.next_app_seq++;
            Bytes payload = make_payload(k % conns.size(), seq, cfg.payload_bytes);
            flood.push_back({c.channel->seal(BytesView(payload.data(), payload.size())), seq});
        }
    }

    auto drain = [&](LoadConn& c, uint64_t conn_idx) {
        for (auto& in : c.io->rx_batch(cfg.batch_size)) {
            BytesView rv(in.payload.data(), in.payload.size());
            auto res = c.channel->open(rv);
            if (res.status != OpenStatus::kOk) continue;  // stray or damaged echo
            if (res.plaintext.size() != cfg.payload_bytes) {
                stats.verify_failures++;
                continue;
            }
            uint64_t conn = (uint64_t(get_u32_be(res.plaintext.data())) << 32) |
                            get_u32_be(res.plaintext.data() + 4);
            uint64_t seq = (uint64_t(get_u32_be(res.plaintext.data() + 8)) << 32) |
                           get_u32_be(res.plaintext.data() + 12);
            Bytes expected = make_payload(conn, seq, cfg.payload_bytes);
            if (conn != conn_idx || expected != res.plaintext) {
                stats.verify_failures++;
                continue;
            }
            if (c.outstanding.erase(seq)) {
                stats.echoes_verified++;
                echoed_wire_bytes += in.payload.size();
            }
        }
    };

    // Send phase: token-paced round robin with opportunistic draining.
    auto t0 = Clock::now();
    uint64_t sent = 0;
    size_t rr = 0;
    while (true) {
        double elapsed = seconds_since(t0);
        if (timed_run && elapsed >= cfg.duration_s) break;
        if (!timed_run && sent >= send_budget) break;

        uint64_t allowance;
        if (cfg.rate_pps > 0) {
            uint64_t due = static_cast<uint64_t>(elapsed * cfg.rate_pps);
            allowance = due > sent ? std::min<uint64_t>(due - sent, cfg.batch_size) : 0;
        } else {
            allowance = cfg.batch_size;
        }
        if (!timed_run) allowance = std::min(allowance, send_budget - sent);

        for (uint64_t k = 0; k < allowance; ++k) {
            LoadConn& c = conns[rr];
            uint64_t conn_idx = rr;
            rr = (rr + 1) % conns.size();

            uint64_t seq;
            Bytes rec;
            if (cfg.presealed_flood) {
                if (sent >= flood.size()) break;  // slack exhausted, stop offering
                seq = flood[sent].seq;
                rec = std::move(flood[sent].rec);
            } else {
                seq = c.next_app_seq++;
                Bytes payload = make_payload(conn_idx, seq, cfg.payload_bytes);
                rec = c.channel->seal(BytesView(payload.data(), payload.size()));
            }
            Datagram d{std::move(rec), target, monotonic_ns()};
            if (c.io->tx_batch(std::span<const Datagram>(&d, 1)) == 1) {
                c.outstanding.insert(seq);
                stats.packets_sent++;
            }
            sent++;
        }

        for (size_t i = 0; i < conns.size(); ++i) drain(conns[i], i);
        if (allowance == 0) conns[rr].io->wait_readable(200'000);
        if (stats.verify_failures) break;
    }
    double send_elapsed = seconds_since(t0);

    // Final drain: wait for stragglers until progress stalls.
    auto last_progress = Clock::now();
    double last_progress_s = send_elapsed;
    uint64_t last_count = stats.echoes_verified;
    auto outstanding_total = [&] {
        uint64_t n = 0;
        for (auto& c : conns) n += c.outstanding.size();
        return n;
    };
    while (outstanding_total() > 0 && !stats.verify_failures) {
        for (size_t i = 0; i < conns.size(); ++i) drain(conns[i], i);
        if (stats.echoes_verified != last_count) {
            last_count = stats.echoes_verified;
            last_progress = Clock::now();
            last_progress_s = seconds_since(t0);
        } else if (std::chrono::duration<double>(Clock::now() - last_progress).count() >
                   cfg.echo_timeout_s) {
            break;
        } else {
            conns[0].io->wait_readable(500'000);
        }
    }

    if (stats.verify_failures)
        throw std::runtime_error("echo verification mismatch: payload corrupted in transit");

    stats.losses = outstanding_total();
    stats.elapsed_s = seconds_since(t0);
    stats.offered_pps =
        cfg.rate_pps > 0 ? cfg.rate_pps
                         : (send_elapsed > 0 ? static_cast<double>(stats.packets_sent) /
                                                   send_elapsed
                                             : 0);
    // Throughput window: the send phase plus however long echoes kept landing.
    // The no-progress wait before giving up is idle time, not throughput, and
    // must not deflate the rate of an overloaded run.
    double window = std::max({send_elapsed, last_progress_s, 1e-9});
    stats.achieved_pps = static_cast<double>(stats.echoes_verified) / window;
    stats.achieved_bps = static_cast<double>(echoed_wire_bytes) * 8.0 / window;
    return stats;
}

std::vector<BlackboxPoint> blackbox_sweep(const DriverFactory& make_driver, Endpoint target,
                                          const std::vector<double>& rates,
                                          const LoadgenConfig& base) {
    if (rates.empty()) throw std::invalid_argument("rate list must not be empty");
    if (!std::is_sorted(rates.begin(), rates.end()))
        throw std::invalid_argument("rates must be ascending");

    std::vector<BlackboxPoint> points;
    for (double rate : rates) {
        LoadgenConfig cfg = base;
        cfg.rate_pps = rate;
        if (cfg.duration_s <= 0) cfg.duration_s = 1.0;
        LoadgenStats s = run_loadgen(make_driver, target, cfg);
        points.push_back({s.offered_pps, s.achieved_pps, s.achieved_bps});
    }
    return points;
}

}  // namespace sgw
