#ifndef SGW_LOADGEN_HPP
#define SGW_LOADGEN_HPP

#include <functional>
#include <memory>
#include <vector>

#include "sgw/bench.hpp"
#include "sgw/channel.hpp"
#include "sgw/packet_io.hpp"

namespace sgw {

struct LoadgenConfig {
    size_t connections = 1;
    size_t packets_per_conn = 10;
    size_t payload_bytes = 500;   // >= 16: the payload embeds (conn, seq)
    double rate_pps = 0;          // 0 = unpaced
    double duration_s = 0;        // > 0: send for this long instead of a fixed count
    CipherSuite suite = CipherSuite::kChacha20Poly1305;
    KexMethod kex = KexMethod::kEcdhe;
    uint64_t seed = 0;
    double handshake_timeout_s = 1.0;
    double echo_timeout_s = 1.0;  // no-progress timeout for the final drain
    size_t batch_size = kDefaultBatch;
    // Seal the whole paced schedule up front so the send loop only moves
    // records. Keeps the sender's per-offered-packet cost flat, which is the
    // only way overload probes stay honest when sender and target share cores.
    // Requires rate_pps > 0 and duration_s > 0.
    bool presealed_flood = false;
};

struct LoadgenStats {
    size_t connections_requested = 0;
    size_t connections_established = 0;
    size_t handshake_timeouts = 0;
    uint64_t packets_sent = 0;
    uint64_t echoes_verified = 0;
    uint64_t losses = 0;
    uint64_t verify_failures = 0;  // echoed payload mismatch: a correctness bug
    double offered_pps = 0;
    double achieved_pps = 0;
    double achieved_bps = 0;  // wire record bits per second echoed back
    double elapsed_s = 0;
};

// Each connection is a distinct source endpoint, hence a distinct flow;
// the factory mints one driver per connection (loopback switch or UDP).
using DriverFactory = std::function<std::shared_ptr<Driver>()>;

// Handshakes c connections against the target, sends sealed payloads
// round-robin at the offered rate and verifies every echo. Throws on
// verification mismatch; handshake timeouts are counted, not fatal.
LoadgenStats run_loadgen(const DriverFactory& make_driver, Endpoint target,
                         const LoadgenConfig& cfg);

// One duration-bounded loadgen run per offered rate, ascending. Fresh
// connections per point. Throws when no connection can be established.
std::vector<BlackboxPoint> blackbox_sweep(const DriverFactory& make_driver, Endpoint target,
                                          const std::vector<double>& rates,
                                          const LoadgenConfig& base);

}  // namespace sgw

#endif  // SGW_LOADGEN_HPP
