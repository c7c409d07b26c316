#ifndef SGW_GATEWAY_HPP
#define SGW_GATEWAY_HPP

#include <array>
#include <atomic>
#include <memory>
#include <thread>
#include <vector>

#include "sgw/channel.hpp"
#include "sgw/cycle_clock.hpp"
#include "sgw/flow_hash.hpp"
#include "sgw/packet_io.hpp"
#include "sgw/state_table.hpp"

namespace sgw {

// Deterministic flow-to-worker mapping: the software stand-in for
// receive-side scaling. Depends only on (key, worker count).
inline size_t dispatch(FlowKey key, size_t worker_count) {
    if (worker_count == 0) throw std::invalid_argument("worker count must be >= 1");
    return static_cast<size_t>(key.value % worker_count);
}

struct GatewayConfig {
    ChannelConfig channel;  // suite, key agreement; server_keypair is managed below
    bool reuse_kex = true;
    size_t worker_count = 1;
    size_t max_connections = 0;  // 0 = unlimited
    bool instrument = false;
    HashKey hash_key{0, 0};
    size_t batch_size = kDefaultBatch;
    uint64_t seed = 0;  // 0 = OS randomness
};

struct WorkerStats {
    uint64_t packets_in = 0;
    uint64_t packets_out = 0;
    uint64_t bytes_in = 0;
    uint64_t bytes_out = 0;
    uint64_t connections_opened = 0;       // states allocated
    uint64_t connections_established = 0;  // handshakes completed
    uint64_t drops_malformed = 0;
    uint64_t drops_no_flow = 0;      // application record with no known flow
    uint64_t drops_auth = 0;
    uint64_t drops_replay = 0;
    uint64_t drops_handshake = 0;    // failed handshake messages
    uint64_t drops_capacity = 0;     // connection cap reached
    std::array<uint64_t, kStageCount> stage_cycles{};
    uint64_t total_cycles = 0;  // whole-iteration time, >= sum of stages

    void merge(const WorkerStats& o);
};

// Per-flow record: the secured channel plus the peer to answer to.
struct ConnectionState {
    Channel channel;
    Endpoint peer;

    ConnectionState(Role role, const ChannelConfig& cfg, Rng& rng, Endpoint p)
        : channel(role, cfg, rng), peer(p) {}
};

// One share-nothing pipeline instance: flow hashing, state table, phase
// dispatched record processing. Owns all its connection state; never
// touches another worker's.
class Worker {
 public:
    Worker(size_t id, const GatewayConfig& cfg, const CycleClock& clock);

    // Full pipeline for one datagram: flow key, state lookup (allocating
    // on the new-connection path), then the phase handler from the
    // function table. Returns response datagrams addressed to the peer.
    std::vector<Datagram> process_packet(const Datagram& dgram);

    // rx_batch -> process_packet* -> tx_batch until stop. Driver close
    // ends the loop cleanly.
    void run(Driver& io, const std::atomic<bool>& stop);

    void set_local_endpoint(Endpoint ep) { local_ = ep; }
    const WorkerStats& stats() const { return stats_; }
    size_t id() const { return id_; }
    size_t connection_count() const { return table_.size(); }
    const StateTable<std::unique_ptr<ConnectionState>>& table() const { return table_; }

 private:
    using Handler = void (Worker::*)(ConnectionState&, const RecordHeader&, BytesView,
                                     std::vector<Bytes>&);

    void handle_handshake(ConnectionState& st, const RecordHeader& h, BytesView record,
                          std::vector<Bytes>& responses);
    void handle_established(ConnectionState& st, const RecordHeader& h, BytesView record,
                            std::vector<Bytes>& responses);
    void handle_closed(ConnectionState& st, const RecordHeader& h, BytesView record,
                       std::vector<Bytes>& responses);

    uint64_t clock_now() const { return instrument_ ? clock_->now() : 0; }
    void charge(Stage s, uint64_t t0) {
        if (instrument_) stats_.stage_cycles[static_cast<size_t>(s)] += clock_->now() - t0;
    }

    size_t id_;
    GatewayConfig cfg_;
    bool instrument_;
    const CycleClock* clock_;
    Rng rng_;
    Endpoint local_{};
    StateTable<std::unique_ptr<ConnectionState>> table_;
    WorkerStats stats_;

    // Fig. 2 function table: connection phase indexes the packet handler.
    std::array<Handler, 4> function_table_;
};

// Dispatcher plus n workers. With one worker the dispatcher is bypassed
// and the worker loop runs directly on the driver; with more, a dispatcher
// thread hashes and hands datagrams to per-worker queues (single producer,
// single consumer) while workers transmit their own responses.
class Gateway {
 public:
    Gateway(GatewayConfig cfg, std::shared_ptr<Driver> io);
    ~Gateway();

    void start();
    void stop();  // idempotent; joins all threads

    bool running() const { return running_; }
    Endpoint local_endpoint() const { return io_->local_endpoint(); }
    const CycleClock& clock() const { return clock_; }

    // Aggregate over workers plus dispatcher-side queue drops. Safe to
    // call after stop(); while running it reads live counters (approximate).
    WorkerStats stats() const;
    uint64_t dispatch_drops() const { return dispatch_drops_.load(); }
    size_t connection_count() const;

 private:
    struct HandoffQueue;

    void run_dispatcher();
    void run_queued_worker(size_t idx);

    GatewayConfig cfg_;
    std::shared_ptr<Driver> io_;
    CycleClock clock_;
    std::vector<std::unique_ptr<Worker>> workers_;
    std::vector<std::unique_ptr<HandoffQueue>> queues_;
    std::vector<std::thread> threads_;
    std::atomic<bool> stop_{false};
    std::atomic<uint64_t> dispatch_drops_{0};
    bool running_ = false;
};

}  // namespace sgw

#endif  // SGW_GATEWAY_HPP
