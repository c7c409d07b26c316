#include "sgw/gateway.hpp"

#include <condition_variable>
#include <deque>
#include <mutex>

namespace sgw {

void WorkerStats::merge(const WorkerStats& o) {
    packets_in += o.packets_in;
    packets_out += o.packets_out;
    bytes_in += o.bytes_in;
    bytes_out += o.bytes_out;
    connections_opened += o.connections_opened;
    connections_established += o.connections_established;
    drops_malformed += o.drops_malformed;
    drops_no_flow += o.drops_no_flow;
    drops_auth += o.drops_auth;
    drops_replay += o.drops_replay;
    drops_handshake += o.drops_handshake;
    drops_capacity += o.drops_capacity;
    for (size_t i = 0; i < kStageCount; ++i) stage_cycles[i] += o.stage_cycles[i];
    total_cycles += o.total_cycles;
}

Worker::Worker(size_t id, const GatewayConfig& cfg, const CycleClock& clock)
    : id_(id),
      cfg_(cfg),
      instrument_(cfg.instrument),
      clock_(&clock),
      rng_(cfg.seed ? Rng(cfg.seed ^ (0x9e3779b97f4a7c15ULL * (id + 1))) : Rng()) {
    if (cfg_.reuse_kex) {
        if (!cfg_.channel.server_keypair)
            cfg_.channel.server_keypair = std::make_shared<KexKeyPair>();
    } else {
        cfg_.channel.server_keypair = nullptr;
    }
    function_table_ = {&Worker::handle_handshake,    // kAwaitingHello
                       &Worker::handle_handshake,    // kAwaitingFinished
                       &Worker::handle_established,  // kEstablished
                       &Worker::handle_closed};      // kClosed
}

std::vector<Datagram> Worker::process_packet(const Datagram& dgram) {
    stats_.packets_in++;
    stats_.bytes_in += dgram.payload.size();

    BytesView payload(dgram.payload.data(), dgram.payload.size());

    uint64_t t0 = clock_now();
    FlowKey key = flow_key(cfg_.hash_key, extract_five_tuple(dgram.peer, local_));
    charge(Stage::kHash, t0);

    t0 = clock_now();
    auto* entry = table_.lookup(key.value);
    charge(Stage::kTableLookup, t0);

    auto header = parse_record_header(payload);
    if (!header) {
        stats_.drops_malformed++;
        return {};
    }

    if (!entry) {
        // New-connection path: only a handshake record may allocate state.
        if (header->content_type != kContentHandshake) {
            stats_.drops_no_flow++;
            return {};
        }
        if (cfg_.max_connections && table_.size() >= cfg_.max_connections) {
            stats_.drops_capacity++;
            return {};
        }
        t0 = clock_now();
        auto state =
            std::make_unique<ConnectionState>(Role::kServer, cfg_.channel, rng_, dgram.peer);
        charge(Stage::kStateAlloc, t0);

        t0 = clock_now();
        table_.insert(key.value, std::move(state));
        charge(Stage::kTableInsert, t0);
        stats_.connections_opened++;
        entry = table_.lookup(key.value);
    }
    ConnectionState& st = **entry;

    std::vector<Bytes> responses;
    Handler handler = function_table_[static_cast<size_t>(st.channel.phase())];
    (this->*handler)(st, *header, payload, responses);

    std::vector<Datagram> out;
    out.reserve(responses.size());
    for (auto& r : responses) {
        stats_.packets_out++;
        stats_.bytes_out += r.size();
        out.push_back(Datagram{std::move(r), dgram.peer, dgram.timestamp_ns});
    }
    return out;
}

void Worker::handle_handshake(ConnectionState& st, const RecordHeader& h, BytesView record,
                              std::vector<Bytes>& responses) {
    if (h.content_type != kContentHandshake) {
        // Application data before the handshake finished.
        stats_.drops_no_flow++;
        return;
    }
    bool was_established = st.channel.phase() == Phase::kEstablished;

    uint64_t t0 = clock_now();
    auto res = st.channel.handshake_step(record.subspan(kRecordHeaderLen));
    charge(Stage::kHandshake, t0);

    if (res.status == HandshakeStatus::kFailed) stats_.drops_handshake++;
    if (!was_established && st.channel.phase() == Phase::kEstablished)
        stats_.connections_established++;
    for (auto& r : res.responses) responses.push_back(std::move(r));
}

void Worker::handle_established(ConnectionState& st, const RecordHeader& h, BytesView record,
                                std::vector<Bytes>& responses) {
    if (h.content_type == kContentHandshake) {
        // Stray retransmission; the channel ignores it.
        handle_handshake(st, h, record, responses);
        return;
    }

    uint64_t t0 = clock_now();
    auto res = st.channel.open(record);
    charge(Stage::kCryptoOpen, t0);

    switch (res.status) {
        case OpenStatus::kOk: break;
        case OpenStatus::kMalformed: stats_.drops_malformed++; return;
        case OpenStatus::kAuthFailed: stats_.drops_auth++; return;
        case OpenStatus::kReplayed: stats_.drops_replay++; return;
        case OpenStatus::kNotEstablished: stats_.drops_no_flow++; return;
    }

    // Echo: re-protect the opened payload in our send direction.
    try {
        t0 = clock_now();
        Bytes reply = st.channel.seal(BytesView(res.plaintext.data(), res.plaintext.size()));
        charge(Stage::kCryptoSeal, t0);
        responses.push_back(std::move(reply));
    } catch (const SealError&) {
        stats_.drops_malformed++;
    }
}

void Worker::handle_closed(ConnectionState&, const RecordHeader&, BytesView,
                           std::vector<Bytes>&) {
    stats_.drops_handshake++;
}

void Worker::run(Driver& io, const std::atomic<bool>& stop) {
    local_ = io.local_endpoint();
    constexpr uint64_t kIdleWaitNs = 1'000'000;  // 1 ms

    while (!stop.load(std::memory_order_relaxed)) {
        try {
            uint64_t iter0 = clock_now();

            uint64_t t0 = clock_now();
            auto batch = io.rx_batch(cfg_.batch_size);
            if (batch.empty()) {
                io.wait_readable(kIdleWaitNs);
                continue;
            }
            charge(Stage::kIoRx, t0);

            std::vector<Datagram> out;
            for (const auto& dgram : batch) {
                auto responses = process_packet(dgram);
                for (auto& d : responses) out.push_back(std::move(d));
            }

            if (!out.empty()) {
                t0 = clock_now();
                size_t sent = io.tx_batch(out);
                charge(Stage::kIoTx, t0);
                // Unsent responses (full downstream queue) are dropped like
                // a saturated NIC would.
                stats_.packets_out -= out.size() - sent;
            }
            if (instrument_) stats_.total_cycles += clock_->now() - iter0;
        } catch (const DriverClosedError&) {
            break;
        }
    }
}

// Bounded single-producer single-consumer handoff between the dispatcher
// and one worker. Full queue drops (the RSS ring analogue).
struct Gateway::HandoffQueue {
    static constexpr size_t kCapacity = 1024;

    std::mutex mu;
    std::condition_variable cv;
    std::deque<Datagram> q;

    bool push(Datagram d) {
        {
            std::lock_guard<std::mutex> lock(mu);
            if (q.size() >= kCapacity) return false;
            q.push_back(std::move(d));
        }
        cv.notify_one();
        return true;
    }

    // Pops up to max datagrams, waiting briefly when empty.
    size_t pop_batch(size_t max, std::vector<Datagram>& out) {
        std::unique_lock<std::mutex> lock(mu);
        cv.wait_for(lock, std::chrono::milliseconds(1), [&] { return !q.empty(); });
        size_t n = 0;
        while (!q.empty() && n < max) {
            out.push_back(std::move(q.front()));
            q.pop_front();
            n++;
        }
        return n;
    }

    void wake() { cv.notify_all(); }
};

Gateway::Gateway(GatewayConfig cfg, std::shared_ptr<Driver> io)
    : cfg_(std::move(cfg)), io_(std::move(io)), clock_(CycleClock::best(1e9)) {
    if (cfg_.worker_count < 1) throw std::invalid_argument("worker count must be >= 1");

    if (cfg_.reuse_kex && !cfg_.channel.server_keypair)
        cfg_.channel.server_keypair = std::make_shared<KexKeyPair>();
    // Multiple workers share the key pair; generate it up front so no two
    // first-connections race to fill it.
    if (cfg_.reuse_kex && cfg_.worker_count > 1 &&
        cfg_.channel.server_keypair->public_key.empty()) {
        Rng rng = cfg_.seed ? Rng(cfg_.seed) : Rng();
        *cfg_.channel.server_keypair = kex_generate(cfg_.channel.kex, rng);
    }

    for (size_t i = 0; i < cfg_.worker_count; ++i)
        workers_.push_back(std::make_unique<Worker>(i, cfg_, clock_));
}

Gateway::~Gateway() {
    stop();
    if (io_ && io_->is_open()) io_->close();
}

void Gateway::start() {
    if (running_) throw std::logic_error("gateway already started");
    running_ = true;
    stop_.store(false);

    if (cfg_.worker_count == 1) {
        threads_.emplace_back([this] { workers_[0]->run(*io_, stop_); });
        return;
    }

    for (size_t i = 0; i < cfg_.worker_count; ++i)
        queues_.push_back(std::make_unique<HandoffQueue>());
    for (size_t i = 0; i < cfg_.worker_count; ++i)
        threads_.emplace_back([this, i] { run_queued_worker(i); });
    threads_.emplace_back([this] { run_dispatcher(); });
}

void Gateway::stop() {
    if (!running_) return;
    stop_.store(true);
    for (auto& q : queues_) q->wake();
    for (auto& t : threads_) t.join();
    threads_.clear();
    queues_.clear();
    running_ = false;
}

void Gateway::run_dispatcher() {
    Endpoint local = io_->local_endpoint();
    constexpr uint64_t kIdleWaitNs = 1'000'000;

    while (!stop_.load(std::memory_order_relaxed)) {
        try {
            auto batch = io_->rx_batch(cfg_.batch_size);
            if (batch.empty()) {
                io_->wait_readable(kIdleWaitNs);
                continue;
            }
            for (auto& d : batch) {
                FlowKey key = flow_key(cfg_.hash_key, extract_five_tuple(d.peer, local));
                size_t idx = dispatch(key, cfg_.worker_count);
                if (!queues_[idx]->push(std::move(d))) dispatch_drops_.fetch_add(1);
            }
        } catch (const DriverClosedError&) {
            break;
        }
    }
}

void Gateway::run_queued_worker(size_t idx) {
    Worker& w = *workers_[idx];
    w.set_local_endpoint(io_->local_endpoint());

    std::vector<Datagram> batch;
    std::vector<Datagram> out;
    while (true) {
        batch.clear();
        size_t n = queues_[idx]->pop_batch(cfg_.batch_size, batch);
        if (n == 0) {
            if (stop_.load(std::memory_order_relaxed)) break;
            continue;
        }
        out.clear();
        for (const auto& d : batch) {
            auto responses = w.process_packet(d);
            for (auto& r : responses) out.push_back(std::move(r));
        }
        if (!out.empty()) {
            try {
                io_->tx_batch(out);
            } catch (const DriverClosedError&) {
                break;
            }
        }
    }
}

WorkerStats Gateway::stats() const {
    WorkerStats total;
    for (const auto& w : workers_) total.merge(w->stats());
    return total;
}

size_t Gateway::connection_count() const {
    size_t n = 0;
    for (const auto& w : workers_) n += w->connection_count();
    return n;
}

}  // namespace sgw
