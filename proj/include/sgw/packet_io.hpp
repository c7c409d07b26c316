#ifndef SGW_PACKET_IO_HPP
#define SGW_PACKET_IO_HPP

#include <condition_variable>
#include <cstdint>
#include <deque>
#include <memory>
#include <mutex>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "sgw/bytes.hpp"

namespace sgw {

// Payload budget keeping a full datagram inside a 1500-byte Ethernet MTU
// after IPv4 (20) and UDP (8) headers.
constexpr size_t kMtuPayload = 1472;
constexpr size_t kDefaultBatch = 32;

// IPv4 transport address, host byte order.
struct Endpoint {
    uint32_t ip = 0;
    uint16_t port = 0;

    bool operator==(const Endpoint&) const = default;
};

std::string format_endpoint(const Endpoint& ep);
Endpoint parse_endpoint(const std::string& text);  // "a.b.c.d:port"

struct EndpointHash {
    size_t operator()(const Endpoint& ep) const {
        return std::hash<uint64_t>{}((static_cast<uint64_t>(ep.ip) << 16) | ep.port);
    }
};

struct Datagram {
    Bytes payload;
    Endpoint peer;             // source when received, destination when sent
    uint64_t timestamp_ns = 0; // monotonic clock, stamped on reception
};

struct IoCounters {
    uint64_t rx_packets = 0;
    uint64_t tx_packets = 0;
    uint64_t rx_batches = 0;
    uint64_t tx_batches = 0;
    uint64_t drops = 0;
};

class DriverClosedError : public std::runtime_error {
 public:
    DriverClosedError() : std::runtime_error("transport driver is closed") {}
};

// Batched datagram transport. rx_batch never blocks; an empty batch means
// nothing is pending. wait_readable lets run loops sleep instead of spin.
class Driver {
 public:
    virtual ~Driver() = default;

    virtual std::vector<Datagram> rx_batch(size_t max) = 0;
    virtual size_t tx_batch(std::span<const Datagram> out) = 0;
    virtual bool wait_readable(uint64_t timeout_ns) = 0;
    virtual void close() = 0;
    virtual bool is_open() const = 0;
    virtual Endpoint local_endpoint() const = 0;
    virtual IoCounters counters() const = 0;
};

struct LoopbackOptions {
    size_t queue_capacity = 0;  // 0 = unbounded
    bool drop_on_full = false;  // otherwise tx reports partial acceptance
};

// In-memory datagram switch. Every endpoint gets its own receive queue;
// tx routes by destination address. Datagrams to unknown addresses are
// dropped. Deterministic and kernel-free, which keeps microbenchmark
// stage timings clean.
class LoopbackSwitch {
 public:
    explicit LoopbackSwitch(LoopbackOptions opts = {});
    ~LoopbackSwitch();

    std::shared_ptr<Driver> create_endpoint(Endpoint addr);

 private:
    class Port;
    friend class Port;

    struct Shared;
    std::shared_ptr<Shared> shared_;
};

struct LoopbackPair {
    std::shared_ptr<LoopbackSwitch> net;
    std::shared_ptr<Driver> a;
    std::shared_ptr<Driver> b;
};

// Two connected endpoints, 127.0.0.1:1 and 127.0.0.1:2.
LoopbackPair make_loopback_pair(LoopbackOptions opts = {});

// Non-blocking UDP socket driver.
class UdpDriver : public Driver {
 public:
    // bind_addr "host:port"; port 0 picks an ephemeral port.
    explicit UdpDriver(const std::string& bind_addr);
    ~UdpDriver() override;

    UdpDriver(const UdpDriver&) = delete;
    UdpDriver& operator=(const UdpDriver&) = delete;

    std::vector<Datagram> rx_batch(size_t max) override;
    size_t tx_batch(std::span<const Datagram> out) override;
    bool wait_readable(uint64_t timeout_ns) override;
    void close() override;
    bool is_open() const override;
    Endpoint local_endpoint() const override;
    IoCounters counters() const override;

 private:
    int fd_ = -1;
    Endpoint local_{};
    mutable std::mutex mu_;
    IoCounters counters_{};
};

uint64_t monotonic_ns();

}  // namespace sgw

#endif  // SGW_PACKET_IO_HPP
