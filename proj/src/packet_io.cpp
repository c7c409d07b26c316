#include "sgw/packet_io.hpp"

#include <arpa/inet.h>
#include <fcntl.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <chrono>
#include <cstring>

namespace sgw {

uint64_t monotonic_ns() {
    return static_cast<uint64_t>(
        std::chrono::duration_cast<std::chrono::nanoseconds>(
            std::chrono::steady_clock::now().time_since_epoch())
            .count());
}

std::string format_endpoint(const Endpoint& ep) {
    char buf[32];
    snprintf(buf, sizeof(buf), "%u.%u.%u.%u:%u", (ep.ip >> 24) & 0xFF, (ep.ip >> 16) & 0xFF,
             (ep.ip >> 8) & 0xFF, ep.ip & 0xFF, ep.port);
    return buf;
}

Endpoint parse_endpoint(const std::string& text) {
    auto colon = text.rfind(':');
    if (colon == std::string::npos) throw std::invalid_argument("endpoint missing ':port': " + text);
    std::string host = text.substr(0, colon);
    std::string port_str = text.substr(colon + 1);
    in_addr addr{};
    if (host == "localhost") host = "127.0.0.1";
    if (inet_pton(AF_INET, host.c_str(), &addr) != 1)
        throw std::invalid_argument("bad IPv4 address: " + host);
    unsigned long port = std::stoul(port_str);
    if (port > 65535) throw std::invalid_argument("port out of range: " + port_str);
    return Endpoint{ntohl(addr.s_addr), static_cast<uint16_t>(port)};
}

// ---------------------------------------------------------------------------
// Loopback switch

namespace {

struct PortQueue {
    std::deque<Datagram> q;
    bool open = true;
};

}  // namespace

struct LoopbackSwitch::Shared {
    std::mutex mu;
    std::condition_variable cv;
    LoopbackOptions opts;
    std::unordered_map<Endpoint, std::shared_ptr<PortQueue>, EndpointHash> ports;
};

class LoopbackSwitch::Port : public Driver {
 public:
    Port(std::shared_ptr<Shared> shared, Endpoint addr, std::shared_ptr<PortQueue> queue)
        : shared_(std::move(shared)), addr_(addr), queue_(std::move(queue)) {}

    ~Port() override { close(); }

    std::vector<Datagram> rx_batch(size_t max) override {
        std::vector<Datagram> out;
        std::lock_guard lock(shared_->mu);
        if (!queue_->open) throw DriverClosedError();
        uint64_t now = monotonic_ns();
        while (out.size() < max && !queue_->q.empty()) {
            out.push_back(std::move(queue_->q.front()));
            out.back().timestamp_ns = now;
            queue_->q.pop_front();
        }
        counters_.rx_packets += out.size();
        if (!out.empty()) counters_.rx_batches++;
        return out;
    }

    // Returns the number of datagrams enqueued at their destination. With
    // drop-on-full the whole batch is always consumed and overflow goes to
    // the drops counter; without it, a full queue stops the batch and the
    // caller may retry the tail. Datagrams to unknown addresses are consumed
    // and counted as drops.
    size_t tx_batch(std::span<const Datagram> out) override {
        std::lock_guard lock(shared_->mu);
        if (!queue_->open) throw DriverClosedError();
        size_t accepted = 0;
        for (const Datagram& d : out) {
            if (d.payload.size() > kMtuPayload)
                throw std::invalid_argument("datagram payload exceeds MTU budget");
            auto it = shared_->ports.find(d.peer);
            if (it == shared_->ports.end() || !it->second->open) {
                counters_.drops++;
                continue;
            }
            PortQueue& dest = *it->second;
            if (shared_->opts.queue_capacity != 0 &&
                dest.q.size() >= shared_->opts.queue_capacity) {
                if (shared_->opts.drop_on_full) {
                    counters_.drops++;
                    continue;
                }
                break;  // caller may retry the rest
            }
            Datagram delivered;
            delivered.payload = d.payload;
            delivered.peer = addr_;  // from the receiver's view, we are the peer
            dest.q.push_back(std::move(delivered));
            accepted++;
            counters_.tx_packets++;
        }
        if (accepted > 0) {
            counters_.tx_batches++;
            shared_->cv.notify_all();
        }
        return accepted;
    }

    bool wait_readable(uint64_t timeout_ns) override {
        std::unique_lock lock(shared_->mu);
        if (!queue_->open) throw DriverClosedError();
        return shared_->cv.wait_for(lock, std::chrono::nanoseconds(timeout_ns),
                                    [&] { return !queue_->q.empty() || !queue_->open; }) &&
               queue_->open && !queue_->q.empty();
    }

    void close() override {
        std::lock_guard lock(shared_->mu);
        if (queue_->open) {
            queue_->open = false;
            shared_->ports.erase(addr_);
            shared_->cv.notify_all();
        }
    }

    bool is_open() const override {
        std::lock_guard lock(shared_->mu);
        return queue_->open;
    }

    Endpoint local_endpoint() const override { return addr_; }

    IoCounters counters() const override {
        std::lock_guard lock(shared_->mu);
        return counters_;
    }

 private:
    std::shared_ptr<Shared> shared_;
    Endpoint addr_;
    std::shared_ptr<PortQueue> queue_;
    IoCounters counters_{};
};

LoopbackSwitch::LoopbackSwitch(LoopbackOptions opts) : shared_(std::make_shared<Shared>()) {
    shared_->opts = opts;
}

LoopbackSwitch::~LoopbackSwitch() = default;

std::shared_ptr<Driver> LoopbackSwitch::create_endpoint(Endpoint addr) {
    std::lock_guard lock(shared_->mu);
    if (shared_->ports.count(addr))
        throw std::invalid_argument("endpoint already exists: " + format_endpoint(addr));
    auto queue = std::make_shared<PortQueue>();
    shared_->ports[addr] = queue;
    return std::make_shared<Port>(shared_, addr, queue);
}

LoopbackPair make_loopback_pair(LoopbackOptions opts) {
    LoopbackPair pair;
    pair.net = std::make_shared<LoopbackSwitch>(opts);
    pair.a = pair.net->create_endpoint(Endpoint{0x7F000001, 1});
    pair.b = pair.net->create_endpoint(Endpoint{0x7F000001, 2});
    return pair;
}

// ---------------------------------------------------------------------------
// UDP driver

static Endpoint from_sockaddr(const sockaddr_in& sa) {
    return Endpoint{ntohl(sa.sin_addr.s_addr), ntohs(sa.sin_port)};
}

static sockaddr_in to_sockaddr(const Endpoint& ep) {
    sockaddr_in sa{};
    sa.sin_family = AF_INET;
    sa.sin_addr.s_addr = htonl(ep.ip);
    sa.sin_port = htons(ep.port);
    return sa;
}

UdpDriver::UdpDriver(const std::string& bind_addr) {
    Endpoint ep = parse_endpoint(bind_addr);
    fd_ = ::socket(AF_INET, SOCK_DGRAM | SOCK_NONBLOCK, 0);
    if (fd_ < 0) throw std::runtime_error("socket(): " + std::string(strerror(errno)));
    int rcvbuf = 4 * 1024 * 1024;
    setsockopt(fd_, SOL_SOCKET, SO_RCVBUF, &rcvbuf, sizeof(rcvbuf));
    sockaddr_in sa = to_sockaddr(ep);
    if (::bind(fd_, reinterpret_cast<sockaddr*>(&sa), sizeof(sa)) != 0) {
        int err = errno;
        ::close(fd_);
        fd_ = -1;
        throw std::runtime_error("bind(" + bind_addr + "): " + strerror(err));
    }
    sockaddr_in actual{};
    socklen_t len = sizeof(actual);
    getsockname(fd_, reinterpret_cast<sockaddr*>(&actual), &len);
    local_ = from_sockaddr(actual);
}

UdpDriver::~UdpDriver() { close(); }

std::vector<Datagram> UdpDriver::rx_batch(size_t max) {
    std::lock_guard lock(mu_);
    if (fd_ < 0) throw DriverClosedError();
    std::vector<Datagram> out;
    uint8_t buf[kMtuPayload];
    while (out.size() < max) {
        sockaddr_in src{};
        socklen_t srclen = sizeof(src);
        ssize_t n = ::recvfrom(fd_, buf, sizeof(buf), 0, reinterpret_cast<sockaddr*>(&src), &srclen);
        if (n < 0) {
            if (errno == EAGAIN || errno == EWOULDBLOCK) break;
            if (errno == EINTR) continue;
            throw std::runtime_error("recvfrom(): " + std::string(strerror(errno)));
        }
        Datagram d;
        d.payload.assign(buf, buf + n);
        d.peer = from_sockaddr(src);
        d.timestamp_ns = monotonic_ns();
        out.push_back(std::move(d));
    }
    counters_.rx_packets += out.size();
    if (!out.empty()) counters_.rx_batches++;
    return out;
}

size_t UdpDriver::tx_batch(std::span<const Datagram> out) {
    std::lock_guard lock(mu_);
    if (fd_ < 0) throw DriverClosedError();
    size_t accepted = 0;
    for (const Datagram& d : out) {
        if (d.payload.size() > kMtuPayload)
            throw std::invalid_argument("datagram payload exceeds MTU budget");
        sockaddr_in dst = to_sockaddr(d.peer);
        ssize_t n = ::sendto(fd_, d.payload.data(), d.payload.size(), 0,
                             reinterpret_cast<sockaddr*>(&dst), sizeof(dst));
        if (n < 0) {
            if (errno == EAGAIN || errno == EWOULDBLOCK) break;
            // Unreachable destinations count as drops, matching datagram semantics.
            counters_.drops++;
        }
        accepted++;
        counters_.tx_packets++;
    }
    if (accepted > 0) counters_.tx_batches++;
    return accepted;
}

bool UdpDriver::wait_readable(uint64_t timeout_ns) {
    int fd;
    {
        std::lock_guard lock(mu_);
        if (fd_ < 0) throw DriverClosedError();
        fd = fd_;
    }
    pollfd pfd{fd, POLLIN, 0};
    int timeout_ms = static_cast<int>(timeout_ns / 1000000);
    return ::poll(&pfd, 1, timeout_ms) > 0 && (pfd.revents & POLLIN);
}

void UdpDriver::close() {
    std::lock_guard lock(mu_);
    if (fd_ >= 0) {
        ::close(fd_);
        fd_ = -1;
    }
}

bool UdpDriver::is_open() const {
    std::lock_guard lock(mu_);
    return fd_ >= 0;
}

Endpoint UdpDriver::local_endpoint() const { return local_; }

IoCounters UdpDriver::counters() const {
    std::lock_guard lock(mu_);
    return counters_;
}

}  // namespace sgw
