#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <set>

#include "sgw/packet_io.hpp"

using namespace sgw;

namespace {

Datagram make_dgram(Endpoint to, std::initializer_list<uint8_t> bytes) {
    Datagram d;
    d.payload = Bytes(bytes);
    d.peer = to;
    return d;
}

Datagram make_dgram(Endpoint to, const Bytes& payload) {
    Datagram d;
    d.payload = payload;
    d.peer = to;
    return d;
}

}  // namespace

TEST_CASE("endpoint parse and format round trip") {
    Endpoint ep = parse_endpoint("10.0.0.1:5000");
    CHECK(ep.ip == 0x0A000001);
    CHECK(ep.port == 5000);
    CHECK(format_endpoint(ep) == "10.0.0.1:5000");
    CHECK(parse_endpoint("localhost:4433") == Endpoint{0x7F000001, 4433});
    CHECK(parse_endpoint("255.255.255.255:65535") == Endpoint{0xFFFFFFFF, 65535});

    CHECK_THROWS_AS(parse_endpoint("10.0.0.1"), std::invalid_argument);
    CHECK_THROWS_AS(parse_endpoint("not-an-ip:80"), std::invalid_argument);
    CHECK_THROWS_AS(parse_endpoint("10.0.0.1:99999"), std::invalid_argument);
}

TEST_CASE("loopback drains queued datagrams up to the batch limit") {
    LoopbackPair pair = make_loopback_pair();
    Endpoint to_b = pair.b->local_endpoint();

    SUBCASE("3 queued, max 32 returns all 3") {
        std::vector<Datagram> out;
        for (uint8_t i = 0; i < 3; ++i) out.push_back(make_dgram(to_b, {i}));
        REQUIRE(pair.a->tx_batch(out) == 3);

        auto got = pair.b->rx_batch(32);
        REQUIRE(got.size() == 3);
        CHECK(pair.b->counters().rx_packets == 3);
        for (uint8_t i = 0; i < 3; ++i) {
            CHECK(got[i].payload == Bytes{i});
            CHECK(got[i].peer == pair.a->local_endpoint());
            CHECK(got[i].timestamp_ns > 0);
        }
    }

    SUBCASE("empty driver returns an empty batch and leaves counters alone") {
        auto got = pair.b->rx_batch(32);
        CHECK(got.empty());
        CHECK(pair.b->counters().rx_packets == 0);
        CHECK(pair.b->counters().rx_batches == 0);
    }

    SUBCASE("50 queued, max 32 returns exactly 32 and leaves 18") {
        std::vector<Datagram> out;
        for (uint8_t i = 0; i < 50; ++i) out.push_back(make_dgram(to_b, {i}));
        REQUIRE(pair.a->tx_batch(out) == 50);

        auto first = pair.b->rx_batch(32);
        CHECK(first.size() == 32);
        auto rest = pair.b->rx_batch(32);
        CHECK(rest.size() == 18);
        CHECK(first[0].payload == Bytes{0});
        CHECK(rest[17].payload == Bytes{49});
        CHECK(pair.b->counters().rx_packets == 50);
        CHECK(pair.b->counters().rx_batches == 2);
    }
}

TEST_CASE("loopback tx accounting") {
    SUBCASE("10 datagrams over an unbounded queue are all accepted") {
        LoopbackPair pair = make_loopback_pair();
        std::vector<Datagram> out(10, make_dgram(pair.b->local_endpoint(), {1}));
        CHECK(pair.a->tx_batch(out) == 10);
        CHECK(pair.a->counters().tx_packets == 10);
        CHECK(pair.a->counters().drops == 0);
    }

    SUBCASE("empty batch leaves counters untouched") {
        LoopbackPair pair = make_loopback_pair();
        CHECK(pair.a->tx_batch({}) == 0);
        CHECK(pair.a->counters().tx_packets == 0);
        CHECK(pair.a->counters().tx_batches == 0);
    }

    SUBCASE("bounded queue of 4 with drop-on-full accepts 4 of 6 and drops 2") {
        LoopbackPair pair = make_loopback_pair({.queue_capacity = 4, .drop_on_full = true});
        std::vector<Datagram> out(6, make_dgram(pair.b->local_endpoint(), {1}));
        CHECK(pair.a->tx_batch(out) == 4);
        CHECK(pair.a->counters().drops == 2);
        CHECK(pair.b->rx_batch(32).size() == 4);
    }

    SUBCASE("bounded queue without drop-on-full reports partial acceptance") {
        LoopbackPair pair = make_loopback_pair({.queue_capacity = 4, .drop_on_full = false});
        std::vector<Datagram> out(6, make_dgram(pair.b->local_endpoint(), {1}));
        CHECK(pair.a->tx_batch(out) == 4);
        CHECK(pair.a->counters().drops == 0);

        // Draining the destination lets the tail through on retry.
        CHECK(pair.b->rx_batch(32).size() == 4);
        CHECK(pair.a->tx_batch(std::span(out).subspan(4)) == 2);
    }

    SUBCASE("unknown destination is consumed and counted as a drop") {
        LoopbackPair pair = make_loopback_pair();
        std::vector<Datagram> out{make_dgram(Endpoint{0x7F000001, 999}, {1})};
        CHECK(pair.a->tx_batch(out) == 0);
        CHECK(pair.a->counters().drops == 1);
    }

    SUBCASE("oversized payload is rejected") {
        LoopbackPair pair = make_loopback_pair();
        std::vector<Datagram> out{make_dgram(pair.b->local_endpoint(), Bytes(kMtuPayload + 1, 0))};
        CHECK_THROWS_AS(pair.a->tx_batch(out), std::invalid_argument);
    }
}

TEST_CASE("loopback conservation: everything accepted arrives exactly once, intact") {
    LoopbackPair pair = make_loopback_pair();
    Endpoint to_b = pair.b->local_endpoint();

    std::vector<Datagram> out;
    for (uint16_t i = 0; i < 500; ++i) {
        Bytes payload(64);
        for (size_t j = 0; j < payload.size(); ++j)
            payload[j] = static_cast<uint8_t>(i + j);
        out.push_back(make_dgram(to_b, payload));
    }
    size_t accepted = 0;
    for (size_t i = 0; i < out.size(); i += 10)
        accepted += pair.a->tx_batch(std::span(out).subspan(i, 10));
    REQUIRE(accepted == out.size());

    std::vector<Datagram> got;
    while (true) {
        auto batch = pair.b->rx_batch(7);
        CHECK(batch.size() <= 7);
        if (batch.empty()) break;
        for (auto& d : batch) got.push_back(std::move(d));
    }
    REQUIRE(got.size() == out.size());
    for (size_t i = 0; i < out.size(); ++i) CHECK(got[i].payload == out[i].payload);
    CHECK(pair.b->counters().rx_packets == out.size());
}

TEST_CASE("loopback wait and close semantics") {
    LoopbackPair pair = make_loopback_pair();

    CHECK_FALSE(pair.b->wait_readable(1000000));  // 1 ms, nothing queued

    std::vector<Datagram> out{make_dgram(pair.b->local_endpoint(), {9})};
    pair.a->tx_batch(out);
    CHECK(pair.b->wait_readable(1000000));

    CHECK(pair.b->is_open());
    pair.b->close();
    CHECK_FALSE(pair.b->is_open());
    CHECK_THROWS_AS(pair.b->rx_batch(1), DriverClosedError);
    CHECK_THROWS_AS(pair.b->tx_batch({}), DriverClosedError);

    // The peer's sends to the closed endpoint become drops.
    CHECK(pair.a->tx_batch(out) == 0);
    CHECK(pair.a->counters().drops == 1);
}

TEST_CASE("loopback rejects duplicate endpoint registration") {
    LoopbackSwitch net;
    auto a = net.create_endpoint(Endpoint{1, 1});
    CHECK_THROWS_AS(net.create_endpoint(Endpoint{1, 1}), std::invalid_argument);
}

TEST_CASE("udp driver round trip on localhost") {
    UdpDriver a("127.0.0.1:0");
    UdpDriver b("127.0.0.1:0");
    REQUIRE(a.local_endpoint().port != 0);
    REQUIRE(b.local_endpoint().port != 0);

    Bytes payload{1, 2, 3, 4, 5};
    std::vector<Datagram> out{make_dgram(b.local_endpoint(), payload)};
    REQUIRE(a.tx_batch(out) == 1);
    CHECK(a.counters().tx_packets == 1);

    REQUIRE(b.wait_readable(2000000000ULL));
    auto got = b.rx_batch(32);
    REQUIRE(got.size() == 1);
    CHECK(got[0].payload == payload);
    CHECK(got[0].peer == a.local_endpoint());
    CHECK(got[0].timestamp_ns > 0);
    CHECK(b.counters().rx_packets == 1);

    // Echo back to the sender address recorded on reception.
    std::vector<Datagram> reply{make_dgram(got[0].peer, Bytes{7})};
    REQUIRE(b.tx_batch(reply) == 1);
    REQUIRE(a.wait_readable(2000000000ULL));
    auto back = a.rx_batch(32);
    REQUIRE(back.size() == 1);
    CHECK(back[0].payload == Bytes{7});

    a.close();
    CHECK_FALSE(a.is_open());
    CHECK_THROWS_AS(a.rx_batch(1), DriverClosedError);
}

TEST_CASE("counters never decrease over a driver's lifetime") {
    LoopbackPair pair = make_loopback_pair();
    IoCounters last{};
    for (int round = 0; round < 20; ++round) {
        std::vector<Datagram> out(3, make_dgram(pair.b->local_endpoint(), {1}));
        pair.a->tx_batch(out);
        pair.b->rx_batch(2);
        IoCounters a = pair.a->counters();
        IoCounters b = pair.b->counters();
        CHECK(a.tx_packets >= last.tx_packets);
        CHECK(b.rx_packets >= last.rx_packets);
        last.tx_packets = a.tx_packets;
        last.rx_packets = b.rx_packets;
    }
}
