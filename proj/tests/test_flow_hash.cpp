#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <set>

#include "sgw/cycle_clock.hpp"
#include "sgw/flow_hash.hpp"

using namespace sgw;

// Reference outputs for key 00 01 .. 0f over messages 00 01 .. (n-1) for
// n in 0..63, frozen from tests/oracles/siphash_ref.py (an independent
// from-the-algorithm implementation).
static constexpr uint64_t kReferenceVectors[64] = {
    0x726fdb47dd0e0e31ULL, 0x74f839c593dc67fdULL, 0x0d6c8009d9a94f5aULL, 0x85676696d7fb7e2dULL,
    0xcf2794e0277187b7ULL, 0x18765564cd99a68dULL, 0xcbc9466e58fee3ceULL, 0xab0200f58b01d137ULL,
    0x93f5f5799a932462ULL, 0x9e0082df0ba9e4b0ULL, 0x7a5dbbc594ddb9f3ULL, 0xf4b32f46226bada7ULL,
    0x751e8fbc860ee5fbULL, 0x14ea5627c0843d90ULL, 0xf723ca908e7af2eeULL, 0xa129ca6149be45e5ULL,
    0x3f2acc7f57c29bdbULL, 0x699ae9f52cbe4794ULL, 0x4bc1b3f0968dd39cULL, 0xbb6dc91da77961bdULL,
    0xbed65cf21aa2ee98ULL, 0xd0f2cbb02e3b67c7ULL, 0x93536795e3a33e88ULL, 0xa80c038ccd5ccec8ULL,
    0xb8ad50c6f649af94ULL, 0xbce192de8a85b8eaULL, 0x17d835b85bbb15f3ULL, 0x2f2e6163076bcfadULL,
    0xde4daaaca71dc9a5ULL, 0xa6a2506687956571ULL, 0xad87a3535c49ef28ULL, 0x32d892fad841c342ULL,
    0x7127512f72f27cceULL, 0xa7f32346f95978e3ULL, 0x12e0b01abb051238ULL, 0x15e034d40fa197aeULL,
    0x314dffbe0815a3b4ULL, 0x027990f029623981ULL, 0xcadcd4e59ef40c4dULL, 0x9abfd8766a33735cULL,
    0x0e3ea96b5304a7d0ULL, 0xad0c42d6fc585992ULL, 0x187306c89bc215a9ULL, 0xd4a60abcf3792b95ULL,
    0xf935451de4f21df2ULL, 0xa9538f0419755787ULL, 0xdb9acddff56ca510ULL, 0xd06c98cd5c0975ebULL,
    0xe612a3cb9ecba951ULL, 0xc766e62cfcadaf96ULL, 0xee64435a9752fe72ULL, 0xa192d576b245165aULL,
    0x0a8787bf8ecb74b2ULL, 0x81b3e73d20b49b6fULL, 0x7fa8220ba3b2eceaULL, 0x245731c13ca42499ULL,
    0xb78dbfaf3a8d83bdULL, 0xea1ad565322a1a0bULL, 0x60e61c23a3795013ULL, 0x6606d7e446282b93ULL,
    0x6ca4ecb15c5f91e1ULL, 0x9f626da15c9625f3ULL, 0xe51b38608ef25f57ULL, 0x958a324ceb064572ULL,
};

TEST_CASE("siphash24 matches all 64 reference vectors") {
    HashKey key = HashKey::from_hex("000102030405060708090a0b0c0d0e0f");
    CHECK(key.k0 == 0x0706050403020100ULL);
    CHECK(key.k1 == 0x0F0E0D0C0B0A0908ULL);

    Bytes msg;
    for (size_t n = 0; n < 64; ++n) {
        CHECK_MESSAGE(siphash24(key, msg) == kReferenceVectors[n], "message length ", n);
        msg.push_back(static_cast<uint8_t>(n));
    }
}

TEST_CASE("hash key parsing") {
    CHECK_THROWS_AS(HashKey::from_hex("0011"), std::invalid_argument);
    CHECK_THROWS_AS(HashKey::from_hex("zz0102030405060708090a0b0c0d0e0f"),
                    std::invalid_argument);
}

TEST_CASE("five tuple serializes to the canonical 13-byte layout") {
    FiveTuple t{0x0A000001, 0x0A000002, 5000, 4433, kProtoUdp};
    auto bytes = t.serialize();
    Bytes expected = from_hex("0a0000010a0000021388115111");
    REQUIRE(bytes.size() == 13);
    CHECK(Bytes(bytes.begin(), bytes.end()) == expected);
}

TEST_CASE("five tuple extraction maps peer to source and local to destination") {
    Datagram d;
    d.peer = Endpoint{0x0A000001, 5000};
    Endpoint local{0x0A000002, 4433};
    FiveTuple t = extract_five_tuple(d, local);
    CHECK(t == FiveTuple{0x0A000001, 0x0A000002, 5000, 4433, 17});

    FiveTuple edge = extract_five_tuple(Endpoint{0x7F000001, 65535}, Endpoint{0x7F000001, 1});
    CHECK(edge == FiveTuple{0x7F000001, 0x7F000001, 65535, 1, 17});
}

TEST_CASE("serialization is injective over nearby tuples") {
    FiveTuple base{0x0A000001, 0x0A000002, 5000, 4433, 17};
    std::vector<FiveTuple> variants = {
        base,
        {0x0A000002, 0x0A000001, 5000, 4433, 17},  // swapped addresses
        {0x0A000001, 0x0A000002, 4433, 5000, 17},  // swapped ports
        {0x0A000001, 0x0A000002, 5000, 4433, 6},   // protocol differs
        {0x0A000001, 0x0A000002, 5001, 4433, 17},
    };
    std::set<std::array<uint8_t, 13>> seen;
    for (const auto& t : variants) seen.insert(t.serialize());
    CHECK(seen.size() == variants.size());
}

TEST_CASE("flow_key equals siphash24 over the serialized tuple") {
    Rng rng(42);
    for (int i = 0; i < 100; ++i) {
        HashKey key = HashKey::random(rng);
        FiveTuple t{static_cast<uint32_t>(rng.next_u64()), static_cast<uint32_t>(rng.next_u64()),
                    static_cast<uint16_t>(rng.next_u64()), static_cast<uint16_t>(rng.next_u64()),
                    kProtoUdp};
        auto bytes = t.serialize();
        CHECK(flow_key(key, t).value == siphash24(key, BytesView(bytes.data(), bytes.size())));
        CHECK(flow_key(key, t) == flow_key(key, t));
    }
}

TEST_CASE("output bits diffuse over random tuples") {
    Rng rng(7);
    HashKey key = HashKey::random(rng);
    uint64_t seen_set = 0;
    uint64_t seen_clear = 0;
    for (int i = 0; i < 10000; ++i) {
        FiveTuple t{static_cast<uint32_t>(rng.next_u64()), static_cast<uint32_t>(rng.next_u64()),
                    static_cast<uint16_t>(rng.next_u64()), static_cast<uint16_t>(rng.next_u64()),
                    kProtoUdp};
        uint64_t v = flow_key(key, t).value;
        seen_set |= v;
        seen_clear |= ~v;
    }
    CHECK(seen_set == ~uint64_t{0});
    CHECK(seen_clear == ~uint64_t{0});
}

TEST_CASE("per-call cost does not depend on which tuple is hashed") {
    // Mean per-op cycles per distinct tuple; the spread across tuples stays
    // small because the input length is fixed at 13 bytes.
    CycleClock clock = CycleClock::best(1e9);
    Rng rng(3);
    HashKey key = HashKey::random(rng);

    constexpr int kTuples = 8;
    constexpr int kReps = 20000;
    std::vector<FiveTuple> tuples;
    for (int i = 0; i < kTuples; ++i)
        tuples.push_back({static_cast<uint32_t>(rng.next_u64()),
                          static_cast<uint32_t>(rng.next_u64()),
                          static_cast<uint16_t>(rng.next_u64()),
                          static_cast<uint16_t>(rng.next_u64()), kProtoUdp});

    // Warm up caches and branch predictors before timing.
    uint64_t sink = 0;
    for (int r = 0; r < 1000; ++r)
        for (const auto& t : tuples) sink ^= flow_key(key, t).value;

    std::vector<double> means;
    for (const auto& t : tuples) {
        uint64_t t0 = clock.now();
        for (int r = 0; r < kReps; ++r) sink ^= flow_key(key, t).value;
        uint64_t t1 = clock.now();
        means.push_back(static_cast<double>(t1 - t0) / kReps);
    }
    volatile uint64_t keep = sink;
    (void)keep;

    double mean = 0;
    for (double m : means) mean += m;
    mean /= means.size();
    double var = 0;
    for (double m : means) var += (m - mean) * (m - mean);
    double cv = std::sqrt(var / means.size()) / mean;
    CHECK_MESSAGE(cv < 0.20, "coefficient of variation ", cv, " at mean ", mean);
}
