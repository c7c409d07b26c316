#include "sgw/flow_hash.hpp"

namespace sgw {

HashKey HashKey::from_hex(const std::string& hex32) {
    if (hex32.size() != 32) throw std::invalid_argument("hash key must be 32 hex chars");
    Bytes raw = sgw::from_hex(hex32);
    uint64_t k0 = 0, k1 = 0;
    // Key bytes are taken little-endian, matching the reference key layout
    // where 000102...0f gives k0 = 0x0706050403020100.
    for (int i = 7; i >= 0; --i) k0 = (k0 << 8) | raw[i];
    for (int i = 7; i >= 0; --i) k1 = (k1 << 8) | raw[8 + i];
    return HashKey{k0, k1};
}

namespace {

inline uint64_t rotl64(uint64_t x, int b) { return (x << b) | (x >> (64 - b)); }

inline void sip_round(uint64_t& v0, uint64_t& v1, uint64_t& v2, uint64_t& v3) {
    v0 += v1;
    v1 = rotl64(v1, 13);
    v1 ^= v0;
    v0 = rotl64(v0, 32);
    v2 += v3;
    v3 = rotl64(v3, 16);
    v3 ^= v2;
    v0 += v3;
    v3 = rotl64(v3, 21);
    v3 ^= v0;
    v2 += v1;
    v1 = rotl64(v1, 17);
    v1 ^= v2;
    v2 = rotl64(v2, 32);
}

inline uint64_t load_le64(const uint8_t* p) {
    uint64_t v;
    memcpy(&v, p, 8);  // little-endian host
    return v;
}

}  // namespace

uint64_t siphash24(const HashKey& key, BytesView data) {
    uint64_t v0 = key.k0 ^ 0x736f6d6570736575ULL;
    uint64_t v1 = key.k1 ^ 0x646f72616e646f6dULL;
    uint64_t v2 = key.k0 ^ 0x6c7967656e657261ULL;
    uint64_t v3 = key.k1 ^ 0x7465646279746573ULL;

    const uint8_t* p = data.data();
    const size_t len = data.size();
    const size_t full = len & ~size_t{7};
    for (size_t i = 0; i < full; i += 8) {
        uint64_t m = load_le64(p + i);
        v3 ^= m;
        sip_round(v0, v1, v2, v3);
        sip_round(v0, v1, v2, v3);
        v0 ^= m;
    }

    uint64_t last = static_cast<uint64_t>(len & 0xFF) << 56;
    for (size_t i = full; i < len; ++i) last |= static_cast<uint64_t>(p[i]) << (8 * (i - full));
    v3 ^= last;
    sip_round(v0, v1, v2, v3);
    sip_round(v0, v1, v2, v3);
    v0 ^= last;

    v2 ^= 0xFF;
    sip_round(v0, v1, v2, v3);
    sip_round(v0, v1, v2, v3);
    sip_round(v0, v1, v2, v3);
    sip_round(v0, v1, v2, v3);
    return v0 ^ v1 ^ v2 ^ v3;
}

}  // namespace sgw
