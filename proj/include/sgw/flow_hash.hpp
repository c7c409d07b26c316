#ifndef SGW_FLOW_HASH_HPP
#define SGW_FLOW_HASH_HPP

#include <array>
#include <cstdint>

#include "sgw/packet_io.hpp"
#include "sgw/rng.hpp"

namespace sgw {

// Canonical flow identity of a datagram. Serializes to exactly 13 bytes:
// src_ip || dst_ip || src_port (BE) || dst_port (BE) || protocol.
struct FiveTuple {
    uint32_t src_ip = 0;
    uint32_t dst_ip = 0;
    uint16_t src_port = 0;
    uint16_t dst_port = 0;
    uint8_t protocol = 0;

    bool operator==(const FiveTuple&) const = default;

    std::array<uint8_t, 13> serialize() const {
        std::array<uint8_t, 13> out;
        put_u32_be(out.data(), src_ip);
        put_u32_be(out.data() + 4, dst_ip);
        put_u16_be(out.data() + 8, src_port);
        put_u16_be(out.data() + 10, dst_port);
        out[12] = protocol;
        return out;
    }
};

constexpr uint8_t kProtoUdp = 17;

// 128-bit SipHash key. Drawn from OS randomness once per process so state
// table slots cannot be targeted by crafted flows; a fixed key is for
// reproducible tests only and must never appear in reports.
struct HashKey {
    uint64_t k0 = 0;
    uint64_t k1 = 0;

    static HashKey random(Rng& rng) { return HashKey{rng.next_u64(), rng.next_u64()}; }
    static HashKey from_hex(const std::string& hex32);  // 32 hex chars, byte order of the key
};

struct FlowKey {
    uint64_t value = 0;
    bool operator==(const FlowKey&) const = default;
};

// SipHash-2-4: keyed PRF over short inputs.
uint64_t siphash24(const HashKey& key, BytesView data);

inline FiveTuple extract_five_tuple(const Endpoint& peer, const Endpoint& local) {
    return FiveTuple{peer.ip, local.ip, peer.port, local.port, kProtoUdp};
}

inline FiveTuple extract_five_tuple(const Datagram& dgram, const Endpoint& local) {
    return extract_five_tuple(dgram.peer, local);
}

inline FlowKey flow_key(const HashKey& key, const FiveTuple& t) {
    auto bytes = t.serialize();
    return FlowKey{siphash24(key, BytesView(bytes.data(), bytes.size()))};
}

}  // namespace sgw

#endif  // SGW_FLOW_HASH_HPP
