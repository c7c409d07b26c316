#include "sgw/rng.hpp"

#include <openssl/rand.h>

#include <stdexcept>

namespace sgw {

static uint64_t splitmix64(uint64_t& state) {
    uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

uint64_t Rng::next_u64() {
    if (seeded_) return splitmix64(state_);
    uint64_t v = 0;
    fill(reinterpret_cast<uint8_t*>(&v), sizeof(v));
    return v;
}

void Rng::fill(uint8_t* out, size_t n) {
    if (!seeded_) {
        if (n > 0 && RAND_bytes(out, static_cast<int>(n)) != 1)
            throw std::runtime_error("OS randomness source failed");
        return;
    }
    size_t i = 0;
    while (i < n) {
        uint64_t v = splitmix64(state_);
        for (int b = 0; b < 8 && i < n; ++b, ++i) {
            out[i] = static_cast<uint8_t>(v >> (8 * b));
        }
    }
}

}  // namespace sgw
