#ifndef SGW_RNG_HPP
#define SGW_RNG_HPP

#include <cstdint>
#include <optional>

#include "sgw/bytes.hpp"

namespace sgw {

// Randomness source for key material and nonces-at-setup. Defaults to the
// OS CSPRNG. A fixed seed switches to a deterministic stream so test runs
// are reproducible; seeded mode is for tests only, never production use.
class Rng {
 public:
    Rng() = default;
    explicit Rng(uint64_t seed) : seeded_(true), state_(seed) {}

    void fill(uint8_t* out, size_t n);
    void fill(Bytes& out) { fill(out.data(), out.size()); }
    Bytes bytes(size_t n) {
        Bytes b(n);
        fill(b);
        return b;
    }
    uint64_t next_u64();

    bool seeded() const { return seeded_; }

 private:
    bool seeded_ = false;
    uint64_t state_ = 0;  // splitmix64 state in seeded mode
};

}  // namespace sgw

#endif  // SGW_RNG_HPP
