#ifndef SGW_KEX_HPP
#define SGW_KEX_HPP

#include <stdexcept>
#include <string>

#include "sgw/bytes.hpp"
#include "sgw/rng.hpp"

namespace sgw {

// Ephemeral key agreement. ECDHE runs on X25519 (32-byte keys); DHE on the
// 2048-bit MODP group 14 with generator 2 (256-byte values, big-endian).
enum class KexMethod : uint8_t { kEcdhe, kDhe };

inline std::string kex_name(KexMethod m) { return m == KexMethod::kEcdhe ? "ecdhe" : "dhe"; }

inline KexMethod parse_kex(const std::string& name) {
    if (name == "ecdhe") return KexMethod::kEcdhe;
    if (name == "dhe") return KexMethod::kDhe;
    throw std::invalid_argument("unknown kex method: " + name);
}

constexpr size_t kex_public_len(KexMethod m) { return m == KexMethod::kEcdhe ? 32 : 256; }
constexpr size_t kex_shared_len(KexMethod m) { return m == KexMethod::kEcdhe ? 32 : 256; }

class KexError : public std::runtime_error {
 public:
    explicit KexError(const std::string& what) : std::runtime_error(what) {}
};

struct KexKeyPair {
    KexMethod method = KexMethod::kEcdhe;
    SecretBytes private_key;
    Bytes public_key;
};

KexKeyPair kex_generate(KexMethod method, Rng& rng);

// Shared secret of fixed length per method. Throws KexError on malformed
// or degenerate peer values (wrong length, out-of-range group element,
// low-order result).
SecretBytes kex_agree(KexMethod method, const SecretBytes& own_private, BytesView peer_public);

}  // namespace sgw

#endif  // SGW_KEX_HPP
