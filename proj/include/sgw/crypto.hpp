#ifndef SGW_CRYPTO_HPP
#define SGW_CRYPTO_HPP

#include <array>
#include <optional>

#include "sgw/bytes.hpp"
#include "sgw/cipher_suite.hpp"

namespace sgw {

// Thin wrappers over OpenSSL libcrypto. All functions are stateless and
// safe to call concurrently from different workers.

std::array<uint8_t, 32> sha256(BytesView data);
std::array<uint8_t, 32> hmac_sha256(BytesView key, BytesView data);

// HKDF over SHA-256 (extract-then-expand).
std::array<uint8_t, 32> hkdf_extract(BytesView salt, BytesView ikm);
Bytes hkdf_expand(BytesView prk, BytesView info, size_t length);

// AEAD seal: returns ciphertext || 16-byte tag.
Bytes aead_seal(CipherSuite suite, BytesView key, BytesView nonce, BytesView aad,
                BytesView plaintext);

// AEAD open: verifies the trailing tag; nullopt on authentication failure.
std::optional<Bytes> aead_open(CipherSuite suite, BytesView key, BytesView nonce, BytesView aad,
                               BytesView ciphertext_and_tag);

}  // namespace sgw

#endif  // SGW_CRYPTO_HPP
