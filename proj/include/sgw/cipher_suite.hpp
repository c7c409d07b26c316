#ifndef SGW_CIPHER_SUITE_HPP
#define SGW_CIPHER_SUITE_HPP

#include <cstdint>
#include <stdexcept>
#include <string>

namespace sgw {

enum class CipherSuite : uint16_t {
    kAes128Gcm = 0x0001,
    kAes256Gcm = 0x0002,
    kChacha20Poly1305 = 0x0003,
};

constexpr size_t kAeadTagLen = 16;
constexpr size_t kAeadNonceLen = 12;
constexpr size_t kRecordSaltLen = 4;

constexpr size_t suite_key_len(CipherSuite s) {
    switch (s) {
        case CipherSuite::kAes128Gcm: return 16;
        case CipherSuite::kAes256Gcm: return 32;
        case CipherSuite::kChacha20Poly1305: return 32;
    }
    return 0;
}

constexpr bool suite_known(uint16_t id) { return id >= 1 && id <= 3; }

inline std::string suite_name(CipherSuite s) {
    switch (s) {
        case CipherSuite::kAes128Gcm: return "aes128gcm";
        case CipherSuite::kAes256Gcm: return "aes256gcm";
        case CipherSuite::kChacha20Poly1305: return "chacha20";
    }
    return "unknown";
}

inline CipherSuite parse_suite(const std::string& name) {
    if (name == "aes128gcm") return CipherSuite::kAes128Gcm;
    if (name == "aes256gcm") return CipherSuite::kAes256Gcm;
    if (name == "chacha20") return CipherSuite::kChacha20Poly1305;
    throw std::invalid_argument("unknown cipher suite: " + name);
}

}  // namespace sgw

#endif  // SGW_CIPHER_SUITE_HPP
