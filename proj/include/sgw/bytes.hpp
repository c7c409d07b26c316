#ifndef SGW_BYTES_HPP
#define SGW_BYTES_HPP

#include <cstdint>
#include <cstring>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace sgw {

using Bytes = std::vector<uint8_t>;
using BytesView = std::span<const uint8_t>;

inline void put_u16_be(uint8_t* p, uint16_t v) {
    p[0] = static_cast<uint8_t>(v >> 8);
    p[1] = static_cast<uint8_t>(v);
}

inline void put_u32_be(uint8_t* p, uint32_t v) {
    p[0] = static_cast<uint8_t>(v >> 24);
    p[1] = static_cast<uint8_t>(v >> 16);
    p[2] = static_cast<uint8_t>(v >> 8);
    p[3] = static_cast<uint8_t>(v);
}

// 48-bit big-endian, the record sequence number encoding.
inline void put_u48_be(uint8_t* p, uint64_t v) {
    p[0] = static_cast<uint8_t>(v >> 40);
    p[1] = static_cast<uint8_t>(v >> 32);
    p[2] = static_cast<uint8_t>(v >> 24);
    p[3] = static_cast<uint8_t>(v >> 16);
    p[4] = static_cast<uint8_t>(v >> 8);
    p[5] = static_cast<uint8_t>(v);
}

inline uint16_t get_u16_be(const uint8_t* p) {
    return static_cast<uint16_t>((p[0] << 8) | p[1]);
}

inline uint32_t get_u32_be(const uint8_t* p) {
    return (static_cast<uint32_t>(p[0]) << 24) | (static_cast<uint32_t>(p[1]) << 16) |
           (static_cast<uint32_t>(p[2]) << 8) | static_cast<uint32_t>(p[3]);
}

inline uint64_t get_u48_be(const uint8_t* p) {
    uint64_t v = 0;
    for (int i = 0; i < 6; ++i) v = (v << 8) | p[i];
    return v;
}

inline void append(Bytes& out, BytesView in) { out.insert(out.end(), in.begin(), in.end()); }

inline void append_u16_be(Bytes& out, uint16_t v) {
    uint8_t b[2];
    put_u16_be(b, v);
    out.insert(out.end(), b, b + 2);
}

std::string to_hex(BytesView data);
Bytes from_hex(const std::string& hex);

// Byte buffer that wipes itself on destruction. Used for key material.
class SecretBytes {
 public:
    SecretBytes() = default;
    explicit SecretBytes(size_t n) : data_(n, 0) {}
    explicit SecretBytes(Bytes b) : data_(std::move(b)) {}
    SecretBytes(const SecretBytes&) = default;
    SecretBytes& operator=(const SecretBytes&) = default;
    SecretBytes(SecretBytes&&) noexcept = default;
    SecretBytes& operator=(SecretBytes&&) noexcept = default;
    ~SecretBytes() { wipe(); }

    uint8_t* data() { return data_.data(); }
    const uint8_t* data() const { return data_.data(); }
    size_t size() const { return data_.size(); }
    bool empty() const { return data_.empty(); }
    BytesView view() const { return {data_.data(), data_.size()}; }
    void resize(size_t n) { data_.resize(n, 0); }
    bool operator==(const SecretBytes& o) const { return data_ == o.data_; }

 private:
    void wipe();
    Bytes data_;
};

}  // namespace sgw

#endif  // SGW_BYTES_HPP
