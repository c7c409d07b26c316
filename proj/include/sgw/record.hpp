#ifndef SGW_RECORD_HPP
#define SGW_RECORD_HPP

#include <optional>

#include "sgw/bytes.hpp"
#include "sgw/cipher_suite.hpp"
#include "sgw/packet_io.hpp"

namespace sgw {

// Wire record: type(1) || FE FD || epoch(2 BE) || seq(6 BE) || length(2 BE) || body.
constexpr size_t kRecordHeaderLen = 13;
constexpr uint8_t kVersionMajor = 0xFE;
constexpr uint8_t kVersionMinor = 0xFD;

constexpr uint8_t kContentHandshake = 22;
constexpr uint8_t kContentApplication = 23;

constexpr size_t kMaxRecordBody = kMtuPayload - kRecordHeaderLen;          // 1459
constexpr size_t kMaxSealPlaintext = kMaxRecordBody - kAeadTagLen;         // 1443
constexpr uint64_t kMaxSequence = (uint64_t{1} << 48) - 1;

struct RecordHeader {
    uint8_t content_type = 0;
    uint16_t epoch = 0;
    uint64_t seq = 0;  // 48-bit
    uint16_t length = 0;

    std::array<uint8_t, kRecordHeaderLen> encode() const {
        std::array<uint8_t, kRecordHeaderLen> out;
        out[0] = content_type;
        out[1] = kVersionMajor;
        out[2] = kVersionMinor;
        put_u16_be(out.data() + 3, epoch);
        put_u48_be(out.data() + 5, seq);
        put_u16_be(out.data() + 11, length);
        return out;
    }
};

// Parses and validates a header against the full record length: version
// bytes, length field consistency and the MTU-derived body bound. Returns
// nullopt for anything malformed.
inline std::optional<RecordHeader> parse_record_header(BytesView record) {
    if (record.size() < kRecordHeaderLen) return std::nullopt;
    if (record[1] != kVersionMajor || record[2] != kVersionMinor) return std::nullopt;
    RecordHeader h;
    h.content_type = record[0];
    h.epoch = get_u16_be(record.data() + 3);
    h.seq = get_u48_be(record.data() + 5);
    h.length = get_u16_be(record.data() + 11);
    if (h.length > kMaxRecordBody) return std::nullopt;
    if (record.size() != kRecordHeaderLen + h.length) return std::nullopt;
    return h;
}

inline Bytes build_record(uint8_t content_type, uint16_t epoch, uint64_t seq, BytesView body) {
    RecordHeader h{content_type, epoch, seq, static_cast<uint16_t>(body.size())};
    Bytes out;
    out.reserve(kRecordHeaderLen + body.size());
    auto header = h.encode();
    out.insert(out.end(), header.begin(), header.end());
    append(out, body);
    return out;
}

}  // namespace sgw

#endif  // SGW_RECORD_HPP
