#ifndef SGW_CHANNEL_HPP
#define SGW_CHANNEL_HPP

#include <array>
#include <memory>
#include <optional>
#include <vector>

#include "sgw/cipher_suite.hpp"
#include "sgw/kex.hpp"
#include "sgw/record.hpp"
#include "sgw/rng.hpp"

namespace sgw {

enum class Phase : uint8_t { kAwaitingHello, kAwaitingFinished, kEstablished, kClosed };

enum class Role : uint8_t { kClient, kServer };

// Directional key block produced by the handshake key schedule.
struct KeyBlock {
    SecretBytes client_write_key;
    SecretBytes server_write_key;
    std::array<uint8_t, kRecordSaltLen> client_salt{};
    std::array<uint8_t, kRecordSaltLen> server_salt{};
    SecretBytes client_finished_key;  // 32 bytes
    SecretBytes server_finished_key;  // 32 bytes
};

// Extract-then-expand over SHA-256: the shared secret is extracted with
// salt client_random || server_random, then each output is expanded under
// its own label.
KeyBlock derive_keys(BytesView shared, BytesView client_random, BytesView server_random,
                     CipherSuite suite);

// 64-entry sliding window over received sequence numbers, bit 0 tracking
// the highest sequence seen.
class ReplayWindow {
 public:
    bool fresh(uint64_t seq) const {
        if (!any_) return true;
        if (seq > highest_) return true;
        uint64_t behind = highest_ - seq;
        if (behind >= 64) return false;
        return (bitmap_ & (uint64_t{1} << behind)) == 0;
    }

    void accept(uint64_t seq) {
        if (!any_) {
            any_ = true;
            highest_ = seq;
            bitmap_ = 1;
            return;
        }
        if (seq > highest_) {
            uint64_t shift = seq - highest_;
            bitmap_ = shift >= 64 ? 0 : bitmap_ << shift;
            bitmap_ |= 1;
            highest_ = seq;
        } else {
            bitmap_ |= uint64_t{1} << (highest_ - seq);
        }
    }

 private:
    uint64_t bitmap_ = 0;
    uint64_t highest_ = 0;
    bool any_ = false;
};

struct TrafficCounters {
    uint64_t packets_sent = 0;
    uint64_t packets_received = 0;
    uint64_t bytes_sent = 0;
    uint64_t bytes_received = 0;
};

enum class HandshakeStatus : uint8_t {
    kOk,          // message consumed, possibly with responses
    kIgnored,     // out-of-order or replayed message, state unchanged
    kFailed,      // handshake failure
};

struct HandshakeResult {
    HandshakeStatus status = HandshakeStatus::kIgnored;
    std::vector<Bytes> responses;  // complete wire records
};

enum class OpenStatus : uint8_t { kOk, kMalformed, kAuthFailed, kReplayed, kNotEstablished };

struct OpenResult {
    OpenStatus status = OpenStatus::kMalformed;
    Bytes plaintext;
};

class SealError : public std::runtime_error {
 public:
    explicit SealError(const std::string& what) : std::runtime_error(what) {}
};

struct ChannelConfig {
    CipherSuite suite = CipherSuite::kChacha20Poly1305;
    KexMethod kex = KexMethod::kEcdhe;
    // Server side: key pair reused across connections when set. Owned by
    // the caller (one per worker or per gateway), generated lazily.
    std::shared_ptr<KexKeyPair> server_keypair;
};

// One endpoint of a secured datagram channel: handshake driver, record
// protection and replay accounting. Single-owner; a connection lives on
// exactly one worker.
class Channel {
 public:
    Channel(Role role, ChannelConfig cfg, Rng& rng);

    // Client only: produces the initial hello record and arms the state
    // machine. Must be called exactly once, before any handshake_step.
    Bytes start_handshake();

    // Feeds one handshake record body (the 13-byte header already parsed
    // and stripped by the caller). Drives hello -> hello -> finished in
    // both directions; on success the channel transitions through
    // kAwaitingFinished into kEstablished with epoch 1 and sequence 0.
    HandshakeResult handshake_step(BytesView body);

    // Application-record protection. seal produces a full wire record;
    // open consumes one and yields the plaintext.
    Bytes seal(BytesView plaintext);
    OpenResult open(BytesView record);

    Phase phase() const { return phase_; }
    CipherSuite suite() const { return cfg_.suite; }
    Role role() const { return role_; }
    uint16_t epoch() const { return epoch_; }
    uint64_t send_seq() const { return send_seq_; }
    const TrafficCounters& counters() const { return counters_; }

    // Test hook: direction keys must differ and match the peer crosswise.
    const KeyBlock& keys() const { return keys_; }

 private:
    Bytes handshake_record(BytesView body);
    void finish_establish();
    std::array<uint8_t, 32> transcript_hash() const;
    std::array<uint8_t, kAeadNonceLen> nonce_for(const std::array<uint8_t, kRecordSaltLen>& salt,
                                                 uint16_t epoch, uint64_t seq) const;
    const SecretBytes& send_key() const;
    const SecretBytes& recv_key() const;
    const std::array<uint8_t, kRecordSaltLen>& send_salt() const;
    const std::array<uint8_t, kRecordSaltLen>& recv_salt() const;

    HandshakeResult on_client_hello(BytesView body);
    HandshakeResult on_server_hello(BytesView body);
    HandshakeResult on_finished(BytesView body);

    Role role_;
    ChannelConfig cfg_;
    Rng* rng_;
    Phase phase_ = Phase::kAwaitingHello;
    bool started_ = false;

    std::array<uint8_t, 32> local_random_{};
    KexKeyPair local_kex_;
    KeyBlock keys_;
    bool keys_set_ = false;

    Bytes transcript_;  // concatenated handshake bodies

    uint16_t epoch_ = 0;
    uint64_t send_seq_ = 0;
    ReplayWindow replay_;
    TrafficCounters counters_;
};

}  // namespace sgw

#endif  // SGW_CHANNEL_HPP
