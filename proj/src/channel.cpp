#include "sgw/channel.hpp"

#include <cstring>

#include "sgw/crypto.hpp"

namespace sgw {

namespace {

constexpr uint8_t kMsgClientHello = 1;
constexpr uint8_t kMsgServerHello = 2;
constexpr uint8_t kMsgFinished = 3;
constexpr size_t kHelloRandomLen = 32;
constexpr size_t kFinishedTagLen = 32;

// Sequential reader for handshake bodies.
class Cursor {
 public:
    explicit Cursor(BytesView data) : data_(data) {}

    bool take(size_t n, BytesView& out) {
        if (pos_ + n > data_.size()) return false;
        out = data_.subspan(pos_, n);
        pos_ += n;
        return true;
    }

    bool take_u8(uint8_t& out) {
        BytesView v;
        if (!take(1, v)) return false;
        out = v[0];
        return true;
    }

    bool take_u16(uint16_t& out) {
        BytesView v;
        if (!take(2, v)) return false;
        out = get_u16_be(v.data());
        return true;
    }

    bool take_prefixed(BytesView& out) {
        uint16_t len;
        return take_u16(len) && take(len, out);
    }

    bool exhausted() const { return pos_ == data_.size(); }

 private:
    BytesView data_;
    size_t pos_ = 0;
};

Bytes build_hello(uint8_t msg_type, BytesView random, CipherSuite suite, BytesView pub) {
    Bytes body;
    body.reserve(1 + kHelloRandomLen + 2 + 2 + pub.size());
    body.push_back(msg_type);
    append(body, random);
    append_u16_be(body, static_cast<uint16_t>(suite));
    append_u16_be(body, static_cast<uint16_t>(pub.size()));
    append(body, pub);
    return body;
}

struct HelloFields {
    BytesView random;
    uint16_t suite_id = 0;
    BytesView pub;
};

bool parse_hello(BytesView body, HelloFields& out) {
    Cursor cur(body);
    uint8_t msg_type;
    return cur.take_u8(msg_type) && cur.take(kHelloRandomLen, out.random) &&
           cur.take_u16(out.suite_id) && cur.take_prefixed(out.pub) && cur.exhausted();
}

}  // namespace

KeyBlock derive_keys(BytesView shared, BytesView client_random, BytesView server_random,
                     CipherSuite suite) {
    if (client_random.size() != kHelloRandomLen || server_random.size() != kHelloRandomLen)
        throw std::invalid_argument("hello randoms must be 32 bytes");

    Bytes salt;
    salt.reserve(2 * kHelloRandomLen);
    append(salt, client_random);
    append(salt, server_random);
    auto prk = hkdf_extract(BytesView(salt.data(), salt.size()), shared);
    BytesView prk_view(prk.data(), prk.size());

    auto expand = [&](const char* label, size_t len) {
        BytesView info(reinterpret_cast<const uint8_t*>(label), strlen(label));
        return hkdf_expand(prk_view, info, len);
    };

    const size_t key_len = suite_key_len(suite);
    KeyBlock kb;
    kb.client_write_key = SecretBytes(expand("client write key", key_len));
    kb.server_write_key = SecretBytes(expand("server write key", key_len));
    Bytes cs = expand("client salt", kRecordSaltLen);
    Bytes ss = expand("server salt", kRecordSaltLen);
    std::copy(cs.begin(), cs.end(), kb.client_salt.begin());
    std::copy(ss.begin(), ss.end(), kb.server_salt.begin());
    kb.client_finished_key = SecretBytes(expand("client finished", 32));
    kb.server_finished_key = SecretBytes(expand("server finished", 32));
    return kb;
}

Channel::Channel(Role role, ChannelConfig cfg, Rng& rng)
    : role_(role), cfg_(std::move(cfg)), rng_(&rng) {}

Bytes Channel::handshake_record(BytesView body) {
    return build_record(kContentHandshake, epoch_, send_seq_++, body);
}

std::array<uint8_t, 32> Channel::transcript_hash() const {
    return sha256(BytesView(transcript_.data(), transcript_.size()));
}

Bytes Channel::start_handshake() {
    if (role_ != Role::kClient) throw std::logic_error("only the client initiates a handshake");
    if (started_) throw std::logic_error("handshake already started");
    started_ = true;

    rng_->fill(local_random_.data(), local_random_.size());
    local_kex_ = kex_generate(cfg_.kex, *rng_);
    Bytes body = build_hello(kMsgClientHello, BytesView(local_random_), cfg_.suite,
                             BytesView(local_kex_.public_key));
    append(transcript_, BytesView(body.data(), body.size()));
    return handshake_record(body);
}

HandshakeResult Channel::handshake_step(BytesView body) {
    if (phase_ == Phase::kClosed) return {HandshakeStatus::kIgnored, {}};
    if (body.empty()) return {HandshakeStatus::kFailed, {}};

    switch (body[0]) {
        case kMsgClientHello:
            if (role_ == Role::kServer && phase_ == Phase::kAwaitingHello)
                return on_client_hello(body);
            return {HandshakeStatus::kIgnored, {}};
        case kMsgServerHello:
            if (role_ == Role::kClient && phase_ == Phase::kAwaitingHello && started_)
                return on_server_hello(body);
            return {HandshakeStatus::kIgnored, {}};
        case kMsgFinished:
            if (phase_ == Phase::kAwaitingFinished) return on_finished(body);
            return {HandshakeStatus::kIgnored, {}};
        default:
            return {HandshakeStatus::kIgnored, {}};
    }
}

HandshakeResult Channel::on_client_hello(BytesView body) {
    HelloFields hello;
    if (!parse_hello(body, hello)) return {HandshakeStatus::kFailed, {}};
    if (!suite_known(hello.suite_id)) return {HandshakeStatus::kFailed, {}};
    cfg_.suite = static_cast<CipherSuite>(hello.suite_id);

    // Key pair: the shared server pair when reuse is configured (generated
    // on first use), otherwise fresh per connection.
    const KexKeyPair* pair;
    if (cfg_.server_keypair) {
        if (cfg_.server_keypair->public_key.empty())
            *cfg_.server_keypair = kex_generate(cfg_.kex, *rng_);
        pair = cfg_.server_keypair.get();
    } else {
        local_kex_ = kex_generate(cfg_.kex, *rng_);
        pair = &local_kex_;
    }

    SecretBytes shared;
    try {
        shared = kex_agree(cfg_.kex, pair->private_key, hello.pub);
    } catch (const KexError&) {
        return {HandshakeStatus::kFailed, {}};
    }

    rng_->fill(local_random_.data(), local_random_.size());
    keys_ = derive_keys(shared.view(), hello.random, BytesView(local_random_), cfg_.suite);
    keys_set_ = true;

    append(transcript_, body);
    Bytes sh = build_hello(kMsgServerHello, BytesView(local_random_), cfg_.suite,
                           BytesView(pair->public_key));
    append(transcript_, BytesView(sh.data(), sh.size()));

    phase_ = Phase::kAwaitingFinished;
    HandshakeResult res;
    res.status = HandshakeStatus::kOk;
    res.responses.push_back(handshake_record(sh));
    return res;
}

HandshakeResult Channel::on_server_hello(BytesView body) {
    HelloFields hello;
    if (!parse_hello(body, hello)) return {HandshakeStatus::kFailed, {}};
    if (hello.suite_id != static_cast<uint16_t>(cfg_.suite))
        return {HandshakeStatus::kFailed, {}};

    SecretBytes shared;
    try {
        shared = kex_agree(cfg_.kex, local_kex_.private_key, hello.pub);
    } catch (const KexError&) {
        return {HandshakeStatus::kFailed, {}};
    }

    keys_ = derive_keys(shared.view(), BytesView(local_random_), hello.random, cfg_.suite);
    keys_set_ = true;

    append(transcript_, body);
    auto th = transcript_hash();
    auto tag = hmac_sha256(keys_.client_finished_key.view(), BytesView(th));

    Bytes fin;
    fin.reserve(1 + kFinishedTagLen);
    fin.push_back(kMsgFinished);
    fin.insert(fin.end(), tag.begin(), tag.end());
    append(transcript_, BytesView(fin.data(), fin.size()));

    phase_ = Phase::kAwaitingFinished;
    HandshakeResult res;
    res.status = HandshakeStatus::kOk;
    res.responses.push_back(handshake_record(fin));
    return res;
}

HandshakeResult Channel::on_finished(BytesView body) {
    if (body.size() != 1 + kFinishedTagLen || !keys_set_) return {HandshakeStatus::kFailed, {}};

    // The peer's tag covers the transcript up to but not including its own
    // Finished message.
    auto th = transcript_hash();
    const SecretBytes& peer_key = role_ == Role::kServer ? keys_.client_finished_key
                                                         : keys_.server_finished_key;
    auto expected = hmac_sha256(peer_key.view(), BytesView(th));
    if (memcmp(expected.data(), body.data() + 1, kFinishedTagLen) != 0) {
        phase_ = Phase::kClosed;
        return {HandshakeStatus::kFailed, {}};
    }
    append(transcript_, body);

    HandshakeResult res;
    res.status = HandshakeStatus::kOk;
    if (role_ == Role::kServer) {
        auto th2 = transcript_hash();
        auto tag = hmac_sha256(keys_.server_finished_key.view(), BytesView(th2));
        Bytes fin;
        fin.reserve(1 + kFinishedTagLen);
        fin.push_back(kMsgFinished);
        fin.insert(fin.end(), tag.begin(), tag.end());
        append(transcript_, BytesView(fin.data(), fin.size()));
        res.responses.push_back(handshake_record(fin));
    }
    finish_establish();
    return res;
}

void Channel::finish_establish() {
    phase_ = Phase::kEstablished;
    epoch_ = 1;
    send_seq_ = 0;
    replay_ = ReplayWindow{};
}

const SecretBytes& Channel::send_key() const {
    return role_ == Role::kClient ? keys_.client_write_key : keys_.server_write_key;
}
const SecretBytes& Channel::recv_key() const {
    return role_ == Role::kClient ? keys_.server_write_key : keys_.client_write_key;
}
const std::array<uint8_t, kRecordSaltLen>& Channel::send_salt() const {
    return role_ == Role::kClient ? keys_.client_salt : keys_.server_salt;
}
const std::array<uint8_t, kRecordSaltLen>& Channel::recv_salt() const {
    return role_ == Role::kClient ? keys_.server_salt : keys_.client_salt;
}

std::array<uint8_t, kAeadNonceLen> Channel::nonce_for(
    const std::array<uint8_t, kRecordSaltLen>& salt, uint16_t epoch, uint64_t seq) const {
    std::array<uint8_t, kAeadNonceLen> nonce;
    std::copy(salt.begin(), salt.end(), nonce.begin());
    put_u16_be(nonce.data() + kRecordSaltLen, epoch);
    put_u48_be(nonce.data() + kRecordSaltLen + 2, seq);
    return nonce;
}

Bytes Channel::seal(BytesView plaintext) {
    if (phase_ != Phase::kEstablished) throw SealError("channel not established");
    if (plaintext.size() > kMaxSealPlaintext) throw SealError("plaintext exceeds record budget");
    if (send_seq_ > kMaxSequence) throw SealError("sequence number space exhausted");

    RecordHeader h{kContentApplication, epoch_, send_seq_,
                   static_cast<uint16_t>(plaintext.size() + kAeadTagLen)};
    auto header = h.encode();
    auto nonce = nonce_for(send_salt(), epoch_, send_seq_);
    Bytes body = aead_seal(cfg_.suite, send_key().view(), BytesView(nonce), BytesView(header),
                           plaintext);

    Bytes record;
    record.reserve(header.size() + body.size());
    record.insert(record.end(), header.begin(), header.end());
    record.insert(record.end(), body.begin(), body.end());

    send_seq_++;
    counters_.packets_sent++;
    counters_.bytes_sent += plaintext.size();
    return record;
}

OpenResult Channel::open(BytesView record) {
    if (phase_ != Phase::kEstablished) return {OpenStatus::kNotEstablished, {}};

    auto header = parse_record_header(record);
    if (!header || header->content_type != kContentApplication ||
        header->length < kAeadTagLen || header->epoch != epoch_)
        return {OpenStatus::kMalformed, {}};

    if (!replay_.fresh(header->seq)) return {OpenStatus::kReplayed, {}};

    auto nonce = nonce_for(recv_salt(), header->epoch, header->seq);
    BytesView aad = record.subspan(0, kRecordHeaderLen);
    BytesView body = record.subspan(kRecordHeaderLen);
    auto plaintext = aead_open(cfg_.suite, recv_key().view(), BytesView(nonce), aad, body);
    if (!plaintext) return {OpenStatus::kAuthFailed, {}};

    replay_.accept(header->seq);
    counters_.packets_received++;
    counters_.bytes_received += plaintext->size();
    return {OpenStatus::kOk, std::move(*plaintext)};
}

}  // namespace sgw
