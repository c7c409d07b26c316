#include "sgw/crypto.hpp"

#include <openssl/evp.h>
#include <openssl/hmac.h>
#include <openssl/sha.h>

#include <memory>
#include <stdexcept>

namespace sgw {

namespace {

struct CipherCtxFree {
    void operator()(EVP_CIPHER_CTX* ctx) const { EVP_CIPHER_CTX_free(ctx); }
};
using CipherCtx = std::unique_ptr<EVP_CIPHER_CTX, CipherCtxFree>;

const EVP_CIPHER* suite_cipher(CipherSuite suite) {
    switch (suite) {
        case CipherSuite::kAes128Gcm: return EVP_aes_128_gcm();
        case CipherSuite::kAes256Gcm: return EVP_aes_256_gcm();
        case CipherSuite::kChacha20Poly1305: return EVP_chacha20_poly1305();
    }
    throw std::invalid_argument("unknown cipher suite id");
}

[[noreturn]] void fail(const char* what) { throw std::runtime_error(std::string("openssl: ") + what); }

}  // namespace

std::array<uint8_t, 32> sha256(BytesView data) {
    std::array<uint8_t, 32> out;
    SHA256(data.data(), data.size(), out.data());
    return out;
}

std::array<uint8_t, 32> hmac_sha256(BytesView key, BytesView data) {
    std::array<uint8_t, 32> out;
    unsigned int len = 0;
    if (!HMAC(EVP_sha256(), key.data(), static_cast<int>(key.size()), data.data(), data.size(),
              out.data(), &len) ||
        len != 32)
        fail("HMAC-SHA256");
    return out;
}

std::array<uint8_t, 32> hkdf_extract(BytesView salt, BytesView ikm) {
    return hmac_sha256(salt, ikm);
}

Bytes hkdf_expand(BytesView prk, BytesView info, size_t length) {
    if (length > 255 * 32) throw std::invalid_argument("hkdf_expand output too long");
    Bytes out;
    out.reserve(length);
    Bytes block;  // T(i)
    uint8_t counter = 1;
    while (out.size() < length) {
        Bytes input = block;
        append(input, info);
        input.push_back(counter++);
        auto t = hmac_sha256(prk, BytesView(input.data(), input.size()));
        block.assign(t.begin(), t.end());
        size_t take = std::min(block.size(), length - out.size());
        out.insert(out.end(), block.begin(), block.begin() + take);
    }
    return out;
}

Bytes aead_seal(CipherSuite suite, BytesView key, BytesView nonce, BytesView aad,
                BytesView plaintext) {
    if (key.size() != suite_key_len(suite)) throw std::invalid_argument("bad AEAD key length");
    if (nonce.size() != kAeadNonceLen) throw std::invalid_argument("bad AEAD nonce length");

    CipherCtx ctx(EVP_CIPHER_CTX_new());
    if (!ctx) fail("EVP_CIPHER_CTX_new");
    if (EVP_EncryptInit_ex(ctx.get(), suite_cipher(suite), nullptr, key.data(), nonce.data()) != 1)
        fail("EncryptInit");

    int len = 0;
    if (!aad.empty() &&
        EVP_EncryptUpdate(ctx.get(), nullptr, &len, aad.data(), static_cast<int>(aad.size())) != 1)
        fail("EncryptUpdate aad");

    Bytes out(plaintext.size() + kAeadTagLen);
    int ct_len = 0;
    if (!plaintext.empty() &&
        EVP_EncryptUpdate(ctx.get(), out.data(), &ct_len, plaintext.data(),
                          static_cast<int>(plaintext.size())) != 1)
        fail("EncryptUpdate");
    int final_len = 0;
    if (EVP_EncryptFinal_ex(ctx.get(), out.data() + ct_len, &final_len) != 1) fail("EncryptFinal");
    ct_len += final_len;
    if (EVP_CIPHER_CTX_ctrl(ctx.get(), EVP_CTRL_AEAD_GET_TAG, kAeadTagLen,
                            out.data() + ct_len) != 1)
        fail("GET_TAG");
    out.resize(static_cast<size_t>(ct_len) + kAeadTagLen);
    return out;
}

std::optional<Bytes> aead_open(CipherSuite suite, BytesView key, BytesView nonce, BytesView aad,
                               BytesView ciphertext_and_tag) {
    if (key.size() != suite_key_len(suite)) throw std::invalid_argument("bad AEAD key length");
    if (nonce.size() != kAeadNonceLen) throw std::invalid_argument("bad AEAD nonce length");
    if (ciphertext_and_tag.size() < kAeadTagLen) return std::nullopt;

    const size_t ct_len = ciphertext_and_tag.size() - kAeadTagLen;
    const uint8_t* tag = ciphertext_and_tag.data() + ct_len;

    CipherCtx ctx(EVP_CIPHER_CTX_new());
    if (!ctx) fail("EVP_CIPHER_CTX_new");
    if (EVP_DecryptInit_ex(ctx.get(), suite_cipher(suite), nullptr, key.data(), nonce.data()) != 1)
        fail("DecryptInit");

    int len = 0;
    if (!aad.empty() &&
        EVP_DecryptUpdate(ctx.get(), nullptr, &len, aad.data(), static_cast<int>(aad.size())) != 1)
        fail("DecryptUpdate aad");

    Bytes out(ct_len);
    int pt_len = 0;
    if (ct_len > 0 && EVP_DecryptUpdate(ctx.get(), out.data(), &pt_len, ciphertext_and_tag.data(),
                                        static_cast<int>(ct_len)) != 1)
        return std::nullopt;
    if (EVP_CIPHER_CTX_ctrl(ctx.get(), EVP_CTRL_AEAD_SET_TAG, kAeadTagLen,
                            const_cast<uint8_t*>(tag)) != 1)
        fail("SET_TAG");
    int final_len = 0;
    if (EVP_DecryptFinal_ex(ctx.get(), out.data() + pt_len, &final_len) != 1)
        return std::nullopt;  // tag mismatch
    out.resize(static_cast<size_t>(pt_len) + final_len);
    return out;
}

}  // namespace sgw
