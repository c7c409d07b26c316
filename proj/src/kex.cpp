#include "sgw/kex.hpp"

#include <openssl/bn.h>
#include <openssl/evp.h>

#include <algorithm>
#include <memory>
#include <mutex>

namespace sgw {

namespace {

struct PkeyFree {
    void operator()(EVP_PKEY* k) const { EVP_PKEY_free(k); }
};
using Pkey = std::unique_ptr<EVP_PKEY, PkeyFree>;

struct PkeyCtxFree {
    void operator()(EVP_PKEY_CTX* c) const { EVP_PKEY_CTX_free(c); }
};
using PkeyCtx = std::unique_ptr<EVP_PKEY_CTX, PkeyCtxFree>;

struct BnCtxFree {
    void operator()(BN_CTX* c) const { BN_CTX_free(c); }
};
using BnCtx = std::unique_ptr<BN_CTX, BnCtxFree>;

struct BnFree {
    void operator()(BIGNUM* b) const { BN_clear_free(b); }
};
using Bn = std::unique_ptr<BIGNUM, BnFree>;

// RFC 3526 group 14: 2048-bit MODP prime, generator 2.
constexpr char kModp2048Hex[] =
    "FFFFFFFFFFFFFFFFC90FDAA22168C234C4C6628B80DC1CD1"
    "29024E088A67CC74020BBEA63B139B22514A08798E3404DD"
    "EF9519B3CD3A431B302B0A6DF25F14374FE1356D6D51C245"
    "E485B576625E7EC6F44C42E9A637ED6B0BFF5CB6F406B7ED"
    "EE386BFB5A899FA5AE9F24117C4B1FE649286651ECE45B3D"
    "C2007CB8A163BF0598DA48361C55D39A69163FA8FD24CF5F"
    "83655D23DCA3AD961C62F356208552BB9ED529077096966D"
    "670C354E4ABC9804F1746C08CA18217C32905E462E36CE3B"
    "E39E772C180E86039B2783A2EC07A28FB5C55DF06F4C52C9"
    "DE2BCBF6955817183995497CEA956AE515D2261898FA0510"
    "15728E5A8AACAA68FFFFFFFFFFFFFFFF";

constexpr size_t kDhePrivateBits = 256;  // standard short-exponent practice

const BIGNUM* modp_prime() {
    static BIGNUM* p = [] {
        BIGNUM* bn = nullptr;
        if (BN_hex2bn(&bn, kModp2048Hex) == 0) throw KexError("MODP prime init failed");
        return bn;
    }();
    return p;
}

bool all_zero(BytesView data) {
    return std::all_of(data.begin(), data.end(), [](uint8_t b) { return b == 0; });
}

KexKeyPair x25519_generate(Rng& rng) {
    KexKeyPair kp;
    kp.method = KexMethod::kEcdhe;
    kp.private_key.resize(32);
    rng.fill(kp.private_key.data(), 32);
    // Clamping per RFC 7748 happens inside the scalar multiplication; the
    // raw bytes are accepted as-is as the private key.
    Pkey key(EVP_PKEY_new_raw_private_key(EVP_PKEY_X25519, nullptr, kp.private_key.data(), 32));
    if (!key) throw KexError("X25519 private key rejected");
    size_t pub_len = 32;
    kp.public_key.resize(pub_len);
    if (EVP_PKEY_get_raw_public_key(key.get(), kp.public_key.data(), &pub_len) != 1 ||
        pub_len != 32)
        throw KexError("X25519 public key derivation failed");
    return kp;
}

SecretBytes x25519_agree(const SecretBytes& own_private, BytesView peer_public) {
    if (own_private.size() != 32) throw KexError("X25519 private key must be 32 bytes");
    if (peer_public.size() != 32) throw KexError("X25519 peer public must be 32 bytes");
    Pkey own(EVP_PKEY_new_raw_private_key(EVP_PKEY_X25519, nullptr, own_private.data(), 32));
    if (!own) throw KexError("X25519 private key rejected");
    Pkey peer(EVP_PKEY_new_raw_public_key(EVP_PKEY_X25519, nullptr, peer_public.data(), 32));
    if (!peer) throw KexError("X25519 peer public rejected");

    PkeyCtx ctx(EVP_PKEY_CTX_new(own.get(), nullptr));
    if (!ctx || EVP_PKEY_derive_init(ctx.get()) != 1 ||
        EVP_PKEY_derive_set_peer(ctx.get(), peer.get()) != 1)
        throw KexError("X25519 derive setup failed");
    SecretBytes shared(32);
    size_t len = 32;
    if (EVP_PKEY_derive(ctx.get(), shared.data(), &len) != 1 || len != 32)
        throw KexError("X25519 agreement failed (low-order peer point)");
    if (all_zero(shared.view())) throw KexError("X25519 produced all-zero shared secret");
    return shared;
}

KexKeyPair dhe_generate(Rng& rng) {
    const BIGNUM* p = modp_prime();
    BnCtx ctx(BN_CTX_new());
    Bn x(BN_new()), pub(BN_new()), g(BN_new());
    if (!ctx || !x || !pub || !g) throw KexError("bignum allocation failed");
    BN_set_word(g.get(), 2);

    Bytes xbytes(kDhePrivateBits / 8);
    do {
        rng.fill(xbytes.data(), xbytes.size());
        if (!BN_bin2bn(xbytes.data(), static_cast<int>(xbytes.size()), x.get()))
            throw KexError("private exponent init failed");
    } while (BN_is_zero(x.get()) || BN_is_one(x.get()));
    BN_set_flags(x.get(), BN_FLG_CONSTTIME);

    if (BN_mod_exp(pub.get(), g.get(), x.get(), p, ctx.get()) != 1)
        throw KexError("DHE public value computation failed");

    KexKeyPair kp;
    kp.method = KexMethod::kDhe;
    kp.private_key.resize(kDhePrivateBits / 8);
    if (BN_bn2binpad(x.get(), kp.private_key.data(), static_cast<int>(kp.private_key.size())) < 0)
        throw KexError("private key encoding failed");
    kp.public_key.resize(256);
    if (BN_bn2binpad(pub.get(), kp.public_key.data(), 256) < 0)
        throw KexError("public value encoding failed");
    return kp;
}

SecretBytes dhe_agree(const SecretBytes& own_private, BytesView peer_public) {
    if (peer_public.size() != 256) throw KexError("DHE peer public must be 256 bytes");
    const BIGNUM* p = modp_prime();
    BnCtx ctx(BN_CTX_new());
    Bn x(BN_new()), y(BN_new()), s(BN_new()), p_minus_1(BN_new());
    if (!ctx || !x || !y || !s || !p_minus_1) throw KexError("bignum allocation failed");

    if (!BN_bin2bn(own_private.data(), static_cast<int>(own_private.size()), x.get()))
        throw KexError("private exponent decode failed");
    BN_set_flags(x.get(), BN_FLG_CONSTTIME);
    if (!BN_bin2bn(peer_public.data(), static_cast<int>(peer_public.size()), y.get()))
        throw KexError("peer public decode failed");

    // Group membership: 1 < y < p - 1.
    BN_copy(p_minus_1.get(), p);
    BN_sub_word(p_minus_1.get(), 1);
    if (BN_cmp(y.get(), BN_value_one()) <= 0 || BN_cmp(y.get(), p_minus_1.get()) >= 0)
        throw KexError("DHE peer public out of range");

    if (BN_mod_exp(s.get(), y.get(), x.get(), p, ctx.get()) != 1)
        throw KexError("DHE agreement failed");
    if (BN_cmp(s.get(), BN_value_one()) <= 0 || BN_cmp(s.get(), p_minus_1.get()) == 0)
        throw KexError("DHE produced degenerate shared secret");

    SecretBytes shared(256);
    if (BN_bn2binpad(s.get(), shared.data(), 256) < 0) throw KexError("shared secret encoding failed");
    return shared;
}

}  // namespace

KexKeyPair kex_generate(KexMethod method, Rng& rng) {
    return method == KexMethod::kEcdhe ? x25519_generate(rng) : dhe_generate(rng);
}

SecretBytes kex_agree(KexMethod method, const SecretBytes& own_private, BytesView peer_public) {
    return method == KexMethod::kEcdhe ? x25519_agree(own_private, peer_public)
                                       : dhe_agree(own_private, peer_public);
}

}  // namespace sgw
