#include "ssi/crypto.hpp"

#include <sodium.h>

#include <cstring>

#include "ssi/base58.hpp"
#include "ssi/errors.hpp"

namespace ssi::crypto {

namespace {

void ensure_sodium() {
    static const int rc = sodium_init();
    if (rc < 0) {
        raise(Errc::EntropyUnavailable, "sodium_init failed");
    }
}

using SecretKey64 = ByteArray<64>;

SecretKey64 expand_seed(const Key32& seed) {
    Key32 pk;
    SecretKey64 sk;
    crypto_sign_seed_keypair(pk.data(), sk.data(), seed.data());
    return sk;
}

Key32 ed25519_pk_to_x25519(const Key32& ed_pk) {
    Key32 out;
    if (crypto_sign_ed25519_pk_to_curve25519(out.data(), ed_pk.data()) != 0) {
        raise(Errc::MalformedKey, "ed25519 public key not convertible");
    }
    return out;
}

Key32 ed25519_seed_to_x25519(const Key32& seed) {
    SecretKey64 sk = expand_seed(seed);
    Key32 out;
    crypto_sign_ed25519_sk_to_curve25519(out.data(), sk.data());
    return out;
}

Key32 scalarmult(const Key32& scalar, const Key32& point) {
    Key32 out;
    if (crypto_scalarmult(out.data(), scalar.data(), point.data()) != 0) {
        raise(Errc::MalformedKey, "x25519 agreement failed");
    }
    return out;
}

Key32 scalarmult_base(const Key32& scalar) {
    Key32 out;
    crypto_scalarmult_base(out.data(), scalar.data());
    return out;
}

constexpr std::string_view kConnKeyTag = "ssi-conn-v1";
constexpr std::string_view kWrapKeyTag = "ssi-wrap-v1";
constexpr std::string_view kKeyWrapAad = "ssi-keywrap";

}  // namespace

std::string Digest::to_b58() const {
    return base58::encode(as_span(bytes));
}

KeyPair generate_keypair() {
    ensure_sodium();
    Key32 seed = random_array<kKeyBytes>();
    return keypair_from_seed(seed);
}

KeyPair keypair_from_seed(const Key32& seed) {
    ensure_sodium();
    KeyPair kp;
    kp.private_key = seed;
    SecretKey64 sk;
    crypto_sign_seed_keypair(kp.public_key.data(), sk.data(), seed.data());
    return kp;
}

Signature sign(const Key32& private_seed, std::span<const uint8_t> message) {
    ensure_sodium();
    SecretKey64 sk = expand_seed(private_seed);
    Signature sig;
    crypto_sign_detached(sig.data(), nullptr, message.data(), message.size(), sk.data());
    return sig;
}

bool verify(const Key32& public_key, std::span<const uint8_t> message, const Signature& sig) {
    ensure_sodium();
    return crypto_sign_verify_detached(sig.data(), message.data(), message.size(),
                                       public_key.data()) == 0;
}

Digest hash(std::span<const uint8_t> data) {
    ensure_sodium();
    Digest d;
    crypto_hash_sha256(d.bytes.data(), data.data(), data.size());
    return d;
}

Digest hash(std::string_view data) {
    return hash(as_span(data));
}

AeadCiphertext aead_encrypt(const Key32& key, std::span<const uint8_t> plaintext,
                            std::span<const uint8_t> aad) {
    ensure_sodium();
    AeadCiphertext ct;
    ct.nonce = random_array<kNonceBytes>();
    ct.body.resize(plaintext.size());
    unsigned long long tag_len = 0;
    crypto_aead_xchacha20poly1305_ietf_encrypt_detached(
        ct.body.data(), ct.tag.data(), &tag_len, plaintext.data(), plaintext.size(), aad.data(),
        aad.size(), nullptr, ct.nonce.data(), key.data());
    return ct;
}

Bytes aead_decrypt(const Key32& key, const AeadCiphertext& ct, std::span<const uint8_t> aad) {
    ensure_sodium();
    Bytes plain(ct.body.size());
    int rc = crypto_aead_xchacha20poly1305_ietf_decrypt_detached(
        plain.data(), nullptr, ct.body.data(), ct.body.size(), ct.tag.data(), aad.data(),
        aad.size(), ct.nonce.data(), key.data());
    if (rc != 0) {
        raise(Errc::AuthenticationFailure, "aead decryption failed");
    }
    return plain;
}

KeyShares split_key(const Key32& secret) {
    KeyShares shares;
    shares.share_msp = random_array<kKeyBytes>();
    for (size_t i = 0; i < kKeyBytes; ++i) {
        shares.share_contacts[i] = secret[i] ^ shares.share_msp[i];
    }
    return shares;
}

Key32 combine_key(const KeyShares& shares) {
    return combine_key(shares.share_msp, shares.share_contacts);
}

Key32 combine_key(const Key32& share_msp, const Key32& share_contacts) {
    Key32 secret;
    for (size_t i = 0; i < kKeyBytes; ++i) {
        secret[i] = share_msp[i] ^ share_contacts[i];
    }
    return secret;
}

HybridCiphertext hybrid_encrypt(const Key32& recipient_public, std::span<const uint8_t> plaintext,
                                std::span<const uint8_t> aad) {
    ensure_sodium();
    Key32 recipient_x = ed25519_pk_to_x25519(recipient_public);
    Key32 eph_secret = random_array<kKeyBytes>();
    HybridCiphertext ct;
    ct.ephemeral_public = scalarmult_base(eph_secret);

    Key32 shared = scalarmult(eph_secret, recipient_x);
    Key32 wrap_key =
        hash(concat(as_span(kWrapKeyTag), shared, ct.ephemeral_public, recipient_x)).bytes;

    Key32 content_key = random_array<kKeyBytes>();
    ct.wrapped_key = aead_encrypt(wrap_key, content_key, as_span(kKeyWrapAad));
    ct.body = aead_encrypt(content_key, plaintext, aad);
    return ct;
}

Bytes hybrid_decrypt(const Key32& recipient_seed, const HybridCiphertext& ct,
                     std::span<const uint8_t> aad) {
    ensure_sodium();
    Key32 my_x_secret = ed25519_seed_to_x25519(recipient_seed);
    Key32 my_x_public = scalarmult_base(my_x_secret);
    Key32 shared = scalarmult(my_x_secret, ct.ephemeral_public);
    Key32 wrap_key =
        hash(concat(as_span(kWrapKeyTag), shared, ct.ephemeral_public, my_x_public)).bytes;

    Bytes content_key_bytes = aead_decrypt(wrap_key, ct.wrapped_key, as_span(kKeyWrapAad));
    if (content_key_bytes.size() != kKeyBytes) {
        raise(Errc::AuthenticationFailure, "wrapped key has wrong length");
    }
    Key32 content_key;
    std::memcpy(content_key.data(), content_key_bytes.data(), kKeyBytes);
    return aead_decrypt(content_key, ct.body, aad);
}

Key32 connection_key(const Key32& my_seed, const Key32& their_public) {
    ensure_sodium();
    Key32 my_x_secret = ed25519_seed_to_x25519(my_seed);
    Key32 my_x_public = scalarmult_base(my_x_secret);
    Key32 their_x = ed25519_pk_to_x25519(their_public);
    Key32 shared = scalarmult(my_x_secret, their_x);

    const Key32& lo = my_x_public < their_x ? my_x_public : their_x;
    const Key32& hi = my_x_public < their_x ? their_x : my_x_public;
    return hash(concat(as_span(kConnKeyTag), shared, lo, hi)).bytes;
}

Key32 derive_store_key(std::string_view passphrase, const ByteArray<16>& salt) {
    ensure_sodium();
    Key32 key;
    if (crypto_pwhash(key.data(), key.size(), passphrase.data(), passphrase.size(), salt.data(),
                      crypto_pwhash_OPSLIMIT_MIN, crypto_pwhash_MEMLIMIT_MIN,
                      crypto_pwhash_ALG_ARGON2ID13) != 0) {
        raise(Errc::EntropyUnavailable, "pwhash allocation failed");
    }
    return key;
}

}  // namespace ssi::crypto
