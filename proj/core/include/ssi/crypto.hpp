#pragma once

#include <compare>
#include <cstdint>
#include <string>

#include "ssi/bytes.hpp"
#include "ssi/random.hpp"

namespace ssi::crypto {

inline constexpr size_t kKeyBytes = 32;
inline constexpr size_t kSignatureBytes = 64;
inline constexpr size_t kDigestBytes = 32;
inline constexpr size_t kNonceBytes = 24;
inline constexpr size_t kTagBytes = 16;

using Key32 = ByteArray<kKeyBytes>;
using Signature = ByteArray<kSignatureBytes>;

enum class SignatureScheme : uint8_t { Ed25519 = 1 };
enum class HashAlg : uint8_t { Sha256 = 1 };

/// Ed25519 pair. `private_key` is the 32-byte seed; the expanded secret is
/// rederived on every signing call so the seed is the only secret at rest.
struct KeyPair {
    Key32 public_key{};
    Key32 private_key{};
    SignatureScheme scheme_id = SignatureScheme::Ed25519;

    bool operator==(const KeyPair&) const = default;
};

struct Digest {
    ByteArray<kDigestBytes> bytes{};
    HashAlg alg_id = HashAlg::Sha256;

    auto operator<=>(const Digest&) const = default;
    std::string to_b58() const;
};

struct AeadCiphertext {
    ByteArray<kNonceBytes> nonce{};
    Bytes body;
    ByteArray<kTagBytes> tag{};

    bool operator==(const AeadCiphertext&) const = default;
};

/// 2-of-2 XOR sharing. share_msp is the uniform mask, share_contacts the
/// masked secret; either half alone carries no information about the secret.
struct KeyShares {
    Key32 share_msp{};
    Key32 share_contacts{};
};

/// Ephemeral-static X25519 envelope: a fresh content key encrypts the body,
/// and the content key is wrapped to the recipient's converted Ed25519 key.
struct HybridCiphertext {
    Key32 ephemeral_public{};
    AeadCiphertext wrapped_key;
    AeadCiphertext body;
};

KeyPair generate_keypair();

/// Rebuilds `public_key` from a stored seed.
KeyPair keypair_from_seed(const Key32& seed);

/// Deterministic Ed25519: fixed (key, message) always yields the same
/// 64-byte signature.
Signature sign(const Key32& private_seed, std::span<const uint8_t> message);

bool verify(const Key32& public_key, std::span<const uint8_t> message, const Signature& sig);

/// SHA-256 of the input bytes.
Digest hash(std::span<const uint8_t> data);
Digest hash(std::string_view data);

/// XChaCha20-Poly1305 with a random 24-byte nonce.
AeadCiphertext aead_encrypt(const Key32& key, std::span<const uint8_t> plaintext,
                            std::span<const uint8_t> aad);

/// Throws Errc::AuthenticationFailure on wrong key, wrong aad or tampering.
Bytes aead_decrypt(const Key32& key, const AeadCiphertext& ct, std::span<const uint8_t> aad);

KeyShares split_key(const Key32& secret);
Key32 combine_key(const KeyShares& shares);
Key32 combine_key(const Key32& share_msp, const Key32& share_contacts);

HybridCiphertext hybrid_encrypt(const Key32& recipient_public, std::span<const uint8_t> plaintext,
                                std::span<const uint8_t> aad);
Bytes hybrid_decrypt(const Key32& recipient_seed, const HybridCiphertext& ct,
                     std::span<const uint8_t> aad);

/// Static X25519 agreement between two Ed25519 identities; both sides derive
/// the same 32-byte key for any (mine, theirs) ordering.
Key32 connection_key(const Key32& my_seed, const Key32& their_public);

/// Argon2id passphrase KDF (parameters tuned for the simulation, not
/// production hardness).
Key32 derive_store_key(std::string_view passphrase, const ByteArray<16>& salt);

}  // namespace ssi::crypto
