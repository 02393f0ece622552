#pragma once

#include <vector>

#include "ssi/crypto.hpp"
#include "ssi/identity.hpp"

namespace ssi::revocation {

using Cid = ByteArray<16>;
using RegistryId = ByteArray<16>;

/// Issuer-held set of active (non-revoked) credential ids. The ledger only
/// ever sees the signed constant-size state, never the membership.
struct RevocationRegistry {
    RegistryId registry_id{};
    identity::Did issuer_did;
    std::vector<Cid> active_cids;  // sorted, duplicate-free
    uint64_t epoch = 0;
};

struct RegistryState {
    RegistryId registry_id{};
    uint64_t epoch = 0;
    crypto::Digest root;
    crypto::Signature issuer_signature{};

    Json to_json() const;
    static RegistryState from_json(const Json& j);
    bool operator==(const RegistryState&) const = default;
};

struct PathElement {
    crypto::Digest sibling;
    bool sibling_on_left = false;

    bool operator==(const PathElement&) const = default;
};

struct NonRevocationProof {
    Cid cid{};
    RegistryId registry_id{};
    uint64_t epoch = 0;
    std::vector<PathElement> merkle_path;

    Json to_json() const;
};

/// Merkle rules, pinned: leaf = H(0x00 || cid), interior = H(0x01 || l || r),
/// a lone node at any level is duplicated, empty set root = H("EMPTY_REGISTRY").
crypto::Digest leaf_hash(const Cid& cid);
crypto::Digest node_hash(const crypto::Digest& left, const crypto::Digest& right);
crypto::Digest empty_root();
crypto::Digest merkle_root(const std::vector<Cid>& sorted_cids);

Bytes state_signing_bytes(const RegistryId& registry_id, uint64_t epoch,
                          const crypto::Digest& root);

std::pair<RevocationRegistry, RegistryState> init_registry(const identity::Did& issuer_did,
                                                           const crypto::KeyPair& issuer_keys);

/// Inserts `cid` in sort order and returns the next signed state (epoch+1).
RegistryState register_credential(RevocationRegistry& registry, const crypto::KeyPair& issuer_keys,
                                  const Cid& cid);

RegistryState revoke_credential(RevocationRegistry& registry, const crypto::KeyPair& issuer_keys,
                                const Cid& cid);

NonRevocationProof prove_non_revocation(const RevocationRegistry& registry, const Cid& cid);

/// Folds the proof path and compares against `state`. The caller is expected
/// to have checked the state's signature and freshness (latest epoch).
bool verify_non_revocation(const NonRevocationProof& proof, const RegistryState& state);

bool verify_state_signature(const RegistryState& state, const crypto::Key32& issuer_public_key);

}  // namespace ssi::revocation
