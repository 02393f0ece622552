#include "ssi/revocation.hpp"

#include <algorithm>

#include "ssi/errors.hpp"

namespace ssi::revocation {

namespace {

constexpr uint8_t kLeafTag = 0x00;
constexpr uint8_t kNodeTag = 0x01;
constexpr std::string_view kEmptyMarker = "EMPTY_REGISTRY";

RegistryState make_state(const RevocationRegistry& registry, const crypto::KeyPair& issuer_keys) {
    RegistryState state;
    state.registry_id = registry.registry_id;
    state.epoch = registry.epoch;
    state.root = merkle_root(registry.active_cids);
    state.issuer_signature = crypto::sign(
        issuer_keys.private_key,
        as_span(state_signing_bytes(state.registry_id, state.epoch, state.root)));
    return state;
}

}  // namespace

Json RegistryState::to_json() const {
    return Json{
        {"registry_id", b58(registry_id)},
        {"epoch", epoch},
        {"root", root.to_b58()},
        {"signature", b58(issuer_signature)},
    };
}

RegistryState RegistryState::from_json(const Json& j) {
    RegistryState s;
    s.registry_id = from_b58_array<16>(j.at("registry_id"));
    s.epoch = j.at("epoch").get<uint64_t>();
    s.root.bytes = from_b58_array<crypto::kDigestBytes>(j.at("root"));
    s.issuer_signature = from_b58_array<crypto::kSignatureBytes>(j.at("signature"));
    return s;
}

Json NonRevocationProof::to_json() const {
    Json path = Json::array();
    for (const auto& el : merkle_path) {
        path.push_back(Json{{"sibling", el.sibling.to_b58()}, {"left", el.sibling_on_left}});
    }
    return Json{
        {"cid", b58(cid)},
        {"registry_id", b58(registry_id)},
        {"epoch", epoch},
        {"path", path},
    };
}

crypto::Digest leaf_hash(const Cid& cid) {
    Bytes data;
    data.push_back(kLeafTag);
    data.insert(data.end(), cid.begin(), cid.end());
    return crypto::hash(as_span(data));
}

crypto::Digest node_hash(const crypto::Digest& left, const crypto::Digest& right) {
    Bytes data;
    data.reserve(1 + 2 * crypto::kDigestBytes);
    data.push_back(kNodeTag);
    data.insert(data.end(), left.bytes.begin(), left.bytes.end());
    data.insert(data.end(), right.bytes.begin(), right.bytes.end());
    return crypto::hash(as_span(data));
}

crypto::Digest empty_root() {
    return crypto::hash(kEmptyMarker);
}

crypto::Digest merkle_root(const std::vector<Cid>& sorted_cids) {
    if (sorted_cids.empty()) {
        return empty_root();
    }
    std::vector<crypto::Digest> level;
    level.reserve(sorted_cids.size());
    for (const auto& cid : sorted_cids) {
        level.push_back(leaf_hash(cid));
    }
    while (level.size() > 1) {
        if (level.size() % 2 != 0) {
            level.push_back(level.back());
        }
        std::vector<crypto::Digest> next;
        next.reserve(level.size() / 2);
        for (size_t i = 0; i < level.size(); i += 2) {
            next.push_back(node_hash(level[i], level[i + 1]));
        }
        level = std::move(next);
    }
    return level.front();
}

Bytes state_signing_bytes(const RegistryId& registry_id, uint64_t epoch,
                          const crypto::Digest& root) {
    Json j{{"epoch", epoch}, {"registry_id", b58(registry_id)}, {"root", root.to_b58()}};
    return canonical_bytes(j);
}

std::pair<RevocationRegistry, RegistryState> init_registry(const identity::Did& issuer_did,
                                                           const crypto::KeyPair& issuer_keys) {
    RevocationRegistry registry;
    registry.registry_id = crypto::random_array<16>();
    registry.issuer_did = issuer_did;
    registry.epoch = 0;
    return {registry, make_state(registry, issuer_keys)};
}

RegistryState register_credential(RevocationRegistry& registry, const crypto::KeyPair& issuer_keys,
                                  const Cid& cid) {
    auto it = std::lower_bound(registry.active_cids.begin(), registry.active_cids.end(), cid);
    if (it != registry.active_cids.end() && *it == cid) {
        raise(Errc::DuplicateCid, "credential id already registered");
    }
    registry.active_cids.insert(it, cid);
    registry.epoch += 1;
    return make_state(registry, issuer_keys);
}

RegistryState revoke_credential(RevocationRegistry& registry, const crypto::KeyPair& issuer_keys,
                                const Cid& cid) {
    auto it = std::lower_bound(registry.active_cids.begin(), registry.active_cids.end(), cid);
    if (it == registry.active_cids.end() || *it != cid) {
        raise(Errc::UnknownCid, "credential id not active");
    }
    registry.active_cids.erase(it);
    registry.epoch += 1;
    return make_state(registry, issuer_keys);
}

NonRevocationProof prove_non_revocation(const RevocationRegistry& registry, const Cid& cid) {
    auto it = std::lower_bound(registry.active_cids.begin(), registry.active_cids.end(), cid);
    if (it == registry.active_cids.end() || *it != cid) {
        raise(Errc::UnknownCid, "cannot prove membership of an inactive cid");
    }

    NonRevocationProof proof;
    proof.cid = cid;
    proof.registry_id = registry.registry_id;
    proof.epoch = registry.epoch;

    std::vector<crypto::Digest> level;
    level.reserve(registry.active_cids.size());
    for (const auto& c : registry.active_cids) {
        level.push_back(leaf_hash(c));
    }
    size_t index = static_cast<size_t>(it - registry.active_cids.begin());

    while (level.size() > 1) {
        if (level.size() % 2 != 0) {
            level.push_back(level.back());
        }
        size_t sibling = index ^ 1;
        proof.merkle_path.push_back({level[sibling], sibling < index});
        std::vector<crypto::Digest> next;
        next.reserve(level.size() / 2);
        for (size_t i = 0; i < level.size(); i += 2) {
            next.push_back(node_hash(level[i], level[i + 1]));
        }
        level = std::move(next);
        index /= 2;
    }
    return proof;
}

bool verify_non_revocation(const NonRevocationProof& proof, const RegistryState& state) {
    if (proof.registry_id != state.registry_id || proof.epoch != state.epoch) {
        return false;
    }
    crypto::Digest current = leaf_hash(proof.cid);
    for (const auto& el : proof.merkle_path) {
        current = el.sibling_on_left ? node_hash(el.sibling, current) : node_hash(current, el.sibling);
    }
    return current == state.root;
}

bool verify_state_signature(const RegistryState& state, const crypto::Key32& issuer_public_key) {
    return crypto::verify(issuer_public_key,
                          as_span(state_signing_bytes(state.registry_id, state.epoch, state.root)),
                          state.issuer_signature);
}

}  // namespace ssi::revocation
