#pragma once

#include <string>
#include <utility>

#include "ssi/canonical.hpp"
#include "ssi/crypto.hpp"

namespace ssi::identity {

enum class DidKind : uint8_t { Anywise, Pairwise };

std::string_view kind_name(DidKind k);
DidKind kind_from_name(std::string_view name);

/// Self-certifying identifier: id_string = base58(sha256(genesis document)),
/// so any holder of the document can recompute and check the binding.
struct Did {
    std::string method = "peer";
    std::string id_string;
    DidKind kind = DidKind::Pairwise;

    std::string to_string() const { return "did:" + method + ":" + id_string; }

    bool operator==(const Did&) const = default;
    auto operator<=>(const Did&) const = default;

    Json to_json() const;
    static Did from_json(const Json& j);
};

struct DidDocument {
    Did did;
    crypto::Key32 verification_key{};
    std::string mediator_endpoint;
    uint64_t created_at = 0;

    /// Canonical form hashed into the id; excludes the id itself.
    Json genesis_json() const;
    Json to_json() const;
    static DidDocument from_json(const Json& j);

    bool operator==(const DidDocument&) const = default;
};

std::string derive_id(const DidDocument& genesis);

/// True iff `doc` rehashes to `did` and the embedded did matches.
bool check_binding(const Did& did, const DidDocument& doc);

std::pair<Did, DidDocument> create_did(DidKind kind, const crypto::KeyPair& keypair,
                                       const std::string& mediator_endpoint, uint64_t created_at);

/// Out-of-band connection offer (the QR payload). Carries the inviter's full
/// pairwise document since the exchange happens offline.
struct OobInvitation {
    Did inviter_pairwise_did;
    DidDocument inviter_doc;
    std::string alias;
    ByteArray<16> nonce{};

    Bytes to_bytes() const;
    static OobInvitation parse(std::span<const uint8_t> payload);

    bool operator==(const OobInvitation&) const = default;
};

}  // namespace ssi::identity
