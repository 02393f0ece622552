#pragma once

#include <map>
#include <optional>
#include <vector>

#include "ssi/crypto.hpp"
#include "ssi/identity.hpp"
#include "ssi/ledger.hpp"
#include "ssi/revocation.hpp"

namespace ssi::credentials {

/// Claim commitment: digest = H(name || 0x1F || value || 0x1F || salt).
/// The credential signs digests only, so undisclosed claims stay hidden.
struct Claim {
    std::string name;
    std::string value;
    ByteArray<16> salt{};

    Json to_json() const;
    static Claim from_json(const Json& j);
    bool operator==(const Claim&) const = default;
};

crypto::Digest claim_digest(const Claim& claim);

struct VerifiableCredential {
    revocation::Cid cid{};
    identity::Did issuer_did;
    identity::Did subject_did;
    std::vector<crypto::Digest> claim_digests;
    std::vector<Claim> claims;  // held by the subject; stripped in presentations
    revocation::RegistryId registry_id{};
    uint64_t issued_at = 0;
    crypto::Signature signature{};

    Bytes signing_bytes() const;
    Json to_json(bool include_claims) const;
    static VerifiableCredential from_json(const Json& j);

    std::optional<Claim> find_claim(std::string_view name) const;
};

/// One source credential inside a presentation: the signed envelope with all
/// claim values removed, plus only the claims the holder chose to reveal.
struct DisclosedCredential {
    VerifiableCredential envelope;
    std::vector<Claim> disclosed;

    Json to_json() const;
    static DisclosedCredential from_json(const Json& j);
};

struct VerifiablePresentation {
    ByteArray<16> vp_id{};
    identity::Did holder_did;
    std::vector<DisclosedCredential> disclosed;
    std::vector<revocation::NonRevocationProof> nonrev;
    identity::Did audience_did;
    std::optional<uint64_t> expires_at;
    crypto::Signature holder_signature{};

    Bytes signing_bytes() const;
    Json to_json() const;
    static VerifiablePresentation from_json(const Json& j);
};

struct VerificationReport {
    bool signature_ok = false;
    bool issuer_known = false;
    bool not_revoked = false;
    bool digests_ok = true;
    bool audience_ok = true;
    bool expired = false;

    bool valid() const {
        return signature_ok && issuer_known && not_revoked && digests_ok && audience_ok && !expired;
    }

    Json to_json() const;
};

/// Published registries, keyed by registry id. Stands in for the issuer's
/// registry service that holders query when building fresh proofs.
using RegistryDirectory = std::map<revocation::RegistryId, revocation::RevocationRegistry>;

VerifiableCredential issue_vc(const identity::Did& issuer_did, const crypto::KeyPair& issuer_keys,
                              revocation::RevocationRegistry& registry,
                              const identity::Did& subject_did,
                              const std::vector<std::pair<std::string, std::string>>& claims,
                              ledger::Ledger& ledger, uint64_t now);

/// The three facts are established independently; overall validity is their
/// conjunction. `proof` backs not_revoked; `issuer_doc_hint` lets the caller
/// check the signature of an issuer that never registered on the ledger.
VerificationReport verify_vc(const VerifiableCredential& vc, const ledger::Ledger& ledger,
                             uint64_t now,
                             const revocation::NonRevocationProof* proof = nullptr,
                             const identity::DidDocument* issuer_doc_hint = nullptr);

VerifiablePresentation create_vp(const identity::Did& holder_did,
                                 const crypto::KeyPair& holder_keys,
                                 const std::vector<const VerifiableCredential*>& vcs,
                                 const std::vector<std::string>& disclosed_claim_names,
                                 const identity::Did& audience_did,
                                 std::optional<uint64_t> expires_at,
                                 const RegistryDirectory& registries);

VerificationReport verify_vp(const VerifiablePresentation& vp, const ledger::Ledger& ledger,
                             const std::map<std::string, identity::DidDocument>& local_docs,
                             const identity::Did& expected_audience, uint64_t now);

}  // namespace ssi::credentials
