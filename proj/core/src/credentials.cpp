#include "ssi/credentials.hpp"

#include <algorithm>
#include <set>

#include "ssi/errors.hpp"

namespace ssi::credentials {

namespace {

constexpr uint8_t kClaimSeparator = 0x1F;

Json vc_core_json(const VerifiableCredential& vc) {
    Json digests = Json::array();
    for (const auto& d : vc.claim_digests) {
        digests.push_back(d.to_b58());
    }
    return Json{
        {"cid", b58(vc.cid)},
        {"issuer", vc.issuer_did.to_json()},
        {"subject", vc.subject_did.to_json()},
        {"claim_digests", digests},
        {"registry_id", b58(vc.registry_id)},
        {"issued_at", vc.issued_at},
    };
}

Json vp_core_json(const VerifiablePresentation& vp) {
    Json disclosed = Json::array();
    for (const auto& d : vp.disclosed) {
        disclosed.push_back(d.to_json());
    }
    Json nonrev = Json::array();
    for (const auto& p : vp.nonrev) {
        nonrev.push_back(p.to_json());
    }
    Json j{
        {"vp_id", b58(vp.vp_id)},
        {"holder", vp.holder_did.to_json()},
        {"disclosed", disclosed},
        {"nonrev", nonrev},
        {"audience", vp.audience_did.to_json()},
    };
    j["expires_at"] = vp.expires_at ? Json(*vp.expires_at) : Json(nullptr);
    return j;
}

revocation::NonRevocationProof proof_from_json(const Json& j) {
    revocation::NonRevocationProof proof;
    proof.cid = from_b58_array<16>(j.at("cid"));
    proof.registry_id = from_b58_array<16>(j.at("registry_id"));
    proof.epoch = j.at("epoch").get<uint64_t>();
    for (const auto& el : j.at("path")) {
        revocation::PathElement pe;
        pe.sibling.bytes = from_b58_array<crypto::kDigestBytes>(el.at("sibling"));
        pe.sibling_on_left = el.at("left").get<bool>();
        proof.merkle_path.push_back(pe);
    }
    return proof;
}

/// Resolves a did document either from the ledger (anywise) or from the
/// verifier's wallet-local documents (pairwise peers), integrity-checked.
const identity::DidDocument* resolve_doc(const identity::Did& did, const ledger::Ledger& ledger,
                                         const std::map<std::string, identity::DidDocument>& local,
                                         identity::DidDocument& storage) {
    if (did.kind == identity::DidKind::Anywise) {
        try {
            storage = ledger.get_did(did);
            return &storage;
        } catch (const Error&) {
            return nullptr;
        }
    }
    auto it = local.find(did.id_string);
    if (it == local.end() || !identity::check_binding(did, it->second)) {
        return nullptr;
    }
    return &it->second;
}

bool check_not_revoked(const VerifiableCredential& envelope,
                       const revocation::NonRevocationProof* proof, const ledger::Ledger& ledger,
                       const crypto::Key32* issuer_ledger_key) {
    if (proof == nullptr || issuer_ledger_key == nullptr) {
        return false;
    }
    if (proof->cid != envelope.cid || proof->registry_id != envelope.registry_id) {
        return false;
    }
    auto latest = ledger.latest_registry_state(envelope.registry_id);
    if (!latest || !revocation::verify_state_signature(*latest, *issuer_ledger_key)) {
        return false;
    }
    // Proofs pinned to anything but the newest anchored epoch fail closed.
    if (proof->epoch != latest->epoch) {
        return false;
    }
    return revocation::verify_non_revocation(*proof, *latest);
}

}  // namespace

Json Claim::to_json() const {
    return Json{{"name", name}, {"value", value}, {"salt", b58(salt)}};
}

Claim Claim::from_json(const Json& j) {
    Claim c;
    c.name = j.at("name").get<std::string>();
    c.value = j.at("value").get<std::string>();
    c.salt = from_b58_array<16>(j.at("salt"));
    return c;
}

crypto::Digest claim_digest(const Claim& claim) {
    Bytes data;
    data.reserve(claim.name.size() + claim.value.size() + claim.salt.size() + 2);
    data.insert(data.end(), claim.name.begin(), claim.name.end());
    data.push_back(kClaimSeparator);
    data.insert(data.end(), claim.value.begin(), claim.value.end());
    data.push_back(kClaimSeparator);
    data.insert(data.end(), claim.salt.begin(), claim.salt.end());
    return crypto::hash(as_span(data));
}

Bytes VerifiableCredential::signing_bytes() const {
    return canonical_bytes(vc_core_json(*this));
}

Json VerifiableCredential::to_json(bool include_claims) const {
    Json j = vc_core_json(*this);
    j["signature"] = b58(signature);
    if (include_claims) {
        Json claims_json = Json::array();
        for (const auto& c : claims) {
            claims_json.push_back(c.to_json());
        }
        j["claims"] = claims_json;
    }
    return j;
}

VerifiableCredential VerifiableCredential::from_json(const Json& j) {
    VerifiableCredential vc;
    vc.cid = from_b58_array<16>(j.at("cid"));
    vc.issuer_did = identity::Did::from_json(j.at("issuer"));
    vc.subject_did = identity::Did::from_json(j.at("subject"));
    for (const auto& d : j.at("claim_digests")) {
        crypto::Digest digest;
        digest.bytes = from_b58_array<crypto::kDigestBytes>(d);
        vc.claim_digests.push_back(digest);
    }
    vc.registry_id = from_b58_array<16>(j.at("registry_id"));
    vc.issued_at = j.at("issued_at").get<uint64_t>();
    vc.signature = from_b58_array<crypto::kSignatureBytes>(j.at("signature"));
    if (j.contains("claims")) {
        for (const auto& c : j.at("claims")) {
            vc.claims.push_back(Claim::from_json(c));
        }
    }
    return vc;
}

std::optional<Claim> VerifiableCredential::find_claim(std::string_view name) const {
    for (const auto& c : claims) {
        if (c.name == name) {
            return c;
        }
    }
    return std::nullopt;
}

Json DisclosedCredential::to_json() const {
    Json claims_json = Json::array();
    for (const auto& c : disclosed) {
        claims_json.push_back(c.to_json());
    }
    return Json{{"vc", envelope.to_json(false)}, {"claims", claims_json}};
}

DisclosedCredential DisclosedCredential::from_json(const Json& j) {
    DisclosedCredential d;
    d.envelope = VerifiableCredential::from_json(j.at("vc"));
    for (const auto& c : j.at("claims")) {
        d.disclosed.push_back(Claim::from_json(c));
    }
    return d;
}

Bytes VerifiablePresentation::signing_bytes() const {
    return canonical_bytes(vp_core_json(*this));
}

Json VerifiablePresentation::to_json() const {
    Json j = vp_core_json(*this);
    j["holder_signature"] = b58(holder_signature);
    return j;
}

VerifiablePresentation VerifiablePresentation::from_json(const Json& j) {
    VerifiablePresentation vp;
    vp.vp_id = from_b58_array<16>(j.at("vp_id"));
    vp.holder_did = identity::Did::from_json(j.at("holder"));
    for (const auto& d : j.at("disclosed")) {
        vp.disclosed.push_back(DisclosedCredential::from_json(d));
    }
    for (const auto& p : j.at("nonrev")) {
        vp.nonrev.push_back(proof_from_json(p));
    }
    vp.audience_did = identity::Did::from_json(j.at("audience"));
    if (!j.at("expires_at").is_null()) {
        vp.expires_at = j.at("expires_at").get<uint64_t>();
    }
    vp.holder_signature = from_b58_array<crypto::kSignatureBytes>(j.at("holder_signature"));
    return vp;
}

Json VerificationReport::to_json() const {
    return Json{
        {"signature_ok", signature_ok}, {"issuer_known", issuer_known},
        {"not_revoked", not_revoked},   {"digests_ok", digests_ok},
        {"audience_ok", audience_ok},   {"expired", expired},
        {"valid", valid()},
    };
}

VerifiableCredential issue_vc(const identity::Did& issuer_did, const crypto::KeyPair& issuer_keys,
                              revocation::RevocationRegistry& registry,
                              const identity::Did& subject_did,
                              const std::vector<std::pair<std::string, std::string>>& claims,
                              ledger::Ledger& ledger, uint64_t now) {
    if (!ledger.has_did(issuer_did.id_string)) {
        raise(Errc::UnregisteredIssuer, "issuer did is not registered on the ledger");
    }
    if (registry.issuer_did != issuer_did) {
        raise(Errc::RegistryUnavailable, "registry does not belong to this issuer");
    }

    VerifiableCredential vc;
    vc.cid = crypto::random_array<16>();
    vc.issuer_did = issuer_did;
    vc.subject_did = subject_did;
    vc.registry_id = registry.registry_id;
    vc.issued_at = now;
    for (const auto& [name, value] : claims) {
        Claim c{name, value, crypto::random_array<16>()};
        vc.claim_digests.push_back(claim_digest(c));
        vc.claims.push_back(std::move(c));
    }
    vc.signature = crypto::sign(issuer_keys.private_key, as_span(vc.signing_bytes()));

    auto state = revocation::register_credential(registry, issuer_keys, vc.cid);
    ledger.anchor_registry_state(issuer_did.id_string, state, now);
    return vc;
}

VerificationReport verify_vc(const VerifiableCredential& vc, const ledger::Ledger& ledger,
                             uint64_t /*now*/, const revocation::NonRevocationProof* proof,
                             const identity::DidDocument* issuer_doc_hint) {
    VerificationReport report;

    const crypto::Key32* signing_key = nullptr;
    const crypto::Key32* ledger_key = nullptr;
    identity::DidDocument ledger_doc;
    if (ledger.has_did(vc.issuer_did.id_string)) {
        ledger_doc = ledger.get_did(vc.issuer_did.id_string);
        report.issuer_known = true;
        signing_key = &ledger_doc.verification_key;
        ledger_key = &ledger_doc.verification_key;
    } else if (issuer_doc_hint != nullptr &&
               identity::check_binding(vc.issuer_did, *issuer_doc_hint)) {
        signing_key = &issuer_doc_hint->verification_key;
    }

    report.signature_ok =
        signing_key != nullptr && crypto::verify(*signing_key, as_span(vc.signing_bytes()),
                                                 vc.signature);

    if (!vc.claims.empty()) {
        report.digests_ok = vc.claims.size() == vc.claim_digests.size();
        for (size_t i = 0; report.digests_ok && i < vc.claims.size(); ++i) {
            report.digests_ok = claim_digest(vc.claims[i]) == vc.claim_digests[i];
        }
    }

    report.not_revoked = check_not_revoked(vc, proof, ledger, ledger_key);
    return report;
}

VerifiablePresentation create_vp(const identity::Did& holder_did,
                                 const crypto::KeyPair& holder_keys,
                                 const std::vector<const VerifiableCredential*>& vcs,
                                 const std::vector<std::string>& disclosed_claim_names,
                                 const identity::Did& audience_did,
                                 std::optional<uint64_t> expires_at,
                                 const RegistryDirectory& registries) {
    if (disclosed_claim_names.empty()) {
        raise(Errc::EmptyDisclosure, "a presentation must disclose at least one claim");
    }
    std::set<std::string> requested(disclosed_claim_names.begin(), disclosed_claim_names.end());
    std::set<std::string> matched;

    VerifiablePresentation vp;
    vp.vp_id = crypto::random_array<16>();
    vp.holder_did = holder_did;
    vp.audience_did = audience_did;
    vp.expires_at = expires_at;

    for (const VerifiableCredential* vc : vcs) {
        DisclosedCredential dc;
        dc.envelope = *vc;
        dc.envelope.claims.clear();
        for (const auto& claim : vc->claims) {
            if (requested.contains(claim.name)) {
                dc.disclosed.push_back(claim);
                matched.insert(claim.name);
            }
        }
        if (dc.disclosed.empty()) {
            continue;
        }
        auto reg_it = registries.find(vc->registry_id);
        if (reg_it != registries.end()) {
            try {
                vp.nonrev.push_back(revocation::prove_non_revocation(reg_it->second, vc->cid));
            } catch (const Error&) {
                // revoked: no proof can exist; verification fails closed
            }
        }
        vp.disclosed.push_back(std::move(dc));
    }

    for (const auto& name : requested) {
        if (!matched.contains(name)) {
            raise(Errc::UnknownClaim, "no referenced credential carries claim " + name);
        }
    }
    if (vp.disclosed.empty()) {
        raise(Errc::EmptyDisclosure, "no claims matched the disclosure set");
    }

    vp.holder_signature = crypto::sign(holder_keys.private_key, as_span(vp.signing_bytes()));
    return vp;
}

VerificationReport verify_vp(const VerifiablePresentation& vp, const ledger::Ledger& ledger,
                             const std::map<std::string, identity::DidDocument>& local_docs,
                             const identity::Did& expected_audience, uint64_t now) {
    VerificationReport report;
    report.not_revoked = !vp.disclosed.empty();
    report.issuer_known = !vp.disclosed.empty();

    identity::DidDocument holder_storage;
    const identity::DidDocument* holder_doc =
        resolve_doc(vp.holder_did, ledger, local_docs, holder_storage);
    bool holder_sig_ok =
        holder_doc != nullptr && crypto::verify(holder_doc->verification_key,
                                                as_span(vp.signing_bytes()), vp.holder_signature);
    report.signature_ok = holder_sig_ok;

    for (const auto& dc : vp.disclosed) {
        const auto& envelope = dc.envelope;

        identity::DidDocument issuer_doc;
        bool issuer_on_ledger = ledger.has_did(envelope.issuer_did.id_string);
        const crypto::Key32* issuer_key = nullptr;
        if (issuer_on_ledger) {
            issuer_doc = ledger.get_did(envelope.issuer_did.id_string);
            issuer_key = &issuer_doc.verification_key;
        }
        report.issuer_known = report.issuer_known && issuer_on_ledger;
        report.signature_ok =
            report.signature_ok && issuer_key != nullptr &&
            crypto::verify(*issuer_key, as_span(envelope.signing_bytes()), envelope.signature);

        for (const auto& claim : dc.disclosed) {
            crypto::Digest d = claim_digest(claim);
            bool member = std::find(envelope.claim_digests.begin(), envelope.claim_digests.end(),
                                    d) != envelope.claim_digests.end();
            report.digests_ok = report.digests_ok && member;
        }

        const revocation::NonRevocationProof* proof = nullptr;
        for (const auto& p : vp.nonrev) {
            if (p.cid == envelope.cid && p.registry_id == envelope.registry_id) {
                proof = &p;
                break;
            }
        }
        report.not_revoked =
            report.not_revoked && check_not_revoked(envelope, proof, ledger, issuer_key);
    }

    report.audience_ok = vp.audience_did == expected_audience;
    report.expired = vp.expires_at.has_value() && now >= *vp.expires_at;
    return report;
}

}  // namespace ssi::credentials
