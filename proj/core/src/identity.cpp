#include "ssi/identity.hpp"

#include "ssi/errors.hpp"

namespace ssi::identity {

std::string_view kind_name(DidKind k) {
    return k == DidKind::Anywise ? "anywise" : "pairwise";
}

DidKind kind_from_name(std::string_view name) {
    if (name == "anywise") {
        return DidKind::Anywise;
    }
    if (name == "pairwise") {
        return DidKind::Pairwise;
    }
    raise(Errc::MalformedPayload, "unknown did kind");
}

Json Did::to_json() const {
    return Json{{"method", method}, {"id", id_string}, {"kind", std::string(kind_name(kind))}};
}

Did Did::from_json(const Json& j) {
    Did did;
    did.method = j.at("method").get<std::string>();
    did.id_string = j.at("id").get<std::string>();
    did.kind = kind_from_name(j.at("kind").get<std::string>());
    return did;
}

Json DidDocument::genesis_json() const {
    return Json{
        {"created_at", created_at},
        {"kind", std::string(kind_name(did.kind))},
        {"mediator_endpoint", mediator_endpoint},
        {"method", did.method},
        {"verification_key", b58(verification_key)},
    };
}

Json DidDocument::to_json() const {
    Json j = genesis_json();
    j["id"] = did.id_string;
    return j;
}

DidDocument DidDocument::from_json(const Json& j) {
    DidDocument doc;
    doc.created_at = j.at("created_at").get<uint64_t>();
    doc.mediator_endpoint = j.at("mediator_endpoint").get<std::string>();
    doc.verification_key = from_b58_array<crypto::kKeyBytes>(j.at("verification_key"));
    doc.did.method = j.at("method").get<std::string>();
    doc.did.kind = kind_from_name(j.at("kind").get<std::string>());
    doc.did.id_string = j.at("id").get<std::string>();
    return doc;
}

std::string derive_id(const DidDocument& genesis) {
    return crypto::hash(canonical_text(genesis.genesis_json())).to_b58();
}

bool check_binding(const Did& did, const DidDocument& doc) {
    return doc.did == did && derive_id(doc) == did.id_string;
}

std::pair<Did, DidDocument> create_did(DidKind kind, const crypto::KeyPair& keypair,
                                       const std::string& mediator_endpoint, uint64_t created_at) {
    if (mediator_endpoint.empty()) {
        raise(Errc::MissingEndpoint, "did document requires a mediator endpoint");
    }
    DidDocument doc;
    doc.did.kind = kind;
    doc.verification_key = keypair.public_key;
    doc.mediator_endpoint = mediator_endpoint;
    doc.created_at = created_at;
    doc.did.id_string = derive_id(doc);
    return {doc.did, doc};
}

Bytes OobInvitation::to_bytes() const {
    Json j{
        {"v", 1},
        {"did", inviter_pairwise_did.to_json()},
        {"doc", inviter_doc.to_json()},
        {"alias", alias},
        {"nonce_b58", b58(nonce)},
    };
    return canonical_bytes(j);
}

OobInvitation OobInvitation::parse(std::span<const uint8_t> payload) {
    Json j = Json::parse(payload.begin(), payload.end(), nullptr, false);
    if (j.is_discarded() || !j.is_object() || j.value("v", 0) != 1) {
        raise(Errc::MalformedPayload, "invitation payload does not parse");
    }
    try {
        OobInvitation inv;
        inv.inviter_pairwise_did = Did::from_json(j.at("did"));
        inv.inviter_doc = DidDocument::from_json(j.at("doc"));
        inv.alias = j.at("alias").get<std::string>();
        inv.nonce = from_b58_array<16>(j.at("nonce_b58"));
        if (!check_binding(inv.inviter_pairwise_did, inv.inviter_doc)) {
            raise(Errc::IntegrityMismatch, "invitation document does not hash to its did");
        }
        return inv;
    } catch (const Json::exception&) {
        raise(Errc::MalformedPayload, "invitation fields missing or mistyped");
    }
}

}  // namespace ssi::identity
