#include "ssi/agents.hpp"

#include <algorithm>

#include "ssi/errors.hpp"

namespace ssi::agents {

namespace {

constexpr std::string_view kBackupAad = "ssi-backup";

Json wrap_to_json(const KeyWrap& wrap) {
    return Json{{"eph", b58(wrap.ephemeral_public)}, {"key", wire::aead_to_json(wrap.wrapped_key)}};
}

KeyWrap wrap_from_json(const Json& j) {
    KeyWrap wrap;
    wrap.ephemeral_public = from_b58_array<crypto::kKeyBytes>(j.at("eph"));
    wrap.wrapped_key = wire::aead_from_json(j.at("key"));
    return wrap;
}

}  // namespace

Bytes Envelope::signing_bytes() const {
    Json j{
        {"from", from_did},
        {"to", to_did},
        {"seq", seq},
        {"body", wire::aead_to_json(body)},
    };
    j["wrap"] = wrap ? wrap_to_json(*wrap) : Json(nullptr);
    return canonical_bytes(j);
}

Bytes Envelope::aad() const {
    return canonical_bytes(Json{{"from", from_did}, {"to", to_did}, {"seq", seq}});
}

Json Envelope::to_json() const {
    Json j{
        {"from", from_did},
        {"to", to_did},
        {"seq", seq},
        {"body", wire::aead_to_json(body)},
        {"sig", b58(sender_signature)},
    };
    j["wrap"] = wrap ? wrap_to_json(*wrap) : Json(nullptr);
    return j;
}

Envelope Envelope::from_json(const Json& j) {
    Envelope env;
    env.from_did = j.at("from").get<std::string>();
    env.to_did = j.at("to").get<std::string>();
    env.seq = j.at("seq").get<uint64_t>();
    if (!j.at("wrap").is_null()) {
        env.wrap = wrap_from_json(j.at("wrap"));
    }
    env.body = wire::aead_from_json(j.at("body"));
    env.sender_signature = from_b58_array<crypto::kSignatureBytes>(j.at("sig"));
    return env;
}

Json AuditEntry::to_json() const {
    return Json{{"kind", kind}, {"actor", actor}, {"object", object}, {"at", at}};
}

Mediator::Mediator(std::string endpoint)
    : keys_(crypto::generate_keypair()), endpoint_(std::move(endpoint)) {
    auto [did, doc] = identity::create_did(identity::DidKind::Anywise, keys_, endpoint_, 0);
    did_ = did;
    doc_ = doc;
}

MediationGrant Mediator::request_mediation(const identity::DidDocument& recipient_doc,
                                           uint64_t now) {
    const std::string& recipient = recipient_doc.did.id_string;
    if (grants_.contains(recipient)) {
        raise(Errc::DuplicateGrant, "mediation already granted for " + recipient);
    }
    MediationGrant grant;
    grant.recipient_did = recipient;
    grant.queue_id = "q:" + recipient;
    grant.granted_at = now;
    grant.recipient_doc = recipient_doc;
    grants_.emplace(recipient, grant);
    queues_.emplace(grant.queue_id, PickupQueue{grant.queue_id, {}});
    return grant;
}

bool Mediator::has_grant(const std::string& recipient_did) const {
    return grants_.contains(recipient_did);
}

void Mediator::deliver(const Envelope& env) {
    auto it = grants_.find(env.to_did);
    if (it == grants_.end()) {
        raise(Errc::NoGrant, "no mediation grant for " + env.to_did);
    }
    queues_.at(it->second.queue_id).pending.push_back(env);
}

std::vector<Envelope> Mediator::pickup(const std::string& recipient_did, size_t max_n) {
    auto it = grants_.find(recipient_did);
    if (it == grants_.end()) {
        raise(Errc::NoGrant, "no mediation grant for " + recipient_did);
    }
    auto& queue = queues_.at(it->second.queue_id);
    std::vector<Envelope> out;
    while (!queue.pending.empty() && out.size() < max_n) {
        out.push_back(queue.pending.front());
        queue.pending.pop_front();
    }
    return out;
}

size_t Mediator::queue_depth(const std::string& recipient_did) const {
    auto it = grants_.find(recipient_did);
    if (it == grants_.end()) {
        return 0;
    }
    return queues_.at(it->second.queue_id).pending.size();
}

std::string Mediator::host_vp(const credentials::VerifiablePresentation& vp,
                              const std::string& owner_did) {
    if (vp.holder_did.id_string != owner_did) {
        raise(Errc::NotOwner, "hosted presentations are uploaded by their holder");
    }
    std::string vp_id = b58(vp.vp_id);
    hosted_[vp_id] = HostedVp{vp, owner_did};
    return vp_id;
}

void Mediator::grant_access(const std::string& owner_did, const std::string& vp_id,
                            const std::string& grantee_did, uint64_t ttl, uint64_t now) {
    auto it = hosted_.find(vp_id);
    if (it == hosted_.end()) {
        raise(Errc::NotFound, "no hosted presentation " + vp_id);
    }
    if (it->second.owner_did != owner_did) {
        raise(Errc::NotOwner, "only the owner grants access");
    }
    AccessGrant grant;
    grant.vp_id = it->second.vp.vp_id;
    grant.grantee_did = grantee_did;
    grant.expires_at = now + ttl;
    access_[vp_id][grantee_did] = grant;
}

void Mediator::revoke_access(const std::string& owner_did, const std::string& vp_id,
                             const std::string& grantee_did) {
    auto it = hosted_.find(vp_id);
    if (it == hosted_.end()) {
        raise(Errc::NotFound, "no hosted presentation " + vp_id);
    }
    if (it->second.owner_did != owner_did) {
        raise(Errc::NotOwner, "only the owner revokes access");
    }
    auto& grants = access_[vp_id];
    auto grant_it = grants.find(grantee_did);
    if (grant_it == grants.end()) {
        raise(Errc::AccessDenied, "no grant for " + grantee_did);
    }
    grant_it->second.revoked = true;

    // Fig-5-style termination notice into the grantee's pickup queue.
    auto grantee_grant = grants_.find(grantee_did);
    if (grantee_grant != grants_.end()) {
        Json notice{{"type", "access-terminated"}, {"vp_id", vp_id}};
        deliver(pack_notice(grantee_grant->second.recipient_doc, notice));
    }
}

void Mediator::remove_vp(const std::string& owner_did, const std::string& vp_id) {
    auto it = hosted_.find(vp_id);
    if (it == hosted_.end()) {
        raise(Errc::NotFound, "no hosted presentation " + vp_id);
    }
    if (it->second.owner_did != owner_did) {
        raise(Errc::NotOwner, "only the owner removes a presentation");
    }
    hosted_.erase(it);
    access_.erase(vp_id);
}

credentials::VerifiablePresentation Mediator::fetch_vp(const std::string& vp_id,
                                                       const std::string& grantee_did,
                                                       uint64_t now) {
    auto it = hosted_.find(vp_id);
    if (it == hosted_.end()) {
        raise(Errc::AccessDenied, "no hosted presentation " + vp_id);
    }
    auto access_it = access_.find(vp_id);
    if (access_it == access_.end() || !access_it->second.contains(grantee_did)) {
        raise(Errc::AccessDenied, "no grant for " + grantee_did);
    }
    const AccessGrant& grant = access_it->second.at(grantee_did);
    if (grant.revoked) {
        raise(Errc::Revoked, "access has been revoked");
    }
    if (now >= grant.expires_at) {
        raise(Errc::Expired, "access grant has expired");
    }
    audit_.push_back({"fetch_vp", grantee_did, vp_id, now});
    return it->second.vp;
}

bool Mediator::has_hosted_vp(const std::string& vp_id) const {
    return hosted_.contains(vp_id);
}

void Mediator::store_backup(const std::string& patient_did, uint64_t sequence_no,
                            std::string ciphertext) {
    backups_[patient_did][sequence_no] = std::move(ciphertext);
}

std::string Mediator::fetch_backup(const std::string& patient_did, uint64_t sequence_no,
                                   const std::string& requester_did, uint64_t now,
                                   const ledger::EmergencyVoucher* voucher,
                                   const crypto::Key32* msp_public_key) {
    auto it = backups_.find(patient_did);
    if (it == backups_.end() || !it->second.contains(sequence_no)) {
        raise(Errc::NotFound, "no backup stored for " + patient_did);
    }
    if (requester_did == patient_did) {
        audit_.push_back({"backup_fetch", requester_did, patient_did, now});
        return it->second.at(sequence_no);
    }
    bool voucher_ok = voucher != nullptr && msp_public_key != nullptr &&
                      voucher->patient_did == patient_did &&
                      voucher->doctor_did == requester_did &&
                      voucher->sequence_no == sequence_no &&
                      ledger::MembershipService::verify_emergency_voucher(*voucher,
                                                                          *msp_public_key);
    if (!voucher_ok) {
        raise(Errc::AccessDenied, "backup release requires the owner or an MSP voucher");
    }
    audit_.push_back({"emergency_backup_release", requester_did, patient_did, now});
    return it->second.at(sequence_no);
}

std::string& Mediator::backup_entry(const std::string& patient_did, uint64_t sequence_no) {
    auto it = backups_.find(patient_did);
    if (it == backups_.end() || !it->second.contains(sequence_no)) {
        raise(Errc::NotFound, "no backup stored for " + patient_did);
    }
    return it->second.at(sequence_no);
}

Envelope Mediator::pack_notice(const identity::DidDocument& recipient_doc, const Json& message) {
    Envelope env;
    env.from_did = did_.id_string;
    env.to_did = recipient_doc.did.id_string;
    env.seq = ++notice_seq_[env.to_did];
    crypto::Key32 key = crypto::connection_key(keys_.private_key, recipient_doc.verification_key);
    env.body = crypto::aead_encrypt(key, as_span(canonical_text(message)), as_span(env.aad()));
    env.sender_signature = crypto::sign(keys_.private_key, as_span(env.signing_bytes()));
    return env;
}

Json Mediator::export_state() const {
    Json queues = Json::object();
    for (const auto& [qid, queue] : queues_) {
        Json envs = Json::array();
        for (const auto& env : queue.pending) {
            envs.push_back(env.to_json());
        }
        queues[qid] = envs;
    }
    Json hosted = Json::object();
    for (const auto& [vp_id, entry] : hosted_) {
        hosted[vp_id] = Json{{"owner", entry.owner_did}, {"vp", entry.vp.to_json()}};
    }
    Json access = Json::object();
    for (const auto& [vp_id, grants] : access_) {
        Json per_grantee = Json::object();
        for (const auto& [grantee, grant] : grants) {
            per_grantee[grantee] =
                Json{{"expires_at", grant.expires_at}, {"revoked", grant.revoked}};
        }
        access[vp_id] = per_grantee;
    }
    Json backups = Json::object();
    for (const auto& [did, by_seq] : backups_) {
        Json seqs = Json::object();
        for (const auto& [seq, text] : by_seq) {
            seqs[std::to_string(seq)] = text;
        }
        backups[did] = seqs;
    }
    Json audit = Json::array();
    for (const auto& entry : audit_) {
        audit.push_back(entry.to_json());
    }
    Json grants = Json::array();
    for (const auto& [recipient, grant] : grants_) {
        grants.push_back(Json{{"recipient", recipient}, {"queue", grant.queue_id}});
    }
    return Json{{"queues", queues}, {"hosted", hosted},   {"access", access},
                {"backups", backups}, {"audit", audit},    {"grants", grants}};
}

Json Connection::to_json() const {
    Json j{
        {"their_doc", their_doc.to_json()},
        {"authenticated_peer", authenticated_peer},
        {"send_seq", send_seq},
        {"recv_seq", recv_seq},
    };
    j["their_anywise"] = their_anywise ? their_anywise->to_json() : Json(nullptr);
    return j;
}

Connection Connection::from_json(const Json& j) {
    Connection conn;
    conn.their_doc = identity::DidDocument::from_json(j.at("their_doc"));
    conn.authenticated_peer = j.at("authenticated_peer").get<bool>();
    if (!j.at("their_anywise").is_null()) {
        conn.their_anywise = identity::Did::from_json(j.at("their_anywise"));
    }
    conn.send_seq = j.at("send_seq").get<uint64_t>();
    conn.recv_seq = j.at("recv_seq").get<uint64_t>();
    return conn;
}

std::pair<identity::Did, identity::DidDocument> Wallet::create_did(identity::DidKind kind,
                                                                   const std::string& alias,
                                                                   const std::string& endpoint,
                                                                   uint64_t now) {
    if (dids.contains(alias)) {
        raise(Errc::DuplicateAlias, "alias already in use: " + alias);
    }
    crypto::KeyPair kp = crypto::generate_keypair();
    auto [did, doc] = identity::create_did(kind, kp, endpoint, now);
    keys[did.id_string] = kp;
    dids[alias] = {did, doc};
    return {did, doc};
}

const identity::Did& Wallet::did_of(const std::string& alias) const {
    auto it = dids.find(alias);
    if (it == dids.end()) {
        raise(Errc::NotFound, "no did under alias " + alias);
    }
    return it->second.first;
}

const identity::DidDocument& Wallet::doc_of(const std::string& alias) const {
    auto it = dids.find(alias);
    if (it == dids.end()) {
        raise(Errc::NotFound, "no did under alias " + alias);
    }
    return it->second.second;
}

const crypto::KeyPair& Wallet::keys_of(const std::string& alias) const {
    return keys.at(did_of(alias).id_string);
}

identity::DidDocument Wallet::resolve_local(const identity::Did& did) const {
    for (const auto& [alias, entry] : dids) {
        if (entry.first.id_string == did.id_string) {
            if (!identity::check_binding(did, entry.second)) {
                raise(Errc::IntegrityMismatch, "stored document does not hash to did");
            }
            return entry.second;
        }
    }
    for (const auto& [alias, conn] : connections) {
        if (conn.their_doc.did.id_string == did.id_string) {
            if (!identity::check_binding(did, conn.their_doc)) {
                raise(Errc::IntegrityMismatch, "stored document does not hash to did");
            }
            return conn.their_doc;
        }
    }
    raise(Errc::NotFound, "did not known to this wallet: " + did.id_string);
}

identity::OobInvitation Wallet::make_invitation(const std::string& alias, Mediator& mediator,
                                                uint64_t now) {
    if (connections.contains(alias)) {
        raise(Errc::DuplicateAlias, "alias already in use: " + alias);
    }
    auto [did, doc] = create_did(identity::DidKind::Pairwise, alias, mediator.endpoint(), now);
    mediator.request_mediation(doc, now);

    identity::OobInvitation inv;
    inv.inviter_pairwise_did = did;
    inv.inviter_doc = doc;
    inv.alias = alias;
    inv.nonce = crypto::random_array<16>();
    pending_invitations_.push_back({alias, inv.nonce});
    return inv;
}

std::optional<std::string> Wallet::pending_invitation_alias(const ByteArray<16>& nonce) const {
    for (const auto& pending : pending_invitations_) {
        if (pending.nonce == nonce) {
            return pending.alias;
        }
    }
    return std::nullopt;
}

void Wallet::consume_pending_invitation(const ByteArray<16>& nonce) {
    std::erase_if(pending_invitations_,
                  [&nonce](const PendingInvitation& p) { return p.nonce == nonce; });
}

Envelope Wallet::pack_envelope(const std::string& connection_alias, const Json& message) {
    auto conn_it = connections.find(connection_alias);
    if (conn_it == connections.end()) {
        raise(Errc::UnknownConnection, "no connection " + connection_alias);
    }
    Connection& conn = conn_it->second;
    const crypto::KeyPair& my_keys = keys_of(connection_alias);

    Envelope env;
    env.from_did = did_of(connection_alias).id_string;
    env.to_did = conn.their_doc.did.id_string;
    env.seq = ++conn.send_seq;
    crypto::Key32 key =
        crypto::connection_key(my_keys.private_key, conn.their_doc.verification_key);
    env.body = crypto::aead_encrypt(key, as_span(canonical_text(message)), as_span(env.aad()));
    env.sender_signature = crypto::sign(my_keys.private_key, as_span(env.signing_bytes()));
    return env;
}

Envelope Wallet::pack_first_contact(const std::string& connection_alias, const Json& message) {
    auto conn_it = connections.find(connection_alias);
    if (conn_it == connections.end()) {
        raise(Errc::UnknownConnection, "no connection " + connection_alias);
    }
    Connection& conn = conn_it->second;
    const crypto::KeyPair& my_keys = keys_of(connection_alias);

    Envelope env;
    env.from_did = did_of(connection_alias).id_string;
    env.to_did = conn.their_doc.did.id_string;
    env.seq = ++conn.send_seq;
    crypto::HybridCiphertext hc = crypto::hybrid_encrypt(
        conn.their_doc.verification_key, as_span(canonical_text(message)), as_span(env.aad()));
    env.wrap = KeyWrap{hc.ephemeral_public, hc.wrapped_key};
    env.body = hc.body;
    env.sender_signature = crypto::sign(my_keys.private_key, as_span(env.signing_bytes()));
    return env;
}

Json Wallet::unpack_envelope(const Envelope& env, const identity::DidDocument& mediator_doc) {
    if (env.from_did == mediator_doc.did.id_string) {
        if (!crypto::verify(mediator_doc.verification_key, as_span(env.signing_bytes()),
                            env.sender_signature)) {
            raise(Errc::AuthenticationFailure, "mediator notice signature does not verify");
        }
        if (env.seq <= mediator_notice_seq_) {
            raise(Errc::Replay, "mediator notice replayed");
        }
        auto key_it = keys.find(env.to_did);
        if (key_it == keys.end()) {
            raise(Errc::UnknownConnection, "notice addressed to a did this wallet lacks");
        }
        crypto::Key32 key = crypto::connection_key(key_it->second.private_key,
                                                   mediator_doc.verification_key);
        Bytes plain = crypto::aead_decrypt(key, env.body, as_span(env.aad()));
        mediator_notice_seq_ = env.seq;
        return Json::parse(to_string(as_span(plain)));
    }

    std::string alias = alias_for_peer(env.from_did);
    Connection& conn = connections.at(alias);
    if (!crypto::verify(conn.their_doc.verification_key, as_span(env.signing_bytes()),
                        env.sender_signature)) {
        raise(Errc::AuthenticationFailure, "envelope signature does not verify");
    }
    if (env.seq <= conn.recv_seq) {
        raise(Errc::Replay, "envelope sequence already seen");
    }
    const crypto::KeyPair& my_keys = keys.at(env.to_did);
    crypto::Key32 key =
        crypto::connection_key(my_keys.private_key, conn.their_doc.verification_key);
    Bytes plain = crypto::aead_decrypt(key, env.body, as_span(env.aad()));
    conn.recv_seq = env.seq;
    return Json::parse(to_string(as_span(plain)));
}

std::pair<Json, identity::DidDocument> Wallet::unpack_first_contact(const Envelope& env) {
    if (!env.wrap) {
        raise(Errc::MalformedPayload, "first-contact envelope lacks a key wrap");
    }
    auto key_it = keys.find(env.to_did);
    if (key_it == keys.end()) {
        raise(Errc::UnknownConnection, "envelope addressed to a did this wallet lacks");
    }
    crypto::HybridCiphertext hc{env.wrap->ephemeral_public, env.wrap->wrapped_key, env.body};
    Bytes plain = crypto::hybrid_decrypt(key_it->second.private_key, hc, as_span(env.aad()));
    Json message = Json::parse(to_string(as_span(plain)));

    auto sender_doc = identity::DidDocument::from_json(message.at("doc"));
    if (sender_doc.did.id_string != env.from_did ||
        !identity::check_binding(sender_doc.did, sender_doc)) {
        raise(Errc::IntegrityMismatch, "sender document does not match envelope origin");
    }
    if (!crypto::verify(sender_doc.verification_key, as_span(env.signing_bytes()),
                        env.sender_signature)) {
        raise(Errc::AuthenticationFailure, "first-contact signature does not verify");
    }
    return {message, sender_doc};
}

std::string Wallet::alias_for_peer(const std::string& their_did_id) const {
    for (const auto& [alias, conn] : connections) {
        if (conn.their_doc.did.id_string == their_did_id) {
            return alias;
        }
    }
    raise(Errc::UnknownConnection, "no connection with peer " + their_did_id);
}

Connection& Wallet::connection(const std::string& alias) {
    auto it = connections.find(alias);
    if (it == connections.end()) {
        raise(Errc::UnknownConnection, "no connection " + alias);
    }
    return it->second;
}

const Connection& Wallet::connection(const std::string& alias) const {
    auto it = connections.find(alias);
    if (it == connections.end()) {
        raise(Errc::UnknownConnection, "no connection " + alias);
    }
    return it->second;
}

void Wallet::store_credential(const credentials::VerifiableCredential& vc) {
    creds[b58(vc.cid)] = vc;
}

const credentials::VerifiableCredential& Wallet::credential(const revocation::Cid& cid) const {
    auto it = creds.find(b58(cid));
    if (it == creds.end()) {
        raise(Errc::NotFound, "wallet does not hold credential " + b58(cid));
    }
    return it->second;
}

credentials::VerifiablePresentation Wallet::create_presentation(
    const std::string& connection_alias, const std::vector<revocation::Cid>& cids,
    const std::vector<std::string>& disclosed_claim_names, std::optional<uint64_t> expires_at,
    const credentials::RegistryDirectory& registries) {
    const Connection& conn = connection(connection_alias);
    std::vector<const credentials::VerifiableCredential*> vcs;
    vcs.reserve(cids.size());
    for (const auto& cid : cids) {
        vcs.push_back(&credential(cid));
    }
    return credentials::create_vp(did_of(connection_alias), keys_of(connection_alias), vcs,
                                  disclosed_claim_names, conn.their_doc.did, expires_at,
                                  registries);
}

std::map<std::string, identity::DidDocument> Wallet::known_docs() const {
    std::map<std::string, identity::DidDocument> docs;
    for (const auto& [alias, entry] : dids) {
        docs[entry.first.id_string] = entry.second;
    }
    for (const auto& [alias, conn] : connections) {
        docs[conn.their_doc.did.id_string] = conn.their_doc;
    }
    return docs;
}

Json Wallet::backup_payload() const {
    Json creds_json = Json::array();
    for (const auto& [cid, vc] : creds) {
        creds_json.push_back(vc.to_json(true));
    }
    const auto& self = dids.at(std::string(kSelfAlias));
    return Json{
        {"owner", owner},
        {"self_doc", self.second.to_json()},
        {"self_seed", b58(keys.at(self.first.id_string).private_key)},
        {"credentials", creds_json},
        {"backup_seq", backup_seq},
    };
}

void Wallet::restore_from_backup(const Json& payload) {
    auto doc = identity::DidDocument::from_json(payload.at("self_doc"));
    crypto::Key32 seed = from_b58_array<crypto::kKeyBytes>(payload.at("self_seed"));
    dids[std::string(kSelfAlias)] = {doc.did, doc};
    keys[doc.did.id_string] = crypto::keypair_from_seed(seed);
    for (const auto& vc_json : payload.at("credentials")) {
        store_credential(credentials::VerifiableCredential::from_json(vc_json));
    }
    backup_seq = payload.at("backup_seq").get<uint64_t>();
    backup_opted_in = true;
    connections.clear();
}

Json Wallet::to_state_json() const {
    Json keys_json = Json::object();
    for (const auto& [did_id, kp] : keys) {
        keys_json[did_id] = b58(kp.private_key);
    }
    Json dids_json = Json::object();
    for (const auto& [alias, entry] : dids) {
        dids_json[alias] = entry.second.to_json();
    }
    Json conns_json = Json::object();
    for (const auto& [alias, conn] : connections) {
        conns_json[alias] = conn.to_json();
    }
    Json creds_json = Json::object();
    for (const auto& [cid, vc] : creds) {
        creds_json[cid] = vc.to_json(true);
    }
    Json shares_json = Json::object();
    for (const auto& [patient, share] : held_recovery_shares) {
        shares_json[patient] = b58(share);
    }
    Json j{
        {"owner", owner},
        {"keys", keys_json},
        {"dids", dids_json},
        {"connections", conns_json},
        {"credentials", creds_json},
        {"channels", channels},
        {"backup_opted_in", backup_opted_in},
        {"backup_seq", backup_seq},
        {"held_shares", shares_json},
    };
    j["certificate"] = certificate ? certificate->to_json() : Json(nullptr);
    j["role"] = role ? Json(std::string(ledger::role_name(*role))) : Json(nullptr);
    j["backup_seed"] = backup_keys ? Json(b58(backup_keys->private_key)) : Json(nullptr);
    j["registry_id"] = registry_id ? Json(b58(*registry_id)) : Json(nullptr);
    return j;
}

Wallet Wallet::from_state_json(const Json& j) {
    Wallet w;
    w.owner = j.at("owner").get<std::string>();
    for (const auto& [did_id, seed] : j.at("keys").items()) {
        w.keys[did_id] = crypto::keypair_from_seed(
            from_b58_array<crypto::kKeyBytes>(seed.get<std::string>()));
    }
    for (const auto& [alias, doc_json] : j.at("dids").items()) {
        auto doc = identity::DidDocument::from_json(doc_json);
        w.dids[alias] = {doc.did, doc};
    }
    for (const auto& [alias, conn_json] : j.at("connections").items()) {
        w.connections[alias] = Connection::from_json(conn_json);
    }
    for (const auto& [cid, vc_json] : j.at("credentials").items()) {
        w.creds[cid] = credentials::VerifiableCredential::from_json(vc_json);
    }
    w.channels = j.at("channels").get<std::vector<std::string>>();
    w.backup_opted_in = j.at("backup_opted_in").get<bool>();
    w.backup_seq = j.at("backup_seq").get<uint64_t>();
    for (const auto& [patient, share] : j.at("held_shares").items()) {
        w.held_recovery_shares[patient] =
            from_b58_array<crypto::kKeyBytes>(share.get<std::string>());
    }
    if (!j.at("certificate").is_null()) {
        w.certificate = ledger::Certificate::from_json(j.at("certificate"));
    }
    if (!j.at("role").is_null()) {
        w.role = ledger::role_from_name(j.at("role").get<std::string>());
    }
    if (!j.at("backup_seed").is_null()) {
        w.backup_keys = crypto::keypair_from_seed(
            from_b58_array<crypto::kKeyBytes>(j.at("backup_seed").get<std::string>()));
    }
    if (!j.at("registry_id").is_null()) {
        w.registry_id = from_b58_array<16>(j.at("registry_id").get<std::string>());
    }
    return w;
}

Bytes Wallet::save(std::string_view passphrase) const {
    ByteArray<16> salt = crypto::random_array<16>();
    crypto::Key32 store_key = crypto::derive_store_key(passphrase, salt);
    crypto::AeadCiphertext ct = crypto::aead_encrypt(
        store_key, as_span(canonical_text(to_state_json())), as_span(kFileMagic));

    Bytes file;
    file.reserve(kFileMagic.size() + salt.size() + ct.nonce.size() + ct.tag.size() +
                 ct.body.size());
    file.insert(file.end(), kFileMagic.begin(), kFileMagic.end());
    file.insert(file.end(), salt.begin(), salt.end());
    file.insert(file.end(), ct.nonce.begin(), ct.nonce.end());
    file.insert(file.end(), ct.tag.begin(), ct.tag.end());
    file.insert(file.end(), ct.body.begin(), ct.body.end());
    return file;
}

std::pair<uint64_t, crypto::Digest> backup_wallet(Wallet& wallet, Mediator& mediator,
                                                  ledger::Ledger& ledger, uint64_t now) {
    if (!wallet.backup_opted_in || !wallet.backup_keys) {
        raise(Errc::NotFound, "wallet has not opted into backups");
    }
    uint64_t seq = wallet.backup_seq + 1;
    Json payload = wallet.backup_payload();
    payload["backup_seq"] = seq;

    crypto::HybridCiphertext hc = crypto::hybrid_encrypt(
        wallet.backup_keys->public_key, as_span(canonical_text(payload)), as_span(kBackupAad));
    std::string ciphertext = canonical_text(wire::hybrid_to_json(hc));
    crypto::Digest digest = crypto::hash(ciphertext);

    const std::string patient = wallet.anywise_did().id_string;
    ledger.anchor_backup_hash(patient, digest, seq, now);  // anchor first; throw aborts upload
    mediator.store_backup(patient, seq, std::move(ciphertext));
    wallet.backup_seq = seq;
    return {seq, digest};
}

void restore_wallet_from_backup(Wallet& wallet, const std::string& patient_did,
                                uint64_t sequence_no, const crypto::Key32& backup_seed,
                                Mediator& mediator, const ledger::Ledger& ledger,
                                const std::string& reader_did, uint64_t now) {
    std::string ciphertext = mediator.fetch_backup(patient_did, sequence_no, patient_did, now);
    crypto::Digest anchored = ledger.backup_hash(reader_did, patient_did, sequence_no);
    if (crypto::hash(ciphertext) != anchored) {
        raise(Errc::DigestMismatch, "backup ciphertext does not match the anchored hash");
    }
    wallet.restore_from_backup(open_backup(ciphertext, backup_seed));
    wallet.backup_keys = crypto::keypair_from_seed(backup_seed);
}

Json open_backup(const std::string& ciphertext, const crypto::Key32& backup_seed) {
    crypto::HybridCiphertext hc = wire::hybrid_from_json(Json::parse(ciphertext));
    Bytes plain = crypto::hybrid_decrypt(backup_seed, hc, as_span(kBackupAad));
    return Json::parse(to_string(as_span(plain)));
}

Wallet Wallet::load(std::span<const uint8_t> file, std::string_view passphrase) {
    constexpr size_t header = 5 + 16 + crypto::kNonceBytes + crypto::kTagBytes;
    if (file.size() < header ||
        std::string_view(reinterpret_cast<const char*>(file.data()), 5) != kFileMagic) {
        raise(Errc::MalformedPayload, "not a wallet file");
    }
    size_t off = 5;
    ByteArray<16> salt{};
    std::copy_n(file.begin() + off, salt.size(), salt.begin());
    off += salt.size();

    crypto::AeadCiphertext ct;
    std::copy_n(file.begin() + off, ct.nonce.size(), ct.nonce.begin());
    off += ct.nonce.size();
    std::copy_n(file.begin() + off, ct.tag.size(), ct.tag.begin());
    off += ct.tag.size();
    ct.body.assign(file.begin() + off, file.end());

    crypto::Key32 store_key = crypto::derive_store_key(passphrase, salt);
    Bytes plain = crypto::aead_decrypt(store_key, ct, as_span(kFileMagic));
    return from_state_json(Json::parse(to_string(as_span(plain))));
}

}  // namespace ssi::agents
