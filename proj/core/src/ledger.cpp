#include "ssi/ledger.hpp"

#include <algorithm>

#include "ssi/errors.hpp"

namespace ssi::ledger {

namespace {

constexpr std::string_view kOpPut = "put";

std::string did_key(const std::string& id_string) {
    return "did:" + id_string;
}

std::string backup_key(const std::string& patient_did, uint64_t seq) {
    return "backup:" + patient_did + ":" + std::to_string(seq);
}

std::string backup_seq_key(const std::string& patient_did) {
    return "backupseq:" + patient_did;
}

std::string registry_key(const revocation::RegistryId& id, const std::string& suffix) {
    return "reg:" + b58(id) + ":" + suffix;
}

}  // namespace

std::string_view role_name(Role r) {
    switch (r) {
        case Role::Patient: return "Patient";
        case Role::Practitioner: return "Practitioner";
        case Role::Laboratory: return "Laboratory";
        case Role::Admin: return "Admin";
    }
    return "Patient";
}

std::optional<Role> role_from_name(std::string_view name) {
    if (name == "Patient") return Role::Patient;
    if (name == "Practitioner") return Role::Practitioner;
    if (name == "Laboratory") return Role::Laboratory;
    if (name == "Admin") return Role::Admin;
    return std::nullopt;
}

Party party_of(Role r) {
    switch (r) {
        case Role::Patient: return Party::Patient;
        case Role::Practitioner: return Party::Practitioner;
        case Role::Laboratory: return Party::Laboratory;
        case Role::Admin: return Party::Admin;
    }
    return Party::Patient;
}

bool party_may(Party p, std::string_view channel_id, Access access) {
    const bool is_user_role = p != Party::Msp;
    if (channel_id == kChannelDids) {
        return access == Access::Read ? true : is_user_role;
    }
    if (channel_id == kChannelBackups) {
        return access == Access::Read ? p == Party::Msp : p == Party::Patient;
    }
    if (channel_id == kChannelRegistries) {
        return access == Access::Read
                   ? true
                   : (p == Party::Practitioner || p == Party::Laboratory);
    }
    if (channel_id == kChannelSecurity) {
        return access == Access::Read ? p == Party::Admin : p == Party::Msp;
    }
    return false;
}

std::vector<std::string> channels_for_role(Role r) {
    switch (r) {
        case Role::Patient:
            return {std::string(kChannelDids), std::string(kChannelBackups),
                    std::string(kChannelRegistries)};
        case Role::Practitioner:
        case Role::Laboratory:
            return {std::string(kChannelDids), std::string(kChannelRegistries)};
        case Role::Admin:
            return {std::string(kChannelDids), std::string(kChannelRegistries),
                    std::string(kChannelSecurity)};
    }
    return {};
}

Bytes Certificate::signing_bytes() const {
    Json j{
        {"subject", subject_did.id_string},
        {"public_key", b58(subject_public_key)},
        {"role", std::string(role_name(role))},
        {"issued_at", issued_at},
        {"expires_at", expires_at},
    };
    return canonical_bytes(j);
}

Json Certificate::to_json() const {
    Json j{
        {"subject", subject_did.to_json()},
        {"public_key", b58(subject_public_key)},
        {"role", std::string(role_name(role))},
        {"issued_at", issued_at},
        {"expires_at", expires_at},
        {"ca_signature", b58(ca_signature)},
    };
    return j;
}

Certificate Certificate::from_json(const Json& j) {
    Certificate cert;
    cert.subject_did = identity::Did::from_json(j.at("subject"));
    cert.subject_public_key = from_b58_array<crypto::kKeyBytes>(j.at("public_key"));
    auto role = role_from_name(j.at("role").get<std::string>());
    if (!role) {
        raise(Errc::MalformedPayload, "unknown certificate role");
    }
    cert.role = *role;
    cert.issued_at = j.at("issued_at").get<uint64_t>();
    cert.expires_at = j.at("expires_at").get<uint64_t>();
    cert.ca_signature = from_b58_array<crypto::kSignatureBytes>(j.at("ca_signature"));
    return cert;
}

Bytes CertificateSigningRequest::signing_bytes() const {
    Json j{
        {"subject", subject_did.id_string},
        {"public_key", b58(public_key)},
        {"role_claim", std::string(role_name(role_claim))},
    };
    return canonical_bytes(j);
}

CertificateSigningRequest make_csr(const identity::Did& did, const identity::DidDocument& doc,
                                   const crypto::KeyPair& keys, Role role_claim) {
    CertificateSigningRequest csr;
    csr.subject_did = did;
    csr.document = doc;
    csr.public_key = keys.public_key;
    csr.role_claim = role_claim;
    csr.applicant_signature = crypto::sign(keys.private_key, as_span(csr.signing_bytes()));
    return csr;
}

Json Transaction::to_json() const {
    return Json{
        {"tx_id", tx_id.to_b58()},
        {"submitter", submitter_did},
        {"channel", channel_id},
        {"op", op_name},
        {"payload", payload},
        {"height", block_height},
        {"timestamp", timestamp},
    };
}

std::string_view outcome_name(EmergencyRecord::Outcome o) {
    switch (o) {
        case EmergencyRecord::Outcome::KeyReleased: return "KeyReleased";
        case EmergencyRecord::Outcome::ContactListReleased: return "ContactListReleased";
        case EmergencyRecord::Outcome::Denied: return "Denied";
    }
    return "Denied";
}

Json EmergencyRecord::to_json() const {
    return Json{
        {"patient", patient_did},
        {"requester", requester_did},
        {"msp", msp_id},
        {"contact_ack", contact_ack},
        {"triggered_at", triggered_at},
        {"outcome", std::string(outcome_name(outcome))},
    };
}

EmergencyRecord EmergencyRecord::from_json(const Json& j) {
    EmergencyRecord rec;
    rec.patient_did = j.at("patient").get<std::string>();
    rec.requester_did = j.at("requester").get<std::string>();
    rec.msp_id = j.at("msp").get<std::string>();
    rec.contact_ack = j.at("contact_ack").get<std::string>();
    rec.triggered_at = j.at("triggered_at").get<uint64_t>();
    std::string name = j.at("outcome").get<std::string>();
    if (name == "KeyReleased") {
        rec.outcome = Outcome::KeyReleased;
    } else if (name == "ContactListReleased") {
        rec.outcome = Outcome::ContactListReleased;
    } else {
        rec.outcome = Outcome::Denied;
    }
    return rec;
}

Ledger::Ledger() {
    for (auto id : {kChannelDids, kChannelBackups, kChannelRegistries, kChannelSecurity}) {
        channels_.emplace(std::string(id), Channel{std::string(id), {}, {}});
    }
}

void Ledger::register_member(const std::string& did_id, Party party) {
    members_[did_id] = party;
}

std::optional<Party> Ledger::member_party(const std::string& did_id) const {
    auto it = members_.find(did_id);
    if (it == members_.end()) {
        return std::nullopt;
    }
    return it->second;
}

Channel& Ledger::channel_mut(std::string_view channel_id) {
    auto it = channels_.find(std::string(channel_id));
    if (it == channels_.end()) {
        raise(Errc::UnauthorizedChannel, "unknown channel " + std::string(channel_id));
    }
    return it->second;
}

const Channel& Ledger::channel(std::string_view channel_id) const {
    auto it = channels_.find(std::string(channel_id));
    if (it == channels_.end()) {
        raise(Errc::UnauthorizedChannel, "unknown channel " + std::string(channel_id));
    }
    return it->second;
}

void Ledger::check_access(const std::string& did_id, std::string_view channel_id,
                          Access access) const {
    auto party = member_party(did_id);
    if (!party || !party_may(*party, channel_id, access)) {
        raise(Errc::UnauthorizedChannel,
              did_id + " may not " + (access == Access::Read ? "read" : "write") + " channel " +
                  std::string(channel_id));
    }
}

Transaction Ledger::submit_tx(const std::string& submitter_did, const std::string& channel_id,
                              const std::string& op_name, const Json& payload, uint64_t now) {
    check_access(submitter_did, channel_id, Access::Write);
    Channel& ch = channel_mut(channel_id);

    Transaction tx;
    tx.submitter_did = submitter_did;
    tx.channel_id = channel_id;
    tx.op_name = op_name;
    tx.payload = canonical_text(payload);
    tx.block_height = height_++;
    tx.timestamp = now;
    tx.tx_id = crypto::hash(canonical_text(Json{{"channel", channel_id},
                                                {"height", tx.block_height},
                                                {"op", op_name},
                                                {"payload", tx.payload},
                                                {"submitter", submitter_did},
                                                {"timestamp", now}}));

    for (const auto& entry : payload.at("entries")) {
        ch.state[entry.at("key").get<std::string>()] = entry.at("value").get<std::string>();
    }
    ch.tx_log.push_back(tx);
    return tx;
}

std::string Ledger::query(const std::string& caller_did, const std::string& channel_id,
                          const std::string& key) const {
    check_access(caller_did, channel_id, Access::Read);
    const Channel& ch = channel(channel_id);
    auto it = ch.state.find(key);
    if (it == ch.state.end()) {
        raise(Errc::UnknownKey, "no value for key " + key);
    }
    return it->second;
}

Transaction Ledger::put_did(const std::string& submitter_did, const identity::Did& did,
                            const identity::DidDocument& doc, uint64_t now) {
    if (did.kind != identity::DidKind::Anywise) {
        raise(Errc::PairwiseDidRejected, "only anywise dids are registered on the ledger");
    }
    if (!identity::check_binding(did, doc)) {
        raise(Errc::IntegrityMismatch, "document does not hash to did");
    }
    if (submitter_did != did.id_string) {
        raise(Errc::Unauthorized, "dids are registered by their own controller");
    }
    const Channel& ch = channel(kChannelDids);
    if (ch.state.contains(did_key(did.id_string))) {
        raise(Errc::DuplicateDid, "did already registered: " + did.id_string);
    }
    Json payload{{"entries",
                  Json::array({Json{{"key", did_key(did.id_string)},
                                    {"value", canonical_text(doc.to_json())}}})}};
    return submit_tx(submitter_did, std::string(kChannelDids), "put_did", payload, now);
}

identity::DidDocument Ledger::get_did(const identity::Did& did) const {
    if (did.kind == identity::DidKind::Pairwise) {
        raise(Errc::NotFound, "pairwise dids are never on the ledger");
    }
    return get_did(did.id_string);
}

identity::DidDocument Ledger::get_did(const std::string& id_string) const {
    const Channel& ch = channel(kChannelDids);
    auto it = ch.state.find(did_key(id_string));
    if (it == ch.state.end()) {
        raise(Errc::NotFound, "did not registered: " + id_string);
    }
    auto doc = identity::DidDocument::from_json(Json::parse(it->second));
    if (identity::derive_id(doc) != id_string) {
        raise(Errc::IntegrityMismatch, "stored document does not hash to did");
    }
    return doc;
}

bool Ledger::has_did(const std::string& id_string) const {
    return channel(kChannelDids).state.contains(did_key(id_string));
}

Transaction Ledger::anchor_backup_hash(const std::string& submitter_did,
                                       const crypto::Digest& digest, uint64_t sequence_no,
                                       uint64_t now) {
    const Channel& ch = channel(kChannelBackups);
    auto it = ch.state.find(backup_seq_key(submitter_did));
    uint64_t last = it == ch.state.end() ? 0 : std::stoull(it->second);
    if (sequence_no <= last) {
        raise(Errc::NonMonotoneSequence, "backup sequence must increase");
    }
    Json payload{{"entries",
                  Json::array({
                      Json{{"key", backup_key(submitter_did, sequence_no)},
                           {"value", digest.to_b58()}},
                      Json{{"key", backup_seq_key(submitter_did)},
                           {"value", std::to_string(sequence_no)}},
                  })}};
    return submit_tx(submitter_did, std::string(kChannelBackups), "anchor_backup", payload, now);
}

crypto::Digest Ledger::backup_hash(const std::string& caller_did, const std::string& patient_did,
                                   uint64_t sequence_no) const {
    std::string value = query(caller_did, std::string(kChannelBackups),
                              backup_key(patient_did, sequence_no));
    crypto::Digest d;
    d.bytes = from_b58_array<crypto::kDigestBytes>(value);
    return d;
}

Transaction Ledger::anchor_registry_state(const std::string& submitter_did,
                                          const revocation::RegistryState& state, uint64_t now) {
    const Channel& ch = channel(kChannelRegistries);
    auto owner_it = ch.state.find(registry_key(state.registry_id, "owner"));
    if (owner_it == ch.state.end()) {
        if (state.epoch != 0) {
            raise(Errc::EpochGap, "first anchored state must be epoch 0");
        }
    } else {
        if (owner_it->second != submitter_did) {
            raise(Errc::WrongIssuer, "registry is owned by " + owner_it->second);
        }
        auto latest = latest_registry_state(state.registry_id);
        if (!latest || state.epoch != latest->epoch + 1) {
            raise(Errc::EpochGap, "expected epoch " +
                                      std::to_string(latest ? latest->epoch + 1 : 0) + ", got " +
                                      std::to_string(state.epoch));
        }
    }

    // The state must be signed by the submitter's ledger-registered key.
    identity::DidDocument issuer_doc = [&] {
        try {
            return get_did(submitter_did);
        } catch (const Error&) {
            raise(Errc::WrongIssuer, "issuer did not registered on ledger");
        }
    }();
    if (!revocation::verify_state_signature(state, issuer_doc.verification_key)) {
        raise(Errc::WrongIssuer, "state signature does not verify against issuer key");
    }

    std::string state_text = canonical_text(state.to_json());
    Json payload{{"entries",
                  Json::array({
                      Json{{"key", registry_key(state.registry_id, std::to_string(state.epoch))},
                           {"value", state_text}},
                      Json{{"key", registry_key(state.registry_id, "latest")},
                           {"value", state_text}},
                      Json{{"key", registry_key(state.registry_id, "owner")},
                           {"value", submitter_did}},
                  })}};
    return submit_tx(submitter_did, std::string(kChannelRegistries), "anchor_registry", payload,
                     now);
}

std::optional<revocation::RegistryState> Ledger::latest_registry_state(
    const revocation::RegistryId& registry_id) const {
    const Channel& ch = channel(kChannelRegistries);
    auto it = ch.state.find(registry_key(registry_id, "latest"));
    if (it == ch.state.end()) {
        return std::nullopt;
    }
    return revocation::RegistryState::from_json(Json::parse(it->second));
}

std::optional<revocation::RegistryState> Ledger::registry_state_at(
    const revocation::RegistryId& registry_id, uint64_t epoch) const {
    const Channel& ch = channel(kChannelRegistries);
    auto it = ch.state.find(registry_key(registry_id, std::to_string(epoch)));
    if (it == ch.state.end()) {
        return std::nullopt;
    }
    return revocation::RegistryState::from_json(Json::parse(it->second));
}

Transaction Ledger::record_emergency_access(const std::string& submitter_did,
                                            const EmergencyRecord& record, uint64_t now) {
    auto party = member_party(submitter_did);
    if (!party || *party != Party::Msp) {
        raise(Errc::Unauthorized, "emergency records are written by the MSP");
    }
    Json payload{{"entries",
                  Json::array({Json{{"key", "emg:" + std::to_string(height_)},
                                    {"value", canonical_text(record.to_json())}}})}};
    return submit_tx(submitter_did, std::string(kChannelSecurity), "emergency_record", payload,
                     now);
}

std::vector<EmergencyRecord> Ledger::emergency_records(const std::string& caller_did) const {
    check_access(caller_did, kChannelSecurity, Access::Read);
    std::vector<EmergencyRecord> records;
    for (const auto& tx : channel(kChannelSecurity).tx_log) {
        if (tx.op_name != "emergency_record") {
            continue;
        }
        Json payload = Json::parse(tx.payload);
        for (const auto& entry : payload.at("entries")) {
            records.push_back(
                EmergencyRecord::from_json(Json::parse(entry.at("value").get<std::string>())));
        }
    }
    return records;
}

std::map<std::string, std::string> Ledger::replay_state(std::string_view channel_id) const {
    std::map<std::string, std::string> state;
    for (const auto& tx : channel(channel_id).tx_log) {
        Json payload = Json::parse(tx.payload);
        for (const auto& entry : payload.at("entries")) {
            state[entry.at("key").get<std::string>()] = entry.at("value").get<std::string>();
        }
    }
    return state;
}

Json Ledger::export_snapshot() const {
    Json channels = Json::object();
    for (const auto& [id, ch] : channels_) {
        Json txs = Json::array();
        for (const auto& tx : ch.tx_log) {
            txs.push_back(tx.to_json());
        }
        Json state = Json::object();
        for (const auto& [k, v] : ch.state) {
            state[k] = v;
        }
        channels[id] = Json{{"tx_log", txs}, {"state", state}};
    }
    Json members = Json::object();
    for (const auto& [did, party] : members_) {
        members[did] = static_cast<int>(party);
    }
    return Json{{"channels", channels}, {"members", members}, {"height", height_}};
}

Ledger Ledger::import_snapshot(const Json& snapshot) {
    Ledger ledger;
    ledger.height_ = snapshot.at("height").get<uint64_t>();
    for (const auto& [did, party] : snapshot.at("members").items()) {
        ledger.members_[did] = static_cast<Party>(party.get<int>());
    }
    for (const auto& [id, ch_json] : snapshot.at("channels").items()) {
        Channel& ch = ledger.channel_mut(id);
        for (const auto& tx_json : ch_json.at("tx_log")) {
            Transaction tx;
            tx.tx_id.bytes = from_b58_array<crypto::kDigestBytes>(tx_json.at("tx_id"));
            tx.submitter_did = tx_json.at("submitter").get<std::string>();
            tx.channel_id = tx_json.at("channel").get<std::string>();
            tx.op_name = tx_json.at("op").get<std::string>();
            tx.payload = tx_json.at("payload").get<std::string>();
            tx.block_height = tx_json.at("height").get<uint64_t>();
            tx.timestamp = tx_json.at("timestamp").get<uint64_t>();
            ch.tx_log.push_back(tx);
        }
        ch.state = ledger.replay_state(id);
    }
    return ledger;
}

Certificate CertificateAuthority::issue_certificate(const CertificateSigningRequest& csr,
                                                    const std::string& identity_ref, uint64_t now,
                                                    uint64_t validity_ticks) {
    if (csr.subject_did.kind != identity::DidKind::Anywise) {
        raise(Errc::PairwiseDidRejected, "certificates bind anywise dids only");
    }
    if (!crypto::verify(csr.public_key, as_span(csr.signing_bytes()), csr.applicant_signature)) {
        raise(Errc::SignatureMismatch, "csr signature does not match the enclosed key");
    }
    if (!identity::check_binding(csr.subject_did, csr.document) ||
        csr.document.verification_key != csr.public_key) {
        raise(Errc::DidKeyMismatch, "csr key does not match the did document");
    }

    Certificate cert;
    cert.subject_did = csr.subject_did;
    cert.subject_public_key = csr.public_key;
    cert.role = csr.role_claim;
    cert.issued_at = now;
    cert.expires_at = now + validity_ticks;
    cert.ca_signature = crypto::sign(keys_.private_key, as_span(cert.signing_bytes()));

    ref_to_did_[identity_ref] = csr.subject_did.id_string;
    did_to_ref_[csr.subject_did.id_string] = identity_ref;
    return cert;
}

std::optional<std::string> CertificateAuthority::did_for_identity(
    const std::string& identity_ref) const {
    auto it = ref_to_did_.find(identity_ref);
    if (it == ref_to_did_.end()) {
        return std::nullopt;
    }
    return it->second;
}

std::optional<std::string> CertificateAuthority::identity_for_did(const std::string& did_id) const {
    auto it = did_to_ref_.find(did_id);
    if (it == did_to_ref_.end()) {
        return std::nullopt;
    }
    return it->second;
}

Bytes EmergencyVoucher::signing_bytes() const {
    Json j{{"patient", patient_did}, {"doctor", doctor_did}, {"sequence", sequence_no}};
    return canonical_bytes(j);
}

MembershipService::MembershipService(std::string endpoint) : keys_(crypto::generate_keypair()) {
    auto [did, doc] = identity::create_did(identity::DidKind::Anywise, keys_, endpoint, 0);
    did_ = did;
    doc_ = doc;
}

MembershipService::Authorization MembershipService::authorize(const Certificate& cert,
                                                              const crypto::Key32& ca_public_key,
                                                              uint64_t now, Ledger& ledger) const {
    if (!crypto::verify(ca_public_key, as_span(cert.signing_bytes()), cert.ca_signature)) {
        raise(Errc::InvalidCertificate, "certificate signature does not verify");
    }
    if (now >= cert.expires_at) {
        raise(Errc::ExpiredCertificate, "certificate has expired");
    }
    ledger.register_member(cert.subject_did.id_string, party_of(cert.role));
    return Authorization{cert.role, channels_for_role(cert.role)};
}

void MembershipService::register_recovery(const std::string& patient_did,
                                          const crypto::Key32& share_msp,
                                          std::vector<identity::Did> contacts,
                                          BackupLocation backup) {
    PatientVault& vault = vaults_[patient_did];
    vault.share_msp = share_msp;
    vault.contacts = std::move(contacts);
    vault.list_shareable = true;
    vault.backup = std::move(backup);
}

void MembershipService::share_contact_list(const std::string& patient_did,
                                           std::vector<identity::Did> contacts) {
    PatientVault& vault = vaults_[patient_did];
    vault.contacts = std::move(contacts);
    vault.list_shareable = true;
}

const MembershipService::PatientVault* MembershipService::vault(
    const std::string& patient_did) const {
    auto it = vaults_.find(patient_did);
    return it == vaults_.end() ? nullptr : &it->second;
}

ByteArray<16> MembershipService::begin_recovery(const std::string& identity_ref) {
    ByteArray<16> nonce = crypto::random_array<16>();
    recovery_nonces_[identity_ref] = nonce;
    return nonce;
}

MembershipService::RecoveryRelease MembershipService::complete_recovery(
    const std::string& identity_ref, const crypto::Key32& new_public_key,
    const crypto::Signature& nonce_signature, const CertificateAuthority& ca) {
    auto nonce_it = recovery_nonces_.find(identity_ref);
    if (nonce_it == recovery_nonces_.end()) {
        raise(Errc::ChallengeFailure, "no recovery challenge outstanding");
    }
    if (!crypto::verify(new_public_key, as_span(nonce_it->second), nonce_signature)) {
        raise(Errc::ChallengeFailure, "recovery nonce signature does not verify");
    }
    auto did = ca.did_for_identity(identity_ref);
    if (!did) {
        raise(Errc::NotFound, "no identity match on record for " + identity_ref);
    }
    auto vault_it = vaults_.find(*did);
    if (vault_it == vaults_.end() || !vault_it->second.share_msp || !vault_it->second.backup) {
        raise(Errc::MissingShare, "no recovery material on record");
    }
    recovery_nonces_.erase(nonce_it);
    return RecoveryRelease{*vault_it->second.share_msp, vault_it->second.contacts,
                           *vault_it->second.backup};
}

EmergencyVoucher MembershipService::issue_emergency_voucher(const std::string& patient_did,
                                                            const std::string& doctor_did,
                                                            uint64_t sequence_no) {
    EmergencyVoucher voucher;
    voucher.patient_did = patient_did;
    voucher.doctor_did = doctor_did;
    voucher.sequence_no = sequence_no;
    voucher.msp_signature = crypto::sign(keys_.private_key, as_span(voucher.signing_bytes()));
    return voucher;
}

bool MembershipService::verify_emergency_voucher(const EmergencyVoucher& voucher,
                                                 const crypto::Key32& msp_public_key) {
    return crypto::verify(msp_public_key, as_span(voucher.signing_bytes()), voucher.msp_signature);
}

}  // namespace ssi::ledger
