#include "ssi/flows.hpp"

#include <algorithm>

#include "ssi/errors.hpp"

namespace ssi::flows {

namespace {

constexpr uint64_t kContactPingTimeout = 1;  // ticks per unanswered ping

std::string self_alias() {
    return std::string(agents::Wallet::kSelfAlias);
}

std::string join(const std::vector<std::string>& parts) {
    std::string out;
    for (const auto& p : parts) {
        if (!out.empty()) {
            out += ",";
        }
        out += p;
    }
    return out.empty() ? "none" : out;
}

struct Runner {
    FlowOutcome out;

    explicit Runner(std::string name) { out.flow_name = std::move(name); }

    void step(std::string actor, std::string action, std::string result) {
        out.steps.push_back({std::move(actor), std::move(action), std::move(result)});
    }

    FlowOutcome done() {
        out.success = true;
        return std::move(out);
    }

    FlowOutcome fail(const Error& e) {
        out.success = false;
        out.error = std::string(errc_name(e.code()));
        out.steps.push_back({"flow", "abort", e.what()});
        return std::move(out);
    }
};

void remove_alias(agents::Wallet& wallet, const std::string& alias) {
    auto it = wallet.dids.find(alias);
    if (it != wallet.dids.end()) {
        wallet.keys.erase(it->second.first.id_string);
        wallet.dids.erase(it);
    }
    wallet.connections.erase(alias);
}

Bytes challenge_bytes(const ByteArray<16>& nonce, const std::string& pairwise_id) {
    return concat(nonce, as_span(pairwise_id));
}

/// Credentials in the wallet carrying at least one of the requested claims.
std::vector<revocation::Cid> credentials_with_claims(const agents::Wallet& wallet,
                                                     const std::vector<std::string>& names) {
    std::vector<revocation::Cid> cids;
    for (const auto& [key, vc] : wallet.creds) {
        bool matches = std::any_of(names.begin(), names.end(), [&vc](const std::string& n) {
            return vc.find_claim(n).has_value();
        });
        if (matches) {
            cids.push_back(vc.cid);
        }
    }
    return cids;
}

void ensure_issuer_registry(World& world, agents::Wallet& issuer, Runner& r) {
    if (issuer.registry_id) {
        return;
    }
    auto [registry, genesis] =
        revocation::init_registry(issuer.anywise_did(), issuer.keys_of(self_alias()));
    world.ledger.anchor_registry_state(issuer.anywise_did().id_string, genesis,
                                       world.clock.now());
    issuer.registry_id = registry.registry_id;
    r.step(issuer.owner, "init_registry", b58(registry.registry_id));
    world.registries.emplace(registry.registry_id, std::move(registry));
}

void transfer_credential(World& world, agents::Wallet& issuer, agents::Wallet& subject,
                         const std::string& issuer_conn_alias,
                         const credentials::VerifiableCredential& vc, Runner& r) {
    Json offer{{"type", "vc-offer"}, {"vc", vc.to_json(true)}};
    world.mediator.deliver(issuer.pack_envelope(issuer_conn_alias, offer));
    const std::string subject_pairwise = subject.did_of(issuer.owner).id_string;
    auto envelopes = world.mediator.pickup(subject_pairwise, 1);
    if (envelopes.empty()) {
        raise(Errc::NotFound, "credential offer was not queued");
    }
    Json message = subject.unpack_envelope(envelopes.front(), world.mediator.doc());
    subject.store_credential(credentials::VerifiableCredential::from_json(message.at("vc")));
    r.step(subject.owner, "store_vc", b58(vc.cid));
}

}  // namespace

TrustedContactSet trusted_contacts(const World& world, const std::string& patient_did) {
    TrustedContactSet set;
    set.patient_did = patient_did;
    if (const auto* vault = world.msp.vault(patient_did)) {
        set.contacts = vault->contacts;
        set.registered_with_msp = true;
    }
    return set;
}

Json FlowOutcome::to_json() const {
    Json steps_json = Json::array();
    for (const auto& s : steps) {
        steps_json.push_back(s.to_json());
    }
    Json j{
        {"flow", flow_name},
        {"success", success},
        {"error", error},
        {"steps", steps_json},
    };
    j["report"] = report ? report->to_json() : Json(nullptr);
    j["cid"] = cid ? Json(b58(*cid)) : Json(nullptr);
    j["vp_id"] = vp_id ? Json(*vp_id) : Json(nullptr);
    j["emergency_outcome"] =
        emergency_outcome ? Json(std::string(ledger::outcome_name(*emergency_outcome)))
                          : Json(nullptr);
    return j;
}

FlowOutcome flow_onboard(World& world, const std::string& actor, ledger::Role role) {
    Runner r("onboard");
    try {
        auto [it, created] = world.wallets.try_emplace(actor, agents::Wallet(actor));
        agents::Wallet& wallet = it->second;
        const uint64_t now = world.clock.now();

        identity::Did did;
        identity::DidDocument doc;
        if (wallet.dids.contains(self_alias())) {
            did = wallet.did_of(self_alias());
            doc = wallet.doc_of(self_alias());
            r.step(actor, "create_did", "reusing " + did.id_string);
        } else {
            std::tie(did, doc) = wallet.create_did(identity::DidKind::Anywise, self_alias(),
                                                   world.mediator.endpoint(), now);
            r.step(actor, "create_did", did.id_string);
        }

        auto csr = ledger::make_csr(did, doc, wallet.keys_of(self_alias()), role);
        auto cert = world.ca.issue_certificate(csr, actor, now);
        wallet.certificate = cert;
        r.step("ca", "issue_certificate", std::string(ledger::role_name(role)));

        auto auth = world.msp.authorize(cert, world.ca.root_public_key(), now, world.ledger);
        wallet.role = auth.role;
        wallet.channels = auth.channels;
        r.step("msp", "authorize", "channels " + join(auth.channels));

        auto tx = world.ledger.put_did(did.id_string, did, doc, now);
        r.step(actor, "register_did", tx.tx_id.to_b58());
        return r.done();
    } catch (const Error& e) {
        return r.fail(e);
    }
}

AcceptedConnection accept_connection_request(World& world, agents::Wallet& inviter,
                                             const agents::Envelope& env) {
    auto [message, sender_doc] = inviter.unpack_first_contact(env);
    if (message.value("type", "") != "connection-request") {
        raise(Errc::MalformedPayload, "expected a connection request");
    }
    ByteArray<16> nonce = from_b58_array<16>(message.at("nonce_b58"));
    auto alias = inviter.pending_invitation_alias(nonce);
    if (!alias) {
        raise(Errc::ChallengeFailure, "no invitation outstanding for this nonce");
    }

    // Mandatory leg: the responder proves control of its ledger-registered
    // anywise identity before any connection state is kept.
    auto anywise_did = identity::Did::from_json(message.at("anywise").at("did"));
    identity::DidDocument anywise_doc = world.ledger.get_did(anywise_did);
    auto sig = from_b58_array<crypto::kSignatureBytes>(message.at("anywise").at("sig"));
    Bytes expected = challenge_bytes(nonce, sender_doc.did.id_string);
    if (!crypto::verify(anywise_doc.verification_key, as_span(expected), sig)) {
        raise(Errc::ChallengeFailure, "responder failed the anywise challenge");
    }

    inviter.consume_pending_invitation(nonce);
    agents::Connection conn;
    conn.their_doc = sender_doc;
    conn.their_anywise = anywise_did;
    conn.authenticated_peer = true;
    conn.recv_seq = env.seq;
    inviter.connections[*alias] = conn;

    AcceptedConnection accepted;
    accepted.alias = *alias;
    if (message.contains("reverse_nonce_b58")) {
        accepted.reverse_nonce = from_b58_array<16>(message.at("reverse_nonce_b58"));
    }
    return accepted;
}

FlowOutcome flow_connect(World& world, const std::string& inviter, const std::string& responder,
                         ConnectOptions options) {
    Runner r("connect");
    const std::string inviter_alias = responder;
    const std::string responder_alias = inviter;
    try {
        agents::Wallet& iw = world.wallet(inviter);
        agents::Wallet& rw = world.wallet(responder);
        const uint64_t now = world.clock.now();

        Bytes qr = iw.make_invitation(inviter_alias, world.mediator, now).to_bytes();
        r.step(inviter, "make_invitation", "alias " + inviter_alias);

        auto invitation = identity::OobInvitation::parse(qr);
        r.step(responder, "scan_invitation", "from " + invitation.inviter_pairwise_did.id_string);

        auto [rdid, rdoc] = rw.create_did(identity::DidKind::Pairwise, responder_alias,
                                          world.mediator.endpoint(), now);
        world.mediator.request_mediation(rdoc, now);
        agents::Connection rconn;
        rconn.their_doc = invitation.inviter_doc;
        rw.connections[responder_alias] = rconn;

        Json request{
            {"type", "connection-request"},
            {"doc", rdoc.to_json()},
            {"nonce_b58", b58(invitation.nonce)},
        };
        Bytes challenge = challenge_bytes(invitation.nonce, rdid.id_string);
        request["anywise"] =
            Json{{"did", rw.anywise_did().to_json()},
                 {"sig", b58(crypto::sign(rw.keys_of(self_alias()).private_key,
                                          as_span(challenge)))}};
        ByteArray<16> reverse_nonce{};
        if (options.authenticate_inviter) {
            reverse_nonce = crypto::random_array<16>();
            request["reverse_nonce_b58"] = b58(reverse_nonce);
        }
        world.mediator.deliver(rw.pack_first_contact(responder_alias, request));
        r.step(responder, "connection_request", "delivered via mediator");

        auto envelopes = world.mediator.pickup(invitation.inviter_pairwise_did.id_string, 1);
        if (envelopes.empty()) {
            raise(Errc::NotFound, "no connection request queued");
        }
        auto accepted = accept_connection_request(world, iw, envelopes.front());
        r.step(inviter, "verify_responder",
               "anywise " + iw.connection(accepted.alias).their_anywise->id_string);

        if (options.authenticate_inviter) {
            if (!accepted.reverse_nonce) {
                raise(Errc::ChallengeFailure, "responder sent no reverse challenge");
            }
            Bytes reverse =
                challenge_bytes(*accepted.reverse_nonce,
                                invitation.inviter_pairwise_did.id_string);
            Json proof{{"type", "auth-proof"},
                       {"did", iw.anywise_did().to_json()},
                       {"sig", b58(crypto::sign(iw.keys_of(self_alias()).private_key,
                                                as_span(reverse)))}};
            world.mediator.deliver(iw.pack_envelope(accepted.alias, proof));
            auto reply = world.mediator.pickup(rdid.id_string, 1);
            if (reply.empty()) {
                raise(Errc::NotFound, "no auth proof queued");
            }
            Json proof_msg = rw.unpack_envelope(reply.front(), world.mediator.doc());
            auto inviter_anywise = identity::Did::from_json(proof_msg.at("did"));
            auto inviter_doc = world.ledger.get_did(inviter_anywise);
            auto proof_sig =
                from_b58_array<crypto::kSignatureBytes>(proof_msg.at("sig"));
            if (!crypto::verify(inviter_doc.verification_key, as_span(reverse), proof_sig)) {
                raise(Errc::ChallengeFailure, "inviter failed the anywise challenge");
            }
            auto& rc = rw.connection(responder_alias);
            rc.their_anywise = inviter_anywise;
            rc.authenticated_peer = true;
            r.step(responder, "verify_inviter", "anywise " + inviter_anywise.id_string);
        }
        return r.done();
    } catch (const Error& e) {
        if (world.wallets.contains(inviter)) {
            remove_alias(world.wallet(inviter), inviter_alias);
        }
        if (world.wallets.contains(responder)) {
            remove_alias(world.wallet(responder), responder_alias);
        }
        return r.fail(e);
    }
}

FlowOutcome flow_share_local(World& world, const std::string& patient,
                             const std::string& practitioner,
                             const std::vector<std::string>& claim_names,
                             std::optional<uint64_t> ttl) {
    Runner r("share_local");
    try {
        agents::Wallet& pw = world.wallet(patient);
        agents::Wallet& dw = world.wallet(practitioner);
        const uint64_t now = world.clock.now();

        auto cids = credentials_with_claims(pw, claim_names);
        std::optional<uint64_t> expires = ttl ? std::optional(now + *ttl) : std::nullopt;
        auto vp = pw.create_presentation(practitioner, cids, claim_names, expires,
                                         world.registries);
        r.step(patient, "create_vp", "disclosing " + join(claim_names));

        // Out-of-band handover: the mediator never sees this presentation.
        auto report = credentials::verify_vp(vp, world.ledger, dw.known_docs(),
                                             dw.did_of(patient), now);
        r.step(practitioner, "verify_vp", report.valid() ? "valid" : "invalid");
        r.out.report = report;
        return r.done();
    } catch (const Error& e) {
        return r.fail(e);
    }
}

FlowOutcome flow_share_cloud(World& world, const std::string& patient,
                             const std::string& practitioner,
                             const std::vector<std::string>& claim_names, uint64_t ttl) {
    Runner r("share_cloud");
    try {
        agents::Wallet& pw = world.wallet(patient);
        agents::Wallet& dw = world.wallet(practitioner);
        const uint64_t now = world.clock.now();

        auto cids = credentials_with_claims(pw, claim_names);
        auto vp = pw.create_presentation(practitioner, cids, claim_names, now + ttl,
                                         world.registries);
        const std::string owner = pw.did_of(practitioner).id_string;
        const std::string grantee = pw.connection(practitioner).their_doc.did.id_string;

        std::string vp_id = world.mediator.host_vp(vp, owner);
        world.mediator.grant_access(owner, vp_id, grantee, ttl, now);
        r.step(patient, "host_and_grant", "vp " + vp_id + " ttl " + std::to_string(ttl));

        auto fetched = world.mediator.fetch_vp(vp_id, grantee, now);
        auto report = credentials::verify_vp(fetched, world.ledger, dw.known_docs(),
                                             dw.did_of(patient), now);
        r.step(practitioner, "fetch_and_verify", report.valid() ? "valid" : "invalid");
        r.out.report = report;
        r.out.vp_id = vp_id;
        return r.done();
    } catch (const Error& e) {
        return r.fail(e);
    }
}

FlowOutcome flow_revoke_vp_access(World& world, const std::string& patient,
                                  const std::string& practitioner, const std::string& vp_id) {
    Runner r("revoke_vp_access");
    try {
        agents::Wallet& pw = world.wallet(patient);
        const std::string owner = pw.did_of(practitioner).id_string;
        const std::string grantee = pw.connection(practitioner).their_doc.did.id_string;
        world.mediator.revoke_access(owner, vp_id, grantee);
        r.step(patient, "revoke_access", "vp " + vp_id);
        r.out.vp_id = vp_id;
        return r.done();
    } catch (const Error& e) {
        return r.fail(e);
    }
}

FlowOutcome flow_fetch_hosted(World& world, const std::string& practitioner,
                              const std::string& patient, const std::string& vp_id) {
    Runner r("fetch_hosted");
    try {
        agents::Wallet& dw = world.wallet(practitioner);
        const uint64_t now = world.clock.now();
        const std::string grantee = dw.did_of(patient).id_string;
        auto vp = world.mediator.fetch_vp(vp_id, grantee, now);
        auto report = credentials::verify_vp(vp, world.ledger, dw.known_docs(),
                                             dw.did_of(patient), now);
        r.step(practitioner, "fetch_and_verify", report.valid() ? "valid" : "invalid");
        r.out.report = report;
        r.out.vp_id = vp_id;
        return r.done();
    } catch (const Error& e) {
        return r.fail(e);
    }
}

FlowOutcome flow_prescription(World& world, const std::string& doctor, const std::string& patient,
                              const std::vector<std::pair<std::string, std::string>>& rx_claims) {
    Runner r("prescription");
    try {
        agents::Wallet& dw = world.wallet(doctor);
        agents::Wallet& pw = world.wallet(patient);
        const uint64_t now = world.clock.now();

        ensure_issuer_registry(world, dw, r);
        auto& registry = world.registries.at(*dw.registry_id);
        const identity::Did& subject = dw.connection(patient).their_doc.did;
        auto vc = credentials::issue_vc(dw.anywise_did(), dw.keys_of(self_alias()), registry,
                                        subject, rx_claims, world.ledger, now);
        r.step(doctor, "issue_vc", b58(vc.cid));

        transfer_credential(world, dw, pw, patient, vc, r);
        r.out.cid = vc.cid;
        return r.done();
    } catch (const Error& e) {
        return r.fail(e);
    }
}

FlowOutcome flow_lab_result(World& world, const std::string& lab, const std::string& patient,
                            const revocation::Cid& prescription_cid,
                            const std::vector<std::pair<std::string, std::string>>& result_claims) {
    Runner r("lab_result");
    try {
        agents::Wallet& lw = world.wallet(lab);
        agents::Wallet& pw = world.wallet(patient);
        const uint64_t now = world.clock.now();

        // The lab first checks the prescription's authenticity.
        const auto& prescription = pw.credential(prescription_cid);
        std::vector<std::string> names;
        for (const auto& claim : prescription.claims) {
            names.push_back(claim.name);
        }
        auto vp = pw.create_presentation(lab, {prescription_cid}, names, std::nullopt,
                                         world.registries);
        auto report = credentials::verify_vp(vp, world.ledger, lw.known_docs(),
                                             lw.did_of(patient), now);
        r.step(lab, "verify_prescription", report.valid() ? "valid" : "invalid");
        r.out.report = report;
        if (!report.valid()) {
            raise(Errc::VerificationRefused, "prescription did not verify");
        }

        ensure_issuer_registry(world, lw, r);
        auto& registry = world.registries.at(*lw.registry_id);
        auto claims = result_claims;
        claims.emplace_back("parent_cid", b58(prescription_cid));
        const identity::Did& subject = lw.connection(patient).their_doc.did;
        auto vc = credentials::issue_vc(lw.anywise_did(), lw.keys_of(self_alias()), registry,
                                        subject, claims, world.ledger, now);
        r.step(lab, "issue_result_vc", b58(vc.cid));

        transfer_credential(world, lw, pw, patient, vc, r);
        r.out.cid = vc.cid;
        return r.done();
    } catch (const Error& e) {
        return r.fail(e);
    }
}

FlowOutcome flow_revoke_credential(World& world, const std::string& issuer,
                                   const revocation::Cid& cid) {
    Runner r("revoke_credential");
    try {
        agents::Wallet& iw = world.wallet(issuer);
        if (!iw.registry_id) {
            raise(Errc::RegistryUnavailable, "issuer has no registry");
        }
        auto& registry = world.registries.at(*iw.registry_id);
        auto state = revocation::revoke_credential(registry, iw.keys_of(self_alias()), cid);
        world.ledger.anchor_registry_state(iw.anywise_did().id_string, state, world.clock.now());
        r.step(issuer, "revoke_credential",
               b58(cid) + " epoch " + std::to_string(state.epoch));
        r.out.cid = cid;
        return r.done();
    } catch (const Error& e) {
        return r.fail(e);
    }
}

FlowOutcome flow_verify_credential(World& world, const std::string& verifier,
                                   const revocation::Cid& cid) {
    Runner r("verify_credential");
    try {
        agents::Wallet& vw = world.wallet(verifier);
        const auto& vc = vw.credential(cid);

        std::optional<revocation::NonRevocationProof> proof;
        auto reg_it = world.registries.find(vc.registry_id);
        if (reg_it != world.registries.end()) {
            try {
                proof = revocation::prove_non_revocation(reg_it->second, vc.cid);
            } catch (const Error&) {
                // revoked: verification proceeds without a proof and fails closed
            }
        }
        auto report = credentials::verify_vc(vc, world.ledger, world.clock.now(),
                                             proof ? &*proof : nullptr);
        r.step(verifier, "verify_vc", report.valid() ? "valid" : "invalid");
        r.out.report = report;
        r.out.cid = cid;
        return r.done();
    } catch (const Error& e) {
        return r.fail(e);
    }
}

FlowOutcome flow_recovery_setup(World& world, const std::string& patient,
                                const std::vector<std::string>& contacts) {
    Runner r("recovery_setup");
    try {
        if (contacts.empty()) {
            raise(Errc::NoContacts, "recovery needs at least one trusted contact");
        }
        agents::Wallet& pw = world.wallet(patient);
        const uint64_t now = world.clock.now();

        pw.backup_keys = crypto::generate_keypair();
        pw.backup_opted_in = true;
        r.step(patient, "create_backup_keypair", "ok");

        auto shares = crypto::split_key(pw.backup_keys->private_key);
        std::vector<identity::Did> contact_dids;
        for (const auto& contact : contacts) {
            agents::Wallet& cw = world.wallet(contact);
            Json share_msg{{"type", "recovery-share"},
                           {"patient", pw.anywise_did().id_string},
                           {"share", b58(shares.share_contacts)}};
            world.mediator.deliver(pw.pack_envelope(contact, share_msg));
            auto envelopes = world.mediator.pickup(cw.did_of(patient).id_string, 1);
            if (envelopes.empty()) {
                raise(Errc::NotFound, "share envelope was not queued");
            }
            Json received = cw.unpack_envelope(envelopes.front(), world.mediator.doc());
            cw.held_recovery_shares[received.at("patient").get<std::string>()] =
                from_b58_array<crypto::kKeyBytes>(received.at("share"));
            contact_dids.push_back(cw.anywise_did());
            r.step(contact, "hold_share", "for " + patient);
        }

        auto [seq, digest] = agents::backup_wallet(pw, world.mediator, world.ledger, now);
        r.step(patient, "backup",
               "seq " + std::to_string(seq) + " digest " + digest.to_b58());

        world.msp.register_recovery(pw.anywise_did().id_string, shares.share_msp, contact_dids,
                                    {pw.anywise_did().id_string, seq});
        r.step("msp", "store_share_and_contacts",
               std::to_string(contact_dids.size()) + " contacts");
        return r.done();
    } catch (const Error& e) {
        return r.fail(e);
    }
}

FlowOutcome flow_share_contacts(World& world, const std::string& patient,
                                const std::vector<std::string>& contacts) {
    Runner r("share_contacts");
    try {
        if (contacts.empty()) {
            raise(Errc::NoContacts, "an empty contact list cannot be shared");
        }
        agents::Wallet& pw = world.wallet(patient);
        std::vector<identity::Did> contact_dids;
        for (const auto& contact : contacts) {
            contact_dids.push_back(world.wallet(contact).anywise_did());
        }
        world.msp.share_contact_list(pw.anywise_did().id_string, contact_dids);
        r.step("msp", "store_contacts", std::to_string(contact_dids.size()) + " contacts");
        return r.done();
    } catch (const Error& e) {
        return r.fail(e);
    }
}

FlowOutcome flow_recover_wallet(World& world, const std::string& patient,
                                const std::string& contact) {
    Runner r("recover_wallet");
    try {
        auto [it, created] = world.wallets.try_emplace(patient, agents::Wallet(patient));
        agents::Wallet& nw = it->second;
        const uint64_t now = world.clock.now();

        auto temp_keys = crypto::generate_keypair();
        auto nonce = world.msp.begin_recovery(patient);
        auto sig = crypto::sign(temp_keys.private_key, as_span(nonce));
        auto release = world.msp.complete_recovery(patient, temp_keys.public_key, sig, world.ca);
        r.step("msp", "release_share",
               "backup seq " + std::to_string(release.backup.sequence_no));

        agents::Wallet& cw = world.wallet(contact);
        auto share_it = cw.held_recovery_shares.find(release.backup.patient_did);
        if (share_it == cw.held_recovery_shares.end()) {
            raise(Errc::MissingShare, contact + " holds no share for this patient");
        }
        r.step(contact, "provide_share", "ok");

        crypto::Key32 backup_seed = crypto::combine_key(release.share_msp, share_it->second);
        agents::restore_wallet_from_backup(nw, release.backup.patient_did,
                                           release.backup.sequence_no, backup_seed,
                                           world.mediator, world.ledger, world.msp.did_id(), now);
        r.step(patient, "restore",
               std::to_string(nw.creds.size()) + " credentials, 0 connections");

        auto csr = ledger::make_csr(nw.anywise_did(), nw.doc_of(self_alias()),
                                    nw.keys_of(self_alias()), ledger::Role::Patient);
        auto cert = world.ca.issue_certificate(csr, patient, now);
        nw.certificate = cert;
        auto auth = world.msp.authorize(cert, world.ca.root_public_key(), now, world.ledger);
        nw.role = auth.role;
        nw.channels = auth.channels;
        r.step("ca", "reissue_certificate", "ok");
        return r.done();
    } catch (const Error& e) {
        return r.fail(e);
    }
}

FlowOutcome flow_emergency_access(World& world, const std::string& doctor,
                                  const std::string& patient_identity_ref) {
    Runner r("emergency_access");
    try {
        agents::Wallet& dw = world.wallet(doctor);
        if (dw.role != ledger::Role::Practitioner) {
            raise(Errc::Unauthorized, "emergency access is requested by practitioners");
        }
        auto resolved = world.ca.did_for_identity(patient_identity_ref);
        const std::string patient_did = resolved.value_or("unresolved:" + patient_identity_ref);
        r.step(doctor, "emergency_request", "patient " + patient_did);

        ledger::EmergencyRecord record;
        record.patient_did = patient_did;
        record.requester_did = dw.anywise_did().id_string;
        record.msp_id = world.msp.did_id();
        record.triggered_at = world.clock.now();

        const auto* vault = world.msp.vault(patient_did);
        const TrustedContactSet contact_set = trusted_contacts(world, patient_did);
        const bool backup_ready =
            vault != nullptr && vault->share_msp.has_value() && vault->backup.has_value();
        const bool contacts_ready = contact_set.registered_with_msp &&
                                    !contact_set.contacts.empty();

        std::optional<identity::Did> acked_contact;
        crypto::Key32 contact_share{};
        if (backup_ready && contacts_ready) {
            for (const auto& contact_did : contact_set.contacts) {
                agents::Wallet* cw = world.wallet_by_did(contact_did.id_string);
                if (cw == nullptr || !cw->reachable) {
                    world.clock.advance(kContactPingTimeout);
                    r.step("msp", "ping", contact_did.id_string + " timeout");
                    continue;
                }
                auto share_it = cw->held_recovery_shares.find(patient_did);
                if (share_it == cw->held_recovery_shares.end()) {
                    world.clock.advance(kContactPingTimeout);
                    r.step("msp", "ping", contact_did.id_string + " holds no share");
                    continue;
                }
                acked_contact = contact_did;
                contact_share = share_it->second;
                r.step("msp", "ping", contact_did.id_string + " ack");
                break;
            }
        }

        if (acked_contact) {
            // Branch (a): record first, then release. The MSP sends only its
            // own share; the contact's share goes straight to the doctor.
            record.outcome = ledger::EmergencyRecord::Outcome::KeyReleased;
            record.contact_ack = acked_contact->id_string;
            world.ledger.record_emergency_access(world.msp.did_id(), record, world.clock.now());
            r.step("msp", "record_emergency", "KeyReleased");

            auto voucher = world.msp.issue_emergency_voucher(patient_did, record.requester_did,
                                                             vault->backup->sequence_no);
            crypto::Key32 backup_seed = crypto::combine_key(*vault->share_msp, contact_share);
            r.step(doctor, "recombine_key", "from msp + " + acked_contact->id_string);

            auto ciphertext = world.mediator.fetch_backup(
                patient_did, vault->backup->sequence_no, record.requester_did,
                world.clock.now(), &voucher, &world.msp.public_key());
            Json payload = agents::open_backup(ciphertext, backup_seed);
            r.step(doctor, "decrypt_backup",
                   std::to_string(payload.at("credentials").size()) + " credentials");
            r.out.emergency_outcome = record.outcome;
            return r.done();
        }

        if (vault != nullptr && vault->list_shareable && contacts_ready) {
            record.outcome = ledger::EmergencyRecord::Outcome::ContactListReleased;
            world.ledger.record_emergency_access(world.msp.did_id(), record, world.clock.now());
            r.step("msp", "record_emergency", "ContactListReleased");
            r.step(doctor, "receive_contacts",
                   std::to_string(contact_set.contacts.size()) + " contacts, no key material");
            r.out.emergency_outcome = record.outcome;
            return r.done();
        }

        record.outcome = ledger::EmergencyRecord::Outcome::Denied;
        world.ledger.record_emergency_access(world.msp.did_id(), record, world.clock.now());
        r.step("msp", "record_emergency", "Denied");
        r.step(doctor, "triage_without_ehr", "no backup and no contact list");
        r.out.emergency_outcome = record.outcome;
        return r.done();
    } catch (const Error& e) {
        return r.fail(e);
    }
}

FlowOutcome flow_pickup_all(World& world, const std::string& actor) {
    Runner r("pickup");
    try {
        agents::Wallet& wallet = world.wallet(actor);
        std::vector<std::string> seen;
        for (const auto& [alias, entry] : wallet.dids) {
            const std::string& did_id = entry.first.id_string;
            if (!world.mediator.has_grant(did_id)) {
                continue;
            }
            for (const auto& env : world.mediator.pickup(did_id, 100)) {
                Json message = wallet.unpack_envelope(env, world.mediator.doc());
                std::string type = message.value("type", "unknown");
                if (type == "vc-offer") {
                    wallet.store_credential(
                        credentials::VerifiableCredential::from_json(message.at("vc")));
                }
                seen.push_back(type);
            }
        }
        r.step(actor, "pickup", join(seen));
        return r.done();
    } catch (const Error& e) {
        return r.fail(e);
    }
}

}  // namespace ssi::flows
