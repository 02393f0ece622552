#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "ssi/flows.hpp"
#include "support/fixtures.hpp"
#include "support/test_util.hpp"

using namespace ssi;

namespace {

std::vector<ledger::EmergencyRecord> security_records(const World& world) {
    std::vector<ledger::EmergencyRecord> records;
    for (const auto& tx : world.ledger.channel(ledger::kChannelSecurity).tx_log) {
        if (tx.op_name != "emergency_record") {
            continue;
        }
        Json payload = Json::parse(tx.payload);
        for (const auto& entry : payload.at("entries")) {
            records.push_back(ledger::EmergencyRecord::from_json(
                Json::parse(entry.at("value").get<std::string>())));
        }
    }
    return records;
}

World emergency_world(bool with_backup, bool carol_reachable = true) {
    crypto::seed_rng(4242);
    World world = World::create();
    flows::flow_onboard(world, "alice", ledger::Role::Patient);
    flows::flow_onboard(world, "bob", ledger::Role::Practitioner);
    flows::flow_onboard(world, "carol", ledger::Role::Patient);
    flows::flow_onboard(world, "dave", ledger::Role::Patient);
    flows::flow_connect(world, "alice", "carol");
    flows::flow_connect(world, "alice", "dave");
    if (with_backup) {
        auto setup = flows::flow_recovery_setup(world, "alice", {"carol", "dave"});
        REQUIRE(setup.success);
    } else {
        flows::flow_share_contacts(world, "alice", {"carol", "dave"});
    }
    world.wallet("carol").reachable = carol_reachable;
    return world;
}

}  // namespace

TEST_CASE("onboard: did resolvable, channels per role, re-registration rejected") {
    World world = World::create();
    auto outcome = flows::flow_onboard(world, "alice", ledger::Role::Patient);
    REQUIRE(outcome.success);

    auto& alice = world.wallet("alice");
    CHECK(world.ledger.get_did(alice.anywise_did()) == alice.doc_of("self"));
    CHECK(alice.channels == std::vector<std::string>{"dids", "backups", "registries"});

    auto again = flows::flow_onboard(world, "alice", ledger::Role::Patient);
    CHECK_FALSE(again.success);
    CHECK(again.error == "duplicate-did");

    auto lab = flows::flow_onboard(world, "lena", ledger::Role::Laboratory);
    REQUIRE(lab.success);
    CHECK(world.wallet("lena").channels == std::vector<std::string>{"dids", "registries"});
}

TEST_CASE("connect: symmetric pairwise state, inviter authenticates responder") {
    World world = World::create();
    flows::flow_onboard(world, "alice", ledger::Role::Patient);
    flows::flow_onboard(world, "bob", ledger::Role::Practitioner);
    auto outcome = flows::flow_connect(world, "alice", "bob");
    REQUIRE(outcome.success);

    auto& alice = world.wallet("alice");
    auto& bob = world.wallet("bob");
    const auto& ca = alice.connection("bob");
    const auto& cb = bob.connection("alice");
    CHECK(ca.their_doc.did == bob.did_of("alice"));
    CHECK(cb.their_doc.did == alice.did_of("bob"));
    CHECK(ca.their_doc.did.kind == identity::DidKind::Pairwise);

    // mandatory leg: inviter verified the responder
    CHECK(ca.authenticated_peer);
    REQUIRE(ca.their_anywise.has_value());
    CHECK(*ca.their_anywise == bob.anywise_did());

    // default: the inviter's anywise did never travelled
    CHECK_FALSE(cb.authenticated_peer);
    CHECK_FALSE(cb.their_anywise.has_value());

    // messages flow both ways afterwards
    world.mediator.deliver(alice.pack_envelope("bob", Json{{"type", "hi"}}));
    auto envs = world.mediator.pickup(bob.did_of("alice").id_string, 1);
    CHECK(bob.unpack_envelope(envs.front(), world.mediator.doc()).at("type") == "hi");
}

TEST_CASE("connect: optional reverse authentication when requested") {
    World world = World::create();
    flows::flow_onboard(world, "alice", ledger::Role::Patient);
    flows::flow_onboard(world, "bob", ledger::Role::Practitioner);
    flows::ConnectOptions options;
    options.authenticate_inviter = true;
    auto outcome = flows::flow_connect(world, "alice", "bob", options);
    REQUIRE(outcome.success);
    const auto& cb = world.wallet("bob").connection("alice");
    CHECK(cb.authenticated_peer);
    REQUIRE(cb.their_anywise.has_value());
    CHECK(*cb.their_anywise == world.wallet("alice").anywise_did());
}

TEST_CASE("connect: responder answering with the wrong key leaves no connection") {
    World world = World::create();
    flows::flow_onboard(world, "alice", ledger::Role::Patient);
    flows::flow_onboard(world, "bob", ledger::Role::Practitioner);
    auto& alice = world.wallet("alice");
    auto& bob = world.wallet("bob");

    auto invitation = alice.make_invitation("bob", world.mediator, 0);
    auto [bdid, bdoc] =
        bob.create_did(identity::DidKind::Pairwise, "alice", world.mediator.endpoint(), 0);
    world.mediator.request_mediation(bdoc, 0);
    agents::Connection conn;
    conn.their_doc = invitation.inviter_doc;
    bob.connections["alice"] = conn;

    // challenge signed with the pairwise key instead of the anywise key
    Bytes challenge = concat(invitation.nonce, as_span(bdid.id_string));
    Json request{{"type", "connection-request"},
                 {"doc", bdoc.to_json()},
                 {"nonce_b58", b58(invitation.nonce)},
                 {"anywise",
                  Json{{"did", bob.anywise_did().to_json()},
                       {"sig", b58(crypto::sign(bob.keys_of("alice").private_key,
                                                as_span(challenge)))}}}};
    world.mediator.deliver(bob.pack_first_contact("alice", request));
    auto envs = world.mediator.pickup(invitation.inviter_pairwise_did.id_string, 1);

    CHECK_THROWS_AS(flows::accept_connection_request(world, alice, envs.front()), Error);
    CHECK_FALSE(alice.connections.contains("bob"));
}

TEST_CASE("share_local: out-of-band verification, no mediator traffic") {
    World world = testutil::make_clinic_world();
    auto rx = flows::flow_prescription(world, "bob", "alice",
                                       {{"rx", "lipid panel"}, {"blood_type", "O negative"}});
    REQUIRE(rx.success);

    const std::string before = canonical_text(world.mediator.export_state());
    auto outcome = flows::flow_share_local(world, "alice", "bob", {"blood_type"});
    REQUIRE(outcome.success);
    REQUIRE(outcome.report.has_value());
    CHECK(outcome.report->valid());
    CHECK(canonical_text(world.mediator.export_state()) == before);
}

TEST_CASE("share_local: revoked credential and expired presentation are reported") {
    World world = testutil::make_clinic_world();
    auto rx = flows::flow_prescription(world, "bob", "alice", {{"rx", "lipid panel"}});
    REQUIRE(rx.success);

    auto expired = flows::flow_share_local(world, "alice", "bob", {"rx"}, uint64_t{0});
    REQUIRE(expired.report.has_value());
    CHECK(expired.report->expired);
    CHECK_FALSE(expired.report->valid());

    auto revoke = flows::flow_revoke_credential(world, "bob", *rx.cid);
    REQUIRE(revoke.success);
    auto outcome = flows::flow_share_local(world, "alice", "bob", {"rx"});
    REQUIRE(outcome.report.has_value());
    CHECK_FALSE(outcome.report->not_revoked);
    CHECK_FALSE(outcome.report->valid());
}

TEST_CASE("share_cloud: grant lifecycle with revocation notice and expiry") {
    World world = testutil::make_clinic_world();
    auto rx = flows::flow_prescription(world, "bob", "alice", {{"rx", "lipid panel"}});
    REQUIRE(rx.success);

    auto shared = flows::flow_share_cloud(world, "alice", "bob", {"rx"}, 300);
    REQUIRE(shared.success);
    REQUIRE(shared.report.has_value());
    CHECK(shared.report->valid());
    REQUIRE(shared.vp_id.has_value());

    // patient revokes; the practitioner's re-fetch fails and a notice lands
    auto revoked = flows::flow_revoke_vp_access(world, "alice", "bob", *shared.vp_id);
    REQUIRE(revoked.success);
    auto refetch = flows::flow_fetch_hosted(world, "bob", "alice", *shared.vp_id);
    CHECK_FALSE(refetch.success);
    CHECK(refetch.error == "revoked");
    auto pickup = flows::flow_pickup_all(world, "bob");
    REQUIRE(pickup.success);
    CHECK(pickup.steps.front().result.find("access-terminated") != std::string::npos);

    // a second share expires by ttl
    auto shared2 = flows::flow_share_cloud(world, "alice", "bob", {"rx"}, 10);
    REQUIRE(shared2.success);
    world.clock.advance(11);
    auto late = flows::flow_fetch_hosted(world, "bob", "alice", *shared2.vp_id);
    CHECK_FALSE(late.success);
    CHECK(late.error == "expired");
}

TEST_CASE("prescription to lab result loop, with parent linkage") {
    World world = testutil::make_clinic_world();
    flows::flow_onboard(world, "lena", ledger::Role::Laboratory);
    flows::flow_connect(world, "alice", "lena");

    auto rx = flows::flow_prescription(world, "bob", "alice", {{"rx", "complete blood count"}});
    REQUIRE(rx.success);

    auto result = flows::flow_lab_result(world, "lena", "alice", *rx.cid,
                                         {{"hemoglobin", "13.5 g/dL"}});
    REQUIRE(result.success);
    REQUIRE(result.report.has_value());
    CHECK(result.report->valid());

    const auto& vc = world.wallet("alice").credential(*result.cid);
    auto parent = vc.find_claim("parent_cid");
    REQUIRE(parent.has_value());
    CHECK(parent->value == b58(*rx.cid));

    // patient presents the result back to the doctor
    auto show = flows::flow_share_local(world, "alice", "bob", {"hemoglobin"});
    REQUIRE(show.report.has_value());
    CHECK(show.report->valid());
}

TEST_CASE("lab refuses a revoked prescription") {
    World world = testutil::make_clinic_world();
    flows::flow_onboard(world, "lena", ledger::Role::Laboratory);
    flows::flow_connect(world, "alice", "lena");

    auto rx = flows::flow_prescription(world, "bob", "alice", {{"rx", "complete blood count"}});
    REQUIRE(rx.success);
    REQUIRE(flows::flow_revoke_credential(world, "bob", *rx.cid).success);

    auto result = flows::flow_lab_result(world, "lena", "alice", *rx.cid,
                                         {{"hemoglobin", "13.5 g/dL"}});
    CHECK_FALSE(result.success);
    CHECK(result.error == "verification-refused");
    REQUIRE(result.report.has_value());
    CHECK_FALSE(result.report->not_revoked);
}

TEST_CASE("recovery_setup: share distribution and custody separation") {
    World world = emergency_world(true);
    auto& alice = world.wallet("alice");
    const std::string patient = alice.anywise_did().id_string;

    const auto* vault = world.msp.vault(patient);
    REQUIRE(vault != nullptr);
    REQUIRE(vault->share_msp.has_value());
    REQUIRE(vault->backup.has_value());
    auto contact_set = flows::trusted_contacts(world, patient);
    CHECK(contact_set.registered_with_msp);
    REQUIRE(contact_set.contacts.size() == 2);
    CHECK(contact_set.contacts[0] == world.wallet("carol").anywise_did());
    CHECK(contact_set.contacts[1] == world.wallet("dave").anywise_did());
    CHECK_FALSE(flows::trusted_contacts(world, "nobody").registered_with_msp);

    // both contacts hold the identical contact-share
    auto carol_share = world.wallet("carol").held_recovery_shares.at(patient);
    auto dave_share = world.wallet("dave").held_recovery_shares.at(patient);
    CHECK(carol_share == dave_share);

    // custody separation: neither half equals the secret, their xor does
    auto secret = alice.backup_keys->private_key;
    CHECK(*vault->share_msp != secret);
    CHECK(carol_share != secret);
    CHECK(crypto::combine_key(*vault->share_msp, carol_share) == secret);

    // no wallet ever holds the msp share
    for (const auto& [name, wallet] : world.wallets) {
        for (const auto& [who, share] : wallet.held_recovery_shares) {
            CHECK(share != *vault->share_msp);
        }
    }

    auto none = flows::flow_recovery_setup(world, "alice", {});
    CHECK_FALSE(none.success);
    CHECK(none.error == "no-contacts");
}

TEST_CASE("recover_wallet: restores credentials, drops connections, detects tampering") {
    World world = emergency_world(true);
    flows::flow_connect(world, "alice", "bob");
    auto rx = flows::flow_prescription(world, "bob", "alice", {{"rx", "iron panel"}});
    REQUIRE(rx.success);
    // rebackup so the credential is included
    auto& alice = world.wallet("alice");
    auto [seq, digest] =
        agents::backup_wallet(alice, world.mediator, world.ledger, world.clock.now());
    world.msp.register_recovery(alice.anywise_did().id_string,
                                *world.msp.vault(alice.anywise_did().id_string)->share_msp,
                                world.msp.vault(alice.anywise_did().id_string)->contacts,
                                {alice.anywise_did().id_string, seq});

    std::map<std::string, std::string> original;
    for (const auto& [cid, vc] : alice.creds) {
        original[cid] = canonical_text(vc.to_json(true));
    }
    const std::string anywise = alice.anywise_did().id_string;

    SUBCASE("full recovery") {
        world.wallets["alice"] = agents::Wallet("alice");
        auto outcome = flows::flow_recover_wallet(world, "alice", "dave");
        REQUIRE(outcome.success);
        auto& restored = world.wallet("alice");
        CHECK(restored.anywise_did().id_string == anywise);
        CHECK(restored.connections.empty());
        REQUIRE(restored.creds.size() == original.size());
        for (const auto& [cid, text] : original) {
            CHECK(canonical_text(restored.creds.at(cid).to_json(true)) == text);
        }
        CHECK(restored.certificate.has_value());
        CHECK(restored.role == ledger::Role::Patient);
    }

    SUBCASE("corrupted contact share aborts") {
        world.wallets["alice"] = agents::Wallet("alice");
        world.wallet("dave").held_recovery_shares.at(anywise)[3] ^= 0x20;
        auto outcome = flows::flow_recover_wallet(world, "alice", "dave");
        CHECK_FALSE(outcome.success);
        CHECK(outcome.error == "authentication-failure");
        CHECK(world.wallet("alice").creds.empty());
    }

    SUBCASE("tampered mediator backup aborts on the anchored digest") {
        world.wallets["alice"] = agents::Wallet("alice");
        world.mediator.backup_entry(anywise, seq)[10] ^= 0x01;
        auto outcome = flows::flow_recover_wallet(world, "alice", "dave");
        CHECK_FALSE(outcome.success);
        CHECK(outcome.error == "digest-mismatch");
    }
}

TEST_CASE("emergency branch (a): second contact acks after first times out") {
    World world = emergency_world(true, /*carol_reachable=*/false);
    uint64_t t0 = world.clock.now();
    auto outcome = flows::flow_emergency_access(world, "bob", "alice");
    REQUIRE(outcome.success);
    CHECK(outcome.emergency_outcome == ledger::EmergencyRecord::Outcome::KeyReleased);
    CHECK(world.clock.now() == t0 + 1);  // one timeout tick for carol

    auto records = security_records(world);
    REQUIRE(records.size() == 1);
    CHECK(records[0].outcome == ledger::EmergencyRecord::Outcome::KeyReleased);
    CHECK(records[0].contact_ack == world.wallet("dave").anywise_did().id_string);
    CHECK(records[0].patient_did == world.wallet("alice").anywise_did().id_string);
    CHECK(records[0].requester_did == world.wallet("bob").anywise_did().id_string);

    // the record precedes the release: decrypt step follows record step
    size_t record_idx = 0, decrypt_idx = 0;
    for (size_t i = 0; i < outcome.steps.size(); ++i) {
        if (outcome.steps[i].action == "record_emergency") record_idx = i;
        if (outcome.steps[i].action == "decrypt_backup") decrypt_idx = i;
    }
    CHECK(record_idx < decrypt_idx);

    // the mediator logged the voucher-gated release
    bool logged = false;
    for (const auto& entry : world.mediator.audit_log()) {
        logged = logged || entry.kind == "emergency_backup_release";
    }
    CHECK(logged);
}

TEST_CASE("emergency branch (b): contact list released, no key material") {
    World world = emergency_world(false);
    auto outcome = flows::flow_emergency_access(world, "bob", "alice");
    REQUIRE(outcome.success);
    CHECK(outcome.emergency_outcome == ledger::EmergencyRecord::Outcome::ContactListReleased);
    auto records = security_records(world);
    REQUIRE(records.size() == 1);
    CHECK(records[0].outcome == ledger::EmergencyRecord::Outcome::ContactListReleased);
    CHECK(records[0].contact_ack.empty());
    for (const auto& s : outcome.steps) {
        CHECK(s.action != "recombine_key");
        CHECK(s.action != "decrypt_backup");
    }
}

TEST_CASE("emergency branch (a) escalates to (b) when no contact answers") {
    World world = emergency_world(true);
    world.wallet("carol").reachable = false;
    world.wallet("dave").reachable = false;
    auto outcome = flows::flow_emergency_access(world, "bob", "alice");
    REQUIRE(outcome.success);
    CHECK(outcome.emergency_outcome == ledger::EmergencyRecord::Outcome::ContactListReleased);
    CHECK(security_records(world).size() == 1);
}

TEST_CASE("emergency branch (c): nothing on record, denied but audited") {
    crypto::seed_rng(4243);
    World world = World::create();
    flows::flow_onboard(world, "alice", ledger::Role::Patient);
    flows::flow_onboard(world, "bob", ledger::Role::Practitioner);
    auto outcome = flows::flow_emergency_access(world, "bob", "alice");
    REQUIRE(outcome.success);
    CHECK(outcome.emergency_outcome == ledger::EmergencyRecord::Outcome::Denied);
    auto records = security_records(world);
    REQUIRE(records.size() == 1);
    CHECK(records[0].outcome == ledger::EmergencyRecord::Outcome::Denied);

    // a patient cannot trigger the loop
    auto not_doctor = flows::flow_emergency_access(world, "alice", "bob");
    CHECK_FALSE(not_doctor.success);
    CHECK(security_records(world).size() == 1);
}

TEST_CASE("flows are deterministic from a snapshotted world under a fixed seed") {
    crypto::seed_rng(777);
    World world = World::create();
    flows::flow_onboard(world, "alice", ledger::Role::Patient);
    flows::flow_onboard(world, "bob", ledger::Role::Practitioner);
    flows::flow_connect(world, "alice", "bob");

    World snapshot = world;  // value copy

    crypto::seed_rng(1234);
    auto out1 = flows::flow_prescription(world, "bob", "alice", {{"rx", "cbc"}});
    crypto::seed_rng(1234);
    auto out2 = flows::flow_prescription(snapshot, "bob", "alice", {{"rx", "cbc"}});

    REQUIRE(out1.success);
    REQUIRE(out2.success);
    CHECK(out1.cid == out2.cid);
    REQUIRE(out1.steps.size() == out2.steps.size());
    for (size_t i = 0; i < out1.steps.size(); ++i) {
        CHECK(out1.steps[i].actor == out2.steps[i].actor);
        CHECK(out1.steps[i].action == out2.steps[i].action);
        CHECK(out1.steps[i].result == out2.steps[i].result);
    }
    crypto::use_system_rng();
}
