#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <fstream>
#include <random>

#include "ssi/credentials.hpp"
#include "support/fixtures.hpp"
#include "support/test_util.hpp"

using namespace ssi;
using testutil::make_registered_actor;

namespace {

/// Registered practitioner with an anchored registry, issuing to a pairwise
/// subject; enough moving parts for credential tests without full flows.
struct IssuerWorld {
    ledger::Ledger l;
    testutil::LedgerActor issuer;
    crypto::KeyPair subject_keys = crypto::generate_keypair();
    identity::Did subject_did;
    identity::DidDocument subject_doc;
    credentials::RegistryDirectory directory;
    revocation::RegistryId rid{};

    IssuerWorld() {
        issuer = make_registered_actor(l, ledger::Party::Practitioner);
        auto [sdid, sdoc] = identity::create_did(identity::DidKind::Pairwise, subject_keys,
                                                 "mediator:main", 0);
        subject_did = sdid;
        subject_doc = sdoc;
        auto [registry, genesis] = revocation::init_registry(issuer.did, issuer.keys);
        l.anchor_registry_state(issuer.did.id_string, genesis, 0);
        rid = registry.registry_id;
        directory.emplace(rid, std::move(registry));
    }

    revocation::RevocationRegistry& registry() { return directory.at(rid); }

    credentials::VerifiableCredential issue(
        const std::vector<std::pair<std::string, std::string>>& claims, uint64_t now = 1) {
        return credentials::issue_vc(issuer.did, issuer.keys, registry(), subject_did, claims, l,
                                     now);
    }

    std::optional<revocation::NonRevocationProof> prove(const revocation::Cid& cid) {
        try {
            return revocation::prove_non_revocation(registry(), cid);
        } catch (const Error&) {
            return std::nullopt;
        }
    }

    credentials::VerificationReport verify(const credentials::VerifiableCredential& vc,
                                           uint64_t now = 2) {
        auto proof = prove(vc.cid);
        return credentials::verify_vc(vc, l, now, proof ? &*proof : nullptr);
    }

    std::map<std::string, identity::DidDocument> local_docs() {
        return {{subject_did.id_string, subject_doc}};
    }
};

}  // namespace

TEST_CASE("issue_vc: fresh credential verifies on all three facts") {
    IssuerWorld w;
    auto vc = w.issue({{"rx", "blood test"}});
    auto report = w.verify(vc);
    CHECK(report.signature_ok);
    CHECK(report.issuer_known);
    CHECK(report.not_revoked);
    CHECK(report.digests_ok);
    CHECK(report.valid());
}

TEST_CASE("issue_vc: registry state re-anchored per issuance") {
    IssuerWorld w;
    auto vc1 = w.issue({{"rx", "one"}});
    CHECK(w.l.latest_registry_state(w.rid)->epoch == 1);
    auto vc2 = w.issue({{"rx", "two"}});
    CHECK(w.l.latest_registry_state(w.rid)->epoch == 2);
    CHECK(vc1.cid != vc2.cid);
}

TEST_CASE("verify_vc: tampered signature fails; unregistered issuer error on issue") {
    IssuerWorld w;
    auto vc = w.issue({{"rx", "blood test"}});
    auto tampered = vc;
    tampered.signature[7] ^= 0x10;
    CHECK_FALSE(w.verify(tampered).signature_ok);

    auto offledger = crypto::generate_keypair();
    auto [odid, odoc] =
        identity::create_did(identity::DidKind::Anywise, offledger, "mediator:main", 0);
    auto [oreg, ostate] = revocation::init_registry(odid, offledger);
    CHECK_THROWS_AS(credentials::issue_vc(odid, offledger, oreg, w.subject_did,
                                          {{"rx", "forged"}}, w.l, 3),
                    Error);
}

TEST_CASE("verify_vc: revoked credential reports {true, true, false}") {
    IssuerWorld w;
    auto vc = w.issue({{"rx", "blood test"}});
    auto state = revocation::revoke_credential(w.registry(), w.issuer.keys, vc.cid);
    w.l.anchor_registry_state(w.issuer.did.id_string, state, 5);

    auto report = w.verify(vc);
    CHECK(report.signature_ok);
    CHECK(report.issuer_known);
    CHECK_FALSE(report.not_revoked);
    CHECK_FALSE(report.valid());
}

TEST_CASE("verify_vc: issuer missing from ledger -> known=false, hint still checks signature") {
    IssuerWorld w;
    // an issuer that never registered: build the credential by hand
    auto ghost = crypto::generate_keypair();
    auto [gdid, gdoc] = identity::create_did(identity::DidKind::Anywise, ghost, "mediator:main", 0);

    credentials::VerifiableCredential vc;
    vc.cid = testutil::make_cid(42);
    vc.issuer_did = gdid;
    vc.subject_did = w.subject_did;
    vc.registry_id = testutil::make_cid(43);
    vc.issued_at = 1;
    credentials::Claim claim{"rx", "blood test", testutil::make_cid(44)};
    vc.claims.push_back(claim);
    vc.claim_digests.push_back(credentials::claim_digest(claim));
    vc.signature = crypto::sign(ghost.private_key, as_span(vc.signing_bytes()));

    auto report = credentials::verify_vc(vc, w.l, 2, nullptr, &gdoc);
    CHECK(report.signature_ok);
    CHECK_FALSE(report.issuer_known);
    CHECK_FALSE(report.valid());
}

TEST_CASE("create_vp: undisclosed claims and salts never serialize") {
    IssuerWorld w;
    auto vc = w.issue({{"name", "Alice"}, {"dob", "1990-02-03"}, {"blood_type", "O-"}});
    auto audience = w.issuer.did;
    auto vp = credentials::create_vp(w.subject_did, w.subject_keys, {&vc}, {"blood_type"},
                                     audience, 100, w.directory);

    std::string serialized = canonical_text(vp.to_json());
    CHECK(serialized.find("O-") != std::string::npos);
    CHECK(serialized.find("Alice") == std::string::npos);
    CHECK(serialized.find("1990-02-03") == std::string::npos);
    for (const auto& claim : vc.claims) {
        if (claim.name != "blood_type") {
            CHECK(serialized.find(b58(claim.salt)) == std::string::npos);
        }
    }

    auto report = credentials::verify_vp(vp, w.l, w.local_docs(), audience, 2);
    CHECK(report.valid());
}

TEST_CASE("create_vp: disclosing everything reconstructs every digest") {
    IssuerWorld w;
    auto vc = w.issue({{"a", "1"}, {"b", "2"}, {"c", "3"}});
    auto vp = credentials::create_vp(w.subject_did, w.subject_keys, {&vc}, {"a", "b", "c"},
                                     w.issuer.did, std::nullopt, w.directory);
    REQUIRE(vp.disclosed.size() == 1);
    CHECK(vp.disclosed[0].disclosed.size() == 3);
    auto report = credentials::verify_vp(vp, w.l, w.local_docs(), w.issuer.did, 2);
    CHECK(report.digests_ok);
    CHECK(report.valid());
}

TEST_CASE("create_vp: unknown claim and empty disclosure are errors") {
    IssuerWorld w;
    auto vc = w.issue({{"rx", "blood test"}});
    CHECK_THROWS_AS(credentials::create_vp(w.subject_did, w.subject_keys, {&vc}, {"weight"},
                                           w.issuer.did, std::nullopt, w.directory),
                    Error);
    CHECK_THROWS_AS(credentials::create_vp(w.subject_did, w.subject_keys, {&vc}, {},
                                           w.issuer.did, std::nullopt, w.directory),
                    Error);
}

TEST_CASE("verify_vp: audience replay and expiry are rejected") {
    IssuerWorld w;
    auto vc = w.issue({{"rx", "blood test"}});
    auto vp = credentials::create_vp(w.subject_did, w.subject_keys, {&vc}, {"rx"}, w.issuer.did,
                                     60, w.directory);

    auto good = credentials::verify_vp(vp, w.l, w.local_docs(), w.issuer.did, 10);
    CHECK(good.audience_ok);
    CHECK_FALSE(good.expired);
    CHECK(good.valid());

    auto other_audience = crypto::generate_keypair();
    auto [oid, odoc] =
        identity::create_did(identity::DidKind::Pairwise, other_audience, "mediator:main", 0);
    auto replayed = credentials::verify_vp(vp, w.l, w.local_docs(), oid, 10);
    CHECK_FALSE(replayed.audience_ok);
    CHECK_FALSE(replayed.valid());

    auto late = credentials::verify_vp(vp, w.l, w.local_docs(), w.issuer.did, 61);
    CHECK(late.expired);
    CHECK_FALSE(late.valid());
}

TEST_CASE("hiding: presentations differing only in undisclosed values are structurally equal") {
    IssuerWorld w;
    auto vc1 = w.issue({{"shared", "same"}, {"hidden", "value-one"}});
    auto vc2 = w.issue({{"shared", "same"}, {"hidden", "value-two"}});

    auto vp1 = credentials::create_vp(w.subject_did, w.subject_keys, {&vc1}, {"shared"},
                                      w.issuer.did, std::nullopt, w.directory);
    auto vp2 = credentials::create_vp(w.subject_did, w.subject_keys, {&vc2}, {"shared"},
                                      w.issuer.did, std::nullopt, w.directory);

    // disclosed sections: same names and values, salts aside
    REQUIRE(vp1.disclosed.size() == vp2.disclosed.size());
    for (size_t i = 0; i < vp1.disclosed.size(); ++i) {
        const auto& d1 = vp1.disclosed[i].disclosed;
        const auto& d2 = vp2.disclosed[i].disclosed;
        REQUIRE(d1.size() == d2.size());
        for (size_t k = 0; k < d1.size(); ++k) {
            CHECK(d1[k].name == d2[k].name);
            CHECK(d1[k].value == d2[k].value);
        }
        CHECK(vp1.disclosed[i].envelope.claims.empty());
        CHECK(vp2.disclosed[i].envelope.claims.empty());
        CHECK(vp1.disclosed[i].envelope.claim_digests.size() ==
              vp2.disclosed[i].envelope.claim_digests.size());
    }
    CHECK(canonical_text(vp1.to_json()).find("value-one") == std::string::npos);
    CHECK(canonical_text(vp2.to_json()).find("value-two") == std::string::npos);
}

TEST_CASE("binding: mutated disclosed values break digest membership") {
    IssuerWorld w;
    auto vc = w.issue({{"rx", "blood test"}, {"dose", "5ml"}});
    auto vp = credentials::create_vp(w.subject_did, w.subject_keys, {&vc}, {"rx", "dose"},
                                     w.issuer.did, std::nullopt, w.directory);

    std::mt19937_64 rng(0xB15D);
    for (int i = 0; i < 100; ++i) {
        auto mutated = vp;
        auto& claim = mutated.disclosed[0].disclosed[rng() % 2];
        claim.value += static_cast<char>('a' + (rng() % 26));
        auto report = credentials::verify_vp(mutated, w.l, w.local_docs(), w.issuer.did, 2);
        CHECK_FALSE(report.digests_ok);
        CHECK_FALSE(report.valid());
    }
}

TEST_CASE("property: verify(create) holds for random claim sets of size 1..20") {
    IssuerWorld w;
    std::mt19937_64 rng(0x9E0F);
    for (int trial = 0; trial < 25; ++trial) {
        size_t n = 1 + rng() % 20;
        std::vector<std::pair<std::string, std::string>> claims;
        std::vector<std::string> names;
        for (size_t i = 0; i < n; ++i) {
            std::string name = "claim" + std::to_string(i);
            claims.emplace_back(name, "value" + std::to_string(rng() % 1000));
            names.push_back(name);
        }
        auto vc = w.issue(claims, 10 + trial);
        // disclose a random nonempty subset
        std::vector<std::string> disclose;
        for (const auto& name : names) {
            if (rng() % 2 == 0) {
                disclose.push_back(name);
            }
        }
        if (disclose.empty()) {
            disclose.push_back(names[rng() % names.size()]);
        }
        auto vp = credentials::create_vp(w.subject_did, w.subject_keys, {&vc}, disclose,
                                         w.issuer.did, std::nullopt, w.directory);
        auto report = credentials::verify_vp(vp, w.l, w.local_docs(), w.issuer.did, 11 + trial);
        REQUIRE(report.valid());
    }
}

TEST_CASE("golden fixture: canonical credential bytes are pinned") {
    crypto::seed_rng(20260211);
    ledger::Ledger l;
    auto issuer_keys = crypto::keypair_from_seed(crypto::random_array<32>());
    auto [idid, idoc] = identity::create_did(identity::DidKind::Anywise, issuer_keys,
                                             "mediator:main", 1);
    l.register_member(idid.id_string, ledger::Party::Practitioner);
    l.put_did(idid.id_string, idid, idoc, 1);

    auto subject_keys = crypto::keypair_from_seed(crypto::random_array<32>());
    auto [sdid, sdoc] = identity::create_did(identity::DidKind::Pairwise, subject_keys,
                                             "mediator:main", 1);
    auto [registry, genesis] = revocation::init_registry(idid, issuer_keys);
    l.anchor_registry_state(idid.id_string, genesis, 1);
    auto vc = credentials::issue_vc(idid, issuer_keys, registry, sdid,
                                    {{"rx", "complete blood count"}, {"dose", "n/a"}}, l, 2);
    crypto::use_system_rng();

    std::string actual = canonical_text(vc.to_json(true));
    std::ifstream golden(std::string(GOLDEN_DIR) + "/fixture_vc.json");
    REQUIRE(golden.good());
    std::string expected((std::istreambuf_iterator<char>(golden)),
                         std::istreambuf_iterator<char>());
    while (!expected.empty() && (expected.back() == '\n' || expected.back() == '\r')) {
        expected.pop_back();
    }
    CHECK(actual == expected);
}
