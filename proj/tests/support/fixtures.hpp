#pragma once

#include "ssi/flows.hpp"
#include "ssi/world.hpp"

namespace testutil {

struct LedgerActor {
    ssi::crypto::KeyPair keys;
    ssi::identity::Did did;
    ssi::identity::DidDocument doc;
};

/// Key pair + anywise DID, registered as a ledger member and on the dids
/// channel. Bypasses the CA/MSP path for ledger-focused tests.
inline LedgerActor make_registered_actor(ssi::ledger::Ledger& ledger, ssi::ledger::Party party,
                                         uint64_t now = 0) {
    LedgerActor actor;
    actor.keys = ssi::crypto::generate_keypair();
    auto [did, doc] =
        ssi::identity::create_did(ssi::identity::DidKind::Anywise, actor.keys, "mediator:main",
                                  now);
    actor.did = did;
    actor.doc = doc;
    ledger.register_member(did.id_string, party);
    ledger.put_did(did.id_string, did, doc, now);
    return actor;
}

/// Wires a pairwise connection between two wallets directly (documents
/// exchanged out of band), with mediation grants for both sides.
inline void connect_wallets(ssi::agents::Wallet& a, ssi::agents::Wallet& b,
                            ssi::agents::Mediator& mediator, uint64_t now = 0) {
    auto [adid, adoc] =
        a.create_did(ssi::identity::DidKind::Pairwise, b.owner, mediator.endpoint(), now);
    auto [bdid, bdoc] =
        b.create_did(ssi::identity::DidKind::Pairwise, a.owner, mediator.endpoint(), now);
    mediator.request_mediation(adoc, now);
    mediator.request_mediation(bdoc, now);
    ssi::agents::Connection ca;
    ca.their_doc = bdoc;
    a.connections[b.owner] = ca;
    ssi::agents::Connection cb;
    cb.their_doc = adoc;
    b.connections[a.owner] = cb;
}

/// Patient + practitioner, onboarded and connected, ready for issuance.
inline ssi::World make_clinic_world() {
    ssi::World world = ssi::World::create();
    ssi::flows::flow_onboard(world, "alice", ssi::ledger::Role::Patient);
    ssi::flows::flow_onboard(world, "bob", ssi::ledger::Role::Practitioner);
    ssi::flows::flow_connect(world, "alice", "bob");
    return world;
}

}  // namespace testutil
