#pragma once

#include <map>
#include <string>

#include "ssi/agents.hpp"
#include "ssi/clock.hpp"
#include "ssi/credentials.hpp"
#include "ssi/ledger.hpp"

namespace ssi {

/// One simulated deployment: trust roots, ledger, the shared cloud agent,
/// all wallets and the published revocation registries. Value type, so a
/// snapshot is a plain copy.
struct World {
    SimClock clock;
    ledger::Ledger ledger;
    ledger::CertificateAuthority ca;
    ledger::MembershipService msp;
    agents::Mediator mediator;
    std::map<std::string, agents::Wallet> wallets;
    credentials::RegistryDirectory registries;

    static World create();

    agents::Wallet& wallet(const std::string& name);
    const agents::Wallet& wallet(const std::string& name) const;

    /// Finds the wallet controlling `did_id`, if any.
    agents::Wallet* wallet_by_did(const std::string& did_id);
};

}  // namespace ssi
