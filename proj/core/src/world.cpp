#include "ssi/world.hpp"

#include "ssi/errors.hpp"

namespace ssi {

World World::create() {
    World world;
    world.ledger.register_member(world.msp.did_id(), ledger::Party::Msp);
    return world;
}

agents::Wallet& World::wallet(const std::string& name) {
    auto it = wallets.find(name);
    if (it == wallets.end()) {
        raise(Errc::NotFound, "no wallet named " + name);
    }
    return it->second;
}

const agents::Wallet& World::wallet(const std::string& name) const {
    auto it = wallets.find(name);
    if (it == wallets.end()) {
        raise(Errc::NotFound, "no wallet named " + name);
    }
    return it->second;
}

agents::Wallet* World::wallet_by_did(const std::string& did_id) {
    for (auto& [name, wallet] : wallets) {
        if (wallet.keys.contains(did_id)) {
            return &wallet;
        }
    }
    return nullptr;
}

}  // namespace ssi
