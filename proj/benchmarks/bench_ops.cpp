#include <benchmark/benchmark.h>

#include "ssi/agents.hpp"
#include "ssi/credentials.hpp"
#include "ssi/flows.hpp"
#include "ssi/revocation.hpp"
#include "ssi/world.hpp"

using namespace ssi;

namespace {

revocation::Cid counter_cid(uint64_t n) {
    revocation::Cid cid{};
    for (int i = 0; i < 8; ++i) {
        cid[i] = static_cast<uint8_t>(n >> (8 * i));
    }
    return cid;
}

void BM_Sha256(benchmark::State& state) {
    Bytes data = crypto::random_bytes(static_cast<size_t>(state.range(0)));
    for (auto _ : state) {
        auto digest = crypto::hash(as_span(data));
        benchmark::DoNotOptimize(digest);
    }
    state.SetBytesProcessed(static_cast<int64_t>(state.iterations()) * state.range(0));
}
BENCHMARK(BM_Sha256)->Arg(64)->Arg(1024)->Arg(64 * 1024);

void BM_Ed25519Sign(benchmark::State& state) {
    auto kp = crypto::generate_keypair();
    Bytes message = crypto::random_bytes(256);
    for (auto _ : state) {
        auto sig = crypto::sign(kp.private_key, message);
        benchmark::DoNotOptimize(sig);
    }
}
BENCHMARK(BM_Ed25519Sign);

void BM_Ed25519Verify(benchmark::State& state) {
    auto kp = crypto::generate_keypair();
    Bytes message = crypto::random_bytes(256);
    auto sig = crypto::sign(kp.private_key, message);
    for (auto _ : state) {
        bool ok = crypto::verify(kp.public_key, message, sig);
        benchmark::DoNotOptimize(ok);
    }
}
BENCHMARK(BM_Ed25519Verify);

void BM_AeadRoundtrip(benchmark::State& state) {
    auto key = crypto::random_array<32>();
    Bytes plaintext = crypto::random_bytes(static_cast<size_t>(state.range(0)));
    for (auto _ : state) {
        auto ct = crypto::aead_encrypt(key, plaintext, {});
        auto pt = crypto::aead_decrypt(key, ct, {});
        benchmark::DoNotOptimize(pt);
    }
    state.SetBytesProcessed(static_cast<int64_t>(state.iterations()) * state.range(0));
}
BENCHMARK(BM_AeadRoundtrip)->Arg(256)->Arg(16 * 1024);

void BM_MerkleRoot(benchmark::State& state) {
    std::vector<revocation::Cid> cids;
    for (int64_t i = 0; i < state.range(0); ++i) {
        cids.push_back(counter_cid(static_cast<uint64_t>(i)));
    }
    for (auto _ : state) {
        auto root = revocation::merkle_root(cids);
        benchmark::DoNotOptimize(root);
    }
}
BENCHMARK(BM_MerkleRoot)->Arg(16)->Arg(256)->Arg(1024);

void BM_ProveNonRevocation(benchmark::State& state) {
    auto keys = crypto::generate_keypair();
    auto [did, doc] = identity::create_did(identity::DidKind::Anywise, keys, "mediator:main", 0);
    auto [registry, genesis] = revocation::init_registry(did, keys);
    for (int64_t i = 0; i < state.range(0); ++i) {
        revocation::register_credential(registry, keys, counter_cid(static_cast<uint64_t>(i)));
    }
    for (auto _ : state) {
        auto proof = revocation::prove_non_revocation(registry, counter_cid(3));
        benchmark::DoNotOptimize(proof);
    }
}
BENCHMARK(BM_ProveNonRevocation)->Arg(256)->Arg(1024);

void BM_CreateDid(benchmark::State& state) {
    for (auto _ : state) {
        auto kp = crypto::generate_keypair();
        auto created = identity::create_did(identity::DidKind::Pairwise, kp, "mediator:main", 0);
        benchmark::DoNotOptimize(created);
    }
}
BENCHMARK(BM_CreateDid);

void BM_EnvelopeRoundtrip(benchmark::State& state) {
    World world = World::create();
    flows::flow_onboard(world, "alice", ledger::Role::Patient);
    flows::flow_onboard(world, "bob", ledger::Role::Practitioner);
    flows::flow_connect(world, "alice", "bob");
    auto& alice = world.wallet("alice");
    auto& bob = world.wallet("bob");
    const std::string bob_did = bob.did_of("alice").id_string;
    uint64_t n = 0;
    for (auto _ : state) {
        world.mediator.deliver(alice.pack_envelope("bob", Json{{"n", n++}}));
        auto envs = world.mediator.pickup(bob_did, 1);
        auto msg = bob.unpack_envelope(envs.front(), world.mediator.doc());
        benchmark::DoNotOptimize(msg);
    }
}
BENCHMARK(BM_EnvelopeRoundtrip);

void BM_LedgerPutDid(benchmark::State& state) {
    World world = World::create();
    for (auto _ : state) {
        state.PauseTiming();
        auto kp = crypto::generate_keypair();
        auto [did, doc] =
            identity::create_did(identity::DidKind::Anywise, kp, "mediator:main", 0);
        world.ledger.register_member(did.id_string, ledger::Party::Patient);
        state.ResumeTiming();
        auto tx = world.ledger.put_did(did.id_string, did, doc, 0);
        benchmark::DoNotOptimize(tx);
    }
}
BENCHMARK(BM_LedgerPutDid);

}  // namespace

BENCHMARK_MAIN();
