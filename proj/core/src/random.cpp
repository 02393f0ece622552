#include "ssi/random.hpp"

#include <sodium.h>

#include <cstring>
#include <mutex>

#include "ssi/errors.hpp"

namespace ssi::crypto {

namespace {

struct RngState {
    std::mutex mu;
    bool deterministic = false;
    ByteArray<32> key{};
    uint64_t block = 0;
};

RngState& state() {
    static RngState s;
    return s;
}

void ensure_sodium() {
    static const int rc = sodium_init();
    if (rc < 0) {
        raise(Errc::EntropyUnavailable, "sodium_init failed");
    }
}

}  // namespace

void random_bytes(std::span<uint8_t> out) {
    ensure_sodium();
    auto& s = state();
    std::lock_guard lock(s.mu);
    if (!s.deterministic) {
        randombytes_buf(out.data(), out.size());
        return;
    }
    // One fresh 8-byte nonce per call; the stream is keyed by the seed.
    uint8_t nonce[crypto_stream_chacha20_NONCEBYTES] = {0};
    uint64_t n = s.block++;
    for (int i = 0; i < 8; ++i) {
        nonce[i] = static_cast<uint8_t>(n >> (8 * i));
    }
    crypto_stream_chacha20(out.data(), out.size(), nonce, s.key.data());
}

Bytes random_bytes(size_t n) {
    Bytes out(n);
    random_bytes(std::span<uint8_t>(out.data(), out.size()));
    return out;
}

void seed_rng(uint64_t seed) {
    ensure_sodium();
    auto& s = state();
    std::lock_guard lock(s.mu);
    uint8_t seed_bytes[16] = {0};
    for (int i = 0; i < 8; ++i) {
        seed_bytes[i] = static_cast<uint8_t>(seed >> (8 * i));
    }
    crypto_hash_sha256(s.key.data(), seed_bytes, sizeof(seed_bytes));
    s.block = 0;
    s.deterministic = true;
}

void use_system_rng() {
    auto& s = state();
    std::lock_guard lock(s.mu);
    s.deterministic = false;
}

}  // namespace ssi::crypto
