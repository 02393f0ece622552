#pragma once

#include <cstdint>

#include "ssi/bytes.hpp"

namespace ssi::crypto {

/// Fills `out` from the active randomness source. Default source is the OS
/// CSPRNG; after seed_rng() it is a deterministic stream (scenario replay).
void random_bytes(std::span<uint8_t> out);

Bytes random_bytes(size_t n);

template <size_t N>
ByteArray<N> random_array() {
    ByteArray<N> a{};
    random_bytes(std::span<uint8_t>(a.data(), a.size()));
    return a;
}

/// Switches the process to a deterministic ChaCha20 stream derived from
/// `seed`. Every subsequent key, salt, nonce and id is reproducible.
void seed_rng(uint64_t seed);

/// Restores the OS entropy source.
void use_system_rng();

}  // namespace ssi::crypto
