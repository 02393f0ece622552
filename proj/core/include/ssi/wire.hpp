#pragma once

#include "ssi/canonical.hpp"
#include "ssi/crypto.hpp"

namespace ssi::wire {

Json aead_to_json(const crypto::AeadCiphertext& ct);
crypto::AeadCiphertext aead_from_json(const Json& j);

Json hybrid_to_json(const crypto::HybridCiphertext& ct);
crypto::HybridCiphertext hybrid_from_json(const Json& j);

}  // namespace ssi::wire
