#include "ssi/wire.hpp"

namespace ssi::wire {

Json aead_to_json(const crypto::AeadCiphertext& ct) {
    return Json{{"nonce", b58(ct.nonce)}, {"body", b58(as_span(ct.body))}, {"tag", b58(ct.tag)}};
}

crypto::AeadCiphertext aead_from_json(const Json& j) {
    crypto::AeadCiphertext ct;
    ct.nonce = from_b58_array<crypto::kNonceBytes>(j.at("nonce"));
    ct.body = from_b58(j.at("body"));
    ct.tag = from_b58_array<crypto::kTagBytes>(j.at("tag"));
    return ct;
}

Json hybrid_to_json(const crypto::HybridCiphertext& ct) {
    return Json{{"eph", b58(ct.ephemeral_public)},
                {"key", aead_to_json(ct.wrapped_key)},
                {"body", aead_to_json(ct.body)}};
}

crypto::HybridCiphertext hybrid_from_json(const Json& j) {
    crypto::HybridCiphertext ct;
    ct.ephemeral_public = from_b58_array<crypto::kKeyBytes>(j.at("eph"));
    ct.wrapped_key = aead_from_json(j.at("key"));
    ct.body = aead_from_json(j.at("body"));
    return ct;
}

}  // namespace ssi::wire
