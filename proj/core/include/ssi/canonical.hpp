#pragma once

#include <json.hpp>

#include "ssi/base58.hpp"
#include "ssi/bytes.hpp"
#include "ssi/errors.hpp"

namespace ssi {

/// nlohmann object with the default (sorted-key) map: dumping one of these
/// without indentation is the project's canonical byte form.
using Json = nlohmann::json;

inline std::string canonical_text(const Json& j) {
    return j.dump();
}

inline Bytes canonical_bytes(const Json& j) {
    return to_bytes(j.dump());
}

inline std::string b58(std::span<const uint8_t> bytes) {
    return base58::encode(bytes);
}

template <size_t N>
std::string b58(const ByteArray<N>& bytes) {
    return base58::encode(as_span(bytes));
}

inline Bytes from_b58(const std::string& text) {
    auto decoded = base58::decode(text);
    if (!decoded) {
        raise(Errc::MalformedPayload, "invalid base58");
    }
    return *decoded;
}

template <size_t N>
ByteArray<N> from_b58_array(const std::string& text) {
    Bytes decoded = from_b58(text);
    if (decoded.size() != N) {
        raise(Errc::MalformedPayload, "base58 field has wrong length");
    }
    ByteArray<N> out{};
    std::copy(decoded.begin(), decoded.end(), out.begin());
    return out;
}

}  // namespace ssi
