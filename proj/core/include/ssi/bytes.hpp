#pragma once

#include <array>
#include <cstdint>
#include <cstring>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace ssi {

using Bytes = std::vector<uint8_t>;

template <std::size_t N>
using ByteArray = std::array<uint8_t, N>;

inline std::span<const uint8_t> as_span(const Bytes& b) {
    return {b.data(), b.size()};
}

inline std::span<const uint8_t> as_span(std::string_view s) {
    return {reinterpret_cast<const uint8_t*>(s.data()), s.size()};
}

template <std::size_t N>
std::span<const uint8_t> as_span(const ByteArray<N>& a) {
    return {a.data(), a.size()};
}

inline Bytes to_bytes(std::string_view s) {
    return Bytes(s.begin(), s.end());
}

inline std::string to_string(std::span<const uint8_t> b) {
    return std::string(reinterpret_cast<const char*>(b.data()), b.size());
}

/// Concatenates an arbitrary mix of byte spans into one buffer.
template <typename... Spans>
Bytes concat(Spans&&... parts) {
    const size_t total = (std::span<const uint8_t>(parts).size() + ... + size_t{0});
    Bytes out(total);
    size_t offset = 0;
    auto append = [&out, &offset](std::span<const uint8_t> p) {
        if (!p.empty()) {
            std::memcpy(out.data() + offset, p.data(), p.size());
            offset += p.size();
        }
    };
    (append(std::span<const uint8_t>(parts)), ...);
    return out;
}

}  // namespace ssi
