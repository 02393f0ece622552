#pragma once

#include <optional>
#include <string>

#include "ssi/bytes.hpp"

namespace ssi::base58 {

/// Bitcoin-alphabet base58 (no checksum). Leading zero bytes map to '1'.
std::string encode(std::span<const uint8_t> data);

std::optional<Bytes> decode(std::string_view text);

}  // namespace ssi::base58
