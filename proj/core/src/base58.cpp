#include "ssi/base58.hpp"

#include <algorithm>
#include <array>

namespace ssi::base58 {

namespace {

constexpr char kAlphabet[] = "123456789ABCDEFGHJKLMNPQRSTUVWXYZabcdefghijkmnopqrstuvwxyz";

std::array<int8_t, 128> build_reverse_table() {
    std::array<int8_t, 128> table{};
    table.fill(-1);
    for (int i = 0; i < 58; ++i) {
        table[static_cast<size_t>(kAlphabet[i])] = static_cast<int8_t>(i);
    }
    return table;
}

const std::array<int8_t, 128> kReverse = build_reverse_table();

}  // namespace

std::string encode(std::span<const uint8_t> data) {
    size_t zeros = 0;
    while (zeros < data.size() && data[zeros] == 0) {
        ++zeros;
    }

    // log(256)/log(58) ~ 1.365
    std::vector<uint8_t> b58((data.size() - zeros) * 138 / 100 + 1, 0);
    size_t length = 0;
    for (size_t i = zeros; i < data.size(); ++i) {
        int carry = data[i];
        size_t j = 0;
        for (auto it = b58.rbegin(); (carry != 0 || j < length) && it != b58.rend(); ++it, ++j) {
            carry += 256 * (*it);
            *it = static_cast<uint8_t>(carry % 58);
            carry /= 58;
        }
        length = j;
    }

    std::string out(zeros, '1');
    auto it = b58.begin() + static_cast<std::ptrdiff_t>(b58.size() - length);
    while (it != b58.end() && *it == 0) {
        ++it;
    }
    for (; it != b58.end(); ++it) {
        out += kAlphabet[*it];
    }
    return out;
}

std::optional<Bytes> decode(std::string_view text) {
    size_t zeros = 0;
    while (zeros < text.size() && text[zeros] == '1') {
        ++zeros;
    }

    std::vector<uint8_t> b256((text.size() - zeros) * 733 / 1000 + 1, 0);
    size_t length = 0;
    for (size_t i = zeros; i < text.size(); ++i) {
        unsigned char c = static_cast<unsigned char>(text[i]);
        if (c >= 128 || kReverse[c] < 0) {
            return std::nullopt;
        }
        int carry = kReverse[c];
        size_t j = 0;
        for (auto it = b256.rbegin(); (carry != 0 || j < length) && it != b256.rend(); ++it, ++j) {
            carry += 58 * (*it);
            *it = static_cast<uint8_t>(carry % 256);
            carry /= 256;
        }
        length = j;
    }

    Bytes out(zeros, 0);
    auto it = b256.begin() + static_cast<std::ptrdiff_t>(b256.size() - length);
    while (it != b256.end() && *it == 0) {
        ++it;
    }
    out.insert(out.end(), it, b256.end());
    return out;
}

}  // namespace ssi::base58
