#pragma once

#include <algorithm>
#include <cstdint>
#include <string>
#include <vector>

#include "y00lab/errors.hpp"

namespace y00lab {

/// One bit per element, values 0/1. Index 0 is the first bit emitted by a
/// generator, or the most significant bit of a word being assembled.
using Bits = std::vector<std::uint8_t>;

inline bool any_bit(const Bits& b) {
    return std::any_of(b.begin(), b.end(), [](std::uint8_t v) { return v != 0; });
}

inline Bits xor_bits(const Bits& a, const Bits& b) {
    if (a.size() != b.size())
        throw config_error("xor_bits: length mismatch");
    Bits out(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] ^ b[i];
    return out;
}

inline std::uint8_t parity(const Bits& b) {
    std::uint8_t p = 0;
    for (auto v : b) p ^= v;
    return p;
}

/// MSB-first word assembly: bits[0] lands in the top bit.
inline std::uint64_t word_msb_first(const Bits& b, std::size_t pos, std::size_t width) {
    std::uint64_t w = 0;
    for (std::size_t i = 0; i < width; ++i) w = (w << 1) | b.at(pos + i);
    return w;
}

/// MSB-first expansion of the low `width` bits of `w`.
inline Bits bits_of_word(std::uint64_t w, std::size_t width) {
    Bits out(width);
    for (std::size_t i = 0; i < width; ++i)
        out[i] = static_cast<std::uint8_t>((w >> (width - 1 - i)) & 1u);
    return out;
}

/// Parses a hex string into `width` bits, MSB-first, left-padded with zeros.
/// "ACE1" with width 16 gives 1010 1100 1110 0001.
inline Bits bits_from_hex(const std::string& hex, std::size_t width) {
    Bits all;
    all.reserve(hex.size() * 4);
    for (char c : hex) {
        int v;
        if (c >= '0' && c <= '9') v = c - '0';
        else if (c >= 'a' && c <= 'f') v = 10 + (c - 'a');
        else if (c >= 'A' && c <= 'F') v = 10 + (c - 'A');
        else throw config_error("bits_from_hex: invalid hex digit");
        for (int i = 3; i >= 0; --i) all.push_back(static_cast<std::uint8_t>((v >> i) & 1));
    }
    if (all.size() > width) {
        // leading bits beyond the width must be zero padding
        for (std::size_t i = 0; i + width < all.size() + 1 && i < all.size() - width; ++i)
            if (all[i]) throw config_error("bits_from_hex: value wider than requested width");
        return Bits(all.end() - static_cast<std::ptrdiff_t>(width), all.end());
    }
    Bits out(width - all.size(), 0);
    out.insert(out.end(), all.begin(), all.end());
    return out;
}

inline std::string hex_from_bits(const Bits& b) {
    static const char* digits = "0123456789abcdef";
    std::string out;
    std::size_t n = b.size();
    std::size_t pad = (4 - n % 4) % 4;
    int v = 0, have = static_cast<int>(pad);
    for (std::size_t i = 0; i < n; ++i) {
        v = (v << 1) | b[i];
        if (++have == 4) { out.push_back(digits[v]); v = 0; have = 0; }
    }
    return out.empty() ? "0" : out;
}

inline bool is_power_of_two(std::uint64_t v) { return v != 0 && (v & (v - 1)) == 0; }

inline unsigned log2_exact(std::uint64_t v) {
    if (!is_power_of_two(v)) throw config_error("log2_exact: not a power of two");
    unsigned n = 0;
    while (v > 1) { v >>= 1; ++n; }
    return n;
}

} // namespace y00lab
