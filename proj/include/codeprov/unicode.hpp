#pragma once

#include <cstdint>
#include <string_view>

namespace codeprov::uni {

struct CodepointRange {
    std::uint32_t lo;
    std::uint32_t hi;
};

#include "codeprov/unicode_tables.inc"

namespace detail {
template <std::size_t N>
bool in_ranges(const CodepointRange (&ranges)[N], std::uint32_t cp) {
    std::size_t lo = 0, hi = N;
    while (lo < hi) {
        std::size_t mid = (lo + hi) / 2;
        if (cp < ranges[mid].lo)
            hi = mid;
        else if (cp > ranges[mid].hi)
            lo = mid + 1;
        else
            return true;
    }
    return false;
}
}  // namespace detail

inline bool is_letter(std::uint32_t cp) { return detail::in_ranges(kLetterRanges, cp); }
inline bool is_number(std::uint32_t cp) { return detail::in_ranges(kNumberRanges, cp); }
inline bool is_space(std::uint32_t cp) { return detail::in_ranges(kSpaceRanges, cp); }
inline bool is_word(std::uint32_t cp) { return detail::in_ranges(kWordRanges, cp); }

struct Decoded {
    std::uint32_t cp;      // codepoint, or 0x110000 + byte for invalid sequences
    std::uint32_t length;  // bytes consumed, >= 1
};

// Decode one UTF-8 sequence at `pos`. Invalid bytes are passed through one
// at a time as out-of-range sentinels so they never match any class table
// and byte-exactness is preserved downstream.
inline Decoded decode_utf8(std::string_view s, std::size_t pos) {
    const auto b0 = static_cast<unsigned char>(s[pos]);
    if (b0 < 0x80) return {b0, 1};
    auto invalid = [&]() -> Decoded { return {0x110000u + b0, 1}; };
    std::uint32_t cp = 0;
    std::uint32_t len = 0;
    if ((b0 & 0xE0) == 0xC0) {
        cp = b0 & 0x1Fu;
        len = 2;
    } else if ((b0 & 0xF0) == 0xE0) {
        cp = b0 & 0x0Fu;
        len = 3;
    } else if ((b0 & 0xF8) == 0xF0) {
        cp = b0 & 0x07u;
        len = 4;
    } else {
        return invalid();
    }
    if (pos + len > s.size()) return invalid();
    for (std::uint32_t i = 1; i < len; ++i) {
        const auto b = static_cast<unsigned char>(s[pos + i]);
        if ((b & 0xC0) != 0x80) return invalid();
        cp = (cp << 6) | (b & 0x3Fu);
    }
    // Reject overlong encodings and surrogates.
    if ((len == 2 && cp < 0x80) || (len == 3 && cp < 0x800) || (len == 4 && cp < 0x10000) ||
        (cp >= 0xD800 && cp <= 0xDFFF) || cp > 0x10FFFF) {
        return invalid();
    }
    return {cp, len};
}

inline void append_utf8(std::string& out, std::uint32_t cp) {
    if (cp < 0x80) {
        out.push_back(static_cast<char>(cp));
    } else if (cp < 0x800) {
        out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else if (cp < 0x10000) {
        out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else {
        out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    }
}

}  // namespace codeprov::uni
