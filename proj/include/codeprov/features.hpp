#pragma once

#include <array>
#include <cstdint>
#include <string>

#include "codeprov/common.hpp"

namespace codeprov {

// The seven white-box style counters, in export order.
struct FeatureVector {
    std::uint64_t leading_whitespace = 0;        // n_lw
    std::uint64_t empty_lines = 0;               // n_el
    std::uint64_t inline_whitespace = 0;         // n_iw
    std::uint64_t punctuation = 0;               // n_pt
    std::uint64_t max_line_length = 0;           // n_ml, in codepoints
    std::uint64_t trailing_whitespace = 0;       // n_tw
    std::uint64_t lines_leading_whitespace = 0;  // n_lwl

    std::array<double, 7> as_array() const {
        return {static_cast<double>(leading_whitespace),
                static_cast<double>(empty_lines),
                static_cast<double>(inline_whitespace),
                static_cast<double>(punctuation),
                static_cast<double>(max_line_length),
                static_cast<double>(trailing_whitespace),
                static_cast<double>(lines_leading_whitespace)};
    }
    DenseVector as_vector() const {
        auto a = as_array();
        return DenseVector(a.begin(), a.end());
    }

    bool operator==(const FeatureVector&) const = default;
};

inline constexpr std::array<const char*, 7> kFeatureNames = {
    "n_lw", "n_el", "n_iw", "n_pt", "n_ml", "n_tw", "n_lwl"};

// Counting rules:
//   - lines are `code` split on "\n"; one trailing empty segment from a
//     terminal newline is dropped
//   - leading/trailing whitespace counts spaces and tabs per line
//   - inline whitespace counts spaces strictly inside the trimmed content
//   - punctuation counts chars that are neither word chars (letters,
//     digits, underscore; Unicode) nor whitespace, over the whole text
//   - max line length and punctuation are measured in codepoints
FeatureVector extract_features(const std::string& code);

}  // namespace codeprov
