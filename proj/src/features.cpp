#include "codeprov/features.hpp"

#include <string_view>

#include "codeprov/unicode.hpp"

namespace codeprov {

namespace {

bool is_space_or_tab(char c) { return c == ' ' || c == '\t'; }

}  // namespace

FeatureVector extract_features(const std::string& code) {
    FeatureVector fv;
    if (code.empty()) return fv;

    // Punctuation is counted over the whole text: not a word char, not
    // whitespace (Unicode semantics, matching [^\w\s]).
    std::string_view text(code);
    for (std::size_t pos = 0; pos < text.size();) {
        auto d = uni::decode_utf8(text, pos);
        if (!uni::is_word(d.cp) && !uni::is_space(d.cp)) ++fv.punctuation;
        pos += d.length;
    }

    // Line counters. Split on '\n'; a terminal newline contributes no
    // extra empty line.
    std::size_t start = 0;
    while (start <= code.size()) {
        std::size_t end = code.find('\n', start);
        bool last = end == std::string::npos;
        std::string_view line(code.data() + start, (last ? code.size() : end) - start);
        if (last && line.empty() && start > 0) break;  // dropped trailing segment

        std::size_t lead = 0;
        while (lead < line.size() && is_space_or_tab(line[lead])) ++lead;
        std::size_t trail = 0;
        while (trail < line.size() - lead && is_space_or_tab(line[line.size() - 1 - trail]))
            ++trail;

        fv.leading_whitespace += lead;
        fv.trailing_whitespace += trail;
        if (!line.empty() && is_space_or_tab(line[0])) ++fv.lines_leading_whitespace;

        // Trimming strips spaces/tabs from both ends, so every space left
        // in `trimmed` is strictly interior.
        std::string_view trimmed = line.substr(lead, line.size() - lead - trail);
        if (trimmed.empty() || trimmed == "\r") ++fv.empty_lines;
        for (char c : trimmed)
            if (c == ' ') ++fv.inline_whitespace;

        std::uint64_t cps = 0;
        for (std::size_t pos = 0; pos < line.size();) {
            pos += uni::decode_utf8(line, pos).length;
            ++cps;
        }
        if (cps > fv.max_line_length) fv.max_line_length = cps;

        if (last) break;
        start = end + 1;
    }

    return fv;
}

}  // namespace codeprov
