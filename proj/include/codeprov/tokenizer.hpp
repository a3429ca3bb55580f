#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "codeprov/common.hpp"

namespace codeprov {

using TokenId = std::int64_t;

struct TokenSequence {
    std::vector<TokenId> ids;
    std::size_t source_len_bytes = 0;

    std::size_t size() const { return ids.size(); }
    bool empty() const { return ids.empty(); }
};

// Everything downstream (TF-IDF, CBOW, Bayes) depends only on this
// interface; BPE and the lexical fallback are interchangeable.
class Tokenizer {
public:
    virtual ~Tokenizer() = default;
    virtual TokenSequence encode(std::string_view text) const = 0;
    // Human-readable text of a token id, for reports.
    virtual std::string token_text(TokenId id) const = 0;
    virtual std::string name() const = 0;
};

// Byte-level BPE vocabulary in the "base64(token_bytes) rank" export
// format. Ranks double as token ids and as merge priorities: the pair
// whose concatenation has the lowest rank merges first.
class Vocabulary {
public:
    Vocabulary() = default;

    std::size_t size() const { return by_rank_.size(); }
    // Rank of a byte sequence, or -1 if absent.
    TokenId rank_of(std::string_view bytes) const;
    const std::string& bytes_of(TokenId rank) const;
    bool has_rank(TokenId rank) const;

    void add(std::string bytes, TokenId rank);
    void add_special(std::string text, TokenId id);
    const std::map<std::string, TokenId>& special_tokens() const { return special_; }

private:
    std::unordered_map<std::string, TokenId> rank_by_bytes_;
    std::unordered_map<TokenId, std::string> by_rank_;
    std::map<std::string, TokenId> special_;
};

// Lines of "base64(token_bytes) rank"; malformed lines and duplicate
// ranks or byte sequences are errors carrying the line number.
Vocabulary load_bpe_vocab(const std::string& path);

// The pre-tokenization pattern of the cl100k_base encoding. The scanner
// in BpeTokenizer hand-implements these alternation rules over Unicode
// codepoints; correctness is pinned by fixture tests, not by this text.
inline constexpr const char* kCl100kPattern =
    R"('(?i:[sdmt]|ll|ve|re)|[^\r\n\p{L}\p{N}]?+\p{L}+|\p{N}{1,3}| ?[^\s\p{L}\p{N}]++[\r\n]*|\s*[\r\n]|\s+(?!\S)|\s+)";

class BpeTokenizer : public Tokenizer {
public:
    explicit BpeTokenizer(Vocabulary vocab) : vocab_(std::move(vocab)) {}

    TokenSequence encode(std::string_view text) const override;
    std::string decode(const std::vector<TokenId>& ids) const;
    std::string token_text(TokenId id) const override;
    std::string name() const override { return "bpe"; }

    const Vocabulary& vocab() const { return vocab_; }
    // Byte offsets of the pre-tokenization piece boundaries; exposed for
    // the fixture tests.
    std::vector<std::pair<std::size_t, std::size_t>> pretokenize(std::string_view text) const;

private:
    Vocabulary vocab_;
};

// Deterministic fallback that needs no vocabulary file: maximal runs of
// identifier chars or digits, single punctuation chars, whitespace
// dropped. Ids come from an interned-string table and are stable only
// within one tokenizer instance.
class LexicalTokenizer : public Tokenizer {
public:
    TokenSequence encode(std::string_view text) const override;
    std::string token_text(TokenId id) const override;
    std::string name() const override { return "lexical"; }

    // Token strings in id order (snapshot).
    std::vector<std::string> token_table() const;

private:
    mutable std::mutex mu_;
    mutable std::unordered_map<std::string, TokenId> ids_;
    mutable std::vector<std::string> texts_;
};

}  // namespace codeprov
