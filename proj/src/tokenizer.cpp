#include "codeprov/tokenizer.hpp"

#include <algorithm>
#include <fstream>
#include <limits>

#include "codeprov/unicode.hpp"

namespace codeprov {

namespace {

constexpr std::uint32_t kCR = 0x0D;
constexpr std::uint32_t kLF = 0x0A;

int base64_value(char c) {
    if (c >= 'A' && c <= 'Z') return c - 'A';
    if (c >= 'a' && c <= 'z') return c - 'a' + 26;
    if (c >= '0' && c <= '9') return c - '0' + 52;
    if (c == '+') return 62;
    if (c == '/') return 63;
    return -1;
}

std::string base64_decode(std::string_view in) {
    std::string out;
    out.reserve(in.size() * 3 / 4);
    int buf = 0, bits = 0;
    for (char c : in) {
        if (c == '=') break;
        int v = base64_value(c);
        if (v < 0) throw DataError("invalid base64 character");
        buf = (buf << 6) | v;
        bits += 6;
        if (bits >= 8) {
            bits -= 8;
            out.push_back(static_cast<char>((buf >> bits) & 0xFF));
        }
    }
    return out;
}

}  // namespace

TokenId Vocabulary::rank_of(std::string_view bytes) const {
    auto it = rank_by_bytes_.find(std::string(bytes));
    return it == rank_by_bytes_.end() ? -1 : it->second;
}

const std::string& Vocabulary::bytes_of(TokenId rank) const {
    auto it = by_rank_.find(rank);
    if (it == by_rank_.end())
        throw DataError("unknown token id " + std::to_string(rank));
    return it->second;
}

bool Vocabulary::has_rank(TokenId rank) const { return by_rank_.count(rank) != 0; }

void Vocabulary::add(std::string bytes, TokenId rank) {
    if (rank < 0) throw DataError("negative rank");
    if (by_rank_.count(rank)) throw DataError("duplicate rank " + std::to_string(rank));
    if (rank_by_bytes_.count(bytes)) throw DataError("duplicate token bytes");
    rank_by_bytes_.emplace(bytes, rank);
    by_rank_.emplace(rank, std::move(bytes));
}

void Vocabulary::add_special(std::string text, TokenId id) {
    special_[std::move(text)] = id;
}

Vocabulary load_bpe_vocab(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open vocabulary file: " + path);
    Vocabulary vocab;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        auto err = [&](const std::string& what) {
            return DataError(path + ": line " + std::to_string(line_no) + ": " + what);
        };
        std::size_t sp = line.find(' ');
        if (sp == std::string::npos || sp == 0 || sp + 1 >= line.size())
            throw err("expected \"base64 rank\"");
        std::string bytes;
        try {
            bytes = base64_decode(std::string_view(line).substr(0, sp));
        } catch (const DataError&) {
            throw err("invalid base64 token");
        }
        TokenId rank = 0;
        try {
            std::size_t used = 0;
            rank = std::stoll(line.substr(sp + 1), &used);
            if (used != line.size() - sp - 1) throw std::invalid_argument("");
        } catch (const std::exception&) {
            throw err("invalid rank");
        }
        try {
            vocab.add(std::move(bytes), rank);
        } catch (const DataError& e) {
            throw err(e.what());
        }
    }
    return vocab;
}

// ---------------------------------------------------------------------------
// Pre-tokenization: a hand-written scanner equivalent to kCl100kPattern.
// Alternatives are tried in pattern order at each position; each one
// matches greedily. See the fixture tests for the pinned behavior.

namespace {

struct Scanner {
    std::vector<std::uint32_t> cps;
    std::vector<std::size_t> offs;  // cps.size() + 1 byte offsets

    explicit Scanner(std::string_view text) {
        cps.reserve(text.size());
        offs.reserve(text.size() + 1);
        std::size_t pos = 0;
        while (pos < text.size()) {
            auto d = uni::decode_utf8(text, pos);
            cps.push_back(d.cp);
            offs.push_back(pos);
            pos += d.length;
        }
        offs.push_back(text.size());
    }

    std::size_t n() const { return cps.size(); }
    bool letter(std::size_t i) const { return uni::is_letter(cps[i]); }
    bool number(std::size_t i) const { return uni::is_number(cps[i]); }
    bool space(std::size_t i) const { return uni::is_space(cps[i]); }
    bool crlf(std::size_t i) const { return cps[i] == kCR || cps[i] == kLF; }

    // End (exclusive) of the piece starting at codepoint i; i < n().
    std::size_t match(std::size_t i) const {
        const std::size_t N = n();

        // '(?i:[sdmt]|ll|ve|re)
        if (cps[i] == '\'' && i + 1 < N) {
            auto lower = [&](std::size_t k) -> std::uint32_t {
                std::uint32_t c = cps[k];
                return (c >= 'A' && c <= 'Z') ? c + 32 : c;
            };
            std::uint32_t c1 = lower(i + 1);
            if (c1 == 's' || c1 == 'd' || c1 == 'm' || c1 == 't') return i + 2;
            if (i + 2 < N) {
                std::uint32_t c2 = lower(i + 2);
                if ((c1 == 'l' && c2 == 'l') || (c1 == 'v' && c2 == 'e') ||
                    (c1 == 'r' && c2 == 'e'))
                    return i + 3;
            }
        }

        // [^\r\n\p{L}\p{N}]?+\p{L}+
        {
            std::size_t p = i;
            if (!crlf(p) && !letter(p) && !number(p)) ++p;  // optional, possessive
            if (p < N && letter(p)) {
                while (p < N && letter(p)) ++p;
                return p;
            }
        }

        // \p{N}{1,3}
        if (number(i)) {
            std::size_t p = i + 1;
            while (p < N && p < i + 3 && number(p)) ++p;
            return p;
        }

        // ?[^\s\p{L}\p{N}]++[\r\n]*   (optional leading space)
        {
            std::size_t p = i;
            if (cps[p] == ' ') ++p;
            std::size_t q = p;
            while (q < N && !space(q) && !letter(q) && !number(q)) ++q;
            if (q > p) {
                while (q < N && crlf(q)) ++q;
                return q;
            }
        }

        // Whitespace alternatives. Reaching here implies cps[i] is \s.
        std::size_t r = i;
        while (r < N && space(r)) ++r;

        // \s*[\r\n] : up to and including the last \r or \n in the run
        std::size_t last_nl = N;
        for (std::size_t k = r; k > i;) {
            --k;
            if (crlf(k)) {
                last_nl = k;
                break;
            }
        }
        if (last_nl != N) return last_nl + 1;

        // \s+(?!\S) : all trailing whitespace, else leave one for the
        // next piece
        if (r == N) return r;
        if (r - i >= 2) return r - 1;

        // \s+
        return r;
    }
};

}  // namespace

std::vector<std::pair<std::size_t, std::size_t>> BpeTokenizer::pretokenize(
    std::string_view text) const {
    Scanner sc(text);
    std::vector<std::pair<std::size_t, std::size_t>> pieces;
    std::size_t i = 0;
    while (i < sc.n()) {
        std::size_t j = sc.match(i);
        pieces.emplace_back(sc.offs[i], sc.offs[j]);
        i = j;
    }
    return pieces;
}

namespace {

constexpr TokenId kNoRank = std::numeric_limits<TokenId>::max();

// Greedy lowest-rank merge within one piece, as in byte-level BPE. Ties
// go to the leftmost pair. Only the two pairs adjacent to a merge change
// rank, so those are the only lookups per round.
void bpe_merge(const Vocabulary& vocab, std::string_view piece, std::vector<TokenId>& out) {
    TokenId whole = vocab.rank_of(piece);
    if (whole >= 0) {
        out.push_back(whole);
        return;
    }

    // parts[k] covers bytes [starts[k], starts[k+1]); rank_after[k] is the
    // rank of parts k and k+1 concatenated (kNoRank if unmergeable).
    std::vector<std::size_t> starts(piece.size() + 1);
    for (std::size_t k = 0; k <= piece.size(); ++k) starts[k] = k;
    auto pair_rank = [&](std::size_t k) -> TokenId {
        TokenId r = vocab.rank_of(piece.substr(starts[k], starts[k + 2] - starts[k]));
        return r < 0 ? kNoRank : r;
    };
    std::vector<TokenId> rank_after(piece.size());
    for (std::size_t k = 0; k + 2 <= piece.size(); ++k) rank_after[k] = pair_rank(k);
    if (!rank_after.empty()) rank_after.back() = kNoRank;

    while (starts.size() > 2) {
        std::size_t best = 0;
        TokenId best_rank = kNoRank;
        for (std::size_t k = 0; k < rank_after.size(); ++k) {
            if (rank_after[k] < best_rank) {
                best_rank = rank_after[k];
                best = k;
            }
        }
        if (best_rank == kNoRank) break;
        starts.erase(starts.begin() + static_cast<std::ptrdiff_t>(best) + 1);
        rank_after.erase(rank_after.begin() + static_cast<std::ptrdiff_t>(best));
        if (best + 2 < starts.size())
            rank_after[best] = pair_rank(best);
        else
            rank_after[best] = kNoRank;
        if (best > 0) rank_after[best - 1] = pair_rank(best - 1);
    }

    for (std::size_t k = 0; k + 1 < starts.size(); ++k) {
        std::string_view part = piece.substr(starts[k], starts[k + 1] - starts[k]);
        TokenId r = vocab.rank_of(part);
        if (r < 0)
            throw DataError(
                "vocabulary lacks a token for a byte sequence; byte-fallback entries missing");
        out.push_back(r);
    }
}

}  // namespace

TokenSequence BpeTokenizer::encode(std::string_view text) const {
    TokenSequence seq;
    seq.source_len_bytes = text.size();
    for (auto [lo, hi] : pretokenize(text)) {
        bpe_merge(vocab_, text.substr(lo, hi - lo), seq.ids);
    }
    return seq;
}

std::string BpeTokenizer::decode(const std::vector<TokenId>& ids) const {
    std::string out;
    for (TokenId id : ids) {
        bool special = false;
        for (const auto& [text, sid] : vocab_.special_tokens()) {
            if (sid == id) {
                out += text;
                special = true;
                break;
            }
        }
        if (!special) out += vocab_.bytes_of(id);
    }
    return out;
}

std::string BpeTokenizer::token_text(TokenId id) const {
    for (const auto& [text, sid] : vocab_.special_tokens())
        if (sid == id) return text;
    return vocab_.bytes_of(id);
}

// ---------------------------------------------------------------------------
// Lexical fallback

namespace {

bool lex_ident(unsigned char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_' || c >= 0x80;
}
bool lex_digit(unsigned char c) { return c >= '0' && c <= '9'; }
bool lex_space(unsigned char c) {
    return c == ' ' || c == '\t' || c == '\r' || c == '\n' || c == '\v' || c == '\f';
}

}  // namespace

TokenSequence LexicalTokenizer::encode(std::string_view text) const {
    TokenSequence seq;
    seq.source_len_bytes = text.size();
    std::lock_guard<std::mutex> lock(mu_);
    auto intern = [&](std::string_view tok) {
        auto it = ids_.find(std::string(tok));
        if (it != ids_.end()) {
            seq.ids.push_back(it->second);
            return;
        }
        TokenId id = static_cast<TokenId>(texts_.size());
        texts_.emplace_back(tok);
        ids_.emplace(texts_.back(), id);
        seq.ids.push_back(id);
    };

    std::size_t i = 0;
    while (i < text.size()) {
        unsigned char c = static_cast<unsigned char>(text[i]);
        if (lex_space(c)) {
            ++i;
        } else if (lex_ident(c)) {
            std::size_t j = i;
            while (j < text.size() && lex_ident(static_cast<unsigned char>(text[j]))) ++j;
            intern(text.substr(i, j - i));
            i = j;
        } else if (lex_digit(c)) {
            std::size_t j = i;
            while (j < text.size() && lex_digit(static_cast<unsigned char>(text[j]))) ++j;
            intern(text.substr(i, j - i));
            i = j;
        } else {
            intern(text.substr(i, 1));
            ++i;
        }
    }
    return seq;
}

std::string LexicalTokenizer::token_text(TokenId id) const {
    std::lock_guard<std::mutex> lock(mu_);
    if (id < 0 || static_cast<std::size_t>(id) >= texts_.size())
        throw DataError("unknown token id " + std::to_string(id));
    return texts_[static_cast<std::size_t>(id)];
}

std::vector<std::string> LexicalTokenizer::token_table() const {
    std::lock_guard<std::mutex> lock(mu_);
    return texts_;
}

}  // namespace codeprov
