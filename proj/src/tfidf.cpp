#include <algorithm>
#include <cmath>
#include <map>

#include "codeprov/vectorize.hpp"

namespace codeprov {

TfidfModel fit_tfidf(const std::vector<TokenSequence>& train_docs, std::size_t max_dim) {
    if (train_docs.empty()) throw DataError("fit_tfidf: no documents");
    // Document frequency per token.
    std::map<TokenId, std::size_t> df;
    std::size_t non_empty = 0;
    for (const auto& doc : train_docs) {
        if (doc.empty()) continue;
        ++non_empty;
        TokenId prev = -1;
        std::vector<TokenId> sorted = doc.ids;
        std::sort(sorted.begin(), sorted.end());
        for (TokenId t : sorted) {
            if (t != prev) ++df[t];
            prev = t;
        }
    }
    if (non_empty == 0) throw DataError("fit_tfidf: all documents are empty");

    // Highest document frequency first; ties by ascending token id (the
    // map iterates ids in ascending order, and the sort is stable).
    std::vector<std::pair<TokenId, std::size_t>> by_df(df.begin(), df.end());
    std::stable_sort(by_df.begin(), by_df.end(),
                     [](const auto& a, const auto& b) { return a.second > b.second; });
    if (by_df.size() > max_dim) by_df.resize(max_dim);

    TfidfModel model;
    model.n_docs_fitted = train_docs.size();
    const double n = static_cast<double>(train_docs.size());
    model.tokens.reserve(by_df.size());
    model.idf.reserve(by_df.size());
    for (const auto& [token, freq] : by_df) {
        model.tokens.push_back(token);
        model.idf.push_back(std::log(n / static_cast<double>(freq)));
    }
    return model;
}

DenseVector transform_tfidf(const TfidfModel& model, const TokenSequence& doc) {
    DenseVector out(model.dim(), 0.0);
    if (doc.empty()) return out;

    std::unordered_map<TokenId, std::size_t> counts;
    for (TokenId t : doc.ids) ++counts[t];
    const double len = static_cast<double>(doc.size());

    for (std::size_t slot = 0; slot < model.tokens.size(); ++slot) {
        auto it = counts.find(model.tokens[slot]);
        if (it == counts.end()) continue;
        out[slot] = (static_cast<double>(it->second) / len) * model.idf[slot];
    }
    return out;
}

double cosine_similarity(const DenseVector& u, const DenseVector& v) {
    if (u.size() != v.size())
        throw DataError("cosine_similarity: dimension mismatch (" + std::to_string(u.size()) +
                        " vs " + std::to_string(v.size()) + ")");
    double dot = 0.0, nu = 0.0, nv = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        dot += u[i] * v[i];
        nu += u[i] * u[i];
        nv += v[i] * v[i];
    }
    if (nu == 0.0 || nv == 0.0) throw DataError("cosine_similarity: zero vector");
    double sim = dot / (std::sqrt(nu) * std::sqrt(nv));
    return std::clamp(sim, -1.0, 1.0);
}

}  // namespace codeprov
