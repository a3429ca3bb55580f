#include <algorithm>
#include <cmath>
#include <map>

#include "codeprov/vectorize.hpp"

namespace codeprov {

DenseVector CbowModel::vector_of(TokenId token) const {
    auto it = row_.find(token);
    if (it == row_.end())
        throw DataError("token " + std::to_string(token) + " is not in the CBOW vocabulary");
    const double* base = input_.data() + it->second * dim_;
    return DenseVector(base, base + dim_);
}

std::vector<DenseVector> CbowModel::token_vectors(const TokenSequence& doc) const {
    std::vector<DenseVector> out;
    out.reserve(doc.size());
    for (TokenId t : doc.ids) {
        auto it = row_.find(t);
        if (it == row_.end()) continue;
        const double* base = input_.data() + it->second * dim_;
        out.emplace_back(base, base + dim_);
    }
    return out;
}

CbowModel fit_cbow(const std::vector<TokenSequence>& train_docs, const CbowOptions& options) {
    if (train_docs.empty()) throw DataError("fit_cbow: no documents");
    if (options.dim == 0) throw ConfigError("fit_cbow: dim must be positive");

    std::map<TokenId, std::size_t> counts;
    for (const auto& doc : train_docs)
        for (TokenId t : doc.ids) ++counts[t];

    CbowModel model;
    model.dim_ = options.dim;
    for (const auto& [token, count] : counts) {
        if (count >= options.min_count) {
            model.row_.emplace(token, model.tokens_.size());
            model.tokens_.push_back(token);
        }
    }
    if (model.tokens_.empty()) throw DataError("fit_cbow: vocabulary is empty");

    const std::size_t V = model.tokens_.size();
    const std::size_t m = options.dim;
    Rng rng(options.seed);
    model.input_.resize(V * m);
    model.output_.assign(V * m, 0.0);
    const double span = 0.5 / static_cast<double>(m);
    for (auto& w : model.input_) w = rng.uniform(-span, span);

    // Negative sampling distribution: unigram^0.75, cumulative for
    // binary-search draws.
    std::vector<double> cumulative(V);
    {
        double total = 0.0;
        for (std::size_t r = 0; r < V; ++r) {
            total += std::pow(static_cast<double>(counts[model.tokens_[r]]), 0.75);
            cumulative[r] = total;
        }
        for (auto& c : cumulative) c /= total;
        cumulative.back() = 1.0;
    }
    auto draw_negative = [&]() -> std::size_t {
        double u = rng.uniform();
        return static_cast<std::size_t>(
            std::lower_bound(cumulative.begin(), cumulative.end(), u) - cumulative.begin());
    };

    // Positions with at least one in-vocabulary context token.
    std::size_t total_positions = 0;
    for (const auto& doc : train_docs) total_positions += doc.size();
    total_positions = std::max<std::size_t>(1, total_positions * options.epochs);

    std::vector<double> context_mean(m), hidden_grad(m);
    std::size_t processed = 0;
    for (std::size_t epoch = 0; epoch < options.epochs; ++epoch) {
        double loss_sum = 0.0;
        std::size_t loss_n = 0;
        for (const auto& doc : train_docs) {
            // In-vocabulary view of the document; rare tokens drop out of
            // both targets and contexts.
            std::vector<std::size_t> rows;
            rows.reserve(doc.size());
            for (TokenId t : doc.ids) {
                auto it = model.row_.find(t);
                if (it != model.row_.end()) rows.push_back(it->second);
            }
            for (std::size_t pos = 0; pos < rows.size(); ++pos, ++processed) {
                double lr = options.learning_rate *
                            std::max(1.0 - static_cast<double>(processed) /
                                               static_cast<double>(total_positions),
                                     1e-4);
                std::size_t lo = pos >= options.window ? pos - options.window : 0;
                std::size_t hi = std::min(rows.size(), pos + options.window + 1);
                std::size_t n_ctx = hi - lo - 1;
                if (n_ctx == 0) continue;

                std::fill(context_mean.begin(), context_mean.end(), 0.0);
                for (std::size_t c = lo; c < hi; ++c) {
                    if (c == pos) continue;
                    const double* in = model.input_.data() + rows[c] * m;
                    for (std::size_t j = 0; j < m; ++j) context_mean[j] += in[j];
                }
                for (auto& x : context_mean) x /= static_cast<double>(n_ctx);

                std::fill(hidden_grad.begin(), hidden_grad.end(), 0.0);
                double example_loss = 0.0;
                auto update = [&](std::size_t target_row, double label) {
                    double* out = model.output_.data() + target_row * m;
                    double score = 0.0;
                    for (std::size_t j = 0; j < m; ++j) score += out[j] * context_mean[j];
                    double p = sigmoid(score);
                    example_loss -= std::log(std::max(label > 0.5 ? p : 1.0 - p, 1e-12));
                    double g = (label - p) * lr;
                    for (std::size_t j = 0; j < m; ++j) {
                        hidden_grad[j] += g * out[j];
                        out[j] += g * context_mean[j];
                    }
                };
                update(rows[pos], 1.0);
                for (std::size_t k = 0; k < options.negative_k; ++k) {
                    std::size_t neg = draw_negative();
                    if (neg == rows[pos]) continue;
                    update(neg, 0.0);
                }

                for (std::size_t c = lo; c < hi; ++c) {
                    if (c == pos) continue;
                    double* in = model.input_.data() + rows[c] * m;
                    for (std::size_t j = 0; j < m; ++j)
                        in[j] += hidden_grad[j] / static_cast<double>(n_ctx);
                }
                loss_sum += example_loss;
                ++loss_n;
            }
        }
        model.epoch_losses_.push_back(loss_n ? loss_sum / static_cast<double>(loss_n) : 0.0);
    }
    return model;
}

}  // namespace codeprov
