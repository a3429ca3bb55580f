#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "codeprov/common.hpp"
#include "codeprov/corpus.hpp"
#include "codeprov/tokenizer.hpp"

namespace codeprov {

// Per-token tallies over a training corpus: in how many documents of each
// class the token appears, and how often in total.
struct TokenStats {
    struct Counts {
        std::size_t docs_human = 0;
        std::size_t docs_gpt = 0;
        std::size_t occ_human = 0;
        std::size_t occ_gpt = 0;
    };
    std::map<TokenId, Counts> per_token;
    std::size_t n_docs_human = 0;
    std::size_t n_docs_gpt = 0;
    std::size_t n_occ_human = 0;
    std::size_t n_occ_gpt = 0;
};

TokenStats count_tokens(const Corpus& corpus, const Tokenizer& tokenizer);

enum class BayesEstimation { DocPresence, Occurrence };

struct BayesVerdict {
    int label = 0;
    double posterior_gpt = 0.5;
};

struct BayesTokenReport {
    TokenId token;
    std::string text;
    std::size_t count_human = 0;  // occurrences in training
    std::size_t count_gpt = 0;
    double log_p_human = 0.0;
    double log_p_gpt = 0.0;
};

class BayesModel {
public:
    std::size_t retained_size() const { return tokens_.size(); }
    const std::vector<TokenId>& tokens() const { return tokens_; }
    std::size_t tau() const { return tau_; }
    BayesEstimation estimation() const { return estimation_; }
    double log_prior_human() const { return log_prior_h_; }
    double log_prior_gpt() const { return log_prior_g_; }
    bool retains(TokenId t) const { return index_.count(t) != 0; }
    std::pair<double, double> log_probs(TokenId t) const;  // (human, gpt)

    // Distinct retained tokens present in the document feed the posterior;
    // no retained token present leaves the prior. Ties label human.
    BayesVerdict classify(const TokenSequence& doc) const;

    // Tokens sorted by |log P(t|H) - log P(t|G)| descending, ties by id.
    std::vector<BayesTokenReport> top_discrepancy_tokens(std::size_t n,
                                                         const Tokenizer& tokenizer) const;
    // Same per-token reports, restricted to the tokens present in a
    // document (the per-verdict explanation).
    std::vector<BayesTokenReport> explain(const TokenSequence& doc, std::size_t n,
                                          const Tokenizer& tokenizer) const;

    nlohmann::json to_json() const;
    static BayesModel from_json(const nlohmann::json& envelope);

private:
    friend BayesModel fit_bayes(const Corpus&, const Tokenizer&, std::size_t, BayesEstimation);
    friend BayesModel fit_bayes_from_stats(const TokenStats&, std::size_t, BayesEstimation);

    std::vector<TokenId> tokens_;
    std::vector<double> log_p_h_;  // parallel to tokens_
    std::vector<double> log_p_g_;
    std::vector<std::size_t> occ_h_;
    std::vector<std::size_t> occ_g_;
    std::map<TokenId, std::size_t> index_;
    double log_prior_h_ = 0.0;
    double log_prior_g_ = 0.0;
    std::size_t tau_ = 32;
    BayesEstimation estimation_ = BayesEstimation::DocPresence;
};

// Retain tokens whose occurrence counts reach tau in both classes; token
// probabilities are per-class document frequencies (DocPresence) or
// occurrence frequencies (Occurrence). Throws if nothing survives tau.
BayesModel fit_bayes(const Corpus& train, const Tokenizer& tokenizer, std::size_t tau = 32,
                     BayesEstimation estimation = BayesEstimation::DocPresence);
BayesModel fit_bayes_from_stats(const TokenStats& stats, std::size_t tau,
                                BayesEstimation estimation);

// CSV report (token_text, count_h, count_g, logP_h, logP_g,
// abs_log_discrepancy) of the full retained set, discrepancy-sorted.
void write_bayes_report_csv(const BayesModel& model, const Tokenizer& tokenizer,
                            const std::string& path);

}  // namespace codeprov
