#include "codeprov/bayes.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>

namespace codeprov {

TokenStats count_tokens(const Corpus& corpus, const Tokenizer& tokenizer) {
    TokenStats stats;
    for (const auto& sample : corpus.samples()) {
        TokenSequence seq = tokenizer.encode(sample.code);
        bool human = sample.origin == Origin::Human;
        (human ? stats.n_docs_human : stats.n_docs_gpt) += 1;
        (human ? stats.n_occ_human : stats.n_occ_gpt) += seq.size();
        std::set<TokenId> distinct;
        for (TokenId t : seq.ids) {
            auto& c = stats.per_token[t];
            (human ? c.occ_human : c.occ_gpt) += 1;
            distinct.insert(t);
        }
        for (TokenId t : distinct) {
            auto& c = stats.per_token[t];
            (human ? c.docs_human : c.docs_gpt) += 1;
        }
    }
    return stats;
}

BayesModel fit_bayes_from_stats(const TokenStats& stats, std::size_t tau,
                                BayesEstimation estimation) {
    if (stats.n_docs_human == 0 || stats.n_docs_gpt == 0)
        throw DataError("fit_bayes: both classes must be present in training data");

    BayesModel model;
    model.tau_ = tau;
    model.estimation_ = estimation;

    const double n_docs =
        static_cast<double>(stats.n_docs_human) + static_cast<double>(stats.n_docs_gpt);
    model.log_prior_h_ = std::log(static_cast<double>(stats.n_docs_human) / n_docs);
    model.log_prior_g_ = std::log(static_cast<double>(stats.n_docs_gpt) / n_docs);

    // Guard for zero counts that survive the occurrence threshold.
    const double floor_h = std::log(1.0 / (static_cast<double>(stats.n_docs_human) + 1.0));
    const double floor_g = std::log(1.0 / (static_cast<double>(stats.n_docs_gpt) + 1.0));

    for (const auto& [token, c] : stats.per_token) {
        if (c.occ_human < tau || c.occ_gpt < tau) continue;
        double p_h, p_g;
        if (estimation == BayesEstimation::DocPresence) {
            p_h = static_cast<double>(c.docs_human) / static_cast<double>(stats.n_docs_human);
            p_g = static_cast<double>(c.docs_gpt) / static_cast<double>(stats.n_docs_gpt);
        } else {
            p_h = static_cast<double>(c.occ_human) / static_cast<double>(stats.n_occ_human);
            p_g = static_cast<double>(c.occ_gpt) / static_cast<double>(stats.n_occ_gpt);
        }
        model.index_.emplace(token, model.tokens_.size());
        model.tokens_.push_back(token);
        model.log_p_h_.push_back(p_h > 0.0 ? std::max(std::log(p_h), floor_h) : floor_h);
        model.log_p_g_.push_back(p_g > 0.0 ? std::max(std::log(p_g), floor_g) : floor_g);
        model.occ_h_.push_back(c.occ_human);
        model.occ_g_.push_back(c.occ_gpt);
    }
    if (model.tokens_.empty())
        throw DataError("fit_bayes: no token reaches tau=" + std::to_string(tau) +
                        " in both classes; try a smaller tau");
    return model;
}

BayesModel fit_bayes(const Corpus& train, const Tokenizer& tokenizer, std::size_t tau,
                     BayesEstimation estimation) {
    return fit_bayes_from_stats(count_tokens(train, tokenizer), tau, estimation);
}

std::pair<double, double> BayesModel::log_probs(TokenId t) const {
    auto it = index_.find(t);
    if (it == index_.end()) throw DataError("bayes: token is not retained");
    return {log_p_h_[it->second], log_p_g_[it->second]};
}

BayesVerdict BayesModel::classify(const TokenSequence& doc) const {
    double log_h = log_prior_h_;
    double log_g = log_prior_g_;
    std::set<TokenId> distinct(doc.ids.begin(), doc.ids.end());
    for (TokenId t : distinct) {
        auto it = index_.find(t);
        if (it == index_.end()) continue;
        log_h += log_p_h_[it->second];
        log_g += log_p_g_[it->second];
    }
    double terms[2] = {log_h, log_g};
    double lse = log_sum_exp(terms, 2);
    BayesVerdict verdict;
    verdict.posterior_gpt = std::exp(log_g - lse);
    verdict.label = log_g > log_h ? 1 : 0;
    return verdict;
}

namespace {

BayesTokenReport report_for(const BayesModel& model, std::size_t slot,
                            const Tokenizer& tokenizer) {
    BayesTokenReport report;
    report.token = model.tokens()[slot];
    try {
        report.text = tokenizer.token_text(report.token);
    } catch (const DataError&) {
        report.text = "<token " + std::to_string(report.token) + ">";
    }
    auto [lh, lg] = model.log_probs(report.token);
    report.log_p_human = lh;
    report.log_p_gpt = lg;
    return report;
}

}  // namespace

std::vector<BayesTokenReport> BayesModel::top_discrepancy_tokens(
    std::size_t n, const Tokenizer& tokenizer) const {
    std::vector<std::size_t> slots(tokens_.size());
    for (std::size_t i = 0; i < slots.size(); ++i) slots[i] = i;
    std::sort(slots.begin(), slots.end(), [&](std::size_t a, std::size_t b) {
        double da = std::fabs(log_p_h_[a] - log_p_g_[a]);
        double db = std::fabs(log_p_h_[b] - log_p_g_[b]);
        if (da != db) return da > db;
        return tokens_[a] < tokens_[b];
    });
    if (slots.size() > n) slots.resize(n);
    std::vector<BayesTokenReport> out;
    for (std::size_t slot : slots) {
        auto report = report_for(*this, slot, tokenizer);
        report.count_human = occ_h_[slot];
        report.count_gpt = occ_g_[slot];
        out.push_back(std::move(report));
    }
    return out;
}

std::vector<BayesTokenReport> BayesModel::explain(const TokenSequence& doc, std::size_t n,
                                                  const Tokenizer& tokenizer) const {
    std::set<TokenId> distinct(doc.ids.begin(), doc.ids.end());
    std::vector<std::size_t> slots;
    for (TokenId t : distinct) {
        auto it = index_.find(t);
        if (it != index_.end()) slots.push_back(it->second);
    }
    std::sort(slots.begin(), slots.end(), [&](std::size_t a, std::size_t b) {
        double da = std::fabs(log_p_h_[a] - log_p_g_[a]);
        double db = std::fabs(log_p_h_[b] - log_p_g_[b]);
        if (da != db) return da > db;
        return tokens_[a] < tokens_[b];
    });
    if (slots.size() > n) slots.resize(n);
    std::vector<BayesTokenReport> out;
    for (std::size_t slot : slots) {
        auto report = report_for(*this, slot, tokenizer);
        report.count_human = occ_h_[slot];
        report.count_gpt = occ_g_[slot];
        out.push_back(std::move(report));
    }
    return out;
}

namespace {

std::string csv_escape(const std::string& field) {
    bool needs_quotes = field.find_first_of(",\"\r\n") != std::string::npos;
    std::string printable;
    for (unsigned char c : field) {
        if (c < 0x20 || c == 0x7F) {
            static const char* hex = "0123456789abcdef";
            printable += "\\x";
            printable.push_back(hex[c >> 4]);
            printable.push_back(hex[c & 0xF]);
        } else {
            printable.push_back(static_cast<char>(c));
        }
    }
    if (!needs_quotes && printable == field && field.find(' ') == std::string::npos)
        return printable;
    std::string quoted = "\"";
    for (char c : printable) {
        if (c == '"') quoted += "\"\"";
        else quoted.push_back(c);
    }
    quoted.push_back('"');
    return quoted;
}

}  // namespace

void write_bayes_report_csv(const BayesModel& model, const Tokenizer& tokenizer,
                            const std::string& path) {
    std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw DataError("cannot write report: " + tmp);
        out << "token_text,count_h,count_g,logP_h,logP_g,abs_log_discrepancy\n";
        for (const auto& row :
             model.top_discrepancy_tokens(model.retained_size(), tokenizer)) {
            out << csv_escape(row.text) << ',' << row.count_human << ',' << row.count_gpt << ','
                << row.log_p_human << ',' << row.log_p_gpt << ','
                << std::fabs(row.log_p_human - row.log_p_gpt) << '\n';
        }
    }
    if (std::rename(tmp.c_str(), path.c_str()) != 0)
        throw DataError("cannot rename " + tmp + " to " + path);
}

nlohmann::json BayesModel::to_json() const {
    nlohmann::json parameters;
    parameters["tau"] = tau_;
    parameters["estimation"] =
        estimation_ == BayesEstimation::DocPresence ? "doc_presence" : "occurrence";
    parameters["log_prior_human"] = log_prior_h_;
    parameters["log_prior_gpt"] = log_prior_g_;
    parameters["tokens"] = tokens_;
    parameters["log_p_human"] = log_p_h_;
    parameters["log_p_gpt"] = log_p_g_;
    parameters["occ_human"] = occ_h_;
    parameters["occ_gpt"] = occ_g_;
    nlohmann::json envelope;
    envelope["format_version"] = 1;
    envelope["kind"] = "bayes";
    envelope["input_dim"] = 0;
    envelope["parameters"] = parameters;
    return envelope;
}

BayesModel BayesModel::from_json(const nlohmann::json& envelope) {
    if (envelope.at("kind").get<std::string>() != "bayes")
        throw DataError("bayes: wrong model kind");
    const auto& parameters = envelope.at("parameters");
    BayesModel model;
    model.tau_ = parameters.at("tau").get<std::size_t>();
    std::string est = parameters.at("estimation").get<std::string>();
    if (est == "doc_presence")
        model.estimation_ = BayesEstimation::DocPresence;
    else if (est == "occurrence")
        model.estimation_ = BayesEstimation::Occurrence;
    else
        throw DataError("bayes: unknown estimation \"" + est + "\"");
    model.log_prior_h_ = parameters.at("log_prior_human").get<double>();
    model.log_prior_g_ = parameters.at("log_prior_gpt").get<double>();
    model.tokens_ = parameters.at("tokens").get<std::vector<TokenId>>();
    model.log_p_h_ = parameters.at("log_p_human").get<std::vector<double>>();
    model.log_p_g_ = parameters.at("log_p_gpt").get<std::vector<double>>();
    model.occ_h_ = parameters.at("occ_human").get<std::vector<std::size_t>>();
    model.occ_g_ = parameters.at("occ_gpt").get<std::vector<std::size_t>>();
    if (model.log_p_h_.size() != model.tokens_.size() ||
        model.log_p_g_.size() != model.tokens_.size() ||
        model.occ_h_.size() != model.tokens_.size() ||
        model.occ_g_.size() != model.tokens_.size())
        throw DataError("bayes: parameter arrays disagree in length");
    for (std::size_t i = 0; i < model.tokens_.size(); ++i)
        model.index_.emplace(model.tokens_[i], i);
    return model;
}

}  // namespace codeprov
