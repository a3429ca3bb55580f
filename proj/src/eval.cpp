#include "codeprov/eval.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <unordered_map>

#include "codeprov/features.hpp"

namespace codeprov {

// --------------------------------------------------------------------------
// Metrics

ConfusionMetrics confusion_metrics(const std::vector<int>& y_true,
                                   const std::vector<int>& y_pred) {
    if (y_true.size() != y_pred.size())
        throw DataError("confusion_metrics: length mismatch");
    if (y_true.empty()) throw DataError("confusion_metrics: empty input");

    ConfusionMetrics m;
    for (std::size_t i = 0; i < y_true.size(); ++i) {
        if (y_pred[i]) {
            (y_true[i] ? m.tp : m.fp) += 1;
        } else {
            (y_true[i] ? m.fn : m.tn) += 1;
        }
    }
    const double n = static_cast<double>(y_true.size());
    m.accuracy = static_cast<double>(m.tp + m.tn) / n;
    if (m.tp + m.fp > 0) {
        m.precision = static_cast<double>(m.tp) / static_cast<double>(m.tp + m.fp);
    } else {
        m.precision_defined = false;
    }
    if (m.tp + m.fn > 0) {
        m.recall = static_cast<double>(m.tp) / static_cast<double>(m.tp + m.fn);
    } else {
        m.recall_defined = false;
    }
    m.f1 = (m.precision + m.recall) > 0.0
               ? 2.0 * m.precision * m.recall / (m.precision + m.recall)
               : 0.0;
    return m;
}

double roc_auc(const std::vector<int>& y_true, const std::vector<double>& scores) {
    if (y_true.size() != scores.size()) throw DataError("roc_auc: length mismatch");
    std::size_t n_pos = 0, n_neg = 0;
    for (int y : y_true) (y ? n_pos : n_neg) += 1;
    if (n_pos == 0 || n_neg == 0) throw DataError("roc_auc: both classes must be present");

    std::vector<std::size_t> order(y_true.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

    // Average ranks over tie groups; sum the positive ranks.
    double pos_rank_sum = 0.0;
    std::size_t i = 0;
    while (i < order.size()) {
        std::size_t j = i;
        while (j < order.size() && scores[order[j]] == scores[order[i]]) ++j;
        double avg_rank = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
        for (std::size_t k = i; k < j; ++k)
            if (y_true[order[k]]) pos_rank_sum += avg_rank;
        i = j;
    }
    double u = pos_rank_sum - static_cast<double>(n_pos) * (static_cast<double>(n_pos) + 1.0) / 2.0;
    return u / (static_cast<double>(n_pos) * static_cast<double>(n_neg));
}

// --------------------------------------------------------------------------
// Calibration

CalibrationCurve calibration_curve(const std::vector<int>& y_true,
                                   const std::vector<double>& probs, CalibrationMethod method,
                                   std::size_t bins, double span) {
    if (y_true.size() != probs.size()) throw DataError("calibration_curve: length mismatch");
    if (y_true.empty()) throw DataError("calibration_curve: empty input");
    for (double p : probs)
        if (!(p >= 0.0 && p <= 1.0))
            throw DataError("calibration_curve: probabilities must lie in [0, 1]");

    CalibrationCurve curve;
    curve.method = method;
    if (method == CalibrationMethod::Binned) {
        if (bins == 0) throw ConfigError("calibration_curve: bins must be positive");
        curve.bin_edges.resize(bins + 1);
        for (std::size_t b = 0; b <= bins; ++b)
            curve.bin_edges[b] = static_cast<double>(b) / static_cast<double>(bins);
        std::vector<double> sum_p(bins, 0.0), sum_y(bins, 0.0);
        std::vector<std::size_t> count(bins, 0);
        for (std::size_t i = 0; i < probs.size(); ++i) {
            auto b = static_cast<std::size_t>(probs[i] * static_cast<double>(bins));
            if (b >= bins) b = bins - 1;  // 1.0 joins the last bin
            sum_p[b] += probs[i];
            sum_y[b] += y_true[i];
            ++count[b];
        }
        for (std::size_t b = 0; b < bins; ++b) {
            if (count[b] == 0) continue;
            curve.points.emplace_back(sum_p[b] / static_cast<double>(count[b]),
                                      sum_y[b] / static_cast<double>(count[b]));
        }
        return curve;
    }

    // LOESS: degree-1 locally weighted regression with tricube weights at
    // 101 evenly spaced evaluation points, clipped to [0, 1].
    curve.span = span;
    const std::size_t n = probs.size();
    const std::size_t q = std::max<std::size_t>(
        2, static_cast<std::size_t>(std::ceil(span * static_cast<double>(n))));
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return probs[a] < probs[b]; });

    for (std::size_t e = 0; e <= 100; ++e) {
        double x0 = static_cast<double>(e) / 100.0;
        // q nearest points by |x - x0|; the sorted order makes them a
        // contiguous window.
        std::vector<double> dist(n);
        for (std::size_t i = 0; i < n; ++i) dist[i] = std::fabs(probs[order[i]] - x0);
        // two-pointer expansion of the window around x0
        std::size_t lo = static_cast<std::size_t>(
            std::lower_bound(order.begin(), order.end(), x0,
                             [&](std::size_t idx, double v) { return probs[idx] < v; }) -
            order.begin());
        std::size_t left = lo, right = lo;  // [left, right)
        while (right - left < std::min(q, n)) {
            if (left == 0) {
                ++right;
            } else if (right == n) {
                --left;
            } else if (dist[left - 1] <= dist[right]) {
                --left;
            } else {
                ++right;
            }
        }
        double dmax = 0.0;
        for (std::size_t i = left; i < right; ++i) dmax = std::max(dmax, dist[i]);
        double sw = 0, swx = 0, swy = 0, swxx = 0, swxy = 0;
        for (std::size_t i = left; i < right; ++i) {
            double w = 1.0;
            if (dmax > 0.0) {
                double u = dist[i] / dmax;
                if (u >= 1.0) {
                    w = 0.0;
                } else {
                    double t = 1.0 - u * u * u;
                    w = t * t * t;
                }
            }
            if (w <= 0.0) continue;
            double x = probs[order[i]];
            double y = static_cast<double>(y_true[order[i]]);
            sw += w;
            swx += w * x;
            swy += w * y;
            swxx += w * x * x;
            swxy += w * x * y;
        }
        double fitted;
        double denom = sw * swxx - swx * swx;
        if (sw <= 0.0) {
            fitted = 0.0;
        } else if (std::fabs(denom) < 1e-12 * std::max(1.0, sw * swxx)) {
            fitted = swy / sw;
        } else {
            double slope = (sw * swxy - swx * swy) / denom;
            double intercept = (swy - slope * swx) / sw;
            fitted = intercept + slope * x0;
        }
        curve.points.emplace_back(x0, std::clamp(fitted, 0.0, 1.0));
    }
    return curve;
}

// --------------------------------------------------------------------------
// Kernel density estimate

std::vector<std::pair<double, double>> kde_on_grid(const std::vector<double>& values,
                                                   double bandwidth,
                                                   const std::vector<double>& grid) {
    const std::size_t n = values.size();
    if (n < 2) throw DataError("kde: need at least 2 values");
    double h = bandwidth;
    if (h <= 0.0) {
        // Silverman: 0.9 * min(sd, iqr / 1.34) * n^(-1/5)
        std::vector<double> sorted(values);
        std::sort(sorted.begin(), sorted.end());
        double sd = sample_stddev(values);
        double q1 = sorted[static_cast<std::size_t>(0.25 * static_cast<double>(n - 1))];
        double q3 = sorted[static_cast<std::size_t>(0.75 * static_cast<double>(n - 1))];
        double iqr = q3 - q1;
        double spread = std::min(sd, iqr / 1.34);
        if (spread <= 0.0) spread = std::max(sd, 1e-3);
        h = 0.9 * spread * std::pow(static_cast<double>(n), -0.2);
        h = std::max(h, 1e-6);
    }
    const double norm = 1.0 / (static_cast<double>(n) * h * std::sqrt(2.0 * M_PI));
    std::vector<std::pair<double, double>> out;
    out.reserve(grid.size());
    for (double x : grid) {
        double density = 0.0;
        for (double v : values) {
            double u = (x - v) / h;
            density += std::exp(-0.5 * u * u);
        }
        out.emplace_back(x, density * norm);
    }
    return out;
}

std::vector<std::pair<double, double>> probability_density(const std::vector<double>& probs,
                                                           double bandwidth) {
    std::vector<double> grid(201);
    for (std::size_t i = 0; i < grid.size(); ++i)
        grid[i] = static_cast<double>(i) / 200.0;
    return kde_on_grid(probs, bandwidth, grid);
}

// --------------------------------------------------------------------------
// Similarity study

SimilarityStudy similarity_study(const Corpus& corpus, const SnippetEmbedder& embedder) {
    // Embed each snippet once.
    std::vector<DenseVector> embedded(corpus.size());
    std::vector<bool> usable(corpus.size(), false);
    for (std::size_t i = 0; i < corpus.size(); ++i) {
        embedded[i] = embedder(corpus[i]);
        for (double v : embedded[i]) {
            if (v != 0.0) {
                usable[i] = true;
                break;
            }
        }
    }

    std::unordered_map<std::string, std::pair<std::vector<std::size_t>, std::vector<std::size_t>>>
        groups;
    for (std::size_t i = 0; i < corpus.size(); ++i) {
        auto& g = groups[corpus[i].problem_id];
        (corpus[i].origin == Origin::Human ? g.first : g.second).push_back(i);
    }

    SimilarityStudy study;
    study.histogram.assign(50, 0);
    std::vector<double> sims;
    for (const auto& pid : corpus.problem_ids()) {
        const auto& g = groups[pid];
        for (std::size_t hi : g.first) {
            for (std::size_t gi : g.second) {
                if (!usable[hi] || !usable[gi]) {
                    ++study.skipped_pairs;
                    continue;
                }
                double s = cosine_similarity(embedded[hi], embedded[gi]);
                sims.push_back(s);
                auto bin = static_cast<std::size_t>((s + 1.0) / 2.0 * 50.0);
                if (bin >= 50) bin = 49;
                ++study.histogram[bin];
            }
        }
    }
    if (sims.empty())
        throw DataError("similarity_study: no (human, gpt) pairs share a problem");
    study.n_pairs = sims.size();
    study.mean_sim = mean(sims);
    study.std_sim = sample_stddev(sims);
    return study;
}

// --------------------------------------------------------------------------
// Experiment harness

const char* feature_spec_name(FeatureSpec f) {
    switch (f) {
        case FeatureSpec::Whitebox: return "whitebox";
        case FeatureSpec::Tfidf: return "tfidf";
        case FeatureSpec::Cbow: return "cbow";
        case FeatureSpec::Remote: return "remote";
    }
    return "?";
}

const char* model_spec_name(ModelSpec m) {
    switch (m) {
        case ModelSpec::Logistic: return "logistic";
        case ModelSpec::Cart: return "cart";
        case ModelSpec::Forest: return "forest";
        case ModelSpec::Boosted: return "boosted";
        case ModelSpec::Mlp: return "mlp";
        case ModelSpec::Gmm: return "gmm";
        case ModelSpec::Bayes: return "bayes";
    }
    return "?";
}

FeatureSpec feature_spec_from_string(const std::string& s) {
    if (s == "whitebox") return FeatureSpec::Whitebox;
    if (s == "tfidf") return FeatureSpec::Tfidf;
    if (s == "cbow") return FeatureSpec::Cbow;
    if (s == "remote") return FeatureSpec::Remote;
    throw ConfigError("unknown feature spec \"" + s + "\"");
}

ModelSpec model_spec_from_string(const std::string& s) {
    if (s == "logistic") return ModelSpec::Logistic;
    if (s == "cart") return ModelSpec::Cart;
    if (s == "forest") return ModelSpec::Forest;
    if (s == "boosted") return ModelSpec::Boosted;
    if (s == "mlp") return ModelSpec::Mlp;
    if (s == "gmm") return ModelSpec::Gmm;
    if (s == "bayes") return ModelSpec::Bayes;
    throw ConfigError("unknown model spec \"" + s + "\"");
}

namespace {

std::vector<std::string> problem_ids_of(const Corpus& corpus) {
    return corpus.problem_ids();
}

// One train/evaluate cycle; returns per-sample (label, predicted label,
// probability) on the test side.
struct SeedOutcome {
    std::vector<int> y_true;
    std::vector<int> y_pred;
    std::vector<double> probs;
};

SeedOutcome run_seed(const Corpus& prepared, const ExperimentConfig& config,
                     const Tokenizer* tokenizer, std::uint64_t seed,
                     const FitObserver& observer) {
    Corpus balanced = balance(prepared, seed);
    auto [train, test] = split_problemwise(balanced, seed, config.split_ratio);
    auto notify = [&](const char* stage, const Corpus& c) {
        if (observer) observer(stage, problem_ids_of(c));
    };

    auto needs_tokens = config.features == FeatureSpec::Tfidf ||
                        config.features == FeatureSpec::Cbow ||
                        config.model == ModelSpec::Bayes;
    if (needs_tokens && tokenizer == nullptr)
        throw ConfigError("this feature/model combination needs a tokenizer");

    SeedOutcome outcome;
    outcome.y_true.reserve(test.size());
    for (const auto& s : test.samples()) outcome.y_true.push_back(s.origin == Origin::Gpt);

    if (config.model == ModelSpec::Bayes) {
        notify("model", train);
        BayesModel model =
            fit_bayes(train, *tokenizer, config.bayes_tau, config.bayes_estimation);
        for (const auto& s : test.samples()) {
            auto verdict = model.classify(tokenizer->encode(s.code));
            outcome.y_pred.push_back(verdict.label);
            outcome.probs.push_back(verdict.posterior_gpt);
        }
        return outcome;
    }

    if (config.features == FeatureSpec::Cbow) {
        if (config.model != ModelSpec::Gmm)
            throw ConfigError(
                "cbow token vectors feed the token-level gmm only; pick features "
                "whitebox/tfidf/remote for other models");
        notify("transform", train);
        std::vector<TokenSequence> train_docs;
        train_docs.reserve(train.size());
        for (const auto& s : train.samples()) train_docs.push_back(tokenizer->encode(s.code));
        CbowOptions cbow = config.cbow;
        cbow.seed = seed;
        CbowModel embedding = fit_cbow(train_docs, cbow);

        Matrix gen_vectors, human_vectors;
        for (std::size_t i = 0; i < train.size(); ++i) {
            auto vecs = embedding.token_vectors(train_docs[i]);
            auto& sink = train[i].origin == Origin::Gpt ? gen_vectors : human_vectors;
            sink.insert(sink.end(), vecs.begin(), vecs.end());
        }
        notify("model", train);
        GmmOptions gmm = config.gmm;
        gmm.seed = seed;
        GmmClassifier clf(em_fit(gen_vectors, gmm), em_fit(human_vectors, gmm),
                          GmmLevel::Token);
        for (const auto& s : test.samples()) {
            auto vecs = embedding.token_vectors(tokenizer->encode(s.code));
            if (vecs.empty()) {
                // No in-vocabulary token: fall back to the prior tie rule.
                outcome.y_pred.push_back(0);
                outcome.probs.push_back(0.5);
                continue;
            }
            auto verdict = clf.classify_tokens(vecs);
            outcome.y_pred.push_back(verdict.label);
            outcome.probs.push_back(verdict.posterior);
        }
        return outcome;
    }

    // Snippet-level vector features.
    TfidfModel tfidf;
    if (config.features == FeatureSpec::Tfidf) {
        notify("transform", train);
        std::vector<TokenSequence> train_docs;
        train_docs.reserve(train.size());
        for (const auto& s : train.samples()) train_docs.push_back(tokenizer->encode(s.code));
        tfidf = fit_tfidf(train_docs, config.tfidf_max_dim);
    }
    auto embed = [&](const CodeSample& s) -> DenseVector {
        switch (config.features) {
            case FeatureSpec::Whitebox:
                return extract_features(s.code).as_vector();
            case FeatureSpec::Tfidf:
                return transform_tfidf(tfidf, tokenizer->encode(s.code));
            case FeatureSpec::Remote: {
                if (config.embedding_cache == nullptr)
                    throw ConfigError("remote features need an embedding cache");
                if (config.remote_embedder)
                    return config.remote_embedder->embed(*config.embedding_cache, s.code);
                auto hit = config.embedding_cache->lookup(s.code);
                if (!hit)
                    throw DataError("offline embedding cache miss for sha256 " +
                                    sha256_hex(s.code));
                return *hit;
            }
            case FeatureSpec::Cbow: break;
        }
        throw ConfigError("unsupported feature spec");
    };

    LabeledDataset ds;
    ds.feature_names.assign(kFeatureNames.begin(), kFeatureNames.end());
    if (config.features != FeatureSpec::Whitebox) ds.feature_names.clear();
    for (const auto& s : train.samples()) {
        ds.x.push_back(embed(s));
        ds.y.push_back(s.origin == Origin::Gpt);
    }

    notify("model", train);
    std::unique_ptr<Model> model;
    if (config.custom_model_factory) {
        model = config.custom_model_factory(ds, seed);
    } else {
        switch (config.model) {
            case ModelSpec::Logistic:
                model = std::make_unique<LogisticModel>(fit_logistic(ds, config.logistic));
                break;
            case ModelSpec::Cart:
                model = std::make_unique<CartModel>(fit_cart(ds, config.cart));
                break;
            case ModelSpec::Forest: {
                ForestOptions forest = config.forest;
                forest.seed = seed;
                model = std::make_unique<ForestModel>(fit_forest(ds, forest));
                break;
            }
            case ModelSpec::Boosted:
                model = std::make_unique<BoostedModel>(fit_boosted(ds, config.boosted));
                break;
            case ModelSpec::Mlp: {
                MlpOptions mlp = config.mlp;
                mlp.seed = seed;
                model = std::make_unique<MlpModel>(fit_mlp(ds, mlp));
                break;
            }
            case ModelSpec::Gmm: {
                Matrix gen_rows, human_rows;
                for (std::size_t i = 0; i < ds.n(); ++i)
                    (ds.y[i] ? gen_rows : human_rows).push_back(ds.x[i]);
                GmmOptions gmm = config.gmm;
                gmm.seed = seed;
                model = std::make_unique<GmmClassifier>(
                    em_fit(gen_rows, gmm), em_fit(human_rows, gmm), GmmLevel::Snippet);
                break;
            }
            case ModelSpec::Bayes:
                throw ConfigError("unreachable");
        }
    }

    for (const auto& s : test.samples()) {
        DenseVector x = embed(s);
        double p = model->predict_proba(x);
        outcome.probs.push_back(p);
        outcome.y_pred.push_back(p >= 0.5 ? 1 : 0);
    }
    return outcome;
}

MetricSummary summarize(const std::vector<double>& values) {
    return {mean(values), sample_stddev(values)};
}

}  // namespace

RunSummary run_experiment(const Corpus& corpus, const ExperimentConfig& config,
                          const Tokenizer* tokenizer, const FitObserver& observer) {
    if (config.seeds.empty()) throw ConfigError("run_experiment: need at least one seed");

    RunSummary summary;
    summary.model_name = model_spec_name(config.model);
    summary.feature_name = feature_spec_name(config.features);
    {
        bool any_fmt = false, all_fmt = true;
        for (const auto& s : corpus.samples()) {
            any_fmt |= s.formatted;
            all_fmt &= s.formatted;
        }
        summary.format_variant = corpus.empty() ? "unformatted"
                                 : all_fmt      ? "formatted"
                                 : any_fmt      ? "mixed"
                                                : "unformatted";
    }

    std::vector<double> acc, prec, rec, f1, auc;
    for (std::uint64_t seed : config.seeds) {
        SeedOutcome outcome = run_seed(corpus, config, tokenizer, seed, observer);
        ConfusionMetrics m = confusion_metrics(outcome.y_true, outcome.y_pred);
        EvalResult r;
        r.seed = seed;
        r.n_test = outcome.y_true.size();
        r.accuracy = m.accuracy;
        r.precision = m.precision;
        r.recall = m.recall;
        r.f1 = m.f1;
        r.auc = roc_auc(outcome.y_true, outcome.probs);
        summary.per_seed.push_back(r);
        acc.push_back(r.accuracy);
        prec.push_back(r.precision);
        rec.push_back(r.recall);
        f1.push_back(r.f1);
        auc.push_back(r.auc);
        summary.pooled_probs.insert(summary.pooled_probs.end(), outcome.probs.begin(),
                                    outcome.probs.end());
        summary.pooled_labels.insert(summary.pooled_labels.end(), outcome.y_true.begin(),
                                     outcome.y_true.end());
    }
    summary.n_runs = config.seeds.size();
    summary.accuracy = summarize(acc);
    summary.precision = summarize(prec);
    summary.recall = summarize(rec);
    summary.f1 = summarize(f1);
    summary.auc = summarize(auc);
    return summary;
}

// --------------------------------------------------------------------------
// Result files

namespace {

void atomic_write(const std::string& path, const std::string& content) {
    std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw DataError("cannot write: " + tmp);
        out << content;
    }
    if (std::rename(tmp.c_str(), path.c_str()) != 0)
        throw DataError("cannot rename " + tmp + " to " + path);
}

std::string format_pct(double value) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", value * 100.0);
    return buf;
}

}  // namespace

void write_metrics_csv(const std::vector<RunSummary>& summaries, const std::string& path) {
    std::string out = "model,features,format_variant,metric,mean,std,n_runs\n";
    for (const auto& s : summaries) {
        auto row = [&](const char* metric, const MetricSummary& m) {
            out += s.model_name + "," + s.feature_name + "," + s.format_variant + "," + metric +
                   "," + format_pct(m.mean) + "," + format_pct(m.stddev) + "," +
                   std::to_string(s.n_runs) + "\n";
        };
        row("accuracy", s.accuracy);
        row("precision", s.precision);
        row("recall", s.recall);
        row("f1", s.f1);
        row("auc", s.auc);
    }
    atomic_write(path, out);
}

void write_metrics_json(const std::vector<RunSummary>& summaries, const std::string& path) {
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& s : summaries) {
        auto row = [&](const char* metric, const MetricSummary& m) {
            rows.push_back({{"model", s.model_name},
                            {"features", s.feature_name},
                            {"format_variant", s.format_variant},
                            {"metric", metric},
                            {"mean", m.mean},
                            {"std", m.stddev},
                            {"n_runs", s.n_runs}});
        };
        row("accuracy", s.accuracy);
        row("precision", s.precision);
        row("recall", s.recall);
        row("f1", s.f1);
        row("auc", s.auc);
    }
    atomic_write(path, rows.dump(2) + "\n");
}

void write_calibration_csv(const CalibrationCurve& curve, const std::string& path) {
    std::string out = "predicted,observed\n";
    for (const auto& [p, o] : curve.points)
        out += std::to_string(p) + "," + std::to_string(o) + "\n";
    atomic_write(path, out);
}

void write_kde_csv(const std::vector<std::pair<double, double>>& density,
                   const std::string& path) {
    std::string out = "x,density\n";
    for (const auto& [x, d] : density) out += std::to_string(x) + "," + std::to_string(d) + "\n";
    atomic_write(path, out);
}

void write_histogram_csv(const SimilarityStudy& study, const std::string& path) {
    std::string out = "bin_lo,bin_hi,count\n";
    for (std::size_t b = 0; b < study.histogram.size(); ++b) {
        double lo = -1.0 + 2.0 * static_cast<double>(b) / 50.0;
        double hi = -1.0 + 2.0 * static_cast<double>(b + 1) / 50.0;
        out += std::to_string(lo) + "," + std::to_string(hi) + "," +
               std::to_string(study.histogram[b]) + "\n";
    }
    atomic_write(path, out);
}

void write_features_csv(const Corpus& corpus, const std::string& path) {
    std::string out;
    for (const auto& name : kFeatureNames) {
        out += name;
        out += ',';
    }
    out += "problem_id,origin\n";
    for (const auto& s : corpus.samples()) {
        auto fv = extract_features(s.code).as_array();
        for (double v : fv) out += std::to_string(static_cast<long long>(v)) + ",";
        out += s.problem_id + "," + origin_name(s.origin) + "\n";
    }
    atomic_write(path, out);
}

}  // namespace codeprov
