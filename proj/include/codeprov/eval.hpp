#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "codeprov/bayes.hpp"
#include "codeprov/common.hpp"
#include "codeprov/corpus.hpp"
#include "codeprov/gmm.hpp"
#include "codeprov/models.hpp"
#include "codeprov/tokenizer.hpp"
#include "codeprov/vectorize.hpp"

namespace codeprov {

// --------------------------------------------------------------------------
// Metrics

struct ConfusionMetrics {
    double accuracy = 0.0;
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    bool precision_defined = true;  // false when nothing was predicted positive
    bool recall_defined = true;     // false when no positives exist
    std::size_t tp = 0, fp = 0, tn = 0, fn = 0;
};

// Positive class is "generated" (label 1). Zero-denominator precision or
// recall is reported as 0 and flagged.
ConfusionMetrics confusion_metrics(const std::vector<int>& y_true,
                                   const std::vector<int>& y_pred);

// Rank-based AUC (Mann-Whitney, ties half-credited). Both classes must be
// present.
double roc_auc(const std::vector<int>& y_true, const std::vector<double>& scores);

// --------------------------------------------------------------------------
// Calibration and densities

enum class CalibrationMethod { Binned, Loess };

struct CalibrationCurve {
    CalibrationMethod method = CalibrationMethod::Binned;
    std::vector<std::pair<double, double>> points;  // (predicted, observed rate)
    std::vector<double> bin_edges;                  // binned variant
    double span = 0.75;                             // loess variant
};

CalibrationCurve calibration_curve(const std::vector<int>& y_true,
                                   const std::vector<double>& probs, CalibrationMethod method,
                                   std::size_t bins = 10, double span = 0.75);

// Gaussian KDE evaluated on an arbitrary grid; bandwidth <= 0 selects
// Silverman's rule.
std::vector<std::pair<double, double>> kde_on_grid(const std::vector<double>& values,
                                                   double bandwidth,
                                                   const std::vector<double>& grid);
// 201 evenly spaced points over [0, 1].
std::vector<std::pair<double, double>> probability_density(const std::vector<double>& probs,
                                                           double bandwidth = -1.0);

// --------------------------------------------------------------------------
// Cosine-similarity study

using SnippetEmbedder = std::function<DenseVector(const CodeSample&)>;

struct SimilarityStudy {
    double mean_sim = 0.0;
    double std_sim = 0.0;
    std::size_t n_pairs = 0;
    std::size_t skipped_pairs = 0;  // zero-norm embeddings
    std::vector<std::size_t> histogram;  // 50 bins over [-1, 1]
};

// Embeds every snippet once and scores all (human, gpt) pairs that share
// a problem.
SimilarityStudy similarity_study(const Corpus& corpus, const SnippetEmbedder& embedder);

// --------------------------------------------------------------------------
// Experiment harness

enum class FeatureSpec { Whitebox, Tfidf, Cbow, Remote };
enum class ModelSpec { Logistic, Cart, Forest, Boosted, Mlp, Gmm, Bayes };

const char* feature_spec_name(FeatureSpec f);
const char* model_spec_name(ModelSpec m);
FeatureSpec feature_spec_from_string(const std::string& s);
ModelSpec model_spec_from_string(const std::string& s);

struct ExperimentConfig {
    FeatureSpec features = FeatureSpec::Whitebox;
    ModelSpec model = ModelSpec::Boosted;
    std::vector<std::uint64_t> seeds = {0, 1, 2, 3, 4, 5, 6, 7, 8, 9};
    double split_ratio = 0.8;

    std::size_t tfidf_max_dim = 1536;
    CbowOptions cbow;

    LogisticOptions logistic;
    CartOptions cart;
    ForestOptions forest;
    BoostedOptions boosted;
    MlpOptions mlp;
    GmmOptions gmm;
    std::size_t bayes_tau = 32;
    BayesEstimation bayes_estimation = BayesEstimation::DocPresence;

    // Remote features resolve through this cache (offline lookups).
    EmbeddingCache* embedding_cache = nullptr;
    RemoteEmbedder* remote_embedder = nullptr;

    // Test hook: replaces the built-in model fit when set.
    std::function<std::unique_ptr<Model>(const LabeledDataset&, std::uint64_t seed)>
        custom_model_factory;
};

struct EvalResult {
    double accuracy = 0.0;
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    double auc = 0.0;
    std::size_t n_test = 0;
    std::uint64_t seed = 0;
};

struct MetricSummary {
    double mean = 0.0;
    double stddev = 0.0;
};

struct RunSummary {
    std::string model_name;
    std::string feature_name;
    std::string format_variant;  // "unformatted" | "formatted" | "mixed"
    std::size_t n_runs = 0;
    MetricSummary accuracy, precision, recall, f1, auc;
    std::vector<EvalResult> per_seed;
    // Test-side probabilities and labels pooled over all seeds, for
    // calibration plots and KDEs.
    std::vector<double> pooled_probs;
    std::vector<int> pooled_labels;
};

// Instrumentation: called for every fit with the problem ids involved;
// `stage` is "transform" or "model".
using FitObserver =
    std::function<void(const std::string& stage, const std::vector<std::string>& problem_ids)>;

// Per seed: balance -> problem-wise split -> fit transform on train ->
// fit model on train -> evaluate on test. No test-problem sample reaches
// any fit; the observer sees every fit's inputs.
RunSummary run_experiment(const Corpus& corpus, const ExperimentConfig& config,
                          const Tokenizer* tokenizer, const FitObserver& observer = nullptr);

// --------------------------------------------------------------------------
// Result files

void write_metrics_csv(const std::vector<RunSummary>& summaries, const std::string& path);
void write_metrics_json(const std::vector<RunSummary>& summaries, const std::string& path);
void write_calibration_csv(const CalibrationCurve& curve, const std::string& path);
void write_kde_csv(const std::vector<std::pair<double, double>>& density,
                   const std::string& path);
void write_histogram_csv(const SimilarityStudy& study, const std::string& path);
void write_features_csv(const Corpus& corpus, const std::string& path);

}  // namespace codeprov
