#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "codeprov/common.hpp"
#include "codeprov/models.hpp"

namespace codeprov {

enum class CovarianceKind { Full, Diagonal };
// Eq.-as-printed covariance denominator (N-1) * weight, vs the standard
// EM M-step N * weight.
enum class CovarianceDenominator { Paper, Standard };

struct GaussianComponent {
    double weight = 1.0;
    DenseVector mean;
    // Full: dim x dim row-major; Diagonal: dim variances.
    std::vector<double> covariance;
};

class GmmModel {
public:
    GmmModel() = default;
    GmmModel(std::vector<GaussianComponent> components, CovarianceKind kind);

    std::size_t n_components() const { return components_.size(); }
    std::size_t dim() const { return dim_; }
    CovarianceKind covariance_kind() const { return kind_; }
    const std::vector<GaussianComponent>& components() const { return components_; }

    double log_likelihood(const DenseVector& x) const;
    // log density of x under component k alone (without the weight).
    double component_log_pdf(std::size_t k, const DenseVector& x) const;
    // Mean log-likelihood after each EM iteration (filled by em_fit).
    const std::vector<double>& fit_trace() const { return fit_trace_; }

    nlohmann::json to_json() const;
    static GmmModel from_json(const nlohmann::json& obj);

private:
    friend GmmModel em_fit(const Matrix&, const struct GmmOptions&);
    void prepare();  // factor covariances, cache log-dets

    std::vector<GaussianComponent> components_;
    CovarianceKind kind_ = CovarianceKind::Diagonal;
    std::size_t dim_ = 0;
    std::vector<double> fit_trace_;
    // cached per component: Cholesky factor (full) or inverse variances
    // (diagonal), plus 0.5 * log det
    std::vector<std::vector<double>> factor_;
    std::vector<double> half_log_det_;
};

struct KmeansResult {
    Matrix centers;                      // k rows
    std::vector<std::size_t> assignment;  // per input row
};

// Lloyd's iterations from seeded distinct starting points; empty clusters
// are reseeded to the point farthest from its assigned center.
KmeansResult kmeans_init(const Matrix& x, std::size_t k, std::uint64_t seed);

struct GmmOptions {
    std::size_t k = 2;
    double tol = 1e-6;
    std::size_t max_iter = 200;
    // Negative: auto, 1e-6 * (trace of the data covariance / dim).
    double ridge = -1.0;
    std::uint64_t seed = 0;
    CovarianceKind covariance_kind = CovarianceKind::Diagonal;
    CovarianceDenominator covariance_denominator = CovarianceDenominator::Paper;
};

// K-means initialization, then alternating E/M steps in the log domain
// until the mean log-likelihood improves by less than tol.
GmmModel em_fit(const Matrix& x, const GmmOptions& options);

enum class GmmLevel { Snippet, Token };

struct GmmVerdict {
    int label = 0;  // 1 = generated
    double posterior = 0.5;
};

// One mixture per class; a sample goes to the class with the higher
// likelihood (equal priors, ties to human).
class GmmClassifier : public Model {
public:
    GmmClassifier() = default;
    GmmClassifier(GmmModel generated, GmmModel human, GmmLevel level);

    GmmLevel level() const { return level_; }
    const GmmModel& generated_model() const { return g_ai_; }
    const GmmModel& human_model() const { return g_hu_; }

    GmmVerdict classify(const DenseVector& x) const;
    // Sum of per-token log-likelihood ratios; posterior is its sigmoid.
    GmmVerdict classify_tokens(const std::vector<DenseVector>& tokens) const;

    double predict_proba(const DenseVector& x) const override;
    std::size_t input_dim() const override { return g_ai_.dim(); }
    std::string kind() const override { return "gmm"; }

    static GmmClassifier from_json(const nlohmann::json& parameters);

protected:
    nlohmann::json parameters_json() const override;

private:
    GmmModel g_ai_;
    GmmModel g_hu_;
    GmmLevel level_ = GmmLevel::Snippet;
};

}  // namespace codeprov
