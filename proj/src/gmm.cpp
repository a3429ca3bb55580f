#include "codeprov/gmm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace codeprov {

namespace {

constexpr double kLog2Pi = 1.8378770664093454835606594728112;

// In-place Cholesky of a row-major symmetric matrix; returns false if a
// pivot collapses.
bool cholesky(std::vector<double>& a, std::size_t d) {
    for (std::size_t i = 0; i < d; ++i) {
        for (std::size_t j = 0; j <= i; ++j) {
            double sum = a[i * d + j];
            for (std::size_t k = 0; k < j; ++k) sum -= a[i * d + k] * a[j * d + k];
            if (i == j) {
                if (sum <= 0.0) return false;
                a[i * d + i] = std::sqrt(sum);
            } else {
                a[i * d + j] = sum / a[j * d + j];
            }
        }
        for (std::size_t j = i + 1; j < d; ++j) a[i * d + j] = 0.0;
    }
    return true;
}

double sq_dist(const DenseVector& a, const DenseVector& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        double diff = a[i] - b[i];
        s += diff * diff;
    }
    return s;
}

}  // namespace

GmmModel::GmmModel(std::vector<GaussianComponent> components, CovarianceKind kind)
    : components_(std::move(components)), kind_(kind) {
    if (components_.empty()) throw DataError("gmm: no components");
    dim_ = components_.front().mean.size();
    prepare();
}

void GmmModel::prepare() {
    factor_.clear();
    half_log_det_.clear();
    for (auto& comp : components_) {
        if (comp.mean.size() != dim_) throw DataError("gmm: inconsistent dimensions");
        if (kind_ == CovarianceKind::Diagonal) {
            if (comp.covariance.size() != dim_) throw DataError("gmm: bad diagonal covariance");
            std::vector<double> inv(dim_);
            double log_det = 0.0;
            for (std::size_t i = 0; i < dim_; ++i) {
                if (comp.covariance[i] <= 0.0) throw DataError("gmm: non-positive variance");
                inv[i] = 1.0 / comp.covariance[i];
                log_det += std::log(comp.covariance[i]);
            }
            factor_.push_back(std::move(inv));
            half_log_det_.push_back(0.5 * log_det);
        } else {
            if (comp.covariance.size() != dim_ * dim_)
                throw DataError("gmm: bad full covariance");
            std::vector<double> chol = comp.covariance;
            if (!cholesky(chol, dim_)) throw DataError("gmm: covariance not positive definite");
            double log_det = 0.0;
            for (std::size_t i = 0; i < dim_; ++i) log_det += std::log(chol[i * dim_ + i]);
            factor_.push_back(std::move(chol));
            half_log_det_.push_back(log_det);  // 0.5*log det(Sigma) = sum log L_ii
        }
    }
}

double GmmModel::component_log_pdf(std::size_t k, const DenseVector& x) const {
    if (x.size() != dim_) throw DataError("gmm: input dimension mismatch");
    const auto& comp = components_[k];
    double quad = 0.0;
    if (kind_ == CovarianceKind::Diagonal) {
        const auto& inv = factor_[k];
        for (std::size_t i = 0; i < dim_; ++i) {
            double diff = x[i] - comp.mean[i];
            quad += diff * diff * inv[i];
        }
    } else {
        // Solve L y = (x - mean); quad = |y|^2.
        const auto& chol = factor_[k];
        std::vector<double> y(dim_);
        for (std::size_t i = 0; i < dim_; ++i) {
            double sum = x[i] - comp.mean[i];
            for (std::size_t j = 0; j < i; ++j) sum -= chol[i * dim_ + j] * y[j];
            y[i] = sum / chol[i * dim_ + i];
        }
        for (double v : y) quad += v * v;
    }
    return -0.5 * (static_cast<double>(dim_) * kLog2Pi + quad) - half_log_det_[k];
}

double GmmModel::log_likelihood(const DenseVector& x) const {
    std::vector<double> terms(components_.size());
    for (std::size_t k = 0; k < components_.size(); ++k)
        terms[k] = std::log(components_[k].weight) + component_log_pdf(k, x);
    return log_sum_exp(terms.data(), terms.size());
}

nlohmann::json GmmModel::to_json() const {
    nlohmann::json comps = nlohmann::json::array();
    for (const auto& comp : components_) {
        comps.push_back({{"weight", comp.weight},
                         {"mean", comp.mean},
                         {"covariance", comp.covariance}});
    }
    return {{"covariance_kind", kind_ == CovarianceKind::Diagonal ? "diagonal" : "full"},
            {"components", comps}};
}

GmmModel GmmModel::from_json(const nlohmann::json& obj) {
    std::string kind_name = obj.at("covariance_kind").get<std::string>();
    CovarianceKind kind;
    if (kind_name == "diagonal")
        kind = CovarianceKind::Diagonal;
    else if (kind_name == "full")
        kind = CovarianceKind::Full;
    else
        throw DataError("gmm: unknown covariance kind \"" + kind_name + "\"");
    std::vector<GaussianComponent> comps;
    for (const auto& item : obj.at("components")) {
        GaussianComponent comp;
        comp.weight = item.at("weight").get<double>();
        comp.mean = item.at("mean").get<DenseVector>();
        comp.covariance = item.at("covariance").get<std::vector<double>>();
        comps.push_back(std::move(comp));
    }
    return GmmModel(std::move(comps), kind);
}

// --------------------------------------------------------------------------
// K-means

KmeansResult kmeans_init(const Matrix& x, std::size_t k, std::uint64_t seed) {
    const std::size_t n = x.size();
    if (k == 0) throw ConfigError("kmeans: k must be positive");
    if (n < k)
        throw DataError("kmeans: need at least " + std::to_string(k) + " points, got " +
                        std::to_string(n));

    Rng rng(seed);
    KmeansResult result;
    for (std::size_t i : sample_without_replacement(n, k, rng)) result.centers.push_back(x[i]);
    result.assignment.assign(n, 0);

    for (int iter = 0; iter < 100; ++iter) {
        bool changed = iter == 0;
        for (std::size_t i = 0; i < n; ++i) {
            std::size_t best = 0;
            double best_d = std::numeric_limits<double>::infinity();
            for (std::size_t c = 0; c < k; ++c) {
                double d = sq_dist(x[i], result.centers[c]);
                if (d < best_d) {
                    best_d = d;
                    best = c;
                }
            }
            if (result.assignment[i] != best) {
                result.assignment[i] = best;
                changed = true;
            }
        }
        if (!changed) break;

        const std::size_t dim = x.front().size();
        Matrix sums(k, DenseVector(dim, 0.0));
        std::vector<std::size_t> counts(k, 0);
        for (std::size_t i = 0; i < n; ++i) {
            ++counts[result.assignment[i]];
            for (std::size_t j = 0; j < dim; ++j) sums[result.assignment[i]][j] += x[i][j];
        }
        for (std::size_t c = 0; c < k; ++c) {
            if (counts[c] == 0) {
                // Reseed an empty cluster to the point farthest from its
                // assigned center.
                std::size_t far = 0;
                double far_d = -1.0;
                for (std::size_t i = 0; i < n; ++i) {
                    double d = sq_dist(x[i], result.centers[result.assignment[i]]);
                    if (d > far_d) {
                        far_d = d;
                        far = i;
                    }
                }
                result.centers[c] = x[far];
            } else {
                for (std::size_t j = 0; j < dim; ++j)
                    result.centers[c][j] = sums[c][j] / static_cast<double>(counts[c]);
            }
        }
    }
    return result;
}

// --------------------------------------------------------------------------
// EM

namespace {

double auto_ridge(const Matrix& x) {
    const std::size_t n = x.size(), d = x.front().size();
    double trace = 0.0;
    for (std::size_t j = 0; j < d; ++j) {
        double mean = 0.0;
        for (std::size_t i = 0; i < n; ++i) mean += x[i][j];
        mean /= static_cast<double>(n);
        double var = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double diff = x[i][j] - mean;
            var += diff * diff;
        }
        trace += var / static_cast<double>(n);
    }
    double ridge = 1e-6 * trace / static_cast<double>(d);
    return std::max(ridge, 1e-12);
}

std::vector<GaussianComponent> init_from_kmeans(const Matrix& x, const KmeansResult& km,
                                                const GmmOptions& options, double ridge) {
    const std::size_t n = x.size(), d = x.front().size(), k = km.centers.size();
    std::vector<GaussianComponent> comps(k);
    for (std::size_t c = 0; c < k; ++c) {
        comps[c].mean = km.centers[c];
        comps[c].covariance.assign(
            options.covariance_kind == CovarianceKind::Diagonal ? d : d * d, 0.0);
    }
    std::vector<std::size_t> counts(k, 0);
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t c = km.assignment[i];
        ++counts[c];
        for (std::size_t a = 0; a < d; ++a) {
            double da = x[i][a] - comps[c].mean[a];
            if (options.covariance_kind == CovarianceKind::Diagonal) {
                comps[c].covariance[a] += da * da;
            } else {
                for (std::size_t b = 0; b <= a; ++b)
                    comps[c].covariance[a * d + b] += da * (x[i][b] - comps[c].mean[b]);
            }
        }
    }
    for (std::size_t c = 0; c < k; ++c) {
        double denom = std::max<double>(1.0, static_cast<double>(counts[c]));
        comps[c].weight = static_cast<double>(counts[c]) / static_cast<double>(n);
        if (comps[c].weight <= 0.0) comps[c].weight = 1e-10;
        for (std::size_t a = 0; a < d; ++a) {
            if (options.covariance_kind == CovarianceKind::Diagonal) {
                comps[c].covariance[a] = comps[c].covariance[a] / denom + ridge;
            } else {
                for (std::size_t b = 0; b <= a; ++b) {
                    double v = comps[c].covariance[a * d + b] / denom;
                    comps[c].covariance[a * d + b] = v;
                    comps[c].covariance[b * d + a] = v;
                }
                comps[c].covariance[a * d + a] += ridge;
            }
        }
    }
    // Renormalize weights (empty clusters got a floor).
    double wsum = 0.0;
    for (const auto& comp : comps) wsum += comp.weight;
    for (auto& comp : comps) comp.weight /= wsum;
    return comps;
}

GmmModel em_fit_once(const Matrix& x, const GmmOptions& options, std::uint64_t seed,
                     bool* degenerate) {
    const std::size_t n = x.size(), d = x.front().size(), k = options.k;
    *degenerate = false;

    double ridge = options.ridge >= 0.0 ? options.ridge : auto_ridge(x);
    KmeansResult km = kmeans_init(x, k, seed);
    GmmModel model(init_from_kmeans(x, km, options, ridge), options.covariance_kind);

    std::vector<double> resp(n * k);  // responsibilities
    std::vector<double> terms(k);
    double prev_mean_ll = -std::numeric_limits<double>::infinity();

    for (std::size_t iter = 0; iter < options.max_iter; ++iter) {
        // E-step (log domain) and the mean log-likelihood at the current
        // parameters.
        double ll_sum = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t c = 0; c < k; ++c)
                terms[c] = std::log(model.components_[c].weight) + model.component_log_pdf(c, x[i]);
            double lse = log_sum_exp(terms.data(), k);
            ll_sum += lse;
            for (std::size_t c = 0; c < k; ++c) resp[i * k + c] = std::exp(terms[c] - lse);
        }
        double mean_ll = ll_sum / static_cast<double>(n);
        model.fit_trace_.push_back(mean_ll);
        if (mean_ll - prev_mean_ll < options.tol && iter > 0) break;
        prev_mean_ll = mean_ll;

        // M-step
        for (std::size_t c = 0; c < k; ++c) {
            double resp_sum = 0.0;
            for (std::size_t i = 0; i < n; ++i) resp_sum += resp[i * k + c];
            double weight = resp_sum / static_cast<double>(n);
            if (weight < 1e-12) {
                *degenerate = true;
                return model;
            }
            auto& comp = model.components_[c];
            comp.weight = weight;
            std::fill(comp.mean.begin(), comp.mean.end(), 0.0);
            for (std::size_t i = 0; i < n; ++i) {
                double r = resp[i * k + c];
                for (std::size_t j = 0; j < d; ++j) comp.mean[j] += r * x[i][j];
            }
            for (std::size_t j = 0; j < d; ++j) comp.mean[j] /= resp_sum;

            double cov_denom = options.covariance_denominator == CovarianceDenominator::Paper
                                   ? (static_cast<double>(n) - 1.0) * weight
                                   : resp_sum;
            std::fill(comp.covariance.begin(), comp.covariance.end(), 0.0);
            for (std::size_t i = 0; i < n; ++i) {
                double r = resp[i * k + c];
                if (options.covariance_kind == CovarianceKind::Diagonal) {
                    for (std::size_t a = 0; a < d; ++a) {
                        double da = x[i][a] - comp.mean[a];
                        comp.covariance[a] += r * da * da;
                    }
                } else {
                    for (std::size_t a = 0; a < d; ++a) {
                        double da = x[i][a] - comp.mean[a];
                        for (std::size_t b = 0; b <= a; ++b)
                            comp.covariance[a * d + b] += r * da * (x[i][b] - comp.mean[b]);
                    }
                }
            }
            if (options.covariance_kind == CovarianceKind::Diagonal) {
                for (std::size_t a = 0; a < d; ++a)
                    comp.covariance[a] = comp.covariance[a] / cov_denom + ridge;
            } else {
                for (std::size_t a = 0; a < d; ++a) {
                    for (std::size_t b = 0; b <= a; ++b) {
                        double v = comp.covariance[a * d + b] / cov_denom;
                        comp.covariance[a * d + b] = v;
                        comp.covariance[b * d + a] = v;
                    }
                    comp.covariance[a * d + a] += ridge;
                }
            }
        }
        model.prepare();
    }
    return model;
}

}  // namespace

GmmModel em_fit(const Matrix& x, const GmmOptions& options) {
    if (x.empty()) throw DataError("em_fit: empty data");
    if (x.size() < options.k)
        throw DataError("em_fit: fewer points than components");
    for (const auto& row : x)
        if (row.size() != x.front().size()) throw DataError("em_fit: ragged data matrix");

    bool degenerate = false;
    GmmModel model = em_fit_once(x, options, options.seed, &degenerate);
    if (!degenerate) return model;
    // One reinitialization with a derived seed, then give up.
    Rng rng(options.seed);
    model = em_fit_once(x, options, rng.spawn(0x5eed).next_u64(), &degenerate);
    if (degenerate)
        throw DataError("em_fit: degenerate component weight after reinitialization");
    return model;
}

// --------------------------------------------------------------------------
// Two-mixture classifier

GmmClassifier::GmmClassifier(GmmModel generated, GmmModel human, GmmLevel level)
    : g_ai_(std::move(generated)), g_hu_(std::move(human)), level_(level) {
    if (g_ai_.dim() != g_hu_.dim())
        throw DataError("gmm classifier: class models disagree on dimension");
    if (g_ai_.covariance_kind() != g_hu_.covariance_kind())
        throw DataError("gmm classifier: class models disagree on covariance kind");
}

GmmVerdict GmmClassifier::classify(const DenseVector& x) const {
    double la = g_ai_.log_likelihood(x);
    double lh = g_hu_.log_likelihood(x);
    GmmVerdict verdict;
    verdict.posterior = sigmoid(la - lh);  // equal priors
    verdict.label = la > lh ? 1 : 0;
    return verdict;
}

GmmVerdict GmmClassifier::classify_tokens(const std::vector<DenseVector>& tokens) const {
    if (tokens.empty()) throw DataError("gmm classifier: empty token list");
    double score = 0.0;
    for (const auto& v : tokens) score += g_ai_.log_likelihood(v) - g_hu_.log_likelihood(v);
    GmmVerdict verdict;
    verdict.posterior = sigmoid(score);
    verdict.label = score > 0.0 ? 1 : 0;
    return verdict;
}

double GmmClassifier::predict_proba(const DenseVector& x) const { return classify(x).posterior; }

nlohmann::json GmmClassifier::parameters_json() const {
    return {{"level", level_ == GmmLevel::Snippet ? "snippet" : "token"},
            {"generated", g_ai_.to_json()},
            {"human", g_hu_.to_json()}};
}

GmmClassifier GmmClassifier::from_json(const nlohmann::json& parameters) {
    std::string level_name = parameters.at("level").get<std::string>();
    GmmLevel level;
    if (level_name == "snippet")
        level = GmmLevel::Snippet;
    else if (level_name == "token")
        level = GmmLevel::Token;
    else
        throw DataError("gmm classifier: unknown level \"" + level_name + "\"");
    return GmmClassifier(GmmModel::from_json(parameters.at("generated")),
                         GmmModel::from_json(parameters.at("human")), level);
}

}  // namespace codeprov
