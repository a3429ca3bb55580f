#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "codeprov/common.hpp"

namespace codeprov {

// Rows of features with binary labels; 1 = generated, 0 = human.
struct LabeledDataset {
    Matrix x;
    std::vector<int> y;
    std::vector<std::string> feature_names;  // optional

    std::size_t n() const { return x.size(); }
    std::size_t k() const { return x.empty() ? 0 : x.front().size(); }
    // Row/label count match, rectangular x, finite entries, labels in {0,1}.
    void validate() const;
    bool has_both_classes() const;
};

class Model {
public:
    virtual ~Model() = default;
    virtual double predict_proba(const DenseVector& x) const = 0;
    virtual std::size_t input_dim() const = 0;
    virtual std::string kind() const = 0;
    // Versioned envelope {format_version, kind, input_dim, parameters}.
    nlohmann::json to_json() const;

protected:
    virtual nlohmann::json parameters_json() const = 0;
};

// label = 1 iff predict_proba >= threshold
int predict(const Model& model, const DenseVector& x, double threshold = 0.5);

// --------------------------------------------------------------------------
// Logistic regression

struct LogisticOptions {
    double l2 = 1.0;
    std::size_t max_iter = 1000;
    double tol = 1e-6;
};

class LogisticModel : public Model {
public:
    double predict_proba(const DenseVector& x) const override;
    std::size_t input_dim() const override { return weights_.size(); }
    std::string kind() const override { return "logistic"; }

    double decision(const DenseVector& x) const;  // w.x + b
    const DenseVector& weights() const { return weights_; }
    double bias() const { return bias_; }
    // Objective value after every accepted line-search step.
    const std::vector<double>& loss_trace() const { return loss_trace_; }

    static LogisticModel from_json(const nlohmann::json& parameters);

protected:
    nlohmann::json parameters_json() const override;

private:
    friend LogisticModel fit_logistic(const LabeledDataset&, const LogisticOptions&);
    DenseVector weights_;
    double bias_ = 0.0;
    std::vector<double> loss_trace_;
};

// Gradient descent with Armijo backtracking on the L2-regularized mean
// binary cross-entropy (bias unpenalized).
LogisticModel fit_logistic(const LabeledDataset& ds, const LogisticOptions& options = {});

// --------------------------------------------------------------------------
// Decision trees

struct TreeNode {
    std::int32_t feature = -1;  // -1 marks a leaf
    double threshold = 0.0;     // left: x[feature] <= threshold
    std::int32_t left = -1;
    std::int32_t right = -1;
    double value = 0.0;  // leaf payload: probability (CART) or weight (boosted)
};

struct CartOptions {
    int max_depth = -1;  // -1: unlimited
    std::size_t min_samples_split = 2;
};

class CartModel : public Model {
public:
    double predict_proba(const DenseVector& x) const override;
    std::size_t input_dim() const override { return input_dim_; }
    std::string kind() const override { return "cart"; }

    const std::vector<TreeNode>& nodes() const { return nodes_; }
    int depth() const;

    static CartModel from_json(const nlohmann::json& parameters);

protected:
    nlohmann::json parameters_json() const override;

private:
    friend class ForestModel;
    friend CartModel fit_cart(const LabeledDataset&, const CartOptions&);
    friend CartModel grow_cart(const LabeledDataset&, const CartOptions&,
                               std::size_t max_features, Rng* rng,
                               const std::vector<std::size_t>* sample_indices);
    std::vector<TreeNode> nodes_;
    std::size_t input_dim_ = 0;
};

// Greedy binary splits minimizing weighted Gini impurity; ties broken by
// lowest feature index, then lowest threshold. Single-class data yields a
// one-leaf tree.
CartModel fit_cart(const LabeledDataset& ds, const CartOptions& options = {});

struct ForestOptions {
    std::size_t n_trees = 100;
    std::uint64_t seed = 0;
    bool bootstrap = true;     // test hook: disable to reduce to fit_cart
    std::size_t max_features = 0;  // 0: ceil(sqrt(k)) candidates per split
    CartOptions tree;
};

class ForestModel : public Model {
public:
    double predict_proba(const DenseVector& x) const override;  // mean of trees
    std::size_t input_dim() const override { return input_dim_; }
    std::string kind() const override { return "forest"; }

    const std::vector<CartModel>& trees() const { return trees_; }

    static ForestModel from_json(const nlohmann::json& parameters);

protected:
    nlohmann::json parameters_json() const override;

private:
    friend ForestModel fit_forest(const LabeledDataset&, const ForestOptions&);
    std::vector<CartModel> trees_;
    std::size_t input_dim_ = 0;
};

ForestModel fit_forest(const LabeledDataset& ds, const ForestOptions& options);

// --------------------------------------------------------------------------
// Gradient-boosted trees (regularized logistic loss)

struct BoostedOptions {
    std::size_t n_rounds = 100;
    double learning_rate = 0.3;
    double lambda = 1.0;  // L2 on leaf weights
    double gamma = 0.0;   // split gain threshold
    int max_depth = 6;
};

class BoostedModel : public Model {
public:
    double predict_proba(const DenseVector& x) const override;
    std::size_t input_dim() const override { return input_dim_; }
    std::string kind() const override { return "boosted"; }

    double raw_score(const DenseVector& x) const;
    double base_score() const { return base_score_; }
    const std::vector<std::vector<TreeNode>>& trees() const { return trees_; }
    // Mean training log-loss after every round.
    const std::vector<double>& round_losses() const { return round_losses_; }

    static BoostedModel from_json(const nlohmann::json& parameters);

protected:
    nlohmann::json parameters_json() const override;

private:
    friend BoostedModel fit_boosted(const LabeledDataset&, const BoostedOptions&);
    double base_score_ = 0.0;
    double learning_rate_ = 0.3;
    std::vector<std::vector<TreeNode>> trees_;
    std::size_t input_dim_ = 0;
    std::vector<double> round_losses_;
};

// Each round fits a regression tree to first/second-order gradients of the
// logistic loss; split gain and leaf weights follow the regularized
// second-order objective. Base score is logit(positive rate), clipped to
// +-10.
BoostedModel fit_boosted(const LabeledDataset& ds, const BoostedOptions& options = {});

// --------------------------------------------------------------------------
// Multi-layer perceptron

struct MlpOptions {
    std::vector<std::size_t> hidden = {768, 512, 128, 32, 8};
    std::size_t epochs = 30;
    std::size_t batch = 32;
    double learning_rate = 1e-3;
    std::uint64_t seed = 0;
};

class MlpModel : public Model {
public:
    double predict_proba(const DenseVector& x) const override;
    std::size_t input_dim() const override;
    std::string kind() const override { return "mlp"; }

    // layer_sizes = [input_dim, hidden..., 1]
    const std::vector<std::size_t>& layer_sizes() const { return layer_sizes_; }
    std::vector<double>& params() { return params_; }
    const std::vector<double>& params() const { return params_; }
    // Flat-parameter ranges [begin, end) of each layer's weights+bias.
    std::vector<std::pair<std::size_t, std::size_t>> layer_param_ranges() const;

    double loss(const Matrix& x, const std::vector<int>& y) const;
    std::vector<double> gradient(const Matrix& x, const std::vector<int>& y) const;
    const std::vector<double>& epoch_losses() const { return epoch_losses_; }

    static MlpModel make(std::size_t input_dim, const std::vector<std::size_t>& hidden,
                         std::uint64_t seed);
    static MlpModel from_json(const nlohmann::json& parameters);

protected:
    nlohmann::json parameters_json() const override;

private:
    friend MlpModel fit_mlp(const LabeledDataset&, const MlpOptions&);
    std::vector<std::size_t> layer_sizes_;
    std::vector<double> params_;  // per layer: weights (out x in, row-major), then biases
    std::vector<double> epoch_losses_;
};

// ReLU hidden layers, sigmoid output, mean binary cross-entropy, Adam
// (0.9, 0.999, 1e-8); mini-batch order is seeded.
MlpModel fit_mlp(const LabeledDataset& ds, const MlpOptions& options);

}  // namespace codeprov
