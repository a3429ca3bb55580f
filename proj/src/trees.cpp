#include <algorithm>
#include <cmath>
#include <numeric>

#include "codeprov/models.hpp"

namespace codeprov {

namespace {

double tree_value(const std::vector<TreeNode>& nodes, const DenseVector& x) {
    std::int32_t at = 0;
    while (nodes[at].feature >= 0) {
        const TreeNode& node = nodes[at];
        at = x[static_cast<std::size_t>(node.feature)] <= node.threshold ? node.left : node.right;
    }
    return nodes[at].value;
}

void check_dim(std::size_t got, std::size_t want, const char* who) {
    if (got != want)
        throw DataError(std::string(who) + ": input dimension " + std::to_string(got) +
                        " != " + std::to_string(want));
}

struct BestSplit {
    std::int32_t feature = -1;
    double threshold = 0.0;
    double gain = 0.0;
};

// Candidate features for one split: all of them, or a seeded subsample.
std::vector<std::size_t> split_features(std::size_t k, std::size_t max_features, Rng* rng) {
    if (max_features == 0 || max_features >= k || rng == nullptr) {
        std::vector<std::size_t> all(k);
        std::iota(all.begin(), all.end(), 0);
        return all;
    }
    auto picked = sample_without_replacement(k, max_features, *rng);
    std::sort(picked.begin(), picked.end());
    return picked;
}

}  // namespace

// --------------------------------------------------------------------------
// CART (Gini)

namespace {

struct CartGrower {
    const LabeledDataset& ds;
    const CartOptions& options;
    std::size_t max_features;
    Rng* rng;
    std::vector<TreeNode> nodes;

    static double gini(double pos, double n) {
        if (n <= 0.0) return 0.0;
        double p = pos / n;
        return 2.0 * p * (1.0 - p);
    }

    BestSplit find_split(const std::vector<std::size_t>& idx) const {
        const double n = static_cast<double>(idx.size());
        double pos = 0.0;
        for (std::size_t i : idx) pos += ds.y[i];
        const double parent = gini(pos, n);

        BestSplit best;
        std::vector<std::size_t> order(idx);
        for (std::size_t f : split_features(ds.k(), max_features, rng)) {
            std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
                return ds.x[a][f] < ds.x[b][f];
            });
            double pos_left = 0.0;
            for (std::size_t i = 1; i < order.size(); ++i) {
                pos_left += ds.y[order[i - 1]];
                double lo = ds.x[order[i - 1]][f];
                double hi = ds.x[order[i]][f];
                if (lo == hi) continue;
                double n_left = static_cast<double>(i);
                double n_right = n - n_left;
                double gain = parent - (n_left / n) * gini(pos_left, n_left) -
                              (n_right / n) * gini(pos - pos_left, n_right);
                if (gain > best.gain) {
                    best.feature = static_cast<std::int32_t>(f);
                    best.threshold = lo + (hi - lo) / 2.0;
                    best.gain = gain;
                }
            }
        }
        return best;
    }

    std::int32_t grow(std::vector<std::size_t> idx, int depth) {
        const std::int32_t id = static_cast<std::int32_t>(nodes.size());
        nodes.emplace_back();
        double pos = 0.0;
        for (std::size_t i : idx) pos += ds.y[i];
        nodes[id].value = pos / static_cast<double>(idx.size());

        bool pure = pos == 0.0 || pos == static_cast<double>(idx.size());
        bool depth_stop = options.max_depth >= 0 && depth >= options.max_depth;
        if (pure || depth_stop || idx.size() < options.min_samples_split) return id;

        BestSplit best = find_split(idx);
        if (best.feature < 0 || best.gain <= 0.0) return id;

        std::vector<std::size_t> left, right;
        for (std::size_t i : idx)
            (ds.x[i][static_cast<std::size_t>(best.feature)] <= best.threshold ? left : right)
                .push_back(i);
        idx.clear();
        idx.shrink_to_fit();

        nodes[id].feature = best.feature;
        nodes[id].threshold = best.threshold;
        std::int32_t l = grow(std::move(left), depth + 1);
        std::int32_t r = grow(std::move(right), depth + 1);
        nodes[id].left = l;
        nodes[id].right = r;
        return id;
    }
};

}  // namespace

CartModel grow_cart(const LabeledDataset& ds, const CartOptions& options,
                    std::size_t max_features, Rng* rng,
                    const std::vector<std::size_t>* sample_indices) {
    CartGrower grower{ds, options, max_features, rng, {}};
    std::vector<std::size_t> idx;
    if (sample_indices) {
        idx = *sample_indices;
    } else {
        idx.resize(ds.n());
        std::iota(idx.begin(), idx.end(), 0);
    }
    grower.grow(std::move(idx), 0);
    CartModel model;
    model.nodes_ = std::move(grower.nodes);
    model.input_dim_ = ds.k();
    return model;
}

CartModel fit_cart(const LabeledDataset& ds, const CartOptions& options) {
    ds.validate();
    if (ds.n() == 0) throw DataError("fit_cart: empty dataset");
    return grow_cart(ds, options, 0, nullptr, nullptr);
}

double CartModel::predict_proba(const DenseVector& x) const {
    check_dim(x.size(), input_dim_, "cart");
    return tree_value(nodes_, x);
}

int CartModel::depth() const {
    // Depth of the node array by traversal.
    std::vector<std::pair<std::int32_t, int>> stack{{0, 0}};
    int depth = 0;
    while (!stack.empty()) {
        auto [at, d] = stack.back();
        stack.pop_back();
        depth = std::max(depth, d);
        if (nodes_[static_cast<std::size_t>(at)].feature >= 0) {
            stack.push_back({nodes_[static_cast<std::size_t>(at)].left, d + 1});
            stack.push_back({nodes_[static_cast<std::size_t>(at)].right, d + 1});
        }
    }
    return depth;
}

namespace {

nlohmann::json nodes_to_json(const std::vector<TreeNode>& nodes) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& node : nodes) {
        arr.push_back({{"feature", node.feature},
                       {"threshold", node.threshold},
                       {"left", node.left},
                       {"right", node.right},
                       {"value", node.value}});
    }
    return arr;
}

std::vector<TreeNode> nodes_from_json(const nlohmann::json& arr) {
    std::vector<TreeNode> nodes;
    nodes.reserve(arr.size());
    for (const auto& item : arr) {
        TreeNode node;
        node.feature = item.at("feature").get<std::int32_t>();
        node.threshold = item.at("threshold").get<double>();
        node.left = item.at("left").get<std::int32_t>();
        node.right = item.at("right").get<std::int32_t>();
        node.value = item.at("value").get<double>();
        nodes.push_back(node);
    }
    if (nodes.empty()) throw DataError("tree with no nodes");
    return nodes;
}

}  // namespace

nlohmann::json CartModel::parameters_json() const {
    return {{"nodes", nodes_to_json(nodes_)}, {"input_dim", input_dim_}};
}

CartModel CartModel::from_json(const nlohmann::json& parameters) {
    CartModel model;
    model.nodes_ = nodes_from_json(parameters.at("nodes"));
    model.input_dim_ = parameters.at("input_dim").get<std::size_t>();
    return model;
}

// --------------------------------------------------------------------------
// Random forest

ForestModel fit_forest(const LabeledDataset& ds, const ForestOptions& options) {
    ds.validate();
    if (ds.n() == 0) throw DataError("fit_forest: empty dataset");
    if (options.n_trees == 0) throw ConfigError("fit_forest: n_trees must be positive");

    std::size_t max_features = options.max_features;
    if (max_features == 0)
        max_features = static_cast<std::size_t>(
            std::ceil(std::sqrt(static_cast<double>(ds.k()))));

    ForestModel model;
    model.input_dim_ = ds.k();
    Rng master(options.seed);
    for (std::size_t t = 0; t < options.n_trees; ++t) {
        Rng rng = master.spawn(t);
        std::vector<std::size_t> idx(ds.n());
        if (options.bootstrap) {
            for (auto& i : idx) i = rng.uniform_index(ds.n());
        } else {
            std::iota(idx.begin(), idx.end(), 0);
        }
        model.trees_.push_back(grow_cart(ds, options.tree, max_features, &rng, &idx));
    }
    return model;
}

double ForestModel::predict_proba(const DenseVector& x) const {
    check_dim(x.size(), input_dim_, "forest");
    double sum = 0.0;
    for (const auto& tree : trees_) sum += tree_value(tree.nodes_, x);
    return sum / static_cast<double>(trees_.size());
}

nlohmann::json ForestModel::parameters_json() const {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& tree : trees_) arr.push_back(nodes_to_json(tree.nodes_));
    return {{"trees", arr}, {"input_dim", input_dim_}};
}

ForestModel ForestModel::from_json(const nlohmann::json& parameters) {
    ForestModel model;
    model.input_dim_ = parameters.at("input_dim").get<std::size_t>();
    for (const auto& tree : parameters.at("trees")) {
        CartModel cart;
        cart.nodes_ = nodes_from_json(tree);
        cart.input_dim_ = model.input_dim_;
        model.trees_.push_back(std::move(cart));
    }
    if (model.trees_.empty()) throw DataError("forest with no trees");
    return model;
}

// --------------------------------------------------------------------------
// Gradient boosting

namespace {

struct BoostGrower {
    const Matrix& x;
    const std::vector<double>& grad;
    const std::vector<double>& hess;
    const BoostedOptions& options;
    std::vector<TreeNode> nodes;

    std::int32_t grow(std::vector<std::size_t> idx, int depth) {
        const std::int32_t id = static_cast<std::int32_t>(nodes.size());
        nodes.emplace_back();
        double g_sum = 0.0, h_sum = 0.0;
        for (std::size_t i : idx) {
            g_sum += grad[i];
            h_sum += hess[i];
        }
        nodes[id].value = -g_sum / (h_sum + options.lambda);
        if (depth >= options.max_depth || idx.size() < 2) return id;

        auto score = [&](double g, double h) { return g * g / (h + options.lambda); };
        BestSplit best;
        best.gain = 0.0;
        std::vector<std::size_t> order(idx);
        const std::size_t k = x.front().size();
        for (std::size_t f = 0; f < k; ++f) {
            std::sort(order.begin(), order.end(),
                      [&](std::size_t a, std::size_t b) { return x[a][f] < x[b][f]; });
            double g_left = 0.0, h_left = 0.0;
            for (std::size_t i = 1; i < order.size(); ++i) {
                g_left += grad[order[i - 1]];
                h_left += hess[order[i - 1]];
                double lo = x[order[i - 1]][f];
                double hi = x[order[i]][f];
                if (lo == hi) continue;
                double gain = 0.5 * (score(g_left, h_left) + score(g_sum - g_left, h_sum - h_left) -
                                     score(g_sum, h_sum)) -
                              options.gamma;
                if (gain > best.gain) {
                    best.feature = static_cast<std::int32_t>(f);
                    best.threshold = lo + (hi - lo) / 2.0;
                    best.gain = gain;
                }
            }
        }
        if (best.feature < 0) return id;

        std::vector<std::size_t> left, right;
        for (std::size_t i : idx)
            (x[i][static_cast<std::size_t>(best.feature)] <= best.threshold ? left : right)
                .push_back(i);
        idx.clear();
        idx.shrink_to_fit();

        nodes[id].feature = best.feature;
        nodes[id].threshold = best.threshold;
        std::int32_t l = grow(std::move(left), depth + 1);
        std::int32_t r = grow(std::move(right), depth + 1);
        nodes[id].left = l;
        nodes[id].right = r;
        return id;
    }
};

}  // namespace

BoostedModel fit_boosted(const LabeledDataset& ds, const BoostedOptions& options) {
    ds.validate();
    if (ds.n() == 0) throw DataError("fit_boosted: empty dataset");
    if (!ds.has_both_classes()) throw DataError("fit_boosted: needs both classes");

    BoostedModel model;
    model.input_dim_ = ds.k();
    model.learning_rate_ = options.learning_rate;

    double pos = 0.0;
    for (int label : ds.y) pos += label;
    double rate = pos / static_cast<double>(ds.n());
    model.base_score_ = std::clamp(std::log(rate / (1.0 - rate)), -10.0, 10.0);

    std::vector<double> raw(ds.n(), model.base_score_);
    std::vector<double> grad(ds.n()), hess(ds.n());
    for (std::size_t round = 0; round < options.n_rounds; ++round) {
        for (std::size_t i = 0; i < ds.n(); ++i) {
            double p = sigmoid(raw[i]);
            grad[i] = p - static_cast<double>(ds.y[i]);
            hess[i] = std::max(p * (1.0 - p), 1e-16);
        }
        BoostGrower grower{ds.x, grad, hess, options, {}};
        std::vector<std::size_t> idx(ds.n());
        std::iota(idx.begin(), idx.end(), 0);
        grower.grow(std::move(idx), 0);
        for (std::size_t i = 0; i < ds.n(); ++i)
            raw[i] += options.learning_rate * tree_value(grower.nodes, ds.x[i]);
        model.trees_.push_back(std::move(grower.nodes));

        double loss = 0.0;
        for (std::size_t i = 0; i < ds.n(); ++i) {
            double z = raw[i];
            double soft = z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
            loss += soft - (ds.y[i] ? z : 0.0);
        }
        model.round_losses_.push_back(loss / static_cast<double>(ds.n()));
    }
    return model;
}

double BoostedModel::raw_score(const DenseVector& x) const {
    check_dim(x.size(), input_dim_, "boosted");
    double raw = base_score_;
    for (const auto& tree : trees_) raw += learning_rate_ * tree_value(tree, x);
    return raw;
}

double BoostedModel::predict_proba(const DenseVector& x) const { return sigmoid(raw_score(x)); }

nlohmann::json BoostedModel::parameters_json() const {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& tree : trees_) arr.push_back(nodes_to_json(tree));
    return {{"trees", arr},
            {"base_score", base_score_},
            {"learning_rate", learning_rate_},
            {"input_dim", input_dim_}};
}

BoostedModel BoostedModel::from_json(const nlohmann::json& parameters) {
    BoostedModel model;
    model.input_dim_ = parameters.at("input_dim").get<std::size_t>();
    model.base_score_ = parameters.at("base_score").get<double>();
    model.learning_rate_ = parameters.at("learning_rate").get<double>();
    for (const auto& tree : parameters.at("trees")) model.trees_.push_back(nodes_from_json(tree));
    return model;
}

}  // namespace codeprov
