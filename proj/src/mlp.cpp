#include <algorithm>
#include <cmath>
#include <numeric>

#include "codeprov/models.hpp"

namespace codeprov {

namespace {

std::size_t param_count(const std::vector<std::size_t>& sizes) {
    std::size_t total = 0;
    for (std::size_t l = 0; l + 1 < sizes.size(); ++l) total += sizes[l + 1] * (sizes[l] + 1);
    return total;
}

// Forward pass; activations[l] has sizes[l] entries, activations.back() is
// the output pre-sigmoid logit (1 entry).
void forward_pass(const std::vector<std::size_t>& sizes, const std::vector<double>& params,
                  const DenseVector& x, std::vector<std::vector<double>>& activations) {
    activations.resize(sizes.size());
    activations[0].assign(x.begin(), x.end());
    std::size_t off = 0;
    for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
        const std::size_t in = sizes[l], out = sizes[l + 1];
        activations[l + 1].assign(out, 0.0);
        const double* w = params.data() + off;
        const double* b = params.data() + off + out * in;
        for (std::size_t o = 0; o < out; ++o) {
            double z = b[o];
            const double* row = w + o * in;
            for (std::size_t i = 0; i < in; ++i) z += row[i] * activations[l][i];
            bool last = l + 2 == sizes.size();
            activations[l + 1][o] = last ? z : std::max(z, 0.0);
        }
        off += out * (in + 1);
    }
}

}  // namespace

MlpModel MlpModel::make(std::size_t input_dim, const std::vector<std::size_t>& hidden,
                        std::uint64_t seed) {
    if (input_dim == 0) throw ConfigError("mlp: input_dim must be positive");
    MlpModel model;
    model.layer_sizes_.push_back(input_dim);
    for (std::size_t h : hidden) {
        if (h == 0) throw ConfigError("mlp: hidden layer width must be positive");
        model.layer_sizes_.push_back(h);
    }
    model.layer_sizes_.push_back(1);

    model.params_.assign(param_count(model.layer_sizes_), 0.0);
    Rng rng(seed);
    std::size_t off = 0;
    for (std::size_t l = 0; l + 1 < model.layer_sizes_.size(); ++l) {
        const std::size_t in = model.layer_sizes_[l], out = model.layer_sizes_[l + 1];
        bool last = l + 2 == model.layer_sizes_.size();
        // He-uniform for ReLU layers, Glorot for the sigmoid output.
        double limit = last ? std::sqrt(6.0 / static_cast<double>(in + out))
                            : std::sqrt(6.0 / static_cast<double>(in));
        for (std::size_t j = 0; j < out * in; ++j)
            model.params_[off + j] = rng.uniform(-limit, limit);
        off += out * (in + 1);  // biases stay zero
    }
    return model;
}

std::size_t MlpModel::input_dim() const {
    return layer_sizes_.empty() ? 0 : layer_sizes_.front();
}

std::vector<std::pair<std::size_t, std::size_t>> MlpModel::layer_param_ranges() const {
    std::vector<std::pair<std::size_t, std::size_t>> ranges;
    std::size_t off = 0;
    for (std::size_t l = 0; l + 1 < layer_sizes_.size(); ++l) {
        std::size_t count = layer_sizes_[l + 1] * (layer_sizes_[l] + 1);
        ranges.emplace_back(off, off + count);
        off += count;
    }
    return ranges;
}

double MlpModel::predict_proba(const DenseVector& x) const {
    if (x.size() != input_dim())
        throw DataError("mlp: input dimension " + std::to_string(x.size()) + " != " +
                        std::to_string(input_dim()));
    std::vector<std::vector<double>> activations;
    forward_pass(layer_sizes_, params_, x, activations);
    return sigmoid(activations.back()[0]);
}

double MlpModel::loss(const Matrix& x, const std::vector<int>& y) const {
    double total = 0.0;
    std::vector<std::vector<double>> activations;
    for (std::size_t i = 0; i < x.size(); ++i) {
        forward_pass(layer_sizes_, params_, x[i], activations);
        double z = activations.back()[0];
        double soft = z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
        total += soft - (y[i] ? z : 0.0);
    }
    return total / static_cast<double>(x.size());
}

std::vector<double> MlpModel::gradient(const Matrix& x, const std::vector<int>& y) const {
    std::vector<double> grad(params_.size(), 0.0);
    std::vector<std::vector<double>> activations;
    std::vector<double> delta, delta_prev;
    const double inv_n = 1.0 / static_cast<double>(x.size());
    auto ranges = layer_param_ranges();

    for (std::size_t i = 0; i < x.size(); ++i) {
        forward_pass(layer_sizes_, params_, x[i], activations);
        double p = sigmoid(activations.back()[0]);
        delta.assign(1, (p - static_cast<double>(y[i])) * inv_n);

        for (std::size_t l = layer_sizes_.size() - 1; l > 0; --l) {
            const std::size_t in = layer_sizes_[l - 1], out = layer_sizes_[l];
            const std::size_t off = ranges[l - 1].first;
            const double* w = params_.data() + off;
            double* gw = grad.data() + off;
            double* gb = grad.data() + off + out * in;
            for (std::size_t o = 0; o < out; ++o) {
                const double d = delta[o];
                double* grow = gw + o * in;
                for (std::size_t j = 0; j < in; ++j) grow[j] += d * activations[l - 1][j];
                gb[o] += d;
            }
            if (l == 1) break;
            delta_prev.assign(in, 0.0);
            for (std::size_t o = 0; o < out; ++o) {
                const double d = delta[o];
                const double* row = w + o * in;
                for (std::size_t j = 0; j < in; ++j) delta_prev[j] += d * row[j];
            }
            // ReLU mask of layer l-1
            for (std::size_t j = 0; j < in; ++j)
                if (activations[l - 1][j] <= 0.0) delta_prev[j] = 0.0;
            delta.swap(delta_prev);
        }
    }
    return grad;
}

MlpModel fit_mlp(const LabeledDataset& ds, const MlpOptions& options) {
    ds.validate();
    if (ds.n() == 0) throw DataError("fit_mlp: empty dataset");
    if (!ds.has_both_classes()) throw DataError("fit_mlp: needs both classes");
    if (options.batch == 0) throw ConfigError("fit_mlp: batch must be positive");

    MlpModel model = MlpModel::make(ds.k(), options.hidden, options.seed);
    Rng rng(Rng(options.seed).spawn(1));

    std::vector<double> m(model.params_.size(), 0.0), v(model.params_.size(), 0.0);
    const double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
    std::size_t t = 0;

    std::vector<std::size_t> perm(ds.n());
    std::iota(perm.begin(), perm.end(), 0);

    Matrix batch_x;
    std::vector<int> batch_y;
    for (std::size_t epoch = 0; epoch < options.epochs; ++epoch) {
        shuffle(perm, rng);
        double epoch_loss = 0.0;
        for (std::size_t start = 0; start < ds.n(); start += options.batch) {
            std::size_t end = std::min(ds.n(), start + options.batch);
            batch_x.clear();
            batch_y.clear();
            for (std::size_t i = start; i < end; ++i) {
                batch_x.push_back(ds.x[perm[i]]);
                batch_y.push_back(ds.y[perm[i]]);
            }
            epoch_loss += model.loss(batch_x, batch_y) * static_cast<double>(end - start);
            auto grad = model.gradient(batch_x, batch_y);
            ++t;
            const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(t));
            const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(t));
            for (std::size_t j = 0; j < grad.size(); ++j) {
                m[j] = beta1 * m[j] + (1.0 - beta1) * grad[j];
                v[j] = beta2 * v[j] + (1.0 - beta2) * grad[j] * grad[j];
                model.params_[j] -=
                    options.learning_rate * (m[j] / bc1) / (std::sqrt(v[j] / bc2) + eps);
            }
        }
        model.epoch_losses_.push_back(epoch_loss / static_cast<double>(ds.n()));
    }
    return model;
}

nlohmann::json MlpModel::parameters_json() const {
    return {{"layer_sizes", layer_sizes_}, {"params", params_}};
}

MlpModel MlpModel::from_json(const nlohmann::json& parameters) {
    MlpModel model;
    model.layer_sizes_ = parameters.at("layer_sizes").get<std::vector<std::size_t>>();
    model.params_ = parameters.at("params").get<std::vector<double>>();
    if (model.layer_sizes_.size() < 2 || model.layer_sizes_.back() != 1)
        throw DataError("mlp: bad layer sizes");
    if (model.params_.size() != param_count(model.layer_sizes_))
        throw DataError("mlp: parameter count mismatch");
    return model;
}

}  // namespace codeprov
