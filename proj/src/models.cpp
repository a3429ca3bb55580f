#include "codeprov/models.hpp"

#include <algorithm>
#include <cmath>

namespace codeprov {

void LabeledDataset::validate() const {
    if (x.size() != y.size()) throw DataError("dataset: row count != label count");
    for (const auto& row : x) {
        if (row.size() != k()) throw DataError("dataset: ragged feature matrix");
        for (double v : row)
            if (!std::isfinite(v)) throw DataError("dataset: non-finite feature value");
    }
    for (int label : y)
        if (label != 0 && label != 1) throw DataError("dataset: labels must be 0 or 1");
}

bool LabeledDataset::has_both_classes() const {
    bool pos = false, neg = false;
    for (int label : y) (label ? pos : neg) = true;
    return pos && neg;
}

nlohmann::json Model::to_json() const {
    nlohmann::json envelope;
    envelope["format_version"] = 1;
    envelope["kind"] = kind();
    envelope["input_dim"] = input_dim();
    envelope["parameters"] = parameters_json();
    return envelope;
}

int predict(const Model& model, const DenseVector& x, double threshold) {
    return model.predict_proba(x) >= threshold ? 1 : 0;
}

// --------------------------------------------------------------------------
// Logistic regression

double LogisticModel::decision(const DenseVector& x) const {
    if (x.size() != weights_.size())
        throw DataError("logistic: input dimension " + std::to_string(x.size()) + " != " +
                        std::to_string(weights_.size()));
    double z = bias_;
    for (std::size_t j = 0; j < weights_.size(); ++j) z += weights_[j] * x[j];
    return z;
}

double LogisticModel::predict_proba(const DenseVector& x) const { return sigmoid(decision(x)); }

namespace {

// Mean BCE + (l2 / 2n) * |w|^2, gradient included.
double logistic_objective(const Matrix& x, const std::vector<int>& y, const DenseVector& w,
                          double b, double l2, DenseVector* grad_w, double* grad_b) {
    const std::size_t n = x.size();
    const std::size_t k = w.size();
    double loss = 0.0;
    if (grad_w) std::fill(grad_w->begin(), grad_w->end(), 0.0);
    if (grad_b) *grad_b = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double z = b;
        for (std::size_t j = 0; j < k; ++j) z += w[j] * x[i][j];
        // log(1 + e^-|z|) form keeps the loss finite for large |z|
        double soft = z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
        loss += soft - (y[i] ? z : 0.0);
        if (grad_w) {
            double r = sigmoid(z) - static_cast<double>(y[i]);
            for (std::size_t j = 0; j < k; ++j) (*grad_w)[j] += r * x[i][j];
            *grad_b += r;
        }
    }
    const double inv_n = 1.0 / static_cast<double>(n);
    loss *= inv_n;
    double reg = 0.0;
    for (double wj : w) reg += wj * wj;
    loss += 0.5 * l2 * inv_n * reg;
    if (grad_w) {
        for (std::size_t j = 0; j < k; ++j) (*grad_w)[j] = ((*grad_w)[j] + l2 * w[j]) * inv_n;
        *grad_b *= inv_n;
    }
    return loss;
}

}  // namespace

LogisticModel fit_logistic(const LabeledDataset& ds, const LogisticOptions& options) {
    ds.validate();
    if (ds.n() == 0) throw DataError("fit_logistic: empty dataset");
    if (!ds.has_both_classes()) throw DataError("fit_logistic: needs both classes");

    LogisticModel model;
    model.weights_.assign(ds.k(), 0.0);
    model.bias_ = 0.0;

    DenseVector grad_w(ds.k());
    double grad_b = 0.0;
    double loss =
        logistic_objective(ds.x, ds.y, model.weights_, model.bias_, options.l2, &grad_w, &grad_b);
    model.loss_trace_.push_back(loss);

    double step = 1.0;
    for (std::size_t iter = 0; iter < options.max_iter; ++iter) {
        double gnorm2 = grad_b * grad_b;
        for (double g : grad_w) gnorm2 += g * g;
        if (std::sqrt(gnorm2) < options.tol) break;

        // Armijo backtracking along the negative gradient.
        DenseVector w_new(ds.k());
        double b_new = 0.0;
        double trial = step * 2.0;  // allow the step to grow back
        double new_loss = 0.0;
        bool accepted = false;
        for (int half = 0; half < 60; ++half) {
            for (std::size_t j = 0; j < ds.k(); ++j)
                w_new[j] = model.weights_[j] - trial * grad_w[j];
            b_new = model.bias_ - trial * grad_b;
            new_loss =
                logistic_objective(ds.x, ds.y, w_new, b_new, options.l2, nullptr, nullptr);
            if (new_loss <= loss - 1e-4 * trial * gnorm2) {
                accepted = true;
                break;
            }
            trial *= 0.5;
        }
        if (!accepted) break;
        step = trial;
        model.weights_ = std::move(w_new);
        model.bias_ = b_new;
        loss = logistic_objective(ds.x, ds.y, model.weights_, model.bias_, options.l2, &grad_w,
                                  &grad_b);
        model.loss_trace_.push_back(loss);
    }
    return model;
}

nlohmann::json LogisticModel::parameters_json() const {
    return {{"weights", weights_}, {"bias", bias_}};
}

LogisticModel LogisticModel::from_json(const nlohmann::json& parameters) {
    LogisticModel model;
    model.weights_ = parameters.at("weights").get<DenseVector>();
    model.bias_ = parameters.at("bias").get<double>();
    return model;
}

}  // namespace codeprov
