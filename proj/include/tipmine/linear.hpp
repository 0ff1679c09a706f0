#pragma once

// Multinomial logistic regression trained by full-batch gradient descent with
// a backtracking line search. A step is taken only when it lowers the loss,
// so the recorded loss trace is non-increasing by construction.

#include <cmath>
#include <cstdint>
#include <utility>
#include <vector>

#include "tipmine/error.hpp"

namespace tipmine {

// Sparse feature vector: (feature index, value) pairs, indices unique.
using SparseVec = std::vector<std::pair<std::uint32_t, float>>;

struct LabeledExample {
    SparseVec features;
    int label = 0;
    double weight = 1.0;
};

struct TrainConfig {
    int max_epochs = 200;
    double l2 = 1e-4;
    double initial_step = 1.0;
    double armijo_c = 1e-4;
    double tol = 1e-8;  // stop when relative loss improvement falls below
};

struct TrainResult {
    std::vector<double> weights;     // row-major, num_features x num_classes
    std::vector<double> loss_trace;  // loss after each accepted epoch
    int epochs = 0;
};

namespace detail {

// logits -> probabilities, in place, max-shifted for stability
inline void softmax_inplace(std::vector<double>& z) {
    double mx = z[0];
    for (double v : z) mx = std::max(mx, v);
    double sum = 0.0;
    for (double& v : z) {
        v = std::exp(v - mx);
        sum += v;
    }
    for (double& v : z) v /= sum;
}

}  // namespace detail

// Per-class probabilities for one example under row-major weights.
inline std::vector<double> predict_proba(const std::vector<double>& weights,
                                         int num_classes,
                                         const SparseVec& features) {
    std::vector<double> z(num_classes, 0.0);
    for (const auto& [idx, val] : features) {
        const double* row = &weights[static_cast<std::size_t>(idx) * num_classes];
        for (int c = 0; c < num_classes; ++c) z[c] += row[c] * val;
    }
    detail::softmax_inplace(z);
    return z;
}

// Argmax with ties broken toward the lowest class index.
inline int predict_class(const std::vector<double>& proba) {
    int best = 0;
    for (int c = 1; c < static_cast<int>(proba.size()); ++c)
        if (proba[c] > proba[best]) best = c;
    return best;
}

namespace detail {

// weighted mean cross-entropy + (l2/2)*||W||^2 and its gradient
inline double loss_and_grad(const std::vector<LabeledExample>& data,
                            const std::vector<double>& w, int num_classes,
                            double l2, std::vector<double>* grad) {
    if (grad) std::fill(grad->begin(), grad->end(), 0.0);
    double loss = 0.0;
    double total_weight = 0.0;
    for (const auto& ex : data) total_weight += ex.weight;
    if (total_weight <= 0.0) throw DataError("non-positive total example weight");
    std::vector<double> z(num_classes);
    const double inv_n = 1.0 / total_weight;
    for (const auto& ex : data) {
        std::fill(z.begin(), z.end(), 0.0);
        for (const auto& [idx, val] : ex.features) {
            const double* row = &w[static_cast<std::size_t>(idx) * num_classes];
            for (int c = 0; c < num_classes; ++c) z[c] += row[c] * val;
        }
        softmax_inplace(z);
        loss -= std::log(std::max(z[ex.label], 1e-300)) * ex.weight * inv_n;
        if (grad) {
            for (int c = 0; c < num_classes; ++c) {
                const double delta =
                    (z[c] - (c == ex.label ? 1.0 : 0.0)) * ex.weight * inv_n;
                for (const auto& [idx, val] : ex.features)
                    (*grad)[static_cast<std::size_t>(idx) * num_classes + c] +=
                        delta * val;
            }
        }
    }
    double reg = 0.0;
    for (double v : w) reg += v * v;
    loss += 0.5 * l2 * reg;
    if (grad)
        for (std::size_t i = 0; i < w.size(); ++i) (*grad)[i] += l2 * w[i];
    if (!std::isfinite(loss)) throw NumericError("non-finite training loss");
    return loss;
}

}  // namespace detail

// Weights start at zero, so the result is a deterministic function of the
// data order and configuration.
inline TrainResult train_softmax(const std::vector<LabeledExample>& data,
                                 std::size_t num_features, int num_classes,
                                 const TrainConfig& cfg = {}) {
    if (data.empty()) throw DataError("no training examples");
    for (const auto& ex : data)
        if (ex.label < 0 || ex.label >= num_classes)
            throw DataError("training label out of range");

    TrainResult res;
    res.weights.assign(num_features * static_cast<std::size_t>(num_classes),
                       0.0);
    std::vector<double> grad(res.weights.size(), 0.0);
    std::vector<double> trial(res.weights.size(), 0.0);

    double loss = detail::loss_and_grad(data, res.weights, num_classes, cfg.l2,
                                        &grad);
    res.loss_trace.push_back(loss);
    double step = cfg.initial_step;

    for (int epoch = 0; epoch < cfg.max_epochs; ++epoch) {
        double gnorm2 = 0.0;
        for (double g : grad) gnorm2 += g * g;
        if (gnorm2 < 1e-24) break;

        step = std::min(step * 2.0, 1e6);
        bool accepted = false;
        double trial_loss = loss;
        while (step > 1e-20) {
            for (std::size_t i = 0; i < trial.size(); ++i)
                trial[i] = res.weights[i] - step * grad[i];
            trial_loss = detail::loss_and_grad(data, trial, num_classes,
                                               cfg.l2, nullptr);
            if (trial_loss <= loss - cfg.armijo_c * step * gnorm2) {
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if (!accepted) break;

        res.weights.swap(trial);
        const double prev = loss;
        loss = detail::loss_and_grad(data, res.weights, num_classes, cfg.l2,
                                     &grad);
        // the accepted trial loss is recomputed with the gradient; identical
        // inputs give an identical value
        (void)trial_loss;
        res.loss_trace.push_back(loss);
        res.epochs = epoch + 1;
        if (prev - loss < cfg.tol * std::max(1.0, std::abs(prev))) break;
    }
    return res;
}

}  // namespace tipmine
