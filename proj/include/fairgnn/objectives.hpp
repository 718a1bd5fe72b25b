// SPDX-License-Identifier: Apache-2.0
#pragma once

// Loss terms of the debiased classifier:
//   L_C  cross-entropy of the classifier on labelled nodes
//   L_E  cross-entropy of the estimator on nodes with known sensitive value
//   L_A  adversary log-likelihood; adversary_bce() returns -L_A
//   L_R  |Cov(s_hat, y_hat)|
// The adversary minimises adversary_bce; the classifier and estimator
// minimise L_C + L_E + alpha L_R - beta adversary_bce.

#include <cmath>
#include <numeric>
#include <span>
#include <utility>
#include <vector>

#include "fairgnn/autodiff.hpp"
#include "fairgnn/error.hpp"

namespace fairgnn {

inline constexpr double kProbClamp = 1e-7;

namespace detail {

inline std::vector<std::size_t> iota_index(std::size_t n) {
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    return idx;
}

/// Hard 0/1 targets as an n x 1 constant; entries outside `index` are zero.
inline Var hard_targets(Tape& tape, std::span<const int> values, std::span<const std::size_t> index, std::size_t n,
                        const char* what) {
    if (values.size() != n)
        throw ShapeError(std::string(what) + ": expected " + std::to_string(n) + " targets, got " +
                         std::to_string(values.size()));
    if (index.empty()) throw DataError(std::string(what) + ": empty index set");
    Tensor t = Tensor::Zero(static_cast<Eigen::Index>(n), 1);
    for (std::size_t i : index) {
        if (i >= n) throw DataError(std::string(what) + ": index " + std::to_string(i) + " out of range");
        const int v = values[i];
        if (v != 0 && v != 1)
            throw DataError(std::string(what) + ": target of node " + std::to_string(i) + " is " + std::to_string(v) +
                            ", expected 0 or 1");
        t(static_cast<Eigen::Index>(i), 0) = v;
    }
    return tape.constant(std::move(t));
}

}  // namespace detail

/// -mean_{i in index} [t log p + (1 - t) log(1 - p)] with p clamped to
/// [1e-7, 1 - 1e-7]. `target` is a constant n x 1 with values in [0, 1].
inline Var binary_cross_entropy(Var prob, Var target, std::span<const std::size_t> index) {
    ad::detail::require_same_shape(prob.value(), target.value(), "binary_cross_entropy");
    Var p = ad::clamp(prob, kProbClamp, 1.0 - kProbClamp);
    Var pos = ad::mul(target, ad::log(p));
    Var neg = ad::mul(ad::add_scalar(ad::scale(target, -1.0), 1.0), ad::log(ad::add_scalar(ad::scale(p, -1.0), 1.0)));
    return ad::scale(ad::mean_over(pos + neg, index), -1.0);
}

/// L_C over the labelled set.
inline Var classification_loss(Var y_prob, std::span<const int> labels, std::span<const std::size_t> labelled) {
    Var t = detail::hard_targets(*y_prob.tape, labels, labelled, static_cast<std::size_t>(y_prob.rows()),
                                 "classification_loss");
    return binary_cross_entropy(y_prob, t, labelled);
}

/// L_E over the nodes with known sensitive value.
inline Var estimator_loss(Var s_prob, std::span<const int> sensitive, std::span<const std::size_t> known) {
    Var t = detail::hard_targets(*s_prob.tape, sensitive, known, static_cast<std::size_t>(s_prob.rows()),
                                 "estimator_loss");
    return binary_cross_entropy(s_prob, t, known);
}

/// -L_A generalised to soft targets, averaged over `index` (all nodes when empty).
inline Var adversary_bce(Var adv_prob, const Tensor& targets, std::span<const std::size_t> index = {}) {
    if (targets.rows() != adv_prob.rows() || targets.cols() != 1)
        throw ShapeError("adversary_bce: target shape " + shape_str(targets) + " does not match " +
                         shape_str(adv_prob.value()));
    for (Eigen::Index i = 0; i < targets.rows(); ++i)
        if (!(targets(i, 0) >= 0.0 && targets(i, 0) <= 1.0))
            throw DataError("adversary_bce: target " + std::to_string(targets(i, 0)) + " of node " + std::to_string(i) +
                            " is outside [0,1]");
    Var t = adv_prob.tape->constant(targets);
    if (!index.empty()) return binary_cross_entropy(adv_prob, t, index);
    const auto all = detail::iota_index(static_cast<std::size_t>(adv_prob.rows()));
    return binary_cross_entropy(adv_prob, t, all);
}

/// |mean(s y) - mean(s) mean(y)| over `index` (all nodes when empty).
inline Var covariance_constraint(Var s_hat, Var y_hat, std::span<const std::size_t> index = {}) {
    ad::detail::require_same_shape(s_hat.value(), y_hat.value(), "covariance_constraint");
    ad::detail::require_column(s_hat.value(), "covariance_constraint");
    if (s_hat.rows() == 0) throw ShapeError("covariance_constraint: empty input");
    std::vector<std::size_t> all;
    if (index.empty()) {
        all = detail::iota_index(static_cast<std::size_t>(s_hat.rows()));
        index = all;
    }
    Var joint = ad::mean_over(ad::mul(s_hat, y_hat), index);
    Var product = ad::mul(ad::mean_over(s_hat, index), ad::mean_over(y_hat, index));
    return ad::abs(joint - product);
}

/// Scalar values of the four loss terms and their weights.
struct LossBundle {
    double l_c = 0.0;
    double l_e = 0.0;
    double l_a = 0.0;  // adversary_bce, i.e. -L_A
    double l_r = 0.0;
    double alpha = 0.0;
    double beta = 0.0;
};

/// Weighted combination on a tape: L_C + L_E + alpha L_R - beta adversary_bce.
/// A default-constructed Var (no tape) leaves that term out.
inline Var classifier_objective(Var l_c, Var l_e, Var l_r, Var adv_bce, double alpha, double beta) {
    if (alpha < 0.0 || beta < 0.0) throw ConfigError("alpha and beta must be nonnegative");
    Var total = l_c;
    if (l_e.tape != nullptr) total = total + l_e;
    if (l_r.tape != nullptr && alpha != 0.0) total = total + ad::scale(l_r, alpha);
    if (adv_bce.tape != nullptr && beta != 0.0) total = total - ad::scale(adv_bce, beta);
    return total;
}

/// (classifier objective, adversary objective) for a bundle of loss values.
inline std::pair<double, double> total_objective(const LossBundle& b) {
    if (b.alpha < 0.0 || b.beta < 0.0) throw ConfigError("alpha and beta must be nonnegative");
    return {b.l_c + b.l_e + b.alpha * b.l_r - b.beta * b.l_a, b.l_a};
}

// Value-only overloads.

inline double classification_loss(std::span<const double> y_prob, std::span<const int> labels,
                                  std::span<const std::size_t> labelled) {
    Tape tape;
    Tensor p = Eigen::Map<const Tensor>(y_prob.data(), static_cast<Eigen::Index>(y_prob.size()), 1);
    return classification_loss(tape.constant(std::move(p)), labels, labelled).value()(0, 0);
}

inline double estimator_loss(std::span<const double> s_prob, std::span<const int> sensitive,
                             std::span<const std::size_t> known) {
    Tape tape;
    Tensor p = Eigen::Map<const Tensor>(s_prob.data(), static_cast<Eigen::Index>(s_prob.size()), 1);
    return estimator_loss(tape.constant(std::move(p)), sensitive, known).value()(0, 0);
}

inline double adversary_bce(std::span<const double> adv_prob, std::span<const double> targets) {
    if (adv_prob.size() != targets.size()) throw ShapeError("adversary_bce: length mismatch");
    if (adv_prob.empty()) throw ShapeError("adversary_bce: empty input");
    Tape tape;
    const auto n = static_cast<Eigen::Index>(adv_prob.size());
    Tensor a = Eigen::Map<const Tensor>(adv_prob.data(), n, 1);
    Tensor t = Eigen::Map<const Tensor>(targets.data(), n, 1);
    return adversary_bce(tape.constant(std::move(a)), t).value()(0, 0);
}

inline double covariance_constraint(std::span<const double> s_hat, std::span<const double> y_hat) {
    if (s_hat.size() != y_hat.size()) throw ShapeError("covariance_constraint: length mismatch");
    if (s_hat.empty()) throw ShapeError("covariance_constraint: empty input");
    Tape tape;
    const auto n = static_cast<Eigen::Index>(s_hat.size());
    Tensor s = Eigen::Map<const Tensor>(s_hat.data(), n, 1);
    Tensor y = Eigen::Map<const Tensor>(y_hat.data(), n, 1);
    return covariance_constraint(tape.constant(std::move(s)), tape.constant(std::move(y))).value()(0, 0);
}

}  // namespace fairgnn
