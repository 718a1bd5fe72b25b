// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <span>
#include <vector>

#include "fairgnn/autodiff.hpp"

namespace fairgnn {

/// Builds a scalar loss on `tape` from one Var per parameter tensor.
using ScalarBuilder = std::function<Var(Tape&, std::span<const Var>)>;

namespace detail {

inline double evaluate_builder(const ScalarBuilder& f, const std::vector<Tensor>& params) {
    Tape tape;
    std::vector<Var> vars;
    vars.reserve(params.size());
    for (const auto& p : params) vars.push_back(tape.constant(p));
    const Var out = f(tape, vars);
    if (out.rows() != 1 || out.cols() != 1) throw ShapeError("finite_diff_check: builder must return a scalar");
    const double v = out.value()(0, 0);
    if (!std::isfinite(v)) throw DivergenceError("finite_diff_check: non-finite evaluation");
    return v;
}

}  // namespace detail

/// Analytic gradients of `f` at `params`, one tensor per parameter.
inline std::vector<Tensor> analytic_gradients(const ScalarBuilder& f, const std::vector<Tensor>& params) {
    Tape tape;
    std::vector<Var> vars;
    vars.reserve(params.size());
    for (const auto& p : params) vars.push_back(tape.parameter(p));
    const Var out = f(tape, vars);
    tape.backward(out);
    std::vector<Tensor> grads;
    grads.reserve(vars.size());
    for (Var v : vars) grads.push_back(tape.grad(v));
    return grads;
}

/// Compares tape gradients with central differences of step `eps` and returns
/// max |analytic - numeric| / max(1, |analytic|) over every coordinate.
inline double finite_diff_check(const ScalarBuilder& f, std::vector<Tensor> params, double eps = 1e-5) {
    if (!(eps > 0.0)) throw ConfigError("finite_diff_check: eps must be positive");
    const std::vector<Tensor> analytic = analytic_gradients(f, params);
    double worst = 0.0;
    for (std::size_t p = 0; p < params.size(); ++p) {
        for (Eigen::Index i = 0; i < params[p].size(); ++i) {
            const double orig = params[p].data()[i];
            params[p].data()[i] = orig + eps;
            const double up = detail::evaluate_builder(f, params);
            params[p].data()[i] = orig - eps;
            const double down = detail::evaluate_builder(f, params);
            params[p].data()[i] = orig;
            const double numeric = (up - down) / (2.0 * eps);
            const double a = analytic[p].data()[i];
            worst = std::max(worst, std::abs(a - numeric) / std::max(1.0, std::abs(a)));
        }
    }
    return worst;
}

}  // namespace fairgnn
