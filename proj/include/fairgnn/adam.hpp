// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <span>
#include <vector>

#include "fairgnn/error.hpp"
#include "fairgnn/tensor.hpp"

namespace fairgnn {

struct AdamConfig {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    double weight_decay = 0.0;  // L2 penalty folded into the gradient
};

/// Moments for one parameter group. Shapes are fixed on the first step.
struct AdamState {
    AdamConfig config;
    std::vector<Tensor> m;
    std::vector<Tensor> v;
    long step = 0;

    AdamState() = default;
    explicit AdamState(AdamConfig c) : config(c) {}
};

/// One bias-corrected Adam update applied in place.
inline void adam_step(std::span<Tensor* const> params, std::span<const Tensor> grads, AdamState& state) {
    if (params.size() != grads.size())
        throw ShapeError("adam_step: " + std::to_string(params.size()) + " parameters but " +
                         std::to_string(grads.size()) + " gradients");
    const AdamConfig& c = state.config;
    if (c.lr < 0.0 || c.beta1 < 0.0 || c.beta1 >= 1.0 || c.beta2 < 0.0 || c.beta2 >= 1.0 || c.eps <= 0.0)
        throw ConfigError("adam_step: invalid hyperparameters");
    if (state.m.empty()) {
        for (const Tensor* p : params) {
            state.m.push_back(Tensor::Zero(p->rows(), p->cols()));
            state.v.push_back(Tensor::Zero(p->rows(), p->cols()));
        }
    }
    if (state.m.size() != params.size()) throw ShapeError("adam_step: parameter count changed between steps");
    for (std::size_t i = 0; i < params.size(); ++i) {
        const Tensor& p = *params[i];
        if (grads[i].rows() != p.rows() || grads[i].cols() != p.cols() || state.m[i].rows() != p.rows() ||
            state.m[i].cols() != p.cols())
            throw ShapeError("adam_step: shape mismatch for parameter " + std::to_string(i) + " " + shape_str(p) +
                             " vs gradient " + shape_str(grads[i]));
    }

    ++state.step;
    const double bc1 = 1.0 - std::pow(c.beta1, static_cast<double>(state.step));
    const double bc2 = 1.0 - std::pow(c.beta2, static_cast<double>(state.step));
    for (std::size_t i = 0; i < params.size(); ++i) {
        Tensor& p = *params[i];
        Tensor g = grads[i];
        if (c.weight_decay != 0.0) g += c.weight_decay * p;
        state.m[i] = c.beta1 * state.m[i] + (1.0 - c.beta1) * g;
        state.v[i] = c.beta2 * state.v[i] + (1.0 - c.beta2) * g.cwiseProduct(g);
        auto m_hat = state.m[i].array() / bc1;
        auto v_hat = state.v[i].array() / bc2;
        p.array() -= c.lr * m_hat / (v_hat.sqrt() + c.eps);
    }
}

}  // namespace fairgnn
