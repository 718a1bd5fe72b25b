// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <random>
#include <string>

#include "fairgnn/error.hpp"

namespace fairgnn {

/// Dense row-major matrix of doubles. Column vectors are n x 1, scalars 1 x 1.
using Tensor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

inline std::string shape_str(const Tensor& t) {
    return "(" + std::to_string(t.rows()) + "x" + std::to_string(t.cols()) + ")";
}

inline bool all_finite(const Tensor& t) { return t.allFinite(); }

inline Tensor scalar_tensor(double v) {
    Tensor t(1, 1);
    t(0, 0) = v;
    return t;
}

/// Uniform Glorot initialisation in +-sqrt(6 / (fan_in + fan_out)).
inline Tensor glorot_uniform(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& rng) {
    const double bound = std::sqrt(6.0 / static_cast<double>(rows + cols));
    std::uniform_real_distribution<double> dist(-bound, bound);
    Tensor t(rows, cols);
    for (Eigen::Index i = 0; i < t.size(); ++i) t.data()[i] = dist(rng);
    return t;
}

}  // namespace fairgnn
