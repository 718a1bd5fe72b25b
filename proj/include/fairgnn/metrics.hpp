// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "fairgnn/error.hpp"

namespace fairgnn {

inline constexpr double kDefaultThreshold = 0.5;

namespace detail {

inline void require_equal_length(std::size_t a, std::size_t b, const char* what) {
    if (a != b)
        throw MetricError(std::string(what) + ": length mismatch " + std::to_string(a) + " vs " + std::to_string(b));
}

inline void require_binary(std::span<const int> v, const char* what) {
    for (int x : v)
        if (x != 0 && x != 1) throw MetricError(std::string(what) + ": values must be 0 or 1");
}

}  // namespace detail

/// Fraction of nodes with (prob >= threshold) == y.
inline double accuracy(std::span<const double> prob, std::span<const int> y, double threshold = kDefaultThreshold) {
    detail::require_equal_length(prob.size(), y.size(), "accuracy");
    if (prob.empty()) throw MetricError("accuracy: empty input");
    detail::require_binary(y, "accuracy");
    std::size_t correct = 0;
    for (std::size_t i = 0; i < prob.size(); ++i)
        if (static_cast<int>(prob[i] >= threshold) == y[i]) ++correct;
    return static_cast<double>(correct) / static_cast<double>(prob.size());
}

/// ROC AUC as the Mann-Whitney statistic with average ranks for ties.
inline double auc(std::span<const double> score, std::span<const int> y) {
    detail::require_equal_length(score.size(), y.size(), "auc");
    detail::require_binary(y, "auc");
    const std::size_t n = score.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return score[a] < score[b]; });
    std::vector<double> rank(n);
    for (std::size_t i = 0; i < n;) {
        std::size_t j = i;
        while (j + 1 < n && score[order[j + 1]] == score[order[i]]) ++j;
        const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
        for (std::size_t k = i; k <= j; ++k) rank[order[k]] = avg;
        i = j + 1;
    }
    double pos_rank_sum = 0.0;
    std::size_t n_pos = 0;
    for (std::size_t i = 0; i < n; ++i)
        if (y[i] == 1) {
            pos_rank_sum += rank[i];
            ++n_pos;
        }
    const std::size_t n_neg = n - n_pos;
    if (n_pos == 0 || n_neg == 0) throw MetricError("auc: both classes must be present");
    const double np = static_cast<double>(n_pos), nn = static_cast<double>(n_neg);
    return (pos_rank_sum - np * (np + 1.0) / 2.0) / (np * nn);
}

/// Per-group conditionals used by delta_sp / delta_eo.
struct GroupStats {
    std::size_t size = 0;
    std::size_t predicted_positive = 0;
    std::size_t positives = 0;       // y == 1
    std::size_t true_positives = 0;  // y == 1 and predicted positive

    double positive_rate() const {
        return size == 0 ? 0.0 : static_cast<double>(predicted_positive) / static_cast<double>(size);
    }
    double tpr() const { return positives == 0 ? 0.0 : static_cast<double>(true_positives) / static_cast<double>(positives); }
};

/// Group statistics; `y` may be empty when only positive rates are needed.
inline std::array<GroupStats, 2> group_stats(std::span<const double> prob, std::span<const int> y, std::span<const int> s,
                                             double threshold = kDefaultThreshold) {
    detail::require_equal_length(prob.size(), s.size(), "group_stats");
    if (!y.empty()) detail::require_equal_length(prob.size(), y.size(), "group_stats");
    detail::require_binary(s, "sensitive");
    if (!y.empty()) detail::require_binary(y, "labels");
    std::array<GroupStats, 2> g{};
    for (std::size_t i = 0; i < prob.size(); ++i) {
        GroupStats& st = g[static_cast<std::size_t>(s[i])];
        const bool pred = prob[i] >= threshold;
        ++st.size;
        if (pred) ++st.predicted_positive;
        if (!y.empty() && y[i] == 1) {
            ++st.positives;
            if (pred) ++st.true_positives;
        }
    }
    return g;
}

/// |P(yhat = 1 | s = 0) - P(yhat = 1 | s = 1)|.
inline double delta_sp(std::span<const double> prob, std::span<const int> s, double threshold = kDefaultThreshold) {
    const auto g = group_stats(prob, {}, s, threshold);
    if (g[0].size == 0 || g[1].size == 0) throw MetricError("delta_sp: both sensitive groups must be present");
    return std::abs(g[0].positive_rate() - g[1].positive_rate());
}

/// |TPR(s = 0) - TPR(s = 1)|.
inline double delta_eo(std::span<const double> prob, std::span<const int> y, std::span<const int> s,
                       double threshold = kDefaultThreshold) {
    detail::require_equal_length(prob.size(), y.size(), "delta_eo");
    const auto g = group_stats(prob, y, s, threshold);
    if (g[0].positives == 0 || g[1].positives == 0)
        throw MetricError("delta_eo: each sensitive group needs at least one positive label");
    return std::abs(g[0].tpr() - g[1].tpr());
}

struct MetricsReport {
    double acc = 0.0;
    double auc = 0.0;
    double delta_sp = 0.0;
    double delta_eo = 0.0;
    std::array<GroupStats, 2> groups{};
};

/// All four metrics on one evaluation set, against ground-truth s.
inline MetricsReport evaluate_metrics(std::span<const double> prob, std::span<const int> y, std::span<const int> s,
                                      double threshold = kDefaultThreshold) {
    MetricsReport r;
    r.acc = accuracy(prob, y, threshold);
    r.auc = auc(prob, y);
    r.delta_sp = delta_sp(prob, s, threshold);
    r.delta_eo = delta_eo(prob, y, s, threshold);
    r.groups = group_stats(prob, y, s, threshold);
    return r;
}

}  // namespace fairgnn
