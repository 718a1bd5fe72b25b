// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "fairgnn/error.hpp"
#include "fairgnn/tensor.hpp"

namespace fairgnn {

/// Marker for a missing label or sensitive value.
inline constexpr int kMissing = -1;

using Edge = std::pair<std::size_t, std::size_t>;

/// Immutable undirected attributed graph in CSR form.
///
/// Rows are sorted and deduplicated, carry no self-loops, and every node has
/// at least one neighbour. Labels and sensitive values are optional (empty
/// vector) and use kMissing for unknown entries.
class Graph {
public:
    Graph() = default;

    std::size_t num_nodes() const { return n_; }
    std::size_t num_edges() const { return indices_.size() / 2; }
    std::size_t feature_dim() const { return static_cast<std::size_t>(features_.cols()); }

    const std::vector<std::size_t>& indptr() const { return indptr_; }
    const std::vector<std::size_t>& indices() const { return indices_; }
    const Tensor& features() const { return features_; }
    const std::vector<int>& labels() const { return labels_; }
    const std::vector<int>& sensitive() const { return sensitive_; }

    std::span<const std::size_t> neighbors(std::size_t v) const {
        return {indices_.data() + indptr_[v], indptr_[v + 1] - indptr_[v]};
    }
    std::size_t degree(std::size_t v) const { return indptr_[v + 1] - indptr_[v]; }

    bool has_edge(std::size_t u, std::size_t v) const {
        auto row = neighbors(u);
        return std::binary_search(row.begin(), row.end(), v);
    }

    /// Undirected edge list with u < v, in CSR order.
    std::vector<Edge> edge_list() const {
        std::vector<Edge> out;
        out.reserve(num_edges());
        for (std::size_t u = 0; u < n_; ++u)
            for (std::size_t v : neighbors(u))
                if (u < v) out.emplace_back(u, v);
        return out;
    }

    friend Graph build_graph(std::span<const Edge>, std::size_t, Tensor, std::vector<int>,
                             std::vector<int>);

private:
    std::size_t n_ = 0;
    std::vector<std::size_t> indptr_{0};
    std::vector<std::size_t> indices_;
    Tensor features_;
    std::vector<int> labels_;
    std::vector<int> sensitive_;
};

namespace detail {

inline void check_binary_attribute(const std::vector<int>& values, std::size_t n, const char* what) {
    if (values.empty()) return;
    if (values.size() != n)
        throw DataError(std::string(what) + " vector has " + std::to_string(values.size()) +
                        " entries, expected " + std::to_string(n));
    for (std::size_t i = 0; i < n; ++i)
        if (values[i] != 0 && values[i] != 1 && values[i] != kMissing)
            throw DataError(std::string(what) + " of node " + std::to_string(i) +
                            " must be 0, 1 or -1, got " + std::to_string(values[i]));
}

}  // namespace detail

/// Builds a graph from an arbitrary edge list: symmetrises, deduplicates and
/// drops self-loops. Rejects out-of-range ids, non-finite features and any
/// node left without neighbours.
inline Graph build_graph(std::span<const Edge> edges, std::size_t n, Tensor features,
                         std::vector<int> labels = {}, std::vector<int> sensitive = {}) {
    if (static_cast<std::size_t>(features.rows()) != n)
        throw DataError("feature matrix has " + std::to_string(features.rows()) +
                        " rows, expected " + std::to_string(n));
    if (!features.allFinite()) throw DataError("feature matrix contains non-finite values");
    detail::check_binary_attribute(labels, n, "label");
    detail::check_binary_attribute(sensitive, n, "sensitive");

    std::vector<Edge> directed;
    directed.reserve(edges.size() * 2);
    for (const auto& [u, v] : edges) {
        if (u >= n || v >= n)
            throw DataError("edge (" + std::to_string(u) + "," + std::to_string(v) +
                            ") references a node outside [0," + std::to_string(n) + ")");
        if (u == v) continue;
        directed.emplace_back(u, v);
        directed.emplace_back(v, u);
    }
    std::sort(directed.begin(), directed.end());
    directed.erase(std::unique(directed.begin(), directed.end()), directed.end());

    Graph g;
    g.n_ = n;
    g.indptr_.assign(n + 1, 0);
    for (const auto& e : directed) ++g.indptr_[e.first + 1];
    for (std::size_t i = 0; i < n; ++i) g.indptr_[i + 1] += g.indptr_[i];
    g.indices_.reserve(directed.size());
    for (const auto& e : directed) g.indices_.push_back(e.second);

    for (std::size_t i = 0; i < n; ++i)
        if (g.indptr_[i + 1] == g.indptr_[i])
            throw DataError("node " + std::to_string(i) +
                            " is isolated; remove nodes without links before loading");

    g.features_ = std::move(features);
    g.labels_ = std::move(labels);
    g.sensitive_ = std::move(sensitive);
    return g;
}

/// Sparse symmetric matrix with self-loops; the CSR pattern of A + I.
struct NormAdj {
    std::size_t n = 0;
    std::vector<std::size_t> indptr{0};
    std::vector<std::size_t> indices;
    std::vector<double> values;

    std::size_t nnz() const { return indices.size(); }

    /// Value at (i, j), or 0 when absent.
    double at(std::size_t i, std::size_t j) const {
        auto first = indices.begin() + static_cast<std::ptrdiff_t>(indptr[i]);
        auto last = indices.begin() + static_cast<std::ptrdiff_t>(indptr[i + 1]);
        auto it = std::lower_bound(first, last, j);
        if (it == last || *it != j) return 0.0;
        return values[static_cast<std::size_t>(it - indices.begin())];
    }

    /// The n x n identity in this layout.
    static NormAdj identity(std::size_t n) {
        NormAdj a;
        a.n = n;
        a.indptr.resize(n + 1);
        a.indices.resize(n);
        a.values.assign(n, 1.0);
        for (std::size_t i = 0; i <= n; ++i) a.indptr[i] = i;
        for (std::size_t i = 0; i < n; ++i) a.indices[i] = i;
        return a;
    }
};

/// Pattern of A + I with unit values. Used as the attention neighbourhood.
inline NormAdj self_loop_pattern(const Graph& g) {
    NormAdj a;
    a.n = g.num_nodes();
    a.indptr.assign(a.n + 1, 0);
    a.indices.reserve(g.indices().size() + a.n);
    for (std::size_t i = 0; i < a.n; ++i) {
        bool self_done = false;
        for (std::size_t j : g.neighbors(i)) {
            if (!self_done && j > i) {
                a.indices.push_back(i);
                self_done = true;
            }
            a.indices.push_back(j);
        }
        if (!self_done) a.indices.push_back(i);
        a.indptr[i + 1] = a.indices.size();
    }
    a.values.assign(a.indices.size(), 1.0);
    return a;
}

/// D^-1/2 (A + I) D^-1/2 where D is the degree matrix of A + I.
inline NormAdj sym_normalize(const Graph& g) {
    NormAdj a = self_loop_pattern(g);
    std::vector<double> inv_sqrt(a.n);
    for (std::size_t i = 0; i < a.n; ++i)
        inv_sqrt[i] = 1.0 / std::sqrt(static_cast<double>(g.degree(i) + 1));
    for (std::size_t i = 0; i < a.n; ++i)
        for (std::size_t k = a.indptr[i]; k < a.indptr[i + 1]; ++k)
            a.values[k] = inv_sqrt[i] * inv_sqrt[a.indices[k]];
    return a;
}

/// Fraction of undirected edges whose endpoints share the sensitive value.
inline double homophily(const Graph& g, std::span<const int> s) {
    if (s.size() != g.num_nodes())
        throw DataError("sensitive vector length does not match node count");
    if (g.num_edges() == 0) throw DataError("homophily is undefined on a graph without edges");
    std::size_t intra = 0;
    for (std::size_t u = 0; u < g.num_nodes(); ++u) {
        for (std::size_t v : g.neighbors(u)) {
            if (v <= u) continue;
            if (s[u] == kMissing || s[v] == kMissing)
                throw DataError("edge (" + std::to_string(u) + "," + std::to_string(v) +
                                ") has an endpoint without a sensitive value");
            if (s[u] == s[v]) ++intra;
        }
    }
    return static_cast<double>(intra) / static_cast<double>(g.num_edges());
}

/// |majority group| / |minority group|, ignoring missing entries.
inline double group_ratio(std::span<const int> s) {
    std::size_t c0 = 0, c1 = 0;
    for (int v : s) {
        if (v == 0) ++c0;
        else if (v == 1) ++c1;
    }
    if (c0 == 0 || c1 == 0) throw DataError("group ratio needs both sensitive groups to be nonempty");
    return static_cast<double>(std::max(c0, c1)) / static_cast<double>(std::min(c0, c1));
}

}  // namespace fairgnn
