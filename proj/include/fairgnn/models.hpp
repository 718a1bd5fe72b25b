// SPDX-License-Identifier: Apache-2.0
#pragma once

// Forward definitions of the node classifier, the sensitive-attribute
// estimator, the adversary and the graph-free MLP baseline.
//
// Every node model has two weight layers: an input layer producing the
// hidden representation h_v, then a linear sigmoid head. Backbones differ
// only in how the input layer mixes neighbours:
//   GCN  h = ReLU(Â X W + b)
//   GAT  h = ReLU(sum_j att_ij W x_j + b), single head
//   MLP  h = ReLU(X W + b)

#include <cstddef>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <utility>

#include "fairgnn/autodiff.hpp"
#include "fairgnn/graph.hpp"
#include "fairgnn/tensor.hpp"

namespace fairgnn {

enum class Backbone { GCN, GAT, MLP };

inline std::string_view to_string(Backbone b) {
    switch (b) {
        case Backbone::GCN: return "GCN";
        case Backbone::GAT: return "GAT";
        case Backbone::MLP: return "MLP";
    }
    return "?";
}

inline Backbone parse_backbone(std::string_view s) {
    if (s == "GCN" || s == "gcn") return Backbone::GCN;
    if (s == "GAT" || s == "gat") return Backbone::GAT;
    if (s == "MLP" || s == "mlp") return Backbone::MLP;
    throw ConfigError("unknown backbone '" + std::string(s) + "'");
}

inline constexpr std::size_t kDefaultHidden = 128;
inline constexpr double kAttentionSlope = 0.2;

/// Parameters of a two-layer node model (classifier f_G or estimator f_E).
struct NodeModelParams {
    Backbone kind = Backbone::GCN;
    Tensor w1;       // d x h
    Tensor b1;       // 1 x h
    Tensor att_src;  // h x 1, GAT only
    Tensor att_dst;  // h x 1, GAT only
    Tensor w2;       // h x 1
    Tensor b2;       // 1 x 1

    std::size_t input_dim() const { return static_cast<std::size_t>(w1.rows()); }
    std::size_t hidden_dim() const { return static_cast<std::size_t>(w1.cols()); }

    template <class F>
    void visit(F&& f) {
        f("w1", w1);
        f("b1", b1);
        if (kind == Backbone::GAT) {
            f("att_src", att_src);
            f("att_dst", att_dst);
        }
        f("w2", w2);
        f("b2", b2);
    }
    template <class F>
    void visit(F&& f) const {
        const_cast<NodeModelParams*>(this)->visit([&](const char* name, Tensor& t) { f(name, std::as_const(t)); });
    }
};

using ClassifierParams = NodeModelParams;
using EstimatorParams = NodeModelParams;

/// Linear adversary a = sigmoid(H w + b).
struct AdversaryParams {
    Tensor w;  // h x 1
    Tensor b;  // 1 x 1

    template <class F>
    void visit(F&& f) {
        f("w", w);
        f("b", b);
    }
    template <class F>
    void visit(F&& f) const {
        const_cast<AdversaryParams*>(this)->visit([&](const char* name, Tensor& t) { f(name, std::as_const(t)); });
    }
};

inline NodeModelParams init_node_model(Backbone kind, std::size_t input_dim, std::size_t hidden, std::mt19937_64& rng) {
    const auto d = static_cast<Eigen::Index>(input_dim);
    const auto h = static_cast<Eigen::Index>(hidden);
    NodeModelParams p;
    p.kind = kind;
    p.w1 = glorot_uniform(d, h, rng);
    p.b1 = Tensor::Zero(1, h);
    if (kind == Backbone::GAT) {
        p.att_src = glorot_uniform(h, 1, rng);
        p.att_dst = glorot_uniform(h, 1, rng);
    }
    p.w2 = glorot_uniform(h, 1, rng);
    p.b2 = Tensor::Zero(1, 1);
    return p;
}

inline AdversaryParams init_adversary(std::size_t hidden, std::mt19937_64& rng) {
    return AdversaryParams{glorot_uniform(static_cast<Eigen::Index>(hidden), 1, rng), Tensor::Zero(1, 1)};
}

/// Tape handles for a NodeModelParams.
struct NodeModelVars {
    Backbone kind = Backbone::GCN;
    Var w1, b1, att_src, att_dst, w2, b2;
};

struct AdversaryVars {
    Var w, b;
};

inline NodeModelVars bind(Tape& tape, const NodeModelParams& p, bool trainable) {
    NodeModelVars v;
    v.kind = p.kind;
    v.w1 = tape.leaf(p.w1, trainable);
    v.b1 = tape.leaf(p.b1, trainable);
    if (p.kind == Backbone::GAT) {
        v.att_src = tape.leaf(p.att_src, trainable);
        v.att_dst = tape.leaf(p.att_dst, trainable);
    }
    v.w2 = tape.leaf(p.w2, trainable);
    v.b2 = tape.leaf(p.b2, trainable);
    return v;
}

inline AdversaryVars bind(Tape& tape, const AdversaryParams& p, bool trainable) {
    return {tape.leaf(p.w, trainable), tape.leaf(p.b, trainable)};
}

/// Gradients read back from a tape, in the same layout as the parameters.
inline NodeModelParams gradients(const Tape& tape, const NodeModelVars& v) {
    NodeModelParams g;
    g.kind = v.kind;
    g.w1 = tape.grad(v.w1);
    g.b1 = tape.grad(v.b1);
    if (v.kind == Backbone::GAT) {
        g.att_src = tape.grad(v.att_src);
        g.att_dst = tape.grad(v.att_dst);
    }
    g.w2 = tape.grad(v.w2);
    g.b2 = tape.grad(v.b2);
    return g;
}

inline AdversaryParams gradients(const Tape& tape, const AdversaryVars& v) {
    return {tape.grad(v.w), tape.grad(v.b)};
}

/// The graph operators a forward pass may need. Both must outlive any tape
/// that uses them.
struct GraphOperators {
    const NormAdj* norm_adj = nullptr;  // symmetric-normalised A + I (GCN)
    const NormAdj* pattern = nullptr;   // unit pattern of A + I (GAT)
};

/// Owning counterpart of GraphOperators.
struct GraphContext {
    NormAdj norm_adj;
    NormAdj pattern;

    explicit GraphContext(const Graph& g) : norm_adj(sym_normalize(g)), pattern(self_loop_pattern(g)) {}
    GraphContext(NormAdj norm, NormAdj pat) : norm_adj(std::move(norm)), pattern(std::move(pat)) {}

    GraphOperators ops() const { return {&norm_adj, &pattern}; }
};

struct NodeOutput {
    Var hidden;  // n x h representation fed to the head and the adversary
    Var prob;    // n x 1 probabilities
};

/// Optional inverted dropout on the head input; off by default.
struct DropoutOptions {
    double rate = 0.0;
    std::mt19937_64* rng = nullptr;
};

namespace detail {

inline void require_input_dim(Var x, const NodeModelVars& p) {
    if (x.cols() != p.w1.rows())
        throw ShapeError("feature matrix has " + std::to_string(x.cols()) + " columns, model expects " +
                         std::to_string(p.w1.rows()));
}

inline NodeOutput head(Tape& tape, Var hidden, const NodeModelVars& p, const DropoutOptions& dropout) {
    Var head_in = hidden;
    if (dropout.rate > 0.0 && dropout.rng != nullptr) {
        std::bernoulli_distribution keep(1.0 - dropout.rate);
        Tensor mask(hidden.rows(), hidden.cols());
        for (Eigen::Index i = 0; i < mask.size(); ++i)
            mask.data()[i] = keep(*dropout.rng) ? 1.0 / (1.0 - dropout.rate) : 0.0;
        head_in = ad::mul(hidden, tape.constant(std::move(mask)));
    }
    Var prob = ad::sigmoid(ad::add_row_bias(ad::matmul(head_in, p.w2), p.b2));
    return {hidden, prob};
}

}  // namespace detail

/// GCN model: H = ReLU(Â X W + b), prob = sigmoid(H w + b0).
inline NodeOutput gcn_forward(Tape& tape, const NormAdj& adj, Var x, const NodeModelVars& p,
                              const DropoutOptions& dropout = {}) {
    detail::require_input_dim(x, p);
    // (Â X) W: with constant X the sparse product records no backward.
    Var mixed = ad::matmul(ad::sparse_matmul(adj, x), p.w1);
    Var hidden = ad::relu(ad::add_row_bias(mixed, p.b1));
    return detail::head(tape, hidden, p, dropout);
}

/// Single-head GAT model over the neighbourhood-plus-self pattern.
inline NodeOutput gat_forward(Tape& tape, const NormAdj& pattern, Var x, const NodeModelVars& p,
                              const DropoutOptions& dropout = {}) {
    detail::require_input_dim(x, p);
    Var z = ad::matmul(x, p.w1);
    Var scores = ad::leaky_relu(ad::edge_scores(pattern, ad::matmul(z, p.att_src), ad::matmul(z, p.att_dst)),
                                kAttentionSlope);
    Var attention = ad::neighbor_softmax(pattern, scores);
    Var hidden = ad::relu(ad::add_row_bias(ad::edge_aggregate(pattern, attention, z), p.b1));
    return detail::head(tape, hidden, p, dropout);
}

/// Graph-free baseline: H = ReLU(X W + b), prob = sigmoid(H w + b0).
inline NodeOutput mlp_forward(Tape& tape, Var x, const NodeModelVars& p, const DropoutOptions& dropout = {}) {
    detail::require_input_dim(x, p);
    Var hidden = ad::relu(ad::add_row_bias(ad::matmul(x, p.w1), p.b1));
    return detail::head(tape, hidden, p, dropout);
}

/// Dispatches on the backbone kind.
inline NodeOutput node_forward(Tape& tape, const GraphOperators& graph, Var x, const NodeModelVars& p,
                               const DropoutOptions& dropout = {}) {
    switch (p.kind) {
        case Backbone::GCN:
            if (graph.norm_adj == nullptr) throw ShapeError("GCN forward needs a normalised adjacency");
            return gcn_forward(tape, *graph.norm_adj, x, p, dropout);
        case Backbone::GAT:
            if (graph.pattern == nullptr) throw ShapeError("GAT forward needs an attention pattern");
            return gat_forward(tape, *graph.pattern, x, p, dropout);
        case Backbone::MLP:
            return mlp_forward(tape, x, p, dropout);
    }
    throw ShapeError("unknown backbone");
}

/// Estimator f_E: per-node probability that s = 1.
inline Var estimator_forward(Tape& tape, const GraphOperators& graph, Var x, const NodeModelVars& p) {
    return node_forward(tape, graph, x, p).prob;
}

/// Adversary f_A: a = sigmoid(H w_A + b_A).
inline Var adversary_forward(Var hidden, const AdversaryVars& p) {
    if (hidden.cols() != p.w.rows())
        throw ShapeError("adversary expects " + std::to_string(p.w.rows()) + "-dim representations, got " +
                         std::to_string(hidden.cols()));
    return ad::sigmoid(ad::add_row_bias(ad::matmul(hidden, p.w), p.b));
}

/// Value-only result of a node model.
struct NodePrediction {
    Tensor hidden;
    Tensor prob;
};

/// Runs a node model without recording gradients.
inline NodePrediction predict(const GraphOperators& graph, const Tensor& features, const NodeModelParams& p) {
    Tape tape;
    Var x = tape.constant(features);
    NodeOutput out = node_forward(tape, graph, x, bind(tape, p, false));
    return {out.hidden.value(), out.prob.value()};
}

inline NodePrediction gcn_predict(const NormAdj& adj, const Tensor& features, const NodeModelParams& p) {
    return predict(GraphOperators{&adj, nullptr}, features, p);
}

inline Tensor adversary_predict(const Tensor& hidden, const AdversaryParams& p) {
    Tape tape;
    return adversary_forward(tape.constant(hidden), bind(tape, p, false)).value();
}

}  // namespace fairgnn
