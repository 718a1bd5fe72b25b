// SPDX-License-Identifier: Apache-2.0
#pragma once

// Reverse-mode differentiation over dense tensors.
//
// A Tape records every primitive in insertion order together with a closure
// that propagates the output gradient to its inputs. Since nodes can only
// reference earlier nodes, insertion order is a topological order and
// backward() is a single reverse sweep.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "fairgnn/error.hpp"
#include "fairgnn/graph.hpp"
#include "fairgnn/tensor.hpp"

namespace fairgnn {

class Tape;

/// Handle to a node on a Tape.
struct Var {
    Tape* tape = nullptr;
    std::size_t id = 0;

    const Tensor& value() const;
    Eigen::Index rows() const { return value().rows(); }
    Eigen::Index cols() const { return value().cols(); }
};

class Tape {
public:
    Tape() = default;
    Tape(const Tape&) = delete;
    Tape& operator=(const Tape&) = delete;

    /// Leaf that never receives a gradient.
    Var constant(Tensor v) { return push(std::move(v), false, {}, "constant"); }

    /// Leaf whose gradient is collected by backward().
    Var parameter(Tensor v) { return push(std::move(v), true, {}, "parameter"); }

    /// Leaf that is a parameter only when `trainable` is set.
    Var leaf(Tensor v, bool trainable) { return trainable ? parameter(std::move(v)) : constant(std::move(v)); }

    const Tensor& value(Var v) const { return nodes_.at(v.id).value; }
    bool requires_grad(Var v) const { return nodes_.at(v.id).requires_grad; }
    std::size_t size() const { return nodes_.size(); }

    /// Gradient of the last backward() loss with respect to `v`. Parameters
    /// unreachable from the loss get zeros; non-parameter nodes throw.
    Tensor grad(Var v) const {
        const Node& node = nodes_.at(v.id);
        if (!node.requires_grad) throw ShapeError("requested gradient of a node that is not a parameter");
        if (node.grad.size() == 0) return Tensor::Zero(node.value.rows(), node.value.cols());
        return node.grad;
    }

    void backward(Var loss) {
        const Node& root = nodes_.at(loss.id);
        if (root.value.rows() != 1 || root.value.cols() != 1)
            throw ShapeError("backward() needs a scalar loss, got " + shape_str(root.value));
        for (auto& node : nodes_) node.grad.resize(0, 0);
        if (!root.requires_grad) return;
        nodes_[loss.id].grad = Tensor::Ones(1, 1);
        for (std::size_t i = loss.id + 1; i-- > 0;) {
            Node& node = nodes_[i];
            if (node.grad.size() == 0 || !node.backward) continue;
            // Closures only accumulate into earlier nodes, so node.grad stays valid.
            node.backward(node.grad);
        }
    }

    // Used by primitive implementations.
    using BackwardFn = std::function<void(const Tensor&)>;

    Var push(Tensor v, bool requires_grad, BackwardFn fn, const char* op) {
        if (!v.allFinite()) throw DivergenceError(std::string("non-finite value produced by ") + op);
        nodes_.push_back(Node{std::move(v), Tensor(), requires_grad, std::move(fn)});
        return Var{this, nodes_.size() - 1};
    }

    void accumulate(std::size_t id, const Tensor& g) {
        Node& node = nodes_[id];
        if (!node.requires_grad) return;
        if (node.grad.size() == 0) node.grad = g;
        else node.grad += g;
    }

private:
    struct Node {
        Tensor value;
        Tensor grad;
        bool requires_grad = false;
        BackwardFn backward;
    };
    std::vector<Node> nodes_;
};

inline const Tensor& Var::value() const { return tape->value(*this); }

namespace ad {

namespace detail {

inline Tape& same_tape(Var a, Var b) {
    if (a.tape == nullptr || a.tape != b.tape) throw ShapeError("operands live on different tapes");
    return *a.tape;
}

inline void require_same_shape(const Tensor& a, const Tensor& b, const char* op) {
    if (a.rows() != b.rows() || a.cols() != b.cols())
        throw ShapeError(std::string(op) + ": shape mismatch " + shape_str(a) + " vs " + shape_str(b));
}

inline void require_column(const Tensor& a, const char* op) {
    if (a.cols() != 1) throw ShapeError(std::string(op) + ": expected a column vector, got " + shape_str(a));
}

inline void require_pattern_rows(const NormAdj& p, Eigen::Index rows, const char* op) {
    if (static_cast<std::size_t>(rows) != p.n)
        throw ShapeError(std::string(op) + ": operand has " + std::to_string(rows) + " rows, graph has " +
                         std::to_string(p.n) + " nodes");
}

/// Elementwise unary op given f(x) and f'(x) expressed through (x, y).
template <class F, class DF>
Var unary(Var x, F f, DF df, const char* op) {
    Tape& t = *x.tape;
    const Tensor& xv = x.value();
    Tensor y = xv.unaryExpr(f);
    const bool rg = t.requires_grad(x);
    Tape::BackwardFn fn;
    if (rg) {
        fn = [&t, xid = x.id, df, xv, yv = y](const Tensor& g) {
            Tensor d(xv.rows(), xv.cols());
            for (Eigen::Index i = 0; i < d.size(); ++i) d.data()[i] = g.data()[i] * df(xv.data()[i], yv.data()[i]);
            t.accumulate(xid, d);
        };
    }
    return t.push(std::move(y), rg, std::move(fn), op);
}

}  // namespace detail

/// Dense matrix product a * b.
inline Var matmul(Var a, Var b) {
    Tape& t = detail::same_tape(a, b);
    const Tensor& av = a.value();
    const Tensor& bv = b.value();
    if (av.cols() != bv.rows())
        throw ShapeError("matmul: inner dimensions differ " + shape_str(av) + " * " + shape_str(bv));
    Tensor y = av * bv;
    const bool ra = t.requires_grad(a), rb = t.requires_grad(b);
    Tape::BackwardFn fn;
    if (ra || rb) {
        fn = [&t, a, b, ra, rb](const Tensor& g) {
            if (ra) t.accumulate(a.id, g * t.value(b).transpose());
            if (rb) t.accumulate(b.id, t.value(a).transpose() * g);
        };
    }
    return t.push(std::move(y), ra || rb, std::move(fn), "matmul");
}

/// Sparse-dense product adj * x; `adj` must outlive the tape.
inline Var sparse_matmul(const NormAdj& adj, Var x) {
    Tape& t = *x.tape;
    const Tensor& xv = x.value();
    detail::require_pattern_rows(adj, xv.rows(), "sparse_matmul");
    Tensor y = Tensor::Zero(xv.rows(), xv.cols());
    for (std::size_t i = 0; i < adj.n; ++i)
        for (std::size_t k = adj.indptr[i]; k < adj.indptr[i + 1]; ++k)
            y.row(static_cast<Eigen::Index>(i)) += adj.values[k] * xv.row(static_cast<Eigen::Index>(adj.indices[k]));
    const bool rg = t.requires_grad(x);
    Tape::BackwardFn fn;
    if (rg) {
        fn = [&t, xid = x.id, &adj](const Tensor& g) {
            Tensor d = Tensor::Zero(g.rows(), g.cols());
            for (std::size_t i = 0; i < adj.n; ++i)
                for (std::size_t k = adj.indptr[i]; k < adj.indptr[i + 1]; ++k)
                    d.row(static_cast<Eigen::Index>(adj.indices[k])) += adj.values[k] * g.row(static_cast<Eigen::Index>(i));
            t.accumulate(xid, d);
        };
    }
    return t.push(std::move(y), rg, std::move(fn), "sparse_matmul");
}

/// x + b where b is a 1 x k row broadcast over the rows of x.
inline Var add_row_bias(Var x, Var b) {
    Tape& t = detail::same_tape(x, b);
    const Tensor& xv = x.value();
    const Tensor& bv = b.value();
    if (bv.rows() != 1 || bv.cols() != xv.cols())
        throw ShapeError("add_row_bias: bias " + shape_str(bv) + " does not match " + shape_str(xv));
    Tensor y = xv.rowwise() + bv.row(0);
    const bool rx = t.requires_grad(x), rb = t.requires_grad(b);
    Tape::BackwardFn fn;
    if (rx || rb) {
        fn = [&t, x, b, rx, rb](const Tensor& g) {
            if (rx) t.accumulate(x.id, g);
            if (rb) t.accumulate(b.id, g.colwise().sum());
        };
    }
    return t.push(std::move(y), rx || rb, std::move(fn), "add_row_bias");
}

inline Var add(Var a, Var b) {
    Tape& t = detail::same_tape(a, b);
    detail::require_same_shape(a.value(), b.value(), "add");
    Tensor y = a.value() + b.value();
    const bool ra = t.requires_grad(a), rb = t.requires_grad(b);
    Tape::BackwardFn fn;
    if (ra || rb) {
        fn = [&t, a, b](const Tensor& g) {
            t.accumulate(a.id, g);
            t.accumulate(b.id, g);
        };
    }
    return t.push(std::move(y), ra || rb, std::move(fn), "add");
}

inline Var sub(Var a, Var b) {
    Tape& t = detail::same_tape(a, b);
    detail::require_same_shape(a.value(), b.value(), "sub");
    Tensor y = a.value() - b.value();
    const bool ra = t.requires_grad(a), rb = t.requires_grad(b);
    Tape::BackwardFn fn;
    if (ra || rb) {
        fn = [&t, a, b](const Tensor& g) {
            t.accumulate(a.id, g);
            t.accumulate(b.id, -g);
        };
    }
    return t.push(std::move(y), ra || rb, std::move(fn), "sub");
}

/// Elementwise (Hadamard) product.
inline Var mul(Var a, Var b) {
    Tape& t = detail::same_tape(a, b);
    detail::require_same_shape(a.value(), b.value(), "mul");
    Tensor y = a.value().cwiseProduct(b.value());
    const bool ra = t.requires_grad(a), rb = t.requires_grad(b);
    Tape::BackwardFn fn;
    if (ra || rb) {
        fn = [&t, a, b, ra, rb](const Tensor& g) {
            if (ra) t.accumulate(a.id, g.cwiseProduct(t.value(b)));
            if (rb) t.accumulate(b.id, g.cwiseProduct(t.value(a)));
        };
    }
    return t.push(std::move(y), ra || rb, std::move(fn), "mul");
}

/// c * x for a constant c.
inline Var scale(Var x, double c) {
    Tape& t = *x.tape;
    Tensor y = c * x.value();
    const bool rg = t.requires_grad(x);
    Tape::BackwardFn fn;
    if (rg) fn = [&t, xid = x.id, c](const Tensor& g) { t.accumulate(xid, c * g); };
    return t.push(std::move(y), rg, std::move(fn), "scale");
}

/// x + c elementwise for a constant c.
inline Var add_scalar(Var x, double c) {
    Tape& t = *x.tape;
    Tensor y = x.value().array() + c;
    const bool rg = t.requires_grad(x);
    Tape::BackwardFn fn;
    if (rg) fn = [&t, xid = x.id](const Tensor& g) { t.accumulate(xid, g); };
    return t.push(std::move(y), rg, std::move(fn), "add_scalar");
}

inline Var sigmoid(Var x) {
    return detail::unary(
        x,
        [](double v) { return v >= 0 ? 1.0 / (1.0 + std::exp(-v)) : std::exp(v) / (1.0 + std::exp(v)); },
        [](double, double y) { return y * (1.0 - y); }, "sigmoid");
}

inline Var relu(Var x) {
    return detail::unary(
        x, [](double v) { return v > 0 ? v : 0.0; }, [](double v, double) { return v > 0 ? 1.0 : 0.0; }, "relu");
}

inline Var leaky_relu(Var x, double slope = 0.2) {
    return detail::unary(
        x, [slope](double v) { return v > 0 ? v : slope * v; },
        [slope](double v, double) { return v > 0 ? 1.0 : slope; }, "leaky_relu");
}

inline Var log(Var x) {
    return detail::unary(
        x, [](double v) { return std::log(v); }, [](double v, double) { return 1.0 / v; }, "log");
}

/// Clamp to [lo, hi]; the gradient is zero outside the interval.
inline Var clamp(Var x, double lo, double hi) {
    return detail::unary(
        x, [lo, hi](double v) { return std::clamp(v, lo, hi); },
        [lo, hi](double v, double) { return (v < lo || v > hi) ? 0.0 : 1.0; }, "clamp");
}

/// |x| with subgradient 0 at the origin.
inline Var abs(Var x) {
    return detail::unary(
        x, [](double v) { return std::abs(v); },
        [](double v, double) { return v > 0 ? 1.0 : (v < 0 ? -1.0 : 0.0); }, "abs");
}

/// Mean of all entries, as a 1 x 1 tensor.
inline Var mean(Var x) {
    Tape& t = *x.tape;
    const Tensor& xv = x.value();
    if (xv.size() == 0) throw ShapeError("mean of an empty tensor");
    const double count = static_cast<double>(xv.size());
    Tensor y = scalar_tensor(xv.sum() / count);
    const bool rg = t.requires_grad(x);
    Tape::BackwardFn fn;
    if (rg) {
        fn = [&t, xid = x.id, r = xv.rows(), c = xv.cols(), count](const Tensor& g) {
            t.accumulate(xid, Tensor::Constant(r, c, g(0, 0) / count));
        };
    }
    return t.push(std::move(y), rg, std::move(fn), "mean");
}

/// Mean of a column vector over the rows in `index`, as a 1 x 1 tensor.
inline Var mean_over(Var x, std::span<const std::size_t> index) {
    Tape& t = *x.tape;
    const Tensor& xv = x.value();
    detail::require_column(xv, "mean_over");
    if (index.empty()) throw ShapeError("mean_over: empty index set");
    double sum = 0.0;
    for (std::size_t i : index) {
        if (i >= static_cast<std::size_t>(xv.rows()))
            throw ShapeError("mean_over: index " + std::to_string(i) + " out of range");
        sum += xv(static_cast<Eigen::Index>(i), 0);
    }
    const double count = static_cast<double>(index.size());
    Tensor y = scalar_tensor(sum / count);
    const bool rg = t.requires_grad(x);
    Tape::BackwardFn fn;
    if (rg) {
        fn = [&t, xid = x.id, rows = xv.rows(), idx = std::vector<std::size_t>(index.begin(), index.end()),
              count](const Tensor& g) {
            Tensor d = Tensor::Zero(rows, 1);
            for (std::size_t i : idx) d(static_cast<Eigen::Index>(i), 0) += g(0, 0) / count;
            t.accumulate(xid, d);
        };
    }
    return t.push(std::move(y), rg, std::move(fn), "mean_over");
}

/// Per-edge scores src[i] + dst[j] for every (i, j) in the pattern, nnz x 1.
inline Var edge_scores(const NormAdj& pattern, Var src, Var dst) {
    Tape& t = detail::same_tape(src, dst);
    detail::require_column(src.value(), "edge_scores");
    detail::require_column(dst.value(), "edge_scores");
    detail::require_pattern_rows(pattern, src.rows(), "edge_scores");
    detail::require_pattern_rows(pattern, dst.rows(), "edge_scores");
    const Tensor& sv = src.value();
    const Tensor& dv = dst.value();
    Tensor y(static_cast<Eigen::Index>(pattern.nnz()), 1);
    for (std::size_t i = 0; i < pattern.n; ++i)
        for (std::size_t k = pattern.indptr[i]; k < pattern.indptr[i + 1]; ++k)
            y(static_cast<Eigen::Index>(k), 0) =
                sv(static_cast<Eigen::Index>(i), 0) + dv(static_cast<Eigen::Index>(pattern.indices[k]), 0);
    const bool rs = t.requires_grad(src), rd = t.requires_grad(dst);
    Tape::BackwardFn fn;
    if (rs || rd) {
        fn = [&t, &pattern, src, dst, rs, rd](const Tensor& g) {
            Tensor ds = Tensor::Zero(static_cast<Eigen::Index>(pattern.n), 1);
            Tensor dd = Tensor::Zero(static_cast<Eigen::Index>(pattern.n), 1);
            for (std::size_t i = 0; i < pattern.n; ++i)
                for (std::size_t k = pattern.indptr[i]; k < pattern.indptr[i + 1]; ++k) {
                    const double gk = g(static_cast<Eigen::Index>(k), 0);
                    ds(static_cast<Eigen::Index>(i), 0) += gk;
                    dd(static_cast<Eigen::Index>(pattern.indices[k]), 0) += gk;
                }
            if (rs) t.accumulate(src.id, ds);
            if (rd) t.accumulate(dst.id, dd);
        };
    }
    return t.push(std::move(y), rs || rd, std::move(fn), "edge_scores");
}

/// Softmax of per-edge scores within each row of the pattern.
inline Var neighbor_softmax(const NormAdj& pattern, Var scores) {
    Tape& t = *scores.tape;
    const Tensor& ev = scores.value();
    detail::require_column(ev, "neighbor_softmax");
    if (static_cast<std::size_t>(ev.rows()) != pattern.nnz())
        throw ShapeError("neighbor_softmax: expected one score per pattern entry");
    Tensor y(ev.rows(), 1);
    for (std::size_t i = 0; i < pattern.n; ++i) {
        const auto lo = static_cast<Eigen::Index>(pattern.indptr[i]);
        const auto len = static_cast<Eigen::Index>(pattern.indptr[i + 1] - pattern.indptr[i]);
        if (len == 0) continue;
        auto seg = ev.col(0).segment(lo, len);
        const double mx = seg.maxCoeff();
        auto out = y.col(0).segment(lo, len);
        out = (seg.array() - mx).exp().matrix();
        out /= out.sum();
    }
    const bool rg = t.requires_grad(scores);
    Tape::BackwardFn fn;
    if (rg) {
        fn = [&t, &pattern, sid = scores.id, yv = y](const Tensor& g) {
            Tensor d(yv.rows(), 1);
            for (std::size_t i = 0; i < pattern.n; ++i) {
                const auto lo = static_cast<Eigen::Index>(pattern.indptr[i]);
                const auto len = static_cast<Eigen::Index>(pattern.indptr[i + 1] - pattern.indptr[i]);
                if (len == 0) continue;
                auto ys = yv.col(0).segment(lo, len);
                auto gs = g.col(0).segment(lo, len);
                const double dot = ys.dot(gs);
                d.col(0).segment(lo, len) = ys.cwiseProduct((gs.array() - dot).matrix());
            }
            t.accumulate(sid, d);
        };
    }
    return t.push(std::move(y), rg, std::move(fn), "neighbor_softmax");
}

/// out_i = sum over pattern row i of weight_ij * z_j.
inline Var edge_aggregate(const NormAdj& pattern, Var weights, Var z) {
    Tape& t = detail::same_tape(weights, z);
    const Tensor& wv = weights.value();
    const Tensor& zv = z.value();
    detail::require_column(wv, "edge_aggregate");
    if (static_cast<std::size_t>(wv.rows()) != pattern.nnz())
        throw ShapeError("edge_aggregate: expected one weight per pattern entry");
    detail::require_pattern_rows(pattern, zv.rows(), "edge_aggregate");
    Tensor y = Tensor::Zero(zv.rows(), zv.cols());
    for (std::size_t i = 0; i < pattern.n; ++i)
        for (std::size_t k = pattern.indptr[i]; k < pattern.indptr[i + 1]; ++k)
            y.row(static_cast<Eigen::Index>(i)) +=
                wv(static_cast<Eigen::Index>(k), 0) * zv.row(static_cast<Eigen::Index>(pattern.indices[k]));
    const bool rw = t.requires_grad(weights), rz = t.requires_grad(z);
    Tape::BackwardFn fn;
    if (rw || rz) {
        fn = [&t, &pattern, weights, z, rw, rz](const Tensor& g) {
            const Tensor& wv = t.value(weights);
            const Tensor& zv = t.value(z);
            Tensor dw = Tensor::Zero(wv.rows(), 1);
            Tensor dz = Tensor::Zero(zv.rows(), zv.cols());
            for (std::size_t i = 0; i < pattern.n; ++i) {
                const auto gi = g.row(static_cast<Eigen::Index>(i));
                for (std::size_t k = pattern.indptr[i]; k < pattern.indptr[i + 1]; ++k) {
                    const auto j = static_cast<Eigen::Index>(pattern.indices[k]);
                    if (rw) dw(static_cast<Eigen::Index>(k), 0) = gi.dot(zv.row(j));
                    if (rz) dz.row(j) += wv(static_cast<Eigen::Index>(k), 0) * gi;
                }
            }
            if (rw) t.accumulate(weights.id, dw);
            if (rz) t.accumulate(z.id, dz);
        };
    }
    return t.push(std::move(y), rw || rz, std::move(fn), "edge_aggregate");
}

}  // namespace ad

inline Var operator+(Var a, Var b) { return ad::add(a, b); }
inline Var operator-(Var a, Var b) { return ad::sub(a, b); }
inline Var operator*(double c, Var x) { return ad::scale(x, c); }

}  // namespace fairgnn
