#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "fairgnn/models.hpp"

using namespace fairgnn;

namespace {

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

NodeModelParams zero_params(Backbone kind, Eigen::Index d, Eigen::Index h) {
    NodeModelParams p;
    p.kind = kind;
    p.w1 = Tensor::Zero(d, h);
    p.b1 = Tensor::Zero(1, h);
    if (kind == Backbone::GAT) {
        p.att_src = Tensor::Zero(h, 1);
        p.att_dst = Tensor::Zero(h, 1);
    }
    p.w2 = Tensor::Zero(h, 1);
    p.b2 = Tensor::Zero(1, 1);
    return p;
}

Tensor column(std::initializer_list<double> v) {
    Tensor t(static_cast<Eigen::Index>(v.size()), 1);
    Eigen::Index i = 0;
    for (double x : v) t(i++, 0) = x;
    return t;
}

Graph two_nodes(const Tensor& x) {
    std::vector<Edge> e{{0, 1}};
    return build_graph(e, 2, x);
}

Graph random_graph(std::size_t n, Eigen::Index d, std::mt19937_64& rng) {
    std::vector<Edge> e;
    for (std::size_t i = 0; i + 1 < n; ++i) e.emplace_back(i, i + 1);
    std::uniform_int_distribution<std::size_t> pick(0, n - 1);
    for (std::size_t k = 0; k < 2 * n; ++k) e.emplace_back(pick(rng), pick(rng));
    std::normal_distribution<double> nd;
    Tensor x(static_cast<Eigen::Index>(n), d);
    for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = nd(rng);
    return build_graph(e, n, x);
}

}  // namespace

TEST(Models, ZeroWeightsGiveOneHalf) {
    std::mt19937_64 rng(1);
    Graph g = random_graph(8, 3, rng);
    GraphContext ctx(g);
    for (Backbone kind : {Backbone::GCN, Backbone::GAT, Backbone::MLP}) {
        const auto out = predict(ctx.ops(), g.features(), zero_params(kind, 3, 4));
        EXPECT_TRUE((out.prob.array() == 0.5).all()) << to_string(kind);
    }
    Tape t;
    Var s = estimator_forward(t, ctx.ops(), t.constant(g.features()), bind(t, zero_params(Backbone::GCN, 3, 4), false));
    EXPECT_TRUE((s.value().array() == 0.5).all());

    AdversaryParams adv{Tensor::Zero(4, 1), Tensor::Zero(1, 1)};
    Tensor h(8, 4);
    h.setRandom();
    EXPECT_TRUE((adversary_predict(h, adv).array() == 0.5).all());
}

TEST(Models, GcnWithIdentityAdjacencyIsLogisticRegression) {
    Tensor x(3, 2);
    x << 0.5, 1.0, 2.0, 0.1, 0.0, 3.0;  // nonnegative, so the ReLU is inert
    NodeModelParams p = zero_params(Backbone::GCN, 2, 2);
    p.w1 = Tensor::Identity(2, 2);
    p.w2 = column({0.7, -0.4});
    p.b2(0, 0) = 0.1;
    const auto out = gcn_predict(NormAdj::identity(3), x, p);
    for (Eigen::Index i = 0; i < 3; ++i)
        EXPECT_NEAR(out.prob(i, 0), sigmoid(0.7 * x(i, 0) - 0.4 * x(i, 1) + 0.1), 1e-15);
}

TEST(Models, GcnHandCalculation) {
    const Tensor x = column({1.0, 3.0});
    Graph g = two_nodes(x);
    NodeModelParams p = zero_params(Backbone::GCN, 1, 1);
    p.w1(0, 0) = 2.0;
    p.b1(0, 0) = 0.5;
    p.w2(0, 0) = -0.1;
    p.b2(0, 0) = 0.2;
    const auto out = gcn_predict(sym_normalize(g), x, p);
    // Â = [[.5,.5],[.5,.5]]; ÂX = [2,2]; H = 2*2 + .5 = 4.5.
    EXPECT_DOUBLE_EQ(out.hidden(0, 0), 4.5);
    EXPECT_DOUBLE_EQ(out.hidden(1, 0), 4.5);
    EXPECT_NEAR(out.prob(0, 0), sigmoid(-0.25), 1e-15);
}

TEST(Models, GcnMatchesMlpWhenAdjacencyIsIdentity) {
    std::mt19937_64 rng(2);
    Graph g = random_graph(10, 4, rng);
    NodeModelParams gcn = init_node_model(Backbone::GCN, 4, 6, rng);
    NodeModelParams mlp = gcn;
    mlp.kind = Backbone::MLP;
    const NormAdj eye = NormAdj::identity(10);
    const auto a = predict(GraphOperators{&eye, nullptr}, g.features(), gcn);
    const auto b = predict(GraphOperators{}, g.features(), mlp);
    EXPECT_TRUE(a.prob.isApprox(b.prob, 1e-14));
    EXPECT_TRUE(a.hidden.isApprox(b.hidden, 1e-14));
}

TEST(Models, GatSelfLoopOnlyAttendsToItself) {
    std::mt19937_64 rng(3);
    Tensor x(1, 2);
    x << 0.3, -0.8;
    NodeModelParams p = init_node_model(Backbone::GAT, 2, 3, rng);
    const NormAdj pat = NormAdj::identity(1);
    Tape t;
    NodeModelVars v = bind(t, p, false);
    Var z = ad::matmul(t.constant(x), v.w1);
    Var att = ad::neighbor_softmax(pat, ad::edge_scores(pat, ad::matmul(z, v.att_src), ad::matmul(z, v.att_dst)));
    EXPECT_DOUBLE_EQ(att.value()(0, 0), 1.0);
    const auto out = predict(GraphOperators{nullptr, &pat}, x, p);
    const Tensor expected = ((x * p.w1).rowwise() + p.b1.row(0)).cwiseMax(0.0);
    EXPECT_TRUE(out.hidden.isApprox(expected, 1e-14));
}

TEST(Models, GatIdenticalFeaturesGiveUniformAttention) {
    std::mt19937_64 rng(4);
    std::vector<Edge> star{{0, 1}, {0, 2}, {0, 3}};
    Graph g = build_graph(star, 4, Tensor::Constant(4, 2, 0.7));
    const NormAdj pat = self_loop_pattern(g);
    NodeModelParams p = init_node_model(Backbone::GAT, 2, 3, rng);
    Tape t;
    NodeModelVars v = bind(t, p, false);
    Var z = ad::matmul(t.constant(g.features()), v.w1);
    Var att = ad::neighbor_softmax(
        pat, ad::leaky_relu(ad::edge_scores(pat, ad::matmul(z, v.att_src), ad::matmul(z, v.att_dst))));
    for (std::size_t i = 0; i < 4; ++i)
        for (std::size_t k = pat.indptr[i]; k < pat.indptr[i + 1]; ++k)
            EXPECT_NEAR(att.value()(static_cast<Eigen::Index>(k), 0),
                        1.0 / static_cast<double>(pat.indptr[i + 1] - pat.indptr[i]), 1e-15);
}

TEST(Models, GatHandCalculation) {
    const Tensor x = column({1.0, 2.0});
    Graph g = two_nodes(x);
    const NormAdj pat = self_loop_pattern(g);
    NodeModelParams p = zero_params(Backbone::GAT, 1, 1);
    p.w1(0, 0) = 1.0;
    p.att_src(0, 0) = 1.0;
    p.att_dst(0, 0) = -2.0;
    p.w2(0, 0) = 1.0;
    const auto out = predict(GraphOperators{nullptr, &pat}, x, p);

    auto lrelu = [](double v) { return v > 0 ? v : 0.2 * v; };
    // Node 0: e_00 = lrelu(1 - 2) = -0.2, e_01 = lrelu(1 - 4) = -0.6.
    const double e00 = lrelu(1.0 - 2.0), e01 = lrelu(1.0 - 4.0);
    const double a00 = std::exp(e00) / (std::exp(e00) + std::exp(e01));
    const double h0 = a00 * 1.0 + (1.0 - a00) * 2.0;
    // Node 1: e_10 = lrelu(2 - 2) = 0, e_11 = lrelu(2 - 4) = -0.4.
    const double e10 = lrelu(2.0 - 2.0), e11 = lrelu(2.0 - 4.0);
    const double a10 = std::exp(e10) / (std::exp(e10) + std::exp(e11));
    const double h1 = a10 * 1.0 + (1.0 - a10) * 2.0;
    EXPECT_NEAR(out.hidden(0, 0), h0, 1e-15);
    EXPECT_NEAR(out.hidden(1, 0), h1, 1e-15);
    EXPECT_NEAR(out.prob(1, 0), sigmoid(h1), 1e-15);
}

TEST(Models, AdversaryMatchesDirectEvaluation) {
    AdversaryParams unit{Tensor::Ones(1, 1), Tensor::Zero(1, 1)};
    EXPECT_DOUBLE_EQ(adversary_predict(Tensor::Zero(1, 1), unit)(0, 0), 0.5);

    std::mt19937_64 rng(5);
    Tensor h(6, 3);
    h.setRandom();
    AdversaryParams p{column({0.5, -1.5, 2.0}), Tensor::Constant(1, 1, 0.3)};
    const Tensor a = adversary_predict(h, p);
    for (Eigen::Index i = 0; i < 6; ++i)
        EXPECT_NEAR(a(i, 0), sigmoid(0.5 * h(i, 0) - 1.5 * h(i, 1) + 2.0 * h(i, 2) + 0.3), 1e-15);
    EXPECT_THROW(adversary_predict(Tensor::Zero(6, 2), p), ShapeError);
}

TEST(Models, MlpHandCalculation) {
    Tensor x(2, 2);
    x << 1.0, -1.0, 0.5, 2.0;
    NodeModelParams p = zero_params(Backbone::MLP, 2, 2);
    p.w1 << 1.0, -1.0, 2.0, 0.5;  // rows: input dims
    p.b1 << 0.0, 0.25;
    p.w2 = column({1.0, -2.0});
    p.b2(0, 0) = -0.5;
    const auto out = predict(GraphOperators{}, x, p);
    // Node 0: pre = [1 - 2, -1 - 0.5 + 0.25] = [-1, -1.25] -> h = [0, 0].
    EXPECT_DOUBLE_EQ(out.hidden(0, 0), 0.0);
    EXPECT_DOUBLE_EQ(out.hidden(0, 1), 0.0);
    EXPECT_NEAR(out.prob(0, 0), sigmoid(-0.5), 1e-15);
    // Node 1: pre = [0.5 + 4, -0.5 + 1 + 0.25] = [4.5, 0.75].
    EXPECT_DOUBLE_EQ(out.hidden(1, 0), 4.5);
    EXPECT_DOUBLE_EQ(out.hidden(1, 1), 0.75);
    EXPECT_NEAR(out.prob(1, 0), sigmoid(4.5 - 1.5 - 0.5), 1e-15);
}

TEST(Models, SingleNodeEstimatorIsDefined) {
    std::mt19937_64 rng(6);
    NodeModelParams p = init_node_model(Backbone::GCN, 2, 4, rng);
    const NormAdj eye = NormAdj::identity(1);
    const auto out = predict(GraphOperators{&eye, nullptr}, Tensor::Ones(1, 2), p);
    EXPECT_GT(out.prob(0, 0), 0.0);
    EXPECT_LT(out.prob(0, 0), 1.0);
}

TEST(Models, ShapeMismatch) {
    std::mt19937_64 rng(7);
    Graph g = random_graph(5, 3, rng);
    GraphContext ctx(g);
    for (Backbone kind : {Backbone::GCN, Backbone::GAT, Backbone::MLP})
        EXPECT_THROW(predict(ctx.ops(), g.features(), init_node_model(kind, 4, 2, rng)), ShapeError);
    EXPECT_THROW(predict(GraphOperators{}, g.features(), init_node_model(Backbone::GCN, 3, 2, rng)), ShapeError);
}

TEST(Models, PermutationEquivariance) {
    std::mt19937_64 rng(8);
    const std::size_t n = 12;
    Graph g = random_graph(n, 3, rng);
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    std::shuffle(perm.begin(), perm.end(), rng);

    std::vector<Edge> pe;
    for (auto [u, v] : g.edge_list()) pe.emplace_back(perm[u], perm[v]);
    Tensor px(g.features().rows(), g.features().cols());
    for (std::size_t i = 0; i < n; ++i) px.row(static_cast<Eigen::Index>(perm[i])) = g.features().row(static_cast<Eigen::Index>(i));
    Graph pg = build_graph(pe, n, px);

    GraphContext a(g), b(pg);
    for (Backbone kind : {Backbone::GCN, Backbone::GAT, Backbone::MLP}) {
        NodeModelParams p = init_node_model(kind, 3, 5, rng);
        const auto out = predict(a.ops(), g.features(), p);
        const auto pout = predict(b.ops(), pg.features(), p);
        for (std::size_t i = 0; i < n; ++i) {
            const auto pi = static_cast<Eigen::Index>(perm[i]), ii = static_cast<Eigen::Index>(i);
            EXPECT_NEAR(out.prob(ii, 0), pout.prob(pi, 0), 1e-13) << to_string(kind);
            EXPECT_TRUE(out.hidden.row(ii).isApprox(pout.hidden.row(pi), 1e-12)) << to_string(kind);
        }
    }
}

TEST(Models, ProbabilitiesStrictlyInsideUnitInterval) {
    std::mt19937_64 rng(9);
    Graph g = random_graph(30, 4, rng);
    GraphContext ctx(g);
    for (Backbone kind : {Backbone::GCN, Backbone::GAT, Backbone::MLP})
        for (int trial = 0; trial < 10; ++trial) {
            const auto out = predict(ctx.ops(), g.features(), init_node_model(kind, 4, 8, rng));
            EXPECT_TRUE((out.prob.array() > 0.0).all() && (out.prob.array() < 1.0).all());
        }
}

TEST(Models, BackboneNames) {
    EXPECT_EQ(parse_backbone("GAT"), Backbone::GAT);
    EXPECT_EQ(to_string(Backbone::MLP), "MLP");
    EXPECT_THROW(parse_backbone("SAGE"), ConfigError);
}
