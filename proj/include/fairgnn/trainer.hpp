// SPDX-License-Identifier: Apache-2.0
#pragma once

// Training loop for the plain node classifiers and the debiased FairGNN
// classifier.
//
// FairGNN training first pretrains the estimator on L_E, then repeats, once
// per epoch and full batch:
//   1. forward f_G and f_E; merge the estimator's soft outputs with the known
//      sensitive values (known values win on V_S);
//   2. one Adam step of the adversary on adversary_bce, representations fixed;
//   3. one Adam step of f_G and f_E on L_C + L_E + alpha L_R - beta adversary_bce,
//      adversary fixed.
// The merged targets enter L_R and L_A as constants, so the estimator is
// trained by L_E alone.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "fairgnn/adam.hpp"
#include "fairgnn/autodiff.hpp"
#include "fairgnn/data_io.hpp"
#include "fairgnn/metrics.hpp"
#include "fairgnn/models.hpp"
#include "fairgnn/objectives.hpp"

namespace fairgnn {

/// Which sensitive targets the fairness terms (L_A, L_R) use.
enum class FairnessTargets {
    Estimated,      // ground truth on V_S, estimator probabilities elsewhere; all nodes
    SensitiveOnly,  // ground truth on V_S only; no estimator
};

struct TrainConfig {
    Backbone backbone = Backbone::GCN;
    std::size_t hidden = kDefaultHidden;

    bool fair = false;  // false trains the classifier on L_C alone
    FairnessTargets targets = FairnessTargets::Estimated;
    Backbone estimator_backbone = Backbone::GCN;
    std::size_t estimator_hidden = kDefaultHidden;
    double alpha = 0.0;
    double beta = 0.0;

    std::size_t epochs = 1000;
    std::size_t pretrain_epochs = 200;
    AdamConfig adam{};
    double dropout = 0.0;
    std::uint64_t seed = 0;

    // Model selection: best validation ACC among epochs with validation
    // delta_sp <= sp_threshold and delta_eo <= eo_threshold; if none qualify,
    // best ACC - (delta_sp + delta_eo).
    double sp_threshold = std::numeric_limits<double>::infinity();
    double eo_threshold = std::numeric_limits<double>::infinity();

    double estimator_holdout_frac = 0.2;

    bool uses_estimator() const { return fair && targets == FairnessTargets::Estimated; }
};

inline void validate(const TrainConfig& c) {
    if (c.epochs < 1) throw ConfigError("epochs must be >= 1");
    if (!(c.adam.lr >= 0.0) || !std::isfinite(c.adam.lr)) throw ConfigError("lr must be finite and nonnegative");
    if (c.alpha < 0.0 || c.beta < 0.0) throw ConfigError("alpha and beta must be nonnegative");
    if (c.hidden == 0 || c.estimator_hidden == 0) throw ConfigError("hidden dimensions must be positive");
    if (c.dropout < 0.0 || c.dropout >= 1.0) throw ConfigError("dropout must lie in [0,1)");
    if (c.estimator_holdout_frac < 0.0 || c.estimator_holdout_frac >= 1.0)
        throw ConfigError("estimator_holdout_frac must lie in [0,1)");
}

/// Parameters of one trained model. Estimator and adversary exist only for
/// FairGNN variants that use them.
struct FairGnnParams {
    ClassifierParams classifier;
    std::optional<EstimatorParams> estimator;
    std::optional<AdversaryParams> adversary;
};

inline NamedTensors to_named(const FairGnnParams& p) {
    NamedTensors out;
    auto add_model = [&](const std::string& prefix, const NodeModelParams& m) {
        out.emplace_back(prefix + ".kind", scalar_tensor(static_cast<double>(static_cast<int>(m.kind))));
        m.visit([&](const char* name, const Tensor& t) { out.emplace_back(prefix + "." + name, t); });
    };
    add_model("classifier", p.classifier);
    if (p.estimator) add_model("estimator", *p.estimator);
    if (p.adversary)
        p.adversary->visit([&](const char* name, const Tensor& t) { out.emplace_back(std::string("adversary.") + name, t); });
    return out;
}

inline FairGnnParams from_named(const NamedTensors& tensors) {
    auto find = [&](const std::string& name) -> const Tensor* {
        for (const auto& [k, t] : tensors)
            if (k == name) return &t;
        return nullptr;
    };
    auto require = [&](const std::string& name) -> const Tensor& {
        const Tensor* t = find(name);
        if (t == nullptr) throw DataError("checkpoint is missing tensor '" + name + "'");
        return *t;
    };
    auto load_model = [&](const std::string& prefix) {
        NodeModelParams m;
        const Tensor& kind = require(prefix + ".kind");
        const int k = static_cast<int>(kind(0, 0));
        if (kind.size() != 1 || k < 0 || k > 2) throw DataError("checkpoint has an invalid " + prefix + ".kind");
        m.kind = static_cast<Backbone>(k);
        m.visit([&](const char* name, Tensor& t) { t = require(prefix + "." + name); });
        const auto h = m.w1.cols();
        if (m.b1.rows() != 1 || m.b1.cols() != h || m.w2.rows() != h || m.w2.cols() != 1 || m.b2.size() != 1 ||
            (m.kind == Backbone::GAT && (m.att_src.rows() != h || m.att_dst.rows() != h)))
            throw DataError("checkpoint tensors of '" + prefix + "' have inconsistent shapes");
        return m;
    };
    FairGnnParams p;
    p.classifier = load_model("classifier");
    if (find("estimator.kind") != nullptr) p.estimator = load_model("estimator");
    if (find("adversary.w") != nullptr) {
        p.adversary = AdversaryParams{require("adversary.w"), require("adversary.b")};
        if (p.adversary->w.rows() != p.classifier.w1.cols() || p.adversary->b.size() != 1)
            throw DataError("checkpoint adversary does not match the classifier's hidden size");
    }
    return p;
}

/// Graph, features and splits prepared once per run.
class TrainingData {
public:
    TrainingData(const Dataset& ds, SplitSpec splits) : ds_(&ds), splits_(std::move(splits)), context_(ds.graph) {
        validate_splits(splits_, ds.num_nodes());
    }
    TrainingData(const TrainingData&) = delete;
    TrainingData& operator=(const TrainingData&) = delete;

    const Dataset& dataset() const { return *ds_; }
    const SplitSpec& splits() const { return splits_; }
    GraphOperators ops() const { return context_.ops(); }
    const Tensor& features() const { return ds_->graph.features(); }
    std::size_t num_nodes() const { return ds_->num_nodes(); }
    const std::vector<int>& labels() const { return ds_->labels(); }
    const std::vector<int>& sensitive() const { return ds_->sensitive(); }

private:
    const Dataset* ds_;
    SplitSpec splits_;
    GraphContext context_;
};

// ---------------------------------------------------------------------------
// Estimator pretraining

struct PretrainResult {
    EstimatorParams estimator;
    double holdout_acc = 0.0;
    double majority_rate = 0.0;          // accuracy of always predicting the held-out majority
    std::optional<double> holdout_auc;   // absent when the held-out slice is single-group
    bool informative = false;            // holdout_acc > majority_rate
    std::size_t holdout_size = 0;
};

namespace detail {

inline std::vector<double> gather(const Tensor& column, std::span<const std::size_t> index) {
    std::vector<double> out;
    out.reserve(index.size());
    for (std::size_t i : index) out.push_back(column(static_cast<Eigen::Index>(i), 0));
    return out;
}

inline std::vector<int> gather(const std::vector<int>& values, std::span<const std::size_t> index) {
    std::vector<int> out;
    out.reserve(index.size());
    for (std::size_t i : index) out.push_back(values[i]);
    return out;
}

inline void require_both_groups(const std::vector<int>& s, std::span<const std::size_t> index, const char* what) {
    bool seen[2] = {false, false};
    for (std::size_t i : index) {
        if (s[i] != 0 && s[i] != 1) throw DataError(std::string(what) + " contains a node without a sensitive value");
        seen[s[i]] = true;
    }
    if (!seen[0] || !seen[1]) throw DataError(std::string(what) + " must contain both sensitive groups");
}

/// Trains `est` on L_E over `index` for `epochs` full-batch Adam steps.
inline void fit_estimator(const TrainingData& data, EstimatorParams& est, std::span<const std::size_t> index,
                          std::size_t epochs, const AdamConfig& adam) {
    AdamState state(adam);
    for (std::size_t e = 0; e < epochs; ++e) {
        Tape tape;
        Var x = tape.constant(data.features());
        NodeModelVars vars = bind(tape, est, true);
        Var s_prob = estimator_forward(tape, data.ops(), x, vars);
        Var loss = estimator_loss(s_prob, data.sensitive(), index);
        tape.backward(loss);
        NodeModelParams g = gradients(tape, vars);
        std::vector<Tensor*> ps;
        std::vector<Tensor> gs;
        est.visit([&](const char*, Tensor& t) { ps.push_back(&t); });
        g.visit([&](const char*, Tensor& t) { gs.push_back(std::move(t)); });
        adam_step(ps, gs, state);
    }
}

}  // namespace detail

/// Pretrains f_E on L_E. A held-out slice of V_S checks that the estimator
/// is better than predicting the majority group.
inline PretrainResult pretrain_estimator(const TrainingData& data, const TrainConfig& cfg, std::mt19937_64& rng) {
    const auto& v_s = data.splits().v_s;
    if (v_s.empty()) throw DataError("pretraining the estimator needs a nonempty V_S");
    detail::require_both_groups(data.sensitive(), v_s, "V_S");

    std::vector<std::size_t> order(v_s.begin(), v_s.end());
    std::shuffle(order.begin(), order.end(), rng);
    auto n_hold = static_cast<std::size_t>(std::llround(cfg.estimator_holdout_frac * static_cast<double>(order.size())));
    if (cfg.estimator_holdout_frac > 0.0) n_hold = std::clamp<std::size_t>(n_hold, 1, order.size() - 1);
    std::vector<std::size_t> holdout(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_hold));
    std::vector<std::size_t> fit_idx(order.begin() + static_cast<std::ptrdiff_t>(n_hold), order.end());
    std::sort(holdout.begin(), holdout.end());
    std::sort(fit_idx.begin(), fit_idx.end());

    PretrainResult r;
    r.estimator = init_node_model(cfg.estimator_backbone, data.features().cols(), cfg.estimator_hidden, rng);
    detail::fit_estimator(data, r.estimator, fit_idx, cfg.pretrain_epochs, cfg.adam);

    r.holdout_size = holdout.size();
    if (!holdout.empty()) {
        const Tensor s_prob = predict(data.ops(), data.features(), r.estimator).prob;
        const auto p = detail::gather(s_prob, holdout);
        const auto s = detail::gather(data.sensitive(), holdout);
        r.holdout_acc = accuracy(p, s);
        const auto ones = static_cast<double>(std::count(s.begin(), s.end(), 1));
        r.majority_rate = std::max(ones, static_cast<double>(s.size()) - ones) / static_cast<double>(s.size());
        if (ones > 0 && ones < static_cast<double>(s.size())) r.holdout_auc = auc(p, s);
        r.informative = r.holdout_acc > r.majority_rate;
    }
    return r;
}

// ---------------------------------------------------------------------------
// One training step

struct TrainState {
    FairGnnParams params;
    AdamState main;       // classifier (+ estimator)
    AdamState adversary;  // adversary only
};

struct StepResult {
    LossBundle losses;
    Tensor y_prob;  // classifier output at the parameters before this step
    Tensor merged_targets;  // sensitive targets used by the fairness terms (empty for plain training)
};

namespace detail {

inline void collect(NodeModelParams& p, std::vector<Tensor*>& out) {
    p.visit([&](const char*, Tensor& t) { out.push_back(&t); });
}
inline void collect_grads(NodeModelParams g, std::vector<Tensor>& out) {
    g.visit([&](const char*, Tensor& t) { out.push_back(std::move(t)); });
}

}  // namespace detail

/// Merged sensitive targets: ground truth on V_S, estimator probabilities
/// elsewhere (or zero when `s_prob` is empty).
inline Tensor merge_sensitive_targets(const Tensor& s_prob, const std::vector<int>& sensitive,
                                      std::span<const std::size_t> v_s, std::size_t n) {
    Tensor merged = s_prob.size() == 0 ? Tensor::Zero(static_cast<Eigen::Index>(n), 1) : s_prob;
    for (std::size_t i : v_s) merged(static_cast<Eigen::Index>(i), 0) = sensitive[i];
    return merged;
}

/// One alternation. For plain training only the classifier step runs.
inline StepResult train_step(const TrainingData& data, TrainState& state, const TrainConfig& cfg,
                             std::mt19937_64* dropout_rng = nullptr) {
    const auto& sp = data.splits();
    const std::size_t n = data.num_nodes();
    FairGnnParams& params = state.params;
    const bool use_est = cfg.uses_estimator();
    if (use_est && !params.estimator) throw ConfigError("train_step: estimator parameters are missing");
    if (cfg.fair && !params.adversary) throw ConfigError("train_step: adversary parameters are missing");

    StepResult result;
    result.losses.alpha = cfg.alpha;
    result.losses.beta = cfg.beta;

    Tape tape;
    Var x = tape.constant(data.features());
    NodeModelVars clf = bind(tape, params.classifier, true);
    NodeOutput out = node_forward(tape, data.ops(), x, clf, DropoutOptions{cfg.dropout, dropout_rng});
    result.y_prob = out.prob.value();
    Var l_c = classification_loss(out.prob, data.labels(), sp.v_l);

    Var l_e, l_r, l_a;
    NodeModelVars est;
    if (cfg.fair) {
        Tensor s_prob;
        if (use_est) {
            est = bind(tape, *params.estimator, true);
            Var s_out = estimator_forward(tape, data.ops(), x, est);
            l_e = estimator_loss(s_out, data.sensitive(), sp.v_s);
            s_prob = s_out.value();
        }
        result.merged_targets = merge_sensitive_targets(s_prob, data.sensitive(), sp.v_s, n);
        const std::span<const std::size_t> fair_index =
            cfg.targets == FairnessTargets::SensitiveOnly ? std::span<const std::size_t>(sp.v_s)
                                                          : std::span<const std::size_t>();

        // Adversary step on fixed representations.
        {
            Tape adv_tape;
            AdversaryVars adv = bind(adv_tape, *params.adversary, true);
            Var a = adversary_forward(adv_tape.constant(out.hidden.value()), adv);
            Var bce = adversary_bce(a, result.merged_targets, fair_index);
            adv_tape.backward(bce);
            AdversaryParams g = gradients(adv_tape, adv);
            std::vector<Tensor*> ps{&params.adversary->w, &params.adversary->b};
            std::vector<Tensor> gs{std::move(g.w), std::move(g.b)};
            adam_step(ps, gs, state.adversary);
        }

        AdversaryVars adv = bind(tape, *params.adversary, false);
        Var a = adversary_forward(out.hidden, adv);
        l_a = adversary_bce(a, result.merged_targets, fair_index);
        l_r = covariance_constraint(tape.constant(result.merged_targets), out.prob, fair_index);
    }

    Var total = classifier_objective(l_c, l_e, l_r, l_a, cfg.alpha, cfg.beta);
    result.losses.l_c = l_c.value()(0, 0);
    if (l_e.tape) result.losses.l_e = l_e.value()(0, 0);
    if (l_r.tape) result.losses.l_r = l_r.value()(0, 0);
    if (l_a.tape) result.losses.l_a = l_a.value()(0, 0);
    if (!std::isfinite(total.value()(0, 0))) throw DivergenceError("training objective is not finite");

    tape.backward(total);
    std::vector<Tensor*> ps;
    std::vector<Tensor> gs;
    detail::collect(params.classifier, ps);
    detail::collect_grads(gradients(tape, clf), gs);
    if (use_est) {
        detail::collect(*params.estimator, ps);
        detail::collect_grads(gradients(tape, est), gs);
    }
    adam_step(ps, gs, state.main);
    return result;
}

// ---------------------------------------------------------------------------
// Fit and evaluate

struct EpochRecord {
    std::size_t epoch = 0;
    LossBundle losses;
    double val_acc = 0.0;
    double val_auc = 0.0;
    double val_sp = 0.0;
    double val_eo = 0.0;
};

using TrainLog = std::vector<EpochRecord>;

/// Index of the epoch chosen by the fairness-thresholded accuracy rule.
inline std::size_t select_epoch(const TrainLog& log, double sp_threshold, double eo_threshold) {
    if (log.empty()) throw ConfigError("select_epoch: empty training log");
    std::optional<std::size_t> best;
    for (std::size_t i = 0; i < log.size(); ++i) {
        const auto& r = log[i];
        if (r.val_sp <= sp_threshold && r.val_eo <= eo_threshold && (!best || r.val_acc > log[*best].val_acc)) best = i;
    }
    if (best) return *best;
    std::size_t fallback = 0;
    auto score = [](const EpochRecord& r) { return r.val_acc - (r.val_sp + r.val_eo); };
    for (std::size_t i = 1; i < log.size(); ++i)
        if (score(log[i]) > score(log[fallback])) fallback = i;
    return fallback;
}

struct FitResult {
    FairGnnParams params;  // parameters of the selected epoch
    TrainLog log;
    std::size_t selected_epoch = 0;
    std::optional<PretrainResult> pretrain;
};

/// Initial parameters for `cfg`; draws from `rng` in a fixed order.
inline TrainState init_state(const TrainingData& data, const TrainConfig& cfg, std::mt19937_64& rng) {
    TrainState st;
    st.params.classifier = init_node_model(cfg.backbone, data.features().cols(), cfg.hidden, rng);
    if (cfg.fair) st.params.adversary = init_adversary(cfg.hidden, rng);
    st.main = AdamState(cfg.adam);
    st.adversary = AdamState(cfg.adam);
    return st;
}

inline FitResult fit(const TrainingData& data, const TrainConfig& cfg) {
    validate(cfg);
    const auto& sp = data.splits();
    if (sp.v_l.empty()) throw DataError("V_L is empty");
    if (sp.val.empty()) throw DataError("validation split is empty");
    detail::require_both_groups(data.sensitive(), sp.val, "validation split");
    {
        const auto vy = detail::gather(data.labels(), sp.val);
        const auto vs = detail::gather(data.sensitive(), sp.val);
        for (int v : vy)
            if (v != 0 && v != 1) throw DataError("validation split contains a node without a label");
        bool pos[2] = {false, false};
        for (std::size_t i = 0; i < vy.size(); ++i)
            if (vy[i] == 1) pos[vs[i]] = true;
        if (!pos[0] || !pos[1]) throw DataError("each sensitive group in the validation split needs a positive label");
    }

    std::mt19937_64 rng(cfg.seed);
    TrainState state = init_state(data, cfg, rng);
    FitResult result;
    if (cfg.uses_estimator()) {
        result.pretrain = pretrain_estimator(data, cfg, rng);
        state.params.estimator = result.pretrain->estimator;
    }

    const auto val_y = detail::gather(data.labels(), sp.val);
    const auto val_s = detail::gather(data.sensitive(), sp.val);
    std::optional<std::pair<std::size_t, FairGnnParams>> best_ok, best_fallback;
    auto fallback_score = [](const EpochRecord& r) { return r.val_acc - (r.val_sp + r.val_eo); };

    result.log.reserve(cfg.epochs);
    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        FairGnnParams before = state.params;
        StepResult step = train_step(data, state, cfg, &rng);
        Tensor y_prob = cfg.dropout > 0.0 ? predict(data.ops(), data.features(), before.classifier).prob : step.y_prob;

        EpochRecord rec;
        rec.epoch = epoch;
        rec.losses = step.losses;
        const auto p = detail::gather(y_prob, sp.val);
        const MetricsReport m = evaluate_metrics(p, val_y, val_s);
        rec.val_acc = m.acc;
        rec.val_auc = m.auc;
        rec.val_sp = m.delta_sp;
        rec.val_eo = m.delta_eo;
        result.log.push_back(rec);

        if (rec.val_sp <= cfg.sp_threshold && rec.val_eo <= cfg.eo_threshold &&
            (!best_ok || rec.val_acc > result.log[best_ok->first].val_acc))
            best_ok.emplace(epoch, before);
        if (!best_ok && (!best_fallback || fallback_score(rec) > fallback_score(result.log[best_fallback->first])))
            best_fallback.emplace(epoch, std::move(before));
    }

    auto& chosen = best_ok ? *best_ok : *best_fallback;
    result.selected_epoch = chosen.first;
    result.params = std::move(chosen.second);
    return result;
}

/// Classifier metrics on `index` against ground-truth labels and sensitive values.
inline MetricsReport evaluate(const TrainingData& data, const FairGnnParams& params, std::span<const std::size_t> index) {
    if (index.empty()) throw MetricError("evaluate: empty split");
    const Tensor prob = predict(data.ops(), data.features(), params.classifier).prob;
    const auto p = detail::gather(prob, index);
    const auto y = detail::gather(data.labels(), index);
    const auto s = detail::gather(data.sensitive(), index);
    return evaluate_metrics(p, y, s);
}

}  // namespace fairgnn
