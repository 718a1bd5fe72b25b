// SPDX-License-Identifier: Apache-2.0
#pragma once

// Experiment matrix: model variants x seeded repeats, per-run artefacts,
// aggregate tables, sweeps and report rendering.
//
// Configuration is an INI file. Sections:
//   [experiment]    models, repeats, seed, output, threads
//   [data]          source = synthetic | files, generator keys or file paths
//   [splits]        labelled, sensitive, val_frac, test_frac
//   [train]         shared training keys
//   [model:<name>]  per-model overrides of [train] keys
// Any key may be overridden as section.key=value.

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <type_traits>
#include <vector>

#ifdef __GLIBC__
#include <malloc.h>
#endif

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <nlohmann/json.hpp>

#include "fairgnn/data_io.hpp"
#include "fairgnn/metrics.hpp"
#include "fairgnn/trainer.hpp"

namespace fairgnn {

namespace pt = boost::property_tree;

/// Keeps the per-epoch multi-megabyte temporaries on the heap instead of
/// mapping and trimming them every step (halves wall time under glibc).
inline void tune_allocator() {
#ifdef __GLIBC__
    mallopt(M_MMAP_THRESHOLD, 32 << 20);
    mallopt(M_TRIM_THRESHOLD, 512 << 20);
#endif
}

// ---------------------------------------------------------------------------
// Model registry

/// A named model: backbone plus the FairGNN ablation switches.
struct ModelSpec {
    std::string name;
    Backbone backbone = Backbone::GCN;
    bool fair = false;
    bool no_adversary = false;   // "\A": beta forced to 0
    bool no_covariance = false;  // "\C": alpha forced to 0
    bool no_estimator = false;   // "\E": fairness terms on V_S ground truth only
    bool mlp_estimator = false;  // "-MLPest": MLP instead of GCN estimator
    double default_alpha = 0.0;
    double default_beta = 0.0;
};

/// Accepts MLP, GCN, GAT, FairGCN, FairGAT and the FairGCN/FairGAT ablations
/// with suffix \A, \C, \E or -MLPest (also spelled _A, _C, _E).
inline ModelSpec parse_model(const std::string& raw) {
    ModelSpec m;
    m.name = raw;
    if (raw == "MLP" || raw == "GCN" || raw == "GAT") {
        m.backbone = parse_backbone(raw);
        return m;
    }
    std::string rest;
    if (raw.rfind("FairGCN", 0) == 0) {
        m.backbone = Backbone::GCN;
        m.default_alpha = 100.0;
        m.default_beta = 1.0;
        rest = raw.substr(7);
    } else if (raw.rfind("FairGAT", 0) == 0) {
        m.backbone = Backbone::GAT;
        m.default_alpha = 2.0;
        m.default_beta = 0.1;
        rest = raw.substr(7);
    } else {
        throw ConfigError("unknown model '" + raw + "'");
    }
    m.fair = true;
    const std::string base = raw.substr(0, 7);
    if (rest.empty()) return m;
    if (rest == "\\A" || rest == "_A") {
        m.no_adversary = true;
        m.name = base + "\\A";
    } else if (rest == "\\C" || rest == "_C") {
        m.no_covariance = true;
        m.name = base + "\\C";
    } else if (rest == "\\E" || rest == "_E") {
        m.no_estimator = true;
        m.name = base + "\\E";
    } else if (rest == "-MLPest" || rest == "_MLPest") {
        m.mlp_estimator = true;
        m.name = base + "-MLPest";
    } else {
        throw ConfigError("unknown model variant '" + raw + "'");
    }
    return m;
}

/// Directory-safe name.
inline std::string model_slug(const std::string& name) {
    std::string s = name;
    std::replace(s.begin(), s.end(), '\\', '_');
    return s;
}

// ---------------------------------------------------------------------------
// Configuration

struct SplitConfig {
    std::size_t labelled = 500;
    std::size_t sensitive = 200;
    double val_frac = 0.25;
    double test_frac = 0.5;
};

struct ExperimentConfig {
    pt::ptree raw;  // merged input, echoed into every run directory
    bool synthetic = true;
    GenSpec gen;
    DatasetPaths paths;
    SplitConfig splits;
    std::vector<std::string> models{"GCN"};
    std::size_t repeats = 5;
    std::uint64_t seed = 0;
    fs::path output = "results";
    std::size_t threads = 1;
};

namespace detail {

inline pt::ptree::path_type key_path(const std::string& section, const std::string& key) {
    return pt::ptree::path_type(section + "/" + key, '/');
}

template <class T>
std::optional<T> get_opt(const pt::ptree& tree, const std::string& section, const std::string& key) {
    const auto node = tree.get_child_optional(key_path(section, key));
    if (!node) return std::nullopt;
    const std::string text = node->get_value<std::string>();
    const std::string_view body = trim(text);
    T value{};
    bool ok = false;
    if constexpr (std::is_arithmetic_v<T>) {
        auto [ptr, ec] = std::from_chars(body.data(), body.data() + body.size(), value);
        ok = ec == std::errc() && ptr == body.data() + body.size() && !body.empty();
    } else {
        std::istringstream ss{std::string(body)};
        std::string leftover;
        ok = static_cast<bool>(ss >> value) && !(ss >> leftover);
    }
    if (!ok) throw ConfigError("[" + section + "] " + key + " = '" + text + "' is not a valid value");
    return value;
}

template <>
inline std::optional<std::string> get_opt<std::string>(const pt::ptree& tree, const std::string& section,
                                                       const std::string& key) {
    const auto node = tree.get_child_optional(key_path(section, key));
    if (!node) return std::nullopt;
    return std::string(trim(node->get_value<std::string>()));
}

template <class T>
void read_into(const pt::ptree& tree, const std::string& section, const std::string& key, T& out) {
    if (auto v = get_opt<T>(tree, section, key)) out = *v;
}

inline std::vector<std::string> split_list(const std::string& text) {
    std::vector<std::string> out;
    std::string cur;
    std::istringstream ss(text);
    while (std::getline(ss, cur, ',')) {
        auto t = std::string(trim(cur));
        if (!t.empty()) out.push_back(t);
    }
    return out;
}

inline void check_known_keys(const pt::ptree& tree, const std::string& section, std::initializer_list<const char*> keys) {
    const auto node = tree.get_child_optional(pt::ptree::path_type(section, '/'));
    if (!node) return;
    for (const auto& [k, _] : *node)
        if (std::none_of(keys.begin(), keys.end(), [&](const char* known) { return k == known; }))
            throw ConfigError("unknown key '" + k + "' in [" + section + "]");
}

inline const std::initializer_list<const char*> kTrainKeys = {
    "epochs",       "pretrain_epochs", "lr",      "beta1",  "beta2",        "adam_eps",
    "weight_decay", "dropout",         "hidden",  "estimator_hidden", "alpha", "beta",
    "sp_threshold", "eo_threshold",    "estimator_holdout_frac"};

/// Applies [section] training keys onto `c`.
inline void read_train_section(const pt::ptree& tree, const std::string& section, TrainConfig& c) {
    check_known_keys(tree, section, kTrainKeys);
    read_into(tree, section, "epochs", c.epochs);
    read_into(tree, section, "pretrain_epochs", c.pretrain_epochs);
    read_into(tree, section, "lr", c.adam.lr);
    read_into(tree, section, "beta1", c.adam.beta1);
    read_into(tree, section, "beta2", c.adam.beta2);
    read_into(tree, section, "adam_eps", c.adam.eps);
    read_into(tree, section, "weight_decay", c.adam.weight_decay);
    read_into(tree, section, "dropout", c.dropout);
    read_into(tree, section, "hidden", c.hidden);
    read_into(tree, section, "estimator_hidden", c.estimator_hidden);
    read_into(tree, section, "alpha", c.alpha);
    read_into(tree, section, "beta", c.beta);
    read_into(tree, section, "sp_threshold", c.sp_threshold);
    read_into(tree, section, "eo_threshold", c.eo_threshold);
    read_into(tree, section, "estimator_holdout_frac", c.estimator_holdout_frac);
}

}  // namespace detail

/// Sets section.key=value on a config tree.
inline void apply_override(pt::ptree& tree, const std::string& assignment) {
    const auto eq = assignment.find('=');
    const auto dot = assignment.find('.');
    if (eq == std::string::npos || dot == std::string::npos || dot > eq)
        throw ConfigError("override '" + assignment + "' must look like section.key=value");
    const std::string section = assignment.substr(0, dot);
    const std::string key = assignment.substr(dot + 1, eq - dot - 1);
    const std::string value = assignment.substr(eq + 1);
    if (section.empty() || key.empty()) throw ConfigError("override '" + assignment + "' has an empty section or key");
    tree.put(detail::key_path(section, key), value);
}

inline pt::ptree read_config_file(const fs::path& file) {
    pt::ptree tree;
    try {
        pt::read_ini(file.string(), tree);
    } catch (const pt::ini_parser_error& e) {
        throw ConfigError(e.what());
    }
    return tree;
}

inline ExperimentConfig parse_config(const pt::ptree& tree) {
    using detail::read_into;
    ExperimentConfig c;
    c.raw = tree;

    detail::check_known_keys(tree, "experiment", {"models", "repeats", "seed", "output", "threads"});
    if (auto m = detail::get_opt<std::string>(tree, "experiment", "models")) c.models = detail::split_list(*m);
    read_into(tree, "experiment", "repeats", c.repeats);
    read_into(tree, "experiment", "seed", c.seed);
    if (auto o = detail::get_opt<std::string>(tree, "experiment", "output")) c.output = *o;
    read_into(tree, "experiment", "threads", c.threads);

    detail::check_known_keys(tree, "data",
                             {"source", "dir", "features", "edges", "labels", "sensitive", "n", "group_ratio",
                              "homophily", "label_corr", "feature_dim", "mu_y", "mu_s", "avg_degree", "noise", "seed"});
    const std::string source = detail::get_opt<std::string>(tree, "data", "source").value_or("synthetic");
    if (source == "synthetic") {
        c.synthetic = true;
    } else if (source == "files") {
        c.synthetic = false;
        if (auto dir = detail::get_opt<std::string>(tree, "data", "dir")) c.paths = DatasetPaths::in_directory(*dir);
        if (auto p = detail::get_opt<std::string>(tree, "data", "features")) c.paths.features = *p;
        if (auto p = detail::get_opt<std::string>(tree, "data", "edges")) c.paths.edges = *p;
        if (auto p = detail::get_opt<std::string>(tree, "data", "labels")) c.paths.labels = *p;
        if (auto p = detail::get_opt<std::string>(tree, "data", "sensitive")) c.paths.sensitive = *p;
        if (c.paths.features.empty() || c.paths.edges.empty() || c.paths.labels.empty() || c.paths.sensitive.empty())
            throw ConfigError("[data] source = files needs dir or all four file paths");
    } else {
        throw ConfigError("[data] source must be 'synthetic' or 'files'");
    }
    read_into(tree, "data", "n", c.gen.n);
    read_into(tree, "data", "group_ratio", c.gen.group_ratio);
    read_into(tree, "data", "homophily", c.gen.homophily);
    read_into(tree, "data", "label_corr", c.gen.label_corr);
    read_into(tree, "data", "feature_dim", c.gen.feature_dim);
    read_into(tree, "data", "mu_y", c.gen.mu_y);
    read_into(tree, "data", "mu_s", c.gen.mu_s);
    read_into(tree, "data", "avg_degree", c.gen.avg_degree);
    read_into(tree, "data", "noise", c.gen.noise);
    read_into(tree, "data", "seed", c.gen.seed);
    if (c.synthetic) validate_genspec(c.gen);

    detail::check_known_keys(tree, "splits", {"labelled", "sensitive", "val_frac", "test_frac"});
    read_into(tree, "splits", "labelled", c.splits.labelled);
    read_into(tree, "splits", "sensitive", c.splits.sensitive);
    read_into(tree, "splits", "val_frac", c.splits.val_frac);
    read_into(tree, "splits", "test_frac", c.splits.test_frac);

    if (c.repeats < 1) throw ConfigError("[experiment] repeats must be >= 1");
    if (c.threads < 1) throw ConfigError("[experiment] threads must be >= 1");
    for (const auto& m : c.models) parse_model(m);

    // Validate every training section eagerly so errors surface before any run.
    TrainConfig scratch;
    detail::read_train_section(tree, "train", scratch);
    for (const auto& [section, _] : tree)
        if (section.rfind("model:", 0) == 0) {
            parse_model(section.substr(6));
            detail::read_train_section(tree, section, scratch);
        }
    return c;
}

/// Effective TrainConfig of `model`: registry defaults, then [train], then
/// [model:<name>], then the ablation switches.
inline TrainConfig model_train_config(const ExperimentConfig& cfg, const std::string& model) {
    const ModelSpec m = parse_model(model);
    TrainConfig c;
    c.backbone = m.backbone;
    c.fair = m.fair;
    c.alpha = m.default_alpha;
    c.beta = m.default_beta;
    if (m.fair) {
        // Fair variants select among epochs meeting these validation gaps.
        c.sp_threshold = 0.03;
        c.eo_threshold = 0.03;
    }
    detail::read_train_section(cfg.raw, "train", c);
    detail::read_train_section(cfg.raw, "model:" + m.name, c);
    if (m.name != model) detail::read_train_section(cfg.raw, "model:" + model, c);
    if (m.no_adversary) c.beta = 0.0;
    if (m.no_covariance) c.alpha = 0.0;
    if (m.no_estimator) c.targets = FairnessTargets::SensitiveOnly;
    if (m.mlp_estimator) c.estimator_backbone = Backbone::MLP;
    if (!m.fair) {
        c.alpha = 0.0;
        c.beta = 0.0;
    }
    validate(c);
    return c;
}

inline Dataset load_experiment_data(const ExperimentConfig& cfg) {
    return cfg.synthetic ? synth_biased_graph(cfg.gen) : load_dataset(cfg.paths);
}

/// Config echo for one run: the input tree plus the resolved data, split and training keys.
inline pt::ptree run_echo(const ExperimentConfig& cfg, const std::string& model, const TrainConfig& tc,
                          std::uint64_t seed) {
    pt::ptree tree = cfg.raw;
    auto put = [&](const std::string& section, const std::string& key, const std::string& value) {
        tree.put(detail::key_path(section, key), value);
    };
    auto num = [](double v) { return detail::format_double(v); };
    put("experiment", "models", model);
    put("experiment", "repeats", "1");
    put("experiment", "seed", std::to_string(seed));
    if (cfg.synthetic) {
        put("data", "source", "synthetic");
        put("data", "n", std::to_string(cfg.gen.n));
        put("data", "group_ratio", num(cfg.gen.group_ratio));
        put("data", "homophily", num(cfg.gen.homophily));
        put("data", "label_corr", num(cfg.gen.label_corr));
        put("data", "feature_dim", std::to_string(cfg.gen.feature_dim));
        put("data", "mu_y", num(cfg.gen.mu_y));
        put("data", "mu_s", num(cfg.gen.mu_s));
        put("data", "avg_degree", num(cfg.gen.avg_degree));
        put("data", "noise", num(cfg.gen.noise));
        put("data", "seed", std::to_string(cfg.gen.seed));
    }
    put("splits", "labelled", std::to_string(cfg.splits.labelled));
    put("splits", "sensitive", std::to_string(cfg.splits.sensitive));
    put("splits", "val_frac", num(cfg.splits.val_frac));
    put("splits", "test_frac", num(cfg.splits.test_frac));
    put("train", "epochs", std::to_string(tc.epochs));
    put("train", "pretrain_epochs", std::to_string(tc.pretrain_epochs));
    put("train", "lr", num(tc.adam.lr));
    put("train", "beta1", num(tc.adam.beta1));
    put("train", "beta2", num(tc.adam.beta2));
    put("train", "adam_eps", num(tc.adam.eps));
    put("train", "weight_decay", num(tc.adam.weight_decay));
    put("train", "dropout", num(tc.dropout));
    put("train", "hidden", std::to_string(tc.hidden));
    put("train", "estimator_hidden", std::to_string(tc.estimator_hidden));
    put("train", "alpha", num(tc.alpha));
    put("train", "beta", num(tc.beta));
    put("train", "sp_threshold", num(tc.sp_threshold));
    put("train", "eo_threshold", num(tc.eo_threshold));
    put("train", "estimator_holdout_frac", num(tc.estimator_holdout_frac));
    // Model sections are folded into [train] above.
    for (auto it = tree.begin(); it != tree.end();)
        it = it->first.rfind("model:", 0) == 0 ? tree.erase(it) : std::next(it);
    return tree;
}

// ---------------------------------------------------------------------------
// Results

inline constexpr const char* kMetricNames[4] = {"acc", "auc", "delta_sp", "delta_eo"};

inline double metric_value(const MetricsReport& r, std::size_t k) {
    switch (k) {
        case 0: return r.acc;
        case 1: return r.auc;
        case 2: return r.delta_sp;
        default: return r.delta_eo;
    }
}

struct RunOutcome {
    std::uint64_t seed = 0;
    std::optional<MetricsReport> metrics;  // test-split metrics; empty on failure
    std::string error;
    std::size_t selected_epoch = 0;
    std::size_t epochs_ran = 0;
    double seconds = 0.0;  // wall time of the run
};

struct Aggregate {
    double mean = 0.0;
    double std = 0.0;  // population standard deviation over repeats
    std::size_t repeats = 0;
};

struct ModelResult {
    std::string model;
    std::vector<RunOutcome> runs;

    std::vector<double> values(std::size_t metric) const {
        std::vector<double> out;
        for (const auto& r : runs)
            if (r.metrics) out.push_back(metric_value(*r.metrics, metric));
        return out;
    }

    std::optional<Aggregate> aggregate(std::size_t metric) const {
        const auto v = values(metric);
        if (v.empty()) return std::nullopt;
        Aggregate a;
        a.repeats = v.size();
        for (double x : v) a.mean += x;
        a.mean /= static_cast<double>(v.size());
        for (double x : v) a.std += (x - a.mean) * (x - a.mean);
        a.std = std::sqrt(a.std / static_cast<double>(v.size()));
        return a;
    }

    std::optional<double> median(std::size_t metric) const {
        auto v = values(metric);
        if (v.empty()) return std::nullopt;
        std::sort(v.begin(), v.end());
        const std::size_t m = v.size() / 2;
        return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
    }
};

struct ResultsTable {
    std::vector<ModelResult> rows;

    const ModelResult& at(const std::string& model) const {
        for (const auto& r : rows)
            if (r.model == model) return r;
        throw ConfigError("no results for model '" + model + "'");
    }
};

inline nlohmann::json metrics_to_json(const MetricsReport& m) {
    nlohmann::json groups;
    for (std::size_t g = 0; g < 2; ++g) {
        const auto& st = m.groups[g];
        groups[std::to_string(g)] = {{"size", st.size},
                                     {"positive_rate", st.positive_rate()},
                                     {"positives", st.positives},
                                     {"tpr", st.tpr()}};
    }
    return {{"acc", m.acc}, {"auc", m.auc}, {"delta_sp", m.delta_sp}, {"delta_eo", m.delta_eo}, {"group_stats", groups}};
}

/// results.csv: model,metric,mean,std,repeats. Models without a successful
/// repeat have empty mean/std and repeats = 0.
inline std::string results_csv(const ResultsTable& t) {
    std::ostringstream out;
    out << "model,metric,mean,std,repeats\n";
    for (const auto& row : t.rows)
        for (std::size_t k = 0; k < 4; ++k) {
            out << row.model << ',' << kMetricNames[k] << ',';
            if (auto a = row.aggregate(k))
                out << detail::format_double(a->mean) << ',' << detail::format_double(a->std) << ',' << a->repeats;
            else
                out << ",,0";
            out << '\n';
        }
    return out.str();
}

// ---------------------------------------------------------------------------
// Running

namespace detail {

inline void write_text(const fs::path& file, const std::string& text) {
    auto out = open_output(file);
    out << text;
}

/// Per-epoch training curves in the sweep CSV layout with axis = epoch.
inline std::string training_curves_csv(const std::string& model, const TrainLog& log) {
    std::ostringstream out;
    out << "axis,value,model,metric,mean,std\n";
    for (const auto& r : log) {
        const std::pair<const char*, double> cols[] = {
            {"l_c", r.losses.l_c},     {"l_e", r.losses.l_e},         {"l_a", r.losses.l_a},
            {"l_r", r.losses.l_r},     {"val_acc", r.val_acc},        {"val_auc", r.val_auc},
            {"val_delta_sp", r.val_sp}, {"val_delta_eo", r.val_eo}};
        for (const auto& [name, v] : cols)
            out << "epoch," << r.epoch << ',' << model << ',' << name << ',' << format_double(v) << ",0\n";
    }
    return out.str();
}

/// Runs `jobs` on up to `threads` workers; each job owns its own state.
template <class Job>
void run_parallel(std::size_t count, std::size_t threads, Job job) {
    if (threads <= 1 || count <= 1) {
        for (std::size_t i = 0; i < count; ++i) job(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < std::min(threads, count); ++t)
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < count; i = next++) job(i);
        });
    for (auto& th : pool) th.join();
}

}  // namespace detail

/// Trains and evaluates one model with one seed, writing its run directory
/// when `run_dir` is non-empty.
inline RunOutcome run_single(const ExperimentConfig& cfg, const Dataset& ds, const std::string& model,
                             std::uint64_t seed, const fs::path& run_dir) {
    const auto start = std::chrono::steady_clock::now();
    RunOutcome outcome;
    outcome.seed = seed;
    try {
        TrainConfig tc = model_train_config(cfg, model);
        tc.seed = seed;
        SplitSpec splits = make_splits(ds, cfg.splits.labelled, cfg.splits.sensitive, cfg.splits.val_frac,
                                       cfg.splits.test_frac, seed);
        if (!run_dir.empty()) {
            fs::create_directories(run_dir);
            pt::write_ini((run_dir / "config.ini").string(), run_echo(cfg, model, tc, seed));
            save_splits(splits, run_dir / "splits.json");
        }
        TrainingData data(ds, splits);
        FitResult fr = fit(data, tc);
        outcome.metrics = evaluate(data, fr.params, data.splits().test);
        outcome.selected_epoch = fr.selected_epoch;
        outcome.epochs_ran = fr.log.size();
        if (!run_dir.empty()) {
            nlohmann::json j = metrics_to_json(*outcome.metrics);
            j["model"] = model;
            j["split"] = "test";
            j["seed"] = seed;
            j["epochs_ran"] = outcome.epochs_ran;
            j["selected_epoch"] = outcome.selected_epoch;
            if (fr.pretrain) {
                j["estimator"] = {{"holdout_acc", fr.pretrain->holdout_acc},
                                  {"majority_rate", fr.pretrain->majority_rate},
                                  {"informative", fr.pretrain->informative}};
                if (fr.pretrain->holdout_auc) j["estimator"]["holdout_auc"] = *fr.pretrain->holdout_auc;
            }
            detail::write_text(run_dir / "metrics.json", j.dump(2) + "\n");
            detail::write_text(run_dir / "curves.csv", detail::training_curves_csv(model, fr.log));
            save_checkpoint(to_named(fr.params), run_dir / "checkpoint.bin");
        }
    } catch (const std::exception& e) {
        outcome.metrics.reset();
        outcome.error = e.what();
        if (!run_dir.empty()) {
            std::error_code ec;
            fs::create_directories(run_dir, ec);
            std::ofstream(run_dir / "error.txt") << e.what() << '\n';
        }
    }
    outcome.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return outcome;
}

/// Every model x repeat with seeds seed + i; writes run directories,
/// results.csv and table.txt under cfg.output (skipped when output is empty).
inline ResultsTable run_experiment(const ExperimentConfig& cfg, const Dataset& ds) {
    if (cfg.models.empty()) throw ConfigError("model list is empty");
    ResultsTable table;
    for (const auto& m : cfg.models) {
        table.rows.push_back({parse_model(m).name, {}});
        table.rows.back().runs.resize(cfg.repeats);
    }
    const std::size_t cells = cfg.models.size() * cfg.repeats;
    detail::run_parallel(cells, cfg.threads, [&](std::size_t cell) {
        const std::size_t mi = cell / cfg.repeats, r = cell % cfg.repeats;
        const std::string& name = table.rows[mi].model;
        const fs::path dir =
            cfg.output.empty() ? fs::path() : cfg.output / model_slug(name) / ("run" + std::to_string(r));
        table.rows[mi].runs[r] = run_single(cfg, ds, name, cfg.seed + r, dir);
    });
    if (!cfg.output.empty()) {
        fs::create_directories(cfg.output);
        detail::write_text(cfg.output / "results.csv", results_csv(table));
    }
    return table;
}

inline ResultsTable run_experiment(const ExperimentConfig& cfg) { return run_experiment(cfg, load_experiment_data(cfg)); }

inline const std::vector<std::string>& ablation_variants() {
    static const std::vector<std::string> v{"FairGCN", "FairGCN\\A", "FairGCN\\C", "FairGCN\\E", "FairGCN-MLPest"};
    return v;
}

/// Full model plus its ablations. The base is FairGCN unless the config's
/// first model is FairGAT.
inline ResultsTable run_ablation(ExperimentConfig cfg, const Dataset& ds) {
    const bool gat = !cfg.models.empty() && parse_model(cfg.models.front()).backbone == Backbone::GAT &&
                     parse_model(cfg.models.front()).fair;
    cfg.models.clear();
    for (const auto& v : ablation_variants()) cfg.models.push_back(gat ? "FairGAT" + v.substr(7) : v);
    return run_experiment(cfg, ds);
}

inline ResultsTable run_ablation(const ExperimentConfig& cfg) { return run_ablation(cfg, load_experiment_data(cfg)); }

enum class SweepAxis { SensitiveCount, LabelledCount, Alpha, Beta };

inline SweepAxis parse_axis(const std::string& s) {
    if (s == "v_s" || s == "|V_S|" || s == "sensitive") return SweepAxis::SensitiveCount;
    if (s == "v_l" || s == "|V_L|" || s == "labelled") return SweepAxis::LabelledCount;
    if (s == "alpha") return SweepAxis::Alpha;
    if (s == "beta") return SweepAxis::Beta;
    throw ConfigError("unknown sweep axis '" + s + "' (expected v_s, v_l, alpha or beta)");
}

inline std::string axis_name(SweepAxis a) {
    switch (a) {
        case SweepAxis::SensitiveCount: return "v_s";
        case SweepAxis::LabelledCount: return "v_l";
        case SweepAxis::Alpha: return "alpha";
        case SweepAxis::Beta: return "beta";
    }
    return "?";
}

/// Config with one sweep value applied. Alpha/beta apply to fair models
/// through [train]; ablation switches still force their zeros.
inline ExperimentConfig with_axis_value(ExperimentConfig cfg, SweepAxis axis, const std::string& value) {
    switch (axis) {
        case SweepAxis::SensitiveCount: apply_override(cfg.raw, "splits.sensitive=" + value); break;
        case SweepAxis::LabelledCount: apply_override(cfg.raw, "splits.labelled=" + value); break;
        case SweepAxis::Alpha: apply_override(cfg.raw, "train.alpha=" + value); break;
        case SweepAxis::Beta: apply_override(cfg.raw, "train.beta=" + value); break;
    }
    const fs::path out = cfg.output;
    ExperimentConfig parsed = parse_config(cfg.raw);
    parsed.output = out.empty() ? out : out / ("sweep_" + axis_name(axis) + "_" + value);
    return parsed;
}

struct SweepPoint {
    std::string value;
    ResultsTable table;
};

/// Long-format CSV: axis,value,model,metric,mean,std.
inline std::string sweep_csv(SweepAxis axis, const std::vector<SweepPoint>& points) {
    std::ostringstream out;
    out << "axis,value,model,metric,mean,std\n";
    for (const auto& p : points)
        for (const auto& row : p.table.rows)
            for (std::size_t k = 0; k < 4; ++k) {
                out << axis_name(axis) << ',' << p.value << ',' << row.model << ',' << kMetricNames[k] << ',';
                if (auto a = row.aggregate(k)) out << detail::format_double(a->mean) << ',' << detail::format_double(a->std);
                else out << ',';
                out << '\n';
            }
    return out.str();
}

inline std::vector<SweepPoint> sweep(const ExperimentConfig& cfg, const Dataset& ds, SweepAxis axis,
                                     const std::vector<std::string>& values) {
    if (values.empty()) throw ConfigError("sweep needs at least one value");
    std::vector<SweepPoint> points;
    for (const auto& v : values) points.push_back({v, run_experiment(with_axis_value(cfg, axis, v), ds)});
    if (!cfg.output.empty()) {
        fs::create_directories(cfg.output);
        detail::write_text(cfg.output / ("curves_" + axis_name(axis) + ".csv"), sweep_csv(axis, points));
    }
    return points;
}

// ---------------------------------------------------------------------------
// Report

struct ReportCell {
    std::optional<double> mean, std;
};

struct ReportRow {
    std::string model;
    ReportCell cells[4];
};

/// Parses results.csv.
inline std::vector<ReportRow> read_results_csv(const fs::path& file) {
    auto in = detail::open_input(file);
    std::string line;
    if (!std::getline(in, line) || detail::trim(line) != "model,metric,mean,std,repeats")
        throw DataError(file.string() + ": missing or wrong header");
    std::vector<ReportRow> rows;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (detail::trim(line).empty()) continue;
        const auto cols = detail::split_csv(line);
        if (cols.size() != 5) detail::parse_fail(file, line_no, "expected 5 columns");
        const std::string model(cols[0]);
        const auto metric = std::find_if(std::begin(kMetricNames), std::end(kMetricNames),
                                         [&](const char* m) { return cols[1] == m; });
        if (metric == std::end(kMetricNames)) detail::parse_fail(file, line_no, "unknown metric '" + std::string(cols[1]) + "'");
        if (rows.empty() || rows.back().model != model) rows.push_back({model, {}});
        ReportCell& cell = rows.back().cells[metric - std::begin(kMetricNames)];
        if (!cols[2].empty()) cell.mean = detail::parse_number<double>(cols[2], file, line_no);
        if (!cols[3].empty()) cell.std = detail::parse_number<double>(cols[3], file, line_no);
    }
    return rows;
}

namespace detail {

inline std::size_t display_width(const std::string& s) {
    std::size_t w = 0;
    for (unsigned char c : s)
        if ((c & 0xC0) != 0x80) ++w;
    return w;
}

inline std::string pad(const std::string& s, std::size_t width) {
    const std::size_t w = display_width(s);
    return s + std::string(w < width ? width - w : 0, ' ');
}

inline std::string percent_cell(const ReportCell& c) {
    if (!c.mean || !c.std) return "—";
    std::ostringstream ss;
    ss << std::fixed << std::setprecision(1) << 100.0 * *c.mean << " ± " << 100.0 * *c.std;
    return ss.str();
}

}  // namespace detail

/// Monospace table with percentages to one decimal; failed cells show "—".
inline std::string render_table(const std::vector<ReportRow>& rows) {
    const std::string headers[5] = {"Model", "ACC (%)", "AUC (%)", "ΔSP (%)", "ΔEO (%)"};
    std::vector<std::array<std::string, 5>> body;
    for (const auto& r : rows) {
        std::array<std::string, 5> line{r.model};
        for (std::size_t k = 0; k < 4; ++k) line[k + 1] = detail::percent_cell(r.cells[k]);
        body.push_back(line);
    }
    std::size_t width[5];
    for (std::size_t c = 0; c < 5; ++c) {
        width[c] = detail::display_width(headers[c]);
        for (const auto& line : body) width[c] = std::max(width[c], detail::display_width(line[c]));
    }
    std::ostringstream out;
    auto emit = [&](const std::string* cells) {
        std::string text;
        for (std::size_t c = 0; c < 5; ++c) text += (c ? "  " : "") + detail::pad(cells[c], width[c]);
        while (!text.empty() && text.back() == ' ') text.pop_back();
        out << text << '\n';
    };
    emit(headers);
    std::size_t total = 0;
    for (std::size_t c = 0; c < 5; ++c) total += width[c] + (c ? 2 : 0);
    out << std::string(total, '-') << '\n';
    for (const auto& line : body) emit(line.data());
    return out.str();
}

/// CSV rendering of the same table.
inline std::string render_table_csv(const std::vector<ReportRow>& rows) {
    std::ostringstream out;
    out << "model,acc,auc,delta_sp,delta_eo\n";
    for (const auto& r : rows) {
        out << r.model;
        for (const auto& c : r.cells) out << ',' << detail::percent_cell(c);
        out << '\n';
    }
    return out.str();
}

/// Renders results.csv in `dir` into table.txt and table.csv; returns the text table.
inline std::string report(const fs::path& dir) {
    const auto rows = read_results_csv(dir / "results.csv");
    const std::string text = render_table(rows);
    detail::write_text(dir / "table.txt", text);
    detail::write_text(dir / "table.csv", render_table_csv(rows));
    return text;
}

}  // namespace fairgnn
