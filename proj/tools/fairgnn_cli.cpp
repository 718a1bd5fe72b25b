// SPDX-License-Identifier: Apache-2.0
// fairgnn: generate data, train the model matrix, evaluate runs, ablate,
// sweep and render reports.

#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "fairgnn/fairgnn.hpp"

namespace {

using namespace fairgnn;

struct ConfigArgs {
    std::string file;
    std::vector<std::string> overrides;
    std::string output;
};

void add_config_options(CLI::App* cmd, ConfigArgs& args) {
    cmd->add_option("-c,--config", args.file, "INI configuration file")->check(CLI::ExistingFile);
    cmd->add_option("-s,--set", args.overrides, "Override as section.key=value (repeatable)");
    cmd->add_option("-o,--output", args.output, "Output directory (overrides experiment.output)");
}

ExperimentConfig load_config(const ConfigArgs& args) {
    pt::ptree tree = args.file.empty() ? pt::ptree() : read_config_file(args.file);
    for (const auto& o : args.overrides) apply_override(tree, o);
    if (!args.output.empty()) apply_override(tree, "experiment.output=" + args.output);
    return parse_config(tree);
}

void print_failures(const ResultsTable& t) {
    for (const auto& row : t.rows)
        for (const auto& run : row.runs)
            if (!run.error.empty()) std::cerr << row.model << " seed " << run.seed << ": " << run.error << '\n';
}

int cmd_generate(const ConfigArgs& args) {
    const ExperimentConfig cfg = load_config(args);
    if (!cfg.synthetic) throw ConfigError("generate needs [data] source = synthetic");
    const Dataset ds = synth_biased_graph(cfg.gen);
    const fs::path dir = args.output.empty() ? cfg.output : fs::path(args.output);
    save_dataset(ds, dir);
    std::cout << "wrote " << ds.num_nodes() << " nodes, " << ds.graph.num_edges() << " edges to " << dir.string()
              << '\n';
    for (const auto& [k, v] : ds.provenance) std::cout << "  " << k << " = " << v << '\n';
    return 0;
}

int cmd_train(const ConfigArgs& args) {
    const ExperimentConfig cfg = load_config(args);
    const ResultsTable t = run_experiment(cfg);
    print_failures(t);
    std::cout << report(cfg.output);
    return 0;
}

int cmd_ablate(const ConfigArgs& args) {
    const ExperimentConfig cfg = load_config(args);
    const ResultsTable t = run_ablation(cfg);
    print_failures(t);
    std::cout << report(cfg.output);
    return 0;
}

int cmd_sweep(const ConfigArgs& args, const std::string& axis, const std::vector<std::string>& values) {
    const ExperimentConfig cfg = load_config(args);
    const SweepAxis a = parse_axis(axis);
    const auto points = sweep(cfg, load_experiment_data(cfg), a, values);
    for (const auto& p : points) print_failures(p.table);
    std::cout << sweep_csv(a, points);
    return 0;
}

int cmd_evaluate(const std::string& run_dir, const std::string& split) {
    const fs::path dir(run_dir);
    const ExperimentConfig cfg = parse_config(read_config_file(dir / "config.ini"));
    const Dataset ds = load_experiment_data(cfg);
    const SplitSpec sp = load_splits(dir / "splits.json");
    const FairGnnParams params = from_named(load_checkpoint(dir / "checkpoint.bin"));
    TrainingData data(ds, sp);
    const auto& index = split == "val" ? sp.val : sp.test;
    nlohmann::json j = metrics_to_json(evaluate(data, params, index));
    j["split"] = split;
    std::cout << j.dump(2) << '\n';
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    tune_allocator();
    CLI::App app{"Fairness-aware node classification with partially known sensitive attributes"};
    app.require_subcommand(1);

    ConfigArgs gen_args, train_args, ablate_args, sweep_args, report_args;
    auto* gen = app.add_subcommand("generate", "Write a synthetic biased graph dataset");
    add_config_options(gen, gen_args);
    auto* train = app.add_subcommand("train", "Train every configured model over all repeats");
    add_config_options(train, train_args);
    auto* ablate = app.add_subcommand("ablate", "Train the full model and its ablations");
    add_config_options(ablate, ablate_args);

    auto* sw = app.add_subcommand("sweep", "Repeat the experiment over values of one setting");
    add_config_options(sw, sweep_args);
    std::string axis;
    std::vector<std::string> values;
    sw->add_option("--axis", axis, "v_s, v_l, alpha or beta")->required();
    sw->add_option("--values", values, "Comma-separated values")->required()->delimiter(',');

    auto* ev = app.add_subcommand("evaluate", "Recompute metrics of a saved run");
    std::string run_dir, split = "test";
    ev->add_option("run_dir", run_dir, "Run directory with config.ini, splits.json, checkpoint.bin")
        ->required()
        ->check(CLI::ExistingDirectory);
    ev->add_option("--split", split, "test or val")->check(CLI::IsMember({"test", "val"}));

    auto* rep = app.add_subcommand("report", "Render results.csv as a table");
    std::string results_dir;
    rep->add_option("results_dir", results_dir, "Directory containing results.csv")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        if (*gen) return cmd_generate(gen_args);
        if (*train) return cmd_train(train_args);
        if (*ablate) return cmd_ablate(ablate_args);
        if (*sw) return cmd_sweep(sweep_args, axis, values);
        if (*ev) return cmd_evaluate(run_dir, split);
        if (*rep) {
            std::cout << report(results_dir);
            return 0;
        }
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return e.exit_code();
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
