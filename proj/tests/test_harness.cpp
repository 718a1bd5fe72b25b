#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "fairgnn/harness.hpp"

using namespace fairgnn;

namespace {

const fs::path kFixtures{FAIRGNN_FIXTURES};

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

fs::path scratch(const std::string& name) {
    fs::path p = fs::temp_directory_path() / ("fairgnn_test_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

pt::ptree tree_of(std::initializer_list<std::string> overrides) {
    pt::ptree t;
    for (const auto& o : overrides) apply_override(t, o);
    return t;
}

// A configuration small enough to train in well under a second per run.
pt::ptree tiny_tree(const fs::path& out) {
    return tree_of({"experiment.models=MLP,GCN,FairGCN", "experiment.repeats=2", "experiment.seed=3",
                    "experiment.output=" + out.string(), "data.n=200", "splits.labelled=40", "splits.sensitive=30",
                    "train.epochs=8", "train.pretrain_epochs=5", "train.hidden=4", "train.estimator_hidden=4",
                    "train.lr=0.01"});
}

}  // namespace

TEST(ParseModel, RegistryAndAblations) {
    EXPECT_FALSE(parse_model("GCN").fair);
    EXPECT_EQ(parse_model("GAT").backbone, Backbone::GAT);
    EXPECT_EQ(parse_model("MLP").backbone, Backbone::MLP);
    const ModelSpec f = parse_model("FairGCN");
    EXPECT_TRUE(f.fair);
    EXPECT_EQ(f.default_alpha, 100.0);
    EXPECT_EQ(f.default_beta, 1.0);
    const ModelSpec g = parse_model("FairGAT");
    EXPECT_EQ(g.backbone, Backbone::GAT);
    EXPECT_EQ(g.default_alpha, 2.0);
    EXPECT_EQ(g.default_beta, 0.1);
    EXPECT_TRUE(parse_model("FairGCN\\A").no_adversary);
    EXPECT_EQ(parse_model("FairGCN_A").name, "FairGCN\\A");
    EXPECT_TRUE(parse_model("FairGAT_C").no_covariance);
    EXPECT_TRUE(parse_model("FairGCN\\E").no_estimator);
    EXPECT_TRUE(parse_model("FairGCN-MLPest").mlp_estimator);
    EXPECT_THROW(parse_model("GCN\\A"), ConfigError);
    EXPECT_THROW(parse_model("FairGCN\\X"), ConfigError);
    EXPECT_THROW(parse_model("SVM"), ConfigError);
    EXPECT_EQ(model_slug("FairGCN\\A"), "FairGCN_A");
}

TEST(Config, OverridesAndValidation) {
    pt::ptree t;
    EXPECT_THROW(apply_override(t, "noequals"), ConfigError);
    EXPECT_THROW(apply_override(t, "nodot=1"), ConfigError);
    EXPECT_THROW(apply_override(t, ".key=1"), ConfigError);
    apply_override(t, "splits.val_frac=0.3");
    EXPECT_EQ(parse_config(t).splits.val_frac, 0.3);

    EXPECT_THROW(parse_config(tree_of({"train.learning_rate=0.1"})), ConfigError);
    EXPECT_THROW(parse_config(tree_of({"experiment.repeats=0"})), ConfigError);
    EXPECT_THROW(parse_config(tree_of({"experiment.repeats=-1"})), ConfigError);
    EXPECT_THROW(parse_config(tree_of({"train.lr=fast"})), ConfigError);
    EXPECT_THROW(parse_config(tree_of({"experiment.models=GCN,Foo"})), ConfigError);
    EXPECT_THROW(parse_config(tree_of({"data.source=web"})), ConfigError);
    EXPECT_THROW(parse_config(tree_of({"data.source=files"})), ConfigError);
    EXPECT_THROW(parse_config(tree_of({"data.homophily=2"})), ConfigError);
    EXPECT_THROW(parse_config(tree_of({"model:FairGCN.hidden=x"})), ConfigError);

    const ExperimentConfig c = parse_config(tree_of({"experiment.models= MLP , FairGCN\\A ", "data.mu_y=0.7"}));
    EXPECT_EQ(c.models, (std::vector<std::string>{"MLP", "FairGCN\\A"}));
    EXPECT_EQ(c.gen.mu_y, 0.7);
}

TEST(Config, ReadsIniFiles) {
    const fs::path dir = scratch("ini");
    std::ofstream(dir / "c.ini") << "[experiment]\nmodels = GCN, FairGCN\nrepeats = 2\n\n[model:FairGCN]\nalpha = 4\n";
    const ExperimentConfig c = parse_config(read_config_file(dir / "c.ini"));
    EXPECT_EQ(c.repeats, 2u);
    EXPECT_EQ(model_train_config(c, "FairGCN").alpha, 4.0);
    std::ofstream(dir / "bad.ini") << "[experiment\nmodels = GCN\n";
    EXPECT_THROW(read_config_file(dir / "bad.ini"), ConfigError);
}

TEST(Config, TrainingPrecedence) {
    const ExperimentConfig c = parse_config(tree_of({"train.alpha=5", "train.beta=3", "train.epochs=7",
                                                     "model:FairGCN.alpha=9"}));
    const TrainConfig full = model_train_config(c, "FairGCN");
    EXPECT_EQ(full.alpha, 9.0);
    EXPECT_EQ(full.beta, 3.0);
    EXPECT_EQ(full.epochs, 7u);
    EXPECT_EQ(full.sp_threshold, 0.03);
    const TrainConfig no_adv = model_train_config(c, "FairGCN\\A");
    EXPECT_EQ(no_adv.beta, 0.0);
    EXPECT_EQ(no_adv.alpha, 5.0);
    EXPECT_EQ(model_train_config(c, "FairGCN_C").alpha, 0.0);
    EXPECT_EQ(model_train_config(c, "FairGCN\\E").targets, FairnessTargets::SensitiveOnly);
    EXPECT_EQ(model_train_config(c, "FairGCN-MLPest").estimator_backbone, Backbone::MLP);
    const TrainConfig gat = model_train_config(parse_config(pt::ptree{}), "FairGAT");
    EXPECT_EQ(gat.alpha, 2.0);
    EXPECT_EQ(gat.beta, 0.1);
    const TrainConfig base = model_train_config(c, "GCN");
    EXPECT_FALSE(base.fair);
    EXPECT_EQ(base.alpha, 0.0);
    EXPECT_EQ(base.beta, 0.0);
    EXPECT_TRUE(std::isinf(base.sp_threshold));
}

TEST(Config, EchoShowsResolvedAblation) {
    const ExperimentConfig c = parse_config(tree_of({"train.beta=3", "model:FairGCN\\A.hidden=16"}));
    const TrainConfig tc = model_train_config(c, "FairGCN\\A");
    EXPECT_EQ(tc.hidden, 16u);
    const pt::ptree echo = run_echo(c, "FairGCN\\A", tc, 11);
    EXPECT_EQ(echo.get<std::string>(detail::key_path("train", "beta")), "0");
    EXPECT_EQ(echo.get<std::string>(detail::key_path("train", "alpha")), "100");
    EXPECT_EQ(echo.get<std::string>(detail::key_path("train", "hidden")), "16");
    EXPECT_EQ(echo.get<std::string>(detail::key_path("experiment", "seed")), "11");
    const ExperimentConfig back = parse_config(echo);
    const TrainConfig again = model_train_config(back, "FairGCN\\A");
    EXPECT_EQ(again.beta, 0.0);
    EXPECT_EQ(again.hidden, 16u);
    const TrainConfig plain = model_train_config(c, "GCN");
    EXPECT_NO_THROW(parse_config(run_echo(c, "GCN", plain, 0)));
}

TEST(Results, CsvLayoutAndPopulationStd) {
    ResultsTable t;
    ModelResult m{"GCN", {}};
    for (double acc : {0.5, 0.7}) {
        RunOutcome r;
        r.metrics = MetricsReport{acc, 0.6, 0.1, 0.2, {}};
        m.runs.push_back(r);
    }
    RunOutcome failed;
    failed.error = "diverged";
    m.runs.push_back(failed);
    t.rows.push_back(m);
    t.rows.push_back(ModelResult{"FairGCN\\A", {failed}});
    const std::string csv = results_csv(t);
    EXPECT_NE(csv.find("GCN,acc,0.6,0.09999999999999998,2\n"), std::string::npos) << csv;
    EXPECT_NE(csv.find("GCN,auc,0.6,0,2\n"), std::string::npos) << csv;
    EXPECT_NE(csv.find("FairGCN\\A,delta_eo,,,0\n"), std::string::npos) << csv;
    EXPECT_EQ(*t.at("GCN").median(0), 0.6);
    EXPECT_THROW(t.at("GAT"), ConfigError);
    EXPECT_EQ(results_csv(ResultsTable{}), "model,metric,mean,std,repeats\n");
}

TEST(Report, GoldenTable) {
    const fs::path dir = scratch("report");
    fs::copy_file(kFixtures / "report" / "results.csv", dir / "results.csv");
    const std::string text = report(dir);
    EXPECT_EQ(text, slurp(kFixtures / "report" / "table.txt"));
    EXPECT_EQ(slurp(dir / "table.txt"), text);
    EXPECT_EQ(slurp(dir / "table.csv"), slurp(kFixtures / "report" / "table.csv"));
    EXPECT_NE(text.find("—"), std::string::npos);
}

TEST(Report, HeaderOnlyForEmptyResults) {
    const fs::path dir = scratch("report_empty");
    std::ofstream(dir / "results.csv") << results_csv(ResultsTable{});
    const std::string text = report(dir);
    EXPECT_EQ(text.substr(0, text.find('\n')), "Model  ACC (%)  AUC (%)  ΔSP (%)  ΔEO (%)");
    EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 2);
    std::ofstream(dir / "results.csv") << "bogus\n";
    EXPECT_THROW(report(dir), DataError);
}

TEST(Experiment, RunDirectoriesAndDeterminism) {
    const fs::path a = scratch("exp_a"), b = scratch("exp_b");
    const ResultsTable ta = run_experiment(parse_config(tiny_tree(a)));
    pt::ptree tb = tiny_tree(b);
    apply_override(tb, "experiment.threads=3");
    run_experiment(parse_config(tb));
    EXPECT_EQ(slurp(a / "results.csv"), slurp(b / "results.csv"));
    ASSERT_EQ(ta.rows.size(), 3u);
    for (const auto& row : ta.rows)
        for (const auto& run : row.runs) EXPECT_TRUE(run.error.empty()) << run.error;

    const fs::path run = a / "FairGCN" / "run1";
    for (const auto* f : {"config.ini", "splits.json", "metrics.json", "curves.csv", "checkpoint.bin"})
        EXPECT_TRUE(fs::exists(run / f)) << f;
    const auto metrics = nlohmann::json::parse(slurp(run / "metrics.json"));
    EXPECT_EQ(metrics["seed"], 4);
    EXPECT_EQ(metrics["acc"].get<double>(), ta.at("FairGCN").runs[1].metrics->acc);
    EXPECT_TRUE(metrics.contains("estimator"));
    const std::string curves = slurp(run / "curves.csv");
    EXPECT_EQ(curves.substr(0, curves.find('\n')), "axis,value,model,metric,mean,std");
    EXPECT_NE(curves.find("epoch,7,FairGCN,l_r,"), std::string::npos);

    // Reloading the echo, splits and checkpoint reproduces the test metrics.
    const ExperimentConfig echo = parse_config(read_config_file(run / "config.ini"));
    const Dataset ds = load_experiment_data(echo);
    TrainingData data(ds, load_splits(run / "splits.json"));
    const MetricsReport again = evaluate(data, from_named(load_checkpoint(run / "checkpoint.bin")), data.splits().test);
    EXPECT_EQ(again.acc, metrics["acc"].get<double>());
    EXPECT_EQ(again.delta_sp, metrics["delta_sp"].get<double>());
}

TEST(Experiment, FailedRunsAreRecorded) {
    const fs::path out = scratch("exp_fail");
    pt::ptree t = tiny_tree(out);
    apply_override(t, "experiment.models=GCN");
    apply_override(t, "splits.labelled=5000");
    const ResultsTable r = run_experiment(parse_config(t));
    EXPECT_FALSE(r.at("GCN").runs[0].error.empty());
    EXPECT_TRUE(fs::exists(out / "GCN" / "run0" / "error.txt"));
    EXPECT_NE(slurp(out / "results.csv").find("GCN,acc,,,0"), std::string::npos);
    EXPECT_NE(report(out).find("—"), std::string::npos);
    EXPECT_THROW(run_experiment(parse_config(tree_of({"experiment.models="}))), ConfigError);
}

TEST(Sweep, SingleValueMatchesDirectRun) {
    const fs::path sw = scratch("sweep"), direct = scratch("sweep_direct");
    pt::ptree t = tiny_tree(sw);
    apply_override(t, "experiment.models=GCN,FairGCN");
    const ExperimentConfig cfg = parse_config(t);
    const Dataset ds = load_experiment_data(cfg);
    const auto points = sweep(cfg, ds, SweepAxis::SensitiveCount, {"30"});
    ASSERT_EQ(points.size(), 1u);

    pt::ptree d = t;
    apply_override(d, "experiment.output=" + direct.string());
    run_experiment(parse_config(d), ds);
    EXPECT_EQ(slurp(sw / "sweep_v_s_30" / "results.csv"), slurp(direct / "results.csv"));
    const std::string csv = slurp(sw / "curves_v_s.csv");
    EXPECT_EQ(csv.substr(0, csv.find('\n')), "axis,value,model,metric,mean,std");
    EXPECT_NE(csv.find("v_s,30,FairGCN,delta_sp,"), std::string::npos);
    EXPECT_EQ(parse_axis("alpha"), SweepAxis::Alpha);
    EXPECT_THROW(parse_axis("gamma"), ConfigError);
    EXPECT_THROW(sweep(cfg, ds, SweepAxis::Alpha, {}), ConfigError);
}

TEST(Ablation, VariantsFollowBaseBackbone) {
    EXPECT_EQ(ablation_variants().size(), 5u);
    const fs::path out = scratch("ablate");
    pt::ptree t = tiny_tree(out);
    apply_override(t, "experiment.models=FairGAT");
    apply_override(t, "experiment.repeats=1");
    const ResultsTable r = run_ablation(parse_config(t));
    ASSERT_EQ(r.rows.size(), 5u);
    EXPECT_EQ(r.rows[1].model, "FairGAT\\A");
    EXPECT_TRUE(fs::exists(out / "FairGAT_E" / "run0" / "metrics.json"));
}
