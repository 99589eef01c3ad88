#include "churnlab/csv.hpp"
#include "churnlab/pipeline.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <string>

using namespace churnlab;
namespace fs = std::filesystem;

namespace {

nlohmann::ordered_json minimal_config() {
    nlohmann::ordered_json j;
    j["seed"] = 5;
    j["out_dir"] = ".";
    return j;
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    return std::string(std::istreambuf_iterator<char>(in), {});
}

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& tag) {
        path = fs::temp_directory_path() / ("churnlab_pipe_" + tag);
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

} // namespace

TEST_CASE("config validation names the missing or bad key") {
    auto j = minimal_config();
    j.erase("seed");
    CHECK_THROWS_WITH_AS(pipeline::config_from_json(j), "config missing key: seed",
                         std::runtime_error);

    j = minimal_config();
    j["rfe"] = {{"enabled", true}}; // section present, n_keep absent
    CHECK_THROWS_WITH_AS(pipeline::config_from_json(j), "config missing key: rfe.n_keep",
                         std::runtime_error);

    j = minimal_config();
    j["rfe"] = {{"enabled", true}, {"n_keep", 0}};
    CHECK_THROWS_AS(pipeline::config_from_json(j), std::runtime_error);

    j = minimal_config();
    j["split"] = {{"train_fraction", 1.0}};
    CHECK_THROWS_AS(pipeline::config_from_json(j), std::runtime_error);

    j = minimal_config();
    j["models"] = {{"roster", nlohmann::ordered_json::array()}};
    CHECK_THROWS_AS(pipeline::config_from_json(j), std::runtime_error);

    j = minimal_config();
    j["models"] = {{"roster", {"logistic", "gradient_boost"}}};
    CHECK_THROWS_WITH_AS(pipeline::config_from_json(j),
                         "unknown roster model: gradient_boost", std::runtime_error);

    j = minimal_config();
    j["models"] = {{"roster", {"logistic", "soft_vote"}}};
    CHECK_THROWS_WITH_AS(pipeline::config_from_json(j),
                         "config missing key: models.vote_members", std::runtime_error);
}

TEST_CASE("an empty config fills every documented default") {
    auto cfg = pipeline::config_from_json(minimal_config());
    CHECK(cfg.seed == 5);
    CHECK(cfg.corpus.n_members == 4000);
    CHECK(cfg.data.window.anchor_month == 18);
    CHECK(cfg.data.window.observation_len == 12);
    CHECK(cfg.data.window.outcome_len == 6);
    CHECK(cfg.split.train_fraction == 0.8);
    CHECK(cfg.smote.enabled);
    CHECK(cfg.rfe.enabled);
    CHECK(cfg.rfe.n_keep == 12); // default recipe, no explicit rfe section
    CHECK(cfg.models.roster.size() == 6);
    CHECK(cfg.explain.model == "ensemble_ann");
    CHECK(cfg.causal.options.outcome == "churn");

    // The audit echo makes the effective run self-describing.
    CHECK(cfg.audit["seed"] == 5);
    CHECK(cfg.audit["rfe"]["n_keep"] == 12);
    CHECK(cfg.audit["explain"]["n_repeats"] == 5);
    CHECK(cfg.audit["causal"]["method"] == "ipw");

    // The corpus seed descends from the master seed.
    auto other = minimal_config();
    other["seed"] = 6;
    CHECK(pipeline::config_from_json(other).corpus.seed != cfg.corpus.seed);
}

TEST_CASE("relative paths resolve against the output directory") {
    auto cfg = pipeline::config_from_json(minimal_config());
    cfg.out_dir = "/data/run7";
    CHECK(cfg.resolve("train.csv") == "/data/run7/train.csv");
    CHECK(cfg.resolve("/abs/train.csv") == "/abs/train.csv");
}

TEST_CASE("load_config defaults out_dir to the config file's directory") {
    TempDir tmp("loadcfg");
    const auto cfg_path = (tmp.path / "config.json").string();
    auto j = minimal_config();
    j.erase("out_dir");
    csv::write_text_file(j.dump(2) + "\n", cfg_path);

    auto cfg = pipeline::load_config(cfg_path, std::nullopt, std::nullopt);
    CHECK(cfg.out_dir == tmp.path.string());

    auto over = pipeline::load_config(cfg_path, std::string("/elsewhere"), 99);
    CHECK(over.out_dir == "/elsewhere");
    CHECK(over.seed == 99);

    CHECK_THROWS_AS(pipeline::load_config((tmp.path / "nope.json").string(),
                                          std::nullopt, std::nullopt),
                    std::runtime_error);
}

TEST_CASE("the stage dispatcher rejects unknown stages") {
    auto cfg = pipeline::config_from_json(minimal_config());
    CHECK_THROWS_WITH_AS(pipeline::run_stage("frobnicate", cfg),
                         "unknown stage: frobnicate", std::runtime_error);
}

TEST_CASE("the six stages chain through files on a small corpus") {
    TempDir tmp("e2e");
    nlohmann::ordered_json j;
    j["seed"] = 11;
    j["out_dir"] = tmp.path.string();
    j["synth"] = {{"corpus", {{"n_members", 400}}}};
    j["rfe"] = {{"enabled", true}, {"n_keep", 8}};
    j["models"] = {{"roster", {"logistic", "linear"}}};
    j["explain"] = {{"model", "logistic"}, {"n_repeats", 2}, {"top_k", 3}};
    nlohmann::ordered_json query;
    query["name"] = "stopped_contributions";
    query["treatment"] = "sg_contribution_recency";
    query["rule"] = {{"kind", "threshold"}, {"value", 0.5}};
    j["causal"]["queries"] = nlohmann::ordered_json::array({query});
    auto cfg = pipeline::config_from_json(j);

    auto synth_out = pipeline::run_stage("synth", cfg);
    CHECK(synth_out.stage == "synth");
    for (const auto& f : {"monthly.csv", "static.csv", "causal_graph.txt",
                          "ground_truth.json"})
        CHECK(fs::exists(tmp.path / f));

    // Stages refuse to run before their inputs exist.
    CHECK_THROWS_AS(pipeline::run_stage("evaluate", cfg), std::runtime_error);

    auto prep_out = pipeline::run_stage("prepare", cfg);
    for (const auto& f : {"snapshot.csv", "scaler.json", "encoder.json",
                          "ranking.json", "train.csv", "test.csv",
                          "prepare_log.json"})
        CHECK(fs::exists(tmp.path / f));

    auto prep_log = csv::read_json_file((tmp.path / "prepare_log.json").string());
    const auto& last_stage = prep_log["stages"].back();
    CHECK(last_stage["stage"] == "rfe");
    CHECK(last_stage["feature_columns"] == 8);

    auto train_out = pipeline::run_stage("train", cfg);
    CHECK(fs::exists(tmp.path / "models" / "logistic.json"));
    CHECK(fs::exists(tmp.path / "models" / "linear.json"));
    CHECK(fs::exists(tmp.path / "train_summary.json"));

    pipeline::run_stage("evaluate", cfg);
    auto metrics = csv::read_json_file((tmp.path / "metrics.json").string());
    CHECK(metrics["models"].contains("logistic"));
    CHECK(metrics["models"]["logistic"].contains("auc"));
    CHECK(fs::exists(tmp.path / "roc_logistic.csv"));
    CHECK(fs::exists(tmp.path / "comparison.csv"));

    pipeline::run_stage("explain", cfg);
    auto importance = csv::read_json_file((tmp.path / "importance.json").string());
    CHECK(importance["model"] == "logistic");
    CHECK(importance["features"].size() > 0);
    CHECK(fs::exists(tmp.path / "pdp.csv"));
    CHECK(fs::exists(tmp.path / "shortlist.json"));

    pipeline::run_stage("causal", cfg);
    auto report = csv::read_json_file((tmp.path / "causal_report.json").string());
    REQUIRE(report.is_array());
    REQUIRE(report.size() == 1);
    CHECK(report[0]["causal_variable"] == "stopped_contributions");
    CHECK(report[0].contains("estimate_effect"));
    CHECK(report[0].contains("data_subset_refuter"));
    CHECK(report[0].contains("probability_of_churn"));

    // A query list is mandatory for the causal stage.
    auto no_queries = j;
    no_queries["causal"].erase("queries");
    auto cfg2 = pipeline::config_from_json(no_queries);
    CHECK_THROWS_WITH_AS(pipeline::run_stage("causal", cfg2),
                         "config missing key: causal.queries", std::runtime_error);
}

TEST_CASE("rerunning a stage with the same seed rewrites identical bytes") {
    TempDir tmp("repro");
    nlohmann::ordered_json j;
    j["seed"] = 17;
    j["out_dir"] = tmp.path.string();
    j["synth"] = {{"corpus", {{"n_members", 150}}}};
    auto cfg = pipeline::config_from_json(j);

    pipeline::run_stage("synth", cfg);
    const auto monthly_1 = slurp((tmp.path / "monthly.csv").string());
    const auto statics_1 = slurp((tmp.path / "static.csv").string());
    pipeline::run_stage("synth", cfg);
    CHECK(slurp((tmp.path / "monthly.csv").string()) == monthly_1);
    CHECK(slurp((tmp.path / "static.csv").string()) == statics_1);

    // A different master seed reaches every stage.
    auto j2 = j;
    j2["seed"] = 18;
    auto cfg2 = pipeline::config_from_json(j2);
    pipeline::run_stage("synth", cfg2);
    CHECK(slurp((tmp.path / "monthly.csv").string()) != monthly_1);
}
