#pragma once

#include "churnlab/causal.hpp"
#include "churnlab/dataset.hpp"
#include "churnlab/interpret.hpp"
#include "churnlab/models.hpp"
#include "churnlab/synth.hpp"

#include <json.hpp>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace churnlab::pipeline {

/*
 * Configuration-driven orchestration of the six stages. One JSON document
 * describes a whole run; stages hand data to each other through files in
 * the output directory, so any stage can be rerun in isolation.
 *
 * Every random draw anywhere in a run descends from the master seed, so two
 * runs with the same config and seed write byte-identical files.
 */

struct DataSection {
    std::string monthly_csv = "monthly.csv";
    std::string static_csv = "static.csv";
    WindowSpec window;
    dataset::FilterSpec filter;
    dataset::Recipe recipe;
};

struct SplitSection {
    double train_fraction = 0.8;
};

struct SmoteSection {
    bool enabled = true;
    int k_neighbors = 5;
};

struct RfeSection {
    bool enabled = true;
    std::size_t n_keep = 0; // required when enabled
    std::size_t step = 1;
};

struct ModelsSection {
    std::vector<std::string> roster = {"logistic", "linear", "naive_bayes",
                               "ann_1", "ann_2", "ensemble_ann"};
    models::LogisticConfig logistic;
    models::AnnPreset ann_1;
    models::AnnPreset ann_2;
    // Previously trained roster entries a soft_vote / hard_vote combines.
    std::vector<std::string> vote_members;
};

struct EvaluateSection {
    double threshold = 0.5;
};

struct ExplainSection {
    std::string model = "ensemble_ann";
    interpret::ImportanceMetric metric = interpret::ImportanceMetric::auc;
    int n_repeats = 5;
    int grid_size = 20;
    std::size_t top_k = 5;
};

struct CausalSection {
    std::string graph = "causal_graph.txt";
    std::string snapshot = "snapshot.csv";
    causal::CausalOptions options; // seed filled from the master seed
    std::vector<causal::CausalQuery> queries;
};

struct PipelineConfig {
    std::uint64_t seed = 0;
    std::string out_dir = ".";

    synth::ChurnCorpusConfig corpus; // corpus.seed derives from the master seed
    DataSection data;
    SplitSection split;
    SmoteSection smote;
    RfeSection rfe;
    ModelsSection models;
    EvaluateSection evaluate;
    ExplainSection explain;
    CausalSection causal;

    nlohmann::ordered_json audit; // the effective config, defaults included

    // Relative paths resolve against out_dir so chained stages find each
    // other's files without repeating directories in the config.
    std::string resolve(const std::string& path) const;
};

// Parses and validates the config document. The master seed is mandatory in
// the file unless overridden; missing required keys raise
// "config missing key: <name>".
PipelineConfig load_config(const std::string& path,
                           const std::optional<std::string>& out_override,
                           const std::optional<std::uint64_t>& seed_override);

PipelineConfig config_from_json(const nlohmann::ordered_json& j);

struct StageSummary {
    std::string stage;
    std::vector<std::string> lines; // printed by the CLI, one per line
    std::vector<std::string> files; // written paths, relative to out_dir
};

StageSummary run_synth(const PipelineConfig& cfg);
StageSummary run_prepare(const PipelineConfig& cfg);
StageSummary run_train(const PipelineConfig& cfg);
StageSummary run_evaluate(const PipelineConfig& cfg);
StageSummary run_explain(const PipelineConfig& cfg);
StageSummary run_causal(const PipelineConfig& cfg);

StageSummary run_stage(const std::string& stage, const PipelineConfig& cfg);

} // namespace churnlab::pipeline
