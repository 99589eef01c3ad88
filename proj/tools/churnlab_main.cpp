#include "churnlab/pipeline.hpp"

#include <CLI11.hpp>

#include <cstdint>
#include <iostream>
#include <map>
#include <optional>
#include <string>

namespace {

struct StageArgs {
    std::string config;
    std::optional<std::string> out;
    std::optional<std::uint64_t> seed;
};

void add_stage(CLI::App& app, const std::string& name, const std::string& desc,
               std::map<std::string, StageArgs>& args) {
    CLI::App* sub = app.add_subcommand(name, desc);
    StageArgs& a = args[name];
    sub->add_option("--config", a.config, "pipeline config JSON")->required();
    sub->add_option("--out", a.out, "output directory (overrides the config)");
    sub->add_option("--seed", a.seed, "master seed (overrides the config)");
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"churn propensity and causal analysis pipeline"};
    app.require_subcommand(1);

    std::map<std::string, StageArgs> args;
    add_stage(app, "synth", "generate a synthetic member corpus with ground truth", args);
    add_stage(app, "prepare", "filter, snapshot, split, scale, encode, SMOTE, RFE", args);
    add_stage(app, "train", "train the configured model roster", args);
    add_stage(app, "evaluate", "score the roster on the held-out test split", args);
    add_stage(app, "explain", "partial dependence, permutation importance, shortlist", args);
    add_stage(app, "causal", "identify, estimate and refute the configured queries", args);

    CLI11_PARSE(app, argc, argv);

    const std::string stage = app.get_subcommands().front()->get_name();
    const StageArgs& a = args[stage];
    try {
        const auto cfg = churnlab::pipeline::load_config(a.config, a.out, a.seed);
        const auto summary = churnlab::pipeline::run_stage(stage, cfg);
        for (const auto& line : summary.lines) std::cout << line << "\n";
        for (const auto& file : summary.files)
            std::cout << "wrote " << cfg.resolve(file) << "\n";
        return 0;
    } catch (const std::exception& e) {
        std::cerr << "churnlab " << stage << ": error: " << e.what() << "\n";
        return 1;
    }
}
