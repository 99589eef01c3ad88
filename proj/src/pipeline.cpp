#include "churnlab/pipeline.hpp"

#include "churnlab/csv.hpp"
#include "churnlab/featsel.hpp"
#include "churnlab/metrics.hpp"
#include "churnlab/nnet.hpp"
#include "churnlab/preprocess.hpp"
#include "churnlab/rng.hpp"

#include <algorithm>
#include <filesystem>
#include <map>
#include <sstream>
#include <stdexcept>

namespace churnlab::pipeline {

namespace {

namespace fs = std::filesystem;

// Stage substreams of the master seed. Each stage draws from its own branch
// so rerunning one stage never disturbs another.
constexpr std::uint64_t kSynthStream = 0xA1;
constexpr std::uint64_t kSplitStream = 0xA2;
constexpr std::uint64_t kSmoteStream = 0xA3;
constexpr std::uint64_t kTrainStream = 0xA4;
constexpr std::uint64_t kExplainStream = 0xA5;
constexpr std::uint64_t kCausalStream = 0xA6;

const nlohmann::ordered_json& require(const nlohmann::ordered_json& j,
                                      const std::string& key) {
    if (!j.contains(key)) throw std::runtime_error("config missing key: " + key);
    return j.at(key);
}

nlohmann::ordered_json section(const nlohmann::ordered_json& j, const std::string& key) {
    if (!j.contains(key)) return nlohmann::ordered_json::object();
    if (!j.at(key).is_object())
        throw std::runtime_error("config section is not an object: " + key);
    return j.at(key);
}

WindowSpec parse_window(const nlohmann::ordered_json& j, const WindowSpec& defaults) {
    WindowSpec w = defaults;
    w.anchor_month = j.value("anchor_month", w.anchor_month);
    w.observation_len = j.value("observation_len", w.observation_len);
    w.outcome_len = j.value("outcome_len", w.outcome_len);
    if (w.observation_len < 1) throw std::runtime_error("observation_len must be positive");
    if (w.outcome_len < 1) throw std::runtime_error("outcome_len must be positive");
    return w;
}

dataset::FilterSpec parse_filter(const nlohmann::ordered_json& j) {
    dataset::FilterSpec f;
    f.min_tenure_months = j.value("min_tenure_months", f.min_tenure_months);
    f.min_balance = j.value("min_balance", f.min_balance);
    f.balance_attribute = j.value("balance_attribute", f.balance_attribute);
    return f;
}

dataset::Recipe default_recipe() {
    using dataset::Aggregation;
    return {
        {"balance",
         {Aggregation::last, Aggregation::mean, Aggregation::change_amount,
          Aggregation::change_ratio}},
        {"sg_contribution", {Aggregation::sum, Aggregation::recency}},
        {"account_growth", {Aggregation::last}},
        {"login_count", {Aggregation::mean, Aggregation::last}},
    };
}

dataset::Recipe parse_recipe(const nlohmann::ordered_json& j) {
    dataset::Recipe recipe;
    for (const auto& [attr, aggs] : j.items()) {
        std::vector<dataset::Aggregation> list;
        for (const auto& a : aggs)
            list.push_back(dataset::aggregation_from_string(a.get<std::string>()));
        if (list.empty())
            throw std::runtime_error("recipe lists no aggregations for " + attr);
        recipe[attr] = std::move(list);
    }
    if (recipe.empty()) throw std::runtime_error("recipe has no attributes");
    return recipe;
}

nlohmann::ordered_json recipe_to_json(const dataset::Recipe& recipe) {
    nlohmann::ordered_json j;
    for (const auto& [attr, aggs] : recipe) {
        nlohmann::ordered_json list = nlohmann::ordered_json::array();
        for (const auto a : aggs) list.push_back(dataset::aggregation_name(a));
        j[attr] = std::move(list);
    }
    return j;
}

causal::EstimationMethod method_from_string(const std::string& s) {
    if (s == "ipw") return causal::EstimationMethod::ipw;
    if (s == "regression") return causal::EstimationMethod::regression;
    throw std::runtime_error("unknown estimation method: " + s);
}

std::string method_name(causal::EstimationMethod m) {
    return m == causal::EstimationMethod::ipw ? "ipw" : "regression";
}

nlohmann::ordered_json window_to_json(const WindowSpec& w) {
    return {{"anchor_month", w.anchor_month},
            {"observation_len", w.observation_len},
            {"outcome_len", w.outcome_len}};
}

nlohmann::ordered_json filter_to_json(const dataset::FilterSpec& f) {
    return {{"min_tenure_months", f.min_tenure_months},
            {"min_balance", f.min_balance},
            {"balance_attribute", f.balance_attribute}};
}

nlohmann::ordered_json class_counts_json(const LabeledDataset& ds) {
    const auto counts = ds.class_counts();
    return nlohmann::ordered_json::array({counts[0], counts[1]});
}

void ensure_parent_dir(const std::string& path) {
    const fs::path p = fs::path(path).parent_path();
    if (!p.empty()) fs::create_directories(p);
}

std::string join_path(const std::string& dir, const std::string& path) {
    const fs::path p(path);
    if (p.is_absolute()) return path;
    return (fs::path(dir) / p).lexically_normal().string();
}

LabeledDataset read_prepared(const PipelineConfig& cfg, const std::string& name) {
    const std::string path = cfg.resolve(name);
    if (!fs::exists(path))
        throw std::runtime_error(name + " not found at " + path + " (run prepare first)");
    return csv::read_labeled_csv(path);
}

nlohmann::ordered_json read_train_summary(const PipelineConfig& cfg) {
    const std::string path = cfg.resolve("train_summary.json");
    if (!fs::exists(path))
        throw std::runtime_error("train_summary.json not found at " + path +
                                 " (run train first)");
    return csv::read_json_file(path);
}

ClassifierPtr load_model(const PipelineConfig& cfg, const std::string& name) {
    const std::string path = cfg.resolve("models/" + name + ".json");
    if (!fs::exists(path))
        throw std::runtime_error("model " + name + " not found at " + path +
                                 " (run train first)");
    return models::classifier_from_json(csv::read_json_file(path));
}

} // namespace

std::string PipelineConfig::resolve(const std::string& path) const {
    return join_path(out_dir, path);
}

PipelineConfig config_from_json(const nlohmann::ordered_json& j) {
    PipelineConfig cfg;
    cfg.seed = require(j, "seed").get<std::uint64_t>();
    cfg.out_dir = j.value("out_dir", std::string("."));

    const auto synth_j = section(j, "synth");
    cfg.corpus = synth::corpus_from_json(section(synth_j, "corpus"));
    cfg.corpus.seed = derive_seed(cfg.seed, kSynthStream);

    const auto data_j = section(j, "data");
    cfg.data.monthly_csv = data_j.value("monthly_csv", cfg.data.monthly_csv);
    cfg.data.static_csv = data_j.value("static_csv", cfg.data.static_csv);
    WindowSpec default_window;
    default_window.anchor_month = 18;
    cfg.data.window = parse_window(section(data_j, "window"), default_window);
    cfg.data.filter = parse_filter(section(data_j, "filter"));
    cfg.data.recipe = data_j.contains("recipe") ? parse_recipe(data_j.at("recipe"))
                                                : default_recipe();

    const auto split_j = section(j, "split");
    cfg.split.train_fraction = split_j.value("train_fraction", cfg.split.train_fraction);
    if (!(cfg.split.train_fraction > 0.0 && cfg.split.train_fraction < 1.0))
        throw std::runtime_error("train_fraction must lie strictly between 0 and 1");

    const auto smote_j = section(j, "smote");
    cfg.smote.enabled = smote_j.value("enabled", cfg.smote.enabled);
    cfg.smote.k_neighbors = smote_j.value("k_neighbors", cfg.smote.k_neighbors);

    const auto rfe_j = section(j, "rfe");
    cfg.rfe.enabled = rfe_j.value("enabled", cfg.rfe.enabled);
    cfg.rfe.step = rfe_j.value("step", cfg.rfe.step);
    if (cfg.rfe.enabled) {
        if (rfe_j.contains("n_keep")) {
            cfg.rfe.n_keep = rfe_j.at("n_keep").get<std::size_t>();
        } else if (!j.contains("rfe")) {
            cfg.rfe.n_keep = 12; // default recipe yields 15 columns
        } else {
            throw std::runtime_error("config missing key: rfe.n_keep");
        }
        if (cfg.rfe.n_keep == 0) throw std::runtime_error("rfe.n_keep must be positive");
    }

    const auto models_j = section(j, "models");
    if (models_j.contains("roster"))
        cfg.models.roster = models_j.at("roster").get<std::vector<std::string>>();
    if (cfg.models.roster.empty()) throw std::runtime_error("model roster is empty");
    {
        const auto log_j = section(models_j, "logistic");
        cfg.models.logistic.learning_rate =
            log_j.value("learning_rate", cfg.models.logistic.learning_rate);
        cfg.models.logistic.epochs = log_j.value("epochs", cfg.models.logistic.epochs);
    }
    cfg.models.ann_1 = models::deep_ann_1();
    cfg.models.ann_2 = models::deep_ann_2();
    if (models_j.contains("ann_1")) {
        auto merged = models::preset_to_json(cfg.models.ann_1);
        merged.update(models_j.at("ann_1"));
        cfg.models.ann_1 = models::preset_from_json(merged);
    }
    if (models_j.contains("ann_2")) {
        auto merged = models::preset_to_json(cfg.models.ann_2);
        merged.update(models_j.at("ann_2"));
        cfg.models.ann_2 = models::preset_from_json(merged);
    }
    if (models_j.contains("vote_members"))
        cfg.models.vote_members =
            models_j.at("vote_members").get<std::vector<std::string>>();
    for (const auto& name : cfg.models.roster) {
        static const std::vector<std::string> known = {
            "linear", "logistic", "naive_bayes", "ann_1",
            "ann_2",  "ensemble_ann", "soft_vote", "hard_vote"};
        if (std::find(known.begin(), known.end(), name) == known.end())
            throw std::runtime_error("unknown roster model: " + name);
        if ((name == "soft_vote" || name == "hard_vote") && cfg.models.vote_members.empty())
            throw std::runtime_error("config missing key: models.vote_members");
    }

    const auto eval_j = section(j, "evaluate");
    cfg.evaluate.threshold = eval_j.value("threshold", cfg.evaluate.threshold);

    const auto explain_j = section(j, "explain");
    cfg.explain.model = explain_j.value("model", cfg.explain.model);
    if (explain_j.contains("metric"))
        cfg.explain.metric =
            interpret::metric_from_string(explain_j.at("metric").get<std::string>());
    cfg.explain.n_repeats = explain_j.value("n_repeats", cfg.explain.n_repeats);
    cfg.explain.grid_size = explain_j.value("grid_size", cfg.explain.grid_size);
    cfg.explain.top_k = explain_j.value("top_k", cfg.explain.top_k);
    if (cfg.explain.n_repeats < 1) throw std::runtime_error("n_repeats must be positive");

    const auto causal_j = section(j, "causal");
    cfg.causal.graph = causal_j.value("graph", cfg.causal.graph);
    cfg.causal.snapshot = causal_j.value("snapshot", cfg.causal.snapshot);
    cfg.causal.options.outcome = causal_j.value("outcome", cfg.causal.options.outcome);
    if (causal_j.contains("method"))
        cfg.causal.options.method =
            method_from_string(causal_j.at("method").get<std::string>());
    cfg.causal.options.hajek = causal_j.value("hajek", cfg.causal.options.hajek);
    cfg.causal.options.propensity.clip =
        causal_j.value("clip", cfg.causal.options.propensity.clip);
    {
        const auto ref_j = section(causal_j, "refuter");
        cfg.causal.options.refute_fraction =
            ref_j.value("fraction", cfg.causal.options.refute_fraction);
        cfg.causal.options.refute_trials =
            ref_j.value("trials", cfg.causal.options.refute_trials);
        cfg.causal.options.stability_tolerance =
            ref_j.value("stability_tolerance", cfg.causal.options.stability_tolerance);
    }
    cfg.causal.options.seed = derive_seed(cfg.seed, kCausalStream);
    if (causal_j.contains("queries")) {
        for (const auto& qj : causal_j.at("queries")) {
            causal::CausalQuery q;
            q.name = require(qj, "name").get<std::string>();
            q.treatment = require(qj, "treatment").get<std::string>();
            q.rule = causal::rule_from_json(require(qj, "rule"));
            cfg.causal.queries.push_back(std::move(q));
        }
    }

    // Echo the effective configuration, defaults included, so runs are
    // self-describing.
    nlohmann::ordered_json audit;
    audit["seed"] = cfg.seed;
    audit["out_dir"] = cfg.out_dir;
    audit["synth"]["corpus"] = synth::corpus_to_json(cfg.corpus);
    audit["data"]["monthly_csv"] = cfg.data.monthly_csv;
    audit["data"]["static_csv"] = cfg.data.static_csv;
    audit["data"]["window"] = window_to_json(cfg.data.window);
    audit["data"]["filter"] = filter_to_json(cfg.data.filter);
    audit["data"]["recipe"] = recipe_to_json(cfg.data.recipe);
    audit["split"]["train_fraction"] = cfg.split.train_fraction;
    audit["smote"] = {{"enabled", cfg.smote.enabled},
                      {"k_neighbors", cfg.smote.k_neighbors}};
    audit["rfe"] = {{"enabled", cfg.rfe.enabled}, {"step", cfg.rfe.step}};
    if (cfg.rfe.enabled) audit["rfe"]["n_keep"] = cfg.rfe.n_keep;
    audit["models"]["roster"] = cfg.models.roster;
    audit["models"]["logistic"] = {{"learning_rate", cfg.models.logistic.learning_rate},
                                   {"epochs", cfg.models.logistic.epochs}};
    audit["models"]["ann_1"] = models::preset_to_json(cfg.models.ann_1);
    audit["models"]["ann_2"] = models::preset_to_json(cfg.models.ann_2);
    if (!cfg.models.vote_members.empty())
        audit["models"]["vote_members"] = cfg.models.vote_members;
    audit["evaluate"]["threshold"] = cfg.evaluate.threshold;
    audit["explain"] = {{"model", cfg.explain.model},
                        {"metric", interpret::metric_name(cfg.explain.metric)},
                        {"n_repeats", cfg.explain.n_repeats},
                        {"grid_size", cfg.explain.grid_size},
                        {"top_k", cfg.explain.top_k}};
    audit["causal"]["graph"] = cfg.causal.graph;
    audit["causal"]["snapshot"] = cfg.causal.snapshot;
    audit["causal"]["outcome"] = cfg.causal.options.outcome;
    audit["causal"]["method"] = method_name(cfg.causal.options.method);
    audit["causal"]["hajek"] = cfg.causal.options.hajek;
    audit["causal"]["clip"] = cfg.causal.options.propensity.clip;
    audit["causal"]["refuter"] = {
        {"fraction", cfg.causal.options.refute_fraction},
        {"trials", cfg.causal.options.refute_trials},
        {"stability_tolerance", cfg.causal.options.stability_tolerance}};
    audit["causal"]["queries"] = nlohmann::ordered_json::array();
    for (const auto& q : cfg.causal.queries)
        audit["causal"]["queries"].push_back({{"name", q.name},
                                              {"treatment", q.treatment},
                                              {"rule", causal::rule_to_json(q.rule)}});
    cfg.audit = std::move(audit);
    return cfg;
}

PipelineConfig load_config(const std::string& path,
                           const std::optional<std::string>& out_override,
                           const std::optional<std::uint64_t>& seed_override) {
    if (!fs::exists(path)) throw std::runtime_error("config file not found: " + path);
    nlohmann::ordered_json j = csv::read_json_file(path);
    if (!j.is_object()) throw std::runtime_error("config root must be a JSON object");
    if (seed_override) j["seed"] = *seed_override;
    if (out_override) j["out_dir"] = *out_override;
    else if (!j.contains("out_dir")) {
        // Default the output directory to the config file's directory so a
        // bare `--config run/config.json` keeps the run self-contained.
        const fs::path parent = fs::path(path).parent_path();
        j["out_dir"] = parent.empty() ? std::string(".") : parent.string();
    }
    return config_from_json(j);
}

StageSummary run_synth(const PipelineConfig& cfg) {
    StageSummary out{"synth", {}, {}};
    const auto corpus = synth::generate_churn_corpus(cfg.corpus);

    fs::create_directories(cfg.out_dir);
    const std::string monthly = cfg.resolve(cfg.data.monthly_csv);
    const std::string statics = cfg.resolve(cfg.data.static_csv);
    ensure_parent_dir(monthly);
    ensure_parent_dir(statics);
    csv::write_member_csvs(corpus.records, monthly, statics);
    out.files.push_back(cfg.data.monthly_csv);
    out.files.push_back(cfg.data.static_csv);

    csv::write_text_file(synth::corpus_graph_text(), cfg.resolve(cfg.causal.graph));
    out.files.push_back(cfg.causal.graph);

    csv::write_json_file(
        synth::ground_truth_json(corpus, cfg.data.window, cfg.data.filter),
        cfg.resolve("ground_truth.json"));
    out.files.push_back("ground_truth.json");

    const auto kept =
        dataset::apply_inclusion_filters(corpus.records, cfg.data.window, cfg.data.filter);
    const auto labels = dataset::label_outcomes(kept, cfg.data.window);
    const double churned =
        static_cast<double>(std::count(labels.begin(), labels.end(), 1));
    const double rate = kept.empty() ? 0.0 : churned / static_cast<double>(kept.size());

    out.lines.push_back("members: " + std::to_string(corpus.records.size()));
    out.lines.push_back("cohort at anchor " + std::to_string(cfg.data.window.anchor_month) +
                        ": " + std::to_string(kept.size()));
    out.lines.push_back("cohort churn rate: " + csv::format_double(rate));
    if (corpus.degenerate_hazard_warning)
        out.lines.push_back("warning: degenerate hazard (closures all or none)");
    return out;
}

StageSummary run_prepare(const PipelineConfig& cfg) {
    StageSummary out{"prepare", {}, {}};
    nlohmann::ordered_json log;
    log["stages"] = nlohmann::ordered_json::array();

    const std::string monthly = cfg.resolve(cfg.data.monthly_csv);
    const std::string statics = cfg.resolve(cfg.data.static_csv);
    const auto records = csv::read_member_csvs(monthly, statics);
    log["stages"].push_back({{"stage", "load"}, {"members", records.size()}});

    const auto kept =
        dataset::apply_inclusion_filters(records, cfg.data.window, cfg.data.filter);
    if (kept.empty()) throw std::runtime_error("inclusion filters removed every member");
    log["stages"].push_back({{"stage", "filter"}, {"members", kept.size()}});

    const auto snapshot = dataset::build_snapshot(kept, cfg.data.window, cfg.data.recipe);
    csv::write_labeled_csv(snapshot, cfg.resolve(cfg.causal.snapshot));
    out.files.push_back(cfg.causal.snapshot);
    log["stages"].push_back({{"stage", "snapshot"},
                             {"rows", snapshot.rows()},
                             {"feature_columns", snapshot.cols()},
                             {"class_counts", class_counts_json(snapshot)}});

    auto [train, test] = dataset::train_test_split(snapshot, cfg.split.train_fraction,
                                                   derive_seed(cfg.seed, kSplitStream));
    log["stages"].push_back({{"stage", "split"},
                             {"train_rows", train.rows()},
                             {"test_rows", test.rows()},
                             {"train_class_counts", class_counts_json(train)},
                             {"test_class_counts", class_counts_json(test)}});

    const auto scaler = preprocess::standardize_numeric_fit(train);
    train = preprocess::standardize_numeric_apply(train, scaler);
    test = preprocess::standardize_numeric_apply(test, scaler);
    csv::write_json_file(preprocess::scaler_to_json(scaler), cfg.resolve("scaler.json"));
    out.files.push_back("scaler.json");
    log["stages"].push_back(
        {{"stage", "standardize"}, {"numeric_columns", scaler.names.size()}});

    const auto encoder = preprocess::one_hot_fit(train);
    train = preprocess::one_hot_apply(train, encoder);
    test = preprocess::one_hot_apply(test, encoder);
    csv::write_json_file(preprocess::encoder_to_json(encoder), cfg.resolve("encoder.json"));
    out.files.push_back("encoder.json");
    log["stages"].push_back(
        {{"stage", "one_hot"}, {"feature_columns", train.cols()}});

    if (cfg.smote.enabled) {
        preprocess::SmoteConfig sm;
        sm.k_neighbors = cfg.smote.k_neighbors;
        sm.seed = derive_seed(cfg.seed, kSmoteStream);
        train = preprocess::smote(train, sm);
        log["stages"].push_back({{"stage", "smote"},
                                 {"enabled", true},
                                 {"train_rows", train.rows()},
                                 {"train_class_counts", class_counts_json(train)}});
    } else {
        log["stages"].push_back({{"stage", "smote"}, {"enabled", false}});
    }

    if (cfg.rfe.enabled) {
        if (cfg.rfe.n_keep > static_cast<std::size_t>(train.cols()))
            throw std::runtime_error("rfe.n_keep exceeds the feature count after encoding");
        const auto result = featsel::rfe(train, cfg.rfe.n_keep, cfg.rfe.step);
        train = result.reduced;
        test = featsel::select_columns(test, result.kept);
        csv::write_json_file(result.to_json(), cfg.resolve("ranking.json"));
        out.files.push_back("ranking.json");
        log["stages"].push_back({{"stage", "rfe"},
                                 {"enabled", true},
                                 {"feature_columns", train.cols()},
                                 {"eliminated", result.elimination_order}});
    } else {
        log["stages"].push_back({{"stage", "rfe"}, {"enabled", false}});
    }

    csv::write_labeled_csv(train, cfg.resolve("train.csv"));
    csv::write_labeled_csv(test, cfg.resolve("test.csv"));
    out.files.push_back("train.csv");
    out.files.push_back("test.csv");

    log["config"] = cfg.audit;
    csv::write_json_file(log, cfg.resolve("prepare_log.json"));
    out.files.push_back("prepare_log.json");

    const auto train_counts = train.class_counts();
    out.lines.push_back("train rows: " + std::to_string(train.rows()) + " (class balance " +
                        std::to_string(train_counts[0]) + ":" +
                        std::to_string(train_counts[1]) + ")");
    out.lines.push_back("test rows: " + std::to_string(test.rows()));
    out.lines.push_back("feature columns: " + std::to_string(train.cols()));
    return out;
}

namespace {

ClassifierPtr train_one(const PipelineConfig& cfg, const std::string& name,
                        const Matrix& x, const std::vector<int>& labels,
                        const std::map<std::string, ClassifierPtr>& trained,
                        std::uint64_t seed) {
    if (name == "linear") return models::fit_linear_discriminant(x, labels);
    if (name == "logistic") return models::fit_logistic(x, labels, cfg.models.logistic);
    if (name == "naive_bayes") return models::fit_gaussian_nb(x, labels);
    if (name == "ann_1" || name == "ann_2") {
        const auto& preset = name == "ann_1" ? cfg.models.ann_1 : cfg.models.ann_2;
        nnet::TrainConfig tc;
        tc.adam.learning_rate = preset.learning_rate;
        tc.epochs = preset.epochs;
        tc.batch_size = preset.batch_size;
        tc.seed = seed;
        return nnet::train(x, labels, models::preset_layers(preset), tc);
    }
    if (name == "ensemble_ann")
        return models::ensemble_ann(x, labels, cfg.models.ann_1, cfg.models.ann_2, seed);
    if (name == "soft_vote" || name == "hard_vote") {
        std::vector<ClassifierPtr> members;
        for (const auto& member : cfg.models.vote_members) {
            const auto it = trained.find(member);
            if (it == trained.end())
                throw std::runtime_error("vote member " + member +
                                         " must appear earlier in the roster");
            members.push_back(it->second);
        }
        if (name == "soft_vote") return std::make_shared<models::SoftVote>(members);
        return std::make_shared<models::HardVote>(members);
    }
    throw std::runtime_error("unknown roster model: " + name);
}

void write_loss_curve(const PipelineConfig& cfg, const std::string& name,
                      const std::vector<double>& losses, StageSummary& out) {
    if (losses.empty()) return;
    std::string text = "epoch,loss\n";
    for (std::size_t e = 0; e < losses.size(); ++e)
        text += std::to_string(e + 1) + "," + csv::format_double(losses[e]) + "\n";
    csv::write_text_file(text, cfg.resolve("loss_" + name + ".csv"));
    out.files.push_back("loss_" + name + ".csv");
}

} // namespace

StageSummary run_train(const PipelineConfig& cfg) {
    StageSummary out{"train", {}, {}};
    const auto train = read_prepared(cfg, "train.csv");

    fs::create_directories(cfg.resolve("models"));
    nlohmann::ordered_json summary;
    summary["models"] = nlohmann::ordered_json::array();

    std::map<std::string, ClassifierPtr> trained;
    const std::uint64_t train_seed = derive_seed(cfg.seed, kTrainStream);
    std::size_t index = 0;
    for (const auto& name : cfg.models.roster) {
        const std::uint64_t model_seed = derive_seed(train_seed, index++);
        nlohmann::ordered_json entry;
        entry["name"] = name;
        try {
            const ClassifierPtr model =
                train_one(cfg, name, train.features, train.labels, trained, model_seed);
            trained[name] = model;
            const std::string rel = "models/" + name + ".json";
            csv::write_json_file(model->to_json(), cfg.resolve(rel));
            out.files.push_back(rel);
            entry["status"] = "ok";
            entry["file"] = rel;
            if (const auto* net = dynamic_cast<const nnet::NetworkClassifier*>(model.get()))
                write_loss_curve(cfg, name, net->epoch_losses(), out);
            if (name == "ensemble_ann") {
                const auto* vote = dynamic_cast<const models::SoftVote*>(model.get());
                if (vote) {
                    int member_index = 1;
                    for (const auto& member : vote->members()) {
                        const auto* net =
                            dynamic_cast<const nnet::NetworkClassifier*>(member.get());
                        if (net)
                            write_loss_curve(cfg,
                                             name + "_" + std::to_string(member_index),
                                             net->epoch_losses(), out);
                        ++member_index;
                    }
                }
            }
            out.lines.push_back(name + ": ok");
        } catch (const std::exception& e) {
            entry["status"] = std::string("failed: ") + e.what();
            out.lines.push_back(name + ": failed: " + e.what());
        }
        summary["models"].push_back(std::move(entry));
    }

    summary["train_rows"] = train.rows();
    summary["feature_columns"] = train.cols();
    csv::write_json_file(summary, cfg.resolve("train_summary.json"));
    out.files.push_back("train_summary.json");
    if (trained.empty()) throw std::runtime_error("every roster model failed to train");
    return out;
}

StageSummary run_evaluate(const PipelineConfig& cfg) {
    StageSummary out{"evaluate", {}, {}};
    const auto test = read_prepared(cfg, "test.csv");
    const auto summary = read_train_summary(cfg);

    struct Row {
        std::string name;
        metrics::MetricsBundle bundle;
    };
    std::vector<Row> rows;
    nlohmann::ordered_json report;
    report["threshold"] = cfg.evaluate.threshold;
    report["test_rows"] = test.rows();
    report["models"] = nlohmann::ordered_json::object();

    for (const auto& entry : summary.at("models")) {
        const std::string name = entry.at("name").get<std::string>();
        if (entry.at("status").get<std::string>() != "ok") {
            report["models"][name] = {{"status", entry.at("status")}};
            continue;
        }
        try {
            const ClassifierPtr model = load_model(cfg, name);
            const Vector scores = model->predict_proba(test.features);
            const auto bundle =
                metrics::evaluate(scores, test.labels, cfg.evaluate.threshold);
            report["models"][name] = bundle.to_json();
            rows.push_back({name, bundle});

            std::string roc = "threshold,fpr,tpr\n";
            for (const auto& p : metrics::roc_points(scores, test.labels))
                roc += csv::format_double(p.threshold) + "," + csv::format_double(p.fpr) +
                       "," + csv::format_double(p.tpr) + "\n";
            const std::string rel = "roc_" + name + ".csv";
            csv::write_text_file(roc, cfg.resolve(rel));
            out.files.push_back(rel);
        } catch (const std::exception& e) {
            report["models"][name] = {{"status", std::string("failed: ") + e.what()}};
        }
    }

    csv::write_json_file(report, cfg.resolve("metrics.json"));
    out.files.push_back("metrics.json");

    std::sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) {
        if (a.bundle.test_acc != b.bundle.test_acc)
            return a.bundle.test_acc > b.bundle.test_acc;
        return a.name < b.name;
    });
    std::string comparison = "model,test_acc,auc,cohen_kappa,mcc\n";
    for (const auto& r : rows) {
        comparison += r.name + "," + csv::format_double(r.bundle.test_acc) + "," +
                      csv::format_double(r.bundle.auc) + "," +
                      csv::format_double(r.bundle.cohen_kappa) + "," +
                      csv::format_double(r.bundle.mcc) + "\n";
        out.lines.push_back(r.name + ": acc " + csv::format_double(r.bundle.test_acc) +
                            ", auc " + csv::format_double(r.bundle.auc));
    }
    csv::write_text_file(comparison, cfg.resolve("comparison.csv"));
    out.files.push_back("comparison.csv");
    return out;
}

StageSummary run_explain(const PipelineConfig& cfg) {
    StageSummary out{"explain", {}, {}};
    const auto test = read_prepared(cfg, "test.csv");
    const ClassifierPtr model = load_model(cfg, cfg.explain.model);

    const auto importances = interpret::permutation_importance(
        *model, test, cfg.explain.metric, cfg.explain.n_repeats,
        derive_seed(cfg.seed, kExplainStream));
    nlohmann::ordered_json importance_json =
        interpret::importances_to_json(importances, cfg.explain.metric);
    importance_json["model"] = cfg.explain.model;
    csv::write_json_file(importance_json, cfg.resolve("importance.json"));
    out.files.push_back("importance.json");

    std::map<std::string, interpret::PartialDependenceCurve> curves;
    std::string pdp = "feature,grid_value,mean_proba\n";
    for (const auto& spec : test.specs) {
        const auto curve = interpret::partial_dependence(*model, test.features, spec.name,
                                                         test.specs, cfg.explain.grid_size);
        for (std::size_t g = 0; g < curve.grid.size(); ++g)
            pdp += csv::escape_field(spec.name) + "," + csv::format_double(curve.grid[g]) +
                   "," + csv::format_double(curve.mean_proba[g]) + "\n";
        curves[spec.name] = curve;
    }
    csv::write_text_file(pdp, cfg.resolve("pdp.csv"));
    out.files.push_back("pdp.csv");

    const auto shortlist =
        interpret::shortlist_drivers(importances, curves, cfg.explain.top_k);
    csv::write_json_file(interpret::shortlist_to_json(shortlist),
                         cfg.resolve("shortlist.json"));
    out.files.push_back("shortlist.json");

    for (const auto& e : shortlist.entries)
        out.lines.push_back(e.feature + ": importance " + csv::format_double(e.importance) +
                            ", trend " + e.direction);
    return out;
}

StageSummary run_causal(const PipelineConfig& cfg) {
    StageSummary out{"causal", {}, {}};
    const std::string snapshot_path = cfg.resolve(cfg.causal.snapshot);
    if (!fs::exists(snapshot_path))
        throw std::runtime_error("snapshot not found at " + snapshot_path +
                                 " (run prepare first)");
    const auto snapshot = csv::read_labeled_csv(snapshot_path);

    const std::string graph_path = cfg.resolve(cfg.causal.graph);
    if (!fs::exists(graph_path))
        throw std::runtime_error("causal graph not found at " + graph_path);
    const auto dag = causal::parse_graph(csv::read_text_file(graph_path));

    if (cfg.causal.queries.empty())
        throw std::runtime_error("config missing key: causal.queries");

    const auto estimates =
        causal::run_causal_analysis(snapshot, dag, cfg.causal.queries, cfg.causal.options);

    csv::write_json_file(causal::report_to_json(estimates), cfg.resolve("causal_report.json"));
    out.files.push_back("causal_report.json");
    nlohmann::ordered_json audit = causal::audit_to_json(estimates, cfg.causal.options);
    audit["graph"] = causal::format_graph(dag);
    audit["config"] = cfg.audit;
    csv::write_json_file(audit, cfg.resolve("causal_audit.json"));
    out.files.push_back("causal_audit.json");

    for (const auto& e : estimates) {
        if (e.status == "ok")
            out.lines.push_back(e.name + ": ate " + csv::format_double(e.ate) + " (" +
                                e.interpretation + ")");
        else
            out.lines.push_back(e.name + ": " + e.status);
    }
    return out;
}

StageSummary run_stage(const std::string& stage, const PipelineConfig& cfg) {
    if (stage == "synth") return run_synth(cfg);
    if (stage == "prepare") return run_prepare(cfg);
    if (stage == "train") return run_train(cfg);
    if (stage == "evaluate") return run_evaluate(cfg);
    if (stage == "explain") return run_explain(cfg);
    if (stage == "causal") return run_causal(cfg);
    throw std::runtime_error("unknown stage: " + stage);
}

} // namespace churnlab::pipeline
