#include "churnlab/causal.hpp"
#include "churnlab/csv.hpp"
#include "churnlab/dataset.hpp"
#include "churnlab/featsel.hpp"
#include "churnlab/interpret.hpp"
#include "churnlab/metrics.hpp"
#include "churnlab/models.hpp"
#include "churnlab/nnet.hpp"
#include "churnlab/pipeline.hpp"
#include "churnlab/preprocess.hpp"
#include "churnlab/synth.hpp"

#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace py = pybind11;
using namespace churnlab;

namespace {

// Structured results cross the boundary as plain python dicts/lists by
// round-tripping the library's JSON form.
py::object to_py(const nlohmann::ordered_json& j) {
    return py::module_::import("json").attr("loads")(j.dump());
}

nlohmann::ordered_json from_py(const py::object& obj) {
    const std::string s =
        py::cast<std::string>(py::module_::import("json").attr("dumps")(obj));
    return nlohmann::ordered_json::parse(s);
}

LabeledDataset make_ds(const Matrix& x, const std::vector<int>& labels,
                       std::vector<std::string> names) {
    LabeledDataset ds;
    ds.features = x;
    ds.labels = labels;
    if (names.empty())
        for (Eigen::Index c = 0; c < x.cols(); ++c)
            names.push_back("f" + std::to_string(c));
    if (static_cast<Eigen::Index>(names.size()) != x.cols())
        throw std::invalid_argument("names length must match the column count");
    for (auto& n : names) ds.specs.push_back({std::move(n), FeatureKind::numeric, {}});
    ds.validate();
    return ds;
}

causal::Dag dag_from_edges(const std::vector<std::pair<std::string, std::string>>& edges) {
    return causal::make_dag(edges);
}

causal::BinarizeRule rule_from_args(const std::optional<double>& threshold, bool use_median,
                                    bool invert) {
    causal::BinarizeRule rule;
    if (use_median == threshold.has_value())
        throw std::invalid_argument("give either a threshold or median=True");
    rule.kind = use_median ? causal::BinarizeRule::Kind::median
                           : causal::BinarizeRule::Kind::threshold;
    if (threshold) rule.value = *threshold;
    rule.invert = invert;
    return rule;
}

} // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "churn propensity and causal analysis toolkit";

    // -- preprocessing ------------------------------------------------------
    m.def(
        "smote",
        [](const Matrix& x, const std::vector<int>& labels, int k_neighbors,
           std::uint64_t seed) {
            preprocess::SmoteConfig cfg;
            cfg.k_neighbors = k_neighbors;
            cfg.seed = seed;
            const auto out = preprocess::smote(make_ds(x, labels, {}), cfg);
            return py::make_tuple(out.features, out.labels);
        },
        py::arg("x"), py::arg("labels"), py::arg("k_neighbors") = 5, py::arg("seed") = 0,
        "Oversample the minority class to parity; returns (features, labels).");

    m.def(
        "standardize_fit",
        [](const Matrix& x) {
            std::vector<FeatureSpec> specs;
            for (Eigen::Index c = 0; c < x.cols(); ++c)
                specs.push_back({"f" + std::to_string(c), FeatureKind::numeric, {}});
            const auto p = preprocess::standardize_fit(x, specs);
            return py::make_tuple(p.mean, p.stddev);
        },
        py::arg("x"), "Column means and population stddevs; returns (mean, stddev).");

    m.def(
        "standardize_apply",
        [](const Matrix& x, const Vector& mean, const Vector& stddev) {
            preprocess::ScalerParams p;
            for (Eigen::Index c = 0; c < x.cols(); ++c)
                p.names.push_back("f" + std::to_string(c));
            p.mean = mean;
            p.stddev = stddev;
            return preprocess::standardize_apply(x, p);
        },
        py::arg("x"), py::arg("mean"), py::arg("stddev"));

    m.def("pearson", &preprocess::pearson, py::arg("x"), py::arg("y"));

    m.def(
        "rfe",
        [](const Matrix& x, const std::vector<int>& labels,
           const std::vector<std::string>& names, std::size_t n_keep, std::size_t step) {
            const auto result = featsel::rfe(make_ds(x, labels, names), n_keep, step);
            py::dict out;
            out["kept"] = result.kept;
            out["elimination_order"] = result.elimination_order;
            out["features"] = result.reduced.features;
            out["trace"] = to_py(result.to_json());
            return out;
        },
        py::arg("x"), py::arg("labels"), py::arg("names") = std::vector<std::string>{},
        py::arg("n_keep"), py::arg("step") = 1,
        "Recursive feature elimination down to n_keep columns.");

    // -- models -------------------------------------------------------------
    m.def(
        "fit_logistic",
        [](const Matrix& x, const std::vector<int>& labels, double learning_rate,
           int epochs) {
            models::LogisticConfig cfg;
            cfg.learning_rate = learning_rate;
            cfg.epochs = epochs;
            return to_py(models::fit_logistic(x, labels, cfg)->to_json());
        },
        py::arg("x"), py::arg("labels"), py::arg("learning_rate") = 0.5,
        py::arg("epochs") = 500, "Logistic regression; returns the model as a dict.");

    m.def(
        "fit_linear",
        [](const Matrix& x, const std::vector<int>& labels) {
            return to_py(models::fit_linear_discriminant(x, labels)->to_json());
        },
        py::arg("x"), py::arg("labels"));

    m.def(
        "fit_naive_bayes",
        [](const Matrix& x, const std::vector<int>& labels) {
            return to_py(models::fit_gaussian_nb(x, labels)->to_json());
        },
        py::arg("x"), py::arg("labels"));

    m.def(
        "train_network",
        [](const Matrix& x, const std::vector<int>& labels, const py::object& preset,
           std::uint64_t seed) {
            auto p = models::deep_ann_1();
            if (!preset.is_none()) p = models::preset_from_json(from_py(preset));
            nnet::TrainConfig cfg;
            cfg.adam.learning_rate = p.learning_rate;
            cfg.epochs = p.epochs;
            cfg.batch_size = p.batch_size;
            cfg.seed = seed;
            return to_py(nnet::train(x, labels, models::preset_layers(p), cfg)->to_json());
        },
        py::arg("x"), py::arg("labels"), py::arg("preset") = py::none(),
        py::arg("seed") = 0,
        "Train one feedforward network from a preset dict (defaults to preset 1).");

    m.def(
        "ensemble_ann",
        [](const Matrix& x, const std::vector<int>& labels, std::uint64_t seed,
           const py::object& preset_1, const py::object& preset_2) {
            auto p1 = models::deep_ann_1();
            auto p2 = models::deep_ann_2();
            if (!preset_1.is_none()) p1 = models::preset_from_json(from_py(preset_1));
            if (!preset_2.is_none()) p2 = models::preset_from_json(from_py(preset_2));
            return to_py(models::ensemble_ann(x, labels, p1, p2, seed)->to_json());
        },
        py::arg("x"), py::arg("labels"), py::arg("seed") = 0,
        py::arg("preset_1") = py::none(), py::arg("preset_2") = py::none(),
        "Train the two-network soft-vote ensemble.");

    m.def("ann_preset_1", [] { return to_py(models::preset_to_json(models::deep_ann_1())); });
    m.def("ann_preset_2", [] { return to_py(models::preset_to_json(models::deep_ann_2())); });

    m.def(
        "predict_proba",
        [](const py::object& model, const Matrix& x) {
            return models::classifier_from_json(from_py(model))->predict_proba(x);
        },
        py::arg("model"), py::arg("x"),
        "Class-1 probabilities from any saved model dict.");

    m.def(
        "predict",
        [](const py::object& model, const Matrix& x, double threshold) {
            return models::classifier_from_json(from_py(model))->predict(x, threshold);
        },
        py::arg("model"), py::arg("x"), py::arg("threshold") = 0.5);

    // -- metrics ------------------------------------------------------------
    m.def("auc", &metrics::auc, py::arg("scores"), py::arg("labels"),
          "Pairwise AUC with 0.5 tie credit.");

    m.def(
        "evaluate",
        [](const Vector& scores, const std::vector<int>& labels, double threshold) {
            return to_py(metrics::evaluate(scores, labels, threshold).to_json());
        },
        py::arg("scores"), py::arg("labels"), py::arg("threshold") = 0.5,
        "test_acc / auc / cohen_kappa / mcc as a dict.");

    // -- interpretation ------------------------------------------------------
    m.def(
        "partial_dependence",
        [](const py::object& model, const Matrix& x, const std::string& feature,
           const std::vector<std::string>& names, int grid_size) {
            std::vector<FeatureSpec> specs;
            auto use = names;
            if (use.empty())
                for (Eigen::Index c = 0; c < x.cols(); ++c)
                    use.push_back("f" + std::to_string(c));
            for (const auto& n : use) specs.push_back({n, FeatureKind::numeric, {}});
            const auto curve = interpret::partial_dependence(
                *models::classifier_from_json(from_py(model)), x, feature, specs,
                grid_size);
            return to_py(interpret::curve_to_json(curve));
        },
        py::arg("model"), py::arg("x"), py::arg("feature"),
        py::arg("names") = std::vector<std::string>{}, py::arg("grid_size") = 20);

    m.def(
        "permutation_importance",
        [](const py::object& model, const Matrix& x, const std::vector<int>& labels,
           const std::vector<std::string>& names, const std::string& metric,
           int n_repeats, std::uint64_t seed) {
            const auto imps = interpret::permutation_importance(
                *models::classifier_from_json(from_py(model)), make_ds(x, labels, names),
                interpret::metric_from_string(metric), n_repeats, seed);
            return to_py(
                interpret::importances_to_json(imps, interpret::metric_from_string(metric)));
        },
        py::arg("model"), py::arg("x"), py::arg("labels"),
        py::arg("names") = std::vector<std::string>{}, py::arg("metric") = "auc",
        py::arg("n_repeats") = 5, py::arg("seed") = 0);

    // -- causal graphs and estimation ----------------------------------------
    m.def(
        "d_separated",
        [](const std::vector<std::pair<std::string, std::string>>& edges,
           const std::string& x, const std::string& y,
           const std::vector<std::string>& z) {
            return causal::d_separated(dag_from_edges(edges), x, y, z);
        },
        py::arg("edges"), py::arg("x"), py::arg("y"),
        py::arg("z") = std::vector<std::string>{});

    m.def(
        "backdoor_sets",
        [](const std::vector<std::pair<std::string, std::string>>& edges,
           const std::string& treatment, const std::string& outcome) {
            return causal::backdoor_sets(dag_from_edges(edges), treatment, outcome);
        },
        py::arg("edges"), py::arg("treatment"), py::arg("outcome"),
        "Minimal backdoor adjustment sets, smallest first.");

    m.def(
        "descendants",
        [](const std::vector<std::pair<std::string, std::string>>& edges,
           const std::string& node) {
            return causal::descendants(dag_from_edges(edges), node);
        },
        py::arg("edges"), py::arg("node"));

    m.def(
        "binarize",
        [](const Vector& x, const std::optional<double>& threshold, bool median,
           bool invert) {
            const auto b = causal::binarize(x, rule_from_args(threshold, median, invert));
            return py::make_tuple(b.treated, b.cutpoint);
        },
        py::arg("x"), py::arg("threshold") = py::none(), py::arg("median") = false,
        py::arg("invert") = false, "Returns (treated indicator list, cutpoint).");

    m.def(
        "fit_propensity",
        [](const Matrix& z, const std::vector<int>& treated, double clip,
           double learning_rate, int epochs) {
            causal::PropensityConfig cfg;
            cfg.clip = clip;
            cfg.learning_rate = learning_rate;
            cfg.epochs = epochs;
            return causal::fit_propensity(z, treated, cfg);
        },
        py::arg("z"), py::arg("treated"), py::arg("clip") = 0.01,
        py::arg("learning_rate") = 0.5, py::arg("epochs") = 500);

    m.def("ipw_ate", &causal::ipw_ate, py::arg("outcome"), py::arg("treated"),
          py::arg("propensity"), py::arg("hajek") = false);

    m.def("regression_ate", &causal::regression_ate, py::arg("outcome"), py::arg("treated"),
          py::arg("z"));

    m.def(
        "data_subset_refuter",
        [](const std::function<double(const std::vector<std::size_t>&)>& estimate_on_rows,
           std::size_t n_rows, double fraction, int trials, std::uint64_t seed) {
            const auto r = causal::data_subset_refuter(estimate_on_rows, n_rows, fraction,
                                                       trials, seed);
            py::dict out;
            out["full_estimate"] = r.full_estimate;
            out["subset_estimates"] = r.subset_estimates;
            out["mean"] = r.mean;
            out["max_abs_deviation"] = r.max_abs_deviation;
            return out;
        },
        py::arg("estimate_on_rows"), py::arg("n_rows"), py::arg("fraction") = 0.8,
        py::arg("trials") = 10, py::arg("seed") = 0);

    m.def(
        "run_causal_analysis",
        [](const Matrix& x, const std::vector<int>& labels,
           const std::vector<std::string>& names,
           const std::vector<std::pair<std::string, std::string>>& edges,
           const py::object& queries, const py::object& options) {
            const auto ds = make_ds(x, labels, names);
            const auto dag = dag_from_edges(edges);
            std::vector<causal::CausalQuery> qs;
            for (const auto& qj : from_py(queries)) {
                causal::CausalQuery q;
                q.name = qj.at("name").get<std::string>();
                q.treatment = qj.at("treatment").get<std::string>();
                q.rule = causal::rule_from_json(qj.at("rule"));
                qs.push_back(std::move(q));
            }
            causal::CausalOptions opt;
            if (!options.is_none()) {
                const auto oj = from_py(options);
                opt.outcome = oj.value("outcome", opt.outcome);
                if (oj.contains("method"))
                    opt.method = oj.at("method").get<std::string>() == "regression"
                                     ? causal::EstimationMethod::regression
                                     : causal::EstimationMethod::ipw;
                opt.hajek = oj.value("hajek", opt.hajek);
                opt.propensity.clip = oj.value("clip", opt.propensity.clip);
                opt.refute_fraction = oj.value("refute_fraction", opt.refute_fraction);
                opt.refute_trials = oj.value("refute_trials", opt.refute_trials);
                opt.stability_tolerance =
                    oj.value("stability_tolerance", opt.stability_tolerance);
                opt.seed = oj.value("seed", opt.seed);
            }
            const auto estimates = causal::run_causal_analysis(ds, dag, qs, opt);
            py::dict out;
            out["report"] = to_py(causal::report_to_json(estimates));
            out["audit"] = to_py(causal::audit_to_json(estimates, opt));
            return out;
        },
        py::arg("x"), py::arg("labels"), py::arg("names"), py::arg("edges"),
        py::arg("queries"), py::arg("options") = py::none(),
        "Identify, estimate and refute each query; returns report and audit dicts.");

    // -- synthetic ground truth ----------------------------------------------
    m.def(
        "generate_scm",
        [](const py::object& config, std::size_t n, std::uint64_t seed) {
            const auto ds = synth::generate_scm(synth::scm_from_json(from_py(config)), n, seed);
            std::vector<std::string> names;
            for (const auto& s : ds.specs) names.push_back(s.name);
            return py::make_tuple(ds.features, ds.labels, names);
        },
        py::arg("config"), py::arg("n"), py::arg("seed") = 0,
        "Sample a structural causal model; returns (features, labels, names).");

    m.def(
        "true_ate",
        [](const py::object& config, std::size_t mc_samples, std::uint64_t mc_seed) {
            const auto t =
                synth::true_ate(synth::scm_from_json(from_py(config)), mc_samples, mc_seed);
            py::dict out;
            out["value"] = t.value;
            out["exact"] = t.exact;
            if (!t.exact) {
                out["mc_stderr"] = t.mc_stderr;
                out["mc_samples"] = t.mc_samples;
            }
            return out;
        },
        py::arg("config"), py::arg("mc_samples") = 10000000, py::arg("mc_seed") = 0x7ca1);

    m.def("canonical_confounded_scm",
          [] { return to_py(synth::scm_to_json(synth::canonical_confounded_scm())); },
          "The discrete confounded fixture with true effect exactly 0.40.");

    m.def(
        "churn_corpus_files",
        [](const py::object& config, const std::string& monthly_csv,
           const std::string& static_csv) {
            auto cfg = synth::corpus_from_json(
                config.is_none() ? nlohmann::ordered_json::object() : from_py(config));
            const auto corpus = synth::generate_churn_corpus(cfg);
            csv::write_member_csvs(corpus.records, monthly_csv, static_csv);
            std::size_t closed = 0;
            for (const auto& r : corpus.records) closed += r.account_close_month ? 1 : 0;
            py::dict out;
            out["members"] = corpus.records.size();
            out["closed"] = closed;
            out["degenerate_hazard_warning"] = corpus.degenerate_hazard_warning;
            return out;
        },
        py::arg("config"), py::arg("monthly_csv"), py::arg("static_csv"),
        "Generate the longitudinal churn corpus and write the two CSVs.");

    m.def(
        "churn_corpus_ground_truth",
        [](const py::object& config, const py::object& window) {
            auto cfg = synth::corpus_from_json(
                config.is_none() ? nlohmann::ordered_json::object() : from_py(config));
            WindowSpec w;
            w.anchor_month = 18;
            if (!window.is_none()) {
                const auto wj = from_py(window);
                w.anchor_month = wj.value("anchor_month", w.anchor_month);
                w.observation_len = wj.value("observation_len", w.observation_len);
                w.outcome_len = wj.value("outcome_len", w.outcome_len);
            }
            const auto corpus = synth::generate_churn_corpus(cfg);
            return to_py(synth::ground_truth_json(corpus, w, dataset::FilterSpec{}));
        },
        py::arg("config") = py::none(), py::arg("window") = py::none(),
        "Oracle churn probabilities and true driver effects for a corpus config.");

    // -- pipeline ------------------------------------------------------------
    m.def(
        "run_stage",
        [](const std::string& stage, const std::string& config_path,
           const std::optional<std::string>& out, const std::optional<std::uint64_t>& seed) {
            const auto cfg = pipeline::load_config(config_path, out, seed);
            const auto s = pipeline::run_stage(stage, cfg);
            py::dict result;
            result["stage"] = s.stage;
            result["lines"] = s.lines;
            std::vector<std::string> files;
            for (const auto& f : s.files) files.push_back(cfg.resolve(f));
            result["files"] = files;
            return result;
        },
        py::arg("stage"), py::arg("config"), py::arg("out") = py::none(),
        py::arg("seed") = py::none(),
        "Run one pipeline stage (synth/prepare/train/evaluate/explain/causal).");
}
