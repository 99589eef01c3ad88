#include "churnlab/interpret.hpp"

#include "churnlab/metrics.hpp"
#include "churnlab/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace churnlab::interpret {

namespace {

int require_column(const std::vector<FeatureSpec>& specs, const std::string& feature) {
    for (std::size_t j = 0; j < specs.size(); ++j) {
        if (specs[j].name == feature) return static_cast<int>(j);
    }
    throw std::invalid_argument("no such feature: " + feature);
}

std::string direction_of(const std::vector<double>& curve) {
    bool up = false, down = false;
    for (std::size_t i = 1; i < curve.size(); ++i) {
        if (curve[i] > curve[i - 1]) up = true;
        else if (curve[i] < curve[i - 1]) down = true;
    }
    if (up && down) return "mixed";
    if (up) return "increasing";
    if (down) return "decreasing";
    return "flat";
}

} // namespace

PartialDependenceCurve partial_dependence(const Classifier& model, const Matrix& x,
                                          const std::string& feature,
                                          const std::vector<FeatureSpec>& specs,
                                          int grid_size) {
    if (grid_size < 2) throw std::invalid_argument("grid_size must be at least 2");
    if (x.rows() == 0) throw std::invalid_argument("empty dataset");
    const int j = require_column(specs, feature);

    PartialDependenceCurve c;
    c.feature = feature;
    const double lo = x.col(j).minCoeff();
    const double hi = x.col(j).maxCoeff();
    if (lo == hi) {
        c.constant_feature = true;
        c.grid = {lo};
    } else {
        c.grid.resize(static_cast<std::size_t>(grid_size));
        for (int g = 0; g < grid_size; ++g)
            c.grid[static_cast<std::size_t>(g)] =
                lo + (hi - lo) * static_cast<double>(g) / static_cast<double>(grid_size - 1);
    }

    Matrix work = x;
    c.mean_proba.reserve(c.grid.size());
    for (double v : c.grid) {
        work.col(j).setConstant(v);
        c.mean_proba.push_back(model.predict_proba(work).mean());
    }
    c.direction = direction_of(c.mean_proba);
    return c;
}

nlohmann::ordered_json curve_to_json(const PartialDependenceCurve& c) {
    nlohmann::ordered_json j;
    j["feature"] = c.feature;
    j["grid"] = c.grid;
    j["mean_proba"] = c.mean_proba;
    j["direction"] = c.direction;
    if (c.constant_feature) j["constant_feature"] = true;
    return j;
}

ImportanceMetric metric_from_string(const std::string& s) {
    if (s == "auc") return ImportanceMetric::auc;
    if (s == "accuracy") return ImportanceMetric::accuracy;
    throw std::invalid_argument("unknown importance metric: " + s);
}

std::string metric_name(ImportanceMetric m) {
    return m == ImportanceMetric::auc ? "auc" : "accuracy";
}

std::vector<FeatureImportance> permutation_importance(const Classifier& model,
                                                      const LabeledDataset& ds,
                                                      ImportanceMetric metric,
                                                      int n_repeats, std::uint64_t seed) {
    ds.validate();
    if (n_repeats < 1) throw std::invalid_argument("n_repeats must be positive");

    const auto score = [&](const Matrix& x) {
        const Vector p = model.predict_proba(x);
        if (metric == ImportanceMetric::auc) return metrics::auc(p, ds.labels);
        std::vector<int> preds(ds.labels.size());
        for (std::size_t i = 0; i < ds.labels.size(); ++i)
            preds[i] = p[static_cast<Eigen::Index>(i)] > 0.5 ? 1 : 0;
        return metrics::accuracy(metrics::confusion(ds.labels, preds));
    };
    const double base = score(ds.features);

    const auto n = static_cast<std::size_t>(ds.rows());
    std::vector<FeatureImportance> out;
    out.reserve(ds.specs.size());

    for (std::size_t j = 0; j < ds.specs.size(); ++j) {
        std::vector<double> drops;
        drops.reserve(static_cast<std::size_t>(n_repeats));
        Matrix work = ds.features;
        for (int r = 0; r < n_repeats; ++r) {
            std::vector<std::size_t> perm(n);
            std::iota(perm.begin(), perm.end(), std::size_t{0});
            Rng rng(derive_seed(derive_seed(seed, j), static_cast<std::uint64_t>(r)));
            rng.shuffle(perm.begin(), perm.end());
            for (std::size_t i = 0; i < n; ++i)
                work(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
                    ds.features(static_cast<Eigen::Index>(perm[i]),
                                static_cast<Eigen::Index>(j));
            drops.push_back(base - score(work));
        }
        FeatureImportance fi;
        fi.feature = ds.specs[j].name;
        fi.mean_drop = std::accumulate(drops.begin(), drops.end(), 0.0) /
                       static_cast<double>(drops.size());
        double var = 0.0;
        for (double d : drops) var += (d - fi.mean_drop) * (d - fi.mean_drop);
        fi.stddev = std::sqrt(var / static_cast<double>(drops.size()));
        out.push_back(std::move(fi));
    }

    std::vector<std::size_t> order(out.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return out[a].mean_drop > out[b].mean_drop;
    });
    std::vector<FeatureImportance> sorted;
    sorted.reserve(out.size());
    for (std::size_t idx : order) sorted.push_back(out[idx]);
    return sorted;
}

nlohmann::ordered_json importances_to_json(const std::vector<FeatureImportance>& imps,
                                           ImportanceMetric metric) {
    nlohmann::ordered_json j;
    j["metric"] = metric_name(metric);
    j["features"] = nlohmann::ordered_json::array();
    for (const auto& fi : imps) {
        nlohmann::ordered_json e;
        e["feature"] = fi.feature;
        e["mean_drop"] = fi.mean_drop;
        e["stddev"] = fi.stddev;
        j["features"].push_back(e);
    }
    return j;
}

Shortlist shortlist_drivers(const std::vector<FeatureImportance>& importances,
                            const std::map<std::string, PartialDependenceCurve>& curves,
                            std::size_t top_k) {
    Shortlist s;
    if (top_k > importances.size()) {
        s.truncated = true;
        top_k = importances.size();
    }
    for (std::size_t i = 0; i < top_k; ++i) {
        ShortlistEntry e;
        e.feature = importances[i].feature;
        e.importance = importances[i].mean_drop;
        const auto it = curves.find(e.feature);
        e.direction = it == curves.end() ? "unknown" : it->second.direction;
        s.entries.push_back(std::move(e));
    }
    return s;
}

nlohmann::ordered_json shortlist_to_json(const Shortlist& s) {
    nlohmann::ordered_json j;
    j["drivers"] = nlohmann::ordered_json::array();
    for (const auto& e : s.entries) {
        nlohmann::ordered_json d;
        d["feature"] = e.feature;
        d["importance"] = e.importance;
        d["direction"] = e.direction;
        j["drivers"].push_back(d);
    }
    if (s.truncated) j["truncated"] = true;
    // Ready-made treatment queries for the causal stage: median cutpoint,
    // inverted when the curve slopes down so the treated arm is the risky one.
    j["suggested_queries"] = nlohmann::ordered_json::array();
    for (const auto& e : s.entries) {
        nlohmann::ordered_json q;
        const bool invert = e.direction == "decreasing";
        q["name"] = (invert ? "low_" : "high_") + e.feature;
        q["treatment"] = e.feature;
        q["rule"] = {{"kind", "median"}, {"invert", invert}};
        j["suggested_queries"].push_back(q);
    }
    return j;
}

} // namespace churnlab::interpret
