#pragma once

#include "churnlab/classifier.hpp"
#include "churnlab/types.hpp"

#include <json.hpp>

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace churnlab::interpret {

/*
 * Model-agnostic interpretation: partial dependence curves and permutation
 * importance, plus the shortlist that feeds candidate treatments to the
 * causal stage.
 */

struct PartialDependenceCurve {
    std::string feature;
    std::vector<double> grid;        // equally spaced min..max over the data
    std::vector<double> mean_proba;  // mean prediction with the column forced
                                     // to each grid value
    bool constant_feature = false;   // single grid point, direction "flat"
    // "increasing", "decreasing", "flat" or "mixed", from the exact signs of
    // consecutive curve differences.
    std::string direction;
};

PartialDependenceCurve partial_dependence(const Classifier& model, const Matrix& x,
                                          const std::string& feature,
                                          const std::vector<FeatureSpec>& specs,
                                          int grid_size);

nlohmann::ordered_json curve_to_json(const PartialDependenceCurve& c);

struct FeatureImportance {
    std::string feature;
    double mean_drop = 0.0;  // base metric minus permuted metric, averaged
    double stddev = 0.0;     // population std over the repeats
};

enum class ImportanceMetric { auc, accuracy };
ImportanceMetric metric_from_string(const std::string& s);
std::string metric_name(ImportanceMetric m);

// Permutes one column at a time (each repeat uses its own substream of the
// seed, so column order and repeat order do not matter) and measures the
// metric drop. Result is sorted by mean drop descending, ties in original
// column order.
std::vector<FeatureImportance> permutation_importance(const Classifier& model,
                                                      const LabeledDataset& ds,
                                                      ImportanceMetric metric,
                                                      int n_repeats, std::uint64_t seed);

nlohmann::ordered_json importances_to_json(const std::vector<FeatureImportance>& imps,
                                           ImportanceMetric metric);

struct ShortlistEntry {
    std::string feature;
    double importance = 0.0;
    std::string direction; // from the feature's partial dependence curve
};

struct Shortlist {
    std::vector<ShortlistEntry> entries;
    bool truncated = false; // top_k exceeded the available feature count
};

// Top_k most important features joined with their curve directions. Features
// without a supplied curve get direction "unknown".
Shortlist shortlist_drivers(const std::vector<FeatureImportance>& importances,
                            const std::map<std::string, PartialDependenceCurve>& curves,
                            std::size_t top_k);

// suggested_queries in this JSON matches the causal stage's query schema.
nlohmann::ordered_json shortlist_to_json(const Shortlist& s);

} // namespace churnlab::interpret
