#pragma once

#include "churnlab/types.hpp"

#include <json.hpp>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace churnlab::preprocess {

/*
 * Train-fit transforms and class rebalancing.
 *
 * Fit on the training rows, apply everywhere. Both the scaler and the
 * encoder round-trip through JSON so a prepared dataset can be reproduced
 * from its sidecar files.
 */

struct ScalerParams {
    std::vector<std::string> names;   // column alignment check on apply
    Vector mean;
    Vector stddev;                    // population std; 0 marks a constant column
};

// Population standard deviation (divide by n). Constant columns keep
// stddev 0 and pass through apply unchanged apart from centering.
ScalerParams standardize_fit(const Matrix& x, const std::vector<FeatureSpec>& specs);
Matrix standardize_apply(const Matrix& x, const ScalerParams& p);
Matrix standardize_invert(const Matrix& z, const ScalerParams& p);

nlohmann::ordered_json scaler_to_json(const ScalerParams& p);
ScalerParams scaler_from_json(const nlohmann::ordered_json& j);

// Standardizes numeric columns in place, leaves nominal columns alone.
ScalerParams standardize_numeric_fit(const LabeledDataset& ds);
LabeledDataset standardize_numeric_apply(const LabeledDataset& ds, const ScalerParams& p);

// One-hot expansion of nominal columns, categories in dictionary order.
// Derived columns are named "<feature>=<category>". Fit learns the columns
// to expand; apply rejects category codes the fit never saw.
struct OneHotColumn {
    std::string name;
    std::vector<std::string> categories;
};
struct OneHotEncoder {
    std::vector<OneHotColumn> columns; // order of appearance in the fit specs
};

OneHotEncoder one_hot_fit(const LabeledDataset& ds);
LabeledDataset one_hot_apply(const LabeledDataset& ds, const OneHotEncoder& enc);

nlohmann::ordered_json encoder_to_json(const OneHotEncoder& enc);
OneHotEncoder encoder_from_json(const nlohmann::ordered_json& j);

// Synthetic minority oversampling. New samples interpolate between a
// minority row and one of its k nearest minority neighbours:
//   s = x + u * (x_nn - x), u uniform in [0, 1).
// Base rows are visited round-robin; each synthetic sample draws from its
// own substream of `seed`, so the result is independent of evaluation
// order. Original rows are preserved untouched, synthetic rows append at
// the end with member ids "smote_<i>".
struct SmoteConfig {
    int k_neighbors = 5;
    // Minority class size to reach; defaults to matching the majority.
    std::optional<std::size_t> target_minority_count;
    std::uint64_t seed = 0;
};

LabeledDataset smote(const LabeledDataset& ds, const SmoteConfig& cfg);

// Pearson correlation of two equal-length vectors. Either side constant
// is an error (use correlation_pairs to screen constants out).
double pearson(const Vector& x, const Vector& y);

struct CorrelationPair {
    std::string feature_a;
    std::string feature_b;
    double r = 0.0;
};
struct CorrelationReport {
    std::vector<CorrelationPair> pairs;           // |r| >= threshold, sorted by
                                                  // |r| descending, then column order
    std::vector<std::string> constant_features;   // skipped columns
};

CorrelationReport correlation_pairs(const Matrix& x,
                                    const std::vector<FeatureSpec>& specs,
                                    double threshold);

} // namespace churnlab::preprocess
