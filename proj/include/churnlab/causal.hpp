#pragma once

#include "churnlab/types.hpp"

#include <json.hpp>

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace churnlab::causal {

/*
 * Observational effect estimation on a user-declared DAG.
 *
 * The workflow mirrors the four-step recipe: model (parse the graph),
 * identify (enumerate minimal backdoor adjustment sets), estimate (inverse
 * propensity weighting or an outcome regression), refute (re-estimate on
 * random row subsets and compare).
 */

struct Dag {
    std::vector<std::string> nodes;          // sorted, unique
    std::vector<std::vector<int>> parents;   // by node index
    std::vector<std::vector<int>> children;
    std::vector<std::pair<int, int>> edges;  // deduplicated, sorted

    int index_of(const std::string& name) const; // -1 when absent
};

// Builds and validates a DAG from (from, to) name pairs. A cycle raises an
// error that spells out one offending walk, e.g. "a -> b -> a".
Dag make_dag(const std::vector<std::pair<std::string, std::string>>& edges);

// Text format: one "from -> to" per line; blank lines and '#' comments ok.
Dag parse_graph(const std::string& text);
std::string format_graph(const Dag& dag);
std::string format_dot(const Dag& dag);

// Strict descendants (excluding the node itself).
std::vector<std::string> descendants(const Dag& dag, const std::string& node);

// True when every trail between x and y is blocked given conditioning set z,
// decided by the standard reachability sweep over (node, direction) states.
// Endpoints inside z count as blocked.
bool d_separated(const Dag& dag, const std::string& x, const std::string& y,
                 const std::vector<std::string>& z);

// All minimal-by-inclusion backdoor adjustment sets for (treatment ->
// outcome): subsets of non-descendants of the treatment that d-separate
// treatment from outcome once the treatment's outgoing edges are removed.
// Sets are sorted internally; the list is sorted by size, then
// lexicographically. Empty list: no admissible set. A list holding one
// empty set: no adjustment needed. Exhaustive subset enumeration; refuses
// graphs with more than 22 candidate nodes.
std::vector<std::vector<std::string>> backdoor_sets(const Dag& dag,
                                                    const std::string& treatment,
                                                    const std::string& outcome);

struct BinarizeRule {
    enum class Kind { threshold, median };
    Kind kind = Kind::threshold;
    double value = 0.0; // threshold kind only
    // Default: treated = value strictly above the cutpoint. invert flips
    // that, for treatments phrased as "low_<feature>".
    bool invert = false;
};

BinarizeRule rule_from_json(const nlohmann::ordered_json& j);
nlohmann::ordered_json rule_to_json(const BinarizeRule& r);

// Midpoint median (mean of the two central order statistics for even n).
double median(const Vector& x);

struct Binarized {
    std::vector<int> treated;
    double cutpoint = 0.0;
};

// Throws when the rule puts every row on one side.
Binarized binarize(const Vector& x, const BinarizeRule& rule);

struct PropensityConfig {
    double learning_rate = 0.5;
    int epochs = 500;
    double clip = 0.01; // scores clamped to [clip, 1 - clip]
};

// Logistic regression of the treatment on the adjustment columns
// (standardized internally for the fit), scores clipped away from 0 and 1.
Vector fit_propensity(const Matrix& z, const std::vector<int>& treated,
                      const PropensityConfig& cfg = {});

// Inverse propensity weighted mean difference. Horvitz-Thompson by default;
// hajek normalises each arm by its realised weight mass instead of n.
double ipw_ate(const Vector& outcome, const std::vector<int>& treated,
               const Vector& propensity, bool hajek = false);

// Coefficient of the treatment column in a ridge-stabilised OLS of the
// outcome on [1, treatment, adjustment columns].
double regression_ate(const Vector& outcome, const std::vector<int>& treated,
                      const Matrix& z);

struct RefuterResult {
    double full_estimate = 0.0;
    std::vector<double> subset_estimates;
    double mean = 0.0;
    double max_abs_deviation = 0.0; // of subset estimates around the full one
};

// Re-runs an estimator on `trials` random row subsets of the given fraction
// (sampled without replacement, indices sorted ascending, so fraction 1
// reproduces the full estimate bit for bit).
RefuterResult data_subset_refuter(
    const std::function<double(const std::vector<std::size_t>&)>& estimate_on_rows,
    std::size_t n_rows, double fraction, int trials, std::uint64_t seed);

struct CausalQuery {
    std::string name;       // report label, e.g. "high_sg_recency"
    std::string treatment;  // feature column and graph node
    BinarizeRule rule;
};

enum class EstimationMethod { ipw, regression };

struct CausalOptions {
    std::string outcome = "churn";
    EstimationMethod method = EstimationMethod::ipw;
    PropensityConfig propensity;
    bool hajek = false;
    double refute_fraction = 0.8;
    int refute_trials = 10;
    double stability_tolerance = 0.02; // |refuter mean - estimate| above this
                                       // flags the estimate unstable
    std::uint64_t seed = 0;
};

struct CausalEstimate {
    std::string name;
    std::string treatment;
    std::string status; // "ok", "not_identified" or "failed: <reason>"
    std::vector<std::string> adjustment_set;
    double cutpoint = 0.0;
    double ate = 0.0;
    double refuter_mean = 0.0;
    double refuter_max_deviation = 0.0;
    bool stable = false;
    std::string interpretation;
};

// Effect magnitudes read as percentage-point shifts in churn probability:
// "increased the probability of churn by ~15%". A magnitude that rounds to
// zero reads "~0%" with no direction claim.
std::string interpret_ate(double ate);

// Runs every query against the snapshot: pick the first minimal backdoor
// set whose variables are all observable data columns, binarize the
// treatment, estimate, refute. Per-query failures land in `status` without
// aborting the rest. The outcome is the column named in the options, or the
// label vector when no such column exists.
std::vector<CausalEstimate> run_causal_analysis(const LabeledDataset& snapshot,
                                                const Dag& dag,
                                                const std::vector<CausalQuery>& queries,
                                                const CausalOptions& options);

// Report rows keyed causal_variable / estimate_effect / data_subset_refuter
// / probability_of_churn.
nlohmann::ordered_json report_to_json(const std::vector<CausalEstimate>& estimates);

// Full audit trail: options, adjustment sets, cutpoints, refuter spread.
nlohmann::ordered_json audit_to_json(const std::vector<CausalEstimate>& estimates,
                                     const CausalOptions& options);

} // namespace churnlab::causal
