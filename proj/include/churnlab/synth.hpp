#pragma once

#include "churnlab/causal.hpp"
#include "churnlab/dataset.hpp"
#include "churnlab/types.hpp"

#include <json.hpp>

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace churnlab::synth {

/*
 * Two synthetic data sources with computable ground truth.
 *
 * The structural causal model generator validates the estimators: its true
 * average treatment effect is available exactly (enumeration or closed
 * form) or by monte carlo with a reported standard error.
 *
 * The longitudinal churn corpus validates the whole pipeline: balances
 * evolve deterministically given per-member latents, contribution stopping
 * is memoryless, and the monthly closure hazard depends only on the current
 * state, so the exact probability of closing inside an outcome window is a
 * small dynamic program. That yields a Bayes-optimal score to benchmark
 * classifiers against and exact interventional effects to benchmark the
 * causal stage against.
 */

// ---------------------------------------------------------------------------
// Structural causal model: confounders -> treatment -> outcome.

struct ConfounderSpec {
    std::string name;
    enum class Dist { bernoulli, gaussian } dist = Dist::bernoulli;
    double p = 0.5;        // bernoulli only
    double mean = 0.0;     // gaussian only
    double stddev = 1.0;   // gaussian only
};

enum class OutcomeLink { linear, logistic };

struct ScmConfig {
    std::vector<ConfounderSpec> confounders;
    // P(T=1 | z) = sigmoid(treatment_intercept + sum coeff_j z_j)
    double treatment_intercept = 0.0;
    std::map<std::string, double> treatment_coefficients;
    // eta(t, z) = outcome_intercept + treatment_effect * t
    //           + sum main_j z_j + t * sum interaction_j z_j
    // linear:   Y = eta + noise_stddev * N(0,1)
    // logistic: Y ~ Bernoulli(sigmoid(eta))
    OutcomeLink outcome_link = OutcomeLink::logistic;
    double outcome_intercept = 0.0;
    double treatment_effect = 0.0;
    std::map<std::string, double> outcome_coefficients;
    std::map<std::string, double> interaction_coefficients;
    double noise_stddev = 0.0;

    void validate() const; // coefficient names resolve, probabilities in range
};

ScmConfig scm_from_json(const nlohmann::ordered_json& j);
nlohmann::ordered_json scm_to_json(const ScmConfig& cfg);

// Columns: confounders in declared order, then "treatment", then "outcome".
// With the logistic link the labels mirror the binary outcome column.
LabeledDataset generate_scm(const ScmConfig& cfg, std::size_t n, std::uint64_t seed);

struct TrueAte {
    double value = 0.0;
    bool exact = true;          // enumeration or closed form
    double mc_stderr = 0.0;     // only when sampled
    std::size_t mc_samples = 0; // only when sampled
};

// E[Y | do(T=1)] - E[Y | do(T=0)]. Exact when all confounders are bernoulli
// (enumeration) or the link is linear (expectations pass through); monte
// carlo with n draws otherwise.
TrueAte true_ate(const ScmConfig& cfg, std::size_t mc_samples = 10000000,
                 std::uint64_t mc_seed = 0x7ca1);

// The textbook confounded fixture: Z ~ Bernoulli(0.5), P(T=1|Z) = 0.8/0.2,
// P(Y=1|T,Z) = 0.9/0.6/0.5/0.2 for (1,1)/(1,0)/(0,1)/(0,0). True effect is
// exactly 0.40 while the naive arm-mean difference is 0.58.
ScmConfig canonical_confounded_scm();

// confounder -> treatment, confounder -> outcome, treatment -> outcome.
causal::Dag scm_graph(const ScmConfig& cfg);

// ---------------------------------------------------------------------------
// Longitudinal churn corpus.

struct ChurnCorpusConfig {
    std::size_t n_members = 4000;
    int months = 30;          // simulated calendar months 0 .. months-1
    int max_open_month = 15;  // accounts open uniformly in [0, max_open_month]
    std::uint64_t seed = 1;

    // Population structure. Gender shifts the opening-balance tier; the
    // growth tier is independent of both.
    double p_female = 0.5;
    double p_high_balance_female = 0.7;
    double p_high_balance_male = 0.4;
    double p_low_growth = 0.45;

    // Balance dynamics: b_{m} = b_{m-1} * (1 + g) + contribution_m.
    double low_growth_rate = -0.010;
    double high_growth_rate = 0.010;
    double low_balance_min = 1600.0;
    double low_balance_max = 4000.0;
    double high_balance_min = 30000.0;
    double high_balance_max = 100000.0;

    // Employer contributions arrive monthly until employment stops;
    // stopping is memoryless with a tier-dependent monthly probability
    // (the low growth tier stops more often, which confounds the
    // stopped-contributions signal).
    double contribution_min = 80.0;
    double contribution_max = 300.0;
    double stop_hazard_low_growth = 0.05;
    double stop_hazard_high_growth = 0.015;

    double login_mean = 2.0; // poisson noise attribute

    // Monthly closure hazard, on the logit scale:
    //   sigmoid(intercept + stopped*coeff_stopped + low_growth*coeff_low_growth
    //           + low_balance*coeff_low_balance)
    double hazard_intercept = -4.6;
    double coeff_stopped = 1.2;
    double coeff_low_growth = 0.5;
    double coeff_low_balance = 0.6;
};

ChurnCorpusConfig corpus_from_json(const nlohmann::ordered_json& j);
nlohmann::ordered_json corpus_to_json(const ChurnCorpusConfig& cfg);

struct MemberLatents {
    bool female = false;
    bool low_growth = false;
    bool low_balance = false;
    double opening_balance = 0.0;
    double growth_rate = 0.0;
    double contribution = 0.0;
    int open_month = 0;
    int stop_month = -1; // first month without a contribution; -1 = never
                         // stopped while simulated
};

struct ChurnCorpus {
    ChurnCorpusConfig config;
    std::vector<MemberRecord> records;
    std::vector<MemberLatents> latents; // aligned with records
    bool degenerate_hazard_warning = false;
};

// Per-member substreams of the seed drive every draw, so the corpus is
// reproducible and independent of generation order. Monthly attributes:
// balance, sg_contribution, account_growth, login_count. Statics: gender
// (F/M), promotion_pref (email/mail/none).
ChurnCorpus generate_churn_corpus(const ChurnCorpusConfig& cfg);

struct DriverOverride {
    std::optional<bool> stopped;     // contribution state at the anchor
    std::optional<bool> low_growth;
    std::optional<bool> low_balance;
};

// Exact probability that the account closes inside the outcome window given
// the member's state at the anchor month (Bayes-optimal churn score).
// Overrides force drivers before evaluating.
double oracle_churn_probability(const ChurnCorpusConfig& cfg, const MemberLatents& m,
                                const WindowSpec& window,
                                const DriverOverride& override_ = {});

// Interventional churn probability for trait drivers: rolls the state
// forward from the open month under the forced latents, conditions on
// surviving to the anchor, then rolls through the outcome window.
double interventional_churn_probability(const ChurnCorpusConfig& cfg,
                                        const MemberLatents& m,
                                        const WindowSpec& window,
                                        const DriverOverride& override_);

enum class Driver { stopped_contributions, low_growth, high_balance };

// Cohort-averaged oracle effect of forcing a driver on versus off, over the
// members that pass the inclusion filters. stopped_contributions intervenes
// on the anchor state; the trait drivers intervene from the open month.
// high_balance contrasts the high tier against the low one (negative
// effect when balance protects against churn).
double true_driver_ate(const ChurnCorpus& corpus, const WindowSpec& window,
                       const dataset::FilterSpec& filter, Driver driver);

// member_id -> exact churn probability, over the filtered cohort.
std::map<std::string, double> oracle_probabilities(const ChurnCorpus& corpus,
                                                   const WindowSpec& window,
                                                   const dataset::FilterSpec& filter);

// Analyst graph over the snapshot feature names, for the causal stage.
std::string corpus_graph_text();

// Everything an end-to-end check needs: config echo, per-member oracle
// probabilities, true driver effects keyed by the standard query names.
nlohmann::ordered_json ground_truth_json(const ChurnCorpus& corpus,
                                         const WindowSpec& window,
                                         const dataset::FilterSpec& filter);

} // namespace churnlab::synth
