#include "churnlab/synth.hpp"

#include "churnlab/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace churnlab::synth {

namespace {

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }
double logit(double p) { return std::log(p / (1.0 - p)); }

double coeff_or_zero(const std::map<std::string, double>& coeffs, const std::string& name) {
    const auto it = coeffs.find(name);
    return it == coeffs.end() ? 0.0 : it->second;
}

void check_names(const std::map<std::string, double>& coeffs,
                 const std::vector<ConfounderSpec>& confounders, const std::string& what) {
    for (const auto& [name, value] : coeffs) {
        (void)value;
        const bool known = std::any_of(confounders.begin(), confounders.end(),
                                       [&](const ConfounderSpec& c) { return c.name == name; });
        if (!known)
            throw std::invalid_argument(what + " references unknown confounder: " + name);
    }
}

} // namespace

void ScmConfig::validate() const {
    std::vector<std::string> seen;
    for (const auto& c : confounders) {
        if (c.name.empty()) throw std::invalid_argument("confounder with empty name");
        if (c.name == "treatment" || c.name == "outcome")
            throw std::invalid_argument("confounder name collides with " + c.name);
        if (std::find(seen.begin(), seen.end(), c.name) != seen.end())
            throw std::invalid_argument("duplicate confounder name: " + c.name);
        seen.push_back(c.name);
        if (c.dist == ConfounderSpec::Dist::bernoulli && !(c.p >= 0.0 && c.p <= 1.0))
            throw std::invalid_argument("bernoulli p out of range for " + c.name);
        if (c.dist == ConfounderSpec::Dist::gaussian && !(c.stddev >= 0.0))
            throw std::invalid_argument("negative stddev for " + c.name);
    }
    check_names(treatment_coefficients, confounders, "treatment model");
    check_names(outcome_coefficients, confounders, "outcome model");
    check_names(interaction_coefficients, confounders, "interaction model");
    if (noise_stddev < 0.0) throw std::invalid_argument("negative noise stddev");
    if (outcome_link == OutcomeLink::logistic && noise_stddev != 0.0)
        throw std::invalid_argument("noise_stddev applies to the linear link only");
}

ScmConfig scm_from_json(const nlohmann::ordered_json& j) {
    ScmConfig cfg;
    for (const auto& cj : j.at("confounders")) {
        ConfounderSpec c;
        c.name = cj.at("name").get<std::string>();
        const std::string dist = cj.value("dist", std::string("bernoulli"));
        if (dist == "bernoulli") {
            c.dist = ConfounderSpec::Dist::bernoulli;
            c.p = cj.at("p").get<double>();
        } else if (dist == "gaussian") {
            c.dist = ConfounderSpec::Dist::gaussian;
            c.mean = cj.value("mean", 0.0);
            c.stddev = cj.value("stddev", 1.0);
        } else {
            throw std::invalid_argument("unknown confounder dist: " + dist);
        }
        cfg.confounders.push_back(std::move(c));
    }
    cfg.treatment_intercept = j.value("treatment_intercept", 0.0);
    if (j.contains("treatment_coefficients"))
        cfg.treatment_coefficients =
            j.at("treatment_coefficients").get<std::map<std::string, double>>();
    const std::string link = j.value("outcome_link", std::string("logistic"));
    if (link == "linear") cfg.outcome_link = OutcomeLink::linear;
    else if (link == "logistic") cfg.outcome_link = OutcomeLink::logistic;
    else throw std::invalid_argument("unknown outcome link: " + link);
    cfg.outcome_intercept = j.value("outcome_intercept", 0.0);
    cfg.treatment_effect = j.value("treatment_effect", 0.0);
    if (j.contains("outcome_coefficients"))
        cfg.outcome_coefficients =
            j.at("outcome_coefficients").get<std::map<std::string, double>>();
    if (j.contains("interaction_coefficients"))
        cfg.interaction_coefficients =
            j.at("interaction_coefficients").get<std::map<std::string, double>>();
    cfg.noise_stddev = j.value("noise_stddev", 0.0);
    cfg.validate();
    return cfg;
}

nlohmann::ordered_json scm_to_json(const ScmConfig& cfg) {
    nlohmann::ordered_json j;
    j["confounders"] = nlohmann::ordered_json::array();
    for (const auto& c : cfg.confounders) {
        nlohmann::ordered_json cj;
        cj["name"] = c.name;
        if (c.dist == ConfounderSpec::Dist::bernoulli) {
            cj["dist"] = "bernoulli";
            cj["p"] = c.p;
        } else {
            cj["dist"] = "gaussian";
            cj["mean"] = c.mean;
            cj["stddev"] = c.stddev;
        }
        j["confounders"].push_back(cj);
    }
    j["treatment_intercept"] = cfg.treatment_intercept;
    j["treatment_coefficients"] = cfg.treatment_coefficients;
    j["outcome_link"] = cfg.outcome_link == OutcomeLink::linear ? "linear" : "logistic";
    j["outcome_intercept"] = cfg.outcome_intercept;
    j["treatment_effect"] = cfg.treatment_effect;
    j["outcome_coefficients"] = cfg.outcome_coefficients;
    j["interaction_coefficients"] = cfg.interaction_coefficients;
    j["noise_stddev"] = cfg.noise_stddev;
    return j;
}

namespace {

double outcome_eta(const ScmConfig& cfg, int t, const std::vector<double>& z) {
    double eta = cfg.outcome_intercept + cfg.treatment_effect * t;
    for (std::size_t i = 0; i < cfg.confounders.size(); ++i) {
        const auto& name = cfg.confounders[i].name;
        eta += coeff_or_zero(cfg.outcome_coefficients, name) * z[i];
        if (t == 1) eta += coeff_or_zero(cfg.interaction_coefficients, name) * z[i];
    }
    return eta;
}

double treatment_eta(const ScmConfig& cfg, const std::vector<double>& z) {
    double eta = cfg.treatment_intercept;
    for (std::size_t i = 0; i < cfg.confounders.size(); ++i)
        eta += coeff_or_zero(cfg.treatment_coefficients, cfg.confounders[i].name) * z[i];
    return eta;
}

} // namespace

LabeledDataset generate_scm(const ScmConfig& cfg, std::size_t n, std::uint64_t seed) {
    cfg.validate();
    if (n == 0) throw std::invalid_argument("n must be positive");
    const std::size_t d = cfg.confounders.size();

    LabeledDataset ds;
    for (const auto& c : cfg.confounders)
        ds.specs.push_back({c.name, FeatureKind::numeric, {}});
    ds.specs.push_back({"treatment", FeatureKind::numeric, {}});
    ds.specs.push_back({"outcome", FeatureKind::numeric, {}});
    ds.features.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d + 2));
    ds.labels.assign(n, 0);
    ds.member_ids.reserve(n);

    std::vector<double> z(d);
    for (std::size_t i = 0; i < n; ++i) {
        Rng rng(derive_seed(seed, i));
        for (std::size_t k = 0; k < d; ++k) {
            const auto& c = cfg.confounders[k];
            z[k] = c.dist == ConfounderSpec::Dist::bernoulli
                       ? (rng.bernoulli(c.p) ? 1.0 : 0.0)
                       : c.mean + c.stddev * rng.gaussian();
            ds.features(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = z[k];
        }
        const int t = rng.bernoulli(sigmoid(treatment_eta(cfg, z))) ? 1 : 0;
        ds.features(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(d)) = t;
        const double eta = outcome_eta(cfg, t, z);
        double y;
        if (cfg.outcome_link == OutcomeLink::linear) {
            y = eta + cfg.noise_stddev * rng.gaussian();
        } else {
            y = rng.bernoulli(sigmoid(eta)) ? 1.0 : 0.0;
            ds.labels[i] = static_cast<int>(y);
        }
        ds.features(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(d + 1)) = y;
        ds.member_ids.push_back("scm_" + std::to_string(i));
    }
    ds.validate();
    return ds;
}

TrueAte true_ate(const ScmConfig& cfg, std::size_t mc_samples, std::uint64_t mc_seed) {
    cfg.validate();
    TrueAte result;

    const bool all_bernoulli =
        std::all_of(cfg.confounders.begin(), cfg.confounders.end(),
                    [](const ConfounderSpec& c) {
                        return c.dist == ConfounderSpec::Dist::bernoulli;
                    });

    if (cfg.outcome_link == OutcomeLink::linear) {
        // Expectations pass through the linear response: the effect is the
        // treatment coefficient plus the interaction terms at the
        // confounder means.
        double ate = cfg.treatment_effect;
        for (const auto& c : cfg.confounders) {
            const double mean = c.dist == ConfounderSpec::Dist::bernoulli ? c.p : c.mean;
            ate += coeff_or_zero(cfg.interaction_coefficients, c.name) * mean;
        }
        result.value = ate;
        return result;
    }

    if (all_bernoulli) {
        const std::size_t d = cfg.confounders.size();
        if (d > 24) throw std::invalid_argument("too many confounders to enumerate");
        double ate = 0.0;
        std::vector<double> z(d);
        for (std::size_t mask = 0; mask < (std::size_t{1} << d); ++mask) {
            double pz = 1.0;
            for (std::size_t k = 0; k < d; ++k) {
                const bool on = (mask >> k) & 1u;
                z[k] = on ? 1.0 : 0.0;
                pz *= on ? cfg.confounders[k].p : 1.0 - cfg.confounders[k].p;
            }
            ate += pz * (sigmoid(outcome_eta(cfg, 1, z)) - sigmoid(outcome_eta(cfg, 0, z)));
        }
        result.value = ate;
        return result;
    }

    // Monte carlo over the confounder distribution.
    if (mc_samples == 0) throw std::invalid_argument("mc_samples must be positive");
    Rng rng(mc_seed);
    const std::size_t d = cfg.confounders.size();
    std::vector<double> z(d);
    double sum = 0.0, sum_sq = 0.0;
    for (std::size_t s = 0; s < mc_samples; ++s) {
        for (std::size_t k = 0; k < d; ++k) {
            const auto& c = cfg.confounders[k];
            z[k] = c.dist == ConfounderSpec::Dist::bernoulli
                       ? (rng.bernoulli(c.p) ? 1.0 : 0.0)
                       : c.mean + c.stddev * rng.gaussian();
        }
        const double diff =
            sigmoid(outcome_eta(cfg, 1, z)) - sigmoid(outcome_eta(cfg, 0, z));
        sum += diff;
        sum_sq += diff * diff;
    }
    const double n = static_cast<double>(mc_samples);
    result.value = sum / n;
    result.exact = false;
    result.mc_samples = mc_samples;
    const double var = std::max(0.0, sum_sq / n - result.value * result.value);
    result.mc_stderr = std::sqrt(var / n);
    return result;
}

ScmConfig canonical_confounded_scm() {
    ScmConfig cfg;
    cfg.confounders.push_back({"z", ConfounderSpec::Dist::bernoulli, 0.5, 0.0, 1.0});
    cfg.treatment_intercept = logit(0.2);
    cfg.treatment_coefficients["z"] = logit(0.8) - logit(0.2);
    cfg.outcome_link = OutcomeLink::logistic;
    cfg.outcome_intercept = logit(0.2);
    cfg.treatment_effect = logit(0.6) - logit(0.2);
    cfg.outcome_coefficients["z"] = logit(0.5) - logit(0.2);
    cfg.interaction_coefficients["z"] =
        logit(0.9) - logit(0.5) - (logit(0.6) - logit(0.2));
    return cfg;
}

causal::Dag scm_graph(const ScmConfig& cfg) {
    std::vector<std::pair<std::string, std::string>> edges;
    edges.emplace_back("treatment", "outcome");
    for (const auto& c : cfg.confounders) {
        edges.emplace_back(c.name, "treatment");
        edges.emplace_back(c.name, "outcome");
    }
    return causal::make_dag(edges);
}

// ---------------------------------------------------------------------------
// Churn corpus.

ChurnCorpusConfig corpus_from_json(const nlohmann::ordered_json& j) {
    ChurnCorpusConfig c;
    const auto get = [&](const char* key, auto member) {
        using T = std::decay_t<decltype(c.*member)>;
        if (j.contains(key)) c.*member = j.at(key).get<T>();
    };
    get("n_members", &ChurnCorpusConfig::n_members);
    get("months", &ChurnCorpusConfig::months);
    get("max_open_month", &ChurnCorpusConfig::max_open_month);
    get("seed", &ChurnCorpusConfig::seed);
    get("p_female", &ChurnCorpusConfig::p_female);
    get("p_high_balance_female", &ChurnCorpusConfig::p_high_balance_female);
    get("p_high_balance_male", &ChurnCorpusConfig::p_high_balance_male);
    get("p_low_growth", &ChurnCorpusConfig::p_low_growth);
    get("low_growth_rate", &ChurnCorpusConfig::low_growth_rate);
    get("high_growth_rate", &ChurnCorpusConfig::high_growth_rate);
    get("low_balance_min", &ChurnCorpusConfig::low_balance_min);
    get("low_balance_max", &ChurnCorpusConfig::low_balance_max);
    get("high_balance_min", &ChurnCorpusConfig::high_balance_min);
    get("high_balance_max", &ChurnCorpusConfig::high_balance_max);
    get("contribution_min", &ChurnCorpusConfig::contribution_min);
    get("contribution_max", &ChurnCorpusConfig::contribution_max);
    get("stop_hazard_low_growth", &ChurnCorpusConfig::stop_hazard_low_growth);
    get("stop_hazard_high_growth", &ChurnCorpusConfig::stop_hazard_high_growth);
    get("login_mean", &ChurnCorpusConfig::login_mean);
    get("hazard_intercept", &ChurnCorpusConfig::hazard_intercept);
    get("coeff_stopped", &ChurnCorpusConfig::coeff_stopped);
    get("coeff_low_growth", &ChurnCorpusConfig::coeff_low_growth);
    get("coeff_low_balance", &ChurnCorpusConfig::coeff_low_balance);
    return c;
}

nlohmann::ordered_json corpus_to_json(const ChurnCorpusConfig& c) {
    nlohmann::ordered_json j;
    j["n_members"] = c.n_members;
    j["months"] = c.months;
    j["max_open_month"] = c.max_open_month;
    j["seed"] = c.seed;
    j["p_female"] = c.p_female;
    j["p_high_balance_female"] = c.p_high_balance_female;
    j["p_high_balance_male"] = c.p_high_balance_male;
    j["p_low_growth"] = c.p_low_growth;
    j["low_growth_rate"] = c.low_growth_rate;
    j["high_growth_rate"] = c.high_growth_rate;
    j["low_balance_min"] = c.low_balance_min;
    j["low_balance_max"] = c.low_balance_max;
    j["high_balance_min"] = c.high_balance_min;
    j["high_balance_max"] = c.high_balance_max;
    j["contribution_min"] = c.contribution_min;
    j["contribution_max"] = c.contribution_max;
    j["stop_hazard_low_growth"] = c.stop_hazard_low_growth;
    j["stop_hazard_high_growth"] = c.stop_hazard_high_growth;
    j["login_mean"] = c.login_mean;
    j["hazard_intercept"] = c.hazard_intercept;
    j["coeff_stopped"] = c.coeff_stopped;
    j["coeff_low_growth"] = c.coeff_low_growth;
    j["coeff_low_balance"] = c.coeff_low_balance;
    return j;
}

namespace {

double close_hazard(const ChurnCorpusConfig& cfg, bool stopped, bool low_growth,
                    bool low_balance) {
    return sigmoid(cfg.hazard_intercept + (stopped ? cfg.coeff_stopped : 0.0) +
                   (low_growth ? cfg.coeff_low_growth : 0.0) +
                   (low_balance ? cfg.coeff_low_balance : 0.0));
}

double stop_hazard(const ChurnCorpusConfig& cfg, bool low_growth) {
    return low_growth ? cfg.stop_hazard_low_growth : cfg.stop_hazard_high_growth;
}

// Rolls the two-state (employed / stopped) survival process over months
// [from, to], applying the stop transition before the closure draw, exactly
// as the simulator does. Input masses may be unnormalised.
struct SurvivalState {
    double p_closed = 0.0;
    double employed = 0.0;
    double stopped = 0.0;
};

SurvivalState roll_hazard(const ChurnCorpusConfig& cfg, bool low_growth, bool low_balance,
                          double mass_employed, double mass_stopped, int from, int to) {
    const double q = stop_hazard(cfg, low_growth);
    const double h_emp = close_hazard(cfg, false, low_growth, low_balance);
    const double h_stop = close_hazard(cfg, true, low_growth, low_balance);
    SurvivalState s{0.0, mass_employed, mass_stopped};
    for (int m = from; m <= to; ++m) {
        const double newly_stopped = s.employed * q;
        const double still_employed = s.employed - newly_stopped;
        const double stopped_total = s.stopped + newly_stopped;
        s.p_closed += still_employed * h_emp + stopped_total * h_stop;
        s.employed = still_employed * (1.0 - h_emp);
        s.stopped = stopped_total * (1.0 - h_stop);
    }
    return s;
}

} // namespace

ChurnCorpus generate_churn_corpus(const ChurnCorpusConfig& cfg) {
    if (cfg.n_members == 0) throw std::invalid_argument("n_members must be positive");
    if (cfg.months < 2) throw std::invalid_argument("months must be at least 2");
    if (cfg.max_open_month < 0 || cfg.max_open_month >= cfg.months)
        throw std::invalid_argument("max_open_month must lie in [0, months)");

    ChurnCorpus corpus;
    corpus.config = cfg;
    corpus.records.reserve(cfg.n_members);
    corpus.latents.reserve(cfg.n_members);

    static const char* kPromotions[] = {"email", "mail", "none"};

    for (std::size_t i = 0; i < cfg.n_members; ++i) {
        Rng rng(derive_seed(cfg.seed, i));
        MemberLatents m;
        m.female = rng.bernoulli(cfg.p_female);
        const double p_high =
            m.female ? cfg.p_high_balance_female : cfg.p_high_balance_male;
        m.low_balance = !rng.bernoulli(p_high);
        m.opening_balance = m.low_balance
                                ? rng.uniform(cfg.low_balance_min, cfg.low_balance_max)
                                : rng.uniform(cfg.high_balance_min, cfg.high_balance_max);
        m.low_growth = rng.bernoulli(cfg.p_low_growth);
        m.growth_rate = m.low_growth ? cfg.low_growth_rate : cfg.high_growth_rate;
        m.contribution = rng.uniform(cfg.contribution_min, cfg.contribution_max);
        m.open_month = static_cast<int>(
            rng.below(static_cast<std::uint64_t>(cfg.max_open_month) + 1));

        MemberRecord r;
        r.member_id = "m" + std::to_string(i);
        r.account_open_month = m.open_month;
        r.static_attributes["gender"] = m.female ? "F" : "M";
        r.static_attributes["promotion_pref"] = kPromotions[rng.below(3)];

        const double q = stop_hazard(cfg, m.low_growth);
        bool employed = true;
        double balance = m.opening_balance;

        // Opening month: contribution arrives, no closure draw yet.
        auto record_month = [&](int month, double contribution_amount) {
            auto& attrs = r.monthly_attributes[month];
            attrs["balance"] = balance;
            attrs["sg_contribution"] = contribution_amount;
            attrs["account_growth"] = m.growth_rate;
            attrs["login_count"] = static_cast<double>(rng.poisson(cfg.login_mean));
        };
        record_month(m.open_month, m.contribution);

        for (int month = m.open_month + 1; month < cfg.months; ++month) {
            if (employed && rng.bernoulli(q)) {
                employed = false;
                m.stop_month = month;
            }
            const double contribution_amount = employed ? m.contribution : 0.0;
            balance = balance * (1.0 + m.growth_rate) + contribution_amount;
            record_month(month, contribution_amount);
            const double h =
                close_hazard(cfg, !employed, m.low_growth, m.low_balance);
            if (rng.bernoulli(h)) {
                r.account_close_month = month;
                break;
            }
        }

        corpus.records.push_back(std::move(r));
        corpus.latents.push_back(m);
    }

    // Degeneracy check on the realised closures.
    std::size_t closed = 0;
    for (const auto& r : corpus.records) closed += r.account_close_month ? 1u : 0u;
    corpus.degenerate_hazard_warning = closed == 0 || closed == corpus.records.size();
    return corpus;
}

double oracle_churn_probability(const ChurnCorpusConfig& cfg, const MemberLatents& m,
                                const WindowSpec& window,
                                const DriverOverride& override_) {
    const bool low_growth = override_.low_growth.value_or(m.low_growth);
    const bool low_balance = override_.low_balance.value_or(m.low_balance);
    const bool stopped_at_anchor = override_.stopped.value_or(
        m.stop_month >= 0 && m.stop_month <= window.anchor_month);
    const SurvivalState s =
        roll_hazard(cfg, low_growth, low_balance, stopped_at_anchor ? 0.0 : 1.0,
                    stopped_at_anchor ? 1.0 : 0.0, window.anchor_month + 1,
                    window.last_outcome_month());
    return s.p_closed;
}

double interventional_churn_probability(const ChurnCorpusConfig& cfg,
                                        const MemberLatents& m,
                                        const WindowSpec& window,
                                        const DriverOverride& override_) {
    const bool low_growth = override_.low_growth.value_or(m.low_growth);
    const bool low_balance = override_.low_balance.value_or(m.low_balance);
    // From the open month to the anchor: employed at opening, stop-then-close
    // each month. Conditioning on surviving to the anchor normalises the
    // state masses.
    const SurvivalState at_anchor = roll_hazard(cfg, low_growth, low_balance, 1.0, 0.0,
                                                m.open_month + 1, window.anchor_month);
    const double alive = at_anchor.employed + at_anchor.stopped;
    if (alive <= 0.0) throw std::logic_error("member cannot survive to the anchor");
    const SurvivalState s =
        roll_hazard(cfg, low_growth, low_balance, at_anchor.employed / alive,
                    at_anchor.stopped / alive, window.anchor_month + 1,
                    window.last_outcome_month());
    return s.p_closed;
}

namespace {

std::vector<std::size_t> cohort_indices(const ChurnCorpus& corpus, const WindowSpec& window,
                                        const dataset::FilterSpec& filter) {
    std::vector<std::size_t> idx;
    const auto kept = dataset::apply_inclusion_filters(corpus.records, window, filter);
    std::size_t next = 0;
    for (std::size_t i = 0; i < corpus.records.size() && next < kept.size(); ++i) {
        if (corpus.records[i].member_id == kept[next].member_id) {
            idx.push_back(i);
            ++next;
        }
    }
    if (next != kept.size()) throw std::logic_error("cohort alignment failed");
    return idx;
}

} // namespace

double true_driver_ate(const ChurnCorpus& corpus, const WindowSpec& window,
                       const dataset::FilterSpec& filter, Driver driver) {
    const auto cohort = cohort_indices(corpus, window, filter);
    if (cohort.empty()) throw std::invalid_argument("empty cohort");
    double total = 0.0;
    for (const std::size_t i : cohort) {
        const auto& m = corpus.latents[i];
        DriverOverride on, off;
        double p_on = 0.0, p_off = 0.0;
        switch (driver) {
            case Driver::stopped_contributions:
                on.stopped = true;
                off.stopped = false;
                p_on = oracle_churn_probability(corpus.config, m, window, on);
                p_off = oracle_churn_probability(corpus.config, m, window, off);
                break;
            case Driver::low_growth:
                on.low_growth = true;
                off.low_growth = false;
                p_on = interventional_churn_probability(corpus.config, m, window, on);
                p_off = interventional_churn_probability(corpus.config, m, window, off);
                break;
            case Driver::high_balance:
                on.low_balance = false;
                off.low_balance = true;
                p_on = interventional_churn_probability(corpus.config, m, window, on);
                p_off = interventional_churn_probability(corpus.config, m, window, off);
                break;
        }
        total += p_on - p_off;
    }
    return total / static_cast<double>(cohort.size());
}

std::map<std::string, double> oracle_probabilities(const ChurnCorpus& corpus,
                                                   const WindowSpec& window,
                                                   const dataset::FilterSpec& filter) {
    std::map<std::string, double> out;
    for (const std::size_t i : cohort_indices(corpus, window, filter))
        out[corpus.records[i].member_id] =
            oracle_churn_probability(corpus.config, corpus.latents[i], window);
    return out;
}

std::string corpus_graph_text() {
    return "# Analyst assumptions over the snapshot features\n"
           "gender -> balance_last\n"
           "account_growth_last -> balance_last\n"
           "account_growth_last -> sg_contribution_recency\n"
           "account_growth_last -> churn\n"
           "balance_last -> acc_tenure\n"
           "balance_last -> churn\n"
           "sg_contribution_recency -> churn\n"
           "acc_tenure -> churn\n";
}

nlohmann::ordered_json ground_truth_json(const ChurnCorpus& corpus,
                                         const WindowSpec& window,
                                         const dataset::FilterSpec& filter) {
    nlohmann::ordered_json j;
    j["config"] = corpus_to_json(corpus.config);
    j["window"] = {{"anchor_month", window.anchor_month},
                   {"observation_len", window.observation_len},
                   {"outcome_len", window.outcome_len}};
    j["true_effects"] = {
        {"high_sg_recency",
         true_driver_ate(corpus, window, filter, Driver::stopped_contributions)},
        {"low_account_growth", true_driver_ate(corpus, window, filter, Driver::low_growth)},
        {"high_acc_balance", true_driver_ate(corpus, window, filter, Driver::high_balance)}};
    nlohmann::ordered_json probs;
    for (const auto& [id, p] : oracle_probabilities(corpus, window, filter)) probs[id] = p;
    j["oracle_probabilities"] = std::move(probs);
    if (corpus.degenerate_hazard_warning) j["degenerate_hazard_warning"] = true;
    return j;
}

} // namespace churnlab::synth
