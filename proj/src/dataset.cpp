#include "churnlab/dataset.hpp"

#include "churnlab/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <stdexcept>

namespace churnlab::dataset {

Aggregation aggregation_from_string(const std::string& s) {
    if (s == "last") return Aggregation::last;
    if (s == "mean") return Aggregation::mean;
    if (s == "sum") return Aggregation::sum;
    if (s == "change_amount") return Aggregation::change_amount;
    if (s == "change_ratio") return Aggregation::change_ratio;
    if (s == "recency") return Aggregation::recency;
    throw std::invalid_argument("unknown aggregation: " + s);
}

std::string aggregation_name(Aggregation a) {
    switch (a) {
        case Aggregation::last: return "last";
        case Aggregation::mean: return "mean";
        case Aggregation::sum: return "sum";
        case Aggregation::change_amount: return "change_amount";
        case Aggregation::change_ratio: return "change_ratio";
        case Aggregation::recency: return "recency";
    }
    throw std::invalid_argument("unknown aggregation");
}

namespace {

// Latest observation of `attr` at or before `month`; nullopt when never seen.
std::optional<double> latest_at_or_before(const MemberRecord& r, const std::string& attr,
                                          int month) {
    auto it = r.monthly_attributes.upper_bound(month);
    while (it != r.monthly_attributes.begin()) {
        --it;
        const auto a = it->second.find(attr);
        if (a != it->second.end()) return a->second;
    }
    return std::nullopt;
}

struct WindowSeries {
    std::vector<int> months;   // ascending, observed months only
    std::vector<double> values;
};

WindowSeries series_in_window(const MemberRecord& r, const std::string& attr,
                              const WindowSpec& w) {
    WindowSeries s;
    const int lo = w.first_observed_month();
    for (auto it = r.monthly_attributes.lower_bound(lo);
         it != r.monthly_attributes.end() && it->first <= w.anchor_month; ++it) {
        const auto a = it->second.find(attr);
        if (a != it->second.end()) {
            s.months.push_back(it->first);
            s.values.push_back(a->second);
        }
    }
    return s;
}

double aggregate(const WindowSeries& s, Aggregation a, const WindowSpec& w) {
    if (s.values.empty())
        return a == Aggregation::recency ? static_cast<double>(w.observation_len) : 0.0;
    switch (a) {
        case Aggregation::last:
            return s.values.back();
        case Aggregation::mean:
            return std::accumulate(s.values.begin(), s.values.end(), 0.0) /
                   static_cast<double>(s.values.size());
        case Aggregation::sum:
            return std::accumulate(s.values.begin(), s.values.end(), 0.0);
        case Aggregation::change_amount:
            return s.values.back() - s.values.front();
        case Aggregation::change_ratio: {
            const double denom = std::max(std::abs(s.values.front()), kChangeRatioEpsilon);
            return (s.values.back() - s.values.front()) / denom;
        }
        case Aggregation::recency: {
            // Months since the last nonzero observation; capped at the
            // window length when everything in the window is zero.
            for (std::size_t i = s.values.size(); i-- > 0;) {
                if (s.values[i] != 0.0)
                    return static_cast<double>(w.anchor_month - s.months[i]);
            }
            return static_cast<double>(w.observation_len);
        }
    }
    throw std::invalid_argument("unknown aggregation");
}

bool has_observation_in_window(const MemberRecord& r, const WindowSpec& w) {
    const auto it = r.monthly_attributes.lower_bound(w.first_observed_month());
    return it != r.monthly_attributes.end() && it->first <= w.anchor_month;
}

} // namespace

std::vector<MemberRecord> apply_inclusion_filters(const std::vector<MemberRecord>& records,
                                                  const WindowSpec& window,
                                                  const FilterSpec& filter) {
    std::vector<MemberRecord> kept;
    for (const auto& r : records) {
        if (!r.open_at(window.anchor_month)) continue;
        if (r.tenure_at(window.anchor_month) <= filter.min_tenure_months) continue;
        const auto balance =
            latest_at_or_before(r, filter.balance_attribute, window.anchor_month);
        if (!balance || *balance < filter.min_balance) continue;
        kept.push_back(r);
    }
    return kept;
}

std::vector<int> label_outcomes(const std::vector<MemberRecord>& records,
                                const WindowSpec& window) {
    std::vector<int> labels;
    labels.reserve(records.size());
    for (const auto& r : records) {
        if (r.account_close_month && *r.account_close_month <= window.anchor_month)
            throw std::invalid_argument("member " + r.member_id +
                                        " closed at or before the anchor month; "
                                        "apply the inclusion filters first");
        const bool churned = r.account_close_month &&
                             *r.account_close_month > window.anchor_month &&
                             *r.account_close_month <= window.last_outcome_month();
        labels.push_back(churned ? 1 : 0);
    }
    return labels;
}

LabeledDataset build_snapshot(const std::vector<MemberRecord>& records,
                              const WindowSpec& window, const Recipe& recipe) {
    if (window.observation_len <= 0 || window.outcome_len <= 0)
        throw std::invalid_argument("window lengths must be positive");

    // Static attribute dictionary over the whole cohort, sorted names and
    // lexicographically sorted categories, so column layout is deterministic.
    std::map<std::string, std::set<std::string>> static_values;
    for (const auto& r : records) {
        for (const auto& [name, value] : r.static_attributes)
            static_values[name].insert(value);
    }

    std::vector<FeatureSpec> specs;
    for (const auto& [attr, aggs] : recipe) {
        for (const auto agg : aggs)
            specs.push_back({attr + "_" + aggregation_name(agg), FeatureKind::numeric, {}});
    }
    specs.push_back({"acc_tenure", FeatureKind::numeric, {}});
    for (const auto& [name, values] : static_values) {
        FeatureSpec s;
        s.name = name;
        s.kind = FeatureKind::nominal;
        s.categories.assign(values.begin(), values.end());
        specs.push_back(s);
    }

    LabeledDataset ds;
    ds.specs = specs;
    ds.features.resize(static_cast<Eigen::Index>(records.size()),
                       static_cast<Eigen::Index>(specs.size()));
    ds.labels = label_outcomes(records, window);
    ds.member_ids.reserve(records.size());

    for (std::size_t i = 0; i < records.size(); ++i) {
        const auto& r = records[i];
        if (!has_observation_in_window(r, window))
            throw std::invalid_argument("member " + r.member_id +
                                        " has no observations inside the window");
        Eigen::Index j = 0;
        for (const auto& [attr, aggs] : recipe) {
            const WindowSeries s = series_in_window(r, attr, window);
            for (const auto agg : aggs)
                ds.features(static_cast<Eigen::Index>(i), j++) = aggregate(s, agg, window);
        }
        ds.features(static_cast<Eigen::Index>(i), j++) =
            static_cast<double>(r.tenure_at(window.anchor_month));
        for (const auto& [name, values] : static_values) {
            const auto it = r.static_attributes.find(name);
            if (it == r.static_attributes.end())
                throw std::invalid_argument("member " + r.member_id +
                                            " is missing static attribute " + name);
            const auto pos = values.find(it->second);
            ds.features(static_cast<Eigen::Index>(i), j++) =
                static_cast<double>(std::distance(values.begin(), pos));
        }
        ds.member_ids.push_back(r.member_id);
    }
    ds.validate();
    return ds;
}

std::vector<LabeledDataset> slide_windows(const std::vector<MemberRecord>& records,
                                          int base_anchor, int step, int count,
                                          const WindowSpec& window_shape,
                                          const FilterSpec& filter,
                                          const Recipe& recipe) {
    if (step <= 0 || count <= 0)
        throw std::invalid_argument("slide step and count must be positive");
    std::vector<LabeledDataset> out;
    out.reserve(static_cast<std::size_t>(count));
    for (int k = 0; k < count; ++k) {
        WindowSpec w = window_shape;
        w.anchor_month = base_anchor + k * step;
        const auto cohort = apply_inclusion_filters(records, w, filter);
        out.push_back(build_snapshot(cohort, w, recipe));
    }
    return out;
}

LabeledDataset take_rows(const LabeledDataset& ds, const std::vector<std::size_t>& rows) {
    LabeledDataset out;
    out.specs = ds.specs;
    out.features.resize(static_cast<Eigen::Index>(rows.size()), ds.cols());
    out.labels.reserve(rows.size());
    const bool with_ids = !ds.member_ids.empty();
    if (with_ids) out.member_ids.reserve(rows.size());
    for (std::size_t k = 0; k < rows.size(); ++k) {
        const auto i = rows[k];
        if (i >= static_cast<std::size_t>(ds.rows()))
            throw std::out_of_range("row index out of range");
        out.features.row(static_cast<Eigen::Index>(k)) =
            ds.features.row(static_cast<Eigen::Index>(i));
        out.labels.push_back(ds.labels[i]);
        if (with_ids) out.member_ids.push_back(ds.member_ids[i]);
    }
    return out;
}

std::pair<LabeledDataset, LabeledDataset> train_test_split(const LabeledDataset& ds,
                                                           double train_fraction,
                                                           std::uint64_t seed) {
    if (!(train_fraction >= 0.0 && train_fraction <= 1.0))
        throw std::invalid_argument("train_fraction must lie in [0, 1]");
    const auto n = static_cast<std::size_t>(ds.rows());
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng rng(derive_seed(seed, 0x5e17u));
    rng.shuffle(order.begin(), order.end());
    // Tiny nudge so fractions like 0.7 that are just below their decimal
    // value in binary still floor to the intended count.
    const auto n_train = static_cast<std::size_t>(
        std::floor(train_fraction * static_cast<double>(n) + 1e-9));
    std::vector<std::size_t> train_rows(order.begin(),
                                        order.begin() + static_cast<std::ptrdiff_t>(n_train));
    std::vector<std::size_t> test_rows(order.begin() + static_cast<std::ptrdiff_t>(n_train),
                                       order.end());
    return {take_rows(ds, train_rows), take_rows(ds, test_rows)};
}

} // namespace churnlab::dataset
