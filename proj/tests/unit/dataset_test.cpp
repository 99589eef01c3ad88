#include "churnlab/dataset.hpp"

#include <doctest.h>

#include <algorithm>
#include <set>
#include <string>
#include <vector>

using namespace churnlab;
using dataset::Aggregation;

namespace {

// Three members around an anchor at month 12, observing months 7..12 and
// resolving churn over months 13..15.
std::vector<MemberRecord> toy_members() {
    MemberRecord a;
    a.member_id = "a";
    a.account_open_month = 0;
    a.account_close_month = 14; // closes inside the outcome window
    a.monthly_attributes[7]["balance"] = 100;
    a.monthly_attributes[9]["balance"] = 150;
    a.monthly_attributes[12]["balance"] = 130;
    a.monthly_attributes[8]["contrib"] = 50;
    a.monthly_attributes[10]["contrib"] = 0;
    a.monthly_attributes[11]["contrib"] = 0;
    a.static_attributes["gender"] = "F";

    MemberRecord b;
    b.member_id = "b";
    b.account_open_month = 3;
    b.monthly_attributes[12]["balance"] = 2000;
    b.static_attributes["gender"] = "M";

    MemberRecord c;
    c.member_id = "c";
    c.account_open_month = 0;
    c.account_close_month = 20; // closes, but after the outcome window
    c.monthly_attributes[7]["balance"] = 80;
    c.static_attributes["gender"] = "F";

    return {a, b, c};
}

WindowSpec toy_window() {
    WindowSpec w;
    w.anchor_month = 12;
    w.observation_len = 6;
    w.outcome_len = 3;
    return w;
}

dataset::Recipe toy_recipe() {
    return {{"balance", {Aggregation::last, Aggregation::mean, Aggregation::change_amount,
                         Aggregation::change_ratio}},
            {"contrib", {Aggregation::sum, Aggregation::recency}}};
}

} // namespace

TEST_CASE("snapshot aggregations match hand arithmetic") {
    auto ds = dataset::build_snapshot(toy_members(), toy_window(), toy_recipe());
    REQUIRE(ds.rows() == 3);

    // Columns: monthly aggregations (attributes sorted, recipe order inside),
    // then tenure, then static nominals.
    std::vector<std::string> want = {"balance_last", "balance_mean", "balance_change_amount",
                                     "balance_change_ratio", "contrib_sum", "contrib_recency",
                                     "acc_tenure", "gender"};
    REQUIRE(ds.cols() == (Eigen::Index)want.size());
    for (std::size_t i = 0; i < want.size(); ++i) CHECK(ds.specs[i].name == want[i]);

    // Member a: balances 100, 150, 130 over the window; contributions 50
    // at month 8 then explicit zeros.
    CHECK(ds.features(0, 0) == 130.0);
    CHECK(ds.features(0, 1) == doctest::Approx((100.0 + 150.0 + 130.0) / 3.0).epsilon(1e-15));
    CHECK(ds.features(0, 2) == 30.0);
    CHECK(ds.features(0, 3) == doctest::Approx(0.3).epsilon(1e-15));
    CHECK(ds.features(0, 4) == 50.0);
    CHECK(ds.features(0, 5) == 4.0); // last nonzero contribution at month 8
    CHECK(ds.features(0, 6) == 12.0);

    // Member b: single balance observation, no contributions at all.
    CHECK(ds.features(1, 0) == 2000.0);
    CHECK(ds.features(1, 1) == 2000.0);
    CHECK(ds.features(1, 2) == 0.0);
    CHECK(ds.features(1, 3) == 0.0);
    CHECK(ds.features(1, 4) == 0.0);
    CHECK(ds.features(1, 5) == 6.0); // never contributed: capped at window length
    CHECK(ds.features(1, 6) == 9.0);

    // gender is nominal with sorted categories.
    const auto& g = ds.specs[7];
    CHECK(g.kind == FeatureKind::nominal);
    CHECK(g.categories == std::vector<std::string>{"F", "M"});
    CHECK(ds.features(0, 7) == 0.0);
    CHECK(ds.features(1, 7) == 1.0);

    CHECK(ds.labels == std::vector<int>{1, 0, 0});
    ds.validate();
}

TEST_CASE("labels cover exactly the outcome window") {
    auto members = toy_members();
    auto labels = dataset::label_outcomes(members, toy_window());
    CHECK(labels == std::vector<int>{1, 0, 0});

    // Closing exactly at the window edge still counts.
    members[0].account_close_month = 15;
    CHECK(dataset::label_outcomes(members, toy_window())[0] == 1);
    members[0].account_close_month = 16;
    CHECK(dataset::label_outcomes(members, toy_window())[0] == 0);

    // A record already closed at the anchor is a caller error.
    members[0].account_close_month = 12;
    CHECK_THROWS(dataset::label_outcomes(members, toy_window()));
}

TEST_CASE("inclusion filters drop closed, young and low-balance members") {
    auto members = toy_members();
    dataset::FilterSpec filter; // tenure > 6, balance >= 1500
    auto kept = dataset::apply_inclusion_filters(members, toy_window(), filter);
    REQUIRE(kept.size() == 1);
    CHECK(kept[0].member_id == "b"); // a and c fail the balance floor

    filter.min_balance = 50;
    kept = dataset::apply_inclusion_filters(members, toy_window(), filter);
    CHECK(kept.size() == 3);

    // Tenure must be strictly greater than the floor.
    filter.min_tenure_months = 9;
    kept = dataset::apply_inclusion_filters(members, toy_window(), filter);
    REQUIRE(kept.size() == 2);
    CHECK(kept[0].member_id == "a");

    // Closed before the anchor: out.
    members[1].account_close_month = 11;
    filter.min_tenure_months = 0;
    kept = dataset::apply_inclusion_filters(members, toy_window(), filter);
    for (const auto& m : kept) CHECK(m.member_id != "b");
}

TEST_CASE("train/test split size is the floor of the requested fraction") {
    LabeledDataset big;
    const Eigen::Index n = 124363;
    big.features = Matrix::Zero(n, 1);
    big.labels.assign(n, 0);
    big.specs = {{"x", FeatureKind::numeric, {}}};
    auto [train, test] = dataset::train_test_split(big, 0.8, 1);
    CHECK(train.rows() == 99490);
    CHECK(test.rows() == 24873);

    LabeledDataset five;
    five.features = Matrix::Zero(5, 1);
    five.labels.assign(5, 0);
    five.specs = big.specs;
    auto [t5, s5] = dataset::train_test_split(five, 0.5, 1);
    CHECK(t5.rows() == 2);
    CHECK(s5.rows() == 3);
}

TEST_CASE("split partitions the rows and is seed-deterministic") {
    LabeledDataset ds;
    const int n = 97;
    ds.features.resize(n, 1);
    for (int i = 0; i < n; ++i) {
        ds.features(i, 0) = i;
        ds.member_ids.push_back("m" + std::to_string(i));
        ds.labels.push_back(i % 2);
    }
    ds.specs = {{"x", FeatureKind::numeric, {}}};

    auto [a_train, a_test] = dataset::train_test_split(ds, 0.7, 42);
    auto [b_train, b_test] = dataset::train_test_split(ds, 0.7, 42);
    auto [c_train, c_test] = dataset::train_test_split(ds, 0.7, 43);

    CHECK(a_train.member_ids == b_train.member_ids);
    CHECK(a_train.member_ids != c_train.member_ids);

    std::set<std::string> all(a_train.member_ids.begin(), a_train.member_ids.end());
    all.insert(a_test.member_ids.begin(), a_test.member_ids.end());
    CHECK(all.size() == (std::size_t)n);

    // Rows travel with their ids.
    for (Eigen::Index i = 0; i < a_train.rows(); ++i)
        CHECK("m" + std::to_string((int)a_train.features(i, 0)) == a_train.member_ids[i]);
}

TEST_CASE("take_rows projects rows in the given order") {
    LabeledDataset ds;
    ds.features.resize(4, 1);
    ds.features << 10, 11, 12, 13;
    ds.labels = {0, 1, 0, 1};
    ds.specs = {{"x", FeatureKind::numeric, {}}};
    ds.member_ids = {"p", "q", "r", "s"};

    auto sub = dataset::take_rows(ds, {3, 1});
    REQUIRE(sub.rows() == 2);
    CHECK(sub.features(0, 0) == 13);
    CHECK(sub.features(1, 0) == 11);
    CHECK(sub.labels == std::vector<int>{1, 1});
    CHECK(sub.member_ids == std::vector<std::string>{"s", "q"});
}

TEST_CASE("sliding windows re-anchor the snapshot") {
    auto members = toy_members();
    // Give member b history early enough to appear in both windows.
    members[1].monthly_attributes[9]["balance"] = 1900;
    dataset::FilterSpec filter;
    filter.min_tenure_months = 0;
    filter.min_balance = 0;
    WindowSpec shape = toy_window();
    auto windows = dataset::slide_windows(members, 9, 3, 2, shape, filter, toy_recipe());
    REQUIRE(windows.size() == 2);
    // Anchor 9: member a is open (closes month 14, outside (9,12]): label 0.
    // Anchor 12: member a churns.
    auto find_label = [](const LabeledDataset& ds, const std::string& id) {
        for (std::size_t i = 0; i < ds.member_ids.size(); ++i)
            if (ds.member_ids[i] == id) return ds.labels[i];
        return -1;
    };
    CHECK(find_label(windows[0], "a") == 0);
    CHECK(find_label(windows[1], "a") == 1);
}
