#include "churnlab/causal.hpp"
#include "churnlab/rng.hpp"
#include "churnlab/synth.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <functional>
#include <set>
#include <string>
#include <vector>

using namespace churnlab;
using namespace churnlab::causal;

namespace {

// Trail-enumeration d-separation oracle: walk every undirected simple path
// and apply the blocking rules directly.
bool separated_by_trails(const Dag& dag, int x, int y, const std::set<int>& z) {
    const int n = (int)dag.nodes.size();
    std::vector<std::vector<int>> adj(n);
    for (auto [a, b] : dag.edges) {
        adj[a].push_back(b);
        adj[b].push_back(a);
    }
    auto is_edge = [&](int a, int b) {
        for (auto [u, v] : dag.edges)
            if (u == a && v == b) return true;
        return false;
    };
    std::function<bool(int, std::set<int>&)> is_ancestor_of_z = [&](int node, std::set<int>& seen) {
        if (z.count(node)) return true;
        if (!seen.insert(node).second) return false;
        for (int c : dag.children[node])
            if (is_ancestor_of_z(c, seen)) return true;
        return false;
    };

    std::vector<int> trail = {x};
    std::set<int> on_trail = {x};
    std::function<bool()> active_trail_exists = [&]() -> bool {
        const int tail = trail.back();
        if (tail == y) {
            // Check every interior node against the blocking rules.
            for (std::size_t i = 1; i + 1 < trail.size(); ++i) {
                const int prev = trail[i - 1], node = trail[i], next = trail[i + 1];
                const bool collider = is_edge(prev, node) && is_edge(next, node);
                if (collider) {
                    std::set<int> seen;
                    if (!is_ancestor_of_z(node, seen)) return false;
                } else if (z.count(node)) {
                    return false;
                }
            }
            return true;
        }
        for (int nb : adj[tail]) {
            if (on_trail.count(nb)) continue;
            trail.push_back(nb);
            on_trail.insert(nb);
            const bool found = active_trail_exists();
            trail.pop_back();
            on_trail.erase(nb);
            if (found) return true;
        }
        return false;
    };
    if (z.count(x) || z.count(y)) return true;
    return !active_trail_exists();
}

Dag random_dag(Rng& r, int n_nodes) {
    std::vector<std::pair<std::string, std::string>> edges;
    for (int a = 0; a < n_nodes; ++a)
        for (int b = a + 1; b < n_nodes; ++b)
            if (r.bernoulli(0.4))
                edges.push_back({"n" + std::to_string(a), "n" + std::to_string(b)});
    if (edges.empty()) edges.push_back({"n0", "n1"});
    return make_dag(edges);
}

} // namespace

TEST_CASE("dag construction validates and normalises") {
    auto dag = make_dag({{"a", "b"}, {"b", "c"}, {"a", "b"}});
    CHECK(dag.nodes == std::vector<std::string>{"a", "b", "c"});
    CHECK(dag.edges.size() == 2); // duplicate collapsed
    CHECK(dag.index_of("b") == 1);
    CHECK(dag.index_of("zz") == -1);

    CHECK_THROWS_WITH_AS(make_dag({{"a", "b"}, {"b", "a"}}), doctest::Contains("cycle"),
                         std::invalid_argument);
    CHECK_THROWS(make_dag({{"a", "a"}}));
}

TEST_CASE("graph text parses, ignores comments, and formats back") {
    auto dag = parse_graph("# assumptions\n\na -> b\nb->c\n");
    CHECK(dag.nodes.size() == 3);
    auto text = format_graph(dag);
    auto again = parse_graph(text);
    CHECK(again.edges == dag.edges);
    CHECK(format_dot(dag).find("digraph") != std::string::npos);
    CHECK_THROWS(parse_graph("a => b"));
}

TEST_CASE("descendants are strict and transitive") {
    auto dag = make_dag({{"a", "b"}, {"b", "c"}, {"a", "d"}});
    auto d = descendants(dag, "a");
    CHECK(d == std::vector<std::string>{"b", "c", "d"});
    CHECK(descendants(dag, "c").empty());
}

TEST_CASE("d-separation handles chains, forks and colliders") {
    auto chain = make_dag({{"a", "b"}, {"b", "c"}});
    CHECK(!d_separated(chain, "a", "c", {}));
    CHECK(d_separated(chain, "a", "c", {"b"}));

    auto fork = make_dag({{"a", "b"}, {"a", "c"}});
    CHECK(!d_separated(fork, "b", "c", {}));
    CHECK(d_separated(fork, "b", "c", {"a"}));

    auto collider = make_dag({{"a", "c"}, {"b", "c"}, {"c", "d"}});
    CHECK(d_separated(collider, "a", "b", {}));
    CHECK(!d_separated(collider, "a", "b", {"c"}));
    // Conditioning on a collider's descendant opens it too.
    CHECK(!d_separated(collider, "a", "b", {"d"}));
}

TEST_CASE("d-separation agrees with trail enumeration on random graphs") {
    Rng r(2024);
    int checked = 0;
    for (int trial = 0; trial < 100; ++trial) {
        const int n = 3 + (int)r.below(3); // 3..5 nodes
        auto dag = random_dag(r, n);
        // Nodes that ended up with no edges are absent from the dag.
        const int m = (int)dag.nodes.size();
        for (int q = 0; q < 5; ++q) {
            const int x = (int)r.below(m), y = (int)r.below(m);
            if (x == y) continue;
            std::set<int> z;
            for (int k = 0; k < m; ++k)
                if (k != x && k != y && r.bernoulli(0.3)) z.insert(k);
            std::vector<std::string> z_names;
            for (int k : z) z_names.push_back(dag.nodes[k]);
            const bool lib = d_separated(dag, dag.nodes[x], dag.nodes[y], z_names);
            const bool oracle = separated_by_trails(dag, x, y, z);
            CHECK(lib == oracle);
            ++checked;
        }
    }
    CHECK(checked > 100);
}

TEST_CASE("backdoor sets on the reference assumption graph") {
    auto dag = make_dag({{"gender", "acc_balance"},
                         {"acc_balance", "churn"},
                         {"acc_balance", "cust_tenure"},
                         {"acc_balance_change", "cust_tenure"},
                         {"cust_tenure", "churn"},
                         {"acc_growth", "churn"}});
    auto sets = backdoor_sets(dag, "cust_tenure", "churn");
    REQUIRE(sets.size() == 1);
    CHECK(sets[0] == std::vector<std::string>{"acc_balance"});
}

TEST_CASE("backdoor handles the no-confounding and plain-confounder cases") {
    auto direct = make_dag({{"t", "y"}});
    auto sets = backdoor_sets(direct, "t", "y");
    REQUIRE(sets.size() == 1);
    CHECK(sets[0].empty()); // nothing to adjust for

    auto conf = make_dag({{"z", "t"}, {"z", "y"}, {"t", "y"}});
    sets = backdoor_sets(conf, "t", "y");
    REQUIRE(sets.size() == 1);
    CHECK(sets[0] == std::vector<std::string>{"z"});

    // Descendants of the treatment never qualify.
    auto med = make_dag({{"t", "m"}, {"m", "y"}, {"t", "y"}});
    sets = backdoor_sets(med, "t", "y");
    REQUIRE(sets.size() == 1);
    CHECK(sets[0].empty());
}

TEST_CASE("median uses the midpoint for even counts") {
    Vector x(4);
    x << 4, 1, 3, 2;
    CHECK(median(x) == doctest::Approx(2.5).epsilon(1e-15));
    Vector odd(3);
    odd << 9, 1, 5;
    CHECK(median(odd) == 5.0);
}

TEST_CASE("binarize rules split, invert and reject degenerate cuts") {
    Vector x(4);
    x << 1, 2, 3, 4;
    BinarizeRule rule;
    rule.kind = BinarizeRule::Kind::threshold;
    rule.value = 2.0;
    auto b = binarize(x, rule);
    CHECK(b.treated == std::vector<int>{0, 0, 1, 1}); // strictly above
    CHECK(b.cutpoint == 2.0);

    rule.invert = true;
    b = binarize(x, rule);
    CHECK(b.treated == std::vector<int>{1, 1, 0, 0});

    BinarizeRule med;
    med.kind = BinarizeRule::Kind::median;
    b = binarize(x, med);
    CHECK(b.cutpoint == doctest::Approx(2.5).epsilon(1e-15));
    CHECK(b.treated == std::vector<int>{0, 0, 1, 1});

    BinarizeRule off;
    off.kind = BinarizeRule::Kind::threshold;
    off.value = 99.0;
    CHECK_THROWS(binarize(x, off));

    auto j = rule_to_json(rule);
    auto back = rule_from_json(j);
    CHECK(back.invert);
    CHECK(back.value == 2.0);
}

TEST_CASE("propensity scores stay clipped away from the extremes") {
    Matrix z(6, 1);
    z << -3, -2, -1, 1, 2, 3;
    std::vector<int> t = {0, 0, 0, 1, 1, 1}; // separable: unclipped fit diverges
    auto e = fit_propensity(z, t);
    for (Eigen::Index i = 0; i < e.size(); ++i) {
        CHECK(e(i) >= 0.01);
        CHECK(e(i) <= 0.99);
    }
    CHECK(e(5) > e(0));
}

TEST_CASE("ipw matches hand-computed horvitz-thompson and hajek values") {
    Vector y(4), e(4);
    y << 1, 1, 0, 0;
    e << 0.8, 0.8, 0.2, 0.2;
    std::vector<int> t = {1, 0, 1, 0};
    CHECK(ipw_ate(y, t, e) == doctest::Approx(-0.9375).epsilon(1e-15));
    CHECK(ipw_ate(y, t, e, true) == doctest::Approx(-0.6).epsilon(1e-15));
}

TEST_CASE("the regression estimator recovers a noiseless effect exactly") {
    Rng r(14);
    const int n = 60;
    Matrix z(n, 1);
    Vector y(n);
    std::vector<int> t(n);
    for (int i = 0; i < n; ++i) {
        z(i, 0) = r.gaussian();
        t[i] = r.bernoulli(0.5) ? 1 : 0;
        y(i) = 1.0 + 0.5 * t[i] + 2.0 * z(i, 0);
    }
    CHECK(regression_ate(y, t, z) == doctest::Approx(0.5).epsilon(1e-6));
}

TEST_CASE("the refuter at fraction one reproduces the estimate bit for bit") {
    auto estimator = [](const std::vector<std::size_t>& rows) {
        double s = 0;
        for (auto i : rows) s += (double)i * 0.125;
        return s / (double)rows.size();
    };
    auto res = data_subset_refuter(estimator, 40, 1.0, 5, 3);
    REQUIRE(res.subset_estimates.size() == 5);
    for (double v : res.subset_estimates) CHECK(v == res.full_estimate);
    CHECK(res.max_abs_deviation == 0.0);

    auto half = data_subset_refuter(estimator, 40, 0.5, 8, 3);
    CHECK(half.subset_estimates.size() == 8);
    auto again = data_subset_refuter(estimator, 40, 0.5, 8, 3);
    CHECK(half.subset_estimates == again.subset_estimates);
}

TEST_CASE("effect sizes read as percentage point shifts") {
    CHECK(interpret_ate(0.15) == "increased the probability of churn by ~15%");
    CHECK(interpret_ate(-0.08) == "decreased the probability of churn by ~8%");
    CHECK(interpret_ate(0.001).find("~0%") != std::string::npos);
}

TEST_CASE("the full pipeline recovers the confounded fixture effect") {
    auto scm = synth::canonical_confounded_scm();
    auto sample = synth::generate_scm(scm, 4000, 7);

    // Columns: z, treatment, outcome. The label doubles as the churn flag.
    auto dag = make_dag({{"z", "treatment"}, {"z", "churn"}, {"treatment", "churn"}});
    LabeledDataset snapshot;
    snapshot.features.resize(sample.features.rows(), 2);
    snapshot.features.col(0) = sample.features.col(0);
    snapshot.features.col(1) = sample.features.col(1);
    snapshot.labels = sample.labels;
    snapshot.specs = {{"z", FeatureKind::numeric, {}}, {"treatment", FeatureKind::numeric, {}}};

    CausalQuery q;
    q.name = "treatment_on";
    q.treatment = "treatment";
    q.rule.kind = BinarizeRule::Kind::threshold;
    q.rule.value = 0.5;

    CausalOptions opt;
    opt.seed = 5;
    auto est = run_causal_analysis(snapshot, dag, {q}, opt);
    REQUIRE(est.size() == 1);
    CHECK(est[0].status == "ok");
    CHECK(est[0].adjustment_set == std::vector<std::string>{"z"});
    CHECK(est[0].ate == doctest::Approx(0.40).epsilon(0.15));
    CHECK(est[0].stable);

    auto report = report_to_json(est);
    REQUIRE(report.is_array());
    CHECK(report[0].contains("causal_variable"));
    CHECK(report[0].contains("estimate_effect"));
    CHECK(report[0].contains("data_subset_refuter"));
    CHECK(report[0].contains("probability_of_churn"));
}

TEST_CASE("queries whose adjustment set is unobservable are flagged") {
    auto dag = make_dag({{"u", "t"}, {"u", "y"}, {"t", "y"}});
    LabeledDataset snapshot;
    snapshot.features.resize(10, 1);
    for (int i = 0; i < 10; ++i) {
        snapshot.features(i, 0) = i % 2;
        snapshot.labels.push_back(i % 2);
    }
    snapshot.specs = {{"t", FeatureKind::numeric, {}}};

    CausalQuery q;
    q.name = "t_on";
    q.treatment = "t";
    q.rule.value = 0.5;
    CausalOptions opt;
    opt.outcome = "y";
    auto est = run_causal_analysis(snapshot, dag, {q}, opt);
    REQUIRE(est.size() == 1);
    CHECK(est[0].status == "not_identified");
}
