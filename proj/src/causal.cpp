#include "churnlab/causal.hpp"

#include "churnlab/models.hpp"
#include "churnlab/preprocess.hpp"
#include "churnlab/rng.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <set>
#include <sstream>
#include <stdexcept>

namespace churnlab::causal {

int Dag::index_of(const std::string& name) const {
    const auto it = std::lower_bound(nodes.begin(), nodes.end(), name);
    if (it == nodes.end() || *it != name) return -1;
    return static_cast<int>(it - nodes.begin());
}

namespace {

int require_node(const Dag& dag, const std::string& name) {
    const int i = dag.index_of(name);
    if (i < 0) throw std::invalid_argument("graph has no node named " + name);
    return i;
}

// Depth-first cycle check; on failure reconstructs one cyclic walk.
void check_acyclic(const Dag& dag) {
    const int n = static_cast<int>(dag.nodes.size());
    std::vector<int> state(static_cast<std::size_t>(n), 0); // 0 new, 1 open, 2 done
    std::vector<int> parent_in_walk(static_cast<std::size_t>(n), -1);

    for (int root = 0; root < n; ++root) {
        if (state[static_cast<std::size_t>(root)] != 0) continue;
        std::vector<std::pair<int, std::size_t>> stack{{root, 0}};
        state[static_cast<std::size_t>(root)] = 1;
        while (!stack.empty()) {
            auto& [node, child_pos] = stack.back();
            const auto& kids = dag.children[static_cast<std::size_t>(node)];
            if (child_pos == kids.size()) {
                state[static_cast<std::size_t>(node)] = 2;
                stack.pop_back();
                continue;
            }
            const int next = kids[child_pos++];
            if (state[static_cast<std::size_t>(next)] == 1) {
                // Walk back from `node` to `next` along the open path.
                std::vector<int> walk;
                for (auto it = stack.rbegin(); it != stack.rend(); ++it) {
                    walk.push_back(it->first);
                    if (it->first == next) break;
                }
                std::reverse(walk.begin(), walk.end());
                walk.push_back(next);
                std::ostringstream msg;
                msg << "graph contains a cycle: ";
                for (std::size_t i = 0; i < walk.size(); ++i) {
                    if (i) msg << " -> ";
                    msg << dag.nodes[static_cast<std::size_t>(walk[i])];
                }
                throw std::invalid_argument(msg.str());
            }
            if (state[static_cast<std::size_t>(next)] == 0) {
                state[static_cast<std::size_t>(next)] = 1;
                stack.emplace_back(next, 0);
            }
        }
    }
}

} // namespace

Dag make_dag(const std::vector<std::pair<std::string, std::string>>& edges) {
    Dag dag;
    std::set<std::string> names;
    for (const auto& [from, to] : edges) {
        if (from == to) throw std::invalid_argument("self loop on node " + from);
        names.insert(from);
        names.insert(to);
    }
    dag.nodes.assign(names.begin(), names.end());
    dag.parents.resize(dag.nodes.size());
    dag.children.resize(dag.nodes.size());
    std::set<std::pair<int, int>> seen;
    for (const auto& [from, to] : edges) {
        const int a = dag.index_of(from);
        const int b = dag.index_of(to);
        if (!seen.insert({a, b}).second) continue;
        dag.children[static_cast<std::size_t>(a)].push_back(b);
        dag.parents[static_cast<std::size_t>(b)].push_back(a);
    }
    dag.edges.assign(seen.begin(), seen.end());
    for (auto& v : dag.children) std::sort(v.begin(), v.end());
    for (auto& v : dag.parents) std::sort(v.begin(), v.end());
    check_acyclic(dag);
    return dag;
}

Dag parse_graph(const std::string& text) {
    std::vector<std::pair<std::string, std::string>> edges;
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    const auto trim = [](std::string s) {
        const auto a = s.find_first_not_of(" \t\r");
        const auto b = s.find_last_not_of(" \t\r");
        if (a == std::string::npos) return std::string{};
        return s.substr(a, b - a + 1);
    };
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto arrow = line.find("->");
        if (arrow == std::string::npos)
            throw std::invalid_argument("expected 'from -> to' on line " +
                                        std::to_string(line_no));
        const std::string from = trim(line.substr(0, arrow));
        const std::string to = trim(line.substr(arrow + 2));
        if (from.empty() || to.empty())
            throw std::invalid_argument("empty node name on line " +
                                        std::to_string(line_no));
        edges.emplace_back(from, to);
    }
    if (edges.empty()) throw std::invalid_argument("graph text contains no edges");
    return make_dag(edges);
}

std::string format_graph(const Dag& dag) {
    std::ostringstream out;
    for (const auto& [a, b] : dag.edges)
        out << dag.nodes[static_cast<std::size_t>(a)] << " -> "
            << dag.nodes[static_cast<std::size_t>(b)] << '\n';
    return out.str();
}

std::string format_dot(const Dag& dag) {
    std::ostringstream out;
    out << "digraph causal {\n";
    for (const auto& n : dag.nodes) out << "  \"" << n << "\";\n";
    for (const auto& [a, b] : dag.edges)
        out << "  \"" << dag.nodes[static_cast<std::size_t>(a)] << "\" -> \""
            << dag.nodes[static_cast<std::size_t>(b)] << "\";\n";
    out << "}\n";
    return out.str();
}

namespace {

std::vector<bool> descendant_mask(const Dag& dag, int node) {
    std::vector<bool> seen(dag.nodes.size(), false);
    std::vector<int> stack{node};
    while (!stack.empty()) {
        const int cur = stack.back();
        stack.pop_back();
        for (int c : dag.children[static_cast<std::size_t>(cur)]) {
            if (!seen[static_cast<std::size_t>(c)]) {
                seen[static_cast<std::size_t>(c)] = true;
                stack.push_back(c);
            }
        }
    }
    seen[static_cast<std::size_t>(node)] = false;
    return seen;
}

// Reachability sweep deciding d-connection. States are (node, direction):
// direction up = the trail arrives from a child, down = from a parent.
bool d_connected(const std::vector<std::vector<int>>& parents,
                 const std::vector<std::vector<int>>& children, int x, int y,
                 const std::vector<bool>& in_z) {
    const auto n = parents.size();
    // Ancestors of the conditioning set, conditioning nodes included.
    std::vector<bool> z_ancestor(n, false);
    {
        std::vector<int> stack;
        for (std::size_t i = 0; i < n; ++i) {
            if (in_z[i]) {
                z_ancestor[i] = true;
                stack.push_back(static_cast<int>(i));
            }
        }
        while (!stack.empty()) {
            const int cur = stack.back();
            stack.pop_back();
            for (int p : parents[static_cast<std::size_t>(cur)]) {
                if (!z_ancestor[static_cast<std::size_t>(p)]) {
                    z_ancestor[static_cast<std::size_t>(p)] = true;
                    stack.push_back(p);
                }
            }
        }
    }

    enum { up = 0, down = 1 };
    std::vector<std::array<bool, 2>> visited(n, {false, false});
    std::vector<std::pair<int, int>> stack{{x, up}};
    while (!stack.empty()) {
        const auto [node, dir] = stack.back();
        stack.pop_back();
        auto& seen = visited[static_cast<std::size_t>(node)][static_cast<std::size_t>(dir)];
        if (seen) continue;
        seen = true;
        if (!in_z[static_cast<std::size_t>(node)] && node == y) return true;

        if (dir == up && !in_z[static_cast<std::size_t>(node)]) {
            for (int p : parents[static_cast<std::size_t>(node)]) stack.push_back({p, up});
            for (int c : children[static_cast<std::size_t>(node)]) stack.push_back({c, down});
        } else if (dir == down) {
            if (!in_z[static_cast<std::size_t>(node)]) {
                for (int c : children[static_cast<std::size_t>(node)])
                    stack.push_back({c, down});
            }
            if (z_ancestor[static_cast<std::size_t>(node)]) {
                // Collider (or its descendant) activated by conditioning.
                for (int p : parents[static_cast<std::size_t>(node)])
                    stack.push_back({p, up});
            }
        }
    }
    return false;
}

} // namespace

std::vector<std::string> descendants(const Dag& dag, const std::string& node) {
    const int i = require_node(dag, node);
    const auto mask = descendant_mask(dag, i);
    std::vector<std::string> out;
    for (std::size_t k = 0; k < mask.size(); ++k) {
        if (mask[k]) out.push_back(dag.nodes[k]);
    }
    return out;
}

bool d_separated(const Dag& dag, const std::string& x, const std::string& y,
                 const std::vector<std::string>& z) {
    const int xi = require_node(dag, x);
    const int yi = require_node(dag, y);
    if (xi == yi) throw std::invalid_argument("x and y must differ");
    std::vector<bool> in_z(dag.nodes.size(), false);
    for (const auto& name : z) in_z[static_cast<std::size_t>(require_node(dag, name))] = true;
    return !d_connected(dag.parents, dag.children, xi, yi, in_z);
}

std::vector<std::vector<std::string>> backdoor_sets(const Dag& dag,
                                                    const std::string& treatment,
                                                    const std::string& outcome) {
    const int t = require_node(dag, treatment);
    const int y = require_node(dag, outcome);
    if (t == y) throw std::invalid_argument("treatment and outcome must differ");

    const auto desc = descendant_mask(dag, t);
    std::vector<int> candidates;
    for (std::size_t i = 0; i < dag.nodes.size(); ++i) {
        const int node = static_cast<int>(i);
        if (node == t || node == y || desc[i]) continue;
        candidates.push_back(node);
    }
    if (candidates.size() > 22)
        throw std::invalid_argument("too many adjustment candidates (" +
                                    std::to_string(candidates.size()) +
                                    ") for exhaustive search");

    // Same graph with the treatment's outgoing edges removed.
    auto children = dag.children;
    auto parents = dag.parents;
    for (int c : children[static_cast<std::size_t>(t)]) {
        auto& ps = parents[static_cast<std::size_t>(c)];
        ps.erase(std::remove(ps.begin(), ps.end(), t), ps.end());
    }
    children[static_cast<std::size_t>(t)].clear();

    std::vector<std::vector<int>> minimal; // accepted minimal sets, as indices
    const auto is_superset_of_minimal = [&](const std::vector<int>& zset) {
        for (const auto& m : minimal) {
            if (std::includes(zset.begin(), zset.end(), m.begin(), m.end())) return true;
        }
        return false;
    };

    const std::size_t k = candidates.size();
    for (std::size_t size = 0; size <= k; ++size) {
        // Lexicographic combinations of `size` candidate positions.
        std::vector<std::size_t> pick(size);
        std::iota(pick.begin(), pick.end(), std::size_t{0});
        for (;;) {
            std::vector<int> zset;
            zset.reserve(size);
            for (std::size_t p : pick) zset.push_back(candidates[p]);
            if (!is_superset_of_minimal(zset)) {
                std::vector<bool> in_z(dag.nodes.size(), false);
                for (int node : zset) in_z[static_cast<std::size_t>(node)] = true;
                if (!d_connected(parents, children, t, y, in_z)) minimal.push_back(zset);
            }
            if (size == 0) break;
            // Advance to the next combination.
            std::size_t pos = size;
            while (pos > 0 && pick[pos - 1] == k - size + pos - 1) --pos;
            if (pos == 0) break;
            ++pick[pos - 1];
            for (std::size_t q = pos; q < size; ++q) pick[q] = pick[q - 1] + 1;
        }
    }

    std::vector<std::vector<std::string>> out;
    out.reserve(minimal.size());
    for (const auto& zset : minimal) {
        std::vector<std::string> names;
        names.reserve(zset.size());
        for (int node : zset) names.push_back(dag.nodes[static_cast<std::size_t>(node)]);
        out.push_back(std::move(names)); // already sorted: candidates ascend
    }
    std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
        if (a.size() != b.size()) return a.size() < b.size();
        return a < b;
    });
    return out;
}

BinarizeRule rule_from_json(const nlohmann::ordered_json& j) {
    BinarizeRule r;
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "threshold") {
        r.kind = BinarizeRule::Kind::threshold;
        r.value = j.at("value").get<double>();
    } else if (kind == "median") {
        r.kind = BinarizeRule::Kind::median;
    } else {
        throw std::invalid_argument("unknown binarize rule kind: " + kind);
    }
    if (j.contains("invert")) r.invert = j.at("invert").get<bool>();
    return r;
}

nlohmann::ordered_json rule_to_json(const BinarizeRule& r) {
    nlohmann::ordered_json j;
    j["kind"] = r.kind == BinarizeRule::Kind::threshold ? "threshold" : "median";
    if (r.kind == BinarizeRule::Kind::threshold) j["value"] = r.value;
    if (r.invert) j["invert"] = true;
    return j;
}

double median(const Vector& x) {
    if (x.size() == 0) throw std::invalid_argument("median of an empty vector");
    std::vector<double> v(x.data(), x.data() + x.size());
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    if (n % 2 == 1) return v[n / 2];
    return 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

Binarized binarize(const Vector& x, const BinarizeRule& rule) {
    Binarized b;
    b.cutpoint = rule.kind == BinarizeRule::Kind::median ? median(x) : rule.value;
    b.treated.resize(static_cast<std::size_t>(x.size()));
    std::size_t ones = 0;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        bool t = x[i] > b.cutpoint;
        if (rule.invert) t = !t;
        b.treated[static_cast<std::size_t>(i)] = t ? 1 : 0;
        ones += t ? 1u : 0u;
    }
    if (ones == 0 || ones == b.treated.size())
        throw std::invalid_argument("binarization produced a single class at cutpoint " +
                                    std::to_string(b.cutpoint));
    return b;
}

Vector fit_propensity(const Matrix& z, const std::vector<int>& treated,
                      const PropensityConfig& cfg) {
    if (cfg.clip <= 0.0 || cfg.clip >= 0.5)
        throw std::invalid_argument("propensity clip must lie in (0, 0.5)");
    Vector scores;
    if (z.cols() == 0) {
        // Empty adjustment set: the propensity is the treated share.
        double share = 0.0;
        for (int t : treated) share += t;
        share /= static_cast<double>(treated.size());
        scores = Vector::Constant(static_cast<Eigen::Index>(treated.size()), share);
    } else {
        std::vector<FeatureSpec> specs(static_cast<std::size_t>(z.cols()));
        for (std::size_t j = 0; j < specs.size(); ++j)
            specs[j].name = "z" + std::to_string(j);
        const auto scaler = preprocess::standardize_fit(z, specs);
        const Matrix zs = preprocess::standardize_apply(z, scaler);
        models::LogisticConfig lc;
        lc.learning_rate = cfg.learning_rate;
        lc.epochs = cfg.epochs;
        const auto model = models::fit_logistic(zs, treated, lc);
        scores = model->predict_proba(zs);
    }
    return scores.array().min(1.0 - cfg.clip).max(cfg.clip);
}

double ipw_ate(const Vector& outcome, const std::vector<int>& treated,
               const Vector& propensity, bool hajek) {
    const auto n = static_cast<std::size_t>(outcome.size());
    if (treated.size() != n || static_cast<std::size_t>(propensity.size()) != n)
        throw std::invalid_argument("outcome, treatment and propensity lengths differ");
    if (n == 0) throw std::invalid_argument("empty sample");
    double sum_t = 0.0, sum_c = 0.0, mass_t = 0.0, mass_c = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const auto idx = static_cast<Eigen::Index>(i);
        const double e = propensity[idx];
        if (treated[i] == 1) {
            sum_t += outcome[idx] / e;
            mass_t += 1.0 / e;
        } else {
            sum_c += outcome[idx] / (1.0 - e);
            mass_c += 1.0 / (1.0 - e);
        }
    }
    if (hajek) {
        if (mass_t == 0.0 || mass_c == 0.0)
            throw std::invalid_argument("one arm is empty");
        return sum_t / mass_t - sum_c / mass_c;
    }
    const double dn = static_cast<double>(n);
    return sum_t / dn - sum_c / dn;
}

double regression_ate(const Vector& outcome, const std::vector<int>& treated,
                      const Matrix& z) {
    const auto n = outcome.size();
    if (static_cast<Eigen::Index>(treated.size()) != n ||
        (z.cols() > 0 && z.rows() != n))
        throw std::invalid_argument("outcome, treatment and adjustment lengths differ");
    Matrix a(n, 2 + z.cols());
    a.col(0).setOnes();
    for (Eigen::Index i = 0; i < n; ++i)
        a(i, 1) = static_cast<double>(treated[static_cast<std::size_t>(i)]);
    if (z.cols() > 0) a.rightCols(z.cols()) = z;
    Matrix gram = a.transpose() * a;
    gram.diagonal().array() += 1e-8;
    const Vector sol = gram.ldlt().solve(a.transpose() * outcome);
    return sol[1];
}

RefuterResult data_subset_refuter(
    const std::function<double(const std::vector<std::size_t>&)>& estimate_on_rows,
    std::size_t n_rows, double fraction, int trials, std::uint64_t seed) {
    if (!(fraction > 0.0 && fraction <= 1.0))
        throw std::invalid_argument("fraction must lie in (0, 1]");
    if (trials < 1) throw std::invalid_argument("trials must be positive");
    if (n_rows == 0) throw std::invalid_argument("empty sample");

    RefuterResult r;
    {
        std::vector<std::size_t> all(n_rows);
        std::iota(all.begin(), all.end(), std::size_t{0});
        r.full_estimate = estimate_on_rows(all);
    }
    const auto subset_size = std::max<std::size_t>(
        1, static_cast<std::size_t>(std::llround(fraction * static_cast<double>(n_rows))));
    for (int trial = 0; trial < trials; ++trial) {
        std::vector<std::size_t> order(n_rows);
        std::iota(order.begin(), order.end(), std::size_t{0});
        Rng rng(derive_seed(seed, static_cast<std::uint64_t>(trial)));
        rng.shuffle(order.begin(), order.end());
        std::vector<std::size_t> rows(order.begin(),
                                      order.begin() + static_cast<std::ptrdiff_t>(subset_size));
        std::sort(rows.begin(), rows.end());
        r.subset_estimates.push_back(estimate_on_rows(rows));
    }
    r.mean = std::accumulate(r.subset_estimates.begin(), r.subset_estimates.end(), 0.0) /
             static_cast<double>(r.subset_estimates.size());
    for (double e : r.subset_estimates)
        r.max_abs_deviation = std::max(r.max_abs_deviation, std::abs(e - r.full_estimate));
    return r;
}

std::string interpret_ate(double ate) {
    const long long pct = std::llround(std::abs(ate) * 100.0);
    if (pct == 0) return "changed the probability of churn by ~0%";
    std::ostringstream out;
    out << (ate > 0 ? "increased" : "decreased") << " the probability of churn by ~"
        << pct << "%";
    return out.str();
}

std::vector<CausalEstimate> run_causal_analysis(const LabeledDataset& snapshot,
                                                const Dag& dag,
                                                const std::vector<CausalQuery>& queries,
                                                const CausalOptions& options) {
    snapshot.validate();

    Vector outcome;
    if (snapshot.column_index(options.outcome) >= 0) {
        outcome = snapshot.column(options.outcome);
    } else {
        outcome.resize(snapshot.rows());
        for (Eigen::Index i = 0; i < snapshot.rows(); ++i)
            outcome[i] = static_cast<double>(snapshot.labels[static_cast<std::size_t>(i)]);
    }

    std::vector<CausalEstimate> results;
    for (std::size_t qi = 0; qi < queries.size(); ++qi) {
        const auto& q = queries[qi];
        CausalEstimate est;
        est.name = q.name;
        est.treatment = q.treatment;
        try {
            if (snapshot.column_index(q.treatment) < 0)
                throw std::invalid_argument("snapshot has no column " + q.treatment);
            const auto sets = backdoor_sets(dag, q.treatment, options.outcome);
            // First minimal set whose variables are all observable columns.
            const std::vector<std::string>* chosen = nullptr;
            for (const auto& s : sets) {
                const bool observable =
                    std::all_of(s.begin(), s.end(), [&](const std::string& v) {
                        return snapshot.column_index(v) >= 0;
                    });
                if (observable) {
                    chosen = &s;
                    break;
                }
            }
            if (!chosen) {
                est.status = "not_identified";
                results.push_back(std::move(est));
                continue;
            }
            est.adjustment_set = *chosen;

            const Binarized bin = binarize(snapshot.column(q.treatment), q.rule);
            est.cutpoint = bin.cutpoint;

            Matrix z(snapshot.rows(), static_cast<Eigen::Index>(chosen->size()));
            for (std::size_t j = 0; j < chosen->size(); ++j)
                z.col(static_cast<Eigen::Index>(j)) = snapshot.column((*chosen)[j]);

            const auto estimate_on_rows =
                [&](const std::vector<std::size_t>& rows) -> double {
                Vector y(static_cast<Eigen::Index>(rows.size()));
                Matrix zs(static_cast<Eigen::Index>(rows.size()), z.cols());
                std::vector<int> t(rows.size());
                for (std::size_t k = 0; k < rows.size(); ++k) {
                    const auto src = static_cast<Eigen::Index>(rows[k]);
                    y[static_cast<Eigen::Index>(k)] = outcome[src];
                    zs.row(static_cast<Eigen::Index>(k)) = z.row(src);
                    t[k] = bin.treated[rows[k]];
                }
                if (options.method == EstimationMethod::regression)
                    return regression_ate(y, t, zs);
                const Vector e = fit_propensity(zs, t, options.propensity);
                return ipw_ate(y, t, e, options.hajek);
            };

            const RefuterResult ref = data_subset_refuter(
                estimate_on_rows, static_cast<std::size_t>(snapshot.rows()),
                options.refute_fraction, options.refute_trials,
                derive_seed(options.seed, qi));

            est.ate = ref.full_estimate;
            est.refuter_mean = ref.mean;
            est.refuter_max_deviation = ref.max_abs_deviation;
            est.stable = std::abs(ref.mean - ref.full_estimate) <= options.stability_tolerance;
            est.interpretation = interpret_ate(est.ate);
            est.status = "ok";
        } catch (const std::exception& e) {
            est.status = std::string("failed: ") + e.what();
        }
        results.push_back(std::move(est));
    }
    return results;
}

nlohmann::ordered_json report_to_json(const std::vector<CausalEstimate>& estimates) {
    nlohmann::ordered_json rows = nlohmann::ordered_json::array();
    for (const auto& e : estimates) {
        nlohmann::ordered_json row;
        row["causal_variable"] = e.name;
        if (e.status == "ok") {
            row["estimate_effect"] = e.ate;
            row["data_subset_refuter"] = e.refuter_mean;
            row["probability_of_churn"] = e.interpretation;
        } else {
            row["estimate_effect"] = nullptr;
            row["data_subset_refuter"] = nullptr;
            row["probability_of_churn"] = e.status;
        }
        rows.push_back(row);
    }
    return rows;
}

nlohmann::ordered_json audit_to_json(const std::vector<CausalEstimate>& estimates,
                                     const CausalOptions& options) {
    nlohmann::ordered_json j;
    j["outcome"] = options.outcome;
    j["method"] = options.method == EstimationMethod::ipw ? "ipw" : "regression";
    j["hajek"] = options.hajek;
    j["propensity_clip"] = options.propensity.clip;
    j["refute_fraction"] = options.refute_fraction;
    j["refute_trials"] = options.refute_trials;
    j["stability_tolerance"] = options.stability_tolerance;
    j["seed"] = options.seed;
    j["queries"] = nlohmann::ordered_json::array();
    for (const auto& e : estimates) {
        nlohmann::ordered_json q;
        q["name"] = e.name;
        q["treatment"] = e.treatment;
        q["status"] = e.status;
        q["adjustment_set"] = e.adjustment_set;
        q["cutpoint"] = e.cutpoint;
        q["estimate_effect"] = e.ate;
        q["refuter_mean"] = e.refuter_mean;
        q["refuter_max_deviation"] = e.refuter_max_deviation;
        q["stable"] = e.stable;
        q["interpretation"] = e.interpretation;
        j["queries"].push_back(q);
    }
    return j;
}

} // namespace churnlab::causal
