#include "churnlab/featsel.hpp"
#include "churnlab/rng.hpp"
#include "churnlab/types.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

using namespace churnlab;

namespace {

LabeledDataset make_ds(const Matrix& x, const std::vector<int>& labels) {
    LabeledDataset ds;
    ds.features = x;
    ds.labels = labels;
    for (Eigen::Index c = 0; c < x.cols(); ++c)
        ds.specs.push_back({"f" + std::to_string(c), FeatureKind::numeric, {}});
    return ds;
}

// Standardized noise features plus two strong signal columns.
LabeledDataset signal_and_noise(int n, int noise_cols, std::uint64_t seed) {
    Rng r(seed);
    Matrix x(n, 2 + noise_cols);
    std::vector<int> labels(n);
    for (int i = 0; i < n; ++i) {
        for (int c = 0; c < 2 + noise_cols; ++c) x(i, c) = r.gaussian();
        double eta = 2.5 * x(i, 0) - 2.0 * x(i, 1);
        labels[i] = r.uniform() < 1.0 / (1.0 + std::exp(-eta)) ? 1 : 0;
    }
    return make_ds(x, labels);
}

} // namespace

TEST_CASE("least squares trainer recovers a noiseless linear rule") {
    // labels are a deterministic linear threshold the fit can match exactly
    // in the least-squares sense; frozen coefficient values from the normal
    // equations.
    Matrix x(5, 2);
    x << 0, 0, 1, 0, 0, 1, 1, 1, 2, 1;
    std::vector<int> y = {0, 1, 0, 1, 1};
    auto fit = featsel::least_squares_trainer(x, y);
    CHECK(fit.weights(0) == doctest::Approx(0.599999997733).epsilon(1e-9));
    CHECK(fit.weights(1) == doctest::Approx(-0.133333330089).epsilon(1e-9));
    CHECK(fit.bias == doctest::Approx(0.199999999467).epsilon(1e-9));
    // Hessian diagonal of the mean squared error: (2/n) sum x^2.
    CHECK(fit.hessian_diag(0) == doctest::Approx(2.0 / 5.0 * 6.0).epsilon(1e-12));
    CHECK(fit.hessian_diag(1) == doctest::Approx(2.0 / 5.0 * 3.0).epsilon(1e-12));
}

TEST_CASE("saliency is half the hessian-weighted squared weight") {
    Vector w(3), h(3);
    w << 2, -3, 0.5;
    h << 1, 2, 4;
    auto s = featsel::saliency(w, h);
    CHECK(s(0) == doctest::Approx(0.5 * 1 * 4).epsilon(1e-15));
    CHECK(s(1) == doctest::Approx(0.5 * 2 * 9).epsilon(1e-15));
    CHECK(s(2) == doctest::Approx(0.5 * 4 * 0.25).epsilon(1e-15));
    auto sq = featsel::squared_weight_saliency(w);
    CHECK(sq(1) == 9.0);
}

TEST_CASE("rfe keeps the informative columns") {
    int kept_both = 0;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        auto ds = signal_and_noise(400, 8, 1000 + seed);
        auto res = featsel::rfe(ds, 2);
        bool has0 = std::find(res.kept.begin(), res.kept.end(), "f0") != res.kept.end();
        bool has1 = std::find(res.kept.begin(), res.kept.end(), "f1") != res.kept.end();
        kept_both += (has0 && has1) ? 1 : 0;
    }
    CHECK(kept_both >= 19);
}

TEST_CASE("rfe with step one matches a literal re-fit loop") {
    auto ds = signal_and_noise(150, 4, 99);
    auto res = featsel::rfe(ds, 2, 1);

    // Independent reimplementation: refit, drop the single lowest-saliency
    // column (ties drop the rightmost), repeat.
    std::vector<int> alive(ds.cols());
    for (int c = 0; c < (int)alive.size(); ++c) alive[c] = c;
    std::vector<std::string> order;
    while (alive.size() > 2) {
        Matrix sub(ds.rows(), alive.size());
        for (std::size_t c = 0; c < alive.size(); ++c) sub.col(c) = ds.features.col(alive[c]);
        auto fit = featsel::least_squares_trainer(sub, ds.labels);
        auto sal = featsel::saliency(fit.weights, fit.hessian_diag);
        std::size_t worst = 0;
        for (std::size_t c = 1; c < alive.size(); ++c)
            if (sal(c) <= sal(worst)) worst = c;
        order.push_back(ds.specs[alive[worst]].name);
        alive.erase(alive.begin() + worst);
    }
    CHECK(res.elimination_order == order);
    std::vector<std::string> kept;
    for (int c : alive) kept.push_back(ds.specs[c].name);
    CHECK(res.kept == kept);
    CHECK(res.reduced.cols() == 2);
}

TEST_CASE("rfe never removes past the target and records its iterations") {
    auto ds = signal_and_noise(120, 6, 7); // 8 columns
    auto res = featsel::rfe(ds, 3, 3);
    CHECK(res.kept.size() == 3);
    // 8 -> 5 -> 3: the final round is clipped to remaining - n_keep.
    REQUIRE(res.iterations.size() == 2);
    CHECK(res.iterations[0].removed.size() == 3);
    CHECK(res.iterations[1].removed.size() == 2);
    CHECK(res.elimination_order.size() == 5);

    CHECK_THROWS(featsel::rfe(ds, 0));
    CHECK_THROWS(featsel::rfe(ds, 9));
}

TEST_CASE("select_columns projects by name in the given order") {
    Matrix x(2, 3);
    x << 1, 2, 3, 4, 5, 6;
    auto ds = make_ds(x, {0, 1});
    auto out = featsel::select_columns(ds, {"f2", "f0"});
    REQUIRE(out.cols() == 2);
    CHECK(out.specs[0].name == "f2");
    CHECK(out.features(0, 0) == 3);
    CHECK(out.features(1, 1) == 4);
    CHECK_THROWS(featsel::select_columns(ds, {"missing"}));
}
