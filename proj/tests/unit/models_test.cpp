#include "churnlab/models.hpp"
#include "churnlab/rng.hpp"

#include <doctest.h>

#include <cmath>
#include <memory>
#include <vector>

using namespace churnlab;
using namespace churnlab::models;

TEST_CASE("linear discriminant solves the normal equations") {
    Matrix x(5, 2);
    x << 0, 0, 1, 0, 0, 1, 1, 1, 2, 1;
    std::vector<int> y = {0, 1, 0, 1, 1};
    auto m = fit_linear_discriminant(x, y);
    CHECK(m->weights()(0) == doctest::Approx(0.599999997733).epsilon(1e-9));
    CHECK(m->weights()(1) == doctest::Approx(-0.133333330089).epsilon(1e-9));
    CHECK(m->bias() == doctest::Approx(0.199999999467).epsilon(1e-9));
    CHECK(m->kind() == "linear");

    // Raw scores clamp into [0, 1] to act as probabilities.
    Matrix far(2, 2);
    far << 100, 0, -100, 0;
    auto p = m->predict_proba(far);
    CHECK(p(0) == 1.0);
    CHECK(p(1) == 0.0);
}

TEST_CASE("logistic regression separates and stays deterministic") {
    Matrix x(8, 1);
    x << -4, -3, -2, -1, 1, 2, 3, 4;
    std::vector<int> y = {0, 0, 0, 0, 1, 1, 1, 1};
    auto a = fit_logistic(x, y);
    auto b = fit_logistic(x, y);
    CHECK(a->weights()(0) > 0.0);
    CHECK(a->weights()(0) == b->weights()(0));
    CHECK(a->kind() == "logistic");

    auto p = a->predict_proba(x);
    for (int i = 1; i < 8; ++i) CHECK(p(i) > p(i - 1)); // monotone in x
    CHECK(p(0) < 0.5);
    CHECK(p(7) > 0.5);
}

TEST_CASE("gaussian naive bayes estimates per-class moments") {
    Matrix x(5, 1);
    x << 1, 2, 3, 10, 14;
    std::vector<int> y = {0, 0, 0, 1, 1};
    auto nb = fit_gaussian_nb(x, y);
    CHECK(nb->priors()(0) == doctest::Approx(0.6).epsilon(1e-15));
    CHECK(nb->priors()(1) == doctest::Approx(0.4).epsilon(1e-15));
    CHECK(nb->means()(0, 0) == doctest::Approx(2.0).epsilon(1e-15));
    CHECK(nb->means()(1, 0) == doctest::Approx(12.0).epsilon(1e-15));
    // Population variances.
    CHECK(nb->variances()(0, 0) == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
    CHECK(nb->variances()(1, 0) == doctest::Approx(4.0).epsilon(1e-12));
}

TEST_CASE("naive bayes posterior matches the closed form") {
    // Priors 1/2, class 0 ~ N(0,1), class 1 ~ N(2,4), queried at 0.6.
    Vector priors(2);
    priors << 0.5, 0.5;
    Matrix means(2, 1), vars(2, 1);
    means << 0, 2;
    vars << 1, 4;
    GaussianNb nb(priors, means, vars);
    Matrix q(1, 1);
    q << 0.6;
    CHECK(nb.predict_proba(q)(0) == doctest::Approx(0.31904866846328661).epsilon(1e-12));
}

TEST_CASE("skewed priors shift the naive bayes decision boundary") {
    // Unit variances at means -1 and +1 with priors 9:1 move the boundary
    // from 0 to ln(9)/2.
    Vector priors(2);
    priors << 0.9, 0.1;
    Matrix means(2, 1), vars(2, 1);
    means << -1, 1;
    vars << 1, 1;
    GaussianNb nb(priors, means, vars);

    const double boundary = std::log(9.0) / 2.0;
    Matrix q(3, 1);
    q << boundary - 1e-6, boundary, boundary + 1e-6;
    auto p = nb.predict_proba(q);
    CHECK(p(0) < 0.5);
    CHECK(p(1) == doctest::Approx(0.5).epsilon(1e-9));
    CHECK(p(2) > 0.5);
}

TEST_CASE("soft vote averages member probabilities") {
    Vector w1(1), w2(1);
    w1 << 10.0;
    w2 << -10.0;
    auto a = std::make_shared<LinearModel>(w1, 0.0, LinearModel::Link::sigmoid);
    auto b = std::make_shared<LinearModel>(w2, 0.0, LinearModel::Link::sigmoid);
    SoftVote vote({a, b});

    Matrix x(1, 1);
    x << 0.31;
    const double pa = a->predict_proba(x)(0), pb = b->predict_proba(x)(0);
    CHECK(vote.predict_proba(x)(0) == doctest::Approx((pa + pb) / 2.0).epsilon(1e-15));

    SoftVote weighted({a, b}, {3.0, 1.0});
    CHECK(weighted.predict_proba(x)(0) ==
          doctest::Approx(0.75 * pa + 0.25 * pb).epsilon(1e-15));
}

TEST_CASE("hard vote reports vote shares and breaks ties towards churn") {
    Vector up(1), down(1);
    up << 0.0;
    down << 0.0;
    auto yes = std::make_shared<LinearModel>(up, 5.0, LinearModel::Link::sigmoid);
    auto no = std::make_shared<LinearModel>(down, -5.0, LinearModel::Link::sigmoid);

    Matrix x(1, 1);
    x << 0.0;
    HardVote split({yes, no});
    CHECK(split.predict_proba(x)(0) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(split.predict(x)[0] == 1); // exact tie goes to class 1

    HardVote majority({yes, yes, no});
    CHECK(majority.predict_proba(x)(0) == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
    CHECK(majority.predict(x)[0] == 1);
}

TEST_CASE("the two deep presets carry their published hyperparameters") {
    auto p1 = deep_ann_1();
    CHECK(p1.hidden_widths == std::vector<int>{64, 32, 16, 8});
    CHECK(p1.dropout == 0.2);
    CHECK(p1.learning_rate == doctest::Approx(0.000474718).epsilon(1e-12));

    auto p2 = deep_ann_2();
    CHECK(p2.dropout == 0.4);
    CHECK(p2.learning_rate == doctest::Approx(0.000012).epsilon(1e-12));

    auto layers = preset_layers(p1);
    REQUIRE(layers.size() == 5);
    CHECK(layers[0].activation == nnet::Activation::tanh);
    CHECK(layers[1].activation == nnet::Activation::relu);
    CHECK(layers[4].width == 1);
    CHECK(layers[4].activation == nnet::Activation::sigmoid);
    CHECK(layers[4].dropout == 0.0);
    CHECK(layers[0].dropout == 0.2);
}

TEST_CASE("preset json tolerates partial overrides") {
    nlohmann::ordered_json j = {{"epochs", 7}, {"dropout", 0.0}};
    auto p = preset_from_json(j);
    CHECK(p.epochs == 7);
    CHECK(p.dropout == 0.0);
    CHECK(p.hidden_widths == std::vector<int>{64, 32, 16, 8}); // untouched default
}

TEST_CASE("the ann ensemble is a soft vote over both presets") {
    Rng r(12);
    Matrix x(60, 2);
    std::vector<int> y;
    for (int i = 0; i < 60; ++i) {
        const int cls = i % 2;
        x(i, 0) = (cls ? 1.5 : -1.5) + 0.4 * r.gaussian();
        x(i, 1) = r.gaussian();
        y.push_back(cls);
    }
    auto small = deep_ann_1();
    small.hidden_widths = {8, 4, 4, 4};
    small.epochs = 30;
    small.batch_size = 16;
    small.learning_rate = 0.01;
    small.dropout = 0.0;
    auto small2 = small;
    small2.learning_rate = 0.005;

    auto ens = ensemble_ann(x, y, small, small2, 42);
    REQUIRE(ens->members().size() == 2);
    auto p = ens->predict_proba(x);
    auto p0 = ens->members()[0]->predict_proba(x);
    auto p1 = ens->members()[1]->predict_proba(x);
    CHECK((p - (p0 + p1) / 2.0).cwiseAbs().maxCoeff() < 1e-15);

    // Round trip through json preserves the scores exactly.
    auto back = classifier_from_json(ens->to_json());
    CHECK(back->kind() == "soft_vote");
    CHECK((back->predict_proba(x) - p).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("every classifier kind loads back through classifier_from_json") {
    Matrix x(6, 1);
    x << -2, -1, -0.5, 0.5, 1, 2;
    std::vector<int> y = {0, 0, 0, 1, 1, 1};

    std::vector<ClassifierPtr> zoo = {fit_linear_discriminant(x, y), fit_logistic(x, y),
                                      fit_gaussian_nb(x, y)};
    zoo.push_back(std::make_shared<SoftVote>(std::vector<ClassifierPtr>{zoo[0], zoo[1]}));
    zoo.push_back(std::make_shared<HardVote>(std::vector<ClassifierPtr>{zoo[0], zoo[1]}));

    for (const auto& model : zoo) {
        auto copy = classifier_from_json(model->to_json());
        CHECK(copy->kind() == model->kind());
        CHECK((copy->predict_proba(x) - model->predict_proba(x)).cwiseAbs().maxCoeff() == 0.0);
    }
}
