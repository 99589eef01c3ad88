#pragma once

#include "churnlab/classifier.hpp"
#include "churnlab/nnet.hpp"
#include "churnlab/types.hpp"

#include <json.hpp>

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

namespace churnlab::models {

/*
 * The comparison roster: linear discriminant, logistic regression, gaussian
 * naive bayes, soft and hard voting ensembles, and the two-network ANN
 * ensemble. Every model serialises to JSON and loads back through
 * classifier_from_json.
 */

// Linear scorer w.x + b. With Link::clipped_identity the raw score is
// clamped to [0, 1] to act as a probability (least-squares discriminant);
// with Link::sigmoid it is a logistic regression.
class LinearModel : public Classifier {
public:
    enum class Link { clipped_identity, sigmoid };

    LinearModel(Vector w, double b, Link link)
        : w_(std::move(w)), b_(b), link_(link) {}

    Vector predict_proba(const Matrix& x) const override;
    std::string kind() const override {
        return link_ == Link::sigmoid ? "logistic" : "linear";
    }
    nlohmann::ordered_json to_json() const override;

    const Vector& weights() const { return w_; }
    double bias() const { return b_; }
    Link link() const { return link_; }

private:
    Vector w_;
    double b_ = 0.0;
    Link link_;
};

// Least-squares fit of y in {0,1} on [x, 1] via ridge-stabilised normal
// equations (penalty 1e-8 keeps collinear designs solvable).
std::shared_ptr<LinearModel> fit_linear_discriminant(const Matrix& x,
                                                     const std::vector<int>& labels);

struct LogisticConfig {
    double learning_rate = 0.5;
    int epochs = 500;
};

// Full-batch gradient descent on mean BCE. Deterministic: zero init, fixed
// step, fixed epoch count.
std::shared_ptr<LinearModel> fit_logistic(const Matrix& x, const std::vector<int>& labels,
                                          const LogisticConfig& cfg = {});

class GaussianNb : public Classifier {
public:
    GaussianNb(Vector priors, Matrix means, Matrix variances)
        : priors_(std::move(priors)), means_(std::move(means)),
          variances_(std::move(variances)) {}

    Vector predict_proba(const Matrix& x) const override;
    std::string kind() const override { return "gaussian_nb"; }
    nlohmann::ordered_json to_json() const override;

    const Vector& priors() const { return priors_; }
    const Matrix& means() const { return means_; }      // 2 x d, row = class
    const Matrix& variances() const { return variances_; }

private:
    Vector priors_;
    Matrix means_;
    Matrix variances_;
};

// Per-class feature means and population variances, floored at var_floor.
std::shared_ptr<GaussianNb> fit_gaussian_nb(const Matrix& x, const std::vector<int>& labels,
                                            double var_floor = 1e-9);

// Weighted average of member probabilities.
class SoftVote : public Classifier {
public:
    SoftVote(std::vector<ClassifierPtr> members, std::vector<double> weights = {});

    Vector predict_proba(const Matrix& x) const override;
    std::string kind() const override { return "soft_vote"; }
    nlohmann::ordered_json to_json() const override;

    const std::vector<ClassifierPtr>& members() const { return members_; }

private:
    std::vector<ClassifierPtr> members_;
    std::vector<double> weights_; // normalised to sum 1
};

// Majority vote over member predictions at 0.5. predict_proba reports the
// class-1 vote share; predict breaks exact ties towards class 1, so the
// threshold argument is ignored by design.
class HardVote : public Classifier {
public:
    explicit HardVote(std::vector<ClassifierPtr> members);

    Vector predict_proba(const Matrix& x) const override;
    std::vector<int> predict(const Matrix& x, double threshold = 0.5) const override;
    std::string kind() const override { return "hard_vote"; }
    nlohmann::ordered_json to_json() const override;

    const std::vector<ClassifierPtr>& members() const { return members_; }

private:
    std::vector<ClassifierPtr> members_;
};

// Hyperparameters of one deep ANN: four hidden layers (tanh then relu),
// a shared dropout rate, and the Adam step size.
struct AnnPreset {
    std::vector<int> hidden_widths = {64, 32, 16, 8};
    std::vector<nnet::Activation> hidden_activations = {
        nnet::Activation::tanh, nnet::Activation::relu, nnet::Activation::relu,
        nnet::Activation::relu};
    double dropout = 0.2;
    double learning_rate = 0.000474718;
    int epochs = 100;
    int batch_size = 512;
};

AnnPreset deep_ann_1(); // dropout 0.2, learning rate 0.000474718
AnnPreset deep_ann_2(); // dropout 0.4, learning rate 0.000012

std::vector<nnet::LayerSpec> preset_layers(const AnnPreset& preset);

AnnPreset preset_from_json(const nlohmann::ordered_json& j);
nlohmann::ordered_json preset_to_json(const AnnPreset& preset);

// Trains both presets on the same data with the same seed and averages
// their probabilities. With identical presets the ensemble reproduces a
// single network exactly; distinct presets are what make the members
// disagree.
std::shared_ptr<SoftVote> ensemble_ann(const Matrix& x, const std::vector<int>& labels,
                                       const AnnPreset& preset_1, const AnnPreset& preset_2,
                                       std::uint64_t seed);

ClassifierPtr classifier_from_json(const nlohmann::ordered_json& j);

} // namespace churnlab::models
