#include "churnlab/models.hpp"

#include "churnlab/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace churnlab::models {

namespace {

constexpr double kRidge = 1e-8;

void check_training_input(const Matrix& x, const std::vector<int>& labels) {
    if (x.rows() == 0) throw std::invalid_argument("empty training set");
    if (static_cast<std::size_t>(x.rows()) != labels.size())
        throw std::invalid_argument("row and label counts differ");
    for (int y : labels) {
        if (y != 0 && y != 1) throw std::invalid_argument("labels must be 0 or 1");
    }
}

Vector labels_to_vector(const std::vector<int>& labels) {
    Vector y(static_cast<Eigen::Index>(labels.size()));
    for (std::size_t i = 0; i < labels.size(); ++i)
        y[static_cast<Eigen::Index>(i)] = static_cast<double>(labels[i]);
    return y;
}

nlohmann::ordered_json vector_to_json(const Vector& v) {
    nlohmann::ordered_json a = nlohmann::ordered_json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
    return a;
}

Vector vector_from_json(const nlohmann::ordered_json& a) {
    Vector v(static_cast<Eigen::Index>(a.size()));
    Eigen::Index i = 0;
    for (const auto& x : a) v[i++] = x.get<double>();
    return v;
}

} // namespace

Vector LinearModel::predict_proba(const Matrix& x) const {
    Vector s = (x * w_).array() + b_;
    if (link_ == Link::sigmoid) return 1.0 / (1.0 + (-s.array()).exp());
    return s.array().min(1.0).max(0.0);
}

nlohmann::ordered_json LinearModel::to_json() const {
    nlohmann::ordered_json j;
    j["kind"] = kind();
    j["w"] = vector_to_json(w_);
    j["b"] = b_;
    return j;
}

std::shared_ptr<LinearModel> fit_linear_discriminant(const Matrix& x,
                                                     const std::vector<int>& labels) {
    check_training_input(x, labels);
    const Eigen::Index d = x.cols();
    Matrix a(x.rows(), d + 1);
    a.leftCols(d) = x;
    a.col(d).setOnes();
    Matrix gram = a.transpose() * a;
    gram.diagonal().array() += kRidge;
    const Vector rhs = a.transpose() * labels_to_vector(labels);
    const Vector sol = gram.ldlt().solve(rhs);
    return std::make_shared<LinearModel>(sol.head(d), sol[d],
                                         LinearModel::Link::clipped_identity);
}

std::shared_ptr<LinearModel> fit_logistic(const Matrix& x, const std::vector<int>& labels,
                                          const LogisticConfig& cfg) {
    check_training_input(x, labels);
    if (cfg.epochs <= 0) throw std::invalid_argument("epochs must be positive");
    const Vector y = labels_to_vector(labels);
    const double n = static_cast<double>(x.rows());
    Vector w = Vector::Zero(x.cols());
    double b = 0.0;
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        Vector s = (x * w).array() + b;
        const Vector p = 1.0 / (1.0 + (-s.array()).exp());
        const Vector resid = (p - y) / n;
        w -= cfg.learning_rate * (x.transpose() * resid);
        b -= cfg.learning_rate * resid.sum();
        if (!w.allFinite() || !std::isfinite(b))
            throw std::runtime_error("logistic fit diverged at epoch " +
                                     std::to_string(epoch));
    }
    return std::make_shared<LinearModel>(std::move(w), b, LinearModel::Link::sigmoid);
}

Vector GaussianNb::predict_proba(const Matrix& x) const {
    Vector out(x.rows());
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
        double log_post[2];
        for (int c = 0; c < 2; ++c) {
            double lp = std::log(priors_[c]);
            for (Eigen::Index j = 0; j < x.cols(); ++j) {
                const double var = variances_(c, j);
                const double diff = x(i, j) - means_(c, j);
                lp += -0.5 * std::log(2.0 * kPi * var) - diff * diff / (2.0 * var);
            }
            log_post[c] = lp;
        }
        const double m = std::max(log_post[0], log_post[1]);
        const double e0 = std::exp(log_post[0] - m);
        const double e1 = std::exp(log_post[1] - m);
        out[i] = e1 / (e0 + e1);
    }
    return out;
}

nlohmann::ordered_json GaussianNb::to_json() const {
    nlohmann::ordered_json j;
    j["kind"] = "gaussian_nb";
    j["priors"] = vector_to_json(priors_);
    j["means"] = nlohmann::ordered_json::array();
    j["variances"] = nlohmann::ordered_json::array();
    for (int c = 0; c < 2; ++c) {
        j["means"].push_back(vector_to_json(means_.row(c)));
        j["variances"].push_back(vector_to_json(variances_.row(c)));
    }
    return j;
}

std::shared_ptr<GaussianNb> fit_gaussian_nb(const Matrix& x, const std::vector<int>& labels,
                                            double var_floor) {
    check_training_input(x, labels);
    std::vector<std::size_t> counts(2, 0);
    for (int y : labels) ++counts[static_cast<std::size_t>(y)];
    if (counts[0] == 0 || counts[1] == 0)
        throw std::invalid_argument("gaussian naive bayes needs both classes");

    Matrix means = Matrix::Zero(2, x.cols());
    for (Eigen::Index i = 0; i < x.rows(); ++i)
        means.row(labels[static_cast<std::size_t>(i)]) += x.row(i);
    for (int c = 0; c < 2; ++c) means.row(c) /= static_cast<double>(counts[static_cast<std::size_t>(c)]);

    Matrix vars = Matrix::Zero(2, x.cols());
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
        const int c = labels[static_cast<std::size_t>(i)];
        vars.row(c) += (x.row(i) - means.row(c)).array().square().matrix();
    }
    for (int c = 0; c < 2; ++c) {
        vars.row(c) /= static_cast<double>(counts[static_cast<std::size_t>(c)]);
        vars.row(c) = vars.row(c).array().max(var_floor);
    }

    Vector priors(2);
    priors[0] = static_cast<double>(counts[0]) / static_cast<double>(labels.size());
    priors[1] = static_cast<double>(counts[1]) / static_cast<double>(labels.size());
    return std::make_shared<GaussianNb>(std::move(priors), std::move(means),
                                        std::move(vars));
}

SoftVote::SoftVote(std::vector<ClassifierPtr> members, std::vector<double> weights)
    : members_(std::move(members)), weights_(std::move(weights)) {
    if (members_.empty()) throw std::invalid_argument("ensemble needs members");
    if (weights_.empty()) weights_.assign(members_.size(), 1.0);
    if (weights_.size() != members_.size())
        throw std::invalid_argument("weight count does not match member count");
    double total = 0.0;
    for (double w : weights_) {
        if (w < 0.0) throw std::invalid_argument("weights must be nonnegative");
        total += w;
    }
    if (total == 0.0) throw std::invalid_argument("weights must not all be zero");
    for (double& w : weights_) w /= total;
}

Vector SoftVote::predict_proba(const Matrix& x) const {
    Vector p = Vector::Zero(x.rows());
    for (std::size_t m = 0; m < members_.size(); ++m)
        p += weights_[m] * members_[m]->predict_proba(x);
    return p;
}

nlohmann::ordered_json SoftVote::to_json() const {
    nlohmann::ordered_json j;
    j["kind"] = "soft_vote";
    j["weights"] = weights_;
    j["members"] = nlohmann::ordered_json::array();
    for (const auto& m : members_) j["members"].push_back(m->to_json());
    return j;
}

HardVote::HardVote(std::vector<ClassifierPtr> members) : members_(std::move(members)) {
    if (members_.empty()) throw std::invalid_argument("ensemble needs members");
}

Vector HardVote::predict_proba(const Matrix& x) const {
    Vector share = Vector::Zero(x.rows());
    for (const auto& m : members_) {
        const auto votes = m->predict(x, 0.5);
        for (Eigen::Index i = 0; i < x.rows(); ++i)
            share[i] += static_cast<double>(votes[static_cast<std::size_t>(i)]);
    }
    return share / static_cast<double>(members_.size());
}

std::vector<int> HardVote::predict(const Matrix& x, double) const {
    const Vector share = predict_proba(x);
    std::vector<int> out(static_cast<std::size_t>(x.rows()));
    for (Eigen::Index i = 0; i < x.rows(); ++i)
        out[static_cast<std::size_t>(i)] = share[i] >= 0.5 ? 1 : 0;
    return out;
}

nlohmann::ordered_json HardVote::to_json() const {
    nlohmann::ordered_json j;
    j["kind"] = "hard_vote";
    j["members"] = nlohmann::ordered_json::array();
    for (const auto& m : members_) j["members"].push_back(m->to_json());
    return j;
}

AnnPreset deep_ann_1() { return AnnPreset{}; }

AnnPreset deep_ann_2() {
    AnnPreset p;
    p.dropout = 0.4;
    p.learning_rate = 0.000012;
    return p;
}

std::vector<nnet::LayerSpec> preset_layers(const AnnPreset& preset) {
    if (preset.hidden_widths.size() != preset.hidden_activations.size())
        throw std::invalid_argument("hidden widths and activations differ in length");
    std::vector<nnet::LayerSpec> layers;
    for (std::size_t i = 0; i < preset.hidden_widths.size(); ++i)
        layers.push_back({preset.hidden_widths[i], preset.hidden_activations[i],
                          preset.dropout});
    layers.push_back({1, nnet::Activation::sigmoid, 0.0});
    return layers;
}

nlohmann::ordered_json preset_to_json(const AnnPreset& p) {
    nlohmann::ordered_json j;
    j["hidden_widths"] = p.hidden_widths;
    j["hidden_activations"] = nlohmann::ordered_json::array();
    for (auto a : p.hidden_activations) j["hidden_activations"].push_back(nnet::activation_name(a));
    j["dropout"] = p.dropout;
    j["learning_rate"] = p.learning_rate;
    j["epochs"] = p.epochs;
    j["batch_size"] = p.batch_size;
    return j;
}

AnnPreset preset_from_json(const nlohmann::ordered_json& j) {
    AnnPreset p;
    if (j.contains("hidden_widths")) p.hidden_widths = j.at("hidden_widths").get<std::vector<int>>();
    if (j.contains("hidden_activations")) {
        p.hidden_activations.clear();
        for (const auto& a : j.at("hidden_activations"))
            p.hidden_activations.push_back(nnet::activation_from_string(a.get<std::string>()));
    }
    if (j.contains("dropout")) p.dropout = j.at("dropout").get<double>();
    if (j.contains("learning_rate")) p.learning_rate = j.at("learning_rate").get<double>();
    if (j.contains("epochs")) p.epochs = j.at("epochs").get<int>();
    if (j.contains("batch_size")) p.batch_size = j.at("batch_size").get<int>();
    return p;
}

std::shared_ptr<SoftVote> ensemble_ann(const Matrix& x, const std::vector<int>& labels,
                                       const AnnPreset& preset_1, const AnnPreset& preset_2,
                                       std::uint64_t seed) {
    std::vector<ClassifierPtr> members;
    for (const AnnPreset* preset : {&preset_1, &preset_2}) {
        nnet::TrainConfig cfg;
        cfg.adam.learning_rate = preset->learning_rate;
        cfg.epochs = preset->epochs;
        cfg.batch_size = preset->batch_size;
        cfg.seed = seed;
        members.push_back(nnet::train(x, labels, preset_layers(*preset), cfg));
    }
    return std::make_shared<SoftVote>(std::move(members));
}

ClassifierPtr classifier_from_json(const nlohmann::ordered_json& j) {
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "network") return nnet::NetworkClassifier::from_json(j);
    if (kind == "linear" || kind == "logistic") {
        return std::make_shared<LinearModel>(
            vector_from_json(j.at("w")), j.at("b").get<double>(),
            kind == "logistic" ? LinearModel::Link::sigmoid
                               : LinearModel::Link::clipped_identity);
    }
    if (kind == "gaussian_nb") {
        const Vector priors = vector_from_json(j.at("priors"));
        const auto& mj = j.at("means");
        const auto& vj = j.at("variances");
        Matrix means(2, static_cast<Eigen::Index>(mj[0].size()));
        Matrix vars(2, static_cast<Eigen::Index>(vj[0].size()));
        for (int c = 0; c < 2; ++c) {
            means.row(c) = vector_from_json(mj[static_cast<std::size_t>(c)]).transpose();
            vars.row(c) = vector_from_json(vj[static_cast<std::size_t>(c)]).transpose();
        }
        return std::make_shared<GaussianNb>(priors, means, vars);
    }
    if (kind == "soft_vote" || kind == "hard_vote") {
        std::vector<ClassifierPtr> members;
        for (const auto& mj : j.at("members")) members.push_back(classifier_from_json(mj));
        if (kind == "hard_vote") return std::make_shared<HardVote>(std::move(members));
        std::vector<double> weights;
        if (j.contains("weights")) weights = j.at("weights").get<std::vector<double>>();
        return std::make_shared<SoftVote>(std::move(members), std::move(weights));
    }
    throw std::invalid_argument("unknown classifier kind: " + kind);
}

} // namespace churnlab::models
