#include "churnlab/nnet.hpp"

#include "churnlab/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace churnlab::nnet {

namespace {

constexpr std::uint64_t kInitStream = 0x10000;
constexpr std::uint64_t kShuffleStream = 0x20000;
constexpr std::uint64_t kMaskStream = 0x30000;
constexpr double kProbClip = 1e-12;

void check_layers(const std::vector<LayerSpec>& layers) {
    if (layers.empty()) throw std::invalid_argument("network needs at least one layer");
    for (const auto& l : layers) {
        if (l.width <= 0) throw std::invalid_argument("layer width must be positive");
        if (l.dropout < 0.0 || l.dropout >= 1.0)
            throw std::invalid_argument("dropout must lie in [0, 1)");
    }
    const auto& out = layers.back();
    if (out.width != 1 || out.activation != Activation::sigmoid || out.dropout != 0.0)
        throw std::invalid_argument(
            "output layer must be a single sigmoid unit without dropout");
}

Matrix activate(const Matrix& z, Activation a) {
    switch (a) {
        case Activation::tanh: return z.array().tanh();
        case Activation::relu: return z.array().max(0.0);
        case Activation::sigmoid: return (1.0 / (1.0 + (-z.array()).exp()));
    }
    throw std::invalid_argument("unknown activation");
}

// Derivative expressed through the activation value itself.
Matrix activate_grad(const Matrix& value, Activation a) {
    switch (a) {
        case Activation::tanh: return 1.0 - value.array().square();
        case Activation::relu: return (value.array() > 0.0).cast<double>();
        case Activation::sigmoid: return value.array() * (1.0 - value.array());
    }
    throw std::invalid_argument("unknown activation");
}

} // namespace

Activation activation_from_string(const std::string& s) {
    if (s == "tanh") return Activation::tanh;
    if (s == "relu") return Activation::relu;
    if (s == "sigmoid") return Activation::sigmoid;
    throw std::invalid_argument("unknown activation: " + s);
}

std::string activation_name(Activation a) {
    switch (a) {
        case Activation::tanh: return "tanh";
        case Activation::relu: return "relu";
        case Activation::sigmoid: return "sigmoid";
    }
    throw std::invalid_argument("unknown activation");
}

NetworkParams glorot_init(int input_dim, const std::vector<LayerSpec>& layers,
                          std::uint64_t seed) {
    check_layers(layers);
    if (input_dim <= 0) throw std::invalid_argument("input_dim must be positive");
    NetworkParams p;
    int fan_in = input_dim;
    for (std::size_t l = 0; l < layers.size(); ++l) {
        const int fan_out = layers[l].width;
        const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
        Matrix w(fan_out, fan_in);
        Rng rng(derive_seed(seed, kInitStream + l));
        for (Eigen::Index i = 0; i < w.rows(); ++i)
            for (Eigen::Index j = 0; j < w.cols(); ++j)
                w(i, j) = rng.uniform(-limit, limit);
        p.weights.push_back(std::move(w));
        p.biases.push_back(Vector::Zero(fan_out));
        fan_in = fan_out;
    }
    return p;
}

ForwardResult forward(const NetworkParams& params, const std::vector<LayerSpec>& layers,
                      const Matrix& batch, Mode mode, std::uint64_t mask_seed) {
    check_layers(layers);
    if (params.weights.size() != layers.size())
        throw std::invalid_argument("parameter count does not match layer count");
    ForwardResult r;
    r.pre.resize(layers.size());
    r.post.resize(layers.size());
    r.masks.resize(layers.size());
    const Matrix* input = &batch;
    for (std::size_t l = 0; l < layers.size(); ++l) {
        Matrix z = (*input) * params.weights[l].transpose();
        z.rowwise() += params.biases[l].transpose();
        r.pre[l] = activate(z, layers[l].activation);
        if (mode == Mode::train && layers[l].dropout > 0.0) {
            const double keep = 1.0 - layers[l].dropout;
            Rng rng(derive_seed(mask_seed, kMaskStream + l));
            Matrix mask(r.pre[l].rows(), r.pre[l].cols());
            for (Eigen::Index i = 0; i < mask.rows(); ++i)
                for (Eigen::Index j = 0; j < mask.cols(); ++j)
                    mask(i, j) = rng.uniform() < keep ? 1.0 / keep : 0.0;
            r.masks[l] = std::move(mask);
            r.post[l] = r.pre[l].cwiseProduct(r.masks[l]);
        } else {
            r.post[l] = r.pre[l];
        }
        input = &r.post[l];
    }
    return r;
}

double bce_loss(const Vector& probabilities, const std::vector<int>& labels) {
    if (static_cast<std::size_t>(probabilities.size()) != labels.size())
        throw std::invalid_argument("probability and label counts differ");
    if (labels.empty()) throw std::invalid_argument("empty batch");
    double loss = 0.0;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        const double p = std::clamp(probabilities[static_cast<Eigen::Index>(i)],
                                    kProbClip, 1.0 - kProbClip);
        loss += labels[i] == 1 ? -std::log(p) : -std::log(1.0 - p);
    }
    return loss / static_cast<double>(labels.size());
}

Gradients backward(const NetworkParams& params, const std::vector<LayerSpec>& layers,
                   const Matrix& batch, const std::vector<int>& labels,
                   const ForwardResult& fwd) {
    const auto n = static_cast<Eigen::Index>(labels.size());
    if (batch.rows() != n) throw std::invalid_argument("batch and label counts differ");
    const std::size_t L = layers.size();

    Gradients g;
    g.weights.resize(L);
    g.biases.resize(L);

    // dZ for the sigmoid output under mean BCE is (p - y) / n.
    Matrix dz = fwd.post[L - 1];
    for (Eigen::Index i = 0; i < n; ++i)
        dz(i, 0) -= static_cast<double>(labels[static_cast<std::size_t>(i)]);
    dz /= static_cast<double>(n);

    for (std::size_t l = L; l-- > 0;) {
        const Matrix& layer_input = l == 0 ? batch : fwd.post[l - 1];
        g.weights[l] = dz.transpose() * layer_input;
        g.biases[l] = dz.colwise().sum().transpose();
        if (l == 0) break;
        Matrix da = dz * params.weights[l];
        if (fwd.masks[l - 1].size() != 0) da = da.cwiseProduct(fwd.masks[l - 1]);
        dz = da.cwiseProduct(activate_grad(fwd.pre[l - 1], layers[l - 1].activation));
    }
    return g;
}

AdamState AdamState::like(const NetworkParams& params) {
    AdamState s;
    for (const auto& w : params.weights) {
        s.m_w.push_back(Matrix::Zero(w.rows(), w.cols()));
        s.v_w.push_back(Matrix::Zero(w.rows(), w.cols()));
    }
    for (const auto& b : params.biases) {
        s.m_b.push_back(Vector::Zero(b.size()));
        s.v_b.push_back(Vector::Zero(b.size()));
    }
    return s;
}

void adam_update(NetworkParams& params, const Gradients& grads, AdamState& state,
                 const AdamConfig& cfg) {
    state.step += 1;
    const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.step));
    const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.step));
    for (std::size_t l = 0; l < params.weights.size(); ++l) {
        state.m_w[l] = cfg.beta1 * state.m_w[l] + (1.0 - cfg.beta1) * grads.weights[l];
        state.v_w[l] = cfg.beta2 * state.v_w[l].array().matrix() +
                       (1.0 - cfg.beta2) * grads.weights[l].array().square().matrix();
        const Matrix m_hat = state.m_w[l] / bc1;
        const Matrix v_hat = state.v_w[l] / bc2;
        params.weights[l].array() -=
            cfg.learning_rate * m_hat.array() / (v_hat.array().sqrt() + cfg.epsilon);

        state.m_b[l] = cfg.beta1 * state.m_b[l] + (1.0 - cfg.beta1) * grads.biases[l];
        state.v_b[l] = cfg.beta2 * state.v_b[l].array().matrix() +
                       (1.0 - cfg.beta2) * grads.biases[l].array().square().matrix();
        const Vector mb_hat = state.m_b[l] / bc1;
        const Vector vb_hat = state.v_b[l] / bc2;
        params.biases[l].array() -=
            cfg.learning_rate * mb_hat.array() / (vb_hat.array().sqrt() + cfg.epsilon);
    }
}

Vector NetworkClassifier::predict_proba(const Matrix& x) const {
    return forward(params_, layers_, x, Mode::infer).probabilities();
}

nlohmann::ordered_json NetworkClassifier::to_json() const {
    nlohmann::ordered_json j;
    j["kind"] = "network";
    j["layers"] = nlohmann::ordered_json::array();
    for (const auto& l : layers_) {
        nlohmann::ordered_json lj;
        lj["width"] = l.width;
        lj["activation"] = activation_name(l.activation);
        lj["dropout"] = l.dropout;
        j["layers"].push_back(lj);
    }
    j["weights"] = nlohmann::ordered_json::array();
    j["biases"] = nlohmann::ordered_json::array();
    for (const auto& w : params_.weights) {
        nlohmann::ordered_json rows = nlohmann::ordered_json::array();
        for (Eigen::Index i = 0; i < w.rows(); ++i) {
            nlohmann::ordered_json row = nlohmann::ordered_json::array();
            for (Eigen::Index jj = 0; jj < w.cols(); ++jj) row.push_back(w(i, jj));
            rows.push_back(row);
        }
        j["weights"].push_back(rows);
    }
    for (const auto& b : params_.biases) {
        nlohmann::ordered_json row = nlohmann::ordered_json::array();
        for (Eigen::Index i = 0; i < b.size(); ++i) row.push_back(b[i]);
        j["biases"].push_back(row);
    }
    j["epoch_losses"] = epoch_losses_;
    return j;
}

std::shared_ptr<NetworkClassifier> NetworkClassifier::from_json(
    const nlohmann::ordered_json& j) {
    std::vector<LayerSpec> layers;
    for (const auto& lj : j.at("layers"))
        layers.push_back({lj.at("width").get<int>(),
                          activation_from_string(lj.at("activation").get<std::string>()),
                          lj.at("dropout").get<double>()});
    NetworkParams params;
    for (const auto& wj : j.at("weights")) {
        Matrix w(static_cast<Eigen::Index>(wj.size()),
                 static_cast<Eigen::Index>(wj.empty() ? 0 : wj[0].size()));
        Eigen::Index i = 0;
        for (const auto& row : wj) {
            Eigen::Index c = 0;
            for (const auto& v : row) w(i, c++) = v.get<double>();
            ++i;
        }
        params.weights.push_back(std::move(w));
    }
    for (const auto& bj : j.at("biases")) {
        Vector b(static_cast<Eigen::Index>(bj.size()));
        Eigen::Index i = 0;
        for (const auto& v : bj) b[i++] = v.get<double>();
        params.biases.push_back(std::move(b));
    }
    std::vector<double> losses;
    if (j.contains("epoch_losses")) losses = j.at("epoch_losses").get<std::vector<double>>();
    return std::make_shared<NetworkClassifier>(std::move(layers), std::move(params),
                                               std::move(losses));
}

std::shared_ptr<NetworkClassifier> train(const Matrix& x, const std::vector<int>& labels,
                                         const std::vector<LayerSpec>& layers,
                                         const TrainConfig& cfg) {
    check_layers(layers);
    if (x.rows() == 0) throw std::invalid_argument("empty training set");
    if (static_cast<std::size_t>(x.rows()) != labels.size())
        throw std::invalid_argument("row and label counts differ");
    if (cfg.epochs <= 0 || cfg.batch_size <= 0)
        throw std::invalid_argument("epochs and batch_size must be positive");

    NetworkParams params = glorot_init(static_cast<int>(x.cols()), layers, cfg.seed);
    AdamState adam = AdamState::like(params);
    std::vector<double> epoch_losses;
    epoch_losses.reserve(static_cast<std::size_t>(cfg.epochs));

    const auto n = static_cast<std::size_t>(x.rows());
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});

    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        Rng shuffle_rng(derive_seed(cfg.seed, kShuffleStream + static_cast<std::uint64_t>(epoch)));
        shuffle_rng.shuffle(order.begin(), order.end());

        double loss_sum = 0.0;
        std::size_t batch_index = 0;
        for (std::size_t start = 0; start < n; start += static_cast<std::size_t>(cfg.batch_size)) {
            const std::size_t stop = std::min(n, start + static_cast<std::size_t>(cfg.batch_size));
            const auto bn = static_cast<Eigen::Index>(stop - start);
            Matrix batch(bn, x.cols());
            std::vector<int> batch_labels(static_cast<std::size_t>(bn));
            for (Eigen::Index i = 0; i < bn; ++i) {
                batch.row(i) = x.row(static_cast<Eigen::Index>(order[start + static_cast<std::size_t>(i)]));
                batch_labels[static_cast<std::size_t>(i)] =
                    labels[order[start + static_cast<std::size_t>(i)]];
            }
            const std::uint64_t mask_seed = derive_seed(
                derive_seed(cfg.seed, kMaskStream + static_cast<std::uint64_t>(epoch)),
                batch_index);
            const ForwardResult fwd = forward(params, layers, batch, Mode::train, mask_seed);
            const double batch_loss = bce_loss(fwd.probabilities(), batch_labels);
            if (!std::isfinite(batch_loss))
                throw std::runtime_error("training diverged at epoch " +
                                         std::to_string(epoch));
            loss_sum += batch_loss * static_cast<double>(bn);
            const Gradients grads = backward(params, layers, batch, batch_labels, fwd);
            adam_update(params, grads, adam, cfg.adam);
            ++batch_index;
        }
        epoch_losses.push_back(loss_sum / static_cast<double>(n));
    }
    return std::make_shared<NetworkClassifier>(layers, std::move(params),
                                               std::move(epoch_losses));
}

} // namespace churnlab::nnet
