#pragma once

#include "churnlab/classifier.hpp"
#include "churnlab/types.hpp"

#include <json.hpp>

#include <cstdint>
#include <string>
#include <vector>

namespace churnlab::nnet {

/*
 * Feed-forward binary classifier, written out by hand: Glorot-uniform
 * initialisation, tanh/relu/sigmoid activations, inverted dropout on hidden
 * activations, mean binary cross-entropy, exact backprop, bias-corrected
 * Adam. All randomness (init, epoch shuffles, dropout masks) derives from
 * one seed via fixed substreams, so training is bit-reproducible.
 */

enum class Activation { tanh, relu, sigmoid };

Activation activation_from_string(const std::string& s);
std::string activation_name(Activation a);

struct LayerSpec {
    int width = 0;
    Activation activation = Activation::relu;
    double dropout = 0.0; // hidden layers only; the output layer must use 0
};

// weights[l] is (fan_out x fan_in) for layer l; biases start at zero.
struct NetworkParams {
    std::vector<Matrix> weights;
    std::vector<Vector> biases;
};

// Uniform(-limit, limit) with limit = sqrt(6 / (fan_in + fan_out)), filled
// row-major per layer from substream `layer` of the seed.
NetworkParams glorot_init(int input_dim, const std::vector<LayerSpec>& layers,
                          std::uint64_t seed);

enum class Mode { train, infer };

struct ForwardResult {
    // pre[l]: activation output of layer l before dropout.
    // post[l]: after dropout; feeds layer l+1. Identical to pre[l] in infer
    // mode or when the layer has no dropout.
    std::vector<Matrix> pre;
    std::vector<Matrix> post;
    // Scaled dropout masks (0 or 1/(1-rate)); empty matrix when unused.
    std::vector<Matrix> masks;

    Vector probabilities() const { return post.back().col(0); }
};

ForwardResult forward(const NetworkParams& params, const std::vector<LayerSpec>& layers,
                      const Matrix& batch, Mode mode, std::uint64_t mask_seed = 0);

struct Gradients {
    std::vector<Matrix> weights;
    std::vector<Vector> biases;
};

// Gradient of the mean binary cross-entropy over the batch with respect to
// every weight and bias, reusing the forward pass (and its dropout masks).
Gradients backward(const NetworkParams& params, const std::vector<LayerSpec>& layers,
                   const Matrix& batch, const std::vector<int>& labels,
                   const ForwardResult& fwd);

// Mean BCE; probabilities are clipped to [1e-12, 1 - 1e-12] before the log.
double bce_loss(const Vector& probabilities, const std::vector<int>& labels);

struct AdamConfig {
    double learning_rate = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

struct AdamState {
    std::vector<Matrix> m_w, v_w;
    std::vector<Vector> m_b, v_b;
    long step = 0;

    static AdamState like(const NetworkParams& params);
};

void adam_update(NetworkParams& params, const Gradients& grads, AdamState& state,
                 const AdamConfig& cfg);

struct TrainConfig {
    AdamConfig adam;
    int epochs = 100;
    int batch_size = 512;
    std::uint64_t seed = 0;
};

class NetworkClassifier : public Classifier {
public:
    NetworkClassifier(std::vector<LayerSpec> layers, NetworkParams params,
                      std::vector<double> epoch_losses = {})
        : layers_(std::move(layers)), params_(std::move(params)),
          epoch_losses_(std::move(epoch_losses)) {}

    Vector predict_proba(const Matrix& x) const override;
    std::string kind() const override { return "network"; }
    nlohmann::ordered_json to_json() const override;
    static std::shared_ptr<NetworkClassifier> from_json(const nlohmann::ordered_json& j);

    const std::vector<LayerSpec>& layers() const { return layers_; }
    const NetworkParams& params() const { return params_; }
    const std::vector<double>& epoch_losses() const { return epoch_losses_; }

private:
    std::vector<LayerSpec> layers_;
    NetworkParams params_;
    std::vector<double> epoch_losses_;
};

// Mini-batch Adam training. Per epoch: shuffle rows, walk contiguous
// batches, forward in train mode, backprop, update. The recorded epoch loss
// is the sample-weighted mean of the batch losses. A non-finite loss or
// parameter aborts with an exception naming the epoch.
std::shared_ptr<NetworkClassifier> train(const Matrix& x, const std::vector<int>& labels,
                                         const std::vector<LayerSpec>& layers,
                                         const TrainConfig& cfg);

} // namespace churnlab::nnet
