#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "topiclabel/features.hpp"

namespace topiclabel {

/// Fully connected layer. Weights are a fan_in x fan_out matrix stored
/// row-major by input unit: weight(i, j) = weights[i * fan_out + j].
struct DenseLayer {
    std::size_t fan_in = 0;
    std::size_t fan_out = 0;
    std::vector<double> weights;  // fan_in * fan_out
    std::vector<double> biases;   // fan_out

    double& weight(std::size_t in, std::size_t out) { return weights[in * fan_out + out]; }
    double weight(std::size_t in, std::size_t out) const { return weights[in * fan_out + out]; }
};

/// Feed-forward regressor: ReLU hidden layers, identity scalar output.
struct MlpModel {
    std::vector<DenseLayer> layers;  // hidden layers then the output layer
    std::size_t input_dim = 0;
    bool output_bias = true;
    FeatureConfig feature_config;
    std::uint64_t seed = 0;

    std::size_t layer_count() const { return layers.size(); }
    std::size_t parameter_count() const;
};

/// Hidden layer widths of the production network.
inline constexpr std::array<std::size_t, 4> kHiddenSizes{256, 128, 64, 32};

struct TrainConfig {
    std::size_t epochs = 30;
    std::size_t batch_size = 16;
    double dropout_rate = 0.2;
    double learning_rate = 1e-3;
    double rmsprop_decay = 0.9;
    double epsilon = 1e-8;
    std::uint64_t seed = 0;
};

struct TrainExample {
    std::vector<double> input;
    double target = 0.0;
};

/// He-style initialization: weights ~ N(0, 2/fan_in), biases zero.
/// Deterministic given the seed.
MlpModel init_model(std::size_t input_dim, std::uint64_t seed);
MlpModel init_model(std::size_t input_dim, std::span<const std::size_t> hidden_sizes,
                    std::uint64_t seed, bool output_bias = true);

/// Component-wise max(0, x).
std::vector<double> relu(std::span<const double> x);

struct DropoutResult {
    std::vector<double> values;
    std::vector<double> mask;  // 0 for dropped units, 1/(1-rate) for survivors
};

/// Inverted dropout: in training mode each unit is zeroed with probability
/// `rate` and survivors are scaled by 1/(1-rate); in inference mode the
/// input passes through and the mask is all ones.
DropoutResult apply_dropout(std::span<const double> activations, double rate,
                            std::mt19937_64& rng, bool training);

/// Per-layer state captured by forward() for use by backward().
struct ForwardCache {
    std::vector<std::vector<double>> inputs;    // inputs[l] = activation fed into layer l
    std::vector<std::vector<double>> preacts;   // pre-ReLU values of hidden layers
    std::vector<std::vector<double>> masks;     // dropout masks per hidden layer (may be empty)
    double prediction = 0.0;
};

struct Dropout {
    double rate = 0.0;
    std::mt19937_64* rng = nullptr;
};

/// Forward pass. Pass a Dropout to sample hidden-layer masks (training
/// mode); omit it for deterministic inference.
double forward(const MlpModel& model, std::span<const double> input, ForwardCache* cache,
               const Dropout* dropout = nullptr);

/// Mean absolute error over paired sequences.
double mae_loss(std::span<const double> predictions, std::span<const double> targets);

struct LayerGrads {
    std::vector<double> weights;
    std::vector<double> biases;
};

struct Gradients {
    std::vector<LayerGrads> layers;
};

/// Gradient of |prediction - target| with respect to every parameter,
/// using the cache from forward(). The subgradient at zero error and at
/// the ReLU kink is 0; dropout masks gate the backward path.
Gradients backward(const MlpModel& model, const ForwardCache& cache, double target);

/// Per-parameter running average of squared gradients.
struct RmsPropState {
    std::vector<LayerGrads> mean_sq;

    static RmsPropState zeros_like(const MlpModel& model);
};

/// One RMSProp update over a flat parameter array:
///   state <- decay * state + (1 - decay) * grad^2
///   param <- param - lr * grad / sqrt(state + epsilon)
void rmsprop_update(std::span<double> params, std::span<const double> grads,
                    std::span<double> state, double learning_rate, double decay, double epsilon);

/// Applies rmsprop_update to every layer of the model.
void rmsprop_step(MlpModel& model, const Gradients& grads, RmsPropState& state,
                  double learning_rate, double decay, double epsilon);

/// Mini-batch training: seeded shuffle each epoch, batch-mean gradients,
/// RMSProp updates, final partial batch included. Returns the per-epoch
/// mean absolute error observed during training.
std::vector<double> train(MlpModel& model, std::span<const TrainExample> examples,
                          const TrainConfig& config);

/// Forward pass with dropout disabled. Pure; safe to call concurrently.
double predict(const MlpModel& model, std::span<const double> input);

/// Binary model container. Round-trips parameters bit-exactly and carries
/// a format-version field; see save_model/load_model.
void save_model(const MlpModel& model, const std::string& path);
MlpModel load_model(const std::string& path);

}  // namespace topiclabel
