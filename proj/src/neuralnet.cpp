#include "topiclabel/neuralnet.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>

#include "topiclabel/error.hpp"
#include "topiclabel/version.hpp"

namespace topiclabel {

namespace {

constexpr char kModelMagic[4] = {'T', 'L', 'N', 'N'};

void check_finite(std::span<const double> values, const char* what) {
    for (double v : values) {
        if (!std::isfinite(v)) {
            throw NumericError(std::string("non-finite value in ") + what);
        }
    }
}

// y += x * row, contiguous over fan_out. The workhorse of both passes.
inline void axpy(double* y, const double* row, double x, std::size_t n) {
    for (std::size_t j = 0; j < n; ++j) y[j] += x * row[j];
}

inline double dot(const double* a, const double* b, std::size_t n) {
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) sum += a[i] * b[i];
    return sum;
}

template <typename T>
void write_le(std::ostream& out, T value) {
    if constexpr (std::endian::native == std::endian::big) {
        auto* bytes = reinterpret_cast<unsigned char*>(&value);
        std::reverse(bytes, bytes + sizeof(T));
    }
    out.write(reinterpret_cast<const char*>(&value), sizeof(T));
    if (!out) throw IoError("model write failed");
}

template <typename T>
T read_le(std::istream& in) {
    T value{};
    in.read(reinterpret_cast<char*>(&value), sizeof(T));
    if (!in) throw ParseError("model file truncated");
    if constexpr (std::endian::native == std::endian::big) {
        auto* bytes = reinterpret_cast<unsigned char*>(&value);
        std::reverse(bytes, bytes + sizeof(T));
    }
    return value;
}

}  // namespace

std::size_t MlpModel::parameter_count() const {
    std::size_t count = 0;
    for (const DenseLayer& layer : layers) {
        count += layer.weights.size() + layer.biases.size();
    }
    return count;
}

MlpModel init_model(std::size_t input_dim, std::uint64_t seed) {
    return init_model(input_dim, kHiddenSizes, seed);
}

MlpModel init_model(std::size_t input_dim, std::span<const std::size_t> hidden_sizes,
                    std::uint64_t seed, bool output_bias) {
    if (input_dim == 0) throw ArgumentError("input_dim must be positive");
    for (std::size_t size : hidden_sizes) {
        if (size == 0) throw ArgumentError("hidden layer sizes must be positive");
    }

    MlpModel model;
    model.input_dim = input_dim;
    model.seed = seed;
    model.output_bias = output_bias;

    std::mt19937_64 rng(seed);
    std::size_t fan_in = input_dim;
    auto add_layer = [&](std::size_t fan_out) {
        DenseLayer layer;
        layer.fan_in = fan_in;
        layer.fan_out = fan_out;
        layer.weights.resize(fan_in * fan_out);
        layer.biases.assign(fan_out, 0.0);
        std::normal_distribution<double> dist(0.0, std::sqrt(2.0 / static_cast<double>(fan_in)));
        for (double& w : layer.weights) w = dist(rng);
        model.layers.push_back(std::move(layer));
        fan_in = fan_out;
    };
    for (std::size_t size : hidden_sizes) add_layer(size);
    add_layer(1);
    return model;
}

std::vector<double> relu(std::span<const double> x) {
    std::vector<double> out(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i] > 0.0 ? x[i] : 0.0;
    return out;
}

DropoutResult apply_dropout(std::span<const double> activations, double rate,
                            std::mt19937_64& rng, bool training) {
    if (rate < 0.0 || rate >= 1.0) {
        throw ArgumentError("dropout rate must lie in [0, 1)");
    }
    DropoutResult result;
    result.values.assign(activations.begin(), activations.end());
    result.mask.assign(activations.size(), 1.0);
    if (!training || rate == 0.0) return result;

    const double keep_scale = 1.0 / (1.0 - rate);
    std::uniform_real_distribution<double> uniform(0.0, 1.0);
    for (std::size_t i = 0; i < activations.size(); ++i) {
        if (uniform(rng) < rate) {
            result.mask[i] = 0.0;
            result.values[i] = 0.0;
        } else {
            result.mask[i] = keep_scale;
            result.values[i] *= keep_scale;
        }
    }
    return result;
}

double forward(const MlpModel& model, std::span<const double> input, ForwardCache* cache,
               const Dropout* dropout) {
    if (model.layers.empty()) throw ArgumentError("model has no layers");
    if (input.size() != model.input_dim) {
        throw DimensionError("input has " + std::to_string(input.size()) +
                             " components, model expects " + std::to_string(model.input_dim));
    }
    const bool training = dropout != nullptr && dropout->rng != nullptr;
    const std::size_t hidden_count = model.layers.size() - 1;

    if (cache) {
        cache->inputs.assign(model.layers.size(), {});
        cache->preacts.assign(hidden_count, {});
        cache->masks.assign(hidden_count, {});
    }

    std::vector<double> activation(input.begin(), input.end());
    for (std::size_t l = 0; l < hidden_count; ++l) {
        const DenseLayer& layer = model.layers[l];
        if (cache) cache->inputs[l] = activation;

        std::vector<double> z(layer.biases);
        for (std::size_t i = 0; i < layer.fan_in; ++i) {
            const double x = activation[i];
            if (x != 0.0) axpy(z.data(), layer.weights.data() + i * layer.fan_out, x, layer.fan_out);
        }
        if (cache) cache->preacts[l] = z;

        activation = relu(z);
        if (training) {
            DropoutResult dropped = apply_dropout(activation, dropout->rate, *dropout->rng, true);
            activation = std::move(dropped.values);
            if (cache) cache->masks[l] = std::move(dropped.mask);
        }
    }

    const DenseLayer& out = model.layers.back();
    if (cache) cache->inputs[hidden_count] = activation;
    double prediction = model.output_bias ? out.biases[0] : 0.0;
    prediction += dot(out.weights.data(), activation.data(), out.fan_in);
    if (cache) cache->prediction = prediction;
    return prediction;
}

double mae_loss(std::span<const double> predictions, std::span<const double> targets) {
    if (predictions.empty() || predictions.size() != targets.size()) {
        throw ArgumentError("mae_loss requires equal, non-zero lengths");
    }
    double sum = 0.0;
    for (std::size_t i = 0; i < predictions.size(); ++i) {
        sum += std::abs(predictions[i] - targets[i]);
    }
    return sum / static_cast<double>(predictions.size());
}

Gradients backward(const MlpModel& model, const ForwardCache& cache, double target) {
    if (cache.inputs.size() != model.layers.size()) {
        throw ArgumentError("forward cache does not match model");
    }
    const std::size_t hidden_count = model.layers.size() - 1;

    Gradients grads;
    grads.layers.resize(model.layers.size());
    for (std::size_t l = 0; l < model.layers.size(); ++l) {
        grads.layers[l].weights.assign(model.layers[l].weights.size(), 0.0);
        grads.layers[l].biases.assign(model.layers[l].biases.size(), 0.0);
    }

    const double error = cache.prediction - target;
    const double dpred = error > 0.0 ? 1.0 : (error < 0.0 ? -1.0 : 0.0);
    if (dpred == 0.0) return grads;  // subgradient of |e| at e = 0

    // Output layer: prediction = w . h + b.
    const DenseLayer& out = model.layers.back();
    const std::vector<double>& last_hidden = cache.inputs[hidden_count];
    LayerGrads& out_grads = grads.layers.back();
    for (std::size_t i = 0; i < out.fan_in; ++i) out_grads.weights[i] = dpred * last_hidden[i];
    if (model.output_bias) out_grads.biases[0] = dpred;

    // delta = dL/d(post-activation) entering the layer below.
    std::vector<double> delta(out.fan_in);
    for (std::size_t i = 0; i < out.fan_in; ++i) delta[i] = dpred * out.weights[i];

    for (std::size_t l = hidden_count; l-- > 0;) {
        const DenseLayer& layer = model.layers[l];
        const std::vector<double>& preact = cache.preacts[l];
        const std::vector<double>& layer_input = cache.inputs[l];
        const std::vector<double>& mask = cache.masks[l];

        // Through the dropout mask, then the ReLU kink (subgradient 0 at 0).
        for (std::size_t j = 0; j < layer.fan_out; ++j) {
            if (!mask.empty()) delta[j] *= mask[j];
            if (preact[j] <= 0.0) delta[j] = 0.0;
        }

        LayerGrads& lg = grads.layers[l];
        for (std::size_t i = 0; i < layer.fan_in; ++i) {
            const double x = layer_input[i];
            if (x != 0.0) axpy(lg.weights.data() + i * layer.fan_out, delta.data(), x, layer.fan_out);
        }
        for (std::size_t j = 0; j < layer.fan_out; ++j) lg.biases[j] = delta[j];

        if (l == 0) break;
        std::vector<double> next_delta(layer.fan_in);
        for (std::size_t i = 0; i < layer.fan_in; ++i) {
            next_delta[i] = dot(layer.weights.data() + i * layer.fan_out, delta.data(), layer.fan_out);
        }
        delta = std::move(next_delta);
    }
    return grads;
}

RmsPropState RmsPropState::zeros_like(const MlpModel& model) {
    RmsPropState state;
    state.mean_sq.resize(model.layers.size());
    for (std::size_t l = 0; l < model.layers.size(); ++l) {
        state.mean_sq[l].weights.assign(model.layers[l].weights.size(), 0.0);
        state.mean_sq[l].biases.assign(model.layers[l].biases.size(), 0.0);
    }
    return state;
}

void rmsprop_update(std::span<double> params, std::span<const double> grads,
                    std::span<double> state, double learning_rate, double decay, double epsilon) {
    if (params.size() != grads.size() || params.size() != state.size()) {
        throw DimensionError("rmsprop_update requires matching parameter/gradient/state shapes");
    }
    for (std::size_t i = 0; i < params.size(); ++i) {
        const double g = grads[i];
        state[i] = decay * state[i] + (1.0 - decay) * g * g;
        params[i] -= learning_rate * g / std::sqrt(state[i] + epsilon);
    }
}

void rmsprop_step(MlpModel& model, const Gradients& grads, RmsPropState& state,
                  double learning_rate, double decay, double epsilon) {
    if (grads.layers.size() != model.layers.size() ||
        state.mean_sq.size() != model.layers.size()) {
        throw DimensionError("rmsprop_step requires gradients/state matching the model");
    }
    for (std::size_t l = 0; l < model.layers.size(); ++l) {
        rmsprop_update(model.layers[l].weights, grads.layers[l].weights,
                       state.mean_sq[l].weights, learning_rate, decay, epsilon);
        rmsprop_update(model.layers[l].biases, grads.layers[l].biases, state.mean_sq[l].biases,
                       learning_rate, decay, epsilon);
    }
}

namespace {

// Batched training pass. Activations are kept per example (row-major
// batch x width) so each weight row is read once per mini-batch instead
// of once per example.
struct BatchWorkspace {
    // Per hidden layer: pre-activations, post-ReLU/dropout activations and
    // dropout masks for every example in the batch.
    std::vector<std::vector<double>> preact;
    std::vector<std::vector<double>> activation;
    std::vector<std::vector<double>> mask;
    std::vector<double> predictions;
    Gradients grads;
    std::vector<std::vector<double>> delta;  // per layer, batch x fan_out
};

void resize_workspace(BatchWorkspace& ws, const MlpModel& model, std::size_t batch_n) {
    const std::size_t hidden_count = model.layers.size() - 1;
    ws.preact.assign(hidden_count, {});
    ws.activation.assign(hidden_count, {});
    ws.mask.assign(hidden_count, {});
    for (std::size_t l = 0; l < hidden_count; ++l) {
        const std::size_t width = model.layers[l].fan_out;
        ws.preact[l].assign(batch_n * width, 0.0);
        ws.activation[l].assign(batch_n * width, 0.0);
        ws.mask[l].assign(batch_n * width, 1.0);
    }
    ws.predictions.assign(batch_n, 0.0);
    ws.grads.layers.resize(model.layers.size());
    ws.delta.assign(model.layers.size(), {});
    for (std::size_t l = 0; l < model.layers.size(); ++l) {
        ws.grads.layers[l].weights.assign(model.layers[l].weights.size(), 0.0);
        ws.grads.layers[l].biases.assign(model.layers[l].biases.size(), 0.0);
        ws.delta[l].assign(batch_n * model.layers[l].fan_out, 0.0);
    }
}

// Computes batch-mean gradients into ws.grads and the batch predictions.
void batch_forward_backward(const MlpModel& model, std::span<const TrainExample> examples,
                            std::span<const std::size_t> batch_indices, double dropout_rate,
                            std::mt19937_64& rng, BatchWorkspace& ws) {
    const std::size_t n = batch_indices.size();
    const std::size_t hidden_count = model.layers.size() - 1;
    resize_workspace(ws, model, n);

    std::vector<const double*> layer_in(n);
    for (std::size_t b = 0; b < n; ++b) layer_in[b] = examples[batch_indices[b]].input.data();

    // Forward.
    for (std::size_t l = 0; l < hidden_count; ++l) {
        const DenseLayer& layer = model.layers[l];
        const std::size_t width = layer.fan_out;
        for (std::size_t b = 0; b < n; ++b) {
            std::copy(layer.biases.begin(), layer.biases.end(), ws.preact[l].begin() + b * width);
        }
        for (std::size_t i = 0; i < layer.fan_in; ++i) {
            const double* wrow = layer.weights.data() + i * width;
            for (std::size_t b = 0; b < n; ++b) {
                const double x = layer_in[b][i];
                if (x != 0.0) axpy(ws.preact[l].data() + b * width, wrow, x, width);
            }
        }
        const double keep_scale = dropout_rate > 0.0 ? 1.0 / (1.0 - dropout_rate) : 1.0;
        std::uniform_real_distribution<double> uniform(0.0, 1.0);
        for (std::size_t b = 0; b < n; ++b) {
            const double* z = ws.preact[l].data() + b * width;
            double* a = ws.activation[l].data() + b * width;
            double* m = ws.mask[l].data() + b * width;
            for (std::size_t j = 0; j < width; ++j) a[j] = z[j] > 0.0 ? z[j] : 0.0;
            if (dropout_rate > 0.0) {
                for (std::size_t j = 0; j < width; ++j) {
                    if (uniform(rng) < dropout_rate) {
                        m[j] = 0.0;
                        a[j] = 0.0;
                    } else {
                        m[j] = keep_scale;
                        a[j] *= keep_scale;
                    }
                }
            }
            layer_in[b] = a;  // becomes the next layer's input once b-loop completes
        }
        // layer_in now points at this layer's activations for all b.
    }

    const DenseLayer& out = model.layers.back();
    for (std::size_t b = 0; b < n; ++b) {
        double pred = model.output_bias ? out.biases[0] : 0.0;
        pred += dot(out.weights.data(), layer_in[b], out.fan_in);
        ws.predictions[b] = pred;
    }

    // Backward, with the 1/n of the batch mean folded into the seed delta.
    const double inv_n = 1.0 / static_cast<double>(n);
    LayerGrads& og = ws.grads.layers.back();
    double* delta_out = ws.delta.back().data();  // batch x 1
    for (std::size_t b = 0; b < n; ++b) {
        const double err = ws.predictions[b] - examples[batch_indices[b]].target;
        delta_out[b] = (err > 0.0 ? 1.0 : (err < 0.0 ? -1.0 : 0.0)) * inv_n;
    }
    for (std::size_t b = 0; b < n; ++b) {
        if (delta_out[b] != 0.0) axpy(og.weights.data(), layer_in[b], delta_out[b], out.fan_in);
    }
    if (model.output_bias) {
        for (std::size_t b = 0; b < n; ++b) og.biases[0] += delta_out[b];
    }

    // dL/d(activation) of the last hidden layer.
    std::size_t l = hidden_count;
    while (l-- > 0) {
        const DenseLayer& layer = model.layers[l];
        const std::size_t width = layer.fan_out;
        double* delta = ws.delta[l].data();

        if (l == hidden_count - 1) {
            for (std::size_t b = 0; b < n; ++b) {
                const double d = delta_out[b];
                double* row = delta + b * width;
                for (std::size_t j = 0; j < width; ++j) row[j] = d * out.weights[j];
            }
        } else {
            const DenseLayer& upper = model.layers[l + 1];
            const double* upper_delta = ws.delta[l + 1].data();
            for (std::size_t i = 0; i < upper.fan_in; ++i) {
                const double* wrow = upper.weights.data() + i * upper.fan_out;
                for (std::size_t b = 0; b < n; ++b) {
                    delta[b * width + i] = dot(wrow, upper_delta + b * upper.fan_out, upper.fan_out);
                }
            }
        }

        // Gate through dropout masks and the ReLU subgradient.
        for (std::size_t b = 0; b < n; ++b) {
            const double* z = ws.preact[l].data() + b * width;
            const double* m = ws.mask[l].data() + b * width;
            double* row = delta + b * width;
            for (std::size_t j = 0; j < width; ++j) {
                row[j] = z[j] > 0.0 ? row[j] * m[j] : 0.0;
            }
        }

        LayerGrads& lg = ws.grads.layers[l];
        const std::vector<const double*> inputs = [&] {
            std::vector<const double*> ptrs(n);
            for (std::size_t b = 0; b < n; ++b) {
                ptrs[b] = l == 0 ? examples[batch_indices[b]].input.data()
                                 : ws.activation[l - 1].data() + b * model.layers[l - 1].fan_out;
            }
            return ptrs;
        }();
        for (std::size_t i = 0; i < layer.fan_in; ++i) {
            double* grow = lg.weights.data() + i * width;
            for (std::size_t b = 0; b < n; ++b) {
                const double x = inputs[b][i];
                if (x != 0.0) axpy(grow, delta + b * width, x, width);
            }
        }
        for (std::size_t b = 0; b < n; ++b) {
            const double* row = delta + b * width;
            for (std::size_t j = 0; j < width; ++j) lg.biases[j] += row[j];
        }
    }
}

}  // namespace

std::vector<double> train(MlpModel& model, std::span<const TrainExample> examples,
                          const TrainConfig& config) {
    if (examples.empty()) throw ArgumentError("train requires a non-empty example sequence");
    if (config.batch_size == 0) throw ArgumentError("batch_size must be positive");
    if (config.learning_rate <= 0.0) throw ArgumentError("learning_rate must be positive");
    if (config.epsilon <= 0.0) throw ArgumentError("epsilon must be positive");
    if (config.dropout_rate < 0.0 || config.dropout_rate >= 1.0) {
        throw ArgumentError("dropout rate must lie in [0, 1)");
    }
    for (const TrainExample& ex : examples) {
        if (ex.input.size() != model.input_dim) {
            throw DimensionError("training example has " + std::to_string(ex.input.size()) +
                                 " components, model expects " + std::to_string(model.input_dim));
        }
    }

    std::mt19937_64 rng(config.seed);
    RmsPropState state = RmsPropState::zeros_like(model);
    std::vector<std::size_t> order(examples.size());
    std::iota(order.begin(), order.end(), 0);

    std::vector<double> history;
    history.reserve(config.epochs);

    BatchWorkspace ws;
    for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), rng);
        double epoch_abs_error = 0.0;

        for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
            const std::size_t end = std::min(start + config.batch_size, order.size());
            std::span<const std::size_t> batch(order.data() + start, end - start);
            batch_forward_backward(model, examples, batch, config.dropout_rate, rng, ws);
            for (std::size_t b = 0; b < batch.size(); ++b) {
                epoch_abs_error += std::abs(ws.predictions[b] - examples[batch[b]].target);
            }
            rmsprop_step(model, ws.grads, state, config.learning_rate, config.rmsprop_decay,
                         config.epsilon);
        }

        const double epoch_loss = epoch_abs_error / static_cast<double>(examples.size());
        if (!std::isfinite(epoch_loss)) {
            throw NumericError("training loss became non-finite in epoch " +
                               std::to_string(epoch));
        }
        for (const DenseLayer& layer : model.layers) {
            check_finite(layer.weights, "layer weights");
            check_finite(layer.biases, "layer biases");
        }
        history.push_back(epoch_loss);
    }
    return history;
}

double predict(const MlpModel& model, std::span<const double> input) {
    return forward(model, input, nullptr, nullptr);
}

void save_model(const MlpModel& model, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open model file for writing: " + path);

    out.write(kModelMagic, sizeof(kModelMagic));
    write_le<std::uint32_t>(out, kModelFormatVersion);
    write_le<std::uint8_t>(out, model.feature_config.use_caption ? 1 : 0);
    write_le<std::uint8_t>(out, model.feature_config.use_visual ? 1 : 0);
    write_le<std::uint8_t>(out, model.output_bias ? 1 : 0);
    write_le<std::uint64_t>(out, model.seed);
    write_le<std::uint32_t>(out, static_cast<std::uint32_t>(model.input_dim));
    write_le<std::uint32_t>(out, static_cast<std::uint32_t>(model.layers.size()));
    for (const DenseLayer& layer : model.layers) {
        write_le<std::uint32_t>(out, static_cast<std::uint32_t>(layer.fan_in));
        write_le<std::uint32_t>(out, static_cast<std::uint32_t>(layer.fan_out));
    }
    for (const DenseLayer& layer : model.layers) {
        for (double w : layer.weights) write_le<double>(out, w);
        for (double b : layer.biases) write_le<double>(out, b);
    }
    if (!out) throw IoError("model write failed: " + path);
}

MlpModel load_model(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open model file: " + path);

    char magic[4];
    in.read(magic, sizeof(magic));
    if (!in || std::memcmp(magic, kModelMagic, sizeof(magic)) != 0) {
        throw ParseError("not a model file: " + path);
    }
    const auto version = read_le<std::uint32_t>(in);
    if (version != static_cast<std::uint32_t>(kModelFormatVersion)) {
        throw ParseError("unsupported model format version " + std::to_string(version));
    }

    MlpModel model;
    model.feature_config.use_caption = read_le<std::uint8_t>(in) != 0;
    model.feature_config.use_visual = read_le<std::uint8_t>(in) != 0;
    model.output_bias = read_le<std::uint8_t>(in) != 0;
    model.seed = read_le<std::uint64_t>(in);
    model.input_dim = read_le<std::uint32_t>(in);
    const auto layer_count = read_le<std::uint32_t>(in);
    if (layer_count == 0) throw ParseError("model file declares zero layers");

    std::vector<std::pair<std::size_t, std::size_t>> shapes;
    shapes.reserve(layer_count);
    std::size_t expected_fan_in = model.input_dim;
    for (std::uint32_t l = 0; l < layer_count; ++l) {
        const auto fan_in = read_le<std::uint32_t>(in);
        const auto fan_out = read_le<std::uint32_t>(in);
        if (fan_in != expected_fan_in) {
            throw ParseError("layer " + std::to_string(l) + " fan_in " + std::to_string(fan_in) +
                             " does not chain from previous layer");
        }
        shapes.emplace_back(fan_in, fan_out);
        expected_fan_in = fan_out;
    }
    if (shapes.back().second != 1) throw ParseError("output layer must have a single unit");

    for (auto [fan_in, fan_out] : shapes) {
        DenseLayer layer;
        layer.fan_in = fan_in;
        layer.fan_out = fan_out;
        layer.weights.resize(fan_in * fan_out);
        layer.biases.resize(fan_out);
        for (double& w : layer.weights) w = read_le<double>(in);
        for (double& b : layer.biases) b = read_le<double>(in);
        model.layers.push_back(std::move(layer));
    }
    return model;
}

}  // namespace topiclabel
