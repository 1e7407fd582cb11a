#pragma once

// Independent reference implementations used to cross-check the library:
// finite-difference gradients, a dense PageRank power iteration, and a
// brute-force nDCG. These intentionally avoid the library's own code
// paths beyond the public forward/predict surface they probe.

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "topiclabel/baselines.hpp"
#include "topiclabel/neuralnet.hpp"

namespace topiclabel::testing {

/// Central finite differences of |predict(x) - target| with respect to
/// every parameter. Touches only the forward path.
inline Gradients finite_difference_gradients(MlpModel model, const std::vector<double>& input,
                                             double target, double step = 1e-5) {
    auto loss = [&]() { return std::abs(predict(model, input) - target); };
    Gradients grads;
    grads.layers.resize(model.layers.size());
    for (std::size_t l = 0; l < model.layers.size(); ++l) {
        grads.layers[l].weights.assign(model.layers[l].weights.size(), 0.0);
        grads.layers[l].biases.assign(model.layers[l].biases.size(), 0.0);
        auto differentiate = [&](std::vector<double>& params, std::vector<double>& out) {
            for (std::size_t i = 0; i < params.size(); ++i) {
                const double saved = params[i];
                params[i] = saved + step;
                const double up = loss();
                params[i] = saved - step;
                const double down = loss();
                params[i] = saved;
                out[i] = (up - down) / (2.0 * step);
            }
        };
        differentiate(model.layers[l].weights, grads.layers[l].weights);
        differentiate(model.layers[l].biases, grads.layers[l].biases);
    }
    return grads;
}

inline double max_relative_gradient_error(const Gradients& analytic, const Gradients& numeric) {
    double worst = 0.0;
    for (std::size_t l = 0; l < analytic.layers.size(); ++l) {
        auto compare = [&](const std::vector<double>& a, const std::vector<double>& n) {
            for (std::size_t i = 0; i < a.size(); ++i) {
                const double denom = std::max({std::abs(a[i]), std::abs(n[i]), 1e-6});
                worst = std::max(worst, std::abs(a[i] - n[i]) / denom);
            }
        };
        compare(analytic.layers[l].weights, numeric.layers[l].weights);
        compare(analytic.layers[l].biases, numeric.layers[l].biases);
    }
    return worst;
}

/// Dense PageRank oracle: explicit transition matrix, fixed iteration
/// count, dangling rows teleporting along the personalization vector.
inline std::vector<double> dense_power_iteration(const SimilarityGraph& graph, double damping,
                                                 std::size_t iterations) {
    const std::size_t n = graph.node_count();
    std::vector<std::vector<double>> transition(n, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < n; ++i) {
        double row_sum = 0.0;
        for (std::size_t j = 0; j < n; ++j) row_sum += graph.weight(i, j);
        for (std::size_t j = 0; j < n; ++j) {
            transition[i][j] =
                row_sum > 0.0 ? graph.weight(i, j) / row_sum : graph.personalization[j];
        }
    }
    std::vector<double> rank(graph.personalization);
    std::vector<double> next(n);
    for (std::size_t iter = 0; iter < iterations; ++iter) {
        for (std::size_t j = 0; j < n; ++j) {
            double sum = 0.0;
            for (std::size_t i = 0; i < n; ++i) sum += transition[i][j] * rank[i];
            next[j] = damping * sum + (1.0 - damping) * graph.personalization[j];
        }
        rank = next;
    }
    return rank;
}

/// Random symmetric graph with some missing edges (and hence occasional
/// dangling nodes) plus a random personalization vector.
inline SimilarityGraph random_graph(std::mt19937_64& rng, std::size_t n) {
    std::uniform_real_distribution<double> uniform(0.0, 1.0);
    SimilarityGraph graph;
    for (std::size_t i = 0; i < n; ++i) graph.node_ids.push_back("n" + std::to_string(i));
    graph.weights.assign(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            const double w = uniform(rng) < 0.5 ? 0.0 : uniform(rng);
            graph.weights[i * n + j] = w;
            graph.weights[j * n + i] = w;
        }
    }
    std::vector<double> affinity(n);
    for (double& a : affinity) a = uniform(rng);
    graph.set_personalization(affinity);
    return graph;
}

/// Brute-force linear-gain nDCG, coded separately from the library path.
inline double brute_force_ndcg(const std::vector<double>& gold_in_predicted_order, std::size_t k) {
    auto dcg = [&](const std::vector<double>& order) {
        double sum = 0.0;
        for (std::size_t i = 0; i < std::min(k, order.size()); ++i) {
            sum += order[i] / (std::log(static_cast<double>(i) + 2.0) / std::log(2.0));
        }
        return sum;
    };
    std::vector<double> ideal(gold_in_predicted_order);
    std::sort(ideal.rbegin(), ideal.rend());
    const double denominator = dcg(ideal);
    if (denominator == 0.0) return 1.0;
    return dcg(gold_in_predicted_order) / denominator;
}

}  // namespace topiclabel::testing
