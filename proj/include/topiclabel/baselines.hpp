#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "topiclabel/dataset.hpp"
#include "topiclabel/embeddings.hpp"
#include "topiclabel/metrics.hpp"
#include "topiclabel/neuralnet.hpp"

namespace topiclabel {

struct PprConfig {
    double damping = 0.85;
    double tolerance = 1e-10;
    std::size_t max_iters = 200;
    // When nonzero, each node keeps only its strongest `top_neighbors`
    // edges (union-symmetrized). 0 keeps the dense graph.
    std::size_t top_neighbors = 0;
};

/// Undirected image-similarity graph: dense symmetric nonnegative edge
/// weights, zero diagonal, and a personalization distribution over nodes.
struct SimilarityGraph {
    std::vector<std::string> node_ids;
    std::vector<double> weights;          // dense node_count x node_count
    std::vector<double> personalization;  // nonnegative, sums to 1
    std::unordered_map<std::string, std::size_t> id_index;  // optional fast lookup

    std::size_t node_count() const { return node_ids.size(); }
    double weight(std::size_t i, std::size_t j) const { return weights[i * node_ids.size() + j]; }
    std::size_t node_index(const std::string& image_id) const;
    void rebuild_index();

    void set_uniform_personalization();
    /// Floors at zero and normalizes; falls back to uniform when the
    /// vector has no mass.
    void set_personalization(std::span<const double> affinity);
};

/// Cosine similarity between the [caption mean-vector || visual vector]
/// representations of two images, clamped to [0, 1]. Zero-norm vectors
/// yield 0.
double image_similarity(const ImageCandidate& a, const ImageCandidate& b,
                        const EmbeddingTable& table);

/// Builds the dense graph over the given images (deduplicated by image
/// id) with uniform personalization. A nonzero `top_neighbors` keeps only
/// each node's strongest edges.
SimilarityGraph build_similarity_graph(std::span<const ImageCandidate> images,
                                       const EmbeddingTable& table,
                                       std::size_t top_neighbors = 0);

/// Per-node affinity of a topic: cosine(topic mean-vector, caption
/// mean-vector), used as the personalization seed.
std::vector<double> topic_affinity(const Topic& topic, const SimilarityGraph& graph,
                                   std::span<const ImageCandidate> images,
                                   const EmbeddingTable& table);

struct PprResult {
    std::vector<double> scores;
    bool converged = false;
    std::size_t iterations = 0;
};

/// Power iteration of
///   r <- damping * (row-normalized W)^T r + (1 - damping) * p
/// with dangling-node mass redistributed along p. Stops when the L1
/// change drops below the tolerance or max_iters is reached.
PprResult personalized_pagerank(const SimilarityGraph& graph, const PprConfig& config = {});

/// Re-ranks a topic's own candidates by PPR over a graph containing only
/// those candidates.
RankedList local_ppr_rank(const Topic& topic, std::span<const ImageCandidate> candidates,
                          const EmbeddingTable& table, const PprConfig& config = {});

/// Re-ranks a topic's candidates by their scores in a PPR run over a
/// prebuilt graph spanning the whole candidate pool.
RankedList global_ppr_rank(const Topic& topic, SimilarityGraph& pool_graph,
                           std::span<const ImageCandidate> pool_images,
                           std::span<const ImageCandidate> own_candidates,
                           const EmbeddingTable& table, const PprConfig& config = {});

/// Convenience overload that builds the pool graph from scratch.
RankedList global_ppr_rank(const Topic& topic, std::span<const ImageCandidate> pool_images,
                           std::span<const ImageCandidate> own_candidates,
                           const EmbeddingTable& table, const PprConfig& config = {});

struct LinearModel {
    std::vector<double> weights;
    double bias = 0.0;
};

/// Ridge least squares: minimizes sum of squared errors + l2 * |w|^2
/// (bias unpenalized), solved by Cholesky on the normal equations.
LinearModel train_linear(std::span<const TrainExample> examples, double l2);

double predict_linear(const LinearModel& model, std::span<const double> input);

}  // namespace topiclabel
