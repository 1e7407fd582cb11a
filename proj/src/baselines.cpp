#include "topiclabel/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <unordered_set>

#include "topiclabel/error.hpp"

namespace topiclabel {

namespace {

// [caption mean-vector || visual vector] with an empty caption pooling
// to the zero vector.
std::vector<double> similarity_features(const ImageCandidate& image, const EmbeddingTable& table) {
    std::vector<double> features;
    features.reserve(table.dimension() + image.visual.size());
    if (image.caption_tokens.empty()) {
        features.assign(table.dimension(), 0.0);
    } else {
        features = table.mean_pool(image.caption_tokens).mean;
    }
    features.insert(features.end(), image.visual.begin(), image.visual.end());
    return features;
}

double cosine(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) {
        throw DimensionError("cosine requires equal-length vectors");
    }
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        dot += a[i] * b[i];
        na += a[i] * a[i];
        nb += b[i] * b[i];
    }
    if (na == 0.0 || nb == 0.0) return 0.0;
    return dot / (std::sqrt(na) * std::sqrt(nb));
}

double clamp01(double x) { return std::clamp(x, 0.0, 1.0); }

std::vector<double> caption_mean(const ImageCandidate& image, const EmbeddingTable& table) {
    if (image.caption_tokens.empty()) return std::vector<double>(table.dimension(), 0.0);
    return table.mean_pool(image.caption_tokens).mean;
}

RankedList rank_by_ppr_scores(const Topic& topic, std::span<const ImageCandidate> candidates,
                              std::span<const double> scores) {
    return rank_candidates(topic.id, candidates, scores);
}

}  // namespace

std::size_t SimilarityGraph::node_index(const std::string& image_id) const {
    if (id_index.size() == node_ids.size()) {
        auto it = id_index.find(image_id);
        if (it == id_index.end()) {
            throw ArgumentError("image '" + image_id + "' is not a node of the graph");
        }
        return it->second;
    }
    auto it = std::find(node_ids.begin(), node_ids.end(), image_id);
    if (it == node_ids.end()) {
        throw ArgumentError("image '" + image_id + "' is not a node of the graph");
    }
    return static_cast<std::size_t>(it - node_ids.begin());
}

void SimilarityGraph::rebuild_index() {
    id_index.clear();
    id_index.reserve(node_ids.size());
    for (std::size_t i = 0; i < node_ids.size(); ++i) id_index.emplace(node_ids[i], i);
}

void SimilarityGraph::set_uniform_personalization() {
    if (node_ids.empty()) throw ArgumentError("graph has no nodes");
    personalization.assign(node_ids.size(), 1.0 / static_cast<double>(node_ids.size()));
}

void SimilarityGraph::set_personalization(std::span<const double> affinity) {
    if (affinity.size() != node_ids.size()) {
        throw DimensionError("personalization length does not match node count");
    }
    personalization.resize(affinity.size());
    double total = 0.0;
    for (std::size_t i = 0; i < affinity.size(); ++i) {
        personalization[i] = affinity[i] > 0.0 ? affinity[i] : 0.0;
        total += personalization[i];
    }
    if (total <= 0.0) {
        set_uniform_personalization();
        return;
    }
    for (double& v : personalization) v /= total;
}

double image_similarity(const ImageCandidate& a, const ImageCandidate& b,
                        const EmbeddingTable& table) {
    return clamp01(cosine(similarity_features(a, table), similarity_features(b, table)));
}

namespace {

// Keeps each node's `m` heaviest edges; an edge survives if either
// endpoint keeps it, preserving symmetry.
void sparsify_top_neighbors(SimilarityGraph& graph, std::size_t m) {
    const std::size_t n = graph.node_count();
    if (m == 0 || m + 1 >= n) return;

    std::vector<char> keep(n * n, 0);
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) {
        std::iota(order.begin(), order.end(), 0);
        const double* row = graph.weights.data() + i * n;
        std::partial_sort(order.begin(), order.begin() + m + 1, order.end(),
                          [row](std::size_t a, std::size_t b) { return row[a] > row[b]; });
        std::size_t kept = 0;
        for (std::size_t r = 0; r < n && kept < m; ++r) {
            const std::size_t j = order[r];
            if (j == i || row[j] == 0.0) continue;
            keep[i * n + j] = 1;
            keep[j * n + i] = 1;
            ++kept;
        }
    }
    for (std::size_t idx = 0; idx < n * n; ++idx) {
        if (!keep[idx]) graph.weights[idx] = 0.0;
    }
}

}  // namespace

SimilarityGraph build_similarity_graph(std::span<const ImageCandidate> images,
                                       const EmbeddingTable& table, std::size_t top_neighbors) {
    if (images.empty()) throw ArgumentError("similarity graph requires at least one image");

    SimilarityGraph graph;
    std::vector<std::vector<double>> features;
    std::unordered_set<std::string> seen;
    for (const ImageCandidate& image : images) {
        if (!seen.insert(image.image_id).second) continue;
        graph.node_ids.push_back(image.image_id);
        features.push_back(similarity_features(image, table));
    }
    graph.rebuild_index();

    const std::size_t n = graph.node_ids.size();
    std::vector<double> norms(n);
    for (std::size_t i = 0; i < n; ++i) {
        norms[i] = std::sqrt(std::inner_product(features[i].begin(), features[i].end(),
                                                features[i].begin(), 0.0));
    }

    graph.weights.assign(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        if (norms[i] == 0.0) continue;
        const std::vector<double>& fi = features[i];
        for (std::size_t j = i + 1; j < n; ++j) {
            if (norms[j] == 0.0) continue;
            double dot = 0.0;
            const double* fj = features[j].data();
            for (std::size_t k = 0; k < fi.size(); ++k) dot += fi[k] * fj[k];
            const double w = clamp01(dot / (norms[i] * norms[j]));
            graph.weights[i * n + j] = w;
            graph.weights[j * n + i] = w;
        }
    }
    sparsify_top_neighbors(graph, top_neighbors);
    graph.set_uniform_personalization();
    return graph;
}

std::vector<double> topic_affinity(const Topic& topic, const SimilarityGraph& graph,
                                   std::span<const ImageCandidate> images,
                                   const EmbeddingTable& table) {
    const std::vector<double> topic_vec = table.mean_pool(topic.terms).mean;

    std::vector<double> affinity(graph.node_count(), 0.0);
    std::unordered_set<std::string> filled;
    for (const ImageCandidate& image : images) {
        if (!filled.insert(image.image_id).second) continue;
        const std::size_t idx = graph.node_index(image.image_id);
        affinity[idx] = std::max(0.0, cosine(topic_vec, caption_mean(image, table)));
    }
    return affinity;
}

PprResult personalized_pagerank(const SimilarityGraph& graph, const PprConfig& config) {
    const std::size_t n = graph.node_count();
    if (n == 0) throw ArgumentError("graph has no nodes");
    if (config.damping <= 0.0 || config.damping >= 1.0) {
        throw ArgumentError("damping must lie in (0, 1)");
    }
    if (config.tolerance <= 0.0) throw ArgumentError("tolerance must be positive");
    if (graph.personalization.size() != n) {
        throw DimensionError("graph personalization is not initialized");
    }
    double p_sum = 0.0;
    for (double p : graph.personalization) {
        if (p < 0.0) throw ArgumentError("personalization must be nonnegative");
        p_sum += p;
    }
    if (std::abs(p_sum - 1.0) > 1e-9) {
        throw ArgumentError("personalization must sum to 1");
    }

    std::vector<double> row_sums(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const double* row = graph.weights.data() + i * n;
        for (std::size_t j = 0; j < n; ++j) row_sums[i] += row[j];
    }

    const std::vector<double>& p = graph.personalization;
    const double d = config.damping;
    std::vector<double> rank(p.begin(), p.end());
    std::vector<double> next(n);

    PprResult result;
    for (std::size_t iter = 0; iter < config.max_iters; ++iter) {
        std::fill(next.begin(), next.end(), 0.0);
        double dangling_mass = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            if (row_sums[i] == 0.0) {
                dangling_mass += rank[i];
                continue;
            }
            const double scale = rank[i] / row_sums[i];
            const double* row = graph.weights.data() + i * n;
            for (std::size_t j = 0; j < n; ++j) next[j] += scale * row[j];
        }
        double delta = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            next[j] = d * (next[j] + dangling_mass * p[j]) + (1.0 - d) * p[j];
            delta += std::abs(next[j] - rank[j]);
        }
        rank.swap(next);
        result.iterations = iter + 1;
        if (delta < config.tolerance) {
            result.converged = true;
            break;
        }
    }
    double total = 0.0;
    for (double r : rank) total += r;
    if (std::abs(total - 1.0) > 1e-6) {
        throw NumericError("pagerank mass drifted to " + std::to_string(total));
    }
    result.scores = std::move(rank);
    return result;
}

RankedList local_ppr_rank(const Topic& topic, std::span<const ImageCandidate> candidates,
                          const EmbeddingTable& table, const PprConfig& config) {
    if (candidates.empty()) throw ArgumentError("local_ppr_rank requires candidates");
    SimilarityGraph graph = build_similarity_graph(candidates, table, config.top_neighbors);
    graph.set_personalization(topic_affinity(topic, graph, candidates, table));
    const PprResult ppr = personalized_pagerank(graph, config);

    std::vector<double> scores(candidates.size());
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        scores[i] = ppr.scores[graph.node_index(candidates[i].image_id)];
    }
    return rank_by_ppr_scores(topic, candidates, scores);
}

RankedList global_ppr_rank(const Topic& topic, SimilarityGraph& pool_graph,
                           std::span<const ImageCandidate> pool_images,
                           std::span<const ImageCandidate> own_candidates,
                           const EmbeddingTable& table, const PprConfig& config) {
    if (own_candidates.empty()) throw ArgumentError("global_ppr_rank requires candidates");
    pool_graph.set_personalization(topic_affinity(topic, pool_graph, pool_images, table));
    const PprResult ppr = personalized_pagerank(pool_graph, config);

    std::vector<double> scores(own_candidates.size());
    for (std::size_t i = 0; i < own_candidates.size(); ++i) {
        scores[i] = ppr.scores[pool_graph.node_index(own_candidates[i].image_id)];
    }
    return rank_by_ppr_scores(topic, own_candidates, scores);
}

RankedList global_ppr_rank(const Topic& topic, std::span<const ImageCandidate> pool_images,
                           std::span<const ImageCandidate> own_candidates,
                           const EmbeddingTable& table, const PprConfig& config) {
    SimilarityGraph graph = build_similarity_graph(pool_images, table, config.top_neighbors);
    return global_ppr_rank(topic, graph, pool_images, own_candidates, table, config);
}

LinearModel train_linear(std::span<const TrainExample> examples, double l2) {
    if (examples.empty()) throw ArgumentError("train_linear requires examples");
    if (l2 < 0.0) throw ArgumentError("l2 must be nonnegative");
    const std::size_t dim = examples.front().input.size();
    if (dim == 0) throw ArgumentError("train_linear requires non-empty inputs");
    for (const TrainExample& ex : examples) {
        if (ex.input.size() != dim) {
            throw DimensionError("training examples have mixed input dimensions");
        }
    }

    // Normal equations over the augmented design [x || 1]; the bias
    // column is not penalized.
    const std::size_t m = dim + 1;
    std::vector<double> gram(m * m, 0.0);
    std::vector<double> rhs(m, 0.0);
    std::vector<double> row(m);
    for (const TrainExample& ex : examples) {
        std::copy(ex.input.begin(), ex.input.end(), row.begin());
        row[dim] = 1.0;
        for (std::size_t i = 0; i < m; ++i) {
            const double xi = row[i];
            if (xi == 0.0) continue;
            double* grow = gram.data() + i * m;
            for (std::size_t j = i; j < m; ++j) grow[j] += xi * row[j];
            rhs[i] += xi * ex.target;
        }
    }
    for (std::size_t i = 0; i < dim; ++i) gram[i * m + i] += l2;

    // In-place Cholesky on the upper triangle.
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = i; j < m; ++j) {
            double sum = gram[i * m + j];
            for (std::size_t k = 0; k < i; ++k) sum -= gram[k * m + i] * gram[k * m + j];
            if (i == j) {
                if (sum <= 0.0) {
                    throw ValidationError(
                        "normal equations are singular; increase the l2 penalty");
                }
                gram[i * m + j] = std::sqrt(sum);
            } else {
                gram[i * m + j] = sum / gram[i * m + i];
            }
        }
    }
    // Solve L^T L ... forward then backward substitution.
    std::vector<double> y(m);
    for (std::size_t i = 0; i < m; ++i) {
        double sum = rhs[i];
        for (std::size_t k = 0; k < i; ++k) sum -= gram[k * m + i] * y[k];
        y[i] = sum / gram[i * m + i];
    }
    std::vector<double> solution(m);
    for (std::size_t i = m; i-- > 0;) {
        double sum = y[i];
        for (std::size_t k = i + 1; k < m; ++k) sum -= gram[i * m + k] * solution[k];
        solution[i] = sum / gram[i * m + i];
    }

    LinearModel model;
    model.weights.assign(solution.begin(), solution.begin() + dim);
    model.bias = solution[dim];
    return model;
}

double predict_linear(const LinearModel& model, std::span<const double> input) {
    if (input.size() != model.weights.size()) {
        throw DimensionError("input has " + std::to_string(input.size()) +
                             " components, model expects " + std::to_string(model.weights.size()));
    }
    return std::inner_product(input.begin(), input.end(), model.weights.begin(), model.bias);
}

}  // namespace topiclabel
