#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace topiclabel {

struct Topic {
    std::string id;
    std::vector<std::string> terms;  // ten highest-probability terms
};

struct ImageCandidate {
    std::string image_id;
    std::vector<std::string> caption_tokens;
    std::vector<double> visual;            // 1000-dim at full corpus scale
    std::optional<double> rating;          // human rating in [0, 3], absent for "NA"
};

/// Topic/candidate corpus loaded from the three input files. Immutable
/// after load; safe for concurrent reads.
struct Dataset {
    std::vector<Topic> topics;
    std::vector<std::vector<ImageCandidate>> candidates;  // parallel to topics
    std::unordered_map<std::string, std::size_t> topic_index;
    std::size_t visual_dim = 0;
    std::size_t candidate_rows = 0;
    std::size_t distinct_images = 0;

    const Topic& topic(const std::string& topic_id) const;
    const std::vector<ImageCandidate>& candidates_for(const std::string& topic_id) const;
    std::vector<std::string> topic_ids() const;
};

// Strict mode enforces the full-corpus shape: exactly 10 terms per topic,
// exactly 20 candidates per topic, 1000-dim visual vectors, and a rating
// on every candidate. Lenient mode accepts toy corpora with any uniform
// visual dimension.
inline constexpr std::size_t kTopicTermCount = 10;
inline constexpr std::size_t kCandidatesPerTopic = 20;
inline constexpr std::size_t kVisualDim = 1000;

/// Loads and cross-links the corpus.
///   topics file:     `topic_id TAB term1 TAB ... TAB term10`
///   candidates file: `topic_id TAB image_id TAB rating TAB caption text`
///                    (rating may be `NA`)
///   visuals file:    `image_id SP v1 ... vD`, one record per line
Dataset load_dataset(const std::string& topics_path, const std::string& candidates_path,
                     const std::string& visuals_path, bool strict = true);

struct VisualVectors {
    std::unordered_map<std::string, std::vector<double>> by_id;
    std::size_t dimension = 0;
};

/// Loads just the visual-vector file. Strict mode pins the dimension to
/// kVisualDim; otherwise the first record sets it.
VisualVectors load_visual_vectors(const std::string& path, bool strict = false);

/// Draws k candidate images without replacement from the pooled candidates
/// of `pool_topics`, excluding any image that already appears among
/// `topic_id`'s own candidates. Each drawn image is returned with its
/// rating replaced by 0.
std::vector<ImageCandidate> generate_negatives(const Dataset& dataset, const std::string& topic_id,
                                               std::span<const std::string> pool_topics,
                                               std::size_t k, std::mt19937_64& rng);

struct FoldSplit {
    std::size_t fold_index = 0;
    std::vector<std::string> train_topics;
    std::vector<std::string> test_topics;
};

/// Seeded shuffle followed by a contiguous partition into k test blocks.
/// A non-divisible remainder is spread one per leading fold.
std::vector<FoldSplit> kfold_split(std::span<const std::string> topic_ids, std::size_t k,
                                   std::uint64_t seed);

}  // namespace topiclabel
