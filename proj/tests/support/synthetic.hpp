#pragma once

#include <cstdint>
#include <string>

#include "topiclabel/dataset.hpp"
#include "topiclabel/embeddings.hpp"

namespace topiclabel::testing {

struct SyntheticCorpus {
    Dataset dataset;
    EmbeddingTable table;
};

/// Full-shape corpus (10 terms, 20 candidates per topic, 1000-dim visuals,
/// 300-dim embeddings over a shared vocabulary) with uniform random
/// ratings. Passes strict-mode validation when written to files.
SyntheticCorpus make_strict_corpus(std::size_t n_topics, std::uint64_t seed);

/// Small lenient corpus whose ratings are a noisy monotone function of the
/// alignment between a hidden per-topic direction and each candidate's
/// caption/visual features, so a pointwise regressor can separate good
/// candidates from bad ones.
SyntheticCorpus make_separable_corpus(std::size_t n_topics, std::uint64_t seed,
                                      std::size_t embed_dim = 16, std::size_t visual_dim = 24,
                                      double rating_noise = 0.2);

struct CorpusFiles {
    std::string topics;
    std::string candidates;
    std::string visuals;
    std::string embeddings;
};

/// Writes the four corpus files into `dir` and returns their paths.
CorpusFiles write_corpus_files(const SyntheticCorpus& corpus, const std::string& dir);

}  // namespace topiclabel::testing
