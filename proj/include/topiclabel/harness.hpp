#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "topiclabel/baselines.hpp"
#include "topiclabel/dataset.hpp"
#include "topiclabel/embeddings.hpp"
#include "topiclabel/features.hpp"
#include "topiclabel/metrics.hpp"
#include "topiclabel/neuralnet.hpp"

namespace topiclabel {

enum class Method { Dnn, LocalPpr, GlobalPpr, Linear };

std::string_view method_name(Method method);
Method parse_method(std::string_view name);
std::vector<Method> parse_methods(std::string_view csv);

/// Everything a run needs. Defaults reproduce the full-corpus protocol:
/// 5 folds, 30 epochs, batch 16, dropout 0.2, 20 negatives per topic.
struct RunConfig {
    std::string embeddings_path;
    std::string topics_path;
    std::string candidates_path;
    std::string visuals_path;
    std::size_t embedding_dim = 300;
    FeatureConfig features;
    TrainConfig train;
    PprConfig ppr;
    double linear_l2 = 1.0;
    std::size_t folds = 5;
    std::size_t negatives_per_topic = 20;
    std::uint64_t seed = 42;
    bool strict = true;
    bool output_bias = true;
    GainVariant gain = GainVariant::Linear;

    /// Stable hash of the protocol parameters (paths excluded).
    std::string fingerprint() const;
};

/// Applies one `key=value` assignment; throws ConfigError on unknown keys
/// or unparsable values.
void apply_config_entry(RunConfig& config, std::string_view key, std::string_view value);

/// Flat key=value file, `#` comments and blank lines ignored.
RunConfig load_run_config(const std::string& path);

struct FoldMetrics {
    double top1 = 0.0;
    double ndcg1 = 0.0;
    double ndcg3 = 0.0;
    double ndcg5 = 0.0;
};

struct PerTopicTop1 {
    std::string topic_id;
    double rating = 0.0;
};

struct MethodResult {
    Method method = Method::Dnn;
    std::vector<FoldMetrics> folds;
    FoldMetrics aggregate;                 // mean over folds
    std::vector<PerTopicTop1> per_topic;   // union of test folds, sorted by topic id
};

struct PairedSignificance {
    Method method_a = Method::Dnn;
    Method method_b = Method::Dnn;
    double t = 0.0;
    double p = 1.0;
};

struct EvaluationReport {
    std::string version;
    std::string fingerprint;
    std::uint64_t seed = 0;
    std::size_t folds = 0;
    std::string features;
    GainVariant gain = GainVariant::Linear;
    std::vector<MethodResult> methods;
    std::vector<PairedSignificance> significance;

    const MethodResult& result_for(Method method) const;
    std::string to_tsv() const;
    std::string to_table() const;
};

/// One fold's assembled training set, with per-example provenance kept
/// for leakage checks.
struct FoldTrainingSet {
    std::vector<TrainExample> examples;
    std::vector<std::string> topic_ids;  // parallel to examples
    std::vector<std::string> image_ids;
    std::vector<char> is_negative;
};

/// Featurizes the 20 rated candidates of every training topic plus
/// `negatives_per_topic` sampled negatives (rating 0). Deterministic
/// given the seed.
FoldTrainingSet assemble_fold_training(const Dataset& dataset, const EmbeddingTable& table,
                                       const FoldSplit& split, const FeatureConfig& features,
                                       std::size_t negatives_per_topic, std::uint64_t seed);

/// 5-fold protocol: per fold, train/fit each method on the fold's
/// training examples and rank every test topic's candidates; metrics per
/// fold, aggregated over folds, paired t-tests on per-topic top-1 ratings.
EvaluationReport run_cross_validation(const Dataset& dataset, const EmbeddingTable& table,
                                      const RunConfig& config, std::span<const Method> methods);

/// Loads the corpus and embeddings from the config paths, then runs.
EvaluationReport run_cross_validation(const RunConfig& config, std::span<const Method> methods);

/// Trains one model on every topic in the corpus (with negatives) and
/// returns it together with the epoch loss history.
std::pair<MlpModel, std::vector<double>> train_full(const Dataset& dataset,
                                                    const EmbeddingTable& table,
                                                    const RunConfig& config);

/// Scores an arbitrary (topic, image) pair with a trained model.
double score_pair(const MlpModel& model, const EmbeddingTable& table,
                  std::span<const std::string> topic_terms, std::string_view caption,
                  std::span<const double> visual);

struct BenchmarkConfig {
    std::vector<std::size_t> dnn_pools{1000, 2000, 4000, 8000, 16000};
    std::vector<std::size_t> ppr_pools{250, 500, 1000, 2000, 4000};
    std::size_t trials = 3;
    std::uint64_t seed = 7;
};

struct BenchmarkRow {
    std::string stage;  // dnn-score | ppr-build | ppr-iterate
    std::size_t pool_size = 0;
    double median_ms = 0.0;
};

struct BenchmarkResult {
    std::vector<BenchmarkRow> rows;
    double dnn_score_slope = 0.0;  // log-log slope of scoring time vs pool size
    double ppr_build_slope = 0.0;  // log-log slope of graph construction time
    std::uint64_t seed = 0;
    std::size_t trials = 0;

    std::string to_tsv() const;
};

/// Times DNN batch scoring and global-PPR graph construction over
/// synthetic candidate pools of growing size.
BenchmarkResult benchmark_scaling(const BenchmarkConfig& config);

/// Splitmix-style mixing for deriving per-fold and per-topic seeds.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t tag);
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t tag, std::string_view name);

}  // namespace topiclabel
