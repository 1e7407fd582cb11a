#include "topiclabel/harness.hpp"

#include <algorithm>
#include <chrono>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "topiclabel/error.hpp"
#include "topiclabel/version.hpp"

namespace topiclabel {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::uint64_t fnv1a(std::string_view text, std::uint64_t hash = 1469598103934665603ULL) {
    for (unsigned char c : text) {
        hash ^= c;
        hash *= 1099511628211ULL;
    }
    return hash;
}

std::string format_double(double value, const char* fmt = "%.6f") {
    char buf[64];
    std::snprintf(buf, sizeof(buf), fmt, value);
    return buf;
}

double parse_double_or_throw(std::string_view key, std::string_view value) {
    double out = 0.0;
    auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
    if (ec != std::errc{} || ptr != value.data() + value.size()) {
        throw ConfigError("bad value '" + std::string(value) + "' for key '" + std::string(key) +
                          "'");
    }
    return out;
}

std::uint64_t parse_uint_or_throw(std::string_view key, std::string_view value) {
    std::uint64_t out = 0;
    auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
    if (ec != std::errc{} || ptr != value.data() + value.size()) {
        throw ConfigError("bad value '" + std::string(value) + "' for key '" + std::string(key) +
                          "'");
    }
    return out;
}

bool parse_bool_or_throw(std::string_view key, std::string_view value) {
    if (value == "true" || value == "1" || value == "on") return true;
    if (value == "false" || value == "0" || value == "off") return false;
    throw ConfigError("bad boolean '" + std::string(value) + "' for key '" + std::string(key) +
                      "'");
}

void check_metrics_finite(const FoldMetrics& m, const std::string& where) {
    if (!std::isfinite(m.top1) || !std::isfinite(m.ndcg1) || !std::isfinite(m.ndcg3) ||
        !std::isfinite(m.ndcg5)) {
        throw NumericError("non-finite metric in " + where);
    }
}

FoldMetrics metrics_from_ranked(std::span<const RankedList> ranked, GainVariant gain) {
    FoldMetrics m;
    m.top1 = top1_average_rating(ranked);
    double n1 = 0.0, n3 = 0.0, n5 = 0.0;
    for (const RankedList& list : ranked) {
        n1 += ndcg_at_k(list, 1, gain);
        n3 += ndcg_at_k(list, 3, gain);
        n5 += ndcg_at_k(list, 5, gain);
    }
    const double inv = 1.0 / static_cast<double>(ranked.size());
    m.ndcg1 = n1 * inv;
    m.ndcg3 = n3 * inv;
    m.ndcg5 = n5 * inv;
    return m;
}

double median_of(std::vector<double> values) {
    std::sort(values.begin(), values.end());
    const std::size_t n = values.size();
    return n % 2 == 1 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

// Least-squares slope of log2(time) against log2(size).
double loglog_slope(std::span<const std::size_t> sizes, std::span<const double> times) {
    const std::size_t n = sizes.size();
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double x = std::log2(static_cast<double>(sizes[i]));
        const double y = std::log2(times[i]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    const double denom = n * sxx - sx * sx;
    return (n * sxy - sx * sy) / denom;
}

}  // namespace

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t tag) {
    return splitmix64(seed ^ splitmix64(tag));
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t tag, std::string_view name) {
    return mix_seed(seed, tag ^ fnv1a(name));
}

std::string_view method_name(Method method) {
    switch (method) {
        case Method::Dnn: return "dnn";
        case Method::LocalPpr: return "local-ppr";
        case Method::GlobalPpr: return "global-ppr";
        case Method::Linear: return "linear";
    }
    throw ArgumentError("unknown method");
}

Method parse_method(std::string_view name) {
    if (name == "dnn") return Method::Dnn;
    if (name == "local-ppr") return Method::LocalPpr;
    if (name == "global-ppr") return Method::GlobalPpr;
    if (name == "linear") return Method::Linear;
    throw ConfigError("unknown method '" + std::string(name) +
                      "' (expected dnn, local-ppr, global-ppr or linear)");
}

std::vector<Method> parse_methods(std::string_view csv) {
    std::vector<Method> methods;
    std::size_t start = 0;
    while (start <= csv.size()) {
        std::size_t comma = csv.find(',', start);
        if (comma == std::string_view::npos) comma = csv.size();
        std::string_view item = csv.substr(start, comma - start);
        if (!item.empty()) methods.push_back(parse_method(item));
        start = comma + 1;
    }
    if (methods.empty()) throw ConfigError("no methods given");
    return methods;
}

std::string RunConfig::fingerprint() const {
    std::ostringstream canon;
    canon << "features=" << features.name() << '\n'
          << "embed_dim=" << embedding_dim << '\n'
          << "folds=" << folds << '\n'
          << "seed=" << seed << '\n'
          << "epochs=" << train.epochs << '\n'
          << "batch_size=" << train.batch_size << '\n'
          << "dropout=" << format_double(train.dropout_rate) << '\n'
          << "lr=" << format_double(train.learning_rate, "%.9g") << '\n'
          << "rmsprop_decay=" << format_double(train.rmsprop_decay) << '\n'
          << "epsilon=" << format_double(train.epsilon, "%.9g") << '\n'
          << "damping=" << format_double(ppr.damping) << '\n'
          << "tol=" << format_double(ppr.tolerance, "%.9g") << '\n'
          << "max_iters=" << ppr.max_iters << '\n'
          << "ppr_top_m=" << ppr.top_neighbors << '\n'
          << "linear_l2=" << format_double(linear_l2, "%.9g") << '\n'
          << "negatives=" << negatives_per_topic << '\n'
          << "gain=" << gain_variant_name(gain) << '\n'
          << "strict=" << (strict ? "true" : "false") << '\n'
          << "output_bias=" << (output_bias ? "true" : "false") << '\n';
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%016llx",
                  static_cast<unsigned long long>(fnv1a(canon.str())));
    return buf;
}

void apply_config_entry(RunConfig& config, std::string_view key, std::string_view value) {
    if (key == "embeddings") {
        config.embeddings_path = value;
    } else if (key == "topics") {
        config.topics_path = value;
    } else if (key == "candidates") {
        config.candidates_path = value;
    } else if (key == "visuals") {
        config.visuals_path = value;
    } else if (key == "embed_dim") {
        config.embedding_dim = parse_uint_or_throw(key, value);
    } else if (key == "features") {
        config.features = FeatureConfig::parse(value);
    } else if (key == "folds") {
        config.folds = parse_uint_or_throw(key, value);
    } else if (key == "seed") {
        config.seed = parse_uint_or_throw(key, value);
    } else if (key == "epochs") {
        config.train.epochs = parse_uint_or_throw(key, value);
    } else if (key == "batch_size") {
        config.train.batch_size = parse_uint_or_throw(key, value);
    } else if (key == "dropout") {
        config.train.dropout_rate = parse_double_or_throw(key, value);
    } else if (key == "lr") {
        config.train.learning_rate = parse_double_or_throw(key, value);
    } else if (key == "rmsprop_decay") {
        config.train.rmsprop_decay = parse_double_or_throw(key, value);
    } else if (key == "epsilon") {
        config.train.epsilon = parse_double_or_throw(key, value);
    } else if (key == "damping") {
        config.ppr.damping = parse_double_or_throw(key, value);
    } else if (key == "tol") {
        config.ppr.tolerance = parse_double_or_throw(key, value);
    } else if (key == "max_iters") {
        config.ppr.max_iters = parse_uint_or_throw(key, value);
    } else if (key == "ppr_top_m") {
        config.ppr.top_neighbors = parse_uint_or_throw(key, value);
    } else if (key == "linear_l2") {
        config.linear_l2 = parse_double_or_throw(key, value);
    } else if (key == "negatives") {
        config.negatives_per_topic = parse_uint_or_throw(key, value);
    } else if (key == "gain") {
        config.gain = parse_gain_variant(value);
    } else if (key == "strict") {
        config.strict = parse_bool_or_throw(key, value);
    } else if (key == "output_bias") {
        config.output_bias = parse_bool_or_throw(key, value);
    } else {
        throw ConfigError("unknown config key '" + std::string(key) + "'");
    }
}

RunConfig load_run_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config file: " + path);

    RunConfig config;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::string_view view = line;
        if (!view.empty() && view.back() == '\r') view.remove_suffix(1);
        while (!view.empty() && (view.front() == ' ' || view.front() == '\t')) view.remove_prefix(1);
        if (view.empty() || view.front() == '#') continue;
        std::size_t eq = view.find('=');
        if (eq == std::string_view::npos) {
            throw ConfigError("config line " + std::to_string(line_no) +
                              " is not a key=value pair");
        }
        apply_config_entry(config, view.substr(0, eq), view.substr(eq + 1));
    }
    return config;
}

FoldTrainingSet assemble_fold_training(const Dataset& dataset, const EmbeddingTable& table,
                                       const FoldSplit& split, const FeatureConfig& features,
                                       std::size_t negatives_per_topic, std::uint64_t seed) {
    FoldTrainingSet out;
    const std::size_t expected =
        split.train_topics.size() * (kCandidatesPerTopic + negatives_per_topic);
    out.examples.reserve(expected);
    out.topic_ids.reserve(expected);
    out.image_ids.reserve(expected);
    out.is_negative.reserve(expected);

    std::vector<std::string> pool;
    pool.reserve(split.train_topics.size() - 1);
    for (const std::string& topic_id : split.train_topics) {
        const Topic& topic = dataset.topic(topic_id);
        for (const ImageCandidate& cand : dataset.candidates_for(topic_id)) {
            if (!cand.rating.has_value()) {
                throw ValidationError("image '" + cand.image_id + "' (topic '" + topic_id +
                                      "') has no rating; cannot build training examples");
            }
            out.examples.push_back(
                {featurize_pair(topic, cand, table, features).values, *cand.rating});
            out.topic_ids.push_back(topic_id);
            out.image_ids.push_back(cand.image_id);
            out.is_negative.push_back(0);
        }
        if (negatives_per_topic == 0) continue;

        pool.clear();
        for (const std::string& other : split.train_topics) {
            if (other != topic_id) pool.push_back(other);
        }
        std::mt19937_64 rng(mix_seed(seed, 0x6e656761ULL + split.fold_index, topic_id));
        for (const ImageCandidate& neg :
             generate_negatives(dataset, topic_id, pool, negatives_per_topic, rng)) {
            out.examples.push_back({featurize_pair(topic, neg, table, features).values, 0.0});
            out.topic_ids.push_back(topic_id);
            out.image_ids.push_back(neg.image_id);
            out.is_negative.push_back(1);
        }
    }
    return out;
}

namespace {

// Fraction of topic terms and caption tokens found in the table.
double vocabulary_coverage(const Dataset& dataset, const EmbeddingTable& table) {
    std::size_t total = 0, found = 0;
    for (const Topic& topic : dataset.topics) {
        for (const std::string& term : topic.terms) {
            ++total;
            if (table.contains(term)) ++found;
        }
    }
    for (const auto& cands : dataset.candidates) {
        for (const ImageCandidate& c : cands) {
            for (const std::string& token : c.caption_tokens) {
                ++total;
                if (table.contains(token)) ++found;
            }
        }
    }
    return total == 0 ? 0.0 : static_cast<double>(found) / static_cast<double>(total);
}

struct FoldEvaluation {
    std::vector<RankedList> ranked;  // one list per test topic
};

}  // namespace

EvaluationReport run_cross_validation(const Dataset& dataset, const EmbeddingTable& table,
                                      const RunConfig& config, std::span<const Method> methods) {
    if (methods.empty()) throw ArgumentError("run_cross_validation requires at least one method");
    if (vocabulary_coverage(dataset, table) == 0.0) {
        throw ValidationError("embeddings cover no topic or caption tokens");
    }

    const std::vector<std::string> topic_ids = dataset.topic_ids();
    const std::vector<FoldSplit> splits = kfold_split(topic_ids, config.folds, config.seed);
    const std::size_t input_dim = config.features.input_dim(table.dimension(), dataset.visual_dim);

    EvaluationReport report;
    report.version = kVersion;
    report.fingerprint = config.fingerprint();
    report.seed = config.seed;
    report.folds = config.folds;
    report.features = config.features.name();
    report.gain = config.gain;
    report.methods.resize(methods.size());
    for (std::size_t m = 0; m < methods.size(); ++m) report.methods[m].method = methods[m];

    const bool needs_training = std::any_of(methods.begin(), methods.end(), [](Method m) {
        return m == Method::Dnn || m == Method::Linear;
    });

    for (const FoldSplit& split : splits) {
        FoldTrainingSet training;
        if (needs_training) {
            training = assemble_fold_training(dataset, table, split, config.features,
                                              config.negatives_per_topic, config.seed);
            // Leakage scan: no test topic may contribute a training example.
            const std::set<std::string> test_set(split.test_topics.begin(),
                                                 split.test_topics.end());
            for (const std::string& topic_id : training.topic_ids) {
                if (test_set.count(topic_id) > 0) {
                    throw NumericError("test-fold leakage: topic '" + topic_id +
                                       "' contributed a training example in fold " +
                                       std::to_string(split.fold_index));
                }
            }
        }

        // Test-side featurization is shared between the pointwise methods.
        std::vector<std::vector<std::vector<double>>> test_inputs;  // topic -> candidate -> input
        if (needs_training) {
            test_inputs.reserve(split.test_topics.size());
            for (const std::string& topic_id : split.test_topics) {
                const Topic& topic = dataset.topic(topic_id);
                std::vector<std::vector<double>> inputs;
                for (const ImageCandidate& cand : dataset.candidates_for(topic_id)) {
                    inputs.push_back(featurize_pair(topic, cand, table, config.features).values);
                }
                test_inputs.push_back(std::move(inputs));
            }
        }

        // Global-PPR pool: every candidate of the fold's test topics.
        std::vector<ImageCandidate> pool_images;
        SimilarityGraph pool_graph;
        if (std::find(methods.begin(), methods.end(), Method::GlobalPpr) != methods.end()) {
            for (const std::string& topic_id : split.test_topics) {
                const auto& cands = dataset.candidates_for(topic_id);
                pool_images.insert(pool_images.end(), cands.begin(), cands.end());
            }
            pool_graph = build_similarity_graph(pool_images, table, config.ppr.top_neighbors);
        }

        MlpModel dnn;
        LinearModel linear;
        for (Method method : methods) {
            if (method == Method::Dnn) {
                dnn = init_model(input_dim, kHiddenSizes,
                                 mix_seed(config.seed, 0x696e6974ULL + split.fold_index),
                                 config.output_bias);
                dnn.feature_config = config.features;
                TrainConfig train_config = config.train;
                train_config.seed = mix_seed(config.seed, 0x747261696eULL + split.fold_index);
                train(dnn, training.examples, train_config);
            } else if (method == Method::Linear) {
                linear = train_linear(training.examples, config.linear_l2);
            }
        }

        for (std::size_t m = 0; m < methods.size(); ++m) {
            std::vector<RankedList> ranked;
            ranked.reserve(split.test_topics.size());
            for (std::size_t t = 0; t < split.test_topics.size(); ++t) {
                const std::string& topic_id = split.test_topics[t];
                const Topic& topic = dataset.topic(topic_id);
                const auto& cands = dataset.candidates_for(topic_id);

                switch (methods[m]) {
                    case Method::Dnn: {
                        std::vector<double> scores(cands.size());
                        for (std::size_t c = 0; c < cands.size(); ++c) {
                            scores[c] = predict(dnn, test_inputs[t][c]);
                        }
                        ranked.push_back(rank_candidates(topic_id, cands, scores));
                        break;
                    }
                    case Method::Linear: {
                        std::vector<double> scores(cands.size());
                        for (std::size_t c = 0; c < cands.size(); ++c) {
                            scores[c] = predict_linear(linear, test_inputs[t][c]);
                        }
                        ranked.push_back(rank_candidates(topic_id, cands, scores));
                        break;
                    }
                    case Method::LocalPpr:
                        ranked.push_back(local_ppr_rank(topic, cands, table, config.ppr));
                        break;
                    case Method::GlobalPpr:
                        ranked.push_back(
                            global_ppr_rank(topic, pool_graph, pool_images, cands, table,
                                            config.ppr));
                        break;
                }
            }

            FoldMetrics fold_metrics = metrics_from_ranked(ranked, config.gain);
            check_metrics_finite(fold_metrics, "fold " + std::to_string(split.fold_index) +
                                                   " method " +
                                                   std::string(method_name(methods[m])));
            report.methods[m].folds.push_back(fold_metrics);
            for (const RankedList& list : ranked) {
                report.methods[m].per_topic.push_back({list.topic_id, list.gold.front()});
            }
        }
    }

    for (MethodResult& result : report.methods) {
        FoldMetrics sum;
        for (const FoldMetrics& fm : result.folds) {
            sum.top1 += fm.top1;
            sum.ndcg1 += fm.ndcg1;
            sum.ndcg3 += fm.ndcg3;
            sum.ndcg5 += fm.ndcg5;
        }
        const double inv = 1.0 / static_cast<double>(result.folds.size());
        result.aggregate = {sum.top1 * inv, sum.ndcg1 * inv, sum.ndcg3 * inv, sum.ndcg5 * inv};
        std::sort(result.per_topic.begin(), result.per_topic.end(),
                  [](const PerTopicTop1& a, const PerTopicTop1& b) {
                      return a.topic_id < b.topic_id;
                  });
    }

    // Paired t-test on per-topic top-1 ratings; each topic is scored in
    // exactly one test fold, so the union pairs cleanly.
    for (std::size_t a = 0; a < report.methods.size(); ++a) {
        for (std::size_t b = a + 1; b < report.methods.size(); ++b) {
            std::vector<double> ra, rb;
            ra.reserve(report.methods[a].per_topic.size());
            rb.reserve(report.methods[b].per_topic.size());
            for (const PerTopicTop1& pt : report.methods[a].per_topic) ra.push_back(pt.rating);
            for (const PerTopicTop1& pt : report.methods[b].per_topic) rb.push_back(pt.rating);
            const TTestResult tt = paired_t_test(ra, rb);
            report.significance.push_back(
                {report.methods[a].method, report.methods[b].method, tt.t, tt.p});
        }
    }
    return report;
}

EvaluationReport run_cross_validation(const RunConfig& config, std::span<const Method> methods) {
    const Dataset dataset = load_dataset(config.topics_path, config.candidates_path,
                                         config.visuals_path, config.strict);
    const EmbeddingTable table = EmbeddingTable::load(config.embeddings_path, config.embedding_dim);
    return run_cross_validation(dataset, table, config, methods);
}

std::pair<MlpModel, std::vector<double>> train_full(const Dataset& dataset,
                                                    const EmbeddingTable& table,
                                                    const RunConfig& config) {
    // A degenerate split whose training side is the whole corpus.
    FoldSplit split;
    split.fold_index = 0;
    split.train_topics = dataset.topic_ids();
    FoldTrainingSet training = assemble_fold_training(dataset, table, split, config.features,
                                                      config.negatives_per_topic, config.seed);

    const std::size_t input_dim = config.features.input_dim(table.dimension(), dataset.visual_dim);
    MlpModel model = init_model(input_dim, kHiddenSizes, mix_seed(config.seed, 0x696e6974ULL),
                                config.output_bias);
    model.feature_config = config.features;
    TrainConfig train_config = config.train;
    train_config.seed = mix_seed(config.seed, 0x747261696eULL);
    std::vector<double> history = train(model, training.examples, train_config);
    return {std::move(model), std::move(history)};
}

double score_pair(const MlpModel& model, const EmbeddingTable& table,
                  std::span<const std::string> topic_terms, std::string_view caption,
                  std::span<const double> visual) {
    if (topic_terms.empty()) throw ArgumentError("score_pair requires topic terms");

    Topic topic;
    topic.id = "query";
    topic.terms.assign(topic_terms.begin(), topic_terms.end());

    ImageCandidate image;
    image.image_id = "query-image";
    image.caption_tokens = tokenize(caption);
    image.visual.assign(visual.begin(), visual.end());

    if (model.feature_config.use_visual && image.visual.empty()) {
        throw ConfigError("model expects a visual vector (feature config " +
                          model.feature_config.name() + ")");
    }

    InputVector input = featurize_pair(topic, image, table, model.feature_config);
    if (input.size() != model.input_dim) {
        throw ConfigError("featurized input has " + std::to_string(input.size()) +
                          " components but the model expects " + std::to_string(model.input_dim) +
                          " (feature config " + model.feature_config.name() + ")");
    }
    return predict(model, input.values);
}

BenchmarkResult benchmark_scaling(const BenchmarkConfig& config) {
    if (config.trials == 0) throw ArgumentError("benchmark requires at least one trial");
    for (std::span<const std::size_t> pools : {std::span<const std::size_t>(config.dnn_pools),
                                               std::span<const std::size_t>(config.ppr_pools)}) {
        if (pools.size() < 2) throw ArgumentError("benchmark requires at least two pool sizes");
        for (std::size_t i = 1; i < pools.size(); ++i) {
            if (pools[i] <= pools[i - 1]) {
                throw ArgumentError("benchmark pool sizes must be ascending");
            }
        }
        if (pools.front() < 2) throw ArgumentError("benchmark pool sizes must be >= 2");
    }

    using clock = std::chrono::steady_clock;
    BenchmarkResult result;
    result.seed = config.seed;
    result.trials = config.trials;

    // DNN batch scoring over random inputs at the production input width.
    {
        const MlpModel model = init_model(1600, mix_seed(config.seed, 0x646e6eULL));
        std::mt19937_64 rng(mix_seed(config.seed, 0x706f6f6cULL));
        std::uniform_real_distribution<double> uniform(-1.0, 1.0);

        std::vector<double> medians;
        volatile double sink = 0.0;  // keeps the scoring loop from being elided
        for (std::size_t pool_size : config.dnn_pools) {
            std::vector<std::vector<double>> inputs(pool_size);
            for (auto& input : inputs) {
                input.resize(model.input_dim);
                for (double& v : input) v = uniform(rng);
            }
            std::vector<double> times;
            for (std::size_t trial = 0; trial < config.trials; ++trial) {
                const auto start = clock::now();
                for (const auto& input : inputs) sink = sink + predict(model, input);
                const auto stop = clock::now();
                times.push_back(std::chrono::duration<double, std::milli>(stop - start).count());
            }
            const double med = median_of(times);
            medians.push_back(med);
            result.rows.push_back({"dnn-score", pool_size, med});
        }
        (void)sink;
        result.dnn_score_slope = loglog_slope(config.dnn_pools, medians);
    }

    // Global-PPR graph construction over synthetic candidates.
    {
        constexpr std::size_t kVocab = 500;
        constexpr std::size_t kEmbedDim = 64;
        constexpr std::size_t kSynthVisualDim = 128;

        std::mt19937_64 rng(mix_seed(config.seed, 0x677261706846ULL));
        std::uniform_real_distribution<double> uniform(-1.0, 1.0);
        std::uniform_int_distribution<std::size_t> word(0, kVocab - 1);

        EmbeddingTable table(kEmbedDim);
        for (std::size_t w = 0; w < kVocab; ++w) {
            std::vector<double> vec(kEmbedDim);
            for (double& v : vec) v = uniform(rng);
            table.insert("w" + std::to_string(w), std::move(vec));
        }

        const std::size_t max_pool = config.ppr_pools.back();
        std::vector<ImageCandidate> candidates(max_pool);
        for (std::size_t i = 0; i < max_pool; ++i) {
            ImageCandidate& c = candidates[i];
            c.image_id = "img" + std::to_string(i);
            const std::size_t caption_len = 3 + word(rng) % 4;
            for (std::size_t t = 0; t < caption_len; ++t) {
                c.caption_tokens.push_back("w" + std::to_string(word(rng)));
            }
            c.visual.resize(kSynthVisualDim);
            for (double& v : c.visual) v = std::abs(uniform(rng));
        }

        std::vector<double> build_medians;
        for (std::size_t pool_size : config.ppr_pools) {
            std::span<const ImageCandidate> pool(candidates.data(), pool_size);
            std::vector<double> build_times, iterate_times;
            for (std::size_t trial = 0; trial < config.trials; ++trial) {
                const auto start = clock::now();
                SimilarityGraph graph = build_similarity_graph(pool, table);
                const auto built = clock::now();
                const PprResult ppr = personalized_pagerank(graph);
                const auto stop = clock::now();
                if (ppr.scores.size() != pool_size) {
                    throw NumericError("pagerank returned a wrong-sized score vector");
                }
                build_times.push_back(
                    std::chrono::duration<double, std::milli>(built - start).count());
                iterate_times.push_back(
                    std::chrono::duration<double, std::milli>(stop - built).count());
            }
            const double build_med = median_of(build_times);
            build_medians.push_back(build_med);
            result.rows.push_back({"ppr-build", pool_size, build_med});
            result.rows.push_back({"ppr-iterate", pool_size, median_of(iterate_times)});
        }
        result.ppr_build_slope = loglog_slope(config.ppr_pools, build_medians);
    }
    return result;
}

std::string BenchmarkResult::to_tsv() const {
    std::ostringstream out;
    out << "# seed\t" << seed << '\n';
    out << "# trials\t" << trials << '\n';
    out << "stage\tpool_size\tmedian_ms\n";
    for (const BenchmarkRow& row : rows) {
        out << row.stage << '\t' << row.pool_size << '\t' << format_double(row.median_ms, "%.3f")
            << '\n';
    }
    out << "# dnn-score loglog slope\t" << format_double(dnn_score_slope, "%.4f") << '\n';
    out << "# ppr-build loglog slope\t" << format_double(ppr_build_slope, "%.4f") << '\n';
    return out.str();
}

const MethodResult& EvaluationReport::result_for(Method method) const {
    for (const MethodResult& result : methods) {
        if (result.method == method) return result;
    }
    throw ArgumentError("report has no results for method '" +
                        std::string(method_name(method)) + "'");
}

std::string EvaluationReport::to_tsv() const {
    std::ostringstream out;
    out << "# topiclabel evaluation report\n";
    out << "# version\t" << version << '\n';
    out << "# fingerprint\t" << fingerprint << '\n';
    out << "# seed\t" << seed << '\n';
    out << "# folds\t" << folds << '\n';
    out << "# features\t" << features << '\n';
    out << "# gain\t" << gain_variant_name(gain) << '\n';
    out << "# tie_break\timage_id_asc\n";
    out << "method\tfold\ttop1_avg\tndcg@1\tndcg@3\tndcg@5\n";
    for (const MethodResult& result : methods) {
        for (std::size_t f = 0; f < result.folds.size(); ++f) {
            const FoldMetrics& m = result.folds[f];
            out << method_name(result.method) << '\t' << f << '\t' << format_double(m.top1)
                << '\t' << format_double(m.ndcg1) << '\t' << format_double(m.ndcg3) << '\t'
                << format_double(m.ndcg5) << '\n';
        }
        const FoldMetrics& agg = result.aggregate;
        out << method_name(result.method) << "\tmean\t" << format_double(agg.top1) << '\t'
            << format_double(agg.ndcg1) << '\t' << format_double(agg.ndcg3) << '\t'
            << format_double(agg.ndcg5) << '\n';
    }
    if (!significance.empty()) {
        out << "# paired t-test on per-topic top-1 ratings (two-sided)\n";
        out << "method_a\tmethod_b\tt\tp\n";
        for (const PairedSignificance& sig : significance) {
            out << method_name(sig.method_a) << '\t' << method_name(sig.method_b) << '\t'
                << format_double(sig.t, "%.4f") << '\t' << format_double(sig.p, "%.6g") << '\n';
        }
    }
    return out.str();
}

std::string EvaluationReport::to_table() const {
    std::ostringstream out;
    out << "evaluation (features=" << features << ", folds=" << folds << ", seed=" << seed
        << ", gain=" << gain_variant_name(gain) << ", fingerprint=" << fingerprint << ")\n";
    char line[160];
    std::snprintf(line, sizeof(line), "%-12s %10s %8s %8s %8s\n", "method", "top1_avg", "ndcg@1",
                  "ndcg@3", "ndcg@5");
    out << line;
    for (const MethodResult& result : methods) {
        const FoldMetrics& m = result.aggregate;
        std::snprintf(line, sizeof(line), "%-12s %10.4f %8.4f %8.4f %8.4f\n",
                      std::string(method_name(result.method)).c_str(), m.top1, m.ndcg1, m.ndcg3,
                      m.ndcg5);
        out << line;
    }
    for (const PairedSignificance& sig : significance) {
        std::snprintf(line, sizeof(line), "%s vs %s: t=%.4f p=%.6g%s\n",
                      std::string(method_name(sig.method_a)).c_str(),
                      std::string(method_name(sig.method_b)).c_str(), sig.t, sig.p,
                      sig.p < 0.01 ? " (significant at p<0.01)" : "");
        out << line;
    }
    return out.str();
}

}  // namespace topiclabel
