// topiclabel command line: validate corpora, train and apply the scoring
// model, run the cross-validated evaluation and baselines, benchmark the
// scoring/graph complexity contrast, and re-render reports.

#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "topiclabel/error.hpp"
#include "topiclabel/harness.hpp"
#include "topiclabel/version.hpp"

using namespace topiclabel;

namespace {

// Tracks which run-config keys the command line supplied so that the
// precedence CLI > config file > defaults holds.
struct ConfigFlags {
    std::string config_path;
    std::vector<std::pair<std::string, std::string>> overrides;

    void add(CLI::App* cmd, const std::string& key, const std::string& flag,
             const std::string& help) {
        cmd->add_option_function<std::string>(
               flag,
               [this, key](const std::string& value) { overrides.emplace_back(key, value); },
               help)
            ->type_name("TEXT");
    }

    RunConfig resolve() const {
        RunConfig config;
        if (!config_path.empty()) config = load_run_config(config_path);
        for (const auto& [key, value] : overrides) apply_config_entry(config, key, value);
        return config;
    }
};

void attach_corpus_flags(CLI::App* cmd, ConfigFlags& flags) {
    cmd->add_option("--config", flags.config_path, "flat key=value config file");
    flags.add(cmd, "embeddings", "--embeddings", "word-vector file (token v1 ... vd)");
    flags.add(cmd, "topics", "--topics", "topics TSV (topic_id, 10 terms)");
    flags.add(cmd, "candidates", "--candidates", "candidates TSV (topic, image, rating, caption)");
    flags.add(cmd, "visuals", "--visuals", "visual vectors file (image_id v1 ... vD)");
    flags.add(cmd, "embed_dim", "--embed-dim", "embedding dimension (default 300)");
    flags.add(cmd, "strict", "--strict", "strict corpus validation: true|false");
}

void attach_protocol_flags(CLI::App* cmd, ConfigFlags& flags) {
    flags.add(cmd, "features", "--features", "topic+caption+vgg | topic+caption | topic+vgg");
    flags.add(cmd, "seed", "--seed", "run seed");
    flags.add(cmd, "folds", "--folds", "cross-validation folds (default 5)");
    flags.add(cmd, "epochs", "--epochs", "training epochs (default 30)");
    flags.add(cmd, "batch_size", "--batch-size", "mini-batch size (default 16)");
    flags.add(cmd, "dropout", "--dropout", "dropout rate (default 0.2)");
    flags.add(cmd, "lr", "--lr", "learning rate (default 0.001)");
    flags.add(cmd, "rmsprop_decay", "--rmsprop-decay", "RMSProp decay (default 0.9)");
    flags.add(cmd, "epsilon", "--epsilon", "RMSProp epsilon (default 1e-8)");
    flags.add(cmd, "negatives", "--negatives", "negative examples per topic (default 20)");
    flags.add(cmd, "gain", "--gain", "nDCG gain variant: linear|exp");
    flags.add(cmd, "output_bias", "--output-bias", "bias term on the output layer: true|false");
}

void attach_ppr_flags(CLI::App* cmd, ConfigFlags& flags) {
    flags.add(cmd, "damping", "--damping", "PageRank damping (default 0.85)");
    flags.add(cmd, "tol", "--tol", "PageRank L1 tolerance (default 1e-10)");
    flags.add(cmd, "max_iters", "--max-iters", "PageRank iteration cap (default 200)");
    flags.add(cmd, "ppr_top_m", "--ppr-top-m", "keep only the m strongest edges per node (0 = dense)");
    flags.add(cmd, "linear_l2", "--linear-l2", "ridge penalty for the linear baseline");
}

void require_paths(const RunConfig& config, bool embeddings_needed) {
    if (config.topics_path.empty() || config.candidates_path.empty() ||
        config.visuals_path.empty()) {
        throw ConfigError("--topics, --candidates and --visuals are required");
    }
    if (embeddings_needed && config.embeddings_path.empty()) {
        throw ConfigError("--embeddings is required");
    }
}

void write_text(const std::string& path, const std::string& body) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open output file: " + path);
    out << body;
    if (!out) throw IoError("write failed: " + path);
}

std::vector<std::string> split_whitespace(const std::string& text) {
    std::istringstream in(text);
    std::vector<std::string> out;
    std::string token;
    while (in >> token) out.push_back(token);
    return out;
}

std::vector<std::size_t> parse_size_list(const std::string& csv) {
    std::vector<std::size_t> out;
    std::stringstream in(csv);
    std::string item;
    while (std::getline(in, item, ',')) {
        if (item.empty()) continue;
        out.push_back(std::stoull(item));
    }
    return out;
}

int run_validate(const ConfigFlags& flags, bool check_embeddings) {
    RunConfig config = flags.resolve();
    require_paths(config, false);

    const Dataset dataset =
        load_dataset(config.topics_path, config.candidates_path, config.visuals_path,
                     config.strict);
    std::cout << "topics\t" << dataset.topics.size() << "\n"
              << "candidate_rows\t" << dataset.candidate_rows << "\n"
              << "distinct_images\t" << dataset.distinct_images << "\n"
              << "visual_dim\t" << dataset.visual_dim << "\n"
              << "mode\t" << (config.strict ? "strict" : "lenient") << "\n";

    if (check_embeddings && !config.embeddings_path.empty()) {
        const EmbeddingTable table =
            EmbeddingTable::load(config.embeddings_path, config.embedding_dim);
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
        std::cout << "vocab\t" << table.size() << "\n"
                  << "duplicate_tokens\t" << table.duplicate_count() << "\n"
                  << "token_coverage\t"
                  << (total == 0 ? 0.0 : static_cast<double>(found) / total) << "\n";
        if (found == 0) throw ValidationError("embeddings cover no corpus tokens");
    }
    std::cout << "ok\n";
    return 0;
}

int run_train(const ConfigFlags& flags, const std::string& out_path) {
    RunConfig config = flags.resolve();
    require_paths(config, true);
    if (out_path.empty()) throw ConfigError("--out <model file> is required");

    const Dataset dataset = load_dataset(config.topics_path, config.candidates_path,
                                         config.visuals_path, config.strict);
    const EmbeddingTable table =
        EmbeddingTable::load(config.embeddings_path, config.embedding_dim);

    auto [model, history] = train_full(dataset, table, config);
    save_model(model, out_path);

    std::cout << "trained " << config.features.name() << " model on " << dataset.topics.size()
              << " topics (" << model.parameter_count() << " parameters)\n";
    if (!history.empty()) {
        std::cout << "epoch_loss_first\t" << history.front() << "\n"
                  << "epoch_loss_last\t" << history.back() << "\n";
    }
    std::cout << "model\t" << out_path << "\n";
    return 0;
}

int run_cv(const ConfigFlags& flags, const std::string& methods_csv, const std::string& out_path,
           const std::string& report_path) {
    RunConfig config = flags.resolve();
    require_paths(config, true);
    const std::vector<Method> methods = parse_methods(methods_csv);

    const EvaluationReport report = run_cross_validation(config, methods);
    const std::string tsv = report.to_tsv();
    if (!out_path.empty()) write_text(out_path, tsv);
    if (!report_path.empty() && report_path != out_path) write_text(report_path, tsv);
    std::cout << report.to_table();
    if (!out_path.empty()) std::cout << "report\t" << out_path << "\n";
    return 0;
}

int run_score(const std::string& model_path, const ConfigFlags& flags, const std::string& topic,
              const std::string& caption, const std::string& visual_file,
              const std::string& visual_id) {
    if (model_path.empty()) throw ConfigError("--model is required");
    RunConfig config = flags.resolve();
    if (config.embeddings_path.empty()) throw ConfigError("--embeddings is required");

    const MlpModel model = load_model(model_path);
    const EmbeddingTable table =
        EmbeddingTable::load(config.embeddings_path, config.embedding_dim);

    const std::vector<std::string> terms = split_whitespace(topic);
    if (terms.empty()) throw ConfigError("--topic must list the topic terms");

    std::vector<double> visual;
    if (model.feature_config.use_visual) {
        if (visual_file.empty()) {
            throw ConfigError("--visual-file is required for feature config " +
                              model.feature_config.name());
        }
        const VisualVectors visuals = load_visual_vectors(visual_file);
        if (visuals.by_id.empty()) throw ValidationError("visual file has no records");
        if (visual_id.empty()) {
            if (visuals.by_id.size() > 1) {
                throw ConfigError("--visual-id is required when the file has several records");
            }
            visual = visuals.by_id.begin()->second;
        } else {
            auto it = visuals.by_id.find(visual_id);
            if (it == visuals.by_id.end()) {
                throw ValidationError("visual file has no record for image '" + visual_id + "'");
            }
            visual = it->second;
        }
    }

    const double score = score_pair(model, table, terms, caption, visual);
    std::cout << score << "\n";
    return 0;
}

int run_benchmark(const std::string& dnn_pools, const std::string& ppr_pools, std::size_t trials,
                  std::uint64_t seed, const std::string& out_path) {
    BenchmarkConfig config;
    if (!dnn_pools.empty()) config.dnn_pools = parse_size_list(dnn_pools);
    if (!ppr_pools.empty()) config.ppr_pools = parse_size_list(ppr_pools);
    config.trials = trials;
    config.seed = seed;

    const BenchmarkResult result = benchmark_scaling(config);
    const std::string tsv = result.to_tsv();
    if (!out_path.empty()) write_text(out_path, tsv);
    std::cout << tsv;
    return 0;
}

int run_report(const std::string& in_path) {
    if (in_path.empty()) throw ConfigError("--in is required");
    std::ifstream in(in_path);
    if (!in) throw IoError("cannot open report: " + in_path);

    // Comment lines pass through in place; tabular lines are padded to
    // shared column widths.
    std::vector<std::pair<bool, std::vector<std::string>>> lines;  // (is_comment, cells)
    std::vector<std::size_t> widths;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (line.front() == '#') {
            lines.emplace_back(true, std::vector<std::string>{line});
            continue;
        }
        std::vector<std::string> cells;
        std::stringstream cell_in(line);
        std::string cell;
        while (std::getline(cell_in, cell, '\t')) cells.push_back(cell);
        if (cells.size() > widths.size()) widths.resize(cells.size(), 0);
        for (std::size_t i = 0; i < cells.size(); ++i) {
            widths[i] = std::max(widths[i], cells[i].size());
        }
        lines.emplace_back(false, std::move(cells));
    }
    for (const auto& [is_comment, cells] : lines) {
        if (is_comment) {
            std::cout << cells.front() << "\n";
            continue;
        }
        for (std::size_t i = 0; i < cells.size(); ++i) {
            std::cout << cells[i];
            if (i + 1 < cells.size()) {
                std::cout << std::string(widths[i] - cells[i].size() + 2, ' ');
            }
        }
        std::cout << "\n";
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"image suitability scoring for probabilistic topics"};
    app.set_version_flag("--version", kVersion);
    app.require_subcommand(1);

    ConfigFlags validate_flags;
    auto* validate_cmd = app.add_subcommand("validate", "check corpus files and print counts");
    attach_corpus_flags(validate_cmd, validate_flags);

    ConfigFlags train_flags;
    std::string train_out;
    auto* train_cmd = app.add_subcommand("train", "train a model on the whole corpus");
    attach_corpus_flags(train_cmd, train_flags);
    attach_protocol_flags(train_cmd, train_flags);
    train_cmd->add_option("--out", train_out, "output model file");

    ConfigFlags cv_flags;
    std::string cv_methods = "dnn,local-ppr,global-ppr,linear";
    std::string cv_out, cv_report;
    auto* cv_cmd = app.add_subcommand("cv", "cross-validated evaluation of all methods");
    attach_corpus_flags(cv_cmd, cv_flags);
    attach_protocol_flags(cv_cmd, cv_flags);
    attach_ppr_flags(cv_cmd, cv_flags);
    cv_cmd->add_option("--methods", cv_methods, "comma list: dnn,local-ppr,global-ppr,linear");
    cv_cmd->add_option("--out", cv_out, "write the TSV report here");
    cv_cmd->add_option("--report", cv_report, "alias for --out");

    ConfigFlags score_flags;
    std::string score_model, score_topic, score_caption, score_visual_file, score_visual_id;
    auto* score_cmd = app.add_subcommand("score", "score one (topic, image) pair");
    score_cmd->add_option("--model", score_model, "trained model file");
    score_cmd->add_option("--config", score_flags.config_path, "flat key=value config file");
    score_flags.add(score_cmd, "embeddings", "--embeddings", "word-vector file");
    score_flags.add(score_cmd, "embed_dim", "--embed-dim", "embedding dimension");
    score_cmd->add_option("--topic", score_topic, "topic terms, whitespace separated");
    score_cmd->add_option("--caption", score_caption, "image caption text");
    score_cmd->add_option("--visual-file", score_visual_file, "visual vector file");
    score_cmd->add_option("--visual-id", score_visual_id, "record to use from --visual-file");

    ConfigFlags baseline_flags;
    std::string baseline_method = "local-ppr";
    std::string baseline_out;
    auto* baseline_cmd = app.add_subcommand("baseline", "evaluate one baseline method");
    attach_corpus_flags(baseline_cmd, baseline_flags);
    attach_protocol_flags(baseline_cmd, baseline_flags);
    attach_ppr_flags(baseline_cmd, baseline_flags);
    baseline_cmd->add_option("--method", baseline_method, "local-ppr | global-ppr | linear");
    baseline_cmd->add_option("--out", baseline_out, "write the TSV report here");

    std::string bench_dnn_pools, bench_ppr_pools, bench_out;
    std::size_t bench_trials = 3;
    std::uint64_t bench_seed = 7;
    auto* bench_cmd = app.add_subcommand("benchmark", "time scoring vs graph re-ranking");
    bench_cmd->add_option("--dnn-pools", bench_dnn_pools, "comma list (default 1000..16000)");
    bench_cmd->add_option("--ppr-pools", bench_ppr_pools, "comma list (default 250..4000)");
    bench_cmd->add_option("--trials", bench_trials, "trials per pool size (median reported)");
    bench_cmd->add_option("--seed", bench_seed, "synthesis seed");
    bench_cmd->add_option("--out", bench_out, "write the timing TSV here");

    std::string report_in;
    auto* report_cmd = app.add_subcommand("report", "pretty-print a saved TSV report");
    report_cmd->add_option("--in", report_in, "report TSV produced by cv/baseline");

    CLI11_PARSE(app, argc, argv);

    try {
        if (validate_cmd->parsed()) return run_validate(validate_flags, true);
        if (train_cmd->parsed()) return run_train(train_flags, train_out);
        if (cv_cmd->parsed()) return run_cv(cv_flags, cv_methods, cv_out, cv_report);
        if (score_cmd->parsed()) {
            return run_score(score_model, score_flags, score_topic, score_caption,
                             score_visual_file, score_visual_id);
        }
        if (baseline_cmd->parsed()) {
            return run_cv(baseline_flags, baseline_method, baseline_out, "");
        }
        if (bench_cmd->parsed()) {
            return run_benchmark(bench_dnn_pools, bench_ppr_pools, bench_trials, bench_seed,
                                 bench_out);
        }
        if (report_cmd->parsed()) return run_report(report_in);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return is_input_error(e) ? 1 : 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
