#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>

#include "topiclabel/error.hpp"
#include "topiclabel/harness.hpp"
#include "topiclabel/version.hpp"

namespace py = pybind11;
using namespace topiclabel;

namespace {

GainVariant gain_from_string(const std::string& name) { return parse_gain_variant(name); }

RankedList list_from_gold(const std::vector<double>& gold_in_predicted_order) {
    RankedList list;
    list.topic_id = "t";
    for (std::size_t i = 0; i < gold_in_predicted_order.size(); ++i) {
        list.image_ids.push_back("i" + std::to_string(i));
    }
    list.gold = gold_in_predicted_order;
    return list;
}

}  // namespace

PYBIND11_MODULE(_topiclabel, m) {
    m.doc() = "image suitability scoring for probabilistic topics";
    m.attr("__version__") = kVersion;

    py::register_exception<Error>(m, "TopicLabelError", PyExc_RuntimeError);

    // --- embeddings ---------------------------------------------------
    py::class_<EmbeddingTable>(m, "EmbeddingTable")
        .def(py::init<std::size_t>(), py::arg("dimension"))
        .def_static("load", &EmbeddingTable::load, py::arg("path"),
                    py::arg("expected_dimension"))
        .def_property_readonly("dimension", &EmbeddingTable::dimension)
        .def("__len__", &EmbeddingTable::size)
        .def_property_readonly("duplicate_count", &EmbeddingTable::duplicate_count)
        .def("insert", &EmbeddingTable::insert, py::arg("token"), py::arg("vector"))
        .def("__contains__", &EmbeddingTable::contains)
        .def(
            "lookup",
            [](const EmbeddingTable& table, const std::string& token)
                -> std::optional<std::vector<double>> {
                const std::vector<double>* vec = table.lookup(token);
                if (vec == nullptr) return std::nullopt;
                return *vec;
            },
            py::arg("token"))
        .def(
            "mean_pool",
            [](const EmbeddingTable& table, const std::vector<std::string>& tokens) {
                const auto pooled = table.mean_pool(tokens);
                return py::make_tuple(pooled.mean, pooled.found);
            },
            py::arg("tokens"));

    m.def("tokenize", [](const std::string& text) { return tokenize(text); }, py::arg("text"));

    // --- corpus types ---------------------------------------------------
    py::class_<Topic>(m, "Topic")
        .def(py::init([](std::string id, std::vector<std::string> terms) {
                 return Topic{std::move(id), std::move(terms)};
             }),
             py::arg("id"), py::arg("terms"))
        .def_readwrite("id", &Topic::id)
        .def_readwrite("terms", &Topic::terms);

    py::class_<ImageCandidate>(m, "ImageCandidate")
        .def(py::init([](std::string image_id, std::vector<std::string> caption_tokens,
                         std::vector<double> visual, std::optional<double> rating) {
                 ImageCandidate image;
                 image.image_id = std::move(image_id);
                 image.caption_tokens = std::move(caption_tokens);
                 image.visual = std::move(visual);
                 image.rating = rating;
                 return image;
             }),
             py::arg("image_id"), py::arg("caption_tokens") = std::vector<std::string>{},
             py::arg("visual") = std::vector<double>{},
             py::arg("rating") = std::optional<double>{})
        .def_readwrite("image_id", &ImageCandidate::image_id)
        .def_readwrite("caption_tokens", &ImageCandidate::caption_tokens)
        .def_readwrite("visual", &ImageCandidate::visual)
        .def_readwrite("rating", &ImageCandidate::rating);

    // --- features ---------------------------------------------------
    py::class_<FeatureConfig>(m, "FeatureConfig")
        .def(py::init([](bool use_caption, bool use_visual) {
                 return FeatureConfig{use_caption, use_visual};
             }),
             py::arg("use_caption") = true, py::arg("use_visual") = true)
        .def_static("parse", &FeatureConfig::parse, py::arg("name"))
        .def_readwrite("use_caption", &FeatureConfig::use_caption)
        .def_readwrite("use_visual", &FeatureConfig::use_visual)
        .def("input_dim", &FeatureConfig::input_dim, py::arg("embed_dim") = 300,
             py::arg("visual_dim") = kVisualDim)
        .def_property_readonly("name", &FeatureConfig::name)
        .def("__repr__",
             [](const FeatureConfig& c) { return "FeatureConfig('" + c.name() + "')"; });

    py::class_<InputVector>(m, "InputVector")
        .def_readonly("values", &InputVector::values)
        .def_readonly("topic_offset", &InputVector::topic_offset)
        .def_readonly("topic_size", &InputVector::topic_size)
        .def_readonly("caption_offset", &InputVector::caption_offset)
        .def_readonly("caption_size", &InputVector::caption_size)
        .def_readonly("visual_offset", &InputVector::visual_offset)
        .def_readonly("visual_size", &InputVector::visual_size)
        .def("__len__", &InputVector::size);

    m.def(
        "build_input",
        [](const std::vector<double>& topic, std::optional<std::vector<double>> caption,
           std::optional<std::vector<double>> visual, const FeatureConfig& config) {
            return build_input(topic, caption ? &*caption : nullptr,
                               visual ? &*visual : nullptr, config);
        },
        py::arg("topic_vec"), py::arg("caption_vec") = std::optional<std::vector<double>>{},
        py::arg("visual_vec") = std::optional<std::vector<double>>{},
        py::arg("config") = FeatureConfig{});

    m.def("featurize_pair", &featurize_pair, py::arg("topic"), py::arg("image"),
          py::arg("table"), py::arg("config") = FeatureConfig{});

    // --- neural network ---------------------------------------------------
    py::class_<TrainConfig>(m, "TrainConfig")
        .def(py::init<>())
        .def_readwrite("epochs", &TrainConfig::epochs)
        .def_readwrite("batch_size", &TrainConfig::batch_size)
        .def_readwrite("dropout_rate", &TrainConfig::dropout_rate)
        .def_readwrite("learning_rate", &TrainConfig::learning_rate)
        .def_readwrite("rmsprop_decay", &TrainConfig::rmsprop_decay)
        .def_readwrite("epsilon", &TrainConfig::epsilon)
        .def_readwrite("seed", &TrainConfig::seed);

    py::class_<MlpModel>(m, "MlpModel")
        .def_readonly("input_dim", &MlpModel::input_dim)
        .def_readonly("seed", &MlpModel::seed)
        .def_readwrite("feature_config", &MlpModel::feature_config)
        .def_property_readonly("parameter_count", &MlpModel::parameter_count)
        .def_property_readonly("layer_shapes",
                               [](const MlpModel& model) {
                                   std::vector<std::pair<std::size_t, std::size_t>> shapes;
                                   for (const DenseLayer& layer : model.layers) {
                                       shapes.emplace_back(layer.fan_in, layer.fan_out);
                                   }
                                   return shapes;
                               })
        .def("__repr__", [](const MlpModel& model) {
            return "MlpModel(input_dim=" + std::to_string(model.input_dim) + ", parameters=" +
                   std::to_string(model.parameter_count()) + ")";
        });

    m.def(
        "init_model",
        [](std::size_t input_dim, std::uint64_t seed,
           std::optional<std::vector<std::size_t>> hidden_sizes) {
            if (hidden_sizes) return init_model(input_dim, *hidden_sizes, seed);
            return init_model(input_dim, seed);
        },
        py::arg("input_dim"), py::arg("seed"),
        py::arg("hidden_sizes") = std::optional<std::vector<std::size_t>>{});

    m.def("relu", [](const std::vector<double>& x) { return relu(x); }, py::arg("x"));
    m.def(
        "mae_loss",
        [](const std::vector<double>& predictions, const std::vector<double>& targets) {
            return mae_loss(predictions, targets);
        },
        py::arg("predictions"), py::arg("targets"));

    m.def(
        "train",
        [](MlpModel& model, const std::vector<std::vector<double>>& inputs,
           const std::vector<double>& targets, const TrainConfig& config) {
            if (inputs.size() != targets.size()) {
                throw ArgumentError("train requires one target per input");
            }
            std::vector<TrainExample> examples;
            examples.reserve(inputs.size());
            for (std::size_t i = 0; i < inputs.size(); ++i) {
                examples.push_back({inputs[i], targets[i]});
            }
            return train(model, examples, config);
        },
        py::arg("model"), py::arg("inputs"), py::arg("targets"),
        py::arg("config") = TrainConfig{});

    m.def(
        "predict",
        [](const MlpModel& model, const std::vector<double>& input) {
            return predict(model, input);
        },
        py::arg("model"), py::arg("input"));

    m.def("save_model", &save_model, py::arg("model"), py::arg("path"));
    m.def("load_model", &load_model, py::arg("path"));

    // --- metrics ---------------------------------------------------
    m.def(
        "dcg_at_k",
        [](const std::vector<double>& ratings, std::size_t k, const std::string& gain) {
            return dcg_at_k(ratings, k, gain_from_string(gain));
        },
        py::arg("ratings_in_predicted_order"), py::arg("k"), py::arg("gain") = "linear");
    m.def(
        "ndcg_at_k",
        [](const std::vector<double>& gold_in_predicted_order, std::size_t k,
           const std::string& gain) {
            return ndcg_at_k(list_from_gold(gold_in_predicted_order), k, gain_from_string(gain));
        },
        py::arg("gold_in_predicted_order"), py::arg("k"), py::arg("gain") = "linear");
    m.def(
        "top1_average_rating",
        [](const std::vector<std::vector<double>>& gold_lists) {
            std::vector<RankedList> lists;
            lists.reserve(gold_lists.size());
            for (const auto& gold : gold_lists) lists.push_back(list_from_gold(gold));
            return top1_average_rating(lists);
        },
        py::arg("gold_lists_in_predicted_order"));
    m.def(
        "paired_t_test",
        [](const std::vector<double>& a, const std::vector<double>& b) {
            const TTestResult r = paired_t_test(a, b);
            return py::make_tuple(r.t, r.p, r.df);
        },
        py::arg("a"), py::arg("b"));

    // --- graph baseline ---------------------------------------------------
    m.def(
        "personalized_pagerank",
        [](const std::vector<std::vector<double>>& weights,
           std::optional<std::vector<double>> personalization, double damping, double tolerance,
           std::size_t max_iters) {
            SimilarityGraph graph;
            const std::size_t n = weights.size();
            graph.weights.assign(n * n, 0.0);
            for (std::size_t i = 0; i < n; ++i) {
                graph.node_ids.push_back("n" + std::to_string(i));
                if (weights[i].size() != n) {
                    throw DimensionError("weight matrix must be square");
                }
                for (std::size_t j = 0; j < n; ++j) graph.weights[i * n + j] = weights[i][j];
            }
            if (personalization) {
                graph.set_personalization(*personalization);
            } else {
                graph.set_uniform_personalization();
            }
            PprConfig config{damping, tolerance, max_iters};
            const PprResult result = personalized_pagerank(graph, config);
            return py::make_tuple(result.scores, result.converged, result.iterations);
        },
        py::arg("weights"), py::arg("personalization") = std::optional<std::vector<double>>{},
        py::arg("damping") = 0.85, py::arg("tolerance") = 1e-10, py::arg("max_iters") = 200);

    m.def(
        "image_similarity",
        [](const ImageCandidate& a, const ImageCandidate& b, const EmbeddingTable& table) {
            return image_similarity(a, b, table);
        },
        py::arg("a"), py::arg("b"), py::arg("table"));

    m.def(
        "local_ppr_rank",
        [](const Topic& topic, const std::vector<ImageCandidate>& candidates,
           const EmbeddingTable& table, double damping, double tolerance, std::size_t max_iters) {
            const RankedList ranked =
                local_ppr_rank(topic, candidates, table, PprConfig{damping, tolerance, max_iters});
            return py::make_tuple(ranked.image_ids, ranked.gold);
        },
        py::arg("topic"), py::arg("candidates"), py::arg("table"), py::arg("damping") = 0.85,
        py::arg("tolerance") = 1e-10, py::arg("max_iters") = 200);

    // --- dataset / protocol ---------------------------------------------------
    m.def(
        "kfold_split",
        [](const std::vector<std::string>& topic_ids, std::size_t k, std::uint64_t seed) {
            std::vector<py::tuple> out;
            for (const FoldSplit& fold : kfold_split(topic_ids, k, seed)) {
                out.push_back(py::make_tuple(fold.fold_index, fold.train_topics,
                                             fold.test_topics));
            }
            return out;
        },
        py::arg("topic_ids"), py::arg("k") = 5, py::arg("seed") = 0);

    m.def(
        "score_pair",
        [](const MlpModel& model, const EmbeddingTable& table,
           const std::vector<std::string>& topic_terms, const std::string& caption,
           const std::vector<double>& visual) {
            return score_pair(model, table, topic_terms, caption, visual);
        },
        py::arg("model"), py::arg("table"), py::arg("topic_terms"), py::arg("caption") = "",
        py::arg("visual") = std::vector<double>{});
}
