#include "topiclabel/features.hpp"

#include <algorithm>

#include "topiclabel/error.hpp"

namespace topiclabel {

FeatureConfig FeatureConfig::parse(std::string_view name) {
    if (name == "topic+caption+vgg") return {true, true};
    if (name == "topic+caption") return {true, false};
    if (name == "topic+vgg") return {false, true};
    throw ConfigError("unknown feature configuration '" + std::string(name) +
                      "' (expected topic+caption+vgg, topic+caption or topic+vgg)");
}

std::string FeatureConfig::name() const {
    std::string out = "topic";
    if (use_caption) out += "+caption";
    if (use_visual) out += "+vgg";
    return out;
}

InputVector build_input(std::span<const double> topic_vec,
                        const std::vector<double>* caption_vec,
                        const std::vector<double>* visual_vec, const FeatureConfig& config) {
    if (topic_vec.empty()) {
        throw DimensionError("topic segment is empty");
    }
    if (config.use_caption != (caption_vec != nullptr)) {
        throw ArgumentError(config.use_caption ? "caption segment missing but enabled in config"
                                               : "caption segment supplied but disabled in config");
    }
    if (config.use_visual != (visual_vec != nullptr)) {
        throw ArgumentError(config.use_visual ? "visual segment missing but enabled in config"
                                              : "visual segment supplied but disabled in config");
    }
    if (caption_vec && caption_vec->size() != topic_vec.size()) {
        throw DimensionError("caption segment has " + std::to_string(caption_vec->size()) +
                             " components, topic segment has " + std::to_string(topic_vec.size()));
    }
    if (visual_vec && visual_vec->empty()) {
        throw DimensionError("visual segment is empty");
    }

    InputVector input;
    input.topic_offset = 0;
    input.topic_size = topic_vec.size();
    std::size_t total = topic_vec.size();
    if (caption_vec) {
        input.caption_offset = total;
        input.caption_size = caption_vec->size();
        total += caption_vec->size();
    }
    if (visual_vec) {
        input.visual_offset = total;
        input.visual_size = visual_vec->size();
        total += visual_vec->size();
    }

    input.values.reserve(total);
    input.values.assign(topic_vec.begin(), topic_vec.end());
    if (caption_vec) input.values.insert(input.values.end(), caption_vec->begin(), caption_vec->end());
    if (visual_vec) input.values.insert(input.values.end(), visual_vec->begin(), visual_vec->end());
    return input;
}

InputVector featurize_pair(const Topic& topic, const ImageCandidate& image,
                           const EmbeddingTable& table, const FeatureConfig& config) {
    if (topic.terms.empty()) {
        throw ArgumentError("topic '" + topic.id + "' has no terms");
    }
    std::vector<double> topic_vec = table.mean_pool(topic.terms).mean;

    std::optional<std::vector<double>> caption_vec;
    if (config.use_caption) {
        if (image.caption_tokens.empty()) {
            caption_vec.emplace(table.dimension(), 0.0);
        } else {
            caption_vec = table.mean_pool(image.caption_tokens).mean;
        }
    }

    const std::vector<double>* visual = nullptr;
    if (config.use_visual) {
        if (image.visual.empty()) {
            throw DimensionError("image '" + image.image_id +
                                 "' has no visual vector but config enables it");
        }
        visual = &image.visual;
    }

    return build_input(topic_vec, caption_vec ? &*caption_vec : nullptr, visual, config);
}

}  // namespace topiclabel
