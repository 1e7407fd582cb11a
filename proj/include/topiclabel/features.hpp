#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "topiclabel/dataset.hpp"
#include "topiclabel/embeddings.hpp"

namespace topiclabel {

/// Which segments besides the topic vector enter the network input.
struct FeatureConfig {
    bool use_caption = true;
    bool use_visual = true;

    /// Input dimension for the given segment sizes. Defaults match the
    /// full corpus (300-dim embeddings, 1000-dim visuals, 1600 total).
    std::size_t input_dim(std::size_t embed_dim = 300, std::size_t visual_dim = kVisualDim) const {
        return embed_dim + (use_caption ? embed_dim : 0) + (use_visual ? visual_dim : 0);
    }

    /// Accepts `topic+caption+vgg`, `topic+caption`, `topic+vgg`.
    static FeatureConfig parse(std::string_view name);
    std::string name() const;

    bool operator==(const FeatureConfig&) const = default;
};

/// Concatenated network input with segment offsets. Segments are always
/// ordered topic, caption, visual; disabled segments have size 0.
struct InputVector {
    std::vector<double> values;
    std::size_t topic_offset = 0;
    std::size_t topic_size = 0;
    std::size_t caption_offset = 0;
    std::size_t caption_size = 0;
    std::size_t visual_offset = 0;
    std::size_t visual_size = 0;

    std::size_t size() const { return values.size(); }
};

/// Concatenates the segments in order. Optional segments must be present
/// exactly when the config enables them; the caption segment must match
/// the topic segment's dimension.
InputVector build_input(std::span<const double> topic_vec,
                        const std::vector<double>* caption_vec,
                        const std::vector<double>* visual_vec, const FeatureConfig& config);

/// Featurizes one (topic, image) pair: mean-pooled topic terms, mean-pooled
/// caption tokens when enabled (zero vector for empty or all-OOV captions),
/// and the image's visual vector when enabled.
InputVector featurize_pair(const Topic& topic, const ImageCandidate& image,
                           const EmbeddingTable& table, const FeatureConfig& config);

}  // namespace topiclabel
