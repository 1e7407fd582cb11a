#include <algorithm>
#include <random>

#include "doctest.h"
#include "topiclabel/error.hpp"
#include "topiclabel/features.hpp"

using namespace topiclabel;

namespace {

EmbeddingTable tiny_table() {
    EmbeddingTable table(3);
    table.insert("sun", {1.0, 2.0, 3.0});
    table.insert("moon", {3.0, 2.0, 1.0});
    table.insert("star", {0.0, 0.0, 6.0});
    return table;
}

}  // namespace

TEST_CASE("feature config names and dimensions") {
    CHECK(FeatureConfig::parse("topic+caption+vgg") == FeatureConfig{true, true});
    CHECK(FeatureConfig::parse("topic+caption") == FeatureConfig{true, false});
    CHECK(FeatureConfig::parse("topic+vgg") == FeatureConfig{false, true});
    CHECK_THROWS_AS(FeatureConfig::parse("caption+vgg"), ConfigError);

    CHECK(FeatureConfig{true, true}.input_dim() == 1600);
    CHECK(FeatureConfig{true, false}.input_dim() == 600);
    CHECK(FeatureConfig{false, true}.input_dim() == 1300);
    CHECK(FeatureConfig{true, true}.name() == "topic+caption+vgg");
    CHECK(FeatureConfig::parse(FeatureConfig{false, true}.name()) == FeatureConfig{false, true});
}

TEST_CASE("build_input concatenates segments in order at full width") {
    const std::vector<double> topic(300, 1.0);
    const std::vector<double> caption(300, 2.0);
    const std::vector<double> visual(1000, 3.0);

    InputVector input = build_input(topic, &caption, &visual, FeatureConfig{true, true});
    REQUIRE(input.size() == 1600);
    CHECK(input.topic_offset == 0);
    CHECK(input.topic_size == 300);
    CHECK(input.caption_offset == 300);
    CHECK(input.caption_size == 300);
    CHECK(input.visual_offset == 600);
    CHECK(input.visual_size == 1000);
    CHECK(std::all_of(input.values.begin(), input.values.begin() + 300,
                      [](double v) { return v == 1.0; }));
    CHECK(std::all_of(input.values.begin() + 300, input.values.begin() + 600,
                      [](double v) { return v == 2.0; }));
    CHECK(std::all_of(input.values.begin() + 600, input.values.end(),
                      [](double v) { return v == 3.0; }));
}

TEST_CASE("build_input ablation lengths") {
    const std::vector<double> topic(300, 1.0);
    const std::vector<double> caption(300, 2.0);
    const std::vector<double> visual(1000, 3.0);

    CHECK(build_input(topic, nullptr, &visual, FeatureConfig{false, true}).size() == 1300);
    CHECK(build_input(topic, &caption, nullptr, FeatureConfig{true, false}).size() == 600);
}

TEST_CASE("build_input rejects mismatched presence and dimensions") {
    const std::vector<double> topic(4, 1.0);
    const std::vector<double> caption(4, 2.0);
    const std::vector<double> bad_caption(3, 2.0);
    const std::vector<double> visual(6, 3.0);

    CHECK_THROWS_AS(build_input(topic, nullptr, &visual, FeatureConfig{true, true}),
                    ArgumentError);
    CHECK_THROWS_AS(build_input(topic, &caption, &visual, FeatureConfig{false, true}),
                    ArgumentError);
    CHECK_THROWS_WITH_AS(build_input(topic, &bad_caption, &visual, FeatureConfig{true, true}),
                         doctest::Contains("caption"), DimensionError);
}

TEST_CASE("featurize_pair pools terms and captions") {
    const EmbeddingTable table = tiny_table();
    Topic topic{"t1", {"sun"}};
    ImageCandidate image;
    image.image_id = "i1";
    image.caption_tokens = {"moon", "star"};
    image.visual = {9.0, 8.0};

    InputVector input = featurize_pair(topic, image, table, FeatureConfig{true, true});
    REQUIRE(input.size() == 3 + 3 + 2);
    // Topic segment: lookup("sun") exactly (single-term mean).
    CHECK(input.values[0] == 1.0);
    CHECK(input.values[1] == 2.0);
    CHECK(input.values[2] == 3.0);
    // Caption segment: mean of moon and star.
    CHECK(input.values[3] == doctest::Approx(1.5));
    CHECK(input.values[4] == doctest::Approx(1.0));
    CHECK(input.values[5] == doctest::Approx(3.5));
    CHECK(input.values[6] == 9.0);
    CHECK(input.values[7] == 8.0);
}

TEST_CASE("featurize_pair zero-fills empty captions") {
    const EmbeddingTable table = tiny_table();
    Topic topic{"t1", {"sun", "moon"}};
    ImageCandidate image;
    image.image_id = "i1";
    image.visual = {1.0};

    InputVector input = featurize_pair(topic, image, table, FeatureConfig{true, true});
    CHECK(input.values[3] == 0.0);
    CHECK(input.values[4] == 0.0);
    CHECK(input.values[5] == 0.0);
}

TEST_CASE("featurize_pair is deterministic and order-invariant") {
    const EmbeddingTable table = tiny_table();
    Topic topic{"t1", {"sun", "moon", "star"}};
    Topic reordered{"t1", {"star", "sun", "moon"}};
    ImageCandidate image;
    image.image_id = "i1";
    image.caption_tokens = {"moon", "sun"};
    image.visual = {4.0, 5.0};
    ImageCandidate image_reordered = image;
    image_reordered.caption_tokens = {"sun", "moon"};

    const FeatureConfig config{true, true};
    const InputVector a = featurize_pair(topic, image, table, config);
    const InputVector b = featurize_pair(topic, image, table, config);
    CHECK(a.values == b.values);

    const InputVector c = featurize_pair(reordered, image_reordered, table, config);
    CHECK(a.values == c.values);
}

TEST_CASE("featurize_pair requires a visual vector when enabled") {
    const EmbeddingTable table = tiny_table();
    Topic topic{"t1", {"sun"}};
    ImageCandidate image;
    image.image_id = "i1";

    CHECK_THROWS_AS(featurize_pair(topic, image, table, FeatureConfig{false, true}),
                    DimensionError);
    CHECK_NOTHROW(featurize_pair(topic, image, table, FeatureConfig{true, false}));
}
