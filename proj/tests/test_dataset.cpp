#include <algorithm>
#include <set>
#include <unordered_set>

#include "doctest.h"
#include "support/synthetic.hpp"
#include "support/tempdir.hpp"
#include "topiclabel/dataset.hpp"
#include "topiclabel/error.hpp"

using namespace topiclabel;
using topiclabel::testing::TempDir;

namespace {

// One topic, two candidates, lenient shapes.
struct ToyFiles {
    TempDir dir;
    std::string topics, candidates, visuals;

    ToyFiles() {
        topics = dir.write("topics.tsv", "t1\tcat\tdog\n");
        candidates = dir.write("candidates.tsv",
                               "t1\timg1\t2.5\tA cat on a mat\n"
                               "t1\timg2\tNA\tSome dog, outside!\n");
        visuals = dir.write("visuals.txt",
                            "img1 0.1 0.2 0.3\n"
                            "img2 0.4 0.5 0.6\n");
    }
};

}  // namespace

TEST_CASE("toy corpus round-trips all fields in lenient mode") {
    ToyFiles files;
    const Dataset ds = load_dataset(files.topics, files.candidates, files.visuals, false);
    CHECK(ds.topics.size() == 1);
    CHECK(ds.candidate_rows == 2);
    CHECK(ds.distinct_images == 2);
    CHECK(ds.visual_dim == 3);

    const Topic& topic = ds.topic("t1");
    CHECK(topic.terms == std::vector<std::string>{"cat", "dog"});

    const auto& cands = ds.candidates_for("t1");
    REQUIRE(cands.size() == 2);
    CHECK(cands[0].image_id == "img1");
    CHECK(cands[0].rating == 2.5);
    CHECK(cands[0].caption_tokens == std::vector<std::string>{"a", "cat", "on", "a", "mat"});
    CHECK(cands[0].visual == std::vector<double>{0.1, 0.2, 0.3});
    CHECK_FALSE(cands[1].rating.has_value());
    CHECK(cands[1].caption_tokens == std::vector<std::string>{"some", "dog", "outside"});
}

TEST_CASE("strict mode rejects lenient shapes") {
    ToyFiles files;
    CHECK_THROWS_AS(load_dataset(files.topics, files.candidates, files.visuals, true),
                    Error);
}

TEST_CASE("unknown image id in candidates is a link error naming the id") {
    TempDir dir;
    const auto topics = dir.write("topics.tsv", "t1\tcat\n");
    const auto candidates = dir.write("candidates.tsv", "t1\tghost\t1.0\tcaption here\n");
    const auto visuals = dir.write("visuals.txt", "img1 0.1 0.2\n");
    CHECK_THROWS_WITH_AS(load_dataset(topics, candidates, visuals, false),
                         doctest::Contains("ghost"), ValidationError);
}

TEST_CASE("out-of-range rating is a validation error") {
    TempDir dir;
    const auto topics = dir.write("topics.tsv", "t1\tcat\n");
    const auto candidates = dir.write("candidates.tsv", "t1\timg1\t3.5\tcaption\n");
    const auto visuals = dir.write("visuals.txt", "img1 0.1\n");
    CHECK_THROWS_AS(load_dataset(topics, candidates, visuals, false), ValidationError);
}

TEST_CASE("candidates referencing unknown topics are rejected") {
    TempDir dir;
    const auto topics = dir.write("topics.tsv", "t1\tcat\n");
    const auto candidates = dir.write("candidates.tsv", "t9\timg1\t1.0\tcaption\n");
    const auto visuals = dir.write("visuals.txt", "img1 0.1\n");
    CHECK_THROWS_AS(load_dataset(topics, candidates, visuals, false), ValidationError);
}

TEST_CASE("caption text keeps everything after the third tab") {
    TempDir dir;
    const auto topics = dir.write("topics.tsv", "t1\tcat\n");
    const auto candidates =
        dir.write("candidates.tsv", "t1\timg1\t1.0\tfirst part\tsecond part\n");
    const auto visuals = dir.write("visuals.txt", "img1 0.1\n");
    const Dataset ds = load_dataset(topics, candidates, visuals, false);
    CHECK(ds.candidates_for("t1")[0].caption_tokens ==
          std::vector<std::string>{"first", "part", "second", "part"});
}

TEST_CASE("duplicate candidate rows for one topic are rejected") {
    TempDir dir;
    const auto topics = dir.write("topics.tsv", "t1\tcat\n");
    const auto candidates = dir.write("candidates.tsv",
                                      "t1\timg1\t1.0\tcaption one\n"
                                      "t1\timg1\t2.0\tcaption two\n");
    const auto visuals = dir.write("visuals.txt", "img1 0.1\n");
    CHECK_THROWS_WITH_AS(load_dataset(topics, candidates, visuals, false),
                         doctest::Contains("img1"), ValidationError);
}

TEST_CASE("mixed visual dimensions are rejected") {
    TempDir dir;
    const auto topics = dir.write("topics.tsv", "t1\tcat\n");
    const auto candidates = dir.write("candidates.tsv", "t1\timg1\t1.0\tcaption\n");
    const auto visuals = dir.write("visuals.txt", "img1 0.1 0.2\nimg2 0.3\n");
    CHECK_THROWS_AS(load_dataset(topics, candidates, visuals, false), DimensionError);
}

TEST_CASE("a full strict corpus loads with the expected counts") {
    const auto corpus = testing::make_strict_corpus(10, 77);
    TempDir dir;
    const auto files = testing::write_corpus_files(corpus, dir.path().string());
    const Dataset ds = load_dataset(files.topics, files.candidates, files.visuals, true);
    CHECK(ds.topics.size() == 10);
    CHECK(ds.candidate_rows == 200);
    CHECK(ds.visual_dim == kVisualDim);
    for (const auto& topic : ds.topics) CHECK(topic.terms.size() == kTopicTermCount);
    for (const auto& cands : ds.candidates) CHECK(cands.size() == kCandidatesPerTopic);
}

TEST_CASE("generate_negatives draws k rated-zero images outside the topic") {
    const auto corpus = testing::make_strict_corpus(12, 31);
    const Dataset& ds = corpus.dataset;

    std::vector<std::string> pool;
    for (std::size_t t = 1; t < ds.topics.size(); ++t) pool.push_back(ds.topics[t].id);
    const std::string target = ds.topics[0].id;

    std::unordered_set<std::string> own;
    for (const auto& c : ds.candidates_for(target)) own.insert(c.image_id);

    std::mt19937_64 rng(5);
    const auto negatives = generate_negatives(ds, target, pool, 20, rng);
    CHECK(negatives.size() == 20);
    std::set<std::string> ids;
    for (const auto& neg : negatives) {
        CHECK(neg.rating == 0.0);
        CHECK(own.count(neg.image_id) == 0);
        ids.insert(neg.image_id);
    }
    CHECK(ids.size() == 20);  // without replacement

    std::mt19937_64 rng_again(5);
    const auto replay = generate_negatives(ds, target, pool, 20, rng_again);
    for (std::size_t i = 0; i < 20; ++i) CHECK(replay[i].image_id == negatives[i].image_id);

    std::mt19937_64 rng_other(6);
    const auto other = generate_negatives(ds, target, pool, 20, rng_other);
    bool any_difference = false;
    for (std::size_t i = 0; i < 20; ++i) {
        if (other[i].image_id != negatives[i].image_id) any_difference = true;
    }
    CHECK(any_difference);
}

TEST_CASE("generate_negatives edge cases") {
    const auto corpus = testing::make_strict_corpus(3, 8);
    const Dataset& ds = corpus.dataset;
    const std::string target = ds.topics[0].id;
    std::vector<std::string> pool{ds.topics[1].id};

    std::mt19937_64 rng(1);
    CHECK(generate_negatives(ds, target, pool, 0, rng).empty());
    CHECK_THROWS_AS(generate_negatives(ds, target, pool, 21, rng), PoolExhaustedError);

    std::vector<std::string> bad_pool{target};
    CHECK_THROWS_AS(generate_negatives(ds, target, bad_pool, 1, rng), ArgumentError);
}

TEST_CASE("kfold_split partitions 300 topics into 60/240 folds") {
    std::vector<std::string> ids;
    for (int i = 0; i < 300; ++i) ids.push_back("topic" + std::to_string(i));

    const auto folds = kfold_split(ids, 5, 42);
    REQUIRE(folds.size() == 5);

    std::set<std::string> seen;
    for (const auto& fold : folds) {
        CHECK(fold.test_topics.size() == 60);
        CHECK(fold.train_topics.size() == 240);
        std::set<std::string> train(fold.train_topics.begin(), fold.train_topics.end());
        for (const auto& id : fold.test_topics) {
            CHECK(train.count(id) == 0);
            CHECK(seen.insert(id).second);  // each topic tested exactly once
        }
    }
    CHECK(seen.size() == 300);

    const auto replay = kfold_split(ids, 5, 42);
    for (std::size_t f = 0; f < 5; ++f) {
        CHECK(replay[f].test_topics == folds[f].test_topics);
    }
}

TEST_CASE("kfold_split spreads non-divisible remainders over leading folds") {
    std::vector<std::string> ids;
    for (int i = 0; i < 11; ++i) ids.push_back("t" + std::to_string(i));
    const auto folds = kfold_split(ids, 5, 3);
    CHECK(folds[0].test_topics.size() == 3);
    for (std::size_t f = 1; f < 5; ++f) CHECK(folds[f].test_topics.size() == 2);

    CHECK_THROWS_AS(kfold_split(ids, 1, 3), ArgumentError);
    CHECK_THROWS_AS(kfold_split(ids, 12, 3), ArgumentError);
}
