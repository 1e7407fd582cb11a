#include <algorithm>
#include <random>

#include "doctest.h"
#include "support/tempdir.hpp"
#include "topiclabel/embeddings.hpp"
#include "topiclabel/error.hpp"

using namespace topiclabel;
using topiclabel::testing::TempDir;

TEST_CASE("load round-trips a single entry") {
    TempDir dir;
    const auto path = dir.write("vec.txt", "cat 1.0 0.0\n");
    EmbeddingTable table = EmbeddingTable::load(path, 2);
    CHECK(table.size() == 1);
    CHECK(table.dimension() == 2);
    const auto* v = table.lookup("cat");
    REQUIRE(v != nullptr);
    CHECK((*v)[0] == 1.0);
    CHECK((*v)[1] == 0.0);
}

TEST_CASE("load rejects a dimension mismatch, naming the token") {
    TempDir dir;
    const auto path = dir.write("vec.txt", "cat 1.0\n");
    CHECK_THROWS_WITH_AS(EmbeddingTable::load(path, 2),
                         doctest::Contains("cat"), DimensionError);
}

TEST_CASE("load of an empty file yields an empty table") {
    TempDir dir;
    const auto path = dir.write("vec.txt", "");
    EmbeddingTable table = EmbeddingTable::load(path, 3);
    CHECK(table.size() == 0);
}

TEST_CASE("load reports malformed lines by number") {
    TempDir dir;
    const auto path = dir.write("vec.txt", "cat 1.0 2.0\ndog 1.0 oops\n");
    CHECK_THROWS_WITH_AS(EmbeddingTable::load(path, 2), doctest::Contains("line 2"), ParseError);
}

TEST_CASE("load auto-detects a vocab/dimension header") {
    TempDir dir;
    const auto path = dir.write("vec.txt", "2 3\ncat 1 2 3\ndog 4 5 6\n");
    EmbeddingTable table = EmbeddingTable::load(path, 3);
    CHECK(table.size() == 2);
    CHECK(table.lookup("dog") != nullptr);

    const auto bad = dir.write("bad.txt", "2 4\ncat 1 2 3\n");
    CHECK_THROWS_AS(EmbeddingTable::load(bad, 3), DimensionError);
}

TEST_CASE("duplicate tokens keep the last occurrence and are counted") {
    TempDir dir;
    const auto path = dir.write("vec.txt", "cat 1 0\ncat 0 1\n");
    EmbeddingTable table = EmbeddingTable::load(path, 2);
    CHECK(table.size() == 1);
    CHECK(table.duplicate_count() == 1);
    const auto* v = table.lookup("cat");
    REQUIRE(v != nullptr);
    CHECK((*v)[0] == 0.0);
    CHECK((*v)[1] == 1.0);
}

TEST_CASE("lookup is case-normalized and returns absent for OOV") {
    TempDir dir;
    const auto path = dir.write("vec.txt", "Cat 1 0\ndog 0 1\n");
    EmbeddingTable table = EmbeddingTable::load(path, 2);
    CHECK(table.lookup("cAt") != nullptr);
    CHECK(table.lookup("zzz") == nullptr);
    const auto* cat = table.lookup("cat");
    const auto* dog = table.lookup("dog");
    REQUIRE(cat != nullptr);
    REQUIRE(dog != nullptr);
    CHECK((*cat)[0] == 1.0);
    CHECK((*dog)[1] == 1.0);
}

TEST_CASE("mean_pool basics") {
    EmbeddingTable table(2);
    table.insert("cat", {1.0, 0.0});
    table.insert("dog", {0.0, 1.0});

    SUBCASE("single token equals its vector") {
        const std::vector<std::string> tokens{"cat"};
        auto pooled = table.mean_pool(tokens);
        CHECK(pooled.found == 1);
        CHECK(pooled.mean == std::vector<double>{1.0, 0.0});
    }
    SUBCASE("two tokens average") {
        const std::vector<std::string> tokens{"cat", "dog"};
        auto pooled = table.mean_pool(tokens);
        CHECK(pooled.found == 2);
        CHECK(pooled.mean == std::vector<double>{0.5, 0.5});
    }
    SUBCASE("all OOV yields the zero vector with count 0") {
        const std::vector<std::string> tokens{"zzz"};
        auto pooled = table.mean_pool(tokens);
        CHECK(pooled.found == 0);
        CHECK(pooled.mean == std::vector<double>{0.0, 0.0});
    }
    SUBCASE("empty sequence is rejected") {
        const std::vector<std::string> tokens;
        CHECK_THROWS_AS(table.mean_pool(tokens), ArgumentError);
    }
}

TEST_CASE("mean_pool properties on random tables") {
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> uniform(-2.0, 2.0);
    std::uniform_int_distribution<int> count(1, 12);

    EmbeddingTable table(5);
    for (int w = 0; w < 30; ++w) {
        std::vector<double> vec(5);
        for (double& v : vec) v = uniform(rng);
        table.insert("w" + std::to_string(w), std::move(vec));
    }

    for (int round = 0; round < 50; ++round) {
        std::vector<std::string> tokens;
        const int n = count(rng);
        for (int i = 0; i < n; ++i) {
            tokens.push_back("w" + std::to_string(count(rng) * 2));
        }
        auto pooled = table.mean_pool(tokens);

        // Permutation invariance.
        std::vector<std::string> shuffled(tokens);
        std::shuffle(shuffled.begin(), shuffled.end(), rng);
        CHECK(table.mean_pool(shuffled).mean == pooled.mean);

        // Component-wise bounds over the pooled vectors.
        for (std::size_t d = 0; d < 5; ++d) {
            double lo = 1e300, hi = -1e300;
            for (const std::string& token : tokens) {
                const auto* v = table.lookup(token);
                if (!v) continue;
                lo = std::min(lo, (*v)[d]);
                hi = std::max(hi, (*v)[d]);
            }
            if (pooled.found > 0) {
                CHECK(pooled.mean[d] >= lo - 1e-12);
                CHECK(pooled.mean[d] <= hi + 1e-12);
            }
        }
    }

    // k copies of one token pool to exactly that token's vector.
    const std::vector<std::string> copies{"w4", "w4", "w4"};
    CHECK(table.mean_pool(copies).mean == *table.lookup("w4"));
}

TEST_CASE("load then lookup reproduces file contents bit-exactly") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> uniform(-1.0, 1.0);

    std::string contents;
    std::vector<std::vector<double>> expected;
    for (int w = 0; w < 20; ++w) {
        std::vector<double> vec(4);
        std::string line = "tok" + std::to_string(w);
        for (double& v : vec) {
            v = uniform(rng);
            char buf[40];
            std::snprintf(buf, sizeof(buf), " %.17g", v);
            line += buf;
        }
        expected.push_back(vec);
        contents += line + "\n";
    }

    TempDir dir;
    EmbeddingTable table = EmbeddingTable::load(dir.write("vec.txt", contents), 4);
    for (int w = 0; w < 20; ++w) {
        const auto* v = table.lookup("tok" + std::to_string(w));
        REQUIRE(v != nullptr);
        CHECK(*v == expected[w]);
    }
}

TEST_CASE("tokenize lowercases, splits and strips punctuation") {
    const auto tokens = tokenize("The Cat, sat; on (the) MAT!  ...");
    CHECK(tokens == std::vector<std::string>{"the", "cat", "sat", "on", "the", "mat"});
    CHECK(tokenize("").empty());
    CHECK(tokenize("  ,,  !! ").empty());
    CHECK(tokenize("don't") == std::vector<std::string>{"don't"});
}
