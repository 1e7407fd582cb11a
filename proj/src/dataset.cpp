#include "topiclabel/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <unordered_set>

#include "topiclabel/embeddings.hpp"
#include "topiclabel/error.hpp"

namespace topiclabel {

namespace {

std::vector<std::string_view> split_tabs(std::string_view line) {
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    while (true) {
        std::size_t tab = line.find('\t', start);
        if (tab == std::string_view::npos) {
            fields.push_back(line.substr(start));
            break;
        }
        fields.push_back(line.substr(start, tab - start));
        start = tab + 1;
    }
    return fields;
}

std::string_view strip_cr(std::string_view line) {
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    return line;
}

bool parse_double(std::string_view field, double& out) {
    auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), out);
    return ec == std::errc{} && ptr == field.data() + field.size();
}

}  // namespace

VisualVectors load_visual_vectors(const std::string& path, bool strict) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open visual vectors file: " + path);

    VisualVectors result;
    auto& visuals = result.by_id;
    std::string line;
    std::size_t line_no = 0;
    std::size_t dim = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::string_view view = strip_cr(line);
        if (view.empty()) continue;
        std::size_t sp = view.find(' ');
        if (sp == std::string_view::npos || sp == 0) {
            throw ParseError("malformed visual record on line " + std::to_string(line_no) +
                             ": expected `image_id v1 ... vD`");
        }
        std::string image_id(view.substr(0, sp));
        std::vector<double> vec;
        if (dim > 0) vec.reserve(dim);
        std::size_t i = sp;
        while (i < view.size()) {
            while (i < view.size() && view[i] == ' ') ++i;
            if (i >= view.size()) break;
            std::size_t start = i;
            while (i < view.size() && view[i] != ' ') ++i;
            double v = 0.0;
            if (!parse_double(view.substr(start, i - start), v)) {
                throw ParseError("bad number in visual record for image '" + image_id +
                                 "' on line " + std::to_string(line_no));
            }
            vec.push_back(v);
        }
        if (vec.empty()) {
            throw ParseError("visual record for image '" + image_id + "' on line " +
                             std::to_string(line_no) + " has no components");
        }
        if (dim == 0) {
            dim = vec.size();
            if (strict && dim != kVisualDim) {
                throw DimensionError("strict mode requires " + std::to_string(kVisualDim) +
                                     "-dim visual vectors, file has " + std::to_string(dim));
            }
        } else if (vec.size() != dim) {
            throw DimensionError("visual vector for image '" + image_id + "' has " +
                                 std::to_string(vec.size()) + " components, expected " +
                                 std::to_string(dim));
        }
        visuals[std::move(image_id)] = std::move(vec);
    }
    result.dimension = dim;
    return result;
}

const Topic& Dataset::topic(const std::string& topic_id) const {
    auto it = topic_index.find(topic_id);
    if (it == topic_index.end()) throw ArgumentError("unknown topic id: " + topic_id);
    return topics[it->second];
}

const std::vector<ImageCandidate>& Dataset::candidates_for(const std::string& topic_id) const {
    auto it = topic_index.find(topic_id);
    if (it == topic_index.end()) throw ArgumentError("unknown topic id: " + topic_id);
    return candidates[it->second];
}

std::vector<std::string> Dataset::topic_ids() const {
    std::vector<std::string> ids;
    ids.reserve(topics.size());
    for (const Topic& t : topics) ids.push_back(t.id);
    return ids;
}

Dataset load_dataset(const std::string& topics_path, const std::string& candidates_path,
                     const std::string& visuals_path, bool strict) {
    Dataset ds;

    std::ifstream topics_in(topics_path);
    if (!topics_in) throw IoError("cannot open topics file: " + topics_path);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(topics_in, line)) {
        ++line_no;
        std::string_view view = strip_cr(line);
        if (view.empty()) continue;
        auto fields = split_tabs(view);
        if (fields.size() < 2) {
            throw ParseError("malformed topic on line " + std::to_string(line_no) +
                             ": expected `topic_id TAB term1 TAB ...`");
        }
        Topic topic;
        topic.id = std::string(fields[0]);
        for (std::size_t i = 1; i < fields.size(); ++i) {
            if (!fields[i].empty()) topic.terms.push_back(normalize_token(fields[i]));
        }
        if (topic.terms.empty()) {
            throw ValidationError("topic '" + topic.id + "' has no terms");
        }
        if (strict && topic.terms.size() != kTopicTermCount) {
            throw ValidationError("topic '" + topic.id + "' has " +
                                  std::to_string(topic.terms.size()) + " terms, strict mode requires " +
                                  std::to_string(kTopicTermCount));
        }
        if (!ds.topic_index.emplace(topic.id, ds.topics.size()).second) {
            throw ValidationError("duplicate topic id '" + topic.id + "' on line " +
                                  std::to_string(line_no));
        }
        ds.topics.push_back(std::move(topic));
    }
    ds.candidates.resize(ds.topics.size());

    VisualVectors loaded_visuals = load_visual_vectors(visuals_path, strict);
    ds.visual_dim = loaded_visuals.dimension;
    const auto& visuals = loaded_visuals.by_id;

    std::ifstream cand_in(candidates_path);
    if (!cand_in) throw IoError("cannot open candidates file: " + candidates_path);
    std::unordered_set<std::string> seen_images;
    line_no = 0;
    while (std::getline(cand_in, line)) {
        ++line_no;
        std::string_view view = strip_cr(line);
        if (view.empty()) continue;
        // First three fields are tab-separated; the caption is everything
        // after the third tab.
        auto fields = split_tabs(view);
        if (fields.size() < 4) {
            throw ParseError("malformed candidate on line " + std::to_string(line_no) +
                             ": expected `topic_id TAB image_id TAB rating TAB caption`");
        }
        std::string_view caption = view;
        for (int tab = 0; tab < 3; ++tab) caption.remove_prefix(caption.find('\t') + 1);
        auto topic_it = ds.topic_index.find(std::string(fields[0]));
        if (topic_it == ds.topic_index.end()) {
            throw ValidationError("candidate on line " + std::to_string(line_no) +
                                  " references unknown topic '" + std::string(fields[0]) + "'");
        }

        ImageCandidate cand;
        cand.image_id = std::string(fields[1]);
        if (cand.image_id.empty()) {
            throw ParseError("empty image id on line " + std::to_string(line_no));
        }
        if (fields[2] == "NA") {
            cand.rating = std::nullopt;
        } else {
            double r = 0.0;
            if (!parse_double(fields[2], r)) {
                throw ParseError("bad rating '" + std::string(fields[2]) + "' on line " +
                                 std::to_string(line_no));
            }
            if (r < 0.0 || r > 3.0) {
                throw ValidationError("rating " + std::to_string(r) + " for image '" +
                                      cand.image_id + "' is outside [0, 3]");
            }
            cand.rating = r;
        }
        if (strict && !cand.rating.has_value()) {
            throw ValidationError("strict mode requires a rating for image '" + cand.image_id +
                                  "' (topic '" + std::string(fields[0]) + "')");
        }
        cand.caption_tokens = tokenize(caption);

        auto vis = visuals.find(cand.image_id);
        if (vis == visuals.end()) {
            throw ValidationError("image '" + cand.image_id + "' (topic '" +
                                  std::string(fields[0]) + "') has no visual vector");
        }
        cand.visual = vis->second;

        for (const ImageCandidate& existing : ds.candidates[topic_it->second]) {
            if (existing.image_id == cand.image_id) {
                throw ValidationError("duplicate candidate '" + cand.image_id + "' for topic '" +
                                      std::string(fields[0]) + "' on line " +
                                      std::to_string(line_no));
            }
        }
        seen_images.insert(cand.image_id);
        ds.candidates[topic_it->second].push_back(std::move(cand));
        ++ds.candidate_rows;
    }
    ds.distinct_images = seen_images.size();

    for (std::size_t i = 0; i < ds.topics.size(); ++i) {
        if (ds.candidates[i].empty()) {
            throw ValidationError("topic '" + ds.topics[i].id + "' has no candidates");
        }
        if (strict && ds.candidates[i].size() != kCandidatesPerTopic) {
            throw ValidationError("topic '" + ds.topics[i].id + "' has " +
                                  std::to_string(ds.candidates[i].size()) +
                                  " candidates, strict mode requires " +
                                  std::to_string(kCandidatesPerTopic));
        }
    }
    return ds;
}

std::vector<ImageCandidate> generate_negatives(const Dataset& dataset, const std::string& topic_id,
                                               std::span<const std::string> pool_topics,
                                               std::size_t k, std::mt19937_64& rng) {
    std::unordered_set<std::string> own_images;
    for (const ImageCandidate& c : dataset.candidates_for(topic_id)) {
        own_images.insert(c.image_id);
    }

    // Pool over the union of the pool topics' candidates, de-duplicated by
    // image id, in deterministic (topic order, candidate order) sequence.
    std::vector<const ImageCandidate*> pool;
    std::unordered_set<std::string> pooled;
    for (const std::string& pool_topic : pool_topics) {
        if (pool_topic == topic_id) {
            throw ArgumentError("negative pool for topic '" + topic_id +
                                "' must not contain the topic itself");
        }
        for (const ImageCandidate& c : dataset.candidates_for(pool_topic)) {
            if (own_images.count(c.image_id) > 0) continue;
            if (!pooled.insert(c.image_id).second) continue;
            pool.push_back(&c);
        }
    }
    if (pool.size() < k) {
        throw PoolExhaustedError("negative pool for topic '" + topic_id + "' has only " +
                                 std::to_string(pool.size()) + " images, need " +
                                 std::to_string(k));
    }

    // Partial Fisher-Yates draw of k images without replacement.
    std::vector<ImageCandidate> negatives;
    negatives.reserve(k);
    for (std::size_t i = 0; i < k; ++i) {
        std::uniform_int_distribution<std::size_t> pick(i, pool.size() - 1);
        std::swap(pool[i], pool[pick(rng)]);
        ImageCandidate neg = *pool[i];
        neg.rating = 0.0;
        negatives.push_back(std::move(neg));
    }
    return negatives;
}

std::vector<FoldSplit> kfold_split(std::span<const std::string> topic_ids, std::size_t k,
                                   std::uint64_t seed) {
    if (k < 2) throw ArgumentError("k-fold split requires k >= 2");
    if (k > topic_ids.size()) {
        throw ArgumentError("k-fold split with k=" + std::to_string(k) + " needs at least " +
                            std::to_string(k) + " topics, got " +
                            std::to_string(topic_ids.size()));
    }

    std::vector<std::string> shuffled(topic_ids.begin(), topic_ids.end());
    std::mt19937_64 rng(seed);
    std::shuffle(shuffled.begin(), shuffled.end(), rng);

    const std::size_t base = shuffled.size() / k;
    const std::size_t remainder = shuffled.size() % k;

    std::vector<FoldSplit> folds;
    folds.reserve(k);
    std::size_t cursor = 0;
    for (std::size_t fold = 0; fold < k; ++fold) {
        const std::size_t test_size = base + (fold < remainder ? 1 : 0);
        FoldSplit split;
        split.fold_index = fold;
        split.test_topics.assign(shuffled.begin() + cursor, shuffled.begin() + cursor + test_size);
        split.train_topics.assign(shuffled.begin(), shuffled.begin() + cursor);
        split.train_topics.insert(split.train_topics.end(), shuffled.begin() + cursor + test_size,
                                  shuffled.end());
        folds.push_back(std::move(split));
        cursor += test_size;
    }
    return folds;
}

}  // namespace topiclabel
