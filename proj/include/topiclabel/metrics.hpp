#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "topiclabel/dataset.hpp"

namespace topiclabel {

/// Gain applied to a gold rating at rank i (1-based): rel/log2(i+1) for
/// Linear, (2^rel - 1)/log2(i+1) for Exponential.
enum class GainVariant { Linear, Exponential };

GainVariant parse_gain_variant(std::string_view name);
std::string_view gain_variant_name(GainVariant variant);

/// A topic's candidates in predicted order (best first) with their gold
/// ratings, parallel arrays.
struct RankedList {
    std::string topic_id;
    std::vector<std::string> image_ids;
    std::vector<double> gold;
};

/// Sorts candidates by score descending; ties break by ascending image id.
/// Candidates must carry gold ratings.
RankedList rank_candidates(const std::string& topic_id, std::span<const ImageCandidate> candidates,
                           std::span<const double> scores);

/// Discounted cumulative gain over the first min(k, n) items.
double dcg_at_k(std::span<const double> ratings_in_predicted_order, std::size_t k,
                GainVariant variant = GainVariant::Linear);

/// DCG of the predicted order normalized by the ideal (gold-descending)
/// DCG. Defined as 1.0 when the ideal DCG is 0.
double ndcg_at_k(const RankedList& ranked, std::size_t k,
                 GainVariant variant = GainVariant::Linear);

/// Mean over topics of the gold rating of each list's top item.
double top1_average_rating(std::span<const RankedList> ranked_lists);

struct TTestResult {
    double t = 0.0;
    double p = 1.0;  // two-sided
    std::size_t df = 0;
};

/// Paired two-sided t-test over matched samples.
TTestResult paired_t_test(std::span<const double> a, std::span<const double> b);

}  // namespace topiclabel
