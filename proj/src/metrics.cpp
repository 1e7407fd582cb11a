#include "topiclabel/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "topiclabel/error.hpp"

namespace topiclabel {

namespace {

double gain(double rating, GainVariant variant) {
    return variant == GainVariant::Linear ? rating : std::exp2(rating) - 1.0;
}

// Regularized incomplete beta function I_x(a, b) via the continued
// fraction expansion; enough accuracy for t-test p-values.
double betacf(double a, double b, double x) {
    constexpr int kMaxIter = 200;
    constexpr double kEps = 3e-14;
    constexpr double kFpMin = 1e-300;

    const double qab = a + b;
    const double qap = a + 1.0;
    const double qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::abs(d) < kFpMin) d = kFpMin;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= kMaxIter; ++m) {
        const int m2 = 2 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < kFpMin) d = kFpMin;
        c = 1.0 + aa / c;
        if (std::abs(c) < kFpMin) c = kFpMin;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < kFpMin) d = kFpMin;
        c = 1.0 + aa / c;
        if (std::abs(c) < kFpMin) c = kFpMin;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::abs(del - 1.0) < kEps) break;
    }
    return h;
}

double betai(double a, double b, double x) {
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    const double bt = std::exp(std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                               a * std::log(x) + b * std::log(1.0 - x));
    if (x < (a + 1.0) / (a + b + 2.0)) {
        return bt * betacf(a, b, x) / a;
    }
    return 1.0 - bt * betacf(b, a, 1.0 - x) / b;
}

}  // namespace

GainVariant parse_gain_variant(std::string_view name) {
    if (name == "linear") return GainVariant::Linear;
    if (name == "exp" || name == "exponential") return GainVariant::Exponential;
    throw ConfigError("unknown gain variant '" + std::string(name) +
                      "' (expected linear or exp)");
}

std::string_view gain_variant_name(GainVariant variant) {
    return variant == GainVariant::Linear ? "linear" : "exp";
}

RankedList rank_candidates(const std::string& topic_id, std::span<const ImageCandidate> candidates,
                           std::span<const double> scores) {
    if (candidates.empty()) throw ArgumentError("rank_candidates requires candidates");
    if (candidates.size() != scores.size()) {
        throw ArgumentError("rank_candidates requires one score per candidate");
    }
    std::vector<std::size_t> order(candidates.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (scores[a] != scores[b]) return scores[a] > scores[b];
        return candidates[a].image_id < candidates[b].image_id;
    });

    RankedList ranked;
    ranked.topic_id = topic_id;
    ranked.image_ids.reserve(candidates.size());
    ranked.gold.reserve(candidates.size());
    for (std::size_t idx : order) {
        const ImageCandidate& c = candidates[idx];
        if (!c.rating.has_value()) {
            throw ValidationError("image '" + c.image_id + "' (topic '" + topic_id +
                                  "') has no gold rating");
        }
        ranked.image_ids.push_back(c.image_id);
        ranked.gold.push_back(*c.rating);
    }
    return ranked;
}

double dcg_at_k(std::span<const double> ratings_in_predicted_order, std::size_t k,
                GainVariant variant) {
    if (k == 0) throw ArgumentError("dcg_at_k requires k >= 1");
    const std::size_t n = std::min(k, ratings_in_predicted_order.size());
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sum += gain(ratings_in_predicted_order[i], variant) /
               std::log2(static_cast<double>(i) + 2.0);
    }
    return sum;
}

double ndcg_at_k(const RankedList& ranked, std::size_t k, GainVariant variant) {
    if (ranked.gold.empty()) throw ArgumentError("ndcg_at_k requires a non-empty list");
    std::vector<double> ideal(ranked.gold);
    std::sort(ideal.begin(), ideal.end(), std::greater<>());
    const double ideal_dcg = dcg_at_k(ideal, k, variant);
    if (ideal_dcg == 0.0) return 1.0;  // nothing relevant: no ranking can be wrong
    return dcg_at_k(ranked.gold, k, variant) / ideal_dcg;
}

double top1_average_rating(std::span<const RankedList> ranked_lists) {
    if (ranked_lists.empty()) throw ArgumentError("top1_average_rating requires lists");
    double sum = 0.0;
    for (const RankedList& list : ranked_lists) {
        if (list.gold.empty()) {
            throw ArgumentError("topic '" + list.topic_id + "' has an empty ranked list");
        }
        sum += list.gold.front();
    }
    return sum / static_cast<double>(ranked_lists.size());
}

TTestResult paired_t_test(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size() || a.size() < 2) {
        throw ArgumentError("paired_t_test requires matched samples of size >= 2");
    }
    const std::size_t n = a.size();
    double mean = 0.0;
    for (std::size_t i = 0; i < n; ++i) mean += a[i] - b[i];
    mean /= static_cast<double>(n);
    double ss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double d = (a[i] - b[i]) - mean;
        ss += d * d;
    }
    const double var = ss / static_cast<double>(n - 1);

    TTestResult result;
    result.df = n - 1;
    if (var == 0.0) {
        if (mean == 0.0) {
            result.t = 0.0;
            result.p = 1.0;
        } else {
            result.t = mean > 0.0 ? std::numeric_limits<double>::infinity()
                                  : -std::numeric_limits<double>::infinity();
            result.p = 0.0;
        }
        return result;
    }
    result.t = mean / std::sqrt(var / static_cast<double>(n));
    const double df = static_cast<double>(result.df);
    result.p = betai(df / 2.0, 0.5, df / (df + result.t * result.t));
    return result;
}

}  // namespace topiclabel
