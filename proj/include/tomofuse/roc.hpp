#pragma once

// ROC curves and the area under them. Scores are "higher = more likely
// positive"; labels are 0/1. Tied scores form one threshold step, which
// gives tied pos/neg pairs half credit, so the area equals the
// Mann-Whitney U statistic divided by (n_pos * n_neg).

#include <algorithm>
#include <cstdint>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "tomofuse/error.hpp"

namespace tomofuse {

struct RocPoint {
    double threshold;  // +inf for the (0, 0) start
    double fpr;
    double tpr;
};

namespace detail {

struct RocSweep {
    std::vector<RocPoint> points;
    std::uint64_t twice_area_pairs = 0;  // 2 * U, exact
    std::uint64_t n_pos = 0;
    std::uint64_t n_neg = 0;
};

inline RocSweep roc_sweep(std::span<const double> scores, std::span<const int> labels) {
    if (scores.size() != labels.size()) {
        throw Error(ErrorCode::LengthMismatch, std::to_string(scores.size()) + " scores vs " +
                                                   std::to_string(labels.size()) + " labels");
    }
    RocSweep sw;
    for (int l : labels) (l ? sw.n_pos : sw.n_neg) += 1;
    if (sw.n_pos == 0 || sw.n_neg == 0) {
        throw Error(ErrorCode::DegenerateLabels, "ROC needs at least one positive and one negative");
    }
    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

    const double inv_pos = 1.0 / static_cast<double>(sw.n_pos);
    const double inv_neg = 1.0 / static_cast<double>(sw.n_neg);
    sw.points.push_back({std::numeric_limits<double>::infinity(), 0.0, 0.0});
    std::uint64_t tp = 0;
    std::uint64_t fp = 0;
    for (std::size_t i = 0; i < order.size();) {
        const double thr = scores[order[i]];
        std::uint64_t dtp = 0;
        std::uint64_t dfp = 0;
        for (; i < order.size() && scores[order[i]] == thr; ++i) (labels[order[i]] ? dtp : dfp) += 1;
        // Trapezoid over this block, in units of one pos/neg pair, doubled.
        sw.twice_area_pairs += dfp * (2 * tp + dtp);
        tp += dtp;
        fp += dfp;
        sw.points.push_back({thr, static_cast<double>(fp) * inv_neg, static_cast<double>(tp) * inv_pos});
    }
    return sw;
}

}  // namespace detail

inline double auroc(std::span<const double> scores, std::span<const int> labels) {
    const auto sw = detail::roc_sweep(scores, labels);
    return static_cast<double>(sw.twice_area_pairs) / (2.0 * static_cast<double>(sw.n_pos) * static_cast<double>(sw.n_neg));
}

// One point per distinct score (descending threshold) after the (0, 0)
// start; the last point is always (1, 1).
inline std::vector<RocPoint> roc_curve(std::span<const double> scores, std::span<const int> labels) {
    return detail::roc_sweep(scores, labels).points;
}

// Trapezoidal area under a polyline of ROC points.
inline double trapezoid_area(std::span<const RocPoint> pts) {
    double area = 0.0;
    for (std::size_t i = 1; i < pts.size(); ++i) {
        area += (pts[i].fpr - pts[i - 1].fpr) * (pts[i].tpr + pts[i - 1].tpr) * 0.5;
    }
    return area;
}

}  // namespace tomofuse
