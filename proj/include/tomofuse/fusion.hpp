#pragma once

// Slice-sequence fusion applied before feature extraction: average image,
// dynamic image (approximate rank pooling) and space-to-channel triplets.

#include <algorithm>
#include <cstddef>
#include <optional>
#include <string_view>
#include <vector>

#include "tomofuse/error.hpp"
#include "tomofuse/tensor.hpp"
#include "tomofuse/volume.hpp"

namespace tomofuse {

enum class RankVariant { Linear, Harmonic };

inline std::string_view to_string(RankVariant v) { return v == RankVariant::Linear ? "linear" : "harmonic"; }

inline std::optional<RankVariant> parse_rank_variant(std::string_view s) {
    if (s == "linear") return RankVariant::Linear;
    if (s == "harmonic") return RankVariant::Harmonic;
    return std::nullopt;
}

// Per-position weights alpha_1..alpha_T of the rank-pooling closed form.
//   Linear:   alpha_t = 2t - T - 1
//   Harmonic: alpha_t = 2(T - t + 1) - (T + 1)(H_T - H_{t-1}),  H_k = sum_{i<=k} 1/i
// Both sum to zero.
inline std::vector<double> rank_pool_coefficients(std::size_t depth, RankVariant variant) {
    if (depth < 1) throw Error(ErrorCode::InvalidDepth, "rank pooling needs at least one slice");
    const auto T = static_cast<double>(depth);
    std::vector<double> alpha(depth);
    if (variant == RankVariant::Linear) {
        for (std::size_t t = 1; t <= depth; ++t) alpha[t - 1] = 2.0 * static_cast<double>(t) - T - 1.0;
        return alpha;
    }
    // harmonic[k] = H_k
    std::vector<double> harmonic(depth + 1, 0.0);
    for (std::size_t k = 1; k <= depth; ++k) harmonic[k] = harmonic[k - 1] + 1.0 / static_cast<double>(k);
    for (std::size_t t = 1; t <= depth; ++t) {
        alpha[t - 1] = 2.0 * (T - static_cast<double>(t) + 1.0) - (T + 1.0) * (harmonic[depth] - harmonic[t - 1]);
    }
    return alpha;
}

// sum_t alpha_t * slice_t with no re-normalization, accumulated in ascending t.
inline Tensor dynamic_image_unnormalized(const Volume& v, RankVariant variant) {
    const auto alpha = rank_pool_coefficients(v.depth(), variant);
    const std::size_t n = v.height() * v.width();
    std::vector<double> acc(n, 0.0);
    for (std::size_t t = 0; t < v.depth(); ++t) {
        const auto s = v.slices.slab(t);
        for (std::size_t i = 0; i < n; ++i) acc[i] += alpha[t] * static_cast<double>(s[i]);
    }
    Tensor out({v.height(), v.width()});
    for (std::size_t i = 0; i < n; ++i) out[i] = static_cast<float>(acc[i]);
    return out;
}

// Maps onto [0, 1]; a constant image becomes all zeros instead of failing.
inline Tensor normalize_or_zero(const Tensor& img) {
    const auto [lo, hi] = std::minmax_element(img.data().begin(), img.data().end());
    if (!(*hi > *lo)) return Tensor(img.shape(), 0.0f);
    return normalize(img);
}

// Dynamic image re-normalized to [0, 1]. A single-slice volume yields that slice.
inline Tensor dynamic_image(const Volume& v, RankVariant variant = RankVariant::Harmonic) {
    if (v.depth() == 1) return v.slice(0);
    return normalize_or_zero(dynamic_image_unnormalized(v, variant));
}

inline Tensor average_image(const Volume& v) {
    const std::size_t n = v.height() * v.width();
    std::vector<double> acc(n, 0.0);
    for (std::size_t t = 0; t < v.depth(); ++t) {
        const auto s = v.slices.slab(t);
        for (std::size_t i = 0; i < n; ++i) acc[i] += static_cast<double>(s[i]);
    }
    const double inv = 1.0 / static_cast<double>(v.depth());
    Tensor out({v.height(), v.width()});
    for (std::size_t i = 0; i < n; ++i) out[i] = static_cast<float>(acc[i] * inv);
    return out;
}

struct TripletImage {
    Tensor channels;            // 3 x H x W
    std::size_t center_index;   // 0-based slice index i
};

// One 3-channel image (V[i-j], V[i], V[i+j]) per slice i; indices past
// either end of the stack clamp to the edge slice.
inline std::vector<TripletImage> space_to_channel(const Volume& v, std::size_t j) {
    const std::size_t depth = v.depth();
    const std::size_t n = v.height() * v.width();
    std::vector<TripletImage> out;
    out.reserve(depth);
    for (std::size_t i = 0; i < depth; ++i) {
        const std::size_t lo = i >= j ? i - j : 0;
        const std::size_t hi = std::min(i + j, depth - 1);
        Tensor img({3, v.height(), v.width()});
        const std::size_t picks[3] = {lo, i, hi};
        for (std::size_t c = 0; c < 3; ++c) {
            const auto s = v.slices.slab(picks[c]);
            std::copy(s.begin(), s.end(), img.data().begin() + static_cast<std::ptrdiff_t>(c * n));
        }
        out.push_back({std::move(img), i});
    }
    return out;
}

}  // namespace tomofuse
