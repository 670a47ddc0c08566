#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>
#include <random>

#include "tomofuse/fusion.hpp"

using namespace tomofuse;

namespace {

Volume random_volume(std::mt19937_64& rng, std::size_t t, std::size_t h, std::size_t w) {
    std::uniform_real_distribution<float> u(0.0f, 1.0f);
    Tensor s({t, h, w});
    for (float& v : s.data()) v = u(rng);
    return Volume(std::move(s), View::CC, Label::Negative, "r");
}

// Straight transcription of the closed forms, harmonic numbers summed afresh.
double oracle_alpha(std::size_t T, std::size_t t, RankVariant var) {
    if (var == RankVariant::Linear) return 2.0 * t - T - 1.0;
    double tail = 0.0;
    for (std::size_t i = t; i <= T; ++i) tail += 1.0 / static_cast<double>(i);
    return 2.0 * (T - t + 1.0) - (T + 1.0) * tail;
}

}  // namespace

TEST(RankPool, HandCoefficients) {
    EXPECT_EQ(rank_pool_coefficients(2, RankVariant::Linear), (std::vector<double>{-1.0, 1.0}));
    const auto h3 = rank_pool_coefficients(3, RankVariant::Harmonic);
    EXPECT_NEAR(h3[0], -4.0 / 3.0, 1e-12);
    EXPECT_NEAR(h3[1], 2.0 / 3.0, 1e-12);
    EXPECT_NEAR(h3[2], 2.0 / 3.0, 1e-12);
    const auto h2 = rank_pool_coefficients(2, RankVariant::Harmonic);
    EXPECT_NEAR(h2[0], -0.5, 1e-12);
    EXPECT_NEAR(h2[1], 0.5, 1e-12);
    EXPECT_EQ(rank_pool_coefficients(1, RankVariant::Linear), (std::vector<double>{0.0}));
    EXPECT_NEAR(rank_pool_coefficients(1, RankVariant::Harmonic)[0], 0.0, 1e-15);
    EXPECT_THROW(rank_pool_coefficients(0, RankVariant::Linear), Error);
}

TEST(RankPool, MatchesOracleAndSumsToZero) {
    for (auto var : {RankVariant::Linear, RankVariant::Harmonic}) {
        for (std::size_t T = 1; T <= 64; ++T) {
            const auto a = rank_pool_coefficients(T, var);
            double sum = 0.0;
            for (std::size_t t = 1; t <= T; ++t) {
                EXPECT_NEAR(a[t - 1], oracle_alpha(T, t, var), 1e-9);
                sum += a[t - 1];
            }
            EXPECT_LT(std::abs(sum), 1e-9) << "T=" << T;
        }
    }
}

TEST(RankPool, LinearCoefficientsAreAntisymmetric) {
    for (std::size_t T = 1; T <= 20; ++T) {
        const auto a = rank_pool_coefficients(T, RankVariant::Linear);
        for (std::size_t t = 0; t < T; ++t) EXPECT_EQ(a[t], -a[T - 1 - t]);
    }
}

TEST(DynamicImage, MatchesBruteForce) {
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 10; ++trial) {
        const std::size_t T = 2 + trial;
        Volume v = random_volume(rng, T, 5, 7);
        for (auto var : {RankVariant::Linear, RankVariant::Harmonic}) {
            Tensor d = dynamic_image_unnormalized(v, var);
            for (std::size_t y = 0; y < 5; ++y) {
                for (std::size_t x = 0; x < 7; ++x) {
                    double want = 0.0;
                    for (std::size_t t = 1; t <= T; ++t) want += oracle_alpha(T, t, var) * v.slices.at(t - 1, y, x);
                    EXPECT_NEAR(d.at(y, x), want, 1e-5);
                }
            }
        }
    }
}

TEST(DynamicImage, ConstantVolumeIsZero) {
    for (std::size_t T = 1; T <= 16; ++T) {
        Volume v(Tensor({T, 4, 4}, 0.7f), View::CC, Label::Negative, "c");
        for (auto var : {RankVariant::Linear, RankVariant::Harmonic}) {
            Tensor d = dynamic_image_unnormalized(v, var);
            for (float x : d.data()) EXPECT_LT(std::abs(x), 1e-6);
            if (T > 1) {
                Tensor n = dynamic_image(v, var);
                for (float x : n.data()) EXPECT_EQ(x, 0.0f);
            }
        }
    }
}

TEST(DynamicImage, SingleSliceIsThatSlice) {
    std::mt19937_64 rng(1);
    Volume v = random_volume(rng, 1, 6, 6);
    EXPECT_EQ(dynamic_image(v), v.slice(0));
}

TEST(DynamicImage, LinearReversalNegates) {
    std::mt19937_64 rng(2);
    Volume v = random_volume(rng, 9, 4, 5);
    Tensor rev({9, 4, 5});
    for (std::size_t t = 0; t < 9; ++t) {
        auto src = v.slices.slab(8 - t);
        std::copy(src.begin(), src.end(), rev.slab(t).begin());
    }
    Volume r(rev, View::CC, Label::Negative, "r");
    Tensor a = dynamic_image_unnormalized(v, RankVariant::Linear);
    Tensor b = dynamic_image_unnormalized(r, RankVariant::Linear);
    for (std::size_t i = 0; i < a.size(); ++i) EXPECT_NEAR(a[i], -b[i], 1e-5);
}

TEST(DynamicImage, IsLinearBeforeNormalization) {
    std::mt19937_64 rng(3);
    Volume v = random_volume(rng, 6, 3, 3);
    Volume w = random_volume(rng, 6, 3, 3);
    Tensor mix({6, 3, 3});
    for (std::size_t i = 0; i < mix.size(); ++i) mix[i] = 2.0f * v.slices[i] - 0.5f * w.slices[i];
    Volume m(mix, View::CC, Label::Negative, "m");
    Tensor dv = dynamic_image_unnormalized(v, RankVariant::Harmonic);
    Tensor dw = dynamic_image_unnormalized(w, RankVariant::Harmonic);
    Tensor dm = dynamic_image_unnormalized(m, RankVariant::Harmonic);
    for (std::size_t i = 0; i < dm.size(); ++i) EXPECT_NEAR(dm[i], 2.0 * dv[i] - 0.5 * dw[i], 1e-5);
}

TEST(DynamicImage, NormalizedRange) {
    std::mt19937_64 rng(4);
    Volume v = random_volume(rng, 7, 8, 8);
    Tensor d = dynamic_image(v);
    EXPECT_EQ(*std::min_element(d.data().begin(), d.data().end()), 0.0f);
    EXPECT_EQ(*std::max_element(d.data().begin(), d.data().end()), 1.0f);
}

TEST(AverageImage, MatchesOracleAndIgnoresOrder) {
    std::mt19937_64 rng(6);
    Volume v = random_volume(rng, 5, 4, 3);
    Tensor a = average_image(v);
    for (std::size_t y = 0; y < 4; ++y) {
        for (std::size_t x = 0; x < 3; ++x) {
            double s = 0.0;
            for (std::size_t t = 0; t < 5; ++t) s += v.slices.at(t, y, x);
            EXPECT_NEAR(a.at(y, x), s / 5.0, 1e-7);
        }
    }
    std::vector<std::size_t> perm{3, 0, 4, 1, 2};
    Tensor p({5, 4, 3});
    for (std::size_t t = 0; t < 5; ++t) {
        auto src = v.slices.slab(perm[t]);
        std::copy(src.begin(), src.end(), p.slab(t).begin());
    }
    Tensor b = average_image(Volume(p, View::CC, Label::Negative, "p"));
    for (std::size_t i = 0; i < a.size(); ++i) EXPECT_NEAR(a[i], b[i], 1e-7);
}

TEST(SpaceToChannel, ClampsAtEdges) {
    Tensor s({5, 1, 1}, std::vector<float>{10, 11, 12, 13, 14});
    Volume v(s, View::CC, Label::Negative, "s");
    auto trip = space_to_channel(v, 2);
    ASSERT_EQ(trip.size(), 5u);
    EXPECT_EQ(trip[0].channels.buffer(), (std::vector<float>{10, 10, 12}));
    EXPECT_EQ(trip[2].channels.buffer(), (std::vector<float>{10, 12, 14}));
    EXPECT_EQ(trip[4].channels.buffer(), (std::vector<float>{12, 14, 14}));
    EXPECT_EQ(trip[3].center_index, 3u);
    auto same = space_to_channel(v, 0);
    EXPECT_EQ(same[1].channels.buffer(), (std::vector<float>{11, 11, 11}));
    auto far = space_to_channel(v, 9);
    EXPECT_EQ(far[1].channels.buffer(), (std::vector<float>{10, 11, 14}));
    EXPECT_EQ(far[1].channels.shape(), (Shape{3, 1, 1}));
}
