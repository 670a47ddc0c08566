#include <gtest/gtest.h>

#include <random>

#include "oracles.hpp"
#include "tomofuse/roc.hpp"

using namespace tomofuse;

TEST(Auroc, HandCase) {
    std::vector<double> s{0.1, 0.4, 0.35, 0.8};
    std::vector<int> y{0, 0, 1, 1};
    EXPECT_DOUBLE_EQ(auroc(s, y), 0.75);
}

TEST(Auroc, AllTiedIsHalf) {
    std::vector<double> s(10, 0.3);
    std::vector<int> y{0, 1, 0, 1, 1, 0, 0, 0, 1, 0};
    EXPECT_DOUBLE_EQ(auroc(s, y), 0.5);
}

TEST(Auroc, PerfectAndInverted) {
    std::vector<double> s{0.1, 0.2, 0.8, 0.9};
    std::vector<int> y{0, 0, 1, 1};
    EXPECT_DOUBLE_EQ(auroc(s, y), 1.0);
    std::vector<int> flipped{1, 1, 0, 0};
    EXPECT_DOUBLE_EQ(auroc(s, flipped), 0.0);
}

TEST(Auroc, EqualsMannWhitneyWithTies) {
    std::mt19937_64 rng(13);
    std::uniform_int_distribution<std::size_t> n(2, 200);
    std::uniform_int_distribution<int> level(0, 9);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t size = n(rng);
        std::vector<double> s(size);
        std::vector<int> y(size);
        for (std::size_t i = 0; i < size; ++i) {
            s[i] = trial % 2 ? level(rng) / 10.0 : u(rng);
            y[i] = u(rng) < 0.3;
        }
        y[0] = 0;
        y[1] = 1;
        EXPECT_EQ(auroc(s, y), oracle::mann_whitney(s, y)) << "trial " << trial;
    }
}

TEST(Auroc, ComplementAndMonotoneInvariance) {
    std::mt19937_64 rng(14);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 30; ++trial) {
        std::vector<double> s(50);
        std::vector<int> y(50);
        for (int i = 0; i < 50; ++i) {
            s[i] = std::round(u(rng) * 20) / 20;
            y[i] = i % 3 == 0;
        }
        std::vector<double> neg(s), cubed(s);
        std::vector<int> ny(y);
        for (int i = 0; i < 50; ++i) {
            neg[i] = -s[i];
            cubed[i] = std::exp(3 * s[i]) - 7;
            ny[i] = 1 - y[i];
        }
        EXPECT_DOUBLE_EQ(auroc(s, y) + auroc(s, ny), 1.0);
        EXPECT_DOUBLE_EQ(auroc(neg, y), 1.0 - auroc(s, y));
        EXPECT_EQ(auroc(cubed, y), auroc(s, y));
    }
}

TEST(RocCurve, EndpointsMonotoneAndAreaConsistent) {
    std::mt19937_64 rng(15);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<double> s(80);
        std::vector<int> y(80);
        for (int i = 0; i < 80; ++i) {
            y[i] = i % 4 == 0;
            s[i] = std::round((u(rng) + 0.3 * y[i]) * 30) / 30;
        }
        const auto pts = roc_curve(s, y);
        ASSERT_GE(pts.size(), 2u);
        EXPECT_TRUE(std::isinf(pts.front().threshold));
        EXPECT_EQ(pts.front().fpr, 0.0);
        EXPECT_EQ(pts.front().tpr, 0.0);
        EXPECT_EQ(pts.back().fpr, 1.0);
        EXPECT_EQ(pts.back().tpr, 1.0);
        for (std::size_t i = 1; i < pts.size(); ++i) {
            EXPECT_GE(pts[i].fpr, pts[i - 1].fpr);
            EXPECT_GE(pts[i].tpr, pts[i - 1].tpr);
            EXPECT_LT(pts[i].threshold, pts[i - 1].threshold);
        }
        EXPECT_NEAR(trapezoid_area(pts), auroc(s, y), 1e-12);
    }
}

TEST(RocCurve, SinglePairPoints) {
    std::vector<double> s{0.2, 0.9};
    std::vector<int> y{0, 1};
    const auto pts = roc_curve(s, y);
    ASSERT_EQ(pts.size(), 3u);
    EXPECT_EQ(pts[1].fpr, 0.0);
    EXPECT_EQ(pts[1].tpr, 1.0);
    EXPECT_EQ(pts[2].fpr, 1.0);
    EXPECT_EQ(pts[2].tpr, 1.0);
}

TEST(Auroc, Errors) {
    std::vector<double> s{0.1, 0.2};
    std::vector<int> one{1, 1};
    std::vector<int> three{0, 1, 1};
    try {
        auroc(s, one);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::DegenerateLabels);
    }
    try {
        auroc(s, three);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::LengthMismatch);
    }
}
