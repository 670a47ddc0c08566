#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "tomofuse/learner/head.hpp"
#include "tomofuse/learner/loss.hpp"

using namespace tomofuse;

namespace {

HeadConfig tiny_config() {
    HeadConfig c;
    c.input_shape = {2, 5, 5};
    c.conv_filters = 3;
    c.hidden = 6;
    return c;
}

}  // namespace

TEST(Head, ParameterShapesAndNames) {
    HeadConfig c;
    c.input_shape = {16, 8, 8};
    ClassifierHead h(c);
    const auto& p = h.parameters();
    ASSERT_EQ(p.size(), 6u);
    EXPECT_EQ(p[0].name, "conv.weight");
    EXPECT_EQ(p[0].value.shape(), (Shape{64, 16, 3, 3}));
    EXPECT_EQ(p[2].value.shape(), (Shape{256, 64 * 6 * 6}));
    EXPECT_EQ(p[4].value.shape(), (Shape{1, 256}));
    EXPECT_EQ(p[5].name, "linear2.bias");
}

TEST(Head, ZeroWeightsGiveHalf) {
    ClassifierHead h(tiny_config());
    EXPECT_DOUBLE_EQ(forward(h, Tensor({2, 5, 5}, 0.3f)), 0.5);
    h.param(ClassifierHead::Lin2B)[0] = 2.0f;
    EXPECT_NEAR(forward(h, Tensor({2, 5, 5}, 0.3f)), 0.880797, 1e-6);
}

TEST(Head, RejectsWrongInputShape) {
    ClassifierHead h(tiny_config());
    EXPECT_THROW(forward(h, Tensor({2, 5, 6})), Error);
    HeadConfig c = tiny_config();
    c.input_shape = {2, 2, 2};
    EXPECT_THROW(ClassifierHead{c}, Error);
}

TEST(Head, InitIsSeededHeNormal) {
    HeadConfig c;
    c.input_shape = {16, 8, 8};
    ClassifierHead a = ClassifierHead::initialized(c, 4);
    EXPECT_EQ(a, ClassifierHead::initialized(c, 4));
    EXPECT_FALSE(a == ClassifierHead::initialized(c, 5));
    const Tensor& w1 = a.param(ClassifierHead::Lin1W);
    double ss = 0.0;
    for (float v : w1.data()) ss += static_cast<double>(v) * v;
    const double expected_var = 2.0 / static_cast<double>(c.flat_dim());
    EXPECT_NEAR(ss / static_cast<double>(w1.size()), expected_var, 0.02 * expected_var);
    for (float v : a.param(ClassifierHead::Lin1B).data()) EXPECT_EQ(v, 0.0f);
}

TEST(Loss, HandValues) {
    std::vector<double> p{0.5};
    std::vector<int> y{1};
    EXPECT_NEAR(bce_loss(p, y), 0.693147, 1e-6);
    std::vector<double> p2{0.9, 0.2};
    std::vector<int> y2{1, 0};
    EXPECT_NEAR(bce_loss(p2, y2), 0.164252, 1e-6);
    std::vector<double> p3{0.0, 1.0};
    std::vector<int> y3{1, 0};
    EXPECT_NEAR(bce_loss(p3, y3), -std::log(1e-7), 1e-6);
    std::vector<int> y4{1, 0, 1};
    EXPECT_THROW(bce_loss(p2, y4), Error);
}

TEST(Loss, LogitGradientIsProbMinusTarget) {
    EXPECT_DOUBLE_EQ(bce_logit_gradient(0.7, 1), 0.7 - 1.0);
    EXPECT_DOUBLE_EQ(bce_logit_gradient(0.25, 0), 0.25);
    EXPECT_EQ(bce_logit_gradient(1.0, 0), 0.0);
}

TEST(Head, GradientsMatchFiniteDifferences) {
    std::mt19937_64 rng(21);
    for (int trial = 0; trial < 10; ++trial) {
        auto [head, fm] = oracle::random_small_head(rng);
        for (int target : {0, 1}) {
            for (std::uint64_t seed : {std::uint64_t{0}, std::uint64_t{100 + trial}}) {
                const auto gc = oracle::check_gradients(head, fm, target, seed);
                EXPECT_GT(gc.checked, 0u);
                EXPECT_LT(gc.max_rel_error, 1e-4) << "trial " << trial << " target " << target << " seed " << seed;
            }
        }
    }
}

TEST(Head, DuplicatedSampleGradientEqualsSingle) {
    std::mt19937_64 rng(3);
    auto [head, fm] = oracle::random_small_head(rng);
    const auto tr = forward_trace(head, fm, nullptr);
    const double d = bce_logit_gradient(tr.prob, 1);
    auto single = head.zeros_like();
    backward(head, fm, tr, d, single);
    auto twice = head.zeros_like();
    backward(head, fm, tr, d * 0.5, twice);
    backward(head, fm, tr, d * 0.5, twice);
    for (std::size_t k = 0; k < single.size(); ++k) {
        for (std::size_t i = 0; i < single[k].size(); ++i) EXPECT_NEAR(twice[k][i], single[k][i], 1e-6);
    }
}

TEST(Head, ZeroInputGivesZeroConvWeightGradient) {
    std::mt19937_64 rng(4);
    auto [head, fm] = oracle::random_small_head(rng);
    Tensor zero(fm.shape(), 0.0f);
    const auto tr = forward_trace(head, zero, nullptr);
    auto g = head.zeros_like();
    backward(head, zero, tr, tr.prob - 1.0, g);
    for (float v : g[ClassifierHead::ConvW].data()) EXPECT_EQ(v, 0.0f);
    bool any_bias = false;
    for (float v : g[ClassifierHead::ConvB].data()) any_bias |= v != 0.0f;
    EXPECT_TRUE(any_bias);
    EXPECT_NE(g[ClassifierHead::Lin2B][0], 0.0f);
}

TEST(Head, DropoutIsUnbiasedInExpectation) {
    std::mt19937_64 rng(6);
    auto [head, fm] = oracle::random_small_head(rng);
    const double eval_logit = forward_trace<double>(head, fm, nullptr).logit;
    std::mt19937_64 drop(77);
    const int n = 10000;
    double sum = 0.0, sq = 0.0;
    for (int i = 0; i < n; ++i) {
        const double l = forward_trace<double>(head, fm, &drop).logit;
        sum += l;
        sq += l * l;
    }
    const double mean = sum / n;
    const double sd = std::sqrt(std::max(0.0, sq / n - mean * mean));
    EXPECT_LE(std::abs(mean - eval_logit), 3.0 * sd / std::sqrt(static_cast<double>(n)) + 1e-12);
}

TEST(Head, InferenceIgnoresRngAndIsDeterministic) {
    std::mt19937_64 rng(8);
    auto [head, fm] = oracle::random_small_head(rng);
    std::mt19937_64 r(1);
    EXPECT_EQ(forward(head, fm), forward(head, fm, false, &r));
    std::mt19937_64 r1(9), r2(9);
    EXPECT_EQ(forward(head, fm, true, &r1), forward(head, fm, true, &r2));
}
