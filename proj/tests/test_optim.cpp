#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "tomofuse/learner/adam.hpp"

using namespace tomofuse;

TEST(Adam, FirstStepMovesByLearningRate) {
    Tensor p({3}, 0.0f);
    std::vector<Tensor> g{Tensor({3}, std::vector<float>{0.5f, -2.0f, 1e-3f})};
    AdamState st = make_adam_state({p});
    adam_step({&p}, g, st);
    EXPECT_NEAR(p[0], -1e-4, 1e-10);
    EXPECT_NEAR(p[1], 1e-4, 1e-10);
    EXPECT_NEAR(p[2], -1e-4 * 1e-3 / (1e-3 + 1e-8), 1e-11);
    EXPECT_EQ(st.step, 1u);
}

TEST(Adam, UnitGradientWithoutDecay) {
    Tensor p({1}, 0.0f);
    AdamState st = make_adam_state({p}, {1e-4, 0.9, 0.999, 1e-8, 0.0});
    adam_step({&p}, {Tensor({1}, 1.0f)}, st);
    EXPECT_NEAR(p[0], -1e-4 / (1.0 + 1e-8), 1e-11);
    Tensor q({2}, std::vector<float>{0.25f, -3.0f});
    AdamState fresh = make_adam_state({q}, {1e-4, 0.9, 0.999, 1e-8, 0.0});
    adam_step({&q}, {Tensor({2}, 0.0f)}, fresh);
    EXPECT_EQ(q.buffer(), (std::vector<float>{0.25f, -3.0f}));
}

TEST(Adam, MatchesHandRolledRecurrence) {
    std::mt19937_64 rng(1);
    std::normal_distribution<double> n(0.0, 1.0);
    AdamHyper hp{1e-2, 0.9, 0.999, 1e-8, 1e-4};
    Tensor p({4}, std::vector<float>{0.3f, -0.2f, 1.5f, 0.0f});
    AdamState st = make_adam_state({p}, hp);
    std::vector<double> theta(p.buffer().begin(), p.buffer().end()), m(4, 0.0), v(4, 0.0);
    for (int step = 1; step <= 5; ++step) {
        std::vector<Tensor> g{Tensor({4})};
        for (auto& x : g[0].data()) x = static_cast<float>(n(rng));
        adam_step({&p}, g, st);
        for (int i = 0; i < 4; ++i) {
            const double gi = g[0][i] + hp.weight_decay * theta[i];
            m[i] = 0.9 * m[i] + 0.1 * gi;
            v[i] = 0.999 * v[i] + 0.001 * gi * gi;
            const double mh = m[i] / (1 - std::pow(0.9, step));
            const double vh = v[i] / (1 - std::pow(0.999, step));
            theta[i] -= hp.lr * mh / (std::sqrt(vh) + hp.eps);
        }
        for (int i = 0; i < 4; ++i) EXPECT_NEAR(p[i], theta[i], 1e-6) << "step " << step;
    }
}

TEST(Adam, UpdateOpposesGradientSign) {
    std::mt19937_64 rng(2);
    std::normal_distribution<float> n(0.0f, 1.0f);
    Tensor p({100}, 0.0f);
    std::vector<Tensor> g{Tensor({100})};
    for (float& x : g[0].data()) x = n(rng);
    AdamState st = make_adam_state({p});
    adam_step({&p}, g, st);
    for (std::size_t i = 0; i < 100; ++i) {
        if (g[0][i] != 0.0f) EXPECT_LT(p[i] * g[0][i], 0.0f);
        EXPECT_LE(std::abs(p[i]), 1e-4 + 1e-9);
    }
}

TEST(Adam, WeightDecayShrinksWithZeroGradient) {
    Tensor p({1}, 2.0f);
    AdamState st = make_adam_state({p}, {1e-3, 0.9, 0.999, 1e-8, 1e-2});
    adam_step({&p}, {Tensor({1}, 0.0f)}, st);
    EXPECT_LT(p[0], 2.0f);
}

TEST(Adam, ShapeMismatchThrows) {
    Tensor p({2});
    AdamState st = make_adam_state({p});
    EXPECT_THROW(adam_step({&p}, {Tensor({3})}, st), Error);
}
