#include <gtest/gtest.h>

#include <algorithm>
#include <random>
#include <set>

#include "tomofuse/learner/augment.hpp"
#include "tomofuse/learner/sampler.hpp"

using namespace tomofuse;

namespace {

std::vector<int> make_targets(std::size_t neg, std::size_t pos) {
    std::vector<int> t(neg, 0);
    t.insert(t.end(), pos, 1);
    return t;
}

Tensor random_image(std::mt19937_64& rng, std::size_t h, std::size_t w) {
    std::uniform_real_distribution<float> u(0.0f, 1.0f);
    Tensor t({h, w});
    for (float& v : t.data()) v = u(rng);
    return t;
}

}  // namespace

TEST(Sampler, PaperScaleEpoch) {
    const auto targets = make_targets(3018, 272);
    const auto batches = balanced_batches(targets, 256, 1);
    ASSERT_EQ(batches.size(), 24u);
    std::set<std::size_t> negatives_seen;
    for (const auto& b : batches) {
        ASSERT_EQ(b.size(), 256u);
        std::size_t pos = 0;
        for (std::size_t i : b) {
            pos += targets[i];
            if (!targets[i]) negatives_seen.insert(i);
        }
        EXPECT_EQ(pos, 128u);
    }
    EXPECT_EQ(negatives_seen.size(), 3018u);
}

TEST(Sampler, EveryBatchBalancedOnRandomCounts) {
    std::mt19937_64 rng(4);
    std::uniform_int_distribution<std::size_t> count(1, 300);
    std::uniform_int_distribution<std::size_t> half(1, 40);
    for (int trial = 0; trial < 50; ++trial) {
        const auto targets = make_targets(count(rng), count(rng));
        const std::size_t batch = 2 * half(rng);
        const std::size_t majority = std::max(std::count(targets.begin(), targets.end(), 0),
                                              std::count(targets.begin(), targets.end(), 1));
        const auto batches = balanced_batches(targets, batch, trial);
        EXPECT_EQ(batches.size(), (majority + batch / 2 - 1) / (batch / 2));
        for (const auto& b : batches) {
            ASSERT_EQ(b.size(), batch);
            std::size_t pos = 0;
            for (std::size_t i : b) pos += targets[i];
            EXPECT_EQ(pos, batch / 2);
        }
    }
}

TEST(Sampler, MinorityCoveredBeforeRepeats) {
    const auto targets = make_targets(100, 10);
    const auto batches = balanced_batches(targets, 20, 3);
    std::vector<std::size_t> pos_order;
    for (const auto& b : batches) {
        for (std::size_t i : b) {
            if (targets[i]) pos_order.push_back(i);
        }
    }
    std::set<std::size_t> first_pass(pos_order.begin(), pos_order.begin() + 10);
    EXPECT_EQ(first_pass.size(), 10u);
}

TEST(Sampler, DeterministicPerSeedAndEpoch) {
    const auto targets = make_targets(50, 7);
    EXPECT_EQ(balanced_batches(targets, 8, 9, 2), balanced_batches(targets, 8, 9, 2));
    EXPECT_NE(balanced_batches(targets, 8, 9, 2), balanced_batches(targets, 8, 9, 3));
    EXPECT_NE(balanced_batches(targets, 8, 9, 2), balanced_batches(targets, 8, 10, 2));
}

TEST(Sampler, Errors) {
    const auto targets = make_targets(5, 5);
    EXPECT_THROW(balanced_batches(targets, 3, 0), Error);
    EXPECT_THROW(balanced_batches(targets, 0, 0), Error);
    const auto one_class = make_targets(5, 0);
    try {
        balanced_batches(one_class, 4, 0);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::MissingClass);
    }
}

TEST(Augment, QuarterTurnOnTwoByTwo) {
    // [[a, b], [c, d]] turned 90 degrees counter-clockwise is [[b, d], [a, c]]
    Tensor img({2, 2}, std::vector<float>{1, 2, 3, 4});
    EXPECT_EQ(augment(img, {false, 1}).buffer(), (std::vector<float>{2, 4, 1, 3}));
    EXPECT_EQ(augment(img, {false, 2}).buffer(), (std::vector<float>{4, 3, 2, 1}));
    EXPECT_EQ(augment(img, {true, 0}).buffer(), (std::vector<float>{2, 1, 4, 3}));
}

TEST(Augment, EightDistinctBijectionsWithInverses) {
    std::mt19937_64 rng(5);
    Tensor img = random_image(rng, 6, 6);
    std::vector<Tensor> outs;
    for (const auto& a : all_augmentations()) {
        Tensor out = augment(img, a);
        std::vector<float> sorted_in = img.buffer();
        std::vector<float> sorted_out = out.buffer();
        std::sort(sorted_in.begin(), sorted_in.end());
        std::sort(sorted_out.begin(), sorted_out.end());
        EXPECT_EQ(sorted_in, sorted_out);
        EXPECT_EQ(augment(out, a.inverse()), img) << "index " << a.index();
        EXPECT_EQ(Augmentation::from_index(a.index()), a);
        for (const auto& prev : outs) EXPECT_NE(prev, out);
        outs.push_back(out);
    }
}

TEST(Augment, GroupIsClosedUnderComposition) {
    std::mt19937_64 rng(6);
    Tensor img = random_image(rng, 5, 5);
    std::vector<Tensor> images;
    for (const auto& a : all_augmentations()) images.push_back(augment(img, a));
    for (const auto& a : all_augmentations()) {
        for (const auto& b : all_augmentations()) {
            Tensor ab = augment(augment(img, a), b);
            EXPECT_TRUE(std::find(images.begin(), images.end(), ab) != images.end());
        }
    }
}

TEST(Augment, ChannelsTransformTogether) {
    std::mt19937_64 rng(7);
    Tensor c0 = random_image(rng, 4, 4);
    Tensor c1 = random_image(rng, 4, 4);
    std::vector<Tensor> parts{c0, c1};
    Tensor img = stack(parts);
    Augmentation a{true, 3};
    Tensor out = augment(img, a);
    auto s1 = out.slab(1);
    EXPECT_EQ(std::vector<float>(s1.begin(), s1.end()), augment(c1, a).buffer());
}

TEST(Augment, NonSquareRotationRejected) {
    Tensor img({3, 5});
    EXPECT_EQ(augment(img, {true, 2}).shape(), (Shape{3, 5}));
    try {
        augment(img, {false, 1});
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::NonSquareRotation);
    }
}
