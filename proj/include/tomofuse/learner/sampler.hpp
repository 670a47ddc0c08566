#pragma once

#include <algorithm>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "tomofuse/error.hpp"

namespace tomofuse {

using Batch = std::vector<std::size_t>;

// Batches for one epoch. Each batch holds batch_size / 2 indices of each
// class (targets 0 and 1). The epoch is the ceil(M / half) batches needed
// to show every majority-class sample once; the last majority slot is topped
// up with random majority draws. The minority class is oversampled by
// walking through repeated shuffles of its indices.
inline std::vector<Batch> balanced_batches(std::span<const int> targets, std::size_t batch_size,
                                           std::uint64_t seed, std::uint64_t epoch = 0) {
    if (batch_size < 2 || batch_size % 2 != 0) {
        throw Error(ErrorCode::InvalidConfig, "balanced batches need an even batch size >= 2, got " +
                                                  std::to_string(batch_size));
    }
    std::vector<std::size_t> by_class[2];
    for (std::size_t i = 0; i < targets.size(); ++i) by_class[targets[i] ? 1 : 0].push_back(i);
    if (by_class[0].empty() || by_class[1].empty()) {
        throw Error(ErrorCode::MissingClass, "balanced sampling needs both classes, have " +
                                                 std::to_string(by_class[0].size()) + " negative / " +
                                                 std::to_string(by_class[1].size()) + " positive");
    }
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(epoch), static_cast<std::uint32_t>(epoch >> 32), 0xba1au};
    std::mt19937_64 rng(seq);

    const std::size_t half = batch_size / 2;
    const int major = by_class[0].size() >= by_class[1].size() ? 0 : 1;
    std::vector<std::size_t>& majority = by_class[major];
    std::vector<std::size_t>& minority = by_class[1 - major];
    const std::size_t n_batches = (majority.size() + half - 1) / half;

    std::vector<std::size_t> major_order = majority;
    std::shuffle(major_order.begin(), major_order.end(), rng);
    std::uniform_int_distribution<std::size_t> pick_major(0, majority.size() - 1);
    while (major_order.size() < n_batches * half) major_order.push_back(majority[pick_major(rng)]);

    std::vector<std::size_t> minor_order;
    minor_order.reserve(n_batches * half);
    std::vector<std::size_t> pass = minority;
    while (minor_order.size() < n_batches * half) {
        std::shuffle(pass.begin(), pass.end(), rng);
        const std::size_t take = std::min(pass.size(), n_batches * half - minor_order.size());
        minor_order.insert(minor_order.end(), pass.begin(), pass.begin() + static_cast<std::ptrdiff_t>(take));
    }

    std::vector<Batch> batches(n_batches);
    for (std::size_t b = 0; b < n_batches; ++b) {
        Batch& batch = batches[b];
        batch.reserve(batch_size);
        for (std::size_t i = 0; i < half; ++i) {
            batch.push_back(major_order[b * half + i]);
            batch.push_back(minor_order[b * half + i]);
        }
    }
    return batches;
}

}  // namespace tomofuse
