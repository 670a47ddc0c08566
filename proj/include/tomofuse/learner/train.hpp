#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "tomofuse/error.hpp"
#include "tomofuse/kv.hpp"
#include "tomofuse/learner/adam.hpp"
#include "tomofuse/learner/head.hpp"
#include "tomofuse/learner/loss.hpp"
#include "tomofuse/learner/pipeline.hpp"
#include "tomofuse/learner/sampler.hpp"
#include "tomofuse/manifest.hpp"
#include "tomofuse/roc.hpp"

namespace tomofuse {

// Defaults follow the best-performing configuration: late fusion, max
// pooling, batch 256, lr 1e-4, dropout 0.5.
struct TrainConfig {
    std::size_t batch_size = 256;
    double learning_rate = 1e-4;
    double dropout = 0.5;
    double weight_decay = 1e-4;
    std::size_t epochs = 20;
    std::uint64_t seed = 0;
    std::size_t hidden = 256;
    std::size_t conv_filters = 64;
    std::size_t conv_kernel = 3;
    std::size_t conv_stride = 1;
    double val_fraction = 0.2;
    bool augment = true;
    FusionConfig fusion;
    ExtractorConfig extractor;

    HeadConfig head_config(Shape input_shape) const {
        return {std::move(input_shape), conv_filters, conv_kernel, conv_stride, hidden, dropout};
    }
};

struct EpochRecord {
    std::size_t epoch = 0;  // 1-based
    double train_loss = 0.0;
    double val_auroc = 0.0;
};

struct TrainResult {
    ClassifierHead head;  // best validation auROC; latest epoch wins ties
    std::vector<EpochRecord> history;
    std::size_t effective_batch = 0;
    std::size_t best_epoch = 0;  // 0 when no epoch ran
};

namespace detail {

inline std::mt19937_64 train_stream(std::uint64_t seed, std::uint32_t tag) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32), tag};
    return std::mt19937_64(seq);
}

}  // namespace detail

// Head probabilities for the given bank rows, identity augmentation.
inline std::vector<double> score_rows(const ClassifierHead& head, const FeatureBank& bank,
                                      const std::vector<std::size_t>& rows) {
    std::vector<double> out;
    out.reserve(rows.size());
    for (std::size_t r : rows) out.push_back(forward(head, bank.inputs[r][0]));
    return out;
}

inline std::vector<double> score_bank(const ClassifierHead& head, const FeatureBank& bank) {
    std::vector<std::size_t> rows(bank.size());
    for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = i;
    return score_rows(head, bank, rows);
}

// Stratified, seeded split of bank rows into (train, validation).
inline std::pair<std::vector<std::size_t>, std::vector<std::size_t>> split_validation(const std::vector<int>& targets,
                                                                                      double fraction,
                                                                                      std::uint64_t seed) {
    std::vector<std::size_t> train;
    std::vector<std::size_t> val;
    auto rng = detail::train_stream(seed, 0x7a1u);
    for (int cls = 0; cls < 2; ++cls) {
        std::vector<std::size_t> rows;
        for (std::size_t i = 0; i < targets.size(); ++i) {
            if (targets[i] == cls) rows.push_back(i);
        }
        std::shuffle(rows.begin(), rows.end(), rng);
        const auto n_val = static_cast<std::size_t>(std::lround(fraction * static_cast<double>(rows.size())));
        val.insert(val.end(), rows.begin(), rows.begin() + static_cast<std::ptrdiff_t>(n_val));
        train.insert(train.end(), rows.begin() + static_cast<std::ptrdiff_t>(n_val), rows.end());
    }
    std::sort(train.begin(), train.end());
    std::sort(val.begin(), val.end());
    return {train, val};
}

// Trains a fresh head on a precomputed bank. A validation subset is carved
// off (cfg.val_fraction) to pick the returned head; when it lacks a class
// the training rows are used for selection instead.
inline TrainResult train_on_bank(const TrainConfig& cfg, const FeatureBank& bank) {
    if (bank.size() == 0) throw Error(ErrorCode::MissingClass, "empty training set");
    auto [train_rows, val_rows] = split_validation(bank.targets, cfg.val_fraction, cfg.seed);

    std::vector<int> train_targets;
    for (std::size_t r : train_rows) train_targets.push_back(bank.targets[r]);
    const auto n_pos = static_cast<std::size_t>(std::count(train_targets.begin(), train_targets.end(), 1));
    const std::size_t n_neg = train_targets.size() - n_pos;
    if (n_pos == 0 || n_neg == 0) {
        throw Error(ErrorCode::MissingClass, "training split has " + std::to_string(n_neg) + " negative / " +
                                                 std::to_string(n_pos) + " positive volumes");
    }
    std::vector<int> val_targets;
    for (std::size_t r : val_rows) val_targets.push_back(bank.targets[r]);
    const bool val_usable = std::count(val_targets.begin(), val_targets.end(), 1) > 0 &&
                            std::count(val_targets.begin(), val_targets.end(), 0) > 0;
    const auto& select_rows = val_usable ? val_rows : train_rows;
    const auto& select_targets = val_usable ? val_targets : train_targets;

    TrainResult result;
    // Shrink the batch when one epoch would not even fill one batch's majority half.
    result.effective_batch = std::min(cfg.batch_size, 2 * std::max(n_pos, n_neg));
    result.effective_batch -= result.effective_batch % 2;

    ClassifierHead head = ClassifierHead::initialized(cfg.head_config(bank.input_shape), cfg.seed);
    result.head = head;
    if (cfg.epochs == 0) return result;

    std::vector<Tensor> values;
    for (const auto& p : head.parameters()) values.push_back(p.value);
    AdamState adam = make_adam_state(values, {cfg.learning_rate, 0.9, 0.999, 1e-8, cfg.weight_decay});
    std::vector<Tensor*> param_ptrs;
    for (auto& p : head.parameters()) param_ptrs.push_back(&p.value);

    auto rng = detail::train_stream(cfg.seed, 0xd0u);
    double best = -1.0;
    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        const auto batches = balanced_batches(train_targets, result.effective_batch, cfg.seed, epoch);
        double loss_sum = 0.0;
        for (const Batch& batch : batches) {
            std::vector<Tensor> grads = head.zeros_like();
            std::vector<double> probs;
            std::vector<int> targets;
            const double inv_n = 1.0 / static_cast<double>(batch.size());
            for (std::size_t local : batch) {
                const std::size_t row = train_rows[local];
                const auto& maps = bank.inputs[row];
                std::size_t aug = 0;
                if (cfg.augment && maps.size() > 1) {
                    aug = std::uniform_int_distribution<std::size_t>(0, maps.size() - 1)(rng);
                }
                const Tensor& fm = maps[aug];
                const auto trace = forward_trace(head, fm, &rng);
                const int t = bank.targets[row];
                probs.push_back(trace.prob);
                targets.push_back(t);
                backward(head, fm, trace, bce_logit_gradient(trace.prob, t) * inv_n, grads);
            }
            loss_sum += bce_loss(probs, targets);
            adam_step(param_ptrs, grads, adam);
        }
        EpochRecord rec;
        rec.epoch = epoch + 1;
        rec.train_loss = loss_sum / static_cast<double>(batches.size());
        rec.val_auroc = auroc(score_rows(head, bank, select_rows), select_targets);
        result.history.push_back(rec);
        if (rec.val_auroc >= best) {
            best = rec.val_auroc;
            result.head = head;
            result.best_epoch = rec.epoch;
        }
    }
    return result;
}

// Full path: train-split volumes of `manifest` -> feature bank -> head.
inline TrainResult train(const TrainConfig& cfg, const DatasetManifest& manifest) {
    const Pipeline pipeline(cfg.fusion, cfg.extractor);
    const FeatureBank bank = build_feature_bank(pipeline, manifest, manifest.select(Split::Train), cfg.augment ? 8 : 1);
    return train_on_bank(cfg, bank);
}

// Config snapshot stored in checkpoints; keys match the run config file.
inline KeyValues to_key_values(const TrainConfig& cfg) {
    KeyValues kv;
    kv.set("fusion.strategy", std::string(to_string(cfg.fusion.strategy)));
    kv.set("fusion.pooling", std::string(to_string(cfg.fusion.pooling)));
    kv.set("fusion.variant", std::string(to_string(cfg.fusion.variant)));
    kv.set("fusion.j", std::to_string(cfg.fusion.j));
    kv.set("extractor.kind", cfg.extractor.kind == ExtractorKind::Toy ? "toy" : "external");
    kv.set("extractor.preset", cfg.extractor.preset);
    kv.set("extractor.seed", std::to_string(cfg.extractor.seed));
    kv.set("extractor.features_dir", cfg.extractor.features_dir.string());
    kv.set("train.batch_size", std::to_string(cfg.batch_size));
    kv.set("train.lr", format_double(cfg.learning_rate));
    kv.set("train.dropout", format_double(cfg.dropout));
    kv.set("train.weight_decay", format_double(cfg.weight_decay));
    kv.set("train.epochs", std::to_string(cfg.epochs));
    kv.set("train.seed", std::to_string(cfg.seed));
    kv.set("train.hidden", std::to_string(cfg.hidden));
    kv.set("train.conv_filters", std::to_string(cfg.conv_filters));
    kv.set("train.conv_kernel", std::to_string(cfg.conv_kernel));
    kv.set("train.conv_stride", std::to_string(cfg.conv_stride));
    kv.set("train.val_fraction", format_double(cfg.val_fraction));
    kv.set("train.augment", cfg.augment ? "true" : "false");
    return kv;
}

inline TrainConfig train_config_from(const KeyValues& kv) {
    auto bad = [](const std::string& key, const std::string& v) {
        return Error(ErrorCode::InvalidConfig, "invalid value '" + v + "' for " + key);
    };
    auto get_uint = [&](const std::string& key, std::uint64_t fallback) -> std::uint64_t {
        auto v = kv.get(key);
        if (!v) return fallback;
        auto n = parse_uint(*v);
        if (!n) throw bad(key, *v);
        return *n;
    };
    auto get_double = [&](const std::string& key, double fallback) {
        auto v = kv.get(key);
        if (!v) return fallback;
        auto d = parse_double(*v);
        if (!d || !std::isfinite(*d)) throw bad(key, *v);
        return *d;
    };
    TrainConfig cfg;
    if (auto v = kv.get("fusion.strategy")) {
        auto s = parse_fusion_strategy(*v);
        if (!s) throw bad("fusion.strategy", *v);
        cfg.fusion.strategy = *s;
    }
    if (auto v = kv.get("fusion.pooling")) {
        auto p = parse_pool_method(*v);
        if (!p) throw bad("fusion.pooling", *v);
        cfg.fusion.pooling = *p;
    }
    if (auto v = kv.get("fusion.variant")) {
        auto r = parse_rank_variant(*v);
        if (!r) throw bad("fusion.variant", *v);
        cfg.fusion.variant = *r;
    }
    cfg.fusion.j = get_uint("fusion.j", cfg.fusion.j);
    if (auto v = kv.get("extractor.kind")) {
        if (*v == "toy") {
            cfg.extractor.kind = ExtractorKind::Toy;
        } else if (*v == "external") {
            cfg.extractor.kind = ExtractorKind::External;
        } else {
            throw bad("extractor.kind", *v);
        }
    }
    if (auto v = kv.get("extractor.preset")) cfg.extractor.preset = *v;
    cfg.extractor.seed = get_uint("extractor.seed", cfg.extractor.seed);
    if (auto v = kv.get("extractor.features_dir")) cfg.extractor.features_dir = *v;
    cfg.batch_size = get_uint("train.batch_size", cfg.batch_size);
    cfg.learning_rate = get_double("train.lr", cfg.learning_rate);
    cfg.dropout = get_double("train.dropout", cfg.dropout);
    cfg.weight_decay = get_double("train.weight_decay", cfg.weight_decay);
    cfg.epochs = get_uint("train.epochs", cfg.epochs);
    cfg.seed = get_uint("train.seed", cfg.seed);
    cfg.hidden = get_uint("train.hidden", cfg.hidden);
    cfg.conv_filters = get_uint("train.conv_filters", cfg.conv_filters);
    cfg.conv_kernel = get_uint("train.conv_kernel", cfg.conv_kernel);
    cfg.conv_stride = get_uint("train.conv_stride", cfg.conv_stride);
    cfg.val_fraction = get_double("train.val_fraction", cfg.val_fraction);
    if (auto v = kv.get("train.augment")) {
        auto b = parse_bool(*v);
        if (!b) throw bad("train.augment", *v);
        cfg.augment = *b;
    }
    if (cfg.batch_size < 2 || cfg.batch_size % 2 != 0) throw bad("train.batch_size", std::to_string(cfg.batch_size));
    if (!(cfg.learning_rate > 0.0)) throw bad("train.lr", format_double(cfg.learning_rate));
    if (!(cfg.dropout >= 0.0 && cfg.dropout < 1.0)) throw bad("train.dropout", format_double(cfg.dropout));
    if (cfg.weight_decay < 0.0) throw bad("train.weight_decay", format_double(cfg.weight_decay));
    if (!(cfg.val_fraction >= 0.0 && cfg.val_fraction < 1.0)) {
        throw bad("train.val_fraction", format_double(cfg.val_fraction));
    }
    return cfg;
}

}  // namespace tomofuse
