#pragma once

// Volume -> head input. Late fusion extracts every slice (or triplet) and
// pools over depth; early fusion collapses the stack to one image first.

#include <array>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "tomofuse/error.hpp"
#include "tomofuse/featpool.hpp"
#include "tomofuse/fusion.hpp"
#include "tomofuse/learner/augment.hpp"
#include "tomofuse/manifest.hpp"
#include "tomofuse/volume.hpp"

namespace tomofuse {

enum class FusionStrategy { Late, EarlyAverage, EarlyDynamic, SpaceToChannel };

inline std::string_view to_string(FusionStrategy s) {
    switch (s) {
        case FusionStrategy::Late: return "late";
        case FusionStrategy::EarlyAverage: return "early-average";
        case FusionStrategy::EarlyDynamic: return "early-dynamic";
        case FusionStrategy::SpaceToChannel: return "space-to-channel";
    }
    return "late";
}

inline std::optional<FusionStrategy> parse_fusion_strategy(std::string_view s) {
    if (s == "late") return FusionStrategy::Late;
    if (s == "early-average") return FusionStrategy::EarlyAverage;
    if (s == "early-dynamic") return FusionStrategy::EarlyDynamic;
    if (s == "space-to-channel") return FusionStrategy::SpaceToChannel;
    return std::nullopt;
}

struct FusionConfig {
    FusionStrategy strategy = FusionStrategy::Late;
    PoolMethod pooling = PoolMethod::Max;  // late and space-to-channel only
    RankVariant variant = RankVariant::Harmonic;
    std::size_t j = 0;                     // space-to-channel slice offset

    bool pools() const { return strategy == FusionStrategy::Late || strategy == FusionStrategy::SpaceToChannel; }
};

enum class ExtractorKind { Toy, External };

struct ExtractorConfig {
    ExtractorKind kind = ExtractorKind::Toy;
    std::string preset = "toy";
    std::uint64_t seed = 1;
    std::filesystem::path features_dir;
};

class Pipeline {
public:
    Pipeline(FusionConfig fusion, ExtractorConfig extractor) : fusion_(fusion), ext_cfg_(std::move(extractor)) {
        if (ext_cfg_.kind == ExtractorKind::Toy) {
            auto preset = toy_preset(ext_cfg_.preset);
            if (!preset) throw Error(ErrorCode::InvalidConfig, "unknown extractor preset '" + ext_cfg_.preset + "'");
            toy_ = std::make_shared<ToyExtractor>(ext_cfg_.seed, *preset);
        } else {
            if (fusion_.strategy != FusionStrategy::Late) {
                throw Error(ErrorCode::InvalidConfig,
                            "external features are per raw slice and only support late fusion");
            }
            if (ext_cfg_.features_dir.empty()) {
                throw Error(ErrorCode::InvalidConfig, "external extractor needs extractor.features_dir");
            }
            external_.emplace(ext_cfg_.features_dir);
        }
    }

    const FusionConfig& fusion() const { return fusion_; }
    const ExtractorConfig& extractor_config() const { return ext_cfg_; }
    bool supports_augmentation() const { return toy_ != nullptr; }
    const ToyExtractor* toy_extractor() const { return toy_.get(); }

    // Feature stack before pooling; early fusion yields a single row.
    FeatureStack features(const Volume& v, Augmentation aug = {}) const {
        if (external_) {
            if (aug != Augmentation{}) {
                throw Error(ErrorCode::InvalidConfig, "external features cannot be augmented");
            }
            return external_->load_stack(v.id, v.depth());
        }
        std::vector<Tensor> inputs;
        switch (fusion_.strategy) {
            case FusionStrategy::Late:
                for (std::size_t t = 0; t < v.depth(); ++t) inputs.push_back(augment(v.slice(t), aug));
                break;
            case FusionStrategy::EarlyAverage:
                inputs.push_back(augment(normalize_or_zero(average_image(v)), aug));
                break;
            case FusionStrategy::EarlyDynamic:
                inputs.push_back(augment(dynamic_image(v, fusion_.variant), aug));
                break;
            case FusionStrategy::SpaceToChannel:
                for (auto& triplet : space_to_channel(v, fusion_.j)) inputs.push_back(augment(triplet.channels, aug));
                break;
        }
        return extract_stack(*toy_, inputs, v.id);
    }

    // Fixed-size C' x H' x W' map fed to the classifier head.
    Tensor head_input(const Volume& v, Augmentation aug = {}) const {
        FeatureStack fs = features(v, aug);
        if (fusion_.pools()) return pool_depth(fs, fusion_.pooling);
        return Tensor(fs.map_shape(), std::vector<float>(fs.maps.data().begin(), fs.maps.data().end()));
    }

private:
    FusionConfig fusion_;
    ExtractorConfig ext_cfg_;
    std::shared_ptr<const ToyExtractor> toy_;
    std::optional<ExternalFeatures> external_;
};

// Precomputed head inputs: one row per volume, one map per augmentation.
// The extractor is frozen, so these never change during training.
struct FeatureBank {
    std::vector<std::string> ids;
    std::vector<int> targets;
    std::vector<std::vector<Tensor>> inputs;  // [sample][augmentation index]
    Shape input_shape;

    std::size_t size() const { return ids.size(); }
};

// Loads each entry, runs the pipeline for `n_augs` augmentations
// (1 = identity only, 8 = the full group). Non-square volumes keep only the
// four transforms that need no 90-degree turn. Row element 0 is always the
// identity.
inline FeatureBank build_feature_bank(const Pipeline& pipeline, const DatasetManifest& manifest,
                                      const std::vector<ManifestEntry>& entries, std::size_t n_augs) {
    if (n_augs != 1 && n_augs != 8) throw Error(ErrorCode::InvalidConfig, "n_augs must be 1 or 8");
    if (n_augs == 8 && !pipeline.supports_augmentation()) n_augs = 1;
    FeatureBank bank;
    for (const auto& e : entries) {
        const Volume v = load_volume(manifest, e);
        std::vector<Tensor> maps;
        maps.reserve(n_augs);
        const bool square = v.height() == v.width();
        for (std::size_t a = 0; a < n_augs; ++a) {
            const Augmentation aug = Augmentation::from_index(a);
            if (!square && aug.quarter_turns % 2 == 1) continue;
            maps.push_back(pipeline.head_input(v, aug));
        }
        if (bank.input_shape.empty()) bank.input_shape = maps.front().shape();
        if (maps.front().shape() != bank.input_shape) {
            throw Error(ErrorCode::ShapeMismatch, "volume " + v.id + " produced " + shape_string(maps.front().shape()) +
                                                      ", expected " + shape_string(bank.input_shape));
        }
        bank.ids.push_back(v.id);
        bank.targets.push_back(binary_target(v.label));
        bank.inputs.push_back(std::move(maps));
    }
    return bank;
}

}  // namespace tomofuse
