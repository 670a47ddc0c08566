#pragma once

// Grid of (fusion, pooling, extractor preset, j) settings, each trained and
// tested over a shared seed list; rows mirror the comparison table layout.

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include "tomofuse/error.hpp"
#include "tomofuse/learner/pipeline.hpp"
#include "tomofuse/learner/train.hpp"
#include "tomofuse/manifest.hpp"
#include "tomofuse/report.hpp"

namespace tomofuse {

struct AblationGrid {
    std::vector<FusionStrategy> strategies{FusionStrategy::Late};
    std::vector<PoolMethod> poolings{PoolMethod::Min, PoolMethod::Avg, PoolMethod::Max};
    std::vector<std::string> presets{"toy"};
    std::vector<std::size_t> js{1};  // used by space-to-channel only
    std::vector<std::uint64_t> seeds{1, 2, 3};
};

struct AblationRow {
    std::string approach;
    std::string architecture;
    std::string fusion;
    std::string pooling;
    std::size_t batch_size = 0;
    double learning_rate = 0.0;
    double dropout = 0.0;
    std::vector<double> aurocs;  // one per seed
    double auroc = 0.0;          // mean over seeds
    TrainConfig config;
};

namespace detail {

inline std::string fusion_label(const FusionConfig& f) {
    switch (f.strategy) {
        case FusionStrategy::Late: return "late";
        case FusionStrategy::EarlyAverage: return "early (average)";
        case FusionStrategy::EarlyDynamic: return "early (dynamic)";
        case FusionStrategy::SpaceToChannel: return "space-to-channel (j=" + std::to_string(f.j) + ")";
    }
    return "late";
}

inline std::string pooling_label(const FusionConfig& f) {
    return f.pools() ? std::string(to_string(f.pooling)) : std::string("none");
}

inline std::string approach_label(const FusionConfig& f) {
    switch (f.strategy) {
        case FusionStrategy::Late: return "Ours (" + pooling_label(f) + " pooling)";
        case FusionStrategy::EarlyAverage: return "Ours (average image)";
        case FusionStrategy::EarlyDynamic: return "Ours (dynamic image)";
        case FusionStrategy::SpaceToChannel: return "Ours (space-to-channel j=" + std::to_string(f.j) + ")";
    }
    return "Ours";
}

}  // namespace detail

// Expands the grid, dropping combinations where an axis does not apply
// (pooling for early fusion, j outside space-to-channel).
inline std::vector<TrainConfig> expand_grid(const TrainConfig& base, const AblationGrid& grid) {
    if (grid.strategies.empty() || grid.poolings.empty() || grid.presets.empty() || grid.seeds.empty()) {
        throw Error(ErrorCode::InvalidConfig, "ablation grid has an empty axis");
    }
    std::vector<TrainConfig> out;
    auto seen = [&](const TrainConfig& c) {
        return std::any_of(out.begin(), out.end(), [&](const TrainConfig& o) {
            return o.fusion.strategy == c.fusion.strategy && o.fusion.pooling == c.fusion.pooling &&
                   o.fusion.j == c.fusion.j && o.extractor.preset == c.extractor.preset;
        });
    };
    for (const auto& preset : grid.presets) {
        for (FusionStrategy s : grid.strategies) {
            const bool pools = s == FusionStrategy::Late || s == FusionStrategy::SpaceToChannel;
            const std::vector<PoolMethod> pooling_axis = pools ? grid.poolings : std::vector<PoolMethod>{base.fusion.pooling};
            const std::vector<std::size_t> j_axis =
                s == FusionStrategy::SpaceToChannel && !grid.js.empty() ? grid.js : std::vector<std::size_t>{0};
            for (PoolMethod p : pooling_axis) {
                for (std::size_t j : j_axis) {
                    TrainConfig c = base;
                    c.fusion.strategy = s;
                    c.fusion.pooling = p;
                    c.fusion.j = j;
                    c.extractor.preset = preset;
                    if (!seen(c)) out.push_back(c);
                }
            }
        }
    }
    return out;
}

inline std::vector<AblationRow> ablate(const DatasetManifest& manifest, const TrainConfig& base, const AblationGrid& grid) {
    std::vector<AblationRow> rows;
    const auto train_entries = manifest.select(Split::Train);
    const auto test_entries = manifest.select(Split::Test);
    for (const TrainConfig& cfg : expand_grid(base, grid)) {
        const Pipeline pipeline(cfg.fusion, cfg.extractor);
        const FeatureBank train_bank = build_feature_bank(pipeline, manifest, train_entries, cfg.augment ? 8 : 1);
        const FeatureBank test_bank = build_feature_bank(pipeline, manifest, test_entries, 1);
        AblationRow row;
        row.approach = detail::approach_label(cfg.fusion);
        row.architecture = cfg.extractor.preset;
        row.fusion = detail::fusion_label(cfg.fusion);
        row.pooling = detail::pooling_label(cfg.fusion);
        row.batch_size = cfg.batch_size;
        row.learning_rate = cfg.learning_rate;
        row.dropout = cfg.dropout;
        row.config = cfg;
        for (std::uint64_t seed : grid.seeds) {
            TrainConfig seeded = cfg;
            seeded.seed = seed;
            const TrainResult tr = train_on_bank(seeded, train_bank);
            row.aurocs.push_back(auroc(score_bank(tr.head, test_bank), test_bank.targets));
        }
        double sum = 0.0;
        for (double a : row.aurocs) sum += a;
        row.auroc = sum / static_cast<double>(row.aurocs.size());
        rows.push_back(std::move(row));
    }
    return rows;
}

inline std::string format_general(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", v);
    return buf;
}

inline void write_ablation_csv(const std::vector<AblationRow>& rows, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
    out << "approach,architecture,fusion,pooling,batch_size,learning_rate,dropout,auroc\n";
    for (const auto& r : rows) {
        out << r.approach << ',' << r.architecture << ',' << r.fusion << ',' << r.pooling << ',' << r.batch_size << ','
            << format_general(r.learning_rate) << ',' << format_general(r.dropout) << ',' << format_auroc(r.auroc) << '\n';
    }
}

}  // namespace tomofuse
