#pragma once

// Run configuration: a flat schema of dotted keys merged from documented
// defaults, the TOMOFUSE_SEED environment variable (seeds only), a config
// file and command-line overrides, in increasing precedence.

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "tomofuse/ablate.hpp"
#include "tomofuse/error.hpp"
#include "tomofuse/featpool.hpp"
#include "tomofuse/fusion.hpp"
#include "tomofuse/kv.hpp"
#include "tomofuse/learner/pipeline.hpp"
#include "tomofuse/learner/train.hpp"
#include "tomofuse/synth.hpp"

namespace tomofuse {

enum class ValueKind { UInt, Double, Bool, String, Path, Choice, UIntList, ChoiceList, StringList };

struct KeySpec {
    std::string key;
    std::string default_value;
    ValueKind kind;
    std::vector<std::string> choices = {};
};

inline const std::vector<KeySpec>& config_schema() {
    static const std::vector<std::string> strategies{"late", "early-average", "early-dynamic", "space-to-channel"};
    static const std::vector<std::string> poolings{"min", "avg", "max"};
    static const std::vector<KeySpec> schema{
        {"synth.n_negative", "300", ValueKind::UInt},
        {"synth.n_positive", "100", ValueKind::UInt},
        {"synth.depth_min", "8", ValueKind::UInt},
        {"synth.depth_max", "16", ValueKind::UInt},
        {"synth.height", "128", ValueKind::UInt},
        {"synth.width", "128", ValueKind::UInt},
        {"synth.lesion_radius_min", "3", ValueKind::Double},
        {"synth.lesion_radius_max", "6", ValueKind::Double},
        {"synth.lesion_contrast", "0.5", ValueKind::Double},
        {"synth.lesion_span", "3", ValueKind::UInt},
        {"synth.noise_sigma", "0.05", ValueKind::Double},
        {"synth.background_level", "0.2", ValueKind::Double},
        {"synth.anatomy_amplitude", "0.1", ValueKind::Double},
        {"synth.texture_amplitude", "0.1", ValueKind::Double},
        {"synth.test_fraction", "0.2", ValueKind::Double},
        {"synth.seed", "0", ValueKind::UInt},
        {"extractor.kind", "toy", ValueKind::Choice, {"toy", "external"}},
        {"extractor.preset", "toy", ValueKind::Choice, {"toy", "alexnet-like", "resnet-like", "xception-like"}},
        {"extractor.seed", "1", ValueKind::UInt},
        {"extractor.features_dir", "", ValueKind::Path},
        {"fusion.strategy", "late", ValueKind::Choice, strategies},
        {"fusion.pooling", "max", ValueKind::Choice, poolings},
        {"fusion.variant", "harmonic", ValueKind::Choice, {"linear", "harmonic"}},
        {"fusion.j", "0", ValueKind::UInt},
        {"train.batch_size", "256", ValueKind::UInt},
        {"train.lr", "0.0001", ValueKind::Double},
        {"train.dropout", "0.5", ValueKind::Double},
        {"train.weight_decay", "0.0001", ValueKind::Double},
        {"train.epochs", "20", ValueKind::UInt},
        {"train.seed", "0", ValueKind::UInt},
        {"train.hidden", "256", ValueKind::UInt},
        {"train.conv_filters", "64", ValueKind::UInt},
        {"train.conv_kernel", "3", ValueKind::UInt},
        {"train.conv_stride", "1", ValueKind::UInt},
        {"train.val_fraction", "0.2", ValueKind::Double},
        {"train.augment", "true", ValueKind::Bool},
        {"eval.split", "test", ValueKind::Choice, {"train", "test"}},
        {"ablate.strategies", "late", ValueKind::ChoiceList, strategies},
        {"ablate.poolings", "min,avg,max", ValueKind::ChoiceList, poolings},
        {"ablate.presets", "toy", ValueKind::ChoiceList, {"toy", "alexnet-like", "resnet-like", "xception-like"}},
        {"ablate.js", "1", ValueKind::UIntList},
        {"ablate.seeds", "1,2,3", ValueKind::UIntList},
        {"run.out", "", ValueKind::Path},
        {"run.manifest", "", ValueKind::Path},
        {"run.checkpoint", "", ValueKind::Path},
        {"plot.labels", "", ValueKind::StringList},
    };
    return schema;
}

inline const KeySpec* find_key(std::string_view key) {
    const auto& schema = config_schema();
    auto it = std::find_if(schema.begin(), schema.end(), [&](const KeySpec& k) { return k.key == key; });
    return it == schema.end() ? nullptr : &*it;
}

inline void validate_value(const KeySpec& spec, const std::string& value) {
    auto fail = [&] { throw Error(ErrorCode::InvalidConfig, "invalid value '" + value + "' for " + spec.key); };
    auto in_choices = [&](const std::string& v) {
        return std::find(spec.choices.begin(), spec.choices.end(), v) != spec.choices.end();
    };
    switch (spec.kind) {
        case ValueKind::UInt:
            if (!parse_uint(value)) fail();
            break;
        case ValueKind::Double: {
            auto d = parse_double(value);
            if (!d || !std::isfinite(*d)) fail();
            break;
        }
        case ValueKind::Bool:
            if (!parse_bool(value)) fail();
            break;
        case ValueKind::Choice:
            if (!in_choices(value)) fail();
            break;
        case ValueKind::UIntList:
            for (const auto& part : split_list(value)) {
                if (!parse_uint(part)) fail();
            }
            break;
        case ValueKind::ChoiceList:
            for (const auto& part : split_list(value)) {
                if (!in_choices(part)) fail();
            }
            break;
        case ValueKind::String:
        case ValueKind::Path:
        case ValueKind::StringList:
            break;
    }
}

class RunConfig {
public:
    // Keys set by the caller, lowest to highest precedence.
    RunConfig(const KeyValues& file, const KeyValues& overrides, const char* env_seed = std::getenv("TOMOFUSE_SEED")) {
        for (const auto& k : config_schema()) values_.set(k.key, k.default_value);
        if (env_seed != nullptr && *env_seed != '\0') {
            if (!parse_uint(env_seed)) {
                throw Error(ErrorCode::InvalidConfig, std::string("TOMOFUSE_SEED is not an integer: ") + env_seed);
            }
            values_.set("synth.seed", env_seed);
            values_.set("train.seed", env_seed);
        }
        apply(file, "config file");
        apply(overrides, "command line");
    }

    static KeyValues read_file(const std::filesystem::path& path) {
        std::ifstream in(path);
        if (!in) throw Error(ErrorCode::Io, "cannot open config " + path.string());
        std::stringstream ss;
        ss << in.rdbuf();
        return KeyValues::parse(ss.str(), path.string());
    }

    std::string get(std::string_view key) const { return values_.require(key); }
    std::uint64_t get_uint(std::string_view key) const { return *parse_uint(get(key)); }
    double get_double(std::string_view key) const { return *parse_double(get(key)); }
    const KeyValues& values() const { return values_; }

    SynthSpec synth_spec() const {
        SynthSpec s;
        s.n_negative = get_uint("synth.n_negative");
        s.n_positive = get_uint("synth.n_positive");
        s.depth_min = get_uint("synth.depth_min");
        s.depth_max = get_uint("synth.depth_max");
        s.height = get_uint("synth.height");
        s.width = get_uint("synth.width");
        s.lesion.radius_min = get_double("synth.lesion_radius_min");
        s.lesion.radius_max = get_double("synth.lesion_radius_max");
        s.lesion.contrast = get_double("synth.lesion_contrast");
        s.lesion.span = get_uint("synth.lesion_span");
        s.noise_sigma = get_double("synth.noise_sigma");
        s.background_level = get_double("synth.background_level");
        s.anatomy_amplitude = get_double("synth.anatomy_amplitude");
        s.texture_amplitude = get_double("synth.texture_amplitude");
        s.test_fraction = get_double("synth.test_fraction");
        s.seed = get_uint("synth.seed");
        return s;
    }

    TrainConfig train_config() const { return train_config_from(values_); }

    AblationGrid ablation_grid() const {
        AblationGrid g;
        g.strategies.clear();
        for (const auto& s : split_list(get("ablate.strategies"))) g.strategies.push_back(*parse_fusion_strategy(s));
        g.poolings.clear();
        for (const auto& s : split_list(get("ablate.poolings"))) g.poolings.push_back(*parse_pool_method(s));
        g.presets = split_list(get("ablate.presets"));
        g.js.clear();
        for (const auto& s : split_list(get("ablate.js"))) g.js.push_back(*parse_uint(s));
        g.seeds.clear();
        for (const auto& s : split_list(get("ablate.seeds"))) g.seeds.push_back(*parse_uint(s));
        return g;
    }

private:
    void apply(const KeyValues& kv, const std::string& origin) {
        for (const auto& [key, value] : kv.items()) {
            const KeySpec* spec = find_key(key);
            if (spec == nullptr) throw Error(ErrorCode::InvalidConfig, "unknown key '" + key + "' in " + origin);
            validate_value(*spec, value);
            values_.set(key, value);
        }
    }

    KeyValues values_;
};

}  // namespace tomofuse
