// tomofuse command-line entry point.
//
// Exit codes: 0 ok, 2 usage/config, 3 data, 4 training, 5 io.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "tomofuse/config.hpp"
#include "tomofuse/tomofuse.hpp"

namespace fs = std::filesystem;
using namespace tomofuse;

namespace {

enum Exit : int { Ok = 0, Usage = 2, Data = 3, Training = 4, Io = 5 };

// Options every subcommand understands; each maps onto one config key.
struct CommonFlags {
    std::string config;
    std::string out;
    std::string manifest;
    std::string checkpoint;
    std::string fusion;
    std::string pooling;
    std::string variant;
    std::string j;
    std::string seed;
    std::string epochs;
};

void add_common(CLI::App* cmd, CommonFlags& f) {
    cmd->allow_extras();
    cmd->add_option("--config", f.config, "key = value config file");
    cmd->add_option("--out", f.out, "output directory (run.out)");
    cmd->add_option("--manifest", f.manifest, "dataset manifest CSV (run.manifest)");
    cmd->add_option("--checkpoint", f.checkpoint, "checkpoint file (run.checkpoint)");
    cmd->add_option("--fusion", f.fusion, "late|early-average|early-dynamic|space-to-channel");
    cmd->add_option("--pooling", f.pooling, "min|avg|max");
    cmd->add_option("--variant", f.variant, "linear|harmonic rank pooling weights");
    cmd->add_option("--j", f.j, "space-to-channel slice offset");
    cmd->add_option("--seed", f.seed, "seed for this command");
    cmd->add_option("--epochs", f.epochs, "training epochs");
}

// Leftover "--section.key value" / "--section.key=value" pairs.
KeyValues parse_extras(const std::vector<std::string>& extras) {
    KeyValues kv;
    for (std::size_t i = 0; i < extras.size(); ++i) {
        const std::string& arg = extras[i];
        if (arg.rfind("--", 0) != 0 || arg.find('.') == std::string::npos) {
            throw Error(ErrorCode::InvalidConfig, "unexpected argument '" + arg + "'");
        }
        std::string key = arg.substr(2);
        std::string value;
        if (auto eq = key.find('='); eq != std::string::npos) {
            value = key.substr(eq + 1);
            key.resize(eq);
        } else {
            if (i + 1 >= extras.size()) throw Error(ErrorCode::InvalidConfig, "missing value for --" + key);
            value = extras[++i];
        }
        kv.set(key, value);
    }
    return kv;
}

RunConfig load_config(const CommonFlags& f, const std::vector<std::string>& extras, const char* seed_key) {
    KeyValues file;
    if (!f.config.empty()) file = RunConfig::read_file(f.config);
    KeyValues cli;
    if (!f.out.empty()) cli.set("run.out", f.out);
    if (!f.manifest.empty()) cli.set("run.manifest", f.manifest);
    if (!f.checkpoint.empty()) cli.set("run.checkpoint", f.checkpoint);
    if (!f.fusion.empty()) cli.set("fusion.strategy", f.fusion);
    if (!f.pooling.empty()) cli.set("fusion.pooling", f.pooling);
    if (!f.variant.empty()) cli.set("fusion.variant", f.variant);
    if (!f.j.empty()) cli.set("fusion.j", f.j);
    if (!f.seed.empty()) cli.set(seed_key, f.seed);
    if (!f.epochs.empty()) cli.set("train.epochs", f.epochs);
    const KeyValues extra = parse_extras(extras);
    for (const auto& [k, v] : extra.items()) cli.set(k, v);
    return RunConfig(file, cli);
}

fs::path require_path(const RunConfig& cfg, const char* key, const char* flag) {
    const std::string v = cfg.get(key);
    if (v.empty()) throw Error(ErrorCode::InvalidConfig, std::string("missing ") + flag + " (" + key + ")");
    return v;
}

int cmd_synth(const RunConfig& cfg) {
    const fs::path out = require_path(cfg, "run.out", "--out");
    const SynthSpec spec = cfg.synth_spec();
    const DatasetManifest m = synth_generate(spec, out);
    std::cout << "wrote " << m.entries.size() << " volumes to " << out.string() << "\n";
    if (spec.n_negative == 0 || spec.n_positive == 0) {
        std::cerr << "warning: MissingClass: dataset has " << spec.n_negative << " negative / " << spec.n_positive
                  << " positive volumes and cannot be used for training\n";
        return Data;
    }
    return Ok;
}

int cmd_featurize(const RunConfig& cfg) {
    const DatasetManifest m = read_manifest(require_path(cfg, "run.manifest", "--manifest"));
    fs::path dir = cfg.get("extractor.features_dir");
    if (dir.empty()) dir = require_path(cfg, "run.out", "--out or --extractor.features_dir");
    const TrainConfig tc = cfg.train_config();
    if (tc.extractor.kind != ExtractorKind::Toy) {
        throw Error(ErrorCode::InvalidConfig, "featurize computes features with the toy extractor");
    }
    const ToyExtractor extractor(tc.extractor.seed, *toy_preset(tc.extractor.preset));
    const ExternalFeatures store(dir);
    for (const auto& e : m.entries) {
        const Volume v = load_volume(m, e);
        std::vector<Tensor> slices;
        for (std::size_t t = 0; t < v.depth(); ++t) slices.push_back(v.slice(t));
        store.store(extract_stack(extractor, slices, v.id));
    }
    std::cout << "wrote features for " << m.entries.size() << " volumes to " << dir.string() << "\n";
    return Ok;
}

int cmd_train(const RunConfig& cfg) {
    const fs::path out = require_path(cfg, "run.out", "--out");
    const DatasetManifest m = read_manifest(require_path(cfg, "run.manifest", "--manifest"));
    const TrainConfig tc = cfg.train_config();
    TrainResult result;
    try {
        result = train(tc, m);
    } catch (const Error& e) {
        if (e.code() == ErrorCode::Io || e.code() == ErrorCode::InvalidConfig) throw;
        std::cerr << "training failed: " << e.what() << "\n";
        return Training;
    }
    fs::create_directories(out);
    write_checkpoint({to_key_values(tc), result.head}, out / "checkpoint.tfck");
    write_history_csv(result.history, out / "history.csv");
    const double final_val = result.history.empty() ? 0.5 : result.history.back().val_auroc;
    std::cout << "trained " << to_string(tc.fusion.strategy) << "/" << to_string(tc.fusion.pooling) << " for "
              << result.history.size() << " epochs (batch " << result.effective_batch << "), final val auROC "
              << format_auroc(final_val) << ", best epoch " << result.best_epoch << "\n";
    return Ok;
}

int cmd_eval(const RunConfig& cfg) {
    const fs::path out = require_path(cfg, "run.out", "--out");
    const Checkpoint ck = read_checkpoint(require_path(cfg, "run.checkpoint", "--checkpoint"));
    const DatasetManifest m = read_manifest(require_path(cfg, "run.manifest", "--manifest"));
    const TrainConfig tc = train_config_from(ck.config);
    const Split split = cfg.get("eval.split") == "train" ? Split::Train : Split::Test;
    const Pipeline pipeline(tc.fusion, tc.extractor);
    const FeatureBank bank = build_feature_bank(pipeline, m, m.select(split), 1);
    KeyValues snapshot = ck.config;
    snapshot.set("eval.split", std::string(to_string(split)));
    const EvalReport report = evaluate(ck.head, bank, snapshot);
    fs::create_directories(out);
    write_roc_csv(report.roc_points, out / "roc.csv");
    write_scores_csv(report, out / "scores.csv");
    write_report(report, out / "report.txt");
    std::cout << "auROC " << format_auroc(report.auroc) << " on " << report.scores.size() << " " << to_string(split)
              << " volumes\n";
    return Ok;
}

int cmd_ablate(const RunConfig& cfg) {
    const fs::path out = require_path(cfg, "run.out", "--out");
    const DatasetManifest m = read_manifest(require_path(cfg, "run.manifest", "--manifest"));
    std::vector<AblationRow> rows;
    try {
        rows = ablate(m, cfg.train_config(), cfg.ablation_grid());
    } catch (const Error& e) {
        if (e.code() == ErrorCode::Io || e.code() == ErrorCode::InvalidConfig) throw;
        std::cerr << "ablation failed: " << e.what() << "\n";
        return Training;
    }
    fs::create_directories(out);
    write_ablation_csv(rows, out / "ablation.csv");
    for (const auto& r : rows) std::cout << r.approach << " [" << r.architecture << "]: " << format_auroc(r.auroc) << "\n";
    return Ok;
}

int cmd_plot(const RunConfig& cfg, const std::vector<std::string>& inputs) {
    if (inputs.empty()) throw Error(ErrorCode::InvalidConfig, "plot needs at least one ROC CSV");
    const fs::path out = require_path(cfg, "run.out", "--out");
    const auto labels = split_list(cfg.get("plot.labels"));
    std::vector<RocSeries> series;
    for (std::size_t i = 0; i < inputs.size(); ++i) {
        const std::string label = i < labels.size() ? labels[i] : fs::path(inputs[i]).parent_path().filename().string();
        series.push_back({label.empty() ? fs::path(inputs[i]).stem().string() : label, read_roc_csv(inputs[i])});
    }
    if (out.has_parent_path()) fs::create_directories(out.parent_path());
    std::ofstream svg(out, std::ios::trunc);
    if (!svg) throw Error(ErrorCode::Io, "cannot write " + out.string());
    svg << roc_svg(series);
    std::cout << "wrote " << out.string() << " with " << series.size() << " curves\n";
    return Ok;
}

int exit_code_for(const Error& e, int fallback) {
    switch (e.code()) {
        case ErrorCode::InvalidConfig: return Usage;
        case ErrorCode::Io: return Io;
        default: return fallback;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"tomofuse: variable-depth slice-stack classification with 2D features"};
    app.require_subcommand(1);

    CommonFlags flags;
    std::vector<std::string> plot_inputs;
    CLI::App* synth = app.add_subcommand("synth", "generate a synthetic dataset");
    CLI::App* featurize = app.add_subcommand("featurize", "precompute per-slice .ten features");
    CLI::App* train_cmd = app.add_subcommand("train", "train a classifier head");
    CLI::App* eval = app.add_subcommand("eval", "evaluate a checkpoint");
    CLI::App* ablate_cmd = app.add_subcommand("ablate", "train/evaluate a grid of settings");
    CLI::App* plot = app.add_subcommand("plot", "overlay ROC CSVs as SVG");
    for (CLI::App* cmd : {synth, featurize, train_cmd, eval, ablate_cmd, plot}) add_common(cmd, flags);
    plot->add_option("inputs", plot_inputs, "ROC CSV files");
    std::string labels;
    plot->add_option("--labels", labels, "comma-separated series labels");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? Ok : Usage;
    }

    CLI::App* cmd = app.get_subcommands().front();
    const std::string name = cmd->get_name();
    const int fallback = name == "train" || name == "ablate" ? Training : name == "eval" || name == "plot" ? Io : Data;
    try {
        const char* seed_key = name == "synth" ? "synth.seed" : name == "featurize" ? "extractor.seed" : "train.seed";
        std::vector<std::string> extras = cmd->remaining();
        if (!labels.empty()) extras.insert(extras.end(), {"--plot.labels", labels});
        const RunConfig cfg = load_config(flags, extras, seed_key);
        if (name == "synth") return cmd_synth(cfg);
        if (name == "featurize") return cmd_featurize(cfg);
        if (name == "train") return cmd_train(cfg);
        if (name == "eval") return cmd_eval(cfg);
        if (name == "ablate") return cmd_ablate(cfg);
        return cmd_plot(cfg, plot_inputs);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_code_for(e, fallback);
    } catch (const std::filesystem::filesystem_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return Io;
    }
}
