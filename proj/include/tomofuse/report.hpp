#pragma once

// Evaluation reports and their file forms: ROC CSV, per-volume scores,
// training history and an SVG overlay of ROC curves.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "tomofuse/error.hpp"
#include "tomofuse/kv.hpp"
#include "tomofuse/learner/head.hpp"
#include "tomofuse/learner/pipeline.hpp"
#include "tomofuse/learner/train.hpp"
#include "tomofuse/roc.hpp"

namespace tomofuse {

struct EvalReport {
    std::vector<std::string> ids;
    std::vector<double> scores;
    std::vector<int> labels;
    std::vector<RocPoint> roc_points;
    double auroc = 0.0;
    KeyValues config;
};

inline EvalReport evaluate(const ClassifierHead& head, const FeatureBank& bank, KeyValues config = {}) {
    EvalReport r;
    r.ids = bank.ids;
    r.scores = score_bank(head, bank);
    r.labels = bank.targets;
    r.roc_points = roc_curve(r.scores, r.labels);
    r.auroc = auroc(r.scores, r.labels);
    r.config = std::move(config);
    return r;
}

// %.9g keeps float-derived values exact and stays locale-free.
inline std::string format_number(double v) {
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.9g", v);
    return buf;
}

inline std::string format_auroc(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3f", v);
    return buf;
}

namespace detail {
inline std::ofstream open_out(const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
    return out;
}
}  // namespace detail

inline void write_roc_csv(const std::vector<RocPoint>& pts, const std::filesystem::path& path) {
    auto out = detail::open_out(path);
    out << "threshold,fpr,tpr\n";
    for (const auto& p : pts) out << format_double(p.threshold) << ',' << format_double(p.fpr) << ',' << format_double(p.tpr) << '\n';
}

inline std::vector<RocPoint> read_roc_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
    std::string line;
    if (!std::getline(in, line) || line != "threshold,fpr,tpr") {
        throw Error(ErrorCode::InvalidConfig, path.string() + ": expected header threshold,fpr,tpr");
    }
    std::vector<RocPoint> pts;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto cols = split_list(line);
        if (cols.size() != 3) throw Error(ErrorCode::InvalidConfig, path.string() + ": bad row '" + line + "'");
        RocPoint p{};
        p.threshold = cols[0] == "inf" ? std::numeric_limits<double>::infinity() : parse_double(cols[0]).value_or(NAN);
        p.fpr = parse_double(cols[1]).value_or(NAN);
        p.tpr = parse_double(cols[2]).value_or(NAN);
        if (std::isnan(p.threshold) || std::isnan(p.fpr) || std::isnan(p.tpr)) {
            throw Error(ErrorCode::InvalidConfig, path.string() + ": bad row '" + line + "'");
        }
        pts.push_back(p);
    }
    return pts;
}

inline void write_scores_csv(const EvalReport& r, const std::filesystem::path& path) {
    auto out = detail::open_out(path);
    out << "id,label,score\n";
    for (std::size_t i = 0; i < r.scores.size(); ++i) {
        out << r.ids[i] << ',' << r.labels[i] << ',' << format_number(r.scores[i]) << '\n';
    }
}

inline void write_history_csv(const std::vector<EpochRecord>& history, const std::filesystem::path& path) {
    auto out = detail::open_out(path);
    out << "epoch,train_loss,val_auroc\n";
    for (const auto& h : history) {
        out << h.epoch << ',' << format_number(h.train_loss) << ',' << format_number(h.val_auroc) << '\n';
    }
}

inline void write_report(const EvalReport& r, const std::filesystem::path& path) {
    auto out = detail::open_out(path);
    KeyValues kv = r.config;
    kv.set("eval.auroc", format_number(r.auroc));
    kv.set("eval.n_volumes", std::to_string(r.scores.size()));
    out << kv.to_text();
}

struct RocSeries {
    std::string label;
    std::vector<RocPoint> points;
};

// ROC curves on the unit square with a chance diagonal and a legend.
inline std::string roc_svg(const std::vector<RocSeries>& series, const std::string& title = "ROC") {
    static const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"};
    constexpr double size = 400.0;
    constexpr double margin = 50.0;
    auto px = [&](double fpr) { return margin + fpr * size; };
    auto py = [&](double tpr) { return margin + (1.0 - tpr) * size; };
    std::ostringstream os;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << size + 2 * margin + 160 << "\" height=\""
       << size + 2 * margin << "\">\n";
    os << "<title>" << title << "</title>\n";
    os << "<rect x=\"" << margin << "\" y=\"" << margin << "\" width=\"" << size << "\" height=\"" << size
       << "\" fill=\"none\" stroke=\"black\"/>\n";
    os << "<line x1=\"" << px(0) << "\" y1=\"" << py(0) << "\" x2=\"" << px(1) << "\" y2=\"" << py(1)
       << "\" stroke=\"#bbbbbb\" stroke-dasharray=\"4 4\"/>\n";
    for (int i = 0; i <= 4; ++i) {
        const double v = i / 4.0;
        os << "<text x=\"" << px(v) << "\" y=\"" << margin + size + 18 << "\" font-size=\"11\" text-anchor=\"middle\">"
           << format_number(v) << "</text>\n";
        os << "<text x=\"" << margin - 8 << "\" y=\"" << py(v) + 4 << "\" font-size=\"11\" text-anchor=\"end\">"
           << format_number(v) << "</text>\n";
    }
    os << "<text x=\"" << px(0.5) << "\" y=\"" << margin + size + 38
       << "\" font-size=\"13\" text-anchor=\"middle\">False positive rate</text>\n";
    os << "<text x=\"" << 14 << "\" y=\"" << py(0.5) << "\" font-size=\"13\" text-anchor=\"middle\" transform=\"rotate(-90 14 "
       << py(0.5) << ")\">True positive rate</text>\n";
    for (std::size_t s = 0; s < series.size(); ++s) {
        const char* color = palette[s % 8];
        os << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\" points=\"";
        for (std::size_t i = 0; i < series[s].points.size(); ++i) {
            if (i) os << ' ';
            os << format_number(px(series[s].points[i].fpr)) << ',' << format_number(py(series[s].points[i].tpr));
        }
        os << "\"><title>" << series[s].label << "</title></polyline>\n";
        const double ly = margin + 20.0 * static_cast<double>(s) + 10;
        os << "<line x1=\"" << margin + size + 15 << "\" y1=\"" << ly << "\" x2=\"" << margin + size + 35 << "\" y2=\"" << ly
           << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
        os << "<text x=\"" << margin + size + 40 << "\" y=\"" << ly + 4 << "\" font-size=\"12\">" << series[s].label
           << "</text>\n";
    }
    os << "</svg>\n";
    return os.str();
}

}  // namespace tomofuse
