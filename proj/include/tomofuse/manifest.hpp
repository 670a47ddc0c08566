#pragma once

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "tomofuse/error.hpp"
#include "tomofuse/volume.hpp"

namespace tomofuse {

enum class Split { Train, Test };

inline std::string_view to_string(Split s) { return s == Split::Train ? "train" : "test"; }

struct ManifestEntry {
    std::string path;  // relative to the manifest's directory unless absolute
    Label label = Label::Negative;
    View view = View::CC;
    Split split = Split::Train;

    // Volume id is the file stem: "vol_0003.ten" -> "vol_0003".
    std::string id() const { return std::filesystem::path(path).stem().string(); }
};

struct DatasetManifest {
    std::vector<ManifestEntry> entries;
    std::filesystem::path root;  // directory relative paths resolve against

    std::filesystem::path resolve(const ManifestEntry& e) const {
        std::filesystem::path p(e.path);
        return p.is_absolute() ? p : root / p;
    }

    std::vector<ManifestEntry> select(Split split) const {
        std::vector<ManifestEntry> out;
        std::copy_if(entries.begin(), entries.end(), std::back_inserter(out),
                     [&](const ManifestEntry& e) { return e.split == split; });
        return out;
    }

    void validate() const {
        std::set<std::string> seen;
        for (const auto& e : entries) {
            if (!seen.insert(e.path).second) {
                throw Error(ErrorCode::InvalidSpec, "duplicate manifest path " + e.path);
            }
        }
    }
};

inline void write_manifest(const DatasetManifest& m, const std::filesystem::path& file) {
    m.validate();
    std::ofstream out(file, std::ios::trunc);
    if (!out) throw Error(ErrorCode::Io, "cannot write " + file.string());
    out << "path,label,view,split\n";
    for (const auto& e : m.entries) {
        out << e.path << ',' << to_string(e.label) << ',' << to_string(e.view) << ',' << to_string(e.split)
            << '\n';
    }
}

inline DatasetManifest read_manifest(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) throw Error(ErrorCode::Io, "cannot open manifest " + file.string());
    DatasetManifest m;
    m.root = file.parent_path();
    std::string line;
    if (!std::getline(in, line) || line != "path,label,view,split") {
        throw Error(ErrorCode::InvalidSpec, file.string() + ": expected header path,label,view,split");
    }
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::vector<std::string> cols;
        std::stringstream ss(line);
        for (std::string c; std::getline(ss, c, ',');) cols.push_back(c);
        const auto where = file.string() + ":" + std::to_string(lineno);
        if (cols.size() != 4) throw Error(ErrorCode::InvalidSpec, where + ": expected 4 columns");
        ManifestEntry e;
        e.path = cols[0];
        auto label = parse_label(cols[1]);
        auto view = parse_view(cols[2]);
        if (!label) throw Error(ErrorCode::InvalidSpec, where + ": unknown label '" + cols[1] + "'");
        if (!view) throw Error(ErrorCode::InvalidSpec, where + ": unknown view '" + cols[2] + "'");
        if (cols[3] == "train") {
            e.split = Split::Train;
        } else if (cols[3] == "test") {
            e.split = Split::Test;
        } else {
            throw Error(ErrorCode::InvalidSpec, where + ": unknown split '" + cols[3] + "'");
        }
        e.label = *label;
        e.view = *view;
        m.entries.push_back(std::move(e));
    }
    m.validate();
    return m;
}

// Loads and min-max normalizes one manifest entry.
inline Volume load_volume(const DatasetManifest& m, const ManifestEntry& e) {
    return Volume(normalize(load_raw_slices(m.resolve(e))), e.view, e.label, e.id());
}

}  // namespace tomofuse
