#pragma once

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "tomofuse/error.hpp"
#include "tomofuse/tensor.hpp"
#include "tomofuse/tensor_io.hpp"

namespace tomofuse {

enum class View { CC, MLO };
enum class Label { Negative, Benign, Malignant };

inline std::string_view to_string(View v) { return v == View::CC ? "CC" : "MLO"; }

inline std::string_view to_string(Label l) {
    switch (l) {
        case Label::Negative: return "negative";
        case Label::Benign: return "benign";
        case Label::Malignant: return "malignant";
    }
    return "negative";
}

inline std::optional<View> parse_view(std::string_view s) {
    if (s == "CC" || s == "cc") return View::CC;
    if (s == "MLO" || s == "mlo") return View::MLO;
    return std::nullopt;
}

inline std::optional<Label> parse_label(std::string_view s) {
    if (s == "negative") return Label::Negative;
    if (s == "benign") return Label::Benign;
    if (s == "malignant") return Label::Malignant;
    return std::nullopt;
}

// Binary task target: only malignant counts as positive.
inline int binary_target(Label l) { return l == Label::Malignant ? 1 : 0; }

// Ordered stack of T equally sized slices, stored as one T x H x W tensor.
struct Volume {
    Tensor slices;
    View view = View::CC;
    Label label = Label::Negative;
    std::string id;

    Volume() = default;
    Volume(Tensor s, View v, Label l, std::string volume_id)
        : slices(std::move(s)), view(v), label(l), id(std::move(volume_id)) {
        if (slices.rank() != 3 || slices.dim(0) < 1) {
            throw Error(ErrorCode::InvalidDepth, "volume " + id + " must be T x H x W with T >= 1, got " +
                                                     shape_string(slices.shape()));
        }
    }

    std::size_t depth() const { return slices.dim(0); }
    std::size_t height() const { return slices.dim(1); }
    std::size_t width() const { return slices.dim(2); }

    Tensor slice(std::size_t t) const {
        auto s = slices.slab(t);
        return Tensor({height(), width()}, std::vector<float>(s.begin(), s.end()));
    }
};

// Affine map of the whole tensor onto [0, 1].
inline Tensor normalize(const Tensor& raw) {
    if (raw.empty()) throw Error(ErrorCode::ConstantVolume, "empty tensor");
    if (!raw.all_finite()) throw Error(ErrorCode::InvalidTensor, "non-finite intensities");
    const auto [lo_it, hi_it] = std::minmax_element(raw.data().begin(), raw.data().end());
    const double lo = *lo_it;
    const double hi = *hi_it;
    if (!(hi > lo)) throw Error(ErrorCode::ConstantVolume, "max equals min");
    const double scale = 1.0 / (hi - lo);
    Tensor out(raw.shape());
    for (std::size_t i = 0; i < raw.size(); ++i) {
        out[i] = static_cast<float>((raw[i] - lo) * scale);
    }
    return out;
}

inline Volume normalized(Volume v) {
    v.slices = normalize(v.slices);
    return v;
}

// Reads a binary PGM (P5, 8- or 16-bit) as an H x W tensor of raw gray levels.
inline Tensor read_pgm(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
    std::string magic;
    in >> magic;
    if (magic != "P5") throw Error(ErrorCode::BadMagic, path.string() + " is not a binary PGM");
    auto next_int = [&] {
        in >> std::ws;
        while (in.peek() == '#') {
            std::string comment;
            std::getline(in, comment);
            in >> std::ws;
        }
        long v = -1;
        in >> v;
        if (!in || v <= 0) throw Error(ErrorCode::TruncatedFile, "bad PGM header in " + path.string());
        return static_cast<std::size_t>(v);
    };
    const std::size_t w = next_int();
    const std::size_t h = next_int();
    const std::size_t maxval = next_int();
    in.get();
    const std::size_t bytes_per = maxval > 255 ? 2 : 1;
    std::vector<unsigned char> buf(w * h * bytes_per);
    in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
    if (static_cast<std::size_t>(in.gcount()) != buf.size()) {
        throw Error(ErrorCode::TruncatedFile, path.string() + " pixel data cut short");
    }
    Tensor t({h, w});
    for (std::size_t i = 0; i < w * h; ++i) {
        t[i] = bytes_per == 1 ? static_cast<float>(buf[i])
                              : static_cast<float>((buf[2 * i] << 8) | buf[2 * i + 1]);
    }
    return t;
}

// Loads raw intensities from either a T x H x W .ten file or a directory of
// per-slice PGM files taken in lexicographic order.
inline Tensor load_raw_slices(const std::filesystem::path& path) {
    namespace fs = std::filesystem;
    if (!fs::is_directory(path)) {
        Tensor t = read_tensor(path);
        if (t.rank() != 3) {
            throw Error(ErrorCode::ShapeMismatch, path.string() + " is not T x H x W: " + shape_string(t.shape()));
        }
        return t;
    }
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(path)) {
        if (e.is_regular_file() && e.path().extension() == ".pgm") files.push_back(e.path());
    }
    std::sort(files.begin(), files.end());
    if (files.empty()) throw Error(ErrorCode::InvalidDepth, path.string() + " holds no .pgm slices");
    std::vector<Tensor> slices;
    slices.reserve(files.size());
    for (const auto& f : files) slices.push_back(read_pgm(f));
    return stack(slices);
}

}  // namespace tomofuse
