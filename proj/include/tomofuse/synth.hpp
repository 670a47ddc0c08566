#pragma once

// Synthetic slice-stack generator standing in for clinical tomosynthesis data.
//
// Every volume is  base + anatomy + tissue texture + lesion + N(0, noise_sigma)
//   anatomy  a few broad bumps, identical on every slice
//   texture  many lesion-sized bumps, each fading in and out over a random
//            number of slices (some persist through the whole stack)
//   lesion   positives only: one isotropic Gaussian bump of peak `contrast`
//            present on exactly `span` consecutive slices
// Raw (unnormalized) intensities are written; loaders normalize per volume.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "tomofuse/error.hpp"
#include "tomofuse/manifest.hpp"
#include "tomofuse/tensor.hpp"
#include "tomofuse/tensor_io.hpp"
#include "tomofuse/volume.hpp"

namespace tomofuse {

struct LesionSpec {
    double radius_min = 3.0;  // pixels; the bump's Gaussian sigma is radius / 2
    double radius_max = 6.0;
    double contrast = 0.5;    // peak height in raw intensity units
    std::size_t span = 3;     // consecutive slices carrying the lesion
};

struct SynthSpec {
    std::size_t n_negative = 300;
    std::size_t n_positive = 100;
    std::size_t depth_min = 8;
    std::size_t depth_max = 16;
    std::size_t height = 128;
    std::size_t width = 128;
    LesionSpec lesion;
    double noise_sigma = 0.05;
    double background_level = 0.2;
    double anatomy_amplitude = 0.1;
    double texture_amplitude = 0.1;
    double test_fraction = 0.2;
    std::uint64_t seed = 0;

    void validate() const {
        auto fail = [](const std::string& why) { throw Error(ErrorCode::InvalidSpec, why); };
        if (n_negative + n_positive == 0) fail("no volumes requested");
        if (depth_min < 1 || depth_min > depth_max) fail("depth range must satisfy 1 <= min <= max");
        if (lesion.span < 1 || lesion.span > depth_min) fail("lesion span must satisfy 1 <= span <= depth_min");
        if (!(lesion.contrast > 0.0)) fail("lesion contrast must be positive");
        if (!(lesion.radius_min > 0.0) || lesion.radius_min > lesion.radius_max) {
            fail("lesion radius range must satisfy 0 < min <= max");
        }
        if (height < 2 * static_cast<std::size_t>(std::ceil(lesion.radius_max)) + 1 ||
            width < 2 * static_cast<std::size_t>(std::ceil(lesion.radius_max)) + 1) {
            fail("slice too small for the largest lesion");
        }
        if (noise_sigma < 0.0 || anatomy_amplitude < 0.0 || texture_amplitude < 0.0) {
            fail("noise and background amplitudes must be non-negative");
        }
        if (!(test_fraction >= 0.0 && test_fraction < 1.0)) fail("test_fraction must be in [0, 1)");
    }
};

struct LesionPlacement {
    double center_y = 0.0;
    double center_x = 0.0;
    double radius = 0.0;
    std::size_t first_slice = 0;
    std::size_t span = 0;

    bool covers(std::size_t t) const { return span > 0 && t >= first_slice && t < first_slice + span; }
};

struct SynthVolume {
    Tensor raw;  // T x H x W
    Label label = Label::Negative;
    View view = View::CC;
    std::string id;
    LesionPlacement lesion;  // span == 0 for negatives
};

namespace detail {

inline std::mt19937_64 substream(std::uint64_t seed, std::uint64_t index, std::uint64_t tag) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32),
                      static_cast<std::uint32_t>(tag)};
    return std::mt19937_64(seq);
}

// Adds amp * exp(-d^2 / 2 sigma^2) to an H x W plane, truncated at 4 sigma.
inline void add_bump(std::span<float> plane, std::size_t h, std::size_t w, double cy, double cx, double sigma,
                     double amp) {
    const double reach = 4.0 * sigma;
    const auto y0 = static_cast<std::size_t>(std::max(0.0, std::floor(cy - reach)));
    const auto y1 = static_cast<std::size_t>(std::min<double>(h - 1, std::ceil(cy + reach)));
    const auto x0 = static_cast<std::size_t>(std::max(0.0, std::floor(cx - reach)));
    const auto x1 = static_cast<std::size_t>(std::min<double>(w - 1, std::ceil(cx + reach)));
    const double inv = 1.0 / (2.0 * sigma * sigma);
    for (std::size_t y = y0; y <= y1; ++y) {
        for (std::size_t x = x0; x <= x1; ++x) {
            const double dy = static_cast<double>(y) - cy;
            const double dx = static_cast<double>(x) - cx;
            plane[y * w + x] += static_cast<float>(amp * std::exp(-(dy * dy + dx * dx) * inv));
        }
    }
}

inline std::string volume_id(std::size_t index) {
    std::ostringstream os;
    os << "vol_" << std::setw(4) << std::setfill('0') << index;
    return os.str();
}

}  // namespace detail

// Volume `index` of the dataset; indices below n_negative are negatives.
inline SynthVolume synth_volume(const SynthSpec& spec, std::size_t index) {
    spec.validate();
    auto rng = detail::substream(spec.seed, index, 0x5e17);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const auto uniform = [&](double lo, double hi) { return lo + (hi - lo) * unit(rng); };

    const std::size_t h = spec.height;
    const std::size_t w = spec.width;
    std::uniform_int_distribution<std::size_t> depth_dist(spec.depth_min, spec.depth_max);
    const std::size_t depth = depth_dist(rng);

    SynthVolume out;
    out.id = detail::volume_id(index);
    out.label = index < spec.n_negative ? Label::Negative : Label::Malignant;
    out.view = unit(rng) < 0.5 ? View::CC : View::MLO;
    out.raw = Tensor({depth, h, w}, static_cast<float>(spec.background_level));

    const double scale = static_cast<double>(std::min(h, w));
    std::vector<float> anatomy(h * w, 0.0f);
    for (int k = 0; k < 4; ++k) {
        detail::add_bump(anatomy, h, w, uniform(0, h), uniform(0, w), uniform(0.1, 0.25) * scale,
                         uniform(0.5, 1.0) * spec.anatomy_amplitude);
    }

    const auto n_texture = static_cast<std::size_t>(std::lround(static_cast<double>(h * w) / 400.0));
    struct Texture {
        double cy, cx, sigma, amp, depth_center, depth_sigma;
    };
    std::vector<Texture> textures;
    for (std::size_t k = 0; k < n_texture; ++k) {
        Texture tex{};
        tex.cy = uniform(0, h);
        tex.cx = uniform(0, w);
        tex.sigma = uniform(spec.lesion.radius_min, spec.lesion.radius_max) / 2.0;
        tex.amp = uniform(0.0, spec.texture_amplitude);
        tex.depth_center = uniform(0.0, static_cast<double>(depth));
        tex.depth_sigma = uniform(1.0, static_cast<double>(depth));
        textures.push_back(tex);
    }

    if (out.label == Label::Malignant) {
        LesionPlacement& les = out.lesion;
        les.radius = uniform(spec.lesion.radius_min, spec.lesion.radius_max);
        les.center_y = uniform(les.radius, h - les.radius);
        les.center_x = uniform(les.radius, w - les.radius);
        std::uniform_int_distribution<std::size_t> first(0, depth - spec.lesion.span);
        les.first_slice = first(rng);
        les.span = spec.lesion.span;
    }

    std::normal_distribution<double> noise(0.0, 1.0);
    for (std::size_t t = 0; t < depth; ++t) {
        auto s = out.raw.slab(t);
        for (std::size_t i = 0; i < s.size(); ++i) s[i] += anatomy[i];
        for (const auto& tex : textures) {
            const double dz = (static_cast<double>(t) - tex.depth_center) / tex.depth_sigma;
            detail::add_bump(s, h, w, tex.cy, tex.cx, tex.sigma, tex.amp * std::exp(-0.5 * dz * dz));
        }
        if (out.lesion.covers(t)) {
            detail::add_bump(s, h, w, out.lesion.center_y, out.lesion.center_x, out.lesion.radius / 2.0,
                             spec.lesion.contrast);
        }
        if (spec.noise_sigma > 0.0) {
            for (float& v : s) v += static_cast<float>(spec.noise_sigma * noise(rng));
        }
    }
    return out;
}

// Pixels within the lesion's core (distance <= sigma = radius / 2).
inline std::vector<bool> lesion_core_mask(const LesionPlacement& les, std::size_t h, std::size_t w) {
    std::vector<bool> mask(h * w, false);
    const double r = les.radius / 2.0;
    for (std::size_t y = 0; y < h; ++y) {
        for (std::size_t x = 0; x < w; ++x) {
            const double dy = static_cast<double>(y) - les.center_y;
            const double dx = static_cast<double>(x) - les.center_x;
            mask[y * w + x] = dy * dy + dx * dx <= r * r;
        }
    }
    return mask;
}

// Stratified, seeded train/test assignment over volume indices.
inline std::vector<Split> synth_splits(const SynthSpec& spec) {
    std::vector<Split> splits(spec.n_negative + spec.n_positive, Split::Train);
    auto rng = detail::substream(spec.seed, 0, 0x5917);
    auto assign = [&](std::size_t begin, std::size_t count) {
        std::vector<std::size_t> idx(count);
        std::iota(idx.begin(), idx.end(), begin);
        std::shuffle(idx.begin(), idx.end(), rng);
        const auto n_test = static_cast<std::size_t>(std::lround(spec.test_fraction * static_cast<double>(count)));
        for (std::size_t i = 0; i < n_test; ++i) splits[idx[i]] = Split::Test;
    };
    assign(0, spec.n_negative);
    assign(spec.n_negative, spec.n_positive);
    return splits;
}

// Writes <out>/volumes/vol_XXXX.ten, <out>/manifest.csv and <out>/lesions.csv.
inline DatasetManifest synth_generate(const SynthSpec& spec, const std::filesystem::path& out_dir) {
    spec.validate();
    namespace fs = std::filesystem;
    fs::create_directories(out_dir / "volumes");
    const auto splits = synth_splits(spec);

    DatasetManifest manifest;
    manifest.root = out_dir;
    std::ofstream lesions(out_dir / "lesions.csv", std::ios::trunc);
    if (!lesions) throw Error(ErrorCode::Io, "cannot write lesions.csv in " + out_dir.string());
    lesions << "id,center_y,center_x,radius,first_slice,span\n" << std::setprecision(9);

    for (std::size_t i = 0; i < splits.size(); ++i) {
        SynthVolume v = synth_volume(spec, i);
        const std::string rel = "volumes/" + v.id + ".ten";
        write_tensor(v.raw, out_dir / rel);
        manifest.entries.push_back({rel, v.label, v.view, splits[i]});
        if (v.lesion.span > 0) {
            lesions << v.id << ',' << v.lesion.center_y << ',' << v.lesion.center_x << ',' << v.lesion.radius << ','
                    << v.lesion.first_slice << ',' << v.lesion.span << '\n';
        }
    }
    write_manifest(manifest, out_dir / "manifest.csv");
    return manifest;
}

}  // namespace tomofuse
