#pragma once

// Per-slice 2D feature extraction and depth-wise pooling into one fixed-size
// feature map (late fusion).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <iomanip>
#include <limits>
#include <memory>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "tomofuse/error.hpp"
#include "tomofuse/tensor.hpp"
#include "tomofuse/tensor_io.hpp"

namespace tomofuse {

class FeatureExtractor {
public:
    virtual ~FeatureExtractor() = default;
    virtual std::string name() const = 0;
    // C' x H' x W' produced for an H x W input.
    virtual Shape output_shape(std::size_t height, std::size_t width) const = 0;
    // Accepts H x W, 1 x H x W or 3 x H x W. Single-channel input is treated
    // as three identical channels.
    virtual Tensor extract(const Tensor& img) const = 0;
};

struct ToyExtractorConfig {
    std::string preset = "toy";
    std::size_t n_filters = 16;
    std::size_t kernel = 8;
    std::size_t stride = 8;
    std::size_t pool = 2;
};

// Named geometries. At 1024 x 1024 the three "-like" presets give the same
// feature-map shapes as AlexNet (256x31x31), ResNet50 (2048x4x4) and
// Xception (2048x32x32) feature trunks.
inline std::optional<ToyExtractorConfig> toy_preset(std::string_view name) {
    if (name == "toy") return ToyExtractorConfig{"toy", 16, 8, 8, 2};
    if (name == "alexnet-like") return ToyExtractorConfig{"alexnet-like", 256, 11, 4, 8};
    if (name == "resnet-like") return ToyExtractorConfig{"resnet-like", 2048, 32, 32, 8};
    if (name == "xception-like") return ToyExtractorConfig{"xception-like", 2048, 32, 32, 1};
    return std::nullopt;
}

// Frozen random-filter extractor: conv(k x k, stride s, no bias) -> ReLU ->
// non-overlapping p x p max pool.
//   conv size   = floor((H - k) / s) + 1      (needs H >= k)
//   output size = floor(conv size / p)        (needs conv size >= p)
class ToyExtractor final : public FeatureExtractor {
public:
    explicit ToyExtractor(std::uint64_t seed = 1, ToyExtractorConfig cfg = {}) : cfg_(std::move(cfg)), seed_(seed) {
        if (cfg_.n_filters == 0 || cfg_.kernel == 0 || cfg_.stride == 0 || cfg_.pool == 0) {
            throw Error(ErrorCode::InvalidConfig, "toy extractor dimensions must be positive");
        }
        const std::size_t k2 = cfg_.kernel * cfg_.kernel;
        weights_.resize(cfg_.n_filters * 3 * k2);
        gray_weights_.assign(cfg_.n_filters * k2, 0.0f);
        std::mt19937_64 rng(seed);
        std::normal_distribution<double> gauss(0.0, 1.0 / std::sqrt(3.0 * static_cast<double>(k2)));
        for (float& w : weights_) w = static_cast<float>(gauss(rng));
        for (std::size_t f = 0; f < cfg_.n_filters; ++f) {
            for (std::size_t c = 0; c < 3; ++c) {
                for (std::size_t i = 0; i < k2; ++i) gray_weights_[f * k2 + i] += weights_[(f * 3 + c) * k2 + i];
            }
        }
    }

    std::string name() const override { return cfg_.preset; }
    const ToyExtractorConfig& config() const { return cfg_; }
    std::uint64_t seed() const { return seed_; }

    Shape output_shape(std::size_t height, std::size_t width) const override {
        return {cfg_.n_filters, pooled_size(height), pooled_size(width)};
    }

    Tensor extract(const Tensor& img) const override {
        std::size_t channels = 1;
        std::size_t h = 0;
        std::size_t w = 0;
        if (img.rank() == 2) {
            h = img.dim(0);
            w = img.dim(1);
        } else if (img.rank() == 3 && (img.dim(0) == 1 || img.dim(0) == 3)) {
            channels = img.dim(0);
            h = img.dim(1);
            w = img.dim(2);
        } else {
            throw Error(ErrorCode::ShapeMismatch, "extractor input must be HxW, 1xHxW or 3xHxW, got " +
                                                      shape_string(img.shape()));
        }
        if (!img.all_finite()) throw Error(ErrorCode::InvalidTensor, "non-finite extractor input");
        const Shape out_shape = output_shape(h, w);
        const std::size_t k = cfg_.kernel;
        const std::size_t s = cfg_.stride;
        const std::size_t p = cfg_.pool;
        const std::size_t ch = (h - k) / s + 1;
        const std::size_t cw = (w - k) / s + 1;
        const std::size_t oh = out_shape[1];
        const std::size_t ow = out_shape[2];
        const std::vector<float>& kernels = channels == 1 ? gray_weights_ : weights_;
        const std::size_t plane = h * w;

        Tensor out(out_shape);
        std::vector<float> conv(ch * cw);
        for (std::size_t f = 0; f < cfg_.n_filters; ++f) {
            std::fill(conv.begin(), conv.end(), 0.0f);
            for (std::size_t c = 0; c < channels; ++c) {
                const float* src = img.data().data() + c * plane;
                const float* ker = kernels.data() + (f * channels + c) * k * k;
                for (std::size_t oy = 0; oy < ch; ++oy) {
                    float* row = conv.data() + oy * cw;
                    for (std::size_t ky = 0; ky < k; ++ky) {
                        const float* in_row = src + (oy * s + ky) * w;
                        const float* k_row = ker + ky * k;
                        for (std::size_t ox = 0; ox < cw; ++ox) {
                            const float* px = in_row + ox * s;
                            float acc = 0.0f;
                            for (std::size_t kx = 0; kx < k; ++kx) acc += k_row[kx] * px[kx];
                            row[ox] += acc;
                        }
                    }
                }
            }
            // ReLU folded into the pool: max(0, max(window)).
            for (std::size_t py = 0; py < oh; ++py) {
                for (std::size_t px = 0; px < ow; ++px) {
                    float best = 0.0f;
                    for (std::size_t dy = 0; dy < p; ++dy) {
                        for (std::size_t dx = 0; dx < p; ++dx) {
                            best = std::max(best, conv[(py * p + dy) * cw + px * p + dx]);
                        }
                    }
                    out.at(f, py, px) = best;
                }
            }
        }
        return out;
    }

private:
    std::size_t pooled_size(std::size_t n) const {
        if (n < cfg_.kernel) {
            throw Error(ErrorCode::ShapeUnsupported, "input size " + std::to_string(n) + " below kernel " +
                                                         std::to_string(cfg_.kernel));
        }
        const std::size_t conv = (n - cfg_.kernel) / cfg_.stride + 1;
        if (conv < cfg_.pool) {
            throw Error(ErrorCode::ShapeUnsupported, "conv output " + std::to_string(conv) + " below pool " +
                                                         std::to_string(cfg_.pool));
        }
        return conv / cfg_.pool;
    }

    ToyExtractorConfig cfg_;
    std::uint64_t seed_;
    std::vector<float> weights_;       // C' x 3 x k x k
    std::vector<float> gray_weights_;  // C' x k x k, channel sums of weights_
};

// T x C' x H' x W' maps, one row per input slice or triplet.
struct FeatureStack {
    Tensor maps;
    std::string source_volume_id;

    std::size_t depth() const { return maps.dim(0); }
    Shape map_shape() const { return Shape(maps.shape().begin() + 1, maps.shape().end()); }
};

inline std::size_t spatial_height(const Tensor& img) { return img.rank() == 2 ? img.dim(0) : img.dim(1); }
inline std::size_t spatial_width(const Tensor& img) { return img.rank() == 2 ? img.dim(1) : img.dim(2); }

inline FeatureStack extract_stack(const FeatureExtractor& e, std::span<const Tensor> inputs,
                                  std::string volume_id = {}) {
    if (inputs.empty()) throw Error(ErrorCode::InvalidDepth, "extract_stack needs at least one input");
    const Shape& first = inputs.front().shape();
    for (const Tensor& img : inputs) {
        if (img.shape() != first) {
            throw Error(ErrorCode::ShapeMismatch, "mixed input shapes " + shape_string(first) + " and " +
                                                      shape_string(img.shape()));
        }
    }
    std::vector<Tensor> maps;
    maps.reserve(inputs.size());
    for (const Tensor& img : inputs) maps.push_back(e.extract(img));
    return {stack(maps), std::move(volume_id)};
}

enum class PoolMethod { Min, Avg, Max };

inline std::string_view to_string(PoolMethod m) {
    switch (m) {
        case PoolMethod::Min: return "min";
        case PoolMethod::Avg: return "avg";
        case PoolMethod::Max: return "max";
    }
    return "max";
}

inline std::optional<PoolMethod> parse_pool_method(std::string_view s) {
    if (s == "min") return PoolMethod::Min;
    if (s == "avg") return PoolMethod::Avg;
    if (s == "max") return PoolMethod::Max;
    return std::nullopt;
}

// Element-wise reduction over the slice axis; output shape is C' x H' x W'
// for every T.
inline Tensor pool_depth(const FeatureStack& fs, PoolMethod method) {
    const std::size_t depth = fs.depth();
    Tensor out(fs.map_shape());
    const std::size_t n = out.size();
    if (method == PoolMethod::Avg) {
        std::vector<double> acc(n, 0.0);
        for (std::size_t t = 0; t < depth; ++t) {
            const auto row = fs.maps.slab(t);
            for (std::size_t i = 0; i < n; ++i) acc[i] += row[i];
        }
        for (std::size_t i = 0; i < n; ++i) out[i] = static_cast<float>(acc[i] / static_cast<double>(depth));
        return out;
    }
    const auto first = fs.maps.slab(0);
    std::copy(first.begin(), first.end(), out.data().begin());
    for (std::size_t t = 1; t < depth; ++t) {
        const auto row = fs.maps.slab(t);
        if (method == PoolMethod::Max) {
            for (std::size_t i = 0; i < n; ++i) out[i] = std::max(out[i], row[i]);
        } else {
            for (std::size_t i = 0; i < n; ++i) out[i] = std::min(out[i], row[i]);
        }
    }
    return out;
}

// Precomputed per-slice features laid out as
//   <dir>/<volume_id>/<slice_index:04d>.ten   (rank 3, C' x H' x W')
class ExternalFeatures {
public:
    explicit ExternalFeatures(std::filesystem::path dir) : dir_(std::move(dir)) {}

    const std::filesystem::path& directory() const { return dir_; }

    std::filesystem::path slice_path(const std::string& volume_id, std::size_t slice_index) const {
        std::ostringstream name;
        name << std::setw(4) << std::setfill('0') << slice_index << ".ten";
        return dir_ / volume_id / name.str();
    }

    Tensor load(const std::string& volume_id, std::size_t slice_index) const {
        Tensor t = read_tensor(slice_path(volume_id, slice_index));
        if (t.rank() != 3) {
            throw Error(ErrorCode::ShapeMismatch, slice_path(volume_id, slice_index).string() + " is not rank 3");
        }
        return t;
    }

    FeatureStack load_stack(const std::string& volume_id, std::size_t depth) const {
        std::vector<Tensor> maps;
        maps.reserve(depth);
        for (std::size_t t = 0; t < depth; ++t) maps.push_back(load(volume_id, t));
        return {stack(maps), volume_id};
    }

    void store(const FeatureStack& fs) const {
        std::filesystem::create_directories(dir_ / fs.source_volume_id);
        for (std::size_t t = 0; t < fs.depth(); ++t) {
            auto row = fs.maps.slab(t);
            write_tensor(Tensor(fs.map_shape(), std::vector<float>(row.begin(), row.end())),
                         slice_path(fs.source_volume_id, t));
        }
    }

private:
    std::filesystem::path dir_;
};

}  // namespace tomofuse
