#pragma once

// The eight flip/rotation augmentations (dihedral group of the square).
// A transform first mirrors columns when `flip` is set, then rotates
// counter-clockwise by 90 * quarter_turns degrees. Pixels are permuted,
// never interpolated.

#include <array>
#include <cstdint>
#include <string>

#include "tomofuse/error.hpp"
#include "tomofuse/tensor.hpp"

namespace tomofuse {

struct Augmentation {
    bool flip = false;
    std::uint8_t quarter_turns = 0;  // 0..3 -> 0, 90, 180, 270 degrees

    int degrees() const { return 90 * quarter_turns; }

    Augmentation inverse() const {
        // A mirrored transform is its own inverse; a pure rotation inverts by turning back.
        if (flip) return *this;
        return {false, static_cast<std::uint8_t>((4 - quarter_turns) % 4)};
    }

    std::size_t index() const { return (flip ? 4u : 0u) + quarter_turns; }
    static Augmentation from_index(std::size_t i) {
        return {i >= 4, static_cast<std::uint8_t>(i % 4)};
    }

    friend bool operator==(const Augmentation&, const Augmentation&) = default;
};

inline std::array<Augmentation, 8> all_augmentations() {
    std::array<Augmentation, 8> out{};
    for (std::size_t i = 0; i < 8; ++i) out[i] = Augmentation::from_index(i);
    return out;
}

// Applies `a` to an H x W image or to every channel of a C x H x W image.
inline Tensor augment(const Tensor& img, Augmentation a) {
    if (img.rank() != 2 && img.rank() != 3) {
        throw Error(ErrorCode::ShapeMismatch, "augment expects H x W or C x H x W, got " + shape_string(img.shape()));
    }
    const std::size_t channels = img.rank() == 3 ? img.dim(0) : 1;
    const std::size_t h = img.dim(img.rank() - 2);
    const std::size_t w = img.dim(img.rank() - 1);
    const unsigned turns = a.quarter_turns % 4;
    if (turns % 2 == 1 && h != w) {
        throw Error(ErrorCode::NonSquareRotation, "cannot rotate " + std::to_string(h) + "x" + std::to_string(w) +
                                                      " by " + std::to_string(a.degrees()) + " degrees");
    }
    Tensor out(img.shape());
    const std::size_t n = h * w;
    for (std::size_t c = 0; c < channels; ++c) {
        const float* src = img.data().data() + c * n;
        float* dst = out.data().data() + c * n;
        for (std::size_t i = 0; i < h; ++i) {
            for (std::size_t j = 0; j < w; ++j) {
                // Source pixel of output (i, j) under rotation, then under the flip.
                std::size_t si = i;
                std::size_t sj = j;
                switch (turns) {
                    case 1: si = j; sj = w - 1 - i; break;
                    case 2: si = h - 1 - i; sj = w - 1 - j; break;
                    case 3: si = h - 1 - j; sj = i; break;
                    default: break;
                }
                if (a.flip) sj = w - 1 - sj;
                dst[i * w + j] = src[si * w + sj];
            }
        }
    }
    return out;
}

}  // namespace tomofuse
