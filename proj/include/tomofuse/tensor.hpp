#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "tomofuse/error.hpp"

namespace tomofuse {

using Shape = std::vector<std::size_t>;

inline std::string shape_string(const Shape& shape) {
    std::ostringstream os;
    os << '[';
    for (std::size_t i = 0; i < shape.size(); ++i) {
        if (i) os << ',';
        os << shape[i];
    }
    os << ']';
    return os.str();
}

inline std::size_t shape_volume(const Shape& shape) {
    return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

// Dense row-major float tensor. Rank 0 is representable in memory but
// cannot be written to a .ten file.
class Tensor {
public:
    Tensor() = default;

    explicit Tensor(Shape shape, float fill = 0.0f)
        : shape_(std::move(shape)), data_(shape_volume(shape_), fill) {}

    Tensor(Shape shape, std::vector<float> data) : shape_(std::move(shape)), data_(std::move(data)) {
        if (shape_volume(shape_) != data_.size()) {
            throw Error(ErrorCode::ShapeMismatch, "shape " + shape_string(shape_) + " does not hold " +
                                                      std::to_string(data_.size()) + " elements");
        }
    }

    const Shape& shape() const noexcept { return shape_; }
    std::size_t rank() const noexcept { return shape_.size(); }
    std::size_t dim(std::size_t axis) const { return shape_.at(axis); }
    std::size_t size() const noexcept { return data_.size(); }
    bool empty() const noexcept { return data_.empty(); }

    std::span<float> data() noexcept { return data_; }
    std::span<const float> data() const noexcept { return data_; }
    std::vector<float>& buffer() noexcept { return data_; }
    const std::vector<float>& buffer() const noexcept { return data_; }

    float& operator[](std::size_t i) { return data_[i]; }
    float operator[](std::size_t i) const { return data_[i]; }

    float& at(std::size_t i, std::size_t j) { return data_[i * shape_[1] + j]; }
    float at(std::size_t i, std::size_t j) const { return data_[i * shape_[1] + j]; }
    float& at(std::size_t i, std::size_t j, std::size_t k) {
        return data_[(i * shape_[1] + j) * shape_[2] + k];
    }
    float at(std::size_t i, std::size_t j, std::size_t k) const {
        return data_[(i * shape_[1] + j) * shape_[2] + k];
    }

    // Contiguous view of the sub-tensor at `index` along axis 0.
    std::span<const float> slab(std::size_t index) const {
        const std::size_t stride = data_.size() / shape_.at(0);
        return std::span<const float>(data_).subspan(index * stride, stride);
    }
    std::span<float> slab(std::size_t index) {
        const std::size_t stride = data_.size() / shape_.at(0);
        return std::span<float>(data_).subspan(index * stride, stride);
    }

    Tensor reshaped(Shape shape) const { return Tensor(std::move(shape), data_); }

    bool all_finite() const {
        return std::all_of(data_.begin(), data_.end(), [](float v) { return std::isfinite(v); });
    }

    friend bool operator==(const Tensor& a, const Tensor& b) {
        return a.shape_ == b.shape_ && a.data_ == b.data_;
    }

private:
    Shape shape_;
    std::vector<float> data_;
};

// Stacks equally shaped tensors along a new leading axis.
inline Tensor stack(std::span<const Tensor> parts) {
    if (parts.empty()) throw Error(ErrorCode::ShapeMismatch, "cannot stack zero tensors");
    Shape shape = parts.front().shape();
    std::vector<float> data;
    data.reserve(parts.size() * parts.front().size());
    for (const Tensor& t : parts) {
        if (t.shape() != shape) {
            throw Error(ErrorCode::ShapeMismatch,
                        "stack of " + shape_string(shape) + " and " + shape_string(t.shape()));
        }
        data.insert(data.end(), t.data().begin(), t.data().end());
    }
    shape.insert(shape.begin(), parts.size());
    return Tensor(std::move(shape), std::move(data));
}

}  // namespace tomofuse
