#pragma once

// Classifier head trained on top of the frozen extractor:
//   conv(F filters, k x k, stride s) -> ReLU -> flatten
//   -> linear(hidden) -> ReLU -> dropout -> linear(1) -> sigmoid
// Gradients are derived by hand; see backward().

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "tomofuse/error.hpp"
#include "tomofuse/tensor.hpp"

namespace tomofuse {

struct HeadConfig {
    Shape input_shape;  // C' x H' x W'
    std::size_t conv_filters = 64;
    std::size_t conv_kernel = 3;
    std::size_t conv_stride = 1;
    std::size_t hidden = 256;
    double dropout = 0.5;

    std::size_t conv_out(std::size_t n) const {
        if (n < conv_kernel) {
            throw Error(ErrorCode::ShapeUnsupported, "feature map side " + std::to_string(n) +
                                                         " smaller than head kernel " + std::to_string(conv_kernel));
        }
        return (n - conv_kernel) / conv_stride + 1;
    }
    std::size_t conv_out_h() const { return conv_out(input_shape.at(1)); }
    std::size_t conv_out_w() const { return conv_out(input_shape.at(2)); }
    // in_dim of the first linear layer.
    std::size_t flat_dim() const { return conv_filters * conv_out_h() * conv_out_w(); }

    void validate() const {
        if (input_shape.size() != 3) throw Error(ErrorCode::ShapeMismatch, "head input must be C x H x W");
        if (conv_filters == 0 || conv_kernel == 0 || conv_stride == 0 || hidden == 0) {
            throw Error(ErrorCode::InvalidConfig, "head dimensions must be positive");
        }
        if (!(dropout >= 0.0 && dropout < 1.0)) throw Error(ErrorCode::InvalidConfig, "dropout must be in [0, 1)");
        (void)flat_dim();
    }
};

struct Parameter {
    std::string name;
    Tensor value;
};

// Parameter order is fixed: conv.weight, conv.bias, linear1.weight,
// linear1.bias, linear2.weight, linear2.bias.
class ClassifierHead {
public:
    enum Index : std::size_t { ConvW, ConvB, Lin1W, Lin1B, Lin2W, Lin2B, Count };

    ClassifierHead() = default;

    explicit ClassifierHead(HeadConfig cfg) : cfg_(std::move(cfg)) {
        cfg_.validate();
        const std::size_t c = cfg_.input_shape[0];
        const std::size_t k = cfg_.conv_kernel;
        params_ = {
            {"conv.weight", Tensor({cfg_.conv_filters, c, k, k})},
            {"conv.bias", Tensor({cfg_.conv_filters})},
            {"linear1.weight", Tensor({cfg_.hidden, cfg_.flat_dim()})},
            {"linear1.bias", Tensor({cfg_.hidden})},
            {"linear2.weight", Tensor({1, cfg_.hidden})},
            {"linear2.bias", Tensor({1})},
        };
    }

    // He-normal weights, zero biases.
    static ClassifierHead initialized(HeadConfig cfg, std::uint64_t seed) {
        ClassifierHead h(std::move(cfg));
        std::mt19937_64 rng(seed);
        auto fill = [&](Tensor& t, double fan_in, double gain) {
            std::normal_distribution<double> g(0.0, std::sqrt(gain / fan_in));
            for (float& v : t.data()) v = static_cast<float>(g(rng));
        };
        const auto& c = h.cfg_;
        fill(h.params_[ConvW].value, static_cast<double>(c.input_shape[0] * c.conv_kernel * c.conv_kernel), 2.0);
        fill(h.params_[Lin1W].value, static_cast<double>(c.flat_dim()), 2.0);
        fill(h.params_[Lin2W].value, static_cast<double>(c.hidden), 1.0);
        return h;
    }

    const HeadConfig& config() const { return cfg_; }
    std::vector<Parameter>& parameters() { return params_; }
    const std::vector<Parameter>& parameters() const { return params_; }
    Tensor& param(Index i) { return params_[i].value; }
    const Tensor& param(Index i) const { return params_[i].value; }

    // Zero-valued tensors shaped like every parameter.
    std::vector<Tensor> zeros_like() const {
        std::vector<Tensor> out;
        for (const auto& p : params_) out.emplace_back(p.value.shape());
        return out;
    }

    friend bool operator==(const ClassifierHead& a, const ClassifierHead& b) {
        if (a.params_.size() != b.params_.size()) return false;
        for (std::size_t i = 0; i < a.params_.size(); ++i) {
            if (a.params_[i].name != b.params_[i].name || !(a.params_[i].value == b.params_[i].value)) return false;
        }
        return true;
    }

private:
    HeadConfig cfg_;
    std::vector<Parameter> params_;
};

inline double sigmoid(double x) {
    if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}

// Intermediate activations of one forward pass, kept for backward().
template <class Acc>
struct BasicForwardTrace {
    std::vector<Acc> conv_act;  // post-ReLU conv output, flattened F x OH x OW
    std::vector<Acc> hidden;    // post-ReLU, post-dropout hidden activations
    std::vector<Acc> mask;      // dropout multiplier per hidden unit (0 or 1/keep)
    double logit = 0.0;
    double prob = 0.5;
};

using ForwardTrace = BasicForwardTrace<float>;

// Runs the head on one C' x H' x W' map. Dropout is drawn from `rng` when
// given (training); inference passes nullptr and needs no rescaling.
// Acc = double is used by gradient checks; training runs in float.
template <class Acc = float>
BasicForwardTrace<Acc> forward_trace(const ClassifierHead& head, const Tensor& fm, std::mt19937_64* rng) {
    const HeadConfig& cfg = head.config();
    if (fm.shape() != cfg.input_shape) {
        throw Error(ErrorCode::ShapeMismatch, "head expects " + shape_string(cfg.input_shape) + ", got " +
                                                  shape_string(fm.shape()));
    }
    const std::size_t c_in = cfg.input_shape[0];
    const std::size_t h = cfg.input_shape[1];
    const std::size_t w = cfg.input_shape[2];
    const std::size_t k = cfg.conv_kernel;
    const std::size_t s = cfg.conv_stride;
    const std::size_t oh = cfg.conv_out_h();
    const std::size_t ow = cfg.conv_out_w();
    const std::size_t n_out = oh * ow;

    BasicForwardTrace<Acc> tr;
    tr.conv_act.assign(cfg.conv_filters * n_out, Acc(0));
    const Tensor& cw = head.param(ClassifierHead::ConvW);
    const Tensor& cb = head.param(ClassifierHead::ConvB);
    for (std::size_t f = 0; f < cfg.conv_filters; ++f) {
        Acc* out = tr.conv_act.data() + f * n_out;
        for (std::size_t i = 0; i < n_out; ++i) out[i] = cb[f];
        for (std::size_t c = 0; c < c_in; ++c) {
            const float* src = fm.data().data() + c * h * w;
            const float* ker = cw.data().data() + (f * c_in + c) * k * k;
            for (std::size_t ky = 0; ky < k; ++ky) {
                for (std::size_t kx = 0; kx < k; ++kx) {
                    const Acc wv = ker[ky * k + kx];
                    for (std::size_t oy = 0; oy < oh; ++oy) {
                        const float* row = src + (oy * s + ky) * w + kx;
                        Acc* dst = out + oy * ow;
                        for (std::size_t ox = 0; ox < ow; ++ox) dst[ox] += wv * static_cast<Acc>(row[ox * s]);
                    }
                }
            }
        }
        for (std::size_t i = 0; i < n_out; ++i) out[i] = std::max(out[i], Acc(0));
    }

    const std::size_t flat = tr.conv_act.size();
    const Tensor& w1 = head.param(ClassifierHead::Lin1W);
    const Tensor& b1 = head.param(ClassifierHead::Lin1B);
    tr.hidden.resize(cfg.hidden);
    tr.mask.assign(cfg.hidden, Acc(1));
    const double keep = 1.0 - cfg.dropout;
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (std::size_t j = 0; j < cfg.hidden; ++j) {
        const float* row = w1.data().data() + j * flat;
        Acc acc = 0;
        for (std::size_t i = 0; i < flat; ++i) acc += static_cast<Acc>(row[i]) * tr.conv_act[i];
        Acc a = std::max(acc + static_cast<Acc>(b1[j]), Acc(0));
        if (rng != nullptr && cfg.dropout > 0.0) {
            tr.mask[j] = unit(*rng) < keep ? static_cast<Acc>(1.0 / keep) : Acc(0);
            a *= tr.mask[j];
        }
        tr.hidden[j] = a;
    }

    const Tensor& w2 = head.param(ClassifierHead::Lin2W);
    double logit = head.param(ClassifierHead::Lin2B)[0];
    for (std::size_t j = 0; j < cfg.hidden; ++j) logit += static_cast<double>(w2[j]) * tr.hidden[j];
    tr.logit = logit;
    tr.prob = sigmoid(logit);
    return tr;
}

// P(positive) for one feature map.
inline double forward(const ClassifierHead& head, const Tensor& fm, bool train_mode = false,
                      std::mt19937_64* rng = nullptr) {
    return forward_trace(head, fm, train_mode ? rng : nullptr).prob;
}

// Adds d(loss)/d(theta) to `grads` given d(loss)/d(logit) for one sample.
template <class Acc>
void backward(const ClassifierHead& head, const Tensor& fm, const BasicForwardTrace<Acc>& tr, double dlogit,
              std::vector<Tensor>& grads) {
    const HeadConfig& cfg = head.config();
    const std::size_t c_in = cfg.input_shape[0];
    const std::size_t h = cfg.input_shape[1];
    const std::size_t w = cfg.input_shape[2];
    const std::size_t k = cfg.conv_kernel;
    const std::size_t s = cfg.conv_stride;
    const std::size_t oh = cfg.conv_out_h();
    const std::size_t ow = cfg.conv_out_w();
    const std::size_t n_out = oh * ow;
    const std::size_t flat = tr.conv_act.size();

    const Tensor& w2 = head.param(ClassifierHead::Lin2W);
    grads[ClassifierHead::Lin2B][0] += static_cast<float>(dlogit);
    std::vector<Acc> d_hidden(cfg.hidden, Acc(0));
    for (std::size_t j = 0; j < cfg.hidden; ++j) {
        grads[ClassifierHead::Lin2W][j] += static_cast<float>(dlogit * tr.hidden[j]);
        // hidden = relu(z) * mask, so a positive hidden value means relu'(z) = 1 and mask > 0.
        if (tr.hidden[j] > Acc(0)) d_hidden[j] = static_cast<Acc>(dlogit * w2[j] * tr.mask[j]);
    }

    const Tensor& w1 = head.param(ClassifierHead::Lin1W);
    Tensor& g_w1 = grads[ClassifierHead::Lin1W];
    Tensor& g_b1 = grads[ClassifierHead::Lin1B];
    std::vector<Acc> d_conv(flat, Acc(0));
    for (std::size_t j = 0; j < cfg.hidden; ++j) {
        const Acc dj = d_hidden[j];
        if (dj == Acc(0)) continue;
        g_b1[j] += static_cast<float>(dj);
        float* grow = g_w1.data().data() + j * flat;
        const float* wrow = w1.data().data() + j * flat;
        for (std::size_t i = 0; i < flat; ++i) {
            grow[i] += static_cast<float>(dj * tr.conv_act[i]);
            d_conv[i] += dj * static_cast<Acc>(wrow[i]);
        }
    }

    Tensor& g_cw = grads[ClassifierHead::ConvW];
    Tensor& g_cb = grads[ClassifierHead::ConvB];
    for (std::size_t f = 0; f < cfg.conv_filters; ++f) {
        Acc* dz = d_conv.data() + f * n_out;
        const Acc* act = tr.conv_act.data() + f * n_out;
        Acc bias_grad = 0;
        for (std::size_t i = 0; i < n_out; ++i) {
            if (act[i] <= Acc(0)) dz[i] = Acc(0);
            bias_grad += dz[i];
        }
        g_cb[f] += static_cast<float>(bias_grad);
        for (std::size_t c = 0; c < c_in; ++c) {
            const float* src = fm.data().data() + c * h * w;
            float* gk = g_cw.data().data() + (f * c_in + c) * k * k;
            for (std::size_t ky = 0; ky < k; ++ky) {
                for (std::size_t kx = 0; kx < k; ++kx) {
                    Acc acc = 0;
                    for (std::size_t oy = 0; oy < oh; ++oy) {
                        const float* row = src + (oy * s + ky) * w + kx;
                        const Acc* d = dz + oy * ow;
                        for (std::size_t ox = 0; ox < ow; ++ox) acc += d[ox] * static_cast<Acc>(row[ox * s]);
                    }
                    gk[ky * k + kx] += static_cast<float>(acc);
                }
            }
        }
    }
}

}  // namespace tomofuse
