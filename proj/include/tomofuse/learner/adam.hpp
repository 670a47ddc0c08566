#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "tomofuse/error.hpp"
#include "tomofuse/tensor.hpp"

namespace tomofuse {

struct AdamHyper {
    double lr = 1e-4;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    double weight_decay = 1e-4;  // L2 term lambda * theta added to the gradient
};

struct AdamState {
    AdamHyper hyper;
    std::vector<Tensor> m;
    std::vector<Tensor> v;
    std::uint64_t step = 0;
};

inline AdamState make_adam_state(const std::vector<Tensor>& params, AdamHyper hyper = {}) {
    AdamState st;
    st.hyper = hyper;
    for (const auto& p : params) {
        st.m.emplace_back(p.shape());
        st.v.emplace_back(p.shape());
    }
    return st;
}

// One bias-corrected Adam update applied in place.
inline void adam_step(std::vector<Tensor*> params, const std::vector<Tensor>& grads, AdamState& st) {
    if (params.size() != grads.size() || params.size() != st.m.size()) {
        throw Error(ErrorCode::ShapeMismatch, "parameter, gradient and state counts differ");
    }
    const AdamHyper& hp = st.hyper;
    ++st.step;
    const double t = static_cast<double>(st.step);
    const double c1 = 1.0 - std::pow(hp.beta1, t);
    const double c2 = 1.0 - std::pow(hp.beta2, t);
    for (std::size_t i = 0; i < params.size(); ++i) {
        Tensor& p = *params[i];
        if (p.shape() != grads[i].shape() || p.shape() != st.m[i].shape()) {
            throw Error(ErrorCode::ShapeMismatch, "parameter " + std::to_string(i) + " shape " +
                                                      shape_string(p.shape()) + " vs gradient " +
                                                      shape_string(grads[i].shape()));
        }
        Tensor& m = st.m[i];
        Tensor& v = st.v[i];
        for (std::size_t j = 0; j < p.size(); ++j) {
            const double g = static_cast<double>(grads[i][j]) + hp.weight_decay * p[j];
            const double mj = hp.beta1 * m[j] + (1.0 - hp.beta1) * g;
            const double vj = hp.beta2 * v[j] + (1.0 - hp.beta2) * g * g;
            m[j] = static_cast<float>(mj);
            v[j] = static_cast<float>(vj);
            p[j] = static_cast<float>(p[j] - hp.lr * (mj / c1) / (std::sqrt(vj / c2) + hp.eps));
        }
    }
}

}  // namespace tomofuse
