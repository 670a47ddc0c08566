#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <string>

#include "tomofuse/error.hpp"

namespace tomofuse {

inline constexpr double kProbClamp = 1e-7;

// Mean binary cross-entropy; probabilities are clamped to [1e-7, 1 - 1e-7].
inline double bce_loss(std::span<const double> probs, std::span<const int> targets) {
    if (probs.size() != targets.size()) {
        throw Error(ErrorCode::LengthMismatch, std::to_string(probs.size()) + " probabilities vs " +
                                                   std::to_string(targets.size()) + " targets");
    }
    if (probs.empty()) throw Error(ErrorCode::LengthMismatch, "empty batch");
    double sum = 0.0;
    for (std::size_t i = 0; i < probs.size(); ++i) {
        const double p = std::clamp(probs[i], kProbClamp, 1.0 - kProbClamp);
        sum -= targets[i] ? std::log(p) : std::log(1.0 - p);
    }
    return sum / static_cast<double>(probs.size());
}

// d(bce of one sample)/d(logit). Zero where the clamp is active, matching
// the clamped loss exactly.
inline double bce_logit_gradient(double prob, int target) {
    if (prob < kProbClamp || prob > 1.0 - kProbClamp) return 0.0;
    return prob - static_cast<double>(target);
}

}  // namespace tomofuse
