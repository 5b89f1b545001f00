#pragma once

#include <vector>

#include "flpl/attack.hpp"
#include "flpl/error.hpp"
#include "flpl/rng.hpp"
#include "flpl/svm.hpp"

namespace flpl {

// Comparison attacks: a directed model-replacement surrogate for the
// fake-device poisoning attack (labelled mp-surrogate in all outputs) and
// scaled Gaussian noise on the global model.
struct BaselineConfig {
    double rmp_scale = 10.0;
    double mp_push = 1.0;
};

// Push the global model opposite the mean benign update:
// w' = w_G - push * (mean - w_G).
inline ModelWeights mp_attack(const std::vector<ModelWeights>& eavesdropped, const std::vector<int>& sizes,
                              const GlobalModel& global, const BaselineConfig& cfg) {
    detail::require(!eavesdropped.empty(), "mp_attack: nothing eavesdropped");
    const ModelWeights mean = detail::weighted_mean(eavesdropped, sizes);
    ModelWeights out = global.weights;
    for (std::size_t p = 0; p < out.flat.size(); ++p)
        out.flat[p] -= cfg.mp_push * (mean.flat[p] - global.weights.flat[p]);
    return out;
}

// w' = w_G + scale * n with n standard normal per coordinate.
inline ModelWeights rmp_attack(const GlobalModel& global, const BaselineConfig& cfg, RngStream& rng) {
    ModelWeights out = global.weights;
    for (double& v : out.flat) v += cfg.rmp_scale * rng.normal();
    return out;
}

} // namespace flpl
