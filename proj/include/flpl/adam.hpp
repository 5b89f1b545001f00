#pragma once

#include <cmath>
#include <utility>

#include "flpl/error.hpp"
#include "flpl/mat.hpp"

namespace flpl {

// Adam optimizer state for one tracked parameter matrix. The update itself
// is the textbook bias-corrected form and always steps in the descent
// direction of the supplied gradient; callers doing ascent negate the
// gradient.
struct AdamState {
    long step_count = 0;
    Mat first_moment;
    Mat second_moment;
    double learning_rate = 0.01;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;

    static AdamState for_param(const Mat& param, double lr) {
        AdamState s;
        s.first_moment = Mat(param.rows(), param.cols());
        s.second_moment = Mat(param.rows(), param.cols());
        s.learning_rate = lr;
        return s;
    }
};

inline std::pair<Mat, AdamState> adam_step(const Mat& param, const Mat& grad, AdamState state) {
    detail::require(param.same_shape(grad), "adam_step: param " + param.shape() + " vs grad " + grad.shape());
    detail::require(param.same_shape(state.first_moment) && param.same_shape(state.second_moment),
                    "adam_step: moment shape does not match param " + param.shape());

    state.step_count += 1;
    const double bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step_count));
    const double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step_count));

    Mat out = param;
    for (std::size_t i = 0; i < out.size(); ++i) {
        const double g = grad.values()[i];
        double& m = state.first_moment.values()[i];
        double& v = state.second_moment.values()[i];
        m = state.beta1 * m + (1.0 - state.beta1) * g;
        v = state.beta2 * v + (1.0 - state.beta2) * g * g;
        const double m_hat = m / bc1;
        const double v_hat = v / bc2;
        out.values()[i] -= state.learning_rate * m_hat / (std::sqrt(v_hat) + state.epsilon);
    }
    return {std::move(out), std::move(state)};
}

} // namespace flpl
