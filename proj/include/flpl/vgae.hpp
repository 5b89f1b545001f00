#pragma once

#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "flpl/adam.hpp"
#include "flpl/error.hpp"
#include "flpl/graph.hpp"
#include "flpl/mat.hpp"
#include "flpl/rng.hpp"

namespace flpl {

// Two-layer GCN encoder with a shared first layer and separate mean /
// log-sigma heads, plus an inner-product decoder. Trained by gradient
// ascent on the reconstruction loss to push the decoded adjacency away
// from the benign one.
struct VgaeParams {
    Mat w0;       // in_dim x hidden1
    Mat w1_mu;    // hidden1 x hidden2
    Mat w1_sigma; // hidden1 x hidden2
    AdamState opt_w0, opt_w1_mu, opt_w1_sigma;

    static VgaeParams init(int in_dim, int hidden1, int hidden2, double learning_rate, RngStream& rng) {
        auto glorot = [&rng](int rows, int cols) {
            Mat m(rows, cols);
            const double bound = std::sqrt(6.0 / (rows + cols));
            for (double& v : m.values()) v = rng.uniform(-bound, bound);
            return m;
        };
        VgaeParams p;
        p.w0 = glorot(in_dim, hidden1);
        p.w1_mu = glorot(hidden1, hidden2);
        p.w1_sigma = glorot(hidden1, hidden2);
        p.opt_w0 = AdamState::for_param(p.w0, learning_rate);
        p.opt_w1_mu = AdamState::for_param(p.w1_mu, learning_rate);
        p.opt_w1_sigma = AdamState::for_param(p.w1_sigma, learning_rate);
        return p;
    }
};

struct LatentSample {
    Mat mu;        // M x hidden2
    Mat log_sigma; // M x hidden2
    Mat z;         // mu + exp(log_sigma) .* noise
    Mat noise;     // the standard-normal draw used
};

// Symmetrically normalized adjacency with self-loops added:
// D^{-1/2} (A + I) D^{-1/2} with D the row sums of A + I.
inline Mat normalized_adjacency(const Mat& adjacency) {
    detail::require(adjacency.rows() == adjacency.cols(), "normalized_adjacency: adjacency must be square");
    const int n = adjacency.rows();
    std::vector<double> inv_sqrt_deg(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        double deg = 1.0; // the added self-loop
        for (int j = 0; j < n; ++j) deg += adjacency(i, j);
        detail::require(deg > 0.0, "normalized_adjacency: non-positive degree at node " + std::to_string(i));
        inv_sqrt_deg[static_cast<std::size_t>(i)] = 1.0 / std::sqrt(deg);
    }
    Mat out(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            const double with_loop = adjacency(i, j) + (i == j ? 1.0 : 0.0);
            out(i, j) = inv_sqrt_deg[static_cast<std::size_t>(i)] * with_loop * inv_sqrt_deg[static_cast<std::size_t>(j)];
        }
    return out;
}

namespace detail {

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// Everything the backward pass needs from one forward evaluation.
struct VgaeForward {
    Mat norm_adj;   // N
    Mat propagated; // N * X
    Mat pre_act;    // (N*X) * W0
    Mat hidden;     // relu(pre_act)
    Mat mixed;      // N * hidden
    LatentSample latent;
    Mat adjacency_hat;
    double bce = 0.0;
    double kl = 0.0;
    double loss = 0.0; // bce - kl
};

inline constexpr double kProbClamp = 1e-12;

inline VgaeForward vgae_forward(const ParameterGraph& g, const VgaeParams& p, const Mat& noise) {
    VgaeForward f;
    f.norm_adj = normalized_adjacency(g.adjacency);
    f.propagated = matmul(f.norm_adj, g.node_features);
    f.pre_act = matmul(f.propagated, p.w0);
    f.hidden = map(f.pre_act, [](double v) { return v > 0.0 ? v : 0.0; });
    f.mixed = matmul(f.norm_adj, f.hidden);
    f.latent.mu = matmul(f.mixed, p.w1_mu);
    f.latent.log_sigma = matmul(f.mixed, p.w1_sigma);
    f.latent.noise = noise;
    f.latent.z = f.latent.mu;
    for (std::size_t i = 0; i < f.latent.z.size(); ++i)
        f.latent.z.values()[i] += std::exp(f.latent.log_sigma.values()[i]) * noise.values()[i];

    const Mat inner = matmul(f.latent.z, transpose(f.latent.z));
    f.adjacency_hat = map(inner, sigmoid);

    const int m = g.adjacency.rows();
    const double inv_m2 = 1.0 / (static_cast<double>(m) * m);
    for (int r = 0; r < m; ++r)
        for (int c = 0; c < m; ++c) {
            const double target = 0.5 * (g.adjacency(r, c) + 1.0); // rescale [-1,1] -> [0,1]
            const double prob = std::clamp(f.adjacency_hat(r, c), kProbClamp, 1.0 - kProbClamp);
            f.bce -= inv_m2 * (target * std::log(prob) + (1.0 - target) * std::log(1.0 - prob));
        }
    const double inv_2m = 1.0 / (2.0 * m);
    for (std::size_t i = 0; i < f.latent.mu.size(); ++i) {
        const double mu = f.latent.mu.values()[i];
        const double ls = f.latent.log_sigma.values()[i];
        f.kl += inv_2m * (mu * mu + std::exp(2.0 * ls) - 1.0 - 2.0 * ls);
    }
    f.loss = f.bce - f.kl;
    return f;
}

struct VgaeGrads {
    Mat w0, w1_mu, w1_sigma;
};

// Analytic gradient of the loss in VgaeForward with respect to the weights.
inline VgaeGrads vgae_backward(const ParameterGraph& g, const VgaeParams& p, const VgaeForward& f) {
    const int m = g.adjacency.rows();
    const double inv_m2 = 1.0 / (static_cast<double>(m) * m);
    const double inv_m = 1.0 / static_cast<double>(m);

    // d loss / d inner-product, folding the sigmoid through the BCE.
    Mat d_inner(m, m);
    for (int r = 0; r < m; ++r)
        for (int c = 0; c < m; ++c) {
            const double target = 0.5 * (g.adjacency(r, c) + 1.0);
            const double prob = std::clamp(f.adjacency_hat(r, c), kProbClamp, 1.0 - kProbClamp);
            const double d_prob = -inv_m2 * (target / prob - (1.0 - target) / (1.0 - prob));
            const double sig = f.adjacency_hat(r, c);
            d_inner(r, c) = d_prob * sig * (1.0 - sig);
        }

    // inner = Z Z^T, so dZ = (d_inner + d_inner^T) Z.
    Mat d_z = matmul(add(d_inner, transpose(d_inner)), f.latent.z);

    Mat d_mu = d_z;
    Mat d_log_sigma(f.latent.log_sigma.rows(), f.latent.log_sigma.cols());
    for (std::size_t i = 0; i < d_mu.size(); ++i) {
        const double ls = f.latent.log_sigma.values()[i];
        d_log_sigma.values()[i] = d_z.values()[i] * f.latent.noise.values()[i] * std::exp(ls);
        // loss = bce - kl, so the KL contributes with a negative sign.
        d_mu.values()[i] -= inv_m * f.latent.mu.values()[i];
        d_log_sigma.values()[i] -= inv_m * (std::exp(2.0 * ls) - 1.0);
    }

    Mat d_mixed = add(matmul(d_mu, transpose(p.w1_mu)), matmul(d_log_sigma, transpose(p.w1_sigma)));

    VgaeGrads grads;
    grads.w1_mu = matmul(transpose(f.mixed), d_mu);
    grads.w1_sigma = matmul(transpose(f.mixed), d_log_sigma);

    Mat d_hidden = matmul(f.norm_adj, d_mixed); // N is symmetric
    Mat d_pre = d_hidden;
    for (std::size_t i = 0; i < d_pre.size(); ++i)
        if (f.pre_act.values()[i] <= 0.0) d_pre.values()[i] = 0.0;
    grads.w0 = matmul(transpose(f.propagated), d_pre);
    return grads;
}

} // namespace detail

// GCN encoder: Z1 = relu(N X W0), mu = N Z1 W1_mu, log_sigma = N Z1 W1_sigma,
// z = mu + exp(log_sigma) .* noise.
inline LatentSample encode(const ParameterGraph& g, const VgaeParams& p, const Mat& noise) {
    detail::require(g.node_features.cols() == p.w0.rows(),
                    "encode: feature width " + std::to_string(g.node_features.cols()) + " vs W0 rows " +
                        std::to_string(p.w0.rows()));
    detail::require(noise.rows() == g.adjacency.rows() && noise.cols() == p.w1_mu.cols(),
                    "encode: noise shape " + noise.shape() + " does not match latent shape");
    return detail::vgae_forward(g, p, noise).latent;
}

// Inner-product decoder: sigmoid(Z Z^T), symmetric with entries in (0,1).
inline Mat decode(const LatentSample& latent) {
    detail::require(all_finite(latent.z), "decode: non-finite latent");
    return map(matmul(latent.z, transpose(latent.z)), detail::sigmoid);
}

// Reconstruction loss: mean binary cross-entropy between the rescaled
// benign adjacency and the decoded one, minus the KL divergence of the
// latent posterior from the standard-normal prior.
inline double elbo_loss(const ParameterGraph& g, const LatentSample& latent, const Mat& adjacency_hat) {
    const int m = g.adjacency.rows();
    detail::require(adjacency_hat.rows() == m && adjacency_hat.cols() == m, "elbo_loss: adjacency shape mismatch");
    double bce = 0.0;
    const double inv_m2 = 1.0 / (static_cast<double>(m) * m);
    for (int r = 0; r < m; ++r)
        for (int c = 0; c < m; ++c) {
            const double target = 0.5 * (g.adjacency(r, c) + 1.0);
            const double prob = std::clamp(adjacency_hat(r, c), detail::kProbClamp, 1.0 - detail::kProbClamp);
            bce -= inv_m2 * (target * std::log(prob) + (1.0 - target) * std::log(1.0 - prob));
        }
    double kl = 0.0;
    const double inv_2m = 1.0 / (2.0 * m);
    for (std::size_t i = 0; i < latent.mu.size(); ++i) {
        const double mu = latent.mu.values()[i];
        const double ls = latent.log_sigma.values()[i];
        kl += inv_2m * (mu * mu + std::exp(2.0 * ls) - 1.0 - 2.0 * ls);
    }
    return bce - kl;
}

struct VgaeTrainResult {
    VgaeParams params;
    Mat adjacency_hat;             // decoded from the latent mean (noise = 0)
    std::vector<double> loss_curve; // one entry per epoch
};

// Adam on the reconstruction loss, one full-graph step per epoch with fresh
// noise. Ascent by default (the adversarial direction); pass
// maximize = false to recover conventional autoencoder training.
inline VgaeTrainResult train_vgae(const ParameterGraph& g, VgaeParams params, int epochs, RngStream& rng,
                                  bool maximize = true) {
    detail::require(epochs >= 1, "train_vgae: epochs must be >= 1");
    const int m = g.adjacency.rows();
    const int hidden2 = params.w1_mu.cols();

    VgaeTrainResult out;
    out.loss_curve.reserve(static_cast<std::size_t>(epochs));
    for (int epoch = 0; epoch < epochs; ++epoch) {
        Mat noise(m, hidden2);
        for (double& v : noise.values()) v = rng.normal();
        const detail::VgaeForward f = detail::vgae_forward(g, params, noise);
        if (!std::isfinite(f.loss))
            throw NumericError("train_vgae: non-finite loss at epoch " + std::to_string(epoch) +
                               " (|W0|=" + std::to_string(frobenius_norm(params.w0)) +
                               ", |W1_mu|=" + std::to_string(frobenius_norm(params.w1_mu)) +
                               ", |W1_sigma|=" + std::to_string(frobenius_norm(params.w1_sigma)) + ")");
        out.loss_curve.push_back(f.loss);

        detail::VgaeGrads grads = detail::vgae_backward(g, params, f);
        const double dir = maximize ? -1.0 : 1.0; // Adam steps along -grad
        std::tie(params.w0, params.opt_w0) = adam_step(params.w0, scale(grads.w0, dir), std::move(params.opt_w0));
        std::tie(params.w1_mu, params.opt_w1_mu) =
            adam_step(params.w1_mu, scale(grads.w1_mu, dir), std::move(params.opt_w1_mu));
        std::tie(params.w1_sigma, params.opt_w1_sigma) =
            adam_step(params.w1_sigma, scale(grads.w1_sigma, dir), std::move(params.opt_w1_sigma));
    }

    const Mat zero_noise(m, hidden2);
    out.adjacency_hat = detail::vgae_forward(g, params, zero_noise).adjacency_hat;
    out.params = std::move(params);
    return out;
}

} // namespace flpl
