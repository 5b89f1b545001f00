#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "flpl/dataset.hpp"
#include "flpl/error.hpp"
#include "flpl/rng.hpp"

namespace flpl {

// Linear multi-class SVM with one-vs-rest heads, trained jointly. The model
// is a single flat vector so it can be exchanged, aggregated and attacked
// as one unit: class-major layout, hyperplane coefficients first, intercept
// last within each class row. Total dimension P = classes * (dim + 1).
struct ModelWeights {
    int classes = 0;
    int dim = 0;               // feature dimension (without intercept)
    std::vector<double> flat;  // length classes * (dim + 1)

    ModelWeights() = default;
    ModelWeights(int classes_, int dim_)
        : classes(classes_), dim(dim_), flat(static_cast<std::size_t>(classes_) * (dim_ + 1), 0.0) {}

    int param_count() const { return classes * (dim + 1); }
    int row_len() const { return dim + 1; }

    double* head(int c) { return flat.data() + static_cast<std::size_t>(c) * row_len(); }
    const double* head(int c) const { return flat.data() + static_cast<std::size_t>(c) * row_len(); }

    double intercept(int c) const { return head(c)[dim]; }

    bool same_shape(const ModelWeights& o) const { return classes == o.classes && dim == o.dim; }

    bool operator==(const ModelWeights&) const = default;
};

struct GlobalModel {
    ModelWeights weights;
    int round = 0;
};

struct FlConfig {
    int clients = 5;            // I
    int attackers = 2;          // J
    int rounds = 30;
    int local_iters = 10;       // passes over the local data per round
    double learning_rate = 0.001;
    double reg_coeff = 0.01;    // alpha, weight of the extra regularizer
    int claimed_attacker_size = 0; // 0 = use the mean benign data size
    int batch_size = 30;
};

namespace detail {

inline void check_model_data(const ModelWeights& model, const std::vector<Sample>& data, const char* op) {
    require(!data.empty(), std::string(op) + ": empty sample list");
    require(static_cast<int>(data[0].features.size()) == model.dim,
            std::string(op) + ": model dim " + std::to_string(model.dim) + " vs feature length " +
                std::to_string(data[0].features.size()));
}

inline double head_score(const ModelWeights& model, int c, const std::vector<double>& x) {
    const double* h = model.head(c);
    double s = h[model.dim]; // intercept
    for (int j = 0; j < model.dim; ++j) s += h[j] * x[static_cast<std::size_t>(j)];
    return s;
}

// Squared norm of the hyperplane coefficients; intercepts are not penalized.
inline double hyperplane_sq_norm(const ModelWeights& model) {
    double s = 0.0;
    for (int c = 0; c < model.classes; ++c) {
        const double* h = model.head(c);
        for (int j = 0; j < model.dim; ++j) s += h[j] * h[j];
    }
    return s;
}

} // namespace detail

// Hinge loss over one-vs-rest heads plus the margin regularizer and the
// training-noise regularizer: (1/2)||w||^2 + mean hinge + alpha*(1/2)||w||^2.
inline double local_loss(const ModelWeights& model, const std::vector<Sample>& data, double alpha) {
    detail::check_model_data(model, data, "local_loss");
    double hinge = 0.0;
    for (const Sample& s : data) {
        for (int c = 0; c < model.classes; ++c) {
            const double y = (s.label == c) ? 1.0 : -1.0;
            hinge += std::max(0.0, 1.0 - y * detail::head_score(model, c, s.features));
        }
    }
    hinge /= static_cast<double>(data.size());
    return (1.0 + alpha) * 0.5 * detail::hyperplane_sq_norm(model) + hinge;
}

// Subgradient of local_loss over the given samples, same layout as the model.
inline ModelWeights loss_gradient(const ModelWeights& model, std::span<const Sample* const> data, double alpha) {
    detail::require(!data.empty(), "loss_gradient: empty sample list");
    ModelWeights grad(model.classes, model.dim);
    const double inv_n = 1.0 / static_cast<double>(data.size());
    for (const Sample* s : data) {
        for (int c = 0; c < model.classes; ++c) {
            const double y = (s->label == c) ? 1.0 : -1.0;
            if (y * detail::head_score(model, c, s->features) < 1.0) {
                double* g = grad.head(c);
                for (int j = 0; j < model.dim; ++j) g[j] -= y * s->features[static_cast<std::size_t>(j)] * inv_n;
                g[model.dim] -= y * inv_n;
            }
        }
    }
    for (int c = 0; c < model.classes; ++c) {
        const double* h = model.head(c);
        double* g = grad.head(c);
        for (int j = 0; j < model.dim; ++j) g[j] += (1.0 + alpha) * h[j];
    }
    return grad;
}

inline ModelWeights loss_gradient(const ModelWeights& model, const std::vector<Sample>& data, double alpha) {
    detail::check_model_data(model, data, "loss_gradient");
    std::vector<const Sample*> view;
    view.reserve(data.size());
    for (const Sample& s : data) view.push_back(&s);
    return loss_gradient(model, std::span<const Sample* const>(view), alpha);
}

// Mini-batch subgradient descent: local_iters passes, sampling without
// replacement within each pass. Deterministic given the stream.
inline ModelWeights local_train(ModelWeights model, const ClientDataset& data, const FlConfig& cfg, RngStream& rng) {
    detail::check_model_data(model, data.train, "local_train");
    std::vector<std::size_t> order(data.train.size());
    std::iota(order.begin(), order.end(), 0);

    std::vector<const Sample*> batch;
    for (int pass = 0; pass < cfg.local_iters; ++pass) {
        rng.shuffle(order);
        for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(cfg.batch_size)) {
            const std::size_t end = std::min(order.size(), start + static_cast<std::size_t>(cfg.batch_size));
            batch.clear();
            for (std::size_t k = start; k < end; ++k) batch.push_back(&data.train[order[k]]);
            const ModelWeights grad = loss_gradient(model, std::span<const Sample* const>(batch), cfg.reg_coeff);
            for (std::size_t i = 0; i < model.flat.size(); ++i) model.flat[i] -= cfg.learning_rate * grad.flat[i];
        }
    }
    for (double v : model.flat)
        if (!std::isfinite(v)) throw NumericError("local_train: non-finite weight after training");
    return model;
}

// Fraction of samples whose argmax head matches the label; ties resolve to
// the lowest class index.
inline double evaluate(const ModelWeights& model, const std::vector<Sample>& test) {
    detail::check_model_data(model, test, "evaluate");
    std::size_t correct = 0;
    for (const Sample& s : test) {
        int best = 0;
        double best_score = detail::head_score(model, 0, s.features);
        for (int c = 1; c < model.classes; ++c) {
            const double sc = detail::head_score(model, c, s.features);
            if (sc > best_score) {
                best_score = sc;
                best = c;
            }
        }
        if (best == s.label) ++correct;
    }
    return static_cast<double>(correct) / static_cast<double>(test.size());
}

} // namespace flpl
