#pragma once

#include <algorithm>
#include <numeric>
#include <vector>

#include "flpl/error.hpp"
#include "flpl/mat.hpp"
#include "flpl/svm.hpp"

namespace flpl {

// Correlation graph over selected model parameters: one node per selected
// coordinate, one feature column per eavesdropped benign model. Edges carry
// the cosine similarity of two coordinates' values across the models.
struct ParameterGraph {
    Mat adjacency;               // M x M cosine similarities, unit diagonal
    Mat node_features;           // M x n_models, row m = values of coordinate m
    std::vector<int> param_index; // the M flat model coordinates behind the nodes
};

// Pick the model coordinates with the highest variance across the
// eavesdropped models; ties fall to the lower index. The returned indices
// are sorted ascending.
inline std::vector<int> select_parameters(const std::vector<ModelWeights>& models, int count) {
    detail::require(!models.empty(), "select_parameters: no models");
    const int total = models[0].param_count();
    if (count > total)
        throw ConfigError("select_parameters: requested " + std::to_string(count) + " of " + std::to_string(total) +
                          " parameters");
    detail::require(count >= 1, "select_parameters: count must be positive");

    const double inv_n = 1.0 / static_cast<double>(models.size());
    std::vector<double> variance(static_cast<std::size_t>(total), 0.0);
    for (int p = 0; p < total; ++p) {
        double mean = 0.0;
        for (const ModelWeights& m : models) mean += m.flat[static_cast<std::size_t>(p)];
        mean *= inv_n;
        double var = 0.0;
        for (const ModelWeights& m : models) {
            const double d = m.flat[static_cast<std::size_t>(p)] - mean;
            var += d * d;
        }
        variance[static_cast<std::size_t>(p)] = var * inv_n;
    }

    std::vector<int> order(static_cast<std::size_t>(total));
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        return variance[static_cast<std::size_t>(a)] > variance[static_cast<std::size_t>(b)];
    });
    std::vector<int> picked(order.begin(), order.begin() + count);
    std::sort(picked.begin(), picked.end());
    return picked;
}

inline ParameterGraph build_graph(const std::vector<ModelWeights>& models, const std::vector<int>& param_index) {
    detail::require(!models.empty(), "build_graph: no models");
    const int node_count = static_cast<int>(param_index.size());
    const int model_count = static_cast<int>(models.size());

    ParameterGraph g;
    g.param_index = param_index;
    g.node_features = Mat(node_count, model_count);
    for (int m = 0; m < node_count; ++m)
        for (int i = 0; i < model_count; ++i)
            g.node_features(m, i) = models[static_cast<std::size_t>(i)].flat[static_cast<std::size_t>(param_index[static_cast<std::size_t>(m)])];

    g.adjacency = Mat(node_count, node_count);
    for (int m = 0; m < node_count; ++m) {
        g.adjacency(m, m) = 1.0; // self-similarity, kept even for zero rows
        for (int k = m + 1; k < node_count; ++k) {
            const double sim = cosine_similarity(g.node_features.row(m), g.node_features.row(k));
            g.adjacency(m, k) = sim;
            g.adjacency(k, m) = sim;
        }
    }
    return g;
}

} // namespace flpl
