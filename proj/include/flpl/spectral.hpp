#pragma once

#include <string>
#include <vector>

#include "flpl/eig.hpp"
#include "flpl/error.hpp"
#include "flpl/graph.hpp"
#include "flpl/mat.hpp"
#include "flpl/svm.hpp"

namespace flpl {

// Combinatorial Laplacian: diag(row sums) - A. Rows sum to zero by
// construction.
inline Mat laplacian(const Mat& adjacency) {
    detail::require(adjacency.rows() == adjacency.cols(), "laplacian: adjacency must be square");
    const int n = adjacency.rows();
    Mat out(n, n);
    for (int i = 0; i < n; ++i) {
        double deg = 0.0;
        for (int j = 0; j < n; ++j) {
            deg += adjacency(i, j);
            out(i, j) = -adjacency(i, j);
        }
        out(i, i) += deg;
    }
    return out;
}

// Move the node features into the spectral basis of the benign graph's
// Laplacian, then re-synthesize them under the basis of the adversarially
// reconstructed graph. With adjacency_hat equal to the benign adjacency and
// a full-rank basis this is the identity; truncation plus the perturbed
// graph is what scrambles the features. Returns one row per eavesdropped
// model (the transpose of the reconstructed feature matrix).
inline Mat spectral_transplant(const ParameterGraph& g, const Mat& adjacency_hat, int rank) {
    const int nodes = g.adjacency.rows();
    if (rank > nodes)
        throw ConfigError("spectral_transplant: rank " + std::to_string(rank) + " exceeds node count " +
                          std::to_string(nodes));
    detail::require(rank >= 1, "spectral_transplant: rank must be positive");
    detail::require(adjacency_hat.rows() == nodes && adjacency_hat.cols() == nodes,
                    "spectral_transplant: reconstructed adjacency shape mismatch");

    const Mat basis = truncate_basis(sym_eig(laplacian(g.adjacency)), rank);
    const Mat spectral_coords = matmul(transpose(basis), g.node_features); // rank x n_models
    const Mat basis_hat = truncate_basis(sym_eig(laplacian(adjacency_hat)), rank);
    const Mat features_hat = matmul(basis_hat, spectral_coords); // nodes x n_models
    if (!all_finite(features_hat)) throw NumericError("spectral_transplant: non-finite reconstructed features");
    return transpose(features_hat);
}

// Overwrite the selected coordinates of the current global model with one
// reconstructed feature row; all other coordinates stay untouched.
inline ModelWeights assemble_malicious(const Mat& reconstructed_rows, int row, const GlobalModel& base,
                                       const std::vector<int>& param_index) {
    detail::require(row >= 0 && row < reconstructed_rows.rows(),
                    "assemble_malicious: row " + std::to_string(row) + " out of range for " +
                        std::to_string(reconstructed_rows.rows()) + " rows");
    detail::require(static_cast<int>(param_index.size()) == reconstructed_rows.cols(),
                    "assemble_malicious: index map length does not match feature width");

    ModelWeights out = base.weights;
    for (std::size_t m = 0; m < param_index.size(); ++m) {
        const int p = param_index[m];
        detail::require(p >= 0 && p < out.param_count(),
                        "assemble_malicious: parameter index " + std::to_string(p) + " out of range");
        out.flat[static_cast<std::size_t>(p)] = reconstructed_rows(row, static_cast<int>(m));
    }
    return out;
}

} // namespace flpl
