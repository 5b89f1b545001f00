#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "flpl/error.hpp"
#include "flpl/mat.hpp"

namespace flpl {

// Eigendecomposition of a symmetric matrix. Eigenpairs are sorted by
// descending |eigenvalue| so a prefix of columns doubles as a truncated SVD
// basis (for symmetric inputs the two factorizations coincide up to signs).
struct EigResult {
    std::vector<double> values; // descending by absolute value
    Mat vectors;                // orthonormal columns, column i pairs with values[i]
};

inline EigResult sym_eig(const Mat& m) {
    detail::require(m.rows() == m.cols(), "sym_eig: matrix must be square, got " + m.shape());
    const int n = m.rows();

    // Symmetrize to wash out representation noise before factorizing.
    Eigen::MatrixXd sym(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) sym(i, j) = 0.5 * (m(i, j) + m(j, i));

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(sym);
    if (solver.info() != Eigen::Success) throw NumericError("sym_eig: eigensolver failed to converge");

    std::vector<int> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    const auto& vals = solver.eigenvalues();
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return std::abs(vals(a)) > std::abs(vals(b)); });

    EigResult out;
    out.values.resize(static_cast<std::size_t>(n));
    out.vectors = Mat(n, n);
    for (int c = 0; c < n; ++c) {
        const int src = order[static_cast<std::size_t>(c)];
        out.values[static_cast<std::size_t>(c)] = vals(src);
        // Fix the sign so the largest-magnitude component is positive.
        int pivot = 0;
        double best = 0.0;
        for (int r = 0; r < n; ++r) {
            const double a = std::abs(solver.eigenvectors()(r, src));
            if (a > best) {
                best = a;
                pivot = r;
            }
        }
        const double sign = solver.eigenvectors()(pivot, src) < 0.0 ? -1.0 : 1.0;
        for (int r = 0; r < n; ++r) out.vectors(r, c) = sign * solver.eigenvectors()(r, src);
    }
    return out;
}

// First k columns of the eigenbasis (the k largest-|eigenvalue| directions).
inline Mat truncate_basis(const EigResult& e, int k) {
    const int n = e.vectors.rows();
    detail::require(k >= 1 && k <= n,
                    "truncate_basis: k=" + std::to_string(k) + " out of range for " + std::to_string(n) + " eigenpairs");
    Mat out(n, k);
    for (int r = 0; r < n; ++r)
        for (int c = 0; c < k; ++c) out(r, c) = e.vectors(r, c);
    return out;
}

} // namespace flpl
