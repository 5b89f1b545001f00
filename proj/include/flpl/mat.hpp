#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "flpl/error.hpp"

namespace flpl {

// Dense row-major matrix of doubles. All kernels below use fixed loop
// orders so results are reproducible bit-for-bit regardless of thread count.
class Mat {
public:
    Mat() = default;

    Mat(int rows, int cols) : rows_(rows), cols_(cols), data_(static_cast<std::size_t>(rows) * cols, 0.0) {
        detail::require(rows > 0 && cols > 0, "Mat: dimensions must be positive, got " + shape_str(rows, cols));
    }

    Mat(int rows, int cols, std::vector<double> data) : rows_(rows), cols_(cols), data_(std::move(data)) {
        detail::require(rows > 0 && cols > 0, "Mat: dimensions must be positive, got " + shape_str(rows, cols));
        detail::require(data_.size() == static_cast<std::size_t>(rows) * cols,
                        "Mat: data length " + std::to_string(data_.size()) + " does not match " + shape_str(rows, cols));
    }

    static Mat identity(int n) {
        Mat m(n, n);
        for (int i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }

    int rows() const { return rows_; }
    int cols() const { return cols_; }
    std::size_t size() const { return data_.size(); }

    double& operator()(int r, int c) { return data_[static_cast<std::size_t>(r) * cols_ + c]; }
    double operator()(int r, int c) const { return data_[static_cast<std::size_t>(r) * cols_ + c]; }

    const std::vector<double>& values() const { return data_; }
    std::vector<double>& values() { return data_; }
    const double* data() const { return data_.data(); }
    double* data() { return data_.data(); }

    std::span<const double> row(int r) const {
        return std::span<const double>(data_.data() + static_cast<std::size_t>(r) * cols_, static_cast<std::size_t>(cols_));
    }

    bool same_shape(const Mat& other) const { return rows_ == other.rows_ && cols_ == other.cols_; }

    std::string shape() const { return shape_str(rows_, cols_); }

    static std::string shape_str(int r, int c) { return std::to_string(r) + "x" + std::to_string(c); }

private:
    int rows_ = 0;
    int cols_ = 0;
    std::vector<double> data_;
};

inline Mat matmul(const Mat& a, const Mat& b) {
    detail::require(a.cols() == b.rows(), "matmul: inner dimensions differ, " + a.shape() + " vs " + b.shape());
    Mat out(a.rows(), b.cols());
    // i-k-j order: streams over b rows, accumulation order fixed.
    for (int i = 0; i < a.rows(); ++i) {
        double* out_row = out.data() + static_cast<std::size_t>(i) * out.cols();
        for (int k = 0; k < a.cols(); ++k) {
            const double aik = a(i, k);
            if (aik == 0.0) continue;
            const double* b_row = b.data() + static_cast<std::size_t>(k) * b.cols();
            for (int j = 0; j < b.cols(); ++j) out_row[j] += aik * b_row[j];
        }
    }
    return out;
}

inline Mat transpose(const Mat& a) {
    Mat out(a.cols(), a.rows());
    for (int i = 0; i < a.rows(); ++i)
        for (int j = 0; j < a.cols(); ++j) out(j, i) = a(i, j);
    return out;
}

inline Mat add(const Mat& a, const Mat& b) {
    detail::require(a.same_shape(b), "add: shape mismatch, " + a.shape() + " vs " + b.shape());
    Mat out = a;
    for (std::size_t i = 0; i < out.size(); ++i) out.values()[i] += b.values()[i];
    return out;
}

inline Mat sub(const Mat& a, const Mat& b) {
    detail::require(a.same_shape(b), "sub: shape mismatch, " + a.shape() + " vs " + b.shape());
    Mat out = a;
    for (std::size_t i = 0; i < out.size(); ++i) out.values()[i] -= b.values()[i];
    return out;
}

inline Mat scale(const Mat& a, double s) {
    Mat out = a;
    for (double& v : out.values()) v *= s;
    return out;
}

inline Mat hadamard(const Mat& a, const Mat& b) {
    detail::require(a.same_shape(b), "hadamard: shape mismatch, " + a.shape() + " vs " + b.shape());
    Mat out = a;
    for (std::size_t i = 0; i < out.size(); ++i) out.values()[i] *= b.values()[i];
    return out;
}

template <typename F>
inline Mat map(const Mat& a, F&& f) {
    Mat out = a;
    for (double& v : out.values()) v = f(v);
    return out;
}

inline double frobenius_norm(const Mat& a) {
    double s = 0.0;
    for (double v : a.values()) s += v * v;
    return std::sqrt(s);
}

inline bool all_finite(const Mat& a) {
    for (double v : a.values())
        if (!std::isfinite(v)) return false;
    return true;
}

// Count of zero-norm vectors seen by cosine_similarity since the last reset.
// Similarity of a zero vector is reported as 0 instead of NaN; the event is
// counted here so runs can surface it in diagnostics.
inline std::atomic<std::uint64_t>& degenerate_similarity_count() {
    static std::atomic<std::uint64_t> count{0};
    return count;
}

inline double cosine_similarity(std::span<const double> u, std::span<const double> v) {
    detail::require(u.size() == v.size(), "cosine_similarity: length mismatch, " + std::to_string(u.size()) +
                                              " vs " + std::to_string(v.size()));
    double dot = 0.0, nu = 0.0, nv = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        dot += u[i] * v[i];
        nu += u[i] * u[i];
        nv += v[i] * v[i];
    }
    if (nu == 0.0 || nv == 0.0) {
        degenerate_similarity_count().fetch_add(1, std::memory_order_relaxed);
        return 0.0;
    }
    return std::clamp(dot / (std::sqrt(nu) * std::sqrt(nv)), -1.0, 1.0);
}

inline double euclidean_distance(std::span<const double> u, std::span<const double> v) {
    detail::require(u.size() == v.size(), "euclidean_distance: length mismatch, " + std::to_string(u.size()) +
                                              " vs " + std::to_string(v.size()));
    double s = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        const double d = u[i] - v[i];
        s += d * d;
    }
    return std::sqrt(s);
}

} // namespace flpl
