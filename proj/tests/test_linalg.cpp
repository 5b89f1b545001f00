#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "flpl/adam.hpp"
#include "flpl/eig.hpp"
#include "flpl/error.hpp"
#include "flpl/mat.hpp"
#include "flpl/rng.hpp"

using namespace flpl;

namespace {

Mat random_mat(int rows, int cols, RngStream& rng, double lo = -1.0, double hi = 1.0) {
    Mat m(rows, cols);
    for (double& v : m.values()) v = rng.uniform(lo, hi);
    return m;
}

Mat random_symmetric(int n, RngStream& rng) {
    Mat m = random_mat(n, n, rng);
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) m(j, i) = m(i, j);
    return m;
}

double rel_frobenius_diff(const Mat& a, const Mat& b) {
    const double denom = std::max(frobenius_norm(b), 1e-30);
    return frobenius_norm(sub(a, b)) / denom;
}

} // namespace

// ---------------------------------------------------------------------------
// matmul
// ---------------------------------------------------------------------------

TEST(Matmul, IdentityLeavesInputUnchanged) {
    const Mat a(2, 2, {1, 2, 3, 4});
    const Mat out = matmul(Mat::identity(2), a);
    EXPECT_EQ(out.values(), a.values());
}

TEST(Matmul, AnnihilatingProduct) {
    const Mat a(2, 2, {1, 0, 0, 0});
    const Mat b(2, 2, {0, 0, 0, 1});
    const Mat out = matmul(a, b);
    for (double v : out.values()) EXPECT_EQ(v, 0.0);
}

TEST(Matmul, HandEvaluatedProduct) {
    // [[1,2],[3,4]] * [[5],[6]] = [[17],[39]]
    const Mat out = matmul(Mat(2, 2, {1, 2, 3, 4}), Mat(2, 1, {5, 6}));
    EXPECT_DOUBLE_EQ(out(0, 0), 17.0);
    EXPECT_DOUBLE_EQ(out(1, 0), 39.0);
}

TEST(Matmul, DimensionMismatchNamesBothShapes) {
    try {
        matmul(Mat(2, 3), Mat(2, 2));
        FAIL() << "expected ContractViolation";
    } catch (const ContractViolation& e) {
        EXPECT_NE(std::string(e.what()).find("2x3"), std::string::npos);
        EXPECT_NE(std::string(e.what()).find("2x2"), std::string::npos);
    }
}

TEST(Matmul, AssociativityOnRandomMatrices) {
    RngStream rng(42);
    for (int trial = 0; trial < 20; ++trial) {
        const Mat a = random_mat(5, 5, rng);
        const Mat b = random_mat(5, 5, rng);
        const Mat c = random_mat(5, 5, rng);
        EXPECT_LT(rel_frobenius_diff(matmul(matmul(a, b), c), matmul(a, matmul(b, c))), 1e-9);
    }
}

// ---------------------------------------------------------------------------
// cosine similarity / euclidean distance
// ---------------------------------------------------------------------------

TEST(CosineSimilarity, SpecExamples) {
    const std::vector<double> e1{1, 0}, e2{0, 1};
    EXPECT_DOUBLE_EQ(cosine_similarity(e1, e1), 1.0);
    EXPECT_DOUBLE_EQ(cosine_similarity(e1, e2), 0.0);
    const std::vector<double> u{1, 2}, v{2, 1};
    EXPECT_NEAR(cosine_similarity(u, v), 0.8, 1e-15);
}

TEST(CosineSimilarity, ZeroNormReturnsZeroAndCounts) {
    degenerate_similarity_count().store(0);
    const std::vector<double> zero{0, 0}, v{1, 2};
    EXPECT_DOUBLE_EQ(cosine_similarity(zero, v), 0.0);
    EXPECT_EQ(degenerate_similarity_count().load(), 1u);
}

TEST(CosineSimilarity, ScalingProperty) {
    RngStream rng(7);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<double> u(8);
        for (double& x : u) x = rng.uniform(-2, 2);
        const double c = rng.uniform(0.1, 5.0);
        std::vector<double> up(u), un(u);
        for (double& x : up) x *= c;
        for (double& x : un) x *= -c;
        EXPECT_NEAR(cosine_similarity(u, up), 1.0, 1e-12);
        EXPECT_NEAR(cosine_similarity(u, un), -1.0, 1e-12);
    }
}

TEST(EuclideanDistance, SpecExamples) {
    const std::vector<double> zero{0, 0};
    EXPECT_DOUBLE_EQ(euclidean_distance(zero, zero), 0.0);
    const std::vector<double> p{3, 4};
    EXPECT_DOUBLE_EQ(euclidean_distance(zero, p), 5.0);
    const std::vector<double> a{1, 1}, b{1, 2};
    EXPECT_DOUBLE_EQ(euclidean_distance(a, b), 1.0);
    EXPECT_DOUBLE_EQ(euclidean_distance(a, b), euclidean_distance(b, a));
    const std::vector<double> longer{1, 2, 3};
    EXPECT_THROW(euclidean_distance(a, longer), ContractViolation);
}

// ---------------------------------------------------------------------------
// sym_eig / truncate_basis
// ---------------------------------------------------------------------------

TEST(SymEig, IdentityHasUnitEigenvalues) {
    const EigResult e = sym_eig(Mat::identity(3));
    for (double v : e.values) EXPECT_NEAR(v, 1.0, 1e-12);
    // columns orthonormal
    const Mat gram = matmul(transpose(e.vectors), e.vectors);
    EXPECT_LT(rel_frobenius_diff(gram, Mat::identity(3)), 1e-12);
}

TEST(SymEig, DiagonalMatrix) {
    const EigResult e = sym_eig(Mat(2, 2, {2, 0, 0, 1}));
    EXPECT_NEAR(e.values[0], 2.0, 1e-12);
    EXPECT_NEAR(e.values[1], 1.0, 1e-12);
    EXPECT_NEAR(e.vectors(0, 0), 1.0, 1e-12);
    EXPECT_NEAR(e.vectors(1, 1), 1.0, 1e-12);
}

TEST(SymEig, TwoByTwoCharacteristicPolynomial) {
    // [[1,-1],[-1,1]] has eigenvalues 2 and 0, dominant vector [1,-1]/sqrt(2).
    const EigResult e = sym_eig(Mat(2, 2, {1, -1, -1, 1}));
    EXPECT_NEAR(e.values[0], 2.0, 1e-12);
    EXPECT_NEAR(e.values[1], 0.0, 1e-12);
    const double s = 1.0 / std::sqrt(2.0);
    EXPECT_NEAR(e.vectors(0, 0), s, 1e-12);
    EXPECT_NEAR(e.vectors(1, 0), -s, 1e-12);
}

TEST(SymEig, NonSquareRejected) { EXPECT_THROW(sym_eig(Mat(2, 3)), ContractViolation); }

TEST(SymEig, ReconstructionOnRandomSymmetric) {
    RngStream rng(123);
    for (int n : {5, 40, 300}) {
        const Mat m = random_symmetric(n, rng);
        const EigResult e = sym_eig(m);
        Mat lam(n, n);
        for (int i = 0; i < n; ++i) lam(i, i) = e.values[static_cast<std::size_t>(i)];
        const Mat rebuilt = matmul(matmul(e.vectors, lam), transpose(e.vectors));
        EXPECT_LT(rel_frobenius_diff(rebuilt, m), 1e-6) << "n=" << n;
        const Mat gram = matmul(transpose(e.vectors), e.vectors);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                EXPECT_NEAR(gram(i, j), i == j ? 1.0 : 0.0, 1e-8);
    }
}

TEST(SymEig, EigenvectorSignIsDeterministic) {
    RngStream rng(5);
    const Mat m = random_symmetric(12, rng);
    const EigResult e = sym_eig(m);
    for (int c = 0; c < 12; ++c) {
        double best = 0.0, at = 0.0;
        for (int r = 0; r < 12; ++r)
            if (std::abs(e.vectors(r, c)) > best) {
                best = std::abs(e.vectors(r, c));
                at = e.vectors(r, c);
            }
        EXPECT_GT(at, 0.0) << "column " << c;
    }
}

TEST(TruncateBasis, SpecExamples) {
    const EigResult id3 = sym_eig(Mat::identity(3));
    const Mat two = truncate_basis(id3, 2);
    EXPECT_EQ(two.rows(), 3);
    EXPECT_EQ(two.cols(), 2);
    EXPECT_LT(rel_frobenius_diff(matmul(transpose(two), two), Mat::identity(2)), 1e-8);

    const Mat one = truncate_basis(sym_eig(Mat(2, 2, {1, -1, -1, 1})), 1);
    const double s = 1.0 / std::sqrt(2.0);
    EXPECT_NEAR(one(0, 0), s, 1e-12);
    EXPECT_NEAR(one(1, 0), -s, 1e-12);

    RngStream rng(9);
    const EigResult full = sym_eig(random_symmetric(6, rng));
    const Mat all = truncate_basis(full, 6);
    EXPECT_LT(rel_frobenius_diff(matmul(transpose(all), all), Mat::identity(6)), 1e-8);

    EXPECT_THROW(truncate_basis(full, 7), ContractViolation);
}

// ---------------------------------------------------------------------------
// adam_step
// ---------------------------------------------------------------------------

TEST(AdamStep, ZeroGradientLeavesEverythingUntouched) {
    const Mat param(2, 2, {1, -2, 3, 0.5});
    AdamState state = AdamState::for_param(param, 0.01);
    auto [next, next_state] = adam_step(param, Mat(2, 2), state);
    EXPECT_EQ(next.values(), param.values());
    for (double v : next_state.first_moment.values()) EXPECT_EQ(v, 0.0);
    for (double v : next_state.second_moment.values()) EXPECT_EQ(v, 0.0);
    EXPECT_EQ(next_state.step_count, 1);
}

TEST(AdamStep, FirstStepMovesByLearningRate) {
    const Mat param(1, 1, {0.0});
    AdamState state = AdamState::for_param(param, 0.01);
    auto [next, ignored] = adam_step(param, Mat(1, 1, {1.0}), state);
    EXPECT_NEAR(next(0, 0), -0.01, 1e-6);
}

TEST(AdamStep, OppositeGradientsCancel) {
    Mat param(1, 1, {0.0});
    AdamState state = AdamState::for_param(param, 0.01);
    std::tie(param, state) = adam_step(param, Mat(1, 1, {1.0}), state);
    std::tie(param, state) = adam_step(param, Mat(1, 1, {-1.0}), state);
    EXPECT_LT(std::abs(param(0, 0)), 0.01);
}

TEST(AdamStep, ShapeMismatchRejected) {
    const Mat param(2, 2);
    AdamState state = AdamState::for_param(param, 0.01);
    EXPECT_THROW(adam_step(param, Mat(2, 3), state), ContractViolation);
}

// Independent scalar oracle: the Adam recurrences written out longhand.
TEST(AdamStep, MatchesScalarOracle) {
    RngStream rng(77);
    const double lr = 0.01, b1 = 0.9, b2 = 0.999, eps = 1e-8;
    double oracle_p = rng.uniform(-1, 1), oracle_m = 0.0, oracle_v = 0.0;

    Mat param(1, 1, {oracle_p});
    AdamState state = AdamState::for_param(param, lr);
    for (int t = 1; t <= 100; ++t) {
        const double g = rng.uniform(-2, 2);
        oracle_m = b1 * oracle_m + (1 - b1) * g;
        oracle_v = b2 * oracle_v + (1 - b2) * g * g;
        const double mhat = oracle_m / (1 - std::pow(b1, t));
        const double vhat = oracle_v / (1 - std::pow(b2, t));
        oracle_p -= lr * mhat / (std::sqrt(vhat) + eps);

        std::tie(param, state) = adam_step(param, Mat(1, 1, {g}), state);
        ASSERT_NEAR(param(0, 0), oracle_p, 1e-12) << "step " << t;
    }
}

TEST(AdamStep, SecondMomentStaysNonNegative) {
    RngStream rng(3);
    Mat param(3, 2);
    AdamState state = AdamState::for_param(param, 0.01);
    for (int t = 0; t < 50; ++t) {
        Mat grad(3, 2);
        for (double& v : grad.values()) v = rng.uniform(-5, 5);
        std::tie(param, state) = adam_step(param, grad, state);
        for (double v : state.second_moment.values()) ASSERT_GE(v, 0.0);
    }
}
