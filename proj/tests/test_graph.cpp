#include "support.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <set>

using namespace simlab;
using simlab::testing::chain;
using simlab::testing::two_node;

TEST(Graph, TwoNodeMatrices) {
    const auto gm = build_matrices(two_node());
    EXPECT_NEAR(gm.q(0), 1.0, 1e-15);
    EXPECT_NEAR(gm.q(1), 2.0, 1e-15);
    EXPECT_NEAR(gm.p_matrix(0, 0), 1.0, 1e-15);
    EXPECT_NEAR(gm.p_matrix(1, 1), 0.5, 1e-15);
    EXPECT_EQ(gm.p_matrix(0, 1), 0.0);
    EXPECT_NEAR(gm.q_matrix(0, 0), 2.0, 1e-15);
    EXPECT_NEAR(gm.q_matrix(0, 1), -0.5, 1e-15);
    EXPECT_NEAR(gm.q_matrix(1, 0), -0.5, 1e-15);
    EXPECT_NEAR(gm.q_matrix(1, 1), 1.0, 1e-15);

    // Eigenvalues of [[2,-1/2],[-1/2,1]] are (3 +- sqrt 2)/2.
    const Vector ev = symmetric_eigenvalues(gm.q_matrix);
    EXPECT_NEAR(ev(0), (3.0 - std::sqrt(2.0)) / 2.0, 1e-14);
    EXPECT_NEAR(ev(1), (3.0 + std::sqrt(2.0)) / 2.0, 1e-14);
}

TEST(Graph, SinglePinnedFollower) {
    DirectedTopology t;
    t.adjacency = Matrix::Zero(1, 1);
    t.pinning = Vector::Ones(1);
    const auto gm = build_matrices(t);
    EXPECT_EQ(gm.q(0), 1.0);
    EXPECT_EQ(gm.p_matrix(0, 0), 1.0);
    EXPECT_EQ(gm.q_matrix(0, 0), 2.0);
}

TEST(Graph, FourChainForwardSubstitution) {
    const auto gm = build_matrices(chain(4));
    for (int i = 0; i < 4; ++i) {
        EXPECT_NEAR(gm.q(i), i + 1.0, 1e-14);
        EXPECT_NEAR(gm.p_matrix(i, i), 1.0 / (i + 1.0), 1e-15);
    }
}

TEST(Graph, SingularWhenFollowerIsolated) {
    auto t = two_node();
    t.adjacency.setZero();
    try {
        build_matrices(t);
        FAIL() << "expected SingularSystem";
    } catch (const SingularSystem& e) {
        EXPECT_NE(std::string(e.what()).find("2"), std::string::npos);
    }
}

TEST(Graph, ShapeValidation) {
    auto t = two_node();
    t.pinning.setZero();
    EXPECT_THROW(t.validate_shape(), ValidationError);

    t = two_node();
    t.adjacency(0, 0) = 1.0;
    EXPECT_THROW(t.validate_shape(), ValidationError);

    t = two_node();
    t.adjacency(1, 0) = -1.0;
    EXPECT_THROW(t.validate_shape(), ValidationError);

    t = two_node();
    t.adjacency = Matrix::Zero(3, 3);
    EXPECT_THROW(t.validate_shape(), ValidationError);
}

TEST(Graph, Reachability) {
    auto rep = check_reachability(two_node());
    EXPECT_TRUE(rep.all_reachable);
    EXPECT_TRUE(rep.unreachable.empty());

    auto iso = two_node();
    iso.adjacency.setZero();
    rep = check_reachability(iso);
    EXPECT_FALSE(rep.all_reachable);
    ASSERT_EQ(rep.unreachable.size(), 1u);
    EXPECT_EQ(rep.unreachable[0], 2u);

    EXPECT_TRUE(check_reachability(chain(4)).all_reachable);

    // Edge direction matters: 2 -> 1 does not let the leader reach 2.
    auto reversed = two_node();
    reversed.adjacency.setZero();
    reversed.adjacency(0, 1) = 1.0;
    EXPECT_FALSE(check_reachability(reversed).all_reachable);
}

// Reachability by transitive closure (Floyd-Warshall style), independent of the BFS.
static std::set<std::size_t> unreachable_by_closure(const DirectedTopology& t) {
    const auto n = static_cast<Eigen::Index>(t.size());
    Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> reach(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j) reach(i, j) = (i == j) || t.adjacency(j, i) > 0.0;  // j -> i
    for (Eigen::Index k = 0; k < n; ++k)
        for (Eigen::Index i = 0; i < n; ++i)
            for (Eigen::Index j = 0; j < n; ++j) reach(i, j) = reach(i, j) || (reach(i, k) && reach(k, j));
    std::set<std::size_t> out;
    for (Eigen::Index j = 0; j < n; ++j) {
        bool hit = false;
        for (Eigen::Index i = 0; i < n; ++i) hit = hit || (t.pinning(i) > 0.0 && reach(i, j));
        if (!hit) out.insert(static_cast<std::size_t>(j) + 1);
    }
    return out;
}

TEST(Graph, ReachabilityMatchesClosureOnRandomGraphs) {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> coin(0.0, 1.0);
    for (int trial = 0; trial < 300; ++trial) {
        const int n = 1 + static_cast<int>(coin(rng) * 8);
        DirectedTopology t;
        t.adjacency = Matrix::Zero(n, n);
        t.pinning = Vector::Zero(n);
        for (int i = 0; i < n; ++i) {
            if (coin(rng) < 0.2) t.pinning(i) = 1.0;
            for (int j = 0; j < n; ++j)
                if (i != j && coin(rng) < 0.15) t.adjacency(i, j) = 1.0;
        }
        const auto rep = check_reachability(t);
        const auto oracle = unreachable_by_closure(t);
        EXPECT_EQ(std::set<std::size_t>(rep.unreachable.begin(), rep.unreachable.end()), oracle);
        EXPECT_EQ(rep.all_reachable, oracle.empty());
    }
}

TEST(Graph, SingularValueExamples) {
    auto s = singular_values(Matrix::Identity(2, 2));
    ASSERT_EQ(s.size(), 2u);
    EXPECT_NEAR(s[0], 1.0, 1e-15);
    EXPECT_NEAR(s[1], 1.0, 1e-15);

    Matrix m(2, 2);
    m << 1, 0, -1, 1;
    // Gram matrix [[2,-1],[-1,1]]: eigenvalues (3 +- sqrt 5)/2 by the quadratic formula.
    s = singular_values(m);
    EXPECT_NEAR(s[0], std::sqrt((3.0 + std::sqrt(5.0)) / 2.0), 1e-14);
    EXPECT_NEAR(s[1], std::sqrt((3.0 - std::sqrt(5.0)) / 2.0), 1e-14);
    EXPECT_NEAR(s[0], 1.6180339887, 1e-9);
    EXPECT_NEAR(s[1], 0.6180339887, 1e-9);

    s = singular_values(Matrix::Zero(2, 2));
    EXPECT_EQ(s[0], 0.0);
    EXPECT_EQ(s[1], 0.0);
}

TEST(Graph, SingularValueProductIsAbsDeterminant) {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    for (int n = 1; n <= 6; ++n) {
        for (int trial = 0; trial < 20; ++trial) {
            Matrix m(n, n);
            for (auto& v : m.reshaped()) v = u(rng);
            double prod = 1.0;
            for (double s : singular_values(m)) prod *= s;
            EXPECT_NEAR(prod, std::abs(m.determinant()), 1e-8);
        }
    }
}

TEST(Graph, CertificateHoldsOnRandomReachableTopologies) {
    std::mt19937_64 rng(2024);
    for (int trial = 0; trial < 200; ++trial) {
        const auto t = simlab::testing::random_reachable(rng, 10);
        ASSERT_TRUE(check_reachability(t).all_reachable);
        const auto gm = build_matrices(t);
        EXPECT_LT(gm.q_residual, 1e-12);
        EXPECT_LT((gm.lb * gm.q - Vector::Ones(gm.q.rows())).lpNorm<Eigen::Infinity>(), 1e-12);
        EXPECT_TRUE((gm.q.array() > 0.0).all());
        EXPECT_TRUE(is_exactly_symmetric(gm.q_matrix));
        EXPECT_TRUE(is_exactly_symmetric(gm.p_matrix));
        EXPECT_GT(symmetric_eigenvalues(gm.p_matrix).minCoeff(), kPositiveDefiniteThreshold);
    }
}

// With D = diag(q), D Q D = (L+B) D + D (L+B)^T is a symmetric Z-matrix whose
// row sums are 1 + q_i c_i, c = column sums of L+B. Positive row sums make it
// diagonally dominant, hence Q positive definite.
TEST(Graph, QPositiveDefiniteWhenScaledRowSumsArePositive) {
    std::mt19937_64 rng(77);
    int covered = 0;
    for (int trial = 0; trial < 400; ++trial) {
        const auto gm = build_matrices(simlab::testing::random_reachable(rng, 10));
        const Vector colsum = gm.lb.colwise().sum().transpose();
        const Vector rows = Vector::Ones(gm.q.rows()) + gm.q.cwiseProduct(colsum);
        if (rows.minCoeff() <= 0.0) continue;
        ++covered;
        EXPECT_GT(symmetric_eigenvalues(gm.q_matrix).minCoeff(), kPositiveDefiniteThreshold);
    }
    EXPECT_GT(covered, 20);
}

TEST(Graph, QPositiveDefiniteOnUndirectedTopologies) {
    std::mt19937_64 rng(99);
    for (int trial = 0; trial < 200; ++trial) {
        const auto gm = build_matrices(simlab::testing::random_undirected(rng, 10));
        EXPECT_GT(symmetric_eigenvalues(gm.q_matrix).minCoeff(), kPositiveDefiniteThreshold);
    }
}

TEST(Graph, QPositiveDefiniteOnChains) {
    for (int n = 1; n <= 10; ++n) {
        const auto gm = build_matrices(chain(n));
        EXPECT_GT(symmetric_eigenvalues(gm.q_matrix).minCoeff(), kPositiveDefiniteThreshold) << n;
    }
}

// Strongly connected, unit weights, one pin: q = (9, 6, 8) and
// Q = [[2/9, -1/6, -17/72], [-1/6, 1, -7/24], [-17/72, -7/24, 1/2]],
// det Q = -1/2592 (exact rational arithmetic), so Q is indefinite.
TEST(Graph, StrongConnectivityAloneDoesNotMakeQPositiveDefinite) {
    DirectedTopology t;
    t.adjacency = Matrix::Zero(3, 3);
    t.adjacency(0, 2) = 1.0;
    t.adjacency(1, 0) = 1.0;
    t.adjacency(1, 2) = 1.0;
    t.adjacency(2, 0) = 1.0;
    t.adjacency(2, 1) = 1.0;
    t.pinning = Vector::Zero(3);
    t.pinning(1) = 1.0;
    const auto gm = build_matrices(t);
    EXPECT_NEAR(gm.q(0), 9.0, 1e-12);
    EXPECT_NEAR(gm.q(1), 6.0, 1e-12);
    EXPECT_NEAR(gm.q(2), 8.0, 1e-12);
    EXPECT_NEAR(gm.q_matrix(0, 0), 2.0 / 9.0, 1e-14);
    EXPECT_NEAR(gm.q_matrix(0, 2), -17.0 / 72.0, 1e-14);
    EXPECT_NEAR(gm.q_matrix(1, 2), -7.0 / 24.0, 1e-14);
    EXPECT_NEAR(gm.q_matrix.determinant(), -1.0 / 2592.0, 1e-14);
    EXPECT_LT(symmetric_eigenvalues(gm.q_matrix).minCoeff(), 0.0);
}

TEST(Graph, QIsAssembledSymmetricallyElementwise) {
    DirectedTopology t;
    t.adjacency = Matrix::Zero(3, 3);
    t.adjacency(1, 0) = 0.3;
    t.adjacency(2, 1) = 1.7;
    t.adjacency(0, 2) = 0.9;
    t.pinning = Vector::Zero(3);
    t.pinning(0) = 0.7;
    const auto gm = build_matrices(t);
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) EXPECT_EQ(gm.q_matrix(i, j), gm.q_matrix(j, i));
}

TEST(Graph, DerivedMatricesAgreeWithDefinitions) {
    const auto gm = build_matrices(chain(4));
    EXPECT_EQ(gm.laplacian, gm.in_degree - gm.adjacency);
    EXPECT_EQ(gm.lb, gm.laplacian + gm.pin_matrix);
    EXPECT_EQ(gm.db, gm.in_degree + gm.pin_matrix);
    EXPECT_TRUE((gm.laplacian.rowwise().sum().array().abs() < 1e-15).all());
}
