#pragma once

// Directed communication topology with leader pinning, and the matrices
// derived from it: Laplacian, pinning matrix, q = (L+B)^{-1} 1, the diagonal
// weight P = diag(1/q) and Q = P(L+B) + (L+B)^T P.

#include "simlab/errors.hpp"
#include "simlab/linalg.hpp"

#include <fmt/format.h>

#include <cstddef>
#include <deque>
#include <vector>

namespace simlab {

/// Condition number at or above which L+B is treated as singular.
inline constexpr double kSingularConditionThreshold = 1e12;
/// Minimum eigenvalue a matrix must exceed to count as positive definite.
inline constexpr double kPositiveDefiniteThreshold = 1e-10;

/// Followers 0..N-1. adjacency(i, j) > 0 means follower i receives from j.
struct DirectedTopology {
    Matrix adjacency;
    Vector pinning;

    std::size_t size() const { return static_cast<std::size_t>(pinning.size()); }

    /// Throws ValidationError naming the first violated invariant.
    /// Reachability is checked separately (check_reachability).
    void validate_shape() const {
        const auto n = pinning.size();
        if (n < 1) throw ValidationError("graph.DirectedTopology: need at least one follower (N >= 1)");
        if (adjacency.rows() != n || adjacency.cols() != n)
            throw ValidationError(fmt::format(
                "graph.DirectedTopology: adjacency must be {}x{} to match the pinning vector, got {}x{}",
                n, n, adjacency.rows(), adjacency.cols()));
        if (!adjacency.allFinite() || !pinning.allFinite())
            throw ValidationError("graph.DirectedTopology: adjacency and pinning must be finite");
        if ((adjacency.array() < 0.0).any())
            throw ValidationError("graph.DirectedTopology: adjacency entries must be nonnegative");
        if ((pinning.array() < 0.0).any())
            throw ValidationError("graph.DirectedTopology: pinning gains must be nonnegative");
        for (Eigen::Index i = 0; i < n; ++i)
            if (adjacency(i, i) != 0.0)
                throw ValidationError(fmt::format(
                    "graph.DirectedTopology: no self-loops (diagonal of A must be zero), a[{0}][{0}] = {1}",
                    i + 1, adjacency(i, i)));
        if (!(pinning.array() > 0.0).any())
            throw ValidationError("graph.DirectedTopology: at least one pinning gain b_i > 0 (leader must reach a follower)");
    }
};

struct ReachabilityReport {
    bool all_reachable = false;
    /// 1-based follower indices that no pinned follower reaches.
    std::vector<std::size_t> unreachable;
};

/// Breadth-first search from the pinned followers along information flow
/// (j -> i whenever a_ij > 0).
inline ReachabilityReport check_reachability(const DirectedTopology& topo) {
    const auto n = topo.size();
    std::vector<bool> seen(n, false);
    std::deque<std::size_t> frontier;
    for (std::size_t i = 0; i < n; ++i) {
        if (topo.pinning(static_cast<Eigen::Index>(i)) > 0.0) {
            seen[i] = true;
            frontier.push_back(i);
        }
    }
    while (!frontier.empty()) {
        const auto j = frontier.front();
        frontier.pop_front();
        for (std::size_t i = 0; i < n; ++i) {
            if (!seen[i] && topo.adjacency(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) > 0.0) {
                seen[i] = true;
                frontier.push_back(i);
            }
        }
    }
    ReachabilityReport report;
    for (std::size_t i = 0; i < n; ++i)
        if (!seen[i]) report.unreachable.push_back(i + 1);
    report.all_reachable = report.unreachable.empty();
    return report;
}

struct SingularValueSummary {
    double a_max = 0.0;
    double a_min = 0.0;
    double lb_max = 0.0;
    double lb_min = 0.0;
    double db_max = 0.0;
    double db_min = 0.0;
    double p_min = 0.0;
};

struct GraphMatrices {
    Matrix adjacency;    // A
    Matrix in_degree;    // D
    Matrix laplacian;    // L = D - A
    Matrix pin_matrix;   // B
    Matrix lb;           // L + B
    Matrix db;           // D + B
    Vector q;            // (L+B)^{-1} 1
    Matrix p_matrix;     // P = diag(1/q)
    Matrix q_matrix;     // Q = P(L+B) + (L+B)^T P
    SingularValueSummary sv;
    double lb_condition = 0.0;
    double q_residual = 0.0;  // ||(L+B)q - 1||_inf
    Eigen::PartialPivLU<Matrix> lb_lu;

    std::size_t size() const { return static_cast<std::size_t>(q.size()); }
    Vector p_diag() const { return p_matrix.diagonal(); }

    /// (L+B)^{-1} y
    Vector solve_lb(const Vector& y) const { return lb_lu.solve(y); }
};

/// Builds the derived matrices. Throws SingularSystem when L+B is
/// numerically singular or q is not strictly positive (both mean some
/// follower is cut off from the leader).
inline GraphMatrices build_matrices(const DirectedTopology& topo) {
    topo.validate_shape();
    const auto n = static_cast<Eigen::Index>(topo.size());

    GraphMatrices gm;
    gm.adjacency = topo.adjacency;
    gm.in_degree = topo.adjacency.rowwise().sum().asDiagonal();
    gm.laplacian = gm.in_degree - gm.adjacency;
    gm.pin_matrix = topo.pinning.asDiagonal();
    gm.lb = gm.laplacian + gm.pin_matrix;
    gm.db = gm.in_degree + gm.pin_matrix;

    gm.lb_condition = condition_number(gm.lb);
    if (!(gm.lb_condition < kSingularConditionThreshold)) {
        const auto reach = check_reachability(topo);
        std::string detail;
        for (auto i : reach.unreachable) detail += fmt::format(" {}", i);
        throw SingularSystem(fmt::format("L+B has condition number {:.3g}; unreachable followers:{}",
                                         gm.lb_condition, detail.empty() ? " none" : detail));
    }

    gm.lb_lu = Eigen::PartialPivLU<Matrix>(gm.lb);
    const Vector ones = Vector::Ones(n);
    gm.q = gm.lb_lu.solve(ones);
    // One step of iterative refinement keeps the residual at roundoff level.
    gm.q += gm.lb_lu.solve(ones - gm.lb * gm.q);
    gm.q_residual = (gm.lb * gm.q - ones).lpNorm<Eigen::Infinity>();
    if (!((gm.q.array() > 0.0).all()))
        throw SingularSystem("q = (L+B)^{-1} 1 has a nonpositive entry");

    gm.p_matrix = gm.q.cwiseInverse().asDiagonal();
    const Matrix s = gm.p_matrix * gm.lb;
    gm.q_matrix = s + s.transpose();

    gm.sv.a_max = sigma_max(gm.adjacency);
    gm.sv.a_min = sigma_min(gm.adjacency);
    gm.sv.lb_max = sigma_max(gm.lb);
    gm.sv.lb_min = sigma_min(gm.lb);
    gm.sv.db_max = sigma_max(gm.db);
    gm.sv.db_min = sigma_min(gm.db);
    gm.sv.p_min = sigma_min(gm.p_matrix);
    return gm;
}

}  // namespace simlab
