#pragma once

// Sliding-surface design and the synchronization error bookkeeping.
//
// For an order-M chain the surface is r = sum_{m<M} lambda_m e^m + e^M.
// The companion matrix Lambda realizes s^{M-1} + lambda_{M-1} s^{M-2} + ... + lambda_1,
// and P1 solves Lambda^T P1 + P1 Lambda = -alpha I.

#include "simlab/errors.hpp"
#include "simlab/graph.hpp"
#include "simlab/linalg.hpp"

#include <fmt/format.h>

#include <complex>
#include <vector>

namespace simlab {

struct SlidingDesign {
    int order = 0;       // M
    Vector lambda_bar;   // [lambda_1 .. lambda_{M-1}]
    Matrix companion;    // Lambda, (M-1)x(M-1)
    Vector selector;     // l = [0 .. 0 1]
    double alpha = 0.0;
    Matrix p1;           // Lyapunov solution
    double lyapunov_residual = 0.0;  // ||Lambda^T P1 + P1 Lambda + alpha I||_F

    double lambda_sum() const { return lambda_bar.sum(); }
    /// Corollary precondition on the surface coefficients.
    bool corollary_precondition() const {
        return lambda_sum() > 1.0 && (lambda_bar.array() > 0.0).all();
    }
};

/// Coefficients of prod_k (s + beta_k), ascending, without the leading 1.
inline Vector lambdas_from_roots(const std::vector<double>& betas) {
    for (std::size_t k = 0; k < betas.size(); ++k)
        if (!(betas[k] > 0.0))
            throw NonPositiveRoot(fmt::format("root {} is {} (all roots must be > 0)", k + 1, betas[k]));
    std::vector<double> poly{1.0};  // ascending powers
    for (double beta : betas) {
        std::vector<double> next(poly.size() + 1, 0.0);
        for (std::size_t i = 0; i < poly.size(); ++i) {
            next[i] += beta * poly[i];
            next[i + 1] += poly[i];
        }
        poly = std::move(next);
    }
    Vector lambda(static_cast<Eigen::Index>(betas.size()));
    for (std::size_t i = 0; i < betas.size(); ++i) lambda(static_cast<Eigen::Index>(i)) = poly[i];
    return lambda;
}

inline Matrix companion_matrix(const Vector& lambda_bar) {
    const auto n = lambda_bar.size();
    Matrix c = Matrix::Zero(n, n);
    for (Eigen::Index i = 0; i + 1 < n; ++i) c(i, i + 1) = 1.0;
    c.row(n - 1) = -lambda_bar.transpose();
    return c;
}

inline Eigen::VectorXcd matrix_eigenvalues(const Matrix& m) {
    Eigen::EigenSolver<Matrix> es(m, false);
    return es.eigenvalues();
}

inline bool is_hurwitz(const Matrix& m) {
    if (m.size() == 0) return false;
    const auto ev = matrix_eigenvalues(m);
    return (ev.real().array() < 0.0).all();
}

/// Solves Lambda^T P + P Lambda = -alpha I by Kronecker vectorization:
/// (I (x) Lambda^T + Lambda^T (x) I) vec(P) = -alpha vec(I).
inline Matrix solve_lyapunov(const Matrix& lambda_mat, double alpha) {
    const auto n = lambda_mat.rows();
    const Matrix at = lambda_mat.transpose();
    const Matrix eye = Matrix::Identity(n, n);
    Matrix kron = Matrix::Zero(n * n, n * n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) {
            // Block (i, j) of I (x) A^T is delta_ij A^T; of A^T (x) I it is A^T(i, j) I.
            auto block = kron.block(i * n, j * n, n, n);
            if (i == j) block += at;
            block += at(i, j) * eye;
        }
    }
    Eigen::FullPivLU<Matrix> lu(kron);
    if (!lu.isInvertible())
        throw SolveFailure("Kronecker Lyapunov system is singular");
    const Matrix rhs_m = -alpha * eye;
    const Vector rhs = Eigen::Map<const Vector>(rhs_m.data(), n * n);
    Vector sol = lu.solve(rhs);
    sol += lu.solve(rhs - kron * sol);
    Matrix p = Eigen::Map<const Matrix>(sol.data(), n, n);
    if (!p.allFinite()) throw SolveFailure("Lyapunov solution is not finite");
    return 0.5 * (p + p.transpose());
}

inline double lyapunov_residual(const Matrix& lambda_mat, const Matrix& p1, double alpha) {
    const auto n = lambda_mat.rows();
    return (lambda_mat.transpose() * p1 + p1 * lambda_mat + alpha * Matrix::Identity(n, n)).norm();
}

/// Builds Lambda and P1 for the given coefficients. Throws NotHurwitz when
/// Lambda has an eigenvalue with nonnegative real part.
inline SlidingDesign companion_and_lyapunov(const Vector& lambda_bar, double alpha) {
    if (lambda_bar.size() < 1)
        throw ValidationError("sliding.SlidingDesign: order M >= 2 (need at least one lambda)");
    if (!(alpha > 0.0))
        throw ValidationError(fmt::format("sliding.SlidingDesign: alpha > 0, got {}", alpha));
    SlidingDesign d;
    d.order = static_cast<int>(lambda_bar.size()) + 1;
    d.lambda_bar = lambda_bar;
    d.companion = companion_matrix(lambda_bar);
    if (!lambda_bar.allFinite() || !is_hurwitz(d.companion)) {
        std::string ev;
        for (const auto& z : matrix_eigenvalues(d.companion))
            ev += fmt::format(" {:.6g}{:+.6g}i", z.real(), z.imag());
        throw NotHurwitz("surface polynomial has a root with nonnegative real part; eigenvalues:" + ev);
    }
    d.selector = Vector::Zero(lambda_bar.size());
    d.selector(lambda_bar.size() - 1) = 1.0;
    d.alpha = alpha;
    d.p1 = solve_lyapunov(d.companion, alpha);
    d.lyapunov_residual = lyapunov_residual(d.companion, d.p1, alpha);
    if (symmetric_eigenvalues(d.p1).minCoeff() <= 0.0)
        throw SolveFailure("Lyapunov solution P1 is not positive definite");
    return d;
}

/// Synchronization errors and the sliding variable for one instant.
struct ErrorState {
    Matrix e;    // N x M, column m is e^{m+1}
    Matrix e1;   // N x (M-1): [e^1 .. e^{M-1}]
    Matrix e2;   // N x (M-1): [e^2 .. e^M]
    Vector r;
    Vector eta;

    /// ||E2 - (E1 Lambda^T + r l^T)||_max; zero up to roundoff.
    double surface_identity_residual(const SlidingDesign& d) const {
        const Matrix rhs = e1 * d.companion.transpose() + r * d.selector.transpose();
        return (e2 - rhs).cwiseAbs().maxCoeff();
    }
};

/// e^m = -(L+B)(x^m - 1 x0^m) for every m. x is N x M, x0 has length M.
inline Matrix sync_errors(const Matrix& x, const Vector& x0, const GraphMatrices& gm) {
    const auto n = static_cast<Eigen::Index>(gm.size());
    if (x.rows() != n || x.cols() != x0.size())
        throw DimensionMismatch(fmt::format("states are {}x{}, leader has {} entries, graph has {} followers",
                                            x.rows(), x.cols(), x0.size(), n));
    const Matrix diff = x.rowwise() - x0.transpose();
    return -gm.lb * diff;
}

/// Neighbourhood form: e_i^m = sum_j a_ij (x_j^m - x_i^m) + b_i (x0^m - x_i^m).
inline Matrix sync_errors_local(const Matrix& x, const Vector& x0, const DirectedTopology& topo) {
    const auto n = x.rows();
    if (n != static_cast<Eigen::Index>(topo.size()) || x.cols() != x0.size())
        throw DimensionMismatch("state dimensions do not match the topology");
    Matrix e = Matrix::Zero(n, x.cols());
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index m = 0; m < x.cols(); ++m) {
            double acc = topo.pinning(i) * (x0(m) - x(i, m));
            for (Eigen::Index j = 0; j < n; ++j) acc += topo.adjacency(i, j) * (x(j, m) - x(i, m));
            e(i, m) = acc;
        }
    }
    return e;
}

/// r = E1 lambda_bar + e^M and eta = E2 lambda_bar.
inline ErrorState sliding_variable(const Matrix& errors, const Vector& lambda_bar) {
    const auto order = errors.cols();
    if (order != lambda_bar.size() + 1)
        throw DimensionMismatch(fmt::format("errors have {} columns but lambda has {} entries (need M-1)",
                                            order, lambda_bar.size()));
    ErrorState s;
    s.e = errors;
    s.e1 = errors.leftCols(order - 1);
    s.e2 = errors.rightCols(order - 1);
    s.r = s.e1 * lambda_bar + errors.col(order - 1);
    s.eta = s.e2 * lambda_bar;
    return s;
}

}  // namespace simlab
