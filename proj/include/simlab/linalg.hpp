#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace simlab {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Singular values in nonincreasing order.
inline std::vector<double> singular_values(const Matrix& m) {
    if (m.size() == 0) return {};
    Eigen::JacobiSVD<Matrix> svd(m);
    const Vector& s = svd.singularValues();
    return {s.data(), s.data() + s.size()};
}

inline double sigma_max(const Matrix& m) {
    auto s = singular_values(m);
    return s.empty() ? 0.0 : s.front();
}

inline double sigma_min(const Matrix& m) {
    auto s = singular_values(m);
    return s.empty() ? 0.0 : s.back();
}

/// 2-norm condition number; infinity for a singular matrix.
inline double condition_number(const Matrix& m) {
    auto s = singular_values(m);
    if (s.empty()) return 1.0;
    if (s.back() == 0.0) return std::numeric_limits<double>::infinity();
    return s.front() / s.back();
}

/// Eigenvalues of a symmetric matrix, ascending.
inline Vector symmetric_eigenvalues(const Matrix& m) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(m, Eigen::EigenvaluesOnly);
    return es.eigenvalues();
}

inline bool is_exactly_symmetric(const Matrix& m) {
    return m.rows() == m.cols() && m == m.transpose();
}

}  // namespace simlab
