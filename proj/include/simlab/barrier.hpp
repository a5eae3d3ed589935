#pragma once

// Restricted potential (barrier Lyapunov) function on [0, mu).
//
// potential(z) is Upsilon(z); potential_derivative(z) is dUpsilon/d(z^2),
// the factor that multiplies every adaptation law.

#include "simlab/errors.hpp"
#include "simlab/linalg.hpp"

#include <fmt/format.h>

#include <cmath>
#include <string>
#include <string_view>

namespace simlab {

enum class BarrierForm {
    rational,     // z^2 / (mu^2 - z^2)
    logarithmic,  // log(mu^2 / (mu^2 - z^2))
};

inline std::string_view to_string(BarrierForm f) {
    return f == BarrierForm::rational ? "rational" : "log";
}

inline BarrierForm barrier_form_from_string(std::string_view s) {
    if (s == "rational") return BarrierForm::rational;
    if (s == "log") return BarrierForm::logarithmic;
    throw ValidationError(fmt::format("barrier.BarrierFunction: unknown form '{}' (expected rational or log)", s));
}

/// sqrt(y^T H y). Throws NonPDWeight when the quadratic form is negative
/// beyond roundoff.
inline double weighted_norm(const Vector& y, const Matrix& h) {
    if (h.rows() != y.size() || h.cols() != y.size())
        throw DimensionMismatch(fmt::format("weight is {}x{}, vector has {} entries", h.rows(), h.cols(), y.size()));
    const double quad = y.dot(h * y);
    const double scale = y.squaredNorm() * h.cwiseAbs().maxCoeff();
    if (quad < -1e-12 * (1.0 + scale))
        throw NonPDWeight(fmt::format("y^T H y = {} < 0", quad));
    return std::sqrt(std::max(quad, 0.0));
}

/// Weighted norm for a diagonal weight given by its diagonal.
inline double weighted_norm_diag(const Vector& y, const Vector& diag) {
    return std::sqrt(std::max(y.dot(diag.cwiseProduct(y)), 0.0));
}

class BarrierFunction {
public:
    BarrierFunction() = default;
    explicit BarrierFunction(double mu, BarrierForm form = BarrierForm::rational) : mu_(mu), form_(form) {
        if (!(mu > 0.0) || !std::isfinite(mu))
            throw ValidationError(fmt::format("barrier.BarrierFunction: mu > 0, got {}", mu));
    }

    double mu() const { return mu_; }
    BarrierForm form() const { return form_; }

    bool inside(double z) const { return std::abs(z) < mu_; }

    /// Upsilon(|z|).
    double potential(double z) const {
        const double gap = checked_gap(z);
        const double z2 = z * z;
        switch (form_) {
            case BarrierForm::rational: return z2 / gap;
            case BarrierForm::logarithmic: return std::log(mu_ * mu_ / gap);
        }
        return 0.0;
    }

    /// dUpsilon / d(z^2) at |z|.
    double potential_derivative(double z) const {
        const double gap = checked_gap(z);
        switch (form_) {
            case BarrierForm::rational: return mu_ * mu_ / (gap * gap);
            case BarrierForm::logarithmic: return 1.0 / gap;
        }
        return 0.0;
    }

    bool operator==(const BarrierFunction&) const = default;

private:
    double checked_gap(double z) const {
        const double a = std::abs(z);
        if (!(a < mu_))
            throw DomainExceeded(fmt::format("barrier argument {} is not below mu = {}", a, mu_));
        return mu_ * mu_ - a * a;
    }

    double mu_ = 1.0;
    BarrierForm form_ = BarrierForm::rational;
};

}  // namespace simlab
