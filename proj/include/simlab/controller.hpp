#pragma once

// Sliding-mode consensus law with network compensation:
//   u_i = eta_i/(d_i+b_i) + g1 r_i + g2 sgn(r_i) - f_hat_i + c_i,
//   c   = -(L+B)^{-1} A f_hat,
// and the design-time gain certificate.

#include "simlab/dnn.hpp"
#include "simlab/errors.hpp"
#include "simlab/graph.hpp"
#include "simlab/linalg.hpp"
#include "simlab/sliding.hpp"

#include <fmt/format.h>

#include <cmath>
#include <optional>
#include <string>

namespace simlab {

struct ControllerGains {
    double gamma1 = 1.0;
    double gamma2 = 1.0;
    double boundary_layer = 0.0;  // 0 keeps the exact signum

    void validate() const {
        if (!(gamma1 > 0.0)) throw ValidationError(fmt::format("controller.ControllerGains: gamma1 > 0, got {}", gamma1));
        if (!(gamma2 > 0.0)) throw ValidationError(fmt::format("controller.ControllerGains: gamma2 > 0, got {}", gamma2));
        if (!(boundary_layer >= 0.0))
            throw ValidationError(fmt::format("controller.ControllerGains: boundary layer >= 0, got {}", boundary_layer));
    }

    bool operator==(const ControllerGains&) const = default;
};

/// sgn(r), or r/eps inside a boundary layer of half-width eps.
inline double switching_term(double r, double boundary_layer) {
    if (boundary_layer > 0.0 && std::abs(r) < boundary_layer) return r / boundary_layer;
    return static_cast<double>((r > 0.0) - (r < 0.0));
}

/// c = -(L+B)^{-1} A f_hat.
inline Vector corrective_signal(const GraphMatrices& gm, const Vector& f_hat) {
    if (f_hat.size() != static_cast<Eigen::Index>(gm.size()))
        throw DimensionMismatch(fmt::format("f_hat has {} entries, graph has {} followers", f_hat.size(), gm.size()));
    return -gm.solve_lb(gm.adjacency * f_hat);
}

/// Per-agent control law. Throws ZeroRowGain for a follower with d_i + b_i = 0.
inline Vector control_law(const ErrorState& err, const GraphMatrices& gm, const Vector& f_hat,
                          const Vector& corrective, const ControllerGains& gains) {
    const auto n = static_cast<Eigen::Index>(gm.size());
    if (err.r.size() != n || f_hat.size() != n || corrective.size() != n)
        throw DimensionMismatch("control_law inputs do not match the number of followers");
    Vector u(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double db = gm.db(i, i);
        if (db == 0.0) throw ZeroRowGain(fmt::format("follower {} has d_i + b_i = 0", i + 1));
        u(i) = err.eta(i) / db + gains.gamma1 * err.r(i) + gains.gamma2 * switching_term(err.r(i), gains.boundary_layer) -
               f_hat(i) + corrective(i);
    }
    return u;
}

/// Convenience overload that forms the corrective signal itself.
inline Vector control_law(const ErrorState& err, const GraphMatrices& gm, const Vector& f_hat,
                          const ControllerGains& gains) {
    return control_law(err, gm, f_hat, corrective_signal(gm, f_hat), gains);
}

/// Stacked form u = (D+B)^{-1} eta + g1 r + g2 sgn(r) - f_hat + c.
inline Vector control_law_global(const ErrorState& err, const GraphMatrices& gm, const Vector& f_hat,
                                 const ControllerGains& gains) {
    if ((gm.db.diagonal().array() == 0.0).any()) throw ZeroRowGain("D + B has a zero diagonal entry");
    const Vector sgn = err.r.unaryExpr([&](double r) { return switching_term(r, gains.boundary_layer); });
    const Matrix db_inv = gm.db.diagonal().cwiseInverse().asDiagonal();
    return db_inv * err.eta + gains.gamma1 * err.r + gains.gamma2 * sgn - f_hat + corrective_signal(gm, f_hat);
}

struct GainCertificate {
    double gamma1_min = 0.0;
    double gamma2_min = 0.0;

    // Inputs echoed for inspection.
    double sigma_max_a = 0.0;
    double sigma_max_lb = 0.0;
    double sigma_min_db = 0.0;
    double sigma_max_db = 0.0;
    double sigma_max_p1 = 0.0;
    double sigma_min_p = 0.0;
    double lambda_norm = 0.0;
    double companion_frobenius = 0.0;
    double alpha = 0.0;
    int inner_layers = 0;
    double psi_mu = 0.0;
    BoundEstimates bounds;

    // Verdict against configured gains, when supplied.
    std::optional<double> gamma1;
    std::optional<double> gamma2;
    bool gamma1_ok = false;      // gamma1 > gamma1_min
    bool gamma2_ok = false;      // gamma2 >= gamma2_min
    bool gamma2_strict = false;  // gamma2 > gamma2_min
    bool gamma2_equal = false;   // gamma2 == gamma2_min exactly

    bool passed() const { return gamma1_ok && gamma2_ok; }
};

inline double require_bound(const std::optional<double>& v, const char* name) {
    if (!v) throw MissingBound(fmt::format("bound '{}' was not supplied", name));
    if (!std::isfinite(*v) || *v < 0.0) throw MissingBound(fmt::format("bound '{}' must be finite and >= 0, got {}", name, *v));
    return *v;
}

/// Theorem-level lower bounds on gamma1 and gamma2. psi_mu is used when the
/// bounds do not carry their own psi_mu entry.
inline GainCertificate gain_certificate(const GraphMatrices& gm, const SlidingDesign& design, const BoundEstimates& bounds,
                                        int inner_layers, std::optional<double> psi_mu = std::nullopt,
                                        std::optional<ControllerGains> gains = std::nullopt) {
    GainCertificate c;
    c.bounds = bounds;
    const double w_m = require_bound(bounds.w_m, "w_m");
    const double v_m = require_bound(bounds.v_m, "v_m");
    const double rho_m = require_bound(bounds.rho_m, "rho_m");
    const double rho_hat_m = require_bound(bounds.rho_hat_m, "rho_hat_m");
    const double eps_m = require_bound(bounds.eps_m, "eps_m");
    const double omega_m = require_bound(bounds.omega_m, "omega_m");
    const double f_m = require_bound(bounds.f_m, "f_m");
    c.psi_mu = require_bound(bounds.psi_mu ? bounds.psi_mu : psi_mu, "psi_mu");

    c.sigma_max_a = gm.sv.a_max;
    c.sigma_max_lb = gm.sv.lb_max;
    c.sigma_min_db = gm.sv.db_min;
    c.sigma_max_db = gm.sv.db_max;
    c.sigma_max_p1 = sigma_max(design.p1);
    c.sigma_min_p = gm.sv.p_min;
    c.lambda_norm = design.lambda_bar.norm();
    c.companion_frobenius = design.companion.norm();
    c.alpha = design.alpha;
    c.inner_layers = inner_layers;

    const double coupling = c.sigma_max_a / c.sigma_min_db;
    const double cross = coupling * c.companion_frobenius * c.lambda_norm + c.sigma_max_p1 / c.sigma_min_p;
    c.gamma1_min = c.sigma_max_a / (c.sigma_max_lb * c.sigma_min_db) * c.lambda_norm + cross * cross / (2.0 * c.alpha);
    c.gamma2_min = (c.sigma_max_db / c.sigma_max_lb) * (w_m * rho_hat_m + 2.0 * (inner_layers + 1) * v_m * c.psi_mu) +
                   w_m * rho_m + eps_m + omega_m + f_m;

    if (gains) {
        c.gamma1 = gains->gamma1;
        c.gamma2 = gains->gamma2;
        c.gamma1_ok = gains->gamma1 > c.gamma1_min;
        c.gamma2_ok = gains->gamma2 >= c.gamma2_min;
        c.gamma2_strict = gains->gamma2 > c.gamma2_min;
        c.gamma2_equal = gains->gamma2 == c.gamma2_min;
    }
    return c;
}

}  // namespace simlab
