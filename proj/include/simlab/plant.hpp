#pragma once

// Follower and leader dynamics. Each agent is a chain of M integrators with
// a single nonlinearity entering the top derivative:
//   dx^m/dt = x^{m+1} (m < M),   dx^M/dt = f(x, t) + u + w(t).

#include "simlab/errors.hpp"
#include "simlab/expr.hpp"
#include "simlab/linalg.hpp"

#include <fmt/format.h>

#include <cmath>
#include <span>
#include <string_view>
#include <vector>

namespace simlab {

enum class DisturbanceKind { cos_t, sin_t, exp_neg_t, sin_cos_t, none };

inline std::string_view to_string(DisturbanceKind k) {
    switch (k) {
        case DisturbanceKind::cos_t: return "cos_t";
        case DisturbanceKind::sin_t: return "sin_t";
        case DisturbanceKind::exp_neg_t: return "exp_neg_t";
        case DisturbanceKind::sin_cos_t: return "sin_cos_t";
        case DisturbanceKind::none: return "none";
    }
    return "none";
}

inline DisturbanceKind disturbance_kind_from_string(std::string_view s) {
    for (auto k : {DisturbanceKind::cos_t, DisturbanceKind::sin_t, DisturbanceKind::exp_neg_t,
                   DisturbanceKind::sin_cos_t, DisturbanceKind::none})
        if (to_string(k) == s) return k;
    throw ValidationError(fmt::format(
        "plant.DisturbanceModel: unknown kind '{}' (expected cos_t, sin_t, exp_neg_t, sin_cos_t or none)", s));
}

struct DisturbanceModel {
    DisturbanceKind kind = DisturbanceKind::none;
    double amplitude = 0.0;  // g
};

/// w(t) for the model; |w(t)| <= |g| for every kind.
inline double disturbance(const DisturbanceModel& model, double t) {
    const double g = model.amplitude;
    switch (model.kind) {
        case DisturbanceKind::cos_t: return g * std::cos(t);
        case DisturbanceKind::sin_t: return g * std::sin(t);
        case DisturbanceKind::exp_neg_t: return g * std::exp(-t);
        case DisturbanceKind::sin_cos_t: return g * std::sin(t) * std::cos(t);
        case DisturbanceKind::none: return 0.0;
    }
    return 0.0;
}

struct LeaderModel {
    DynamicsExpr f0;  // parsed in leader scope: x1..xM are the leader's own states
    Vector initial_state;

    int order() const { return static_cast<int>(initial_state.size()); }

    double top_derivative(std::span<const double> x0, double t) const { return f0.eval(x0, t); }
};

struct FollowerModel {
    DynamicsExpr f;
    Vector initial_state;
    DisturbanceKind disturbance = DisturbanceKind::none;

    double nonlinearity(std::span<const double> x, double t, std::span<const double> x0) const {
        return f.eval(x, t, x0);
    }
};

/// Chain-of-integrators right-hand side for one agent: writes dx/dt into out,
/// with `top` the full top-derivative input (f + u + w).
inline void integrator_chain_rhs(std::span<const double> x, double top, std::span<double> out) {
    const auto m = x.size();
    for (std::size_t k = 0; k + 1 < m; ++k) out[k] = x[k + 1];
    out[m - 1] = top;
}

}  // namespace simlab
