#pragma once

// Fixed-step explicit integrators over a flat state vector. The right-hand
// side is re-evaluated at every internal stage, so switching terms see the
// stage state rather than the step's initial state.

#include "simlab/errors.hpp"
#include "simlab/linalg.hpp"

#include <fmt/format.h>

#include <string_view>

namespace simlab {

enum class IntegrationMethod { euler, rk4 };

inline std::string_view to_string(IntegrationMethod m) { return m == IntegrationMethod::euler ? "euler" : "rk4"; }

inline IntegrationMethod integration_method_from_string(std::string_view s) {
    if (s == "euler") return IntegrationMethod::euler;
    if (s == "rk4") return IntegrationMethod::rk4;
    throw ValidationError(fmt::format("sim.ScenarioConfig: integrator method must be euler or rk4, got '{}'", s));
}

/// Rhs is callable as rhs(double t, const Vector& y, int stage) -> Vector.
template <typename Rhs>
Vector euler_step(Rhs&& rhs, double t, const Vector& y, double dt) {
    return y + dt * rhs(t, y, 0);
}

template <typename Rhs>
Vector rk4_step(Rhs&& rhs, double t, const Vector& y, double dt) {
    const double half = 0.5 * dt;
    const Vector k1 = rhs(t, y, 0);
    const Vector k2 = rhs(t + half, y + half * k1, 1);
    const Vector k3 = rhs(t + half, y + half * k2, 2);
    const Vector k4 = rhs(t + dt, y + dt * k3, 3);
    return y + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

template <typename Rhs>
Vector integrate_step(IntegrationMethod method, Rhs&& rhs, double t, const Vector& y, double dt) {
    switch (method) {
        case IntegrationMethod::euler: return euler_step(rhs, t, y, dt);
        case IntegrationMethod::rk4: return rk4_step(rhs, t, y, dt);
    }
    return y;
}

}  // namespace simlab
