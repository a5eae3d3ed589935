#pragma once

// Per-agent deep network estimate f_hat = W^T rho(Phi(x)) with
//   Phi(x) = V_k^T phi(... V_1^T phi(V_0^T x)),
// and its online adaptation laws. Layer j's weight matrix V_j has shape
// L_j x L_{j+1}, with L_0 = M (state order) and L_{k+1} = p (output width).

#include "simlab/barrier.hpp"
#include "simlab/errors.hpp"
#include "simlab/linalg.hpp"
#include "simlab/random.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string_view>
#include <vector>

namespace simlab {

enum class Activation { tanh, sigmoid, linear };

inline std::string_view to_string(Activation a) {
    switch (a) {
        case Activation::tanh: return "tanh";
        case Activation::sigmoid: return "sigmoid";
        case Activation::linear: return "linear";
    }
    return "?";
}

inline Activation activation_from_string(std::string_view s) {
    if (s == "tanh") return Activation::tanh;
    if (s == "sigmoid") return Activation::sigmoid;
    if (s == "linear") return Activation::linear;
    throw ValidationError(fmt::format("dnn.DeepNetworkArch: unknown activation '{}'", s));
}

inline Vector activate(Activation a, const Vector& v) {
    switch (a) {
        case Activation::tanh: return v.array().tanh().matrix();
        case Activation::sigmoid: return (1.0 / (1.0 + (-v.array()).exp())).matrix();
        case Activation::linear: return v;
    }
    return v;
}

struct DeepNetworkArch {
    int input_dim = 0;        // L_0 = M
    std::vector<int> widths;  // L_1 .. L_{k+1}; the last one is p
    Activation inner_activation = Activation::tanh;
    Activation output_activation = Activation::tanh;

    /// Number of inner layers k; there are k+1 weight matrices V_0..V_k.
    int inner_layers() const { return static_cast<int>(widths.size()) - 1; }
    int output_width() const { return widths.empty() ? 0 : widths.back(); }
    std::size_t layer_count() const { return widths.size(); }

    int layer_rows(std::size_t j) const { return j == 0 ? input_dim : widths[j - 1]; }
    int layer_cols(std::size_t j) const { return widths[j]; }

    /// Total number of adaptable scalars (p + sum_j L_j L_{j+1}).
    std::size_t parameter_count() const {
        std::size_t n = static_cast<std::size_t>(output_width());
        for (std::size_t j = 0; j < layer_count(); ++j)
            n += static_cast<std::size_t>(layer_rows(j)) * static_cast<std::size_t>(layer_cols(j));
        return n;
    }

    void validate() const {
        if (input_dim < 1) throw ValidationError("dnn.DeepNetworkArch: input dimension must be positive");
        if (widths.empty()) throw ValidationError("dnn.DeepNetworkArch: need at least one layer width (k >= 0)");
        for (int w : widths)
            if (w < 1) throw ValidationError(fmt::format("dnn.DeepNetworkArch: all widths positive, got {}", w));
    }

    bool operator==(const DeepNetworkArch&) const = default;
};

struct AgentNetwork {
    Vector w_hat;                // length p
    std::vector<Matrix> v_hat;   // V_0 .. V_k

    bool all_finite() const {
        if (!w_hat.allFinite()) return false;
        for (const auto& v : v_hat)
            if (!v.allFinite()) return false;
        return true;
    }

    static AgentNetwork zeros(const DeepNetworkArch& arch) {
        AgentNetwork net;
        net.w_hat = Vector::Zero(arch.output_width());
        for (std::size_t j = 0; j < arch.layer_count(); ++j)
            net.v_hat.push_back(Matrix::Zero(arch.layer_rows(j), arch.layer_cols(j)));
        return net;
    }

    /// Entries drawn uniformly from [lo, hi]; V_0 first (column-major), W last.
    static AgentNetwork uniform(const DeepNetworkArch& arch, double lo, double hi, UniformSource& rng) {
        AgentNetwork net = zeros(arch);
        for (auto& v : net.v_hat)
            for (Eigen::Index c = 0; c < v.cols(); ++c)
                for (Eigen::Index r = 0; r < v.rows(); ++r) v(r, c) = rng.uniform(lo, hi);
        for (Eigen::Index i = 0; i < net.w_hat.size(); ++i) net.w_hat(i) = rng.uniform(lo, hi);
        return net;
    }
};

struct ForwardResult {
    double f_hat = 0.0;
    Vector rho;  // rho(Phi(x)), length p
};

inline ForwardResult forward(const AgentNetwork& net, const DeepNetworkArch& arch, const Vector& x) {
    Vector h = net.v_hat[0].transpose() * x;
    for (std::size_t j = 1; j < net.v_hat.size(); ++j)
        h = net.v_hat[j].transpose() * activate(arch.inner_activation, h);
    ForwardResult out;
    out.rho = activate(arch.output_activation, h);
    out.f_hat = net.w_hat.dot(out.rho);
    return out;
}

/// Which barrier argument the per-agent laws use.
enum class BarrierArgument {
    per_agent,  // |sqrt(p_i) r_i|
    global,     // ||r||_P
};

struct AdaptationConfig {
    Matrix k_w;                  // p x p
    std::vector<Matrix> k_v;     // one gain per layer, same shape as V_j
    std::vector<double> v_lower; // Frobenius band, per layer
    std::vector<double> v_upper;
    double switch_period = 2.0;  // window length owned by one layer
    bool cyclic = true;
    std::optional<double> v_bound;  // V_m when supplied
    BarrierArgument barrier_arg = BarrierArgument::per_agent;

    bool operator==(const AdaptationConfig&) const = default;
};

/// Index of the layer whose window contains t, or -1 when none is active
/// (one-shot schedule after its single sweep). Windows are half-open:
/// layer j owns [j T, (j+1) T) within each cycle of length (k+1) T.
inline int active_layer(double t, int inner_layers, const AdaptationConfig& cfg) {
    const int layers = inner_layers + 1;
    const double cycle = cfg.switch_period * layers;
    double tau = t;
    if (cfg.cyclic) {
        tau = std::fmod(t, cycle);
        if (tau < 0.0) tau += cycle;
    } else if (t >= cycle) {
        return -1;
    }
    const int j = static_cast<int>(std::floor(tau / cfg.switch_period));
    return std::clamp(j, 0, layers - 1);
}

inline int switch_signal(double t, int layer, int inner_layers, const AdaptationConfig& cfg) {
    return active_layer(t, inner_layers, cfg) == layer ? 1 : 0;
}

/// Inputs of the per-agent adaptation laws.
struct AgentSignal {
    double r = 0.0;            // r_i
    double p = 1.0;            // p_i
    double db = 1.0;           // d_i + b_i
    double barrier_arg = 0.0;  // argument passed to Upsilon_d

    static AgentSignal local(double r, double p, double db) {
        return AgentSignal{r, p, db, std::abs(std::sqrt(p) * r)};
    }
};

/// dW_i/dt = -K_W rho Upsilon_d(z) r_i p_i (d_i + b_i).
inline Vector outer_update(const Vector& rho, const AgentSignal& s, const BarrierFunction& barrier, const Matrix& k_w) {
    const double ud = barrier.potential_derivative(s.barrier_arg);
    return -(k_w * rho) * (ud * s.r * s.p * s.db);
}

/// Default inner-layer shaping v_ij = K_V exp(-r^2/2) sqrt(p) r.
inline Matrix default_v(const Matrix& k_v, double r, double p) {
    return k_v * (std::exp(-0.5 * r * r) * std::sqrt(p) * r);
}

inline bool in_band(double norm, double lower, double upper) { return lower <= norm && norm <= upper; }

/// dV_ij/dt = -s_ij(t) v_ij(r_i, t) 1{band} Upsilon_d(z) (d_i + b_i).
/// Exactly zero when the layer is not scheduled or its norm is outside the band.
inline Matrix inner_update(const AgentNetwork& net, std::size_t layer, const AgentSignal& s, double t,
                           const BarrierFunction& barrier, const AdaptationConfig& cfg) {
    const double ud = barrier.potential_derivative(s.barrier_arg);
    const Matrix& v = net.v_hat[layer];
    const int k = static_cast<int>(net.v_hat.size()) - 1;
    if (switch_signal(t, static_cast<int>(layer), k, cfg) == 0 ||
        !in_band(v.norm(), cfg.v_lower[layer], cfg.v_upper[layer]))
        return Matrix::Zero(v.rows(), v.cols());
    return -default_v(cfg.k_v[layer], s.r, s.p) * (ud * s.db);
}

struct VBoundReport {
    bool satisfied = true;
    double psi = 0.0;             // constant psi used on the right-hand side
    double tightest_margin = 0.0; // min over the grid of psi |sqrt(p) r| - ||v||_F
    double at_r = 0.0;
    double at_p = 0.0;
};

/// Checks ||v(r, p)||_F <= psi |sqrt(p) r| on a grid. Throws BoundViolated
/// at the first offending point.
template <typename VFn>
VBoundReport check_v_bound(VFn&& v, double psi, const std::vector<double>& r_grid, const std::vector<double>& p_values) {
    VBoundReport rep;
    rep.psi = psi;
    rep.tightest_margin = std::numeric_limits<double>::infinity();
    for (double p : p_values) {
        for (double r : r_grid) {
            const double lhs = v(r, p).norm();
            const double rhs = psi * std::abs(std::sqrt(p) * r);
            const double margin = rhs - lhs;
            if (margin < -1e-12 * (1.0 + rhs))
                throw BoundViolated(fmt::format("||v||_F = {} exceeds psi*|sqrt(p) r| = {} at r = {}, p = {}",
                                                lhs, rhs, r, p));
            if (margin < rep.tightest_margin) {
                rep.tightest_margin = margin;
                rep.at_r = r;
                rep.at_p = p;
            }
        }
    }
    return rep;
}

/// The constant psi that bounds the default v for every layer: max_j ||K_Vj||_F.
inline double default_psi(const AdaptationConfig& cfg) {
    double psi = 0.0;
    for (const auto& k : cfg.k_v) psi = std::max(psi, k.norm());
    return psi;
}

/// Runs check_v_bound for every layer of the default v.
inline VBoundReport check_default_v_bound(const AdaptationConfig& cfg, const std::vector<double>& r_grid,
                                          const std::vector<double>& p_values) {
    const double psi = default_psi(cfg);
    VBoundReport worst;
    worst.tightest_margin = std::numeric_limits<double>::infinity();
    for (const auto& k : cfg.k_v) {
        auto rep = check_v_bound([&](double r, double p) { return default_v(k, r, p); }, psi, r_grid, p_values);
        if (rep.tightest_margin < worst.tightest_margin) worst = rep;
    }
    worst.psi = psi;
    return worst;
}

/// Assumption-level bounds used by the gain certificate.
struct BoundEstimates {
    std::optional<double> w_m;
    std::optional<double> v_m;
    std::optional<double> rho_m;
    std::optional<double> rho_hat_m;
    std::optional<double> eps_m;
    std::optional<double> omega_m;
    std::optional<double> f_m;
    std::optional<double> psi_mu;  // overrides the psi derived from K_V

    bool operator==(const BoundEstimates&) const = default;
};

}  // namespace simlab
