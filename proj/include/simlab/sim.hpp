#pragma once

// Fixed-step simulation of the closed loop: follower chains, the leader chain
// and every network weight are integrated together as one flat vector.
//
// Packed layout: [x_1 .. x_N (M each) | x0 (M) | per agent: W (p), V_0 .. V_k
// (column-major)].

#include "simlab/barrier.hpp"
#include "simlab/controller.hpp"
#include "simlab/dnn.hpp"
#include "simlab/errors.hpp"
#include "simlab/graph.hpp"
#include "simlab/integrator.hpp"
#include "simlab/linalg.hpp"
#include "simlab/plant.hpp"
#include "simlab/random.hpp"
#include "simlab/scenario.hpp"
#include "simlab/sliding.hpp"

#include <Eigen/Cholesky>
#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace simlab {

struct SimState {
    double t = 0.0;
    Matrix x;   // N x M
    Vector x0;  // M
    std::vector<AgentNetwork> nets;
    std::vector<double> g;  // disturbance amplitudes
};

/// Everything a run derives once from its configuration.
class SimContext {
public:
    /// Builds the derived quantities without re-running validate_config.
    /// Synthetic configs without ideal networks are completed here.
    explicit SimContext(ScenarioConfig cfg) : cfg_(std::move(cfg)) {
        if (cfg_.mode == RunMode::synthetic_truth && cfg_.synthetic.ideal.size() != cfg_.followers())
            cfg_ = make_synthetic(cfg_);
        gm_ = build_matrices(cfg_.topology);
        design_ = cfg_.design();
        barrier_ = cfg_.barrier();
        n_ = static_cast<Eigen::Index>(cfg_.followers());
        m_ = cfg_.order();
        p_ = cfg_.arch.output_width();
        net_size_ = static_cast<Eigen::Index>(cfg_.arch.parameter_count());
        lambda_ = design_.lambda_bar;
        p_diag_ = gm_.p_diag();

        UniformSource dist(cfg_.stream_seed(SeedStream::disturbance));
        g_.reserve(cfg_.followers());
        for (std::size_t i = 0; i < cfg_.followers(); ++i)
            g_.push_back(dist.uniform(cfg_.disturbance.lower, cfg_.disturbance.upper));

        if (cfg_.mode == RunMode::synthetic_truth) {
            Eigen::LLT<Matrix> llt(cfg_.adaptation.k_w);
            if (llt.info() != Eigen::Success)
                throw ValidationError("dnn.AdaptationConfig: k_w must be positive definite in synthetic_truth mode");
            k_w_inv_ = llt.solve(Matrix::Identity(p_, p_));
        }
    }

    const ScenarioConfig& config() const { return cfg_; }
    const GraphMatrices& graph() const { return gm_; }
    const SlidingDesign& design() const { return design_; }
    const BarrierFunction& barrier() const { return barrier_; }
    const std::vector<double>& amplitudes() const { return g_; }
    bool synthetic() const { return cfg_.mode == RunMode::synthetic_truth; }

    Eigen::Index followers() const { return n_; }
    int order() const { return m_; }
    Eigen::Index state_size() const { return n_ * m_ + m_ + n_ * net_size_; }

    SimState initial_state() const {
        SimState s;
        s.t = 0.0;
        s.x.resize(n_, m_);
        for (Eigen::Index i = 0; i < n_; ++i) s.x.row(i) = cfg_.agents[static_cast<std::size_t>(i)].initial_state.transpose();
        s.x0 = cfg_.leader.initial_state;
        s.g = g_;
        if (!synthetic()) {
            UniformSource rng(cfg_.stream_seed(SeedStream::network_init));
            for (Eigen::Index i = 0; i < n_; ++i)
                s.nets.push_back(AgentNetwork::uniform(cfg_.arch, cfg_.init.lower, cfg_.init.upper, rng));
            return s;
        }
        switch (cfg_.synthetic.init) {
            case SyntheticInit::ideal: s.nets = cfg_.synthetic.ideal; break;
            case SyntheticInit::perturbed: {
                UniformSource rng(cfg_.stream_seed(SeedStream::perturbation));
                const double d = cfg_.synthetic.perturbation;
                for (const auto& ideal : cfg_.synthetic.ideal) {
                    AgentNetwork noise = AgentNetwork::uniform(cfg_.arch, -d, d, rng);
                    noise.w_hat += ideal.w_hat;
                    for (std::size_t j = 0; j < noise.v_hat.size(); ++j) noise.v_hat[j] += ideal.v_hat[j];
                    s.nets.push_back(std::move(noise));
                }
                break;
            }
            case SyntheticInit::random: {
                UniformSource rng(cfg_.stream_seed(SeedStream::network_init));
                for (Eigen::Index i = 0; i < n_; ++i)
                    s.nets.push_back(AgentNetwork::uniform(cfg_.arch, cfg_.init.lower, cfg_.init.upper, rng));
                break;
            }
        }
        return s;
    }

    Vector pack(const SimState& s) const {
        Vector y(state_size());
        Eigen::Index o = 0;
        for (Eigen::Index i = 0; i < n_; ++i)
            for (int m = 0; m < m_; ++m) y(o++) = s.x(i, m);
        for (int m = 0; m < m_; ++m) y(o++) = s.x0(m);
        for (const auto& net : s.nets) {
            y.segment(o, p_) = net.w_hat;
            o += p_;
            for (const auto& v : net.v_hat) {
                y.segment(o, v.size()) = Eigen::Map<const Vector>(v.data(), v.size());
                o += v.size();
            }
        }
        return y;
    }

    SimState unpack(const Vector& y, double t) const {
        SimState s;
        s.t = t;
        s.g = g_;
        s.x.resize(n_, m_);
        Eigen::Index o = 0;
        for (Eigen::Index i = 0; i < n_; ++i)
            for (int m = 0; m < m_; ++m) s.x(i, m) = y(o++);
        s.x0 = y.segment(o, m_);
        o += m_;
        for (Eigen::Index i = 0; i < n_; ++i) {
            AgentNetwork net = AgentNetwork::zeros(cfg_.arch);
            net.w_hat = y.segment(o, p_);
            o += p_;
            for (auto& v : net.v_hat) {
                v = Eigen::Map<const Matrix>(y.data() + o, v.rows(), v.cols());
                o += v.size();
            }
            s.nets.push_back(std::move(net));
        }
        return s;
    }

    /// Closed-loop quantities at one state; no derivatives.
    struct Evaluation {
        ErrorState err;
        double r_norm = 0.0;
        Vector f_hat;
        Vector corrective;
        Vector u;
        std::vector<Vector> rho;
    };

    Evaluation evaluate(const SimState& s) const {
        Evaluation ev;
        ev.err = sliding_variable(sync_errors(s.x, s.x0, gm_), lambda_);
        ev.r_norm = weighted_norm_diag(ev.err.r, p_diag_);
        ev.f_hat.resize(n_);
        for (Eigen::Index i = 0; i < n_; ++i) {
            auto fr = forward(s.nets[static_cast<std::size_t>(i)], cfg_.arch, s.x.row(i).transpose());
            ev.f_hat(i) = fr.f_hat;
            ev.rho.push_back(std::move(fr.rho));
        }
        ev.corrective = corrective_signal(gm_, ev.f_hat);
        ev.u = control_law(ev.err, gm_, ev.f_hat, ev.corrective, cfg_.gains);
        return ev;
    }

    /// Right-hand side of the packed system. Throws BarrierBreach when
    /// ||r||_P >= mu at the evaluated stage.
    Vector derivative(double t, const Vector& y, int stage) const {
        const SimState s = unpack(y, t);
        const Evaluation ev = evaluate(s);
        if (!(ev.r_norm < barrier_.mu()))
            throw BarrierBreach(fmt::format("||r||_P = {} reached mu = {} at t = {} (stage {})", ev.r_norm, barrier_.mu(), t,
                                            stage));

        Vector dy = Vector::Zero(y.size());
        Eigen::Index o = 0;
        std::vector<double> xi(static_cast<std::size_t>(m_));
        std::vector<double> out(static_cast<std::size_t>(m_));
        const std::span<const double> x0span(s.x0.data(), static_cast<std::size_t>(m_));
        for (Eigen::Index i = 0; i < n_; ++i) {
            const auto ui = static_cast<std::size_t>(i);
            for (int m = 0; m < m_; ++m) xi[static_cast<std::size_t>(m)] = s.x(i, m);
            double f = 0.0;
            if (synthetic())
                f = forward(cfg_.synthetic.ideal[ui], cfg_.arch, s.x.row(i).transpose()).f_hat;
            else
                f = cfg_.agents[ui].nonlinearity(xi, t, x0span);
            const double w = disturbance(DisturbanceModel{cfg_.agents[ui].disturbance, g_[ui]}, t);
            integrator_chain_rhs(xi, f + ev.u(i) + w, out);
            for (int m = 0; m < m_; ++m) dy(o++) = out[static_cast<std::size_t>(m)];
        }
        integrator_chain_rhs(x0span, cfg_.leader.top_derivative(x0span, t), out);
        for (int m = 0; m < m_; ++m) dy(o++) = out[static_cast<std::size_t>(m)];

        const auto& ad = cfg_.adaptation;
        const int layer = active_layer(t, cfg_.arch.inner_layers(), ad);
        for (Eigen::Index i = 0; i < n_; ++i) {
            const auto ui = static_cast<std::size_t>(i);
            AgentSignal sig = AgentSignal::local(ev.err.r(i), p_diag_(i), gm_.db(i, i));
            if (ad.barrier_arg == BarrierArgument::global) sig.barrier_arg = ev.r_norm;
            dy.segment(o, p_) = outer_update(ev.rho[ui], sig, barrier_, ad.k_w);
            o += p_;
            const auto& net = s.nets[ui];
            for (std::size_t j = 0; j < net.v_hat.size(); ++j) {
                const auto sz = net.v_hat[j].size();
                if (static_cast<int>(j) == layer) {
                    const Matrix dv = inner_update(net, j, sig, t, barrier_, ad);
                    dy.segment(o, sz) = Eigen::Map<const Vector>(dv.data(), sz);
                }
                o += sz;
            }
        }
        return dy;
    }

    /// One fixed step from packed state y at time t.
    Vector step_packed(double t, const Vector& y) const {
        Vector next = integrate_step(
            cfg_.integrator.method, [this](double tt, const Vector& yy, int stage) { return derivative(tt, yy, stage); }, t, y,
            cfg_.integrator.dt);
        if (!next.allFinite()) throw NumericOverflow(fmt::format("non-finite state after the step from t = {}", t));
        return next;
    }

    /// Observable Lyapunov part 1/2 Upsilon(||r||_P) + 1/2 tr(E1 P1 E1^T).
    double observable_lyapunov(const ErrorState& err, double r_norm) const {
        return 0.5 * barrier_.potential(r_norm) + 0.5 * (err.e1 * design_.p1 * err.e1.transpose()).trace();
    }

    /// Weight-error part 1/2 sum_i W~^T K_W^{-1} W~ + 1/2 sum_ij ||V~_ij||_F^2
    /// (synthetic mode only).
    double weight_error_energy(const std::vector<AgentNetwork>& nets) const {
        double acc = 0.0;
        for (std::size_t i = 0; i < nets.size(); ++i) {
            const auto& ideal = cfg_.synthetic.ideal[i];
            const Vector wt = ideal.w_hat - nets[i].w_hat;
            acc += 0.5 * wt.dot(k_w_inv_ * wt);
            for (std::size_t j = 0; j < ideal.v_hat.size(); ++j) acc += 0.5 * (ideal.v_hat[j] - nets[i].v_hat[j]).squaredNorm();
        }
        return acc;
    }

    static ScenarioConfig make_synthetic(ScenarioConfig cfg) {
        cfg.synthetic.ideal.clear();
        UniformSource rng(cfg.stream_seed(SeedStream::ideal_network));
        const double a = cfg.synthetic.ideal_range;
        for (std::size_t i = 0; i < cfg.followers(); ++i) cfg.synthetic.ideal.push_back(AgentNetwork::uniform(cfg.arch, -a, a, rng));
        return cfg;
    }

private:
    ScenarioConfig cfg_;
    GraphMatrices gm_;
    SlidingDesign design_;
    BarrierFunction barrier_;
    Eigen::Index n_ = 0;
    int m_ = 0;
    Eigen::Index p_ = 0;
    Eigen::Index net_size_ = 0;
    Vector lambda_;
    Vector p_diag_;
    std::vector<double> g_;
    Matrix k_w_inv_;
};

/// Draws one ideal network per follower (seeded) and makes each follower's
/// dynamics that network's exact output.
inline ScenarioConfig synthetic_truth_setup(const ScenarioConfig& cfg) {
    if (cfg.mode != RunMode::synthetic_truth)
        throw ValidationError("sim.ScenarioConfig: synthetic_truth_setup requires mode synthetic_truth");
    return SimContext::make_synthetic(cfg);
}

/// Gain certificate for a scenario. Unless the bounds carry psi_mu, psi is
/// the constant bound of the default inner-layer shaping, confirmed on a
/// grid of r in [-mu, mu] for every follower's p_i.
inline GainCertificate certify_gains(const ScenarioConfig& cfg, const BoundEstimates& bounds) {
    const auto gm = build_matrices(cfg.topology);
    std::optional<double> psi;
    if (!bounds.psi_mu) {
        std::vector<double> grid;
        for (int k = -200; k <= 200; ++k) grid.push_back(cfg.mu * k / 200.0);
        const Vector pd = gm.p_diag();
        psi = check_default_v_bound(cfg.adaptation, grid, std::vector<double>(pd.data(), pd.data() + pd.size())).psi;
    }
    return gain_certificate(gm, cfg.design(), bounds, cfg.arch.inner_layers(), psi, cfg.gains);
}

/// One fixed step of the configured method.
inline SimState step(const SimState& state, const SimContext& ctx) {
    const Vector next = ctx.step_packed(state.t, ctx.pack(state));
    return ctx.unpack(next, state.t + ctx.config().integrator.dt);
}

struct TraceRecord {
    double t = 0.0;
    Matrix x;
    Vector x0;
    Vector e_norm;  // ||e^m||_P, m = 1..M
    Vector r;
    double r_norm = 0.0;
    Vector u;
    Vector w_norm;  // per agent
    Matrix v_norm;  // N x (k+1)
    int active_layer = -1;
    double barrier_value = 0.0;  // Upsilon(||r||_P)
    double v_obs = 0.0;
    std::optional<double> v_full;
};

inline TraceRecord make_record(const SimContext& ctx, const SimState& s) {
    const auto ev = ctx.evaluate(s);
    TraceRecord rec;
    rec.t = s.t;
    rec.x = s.x;
    rec.x0 = s.x0;
    const Vector pd = ctx.graph().p_diag();
    rec.e_norm.resize(ev.err.e.cols());
    for (Eigen::Index m = 0; m < ev.err.e.cols(); ++m) rec.e_norm(m) = weighted_norm_diag(ev.err.e.col(m), pd);
    rec.r = ev.err.r;
    rec.r_norm = ev.r_norm;
    rec.u = ev.u;
    const auto n = static_cast<Eigen::Index>(s.nets.size());
    rec.w_norm.resize(n);
    rec.v_norm.resize(n, static_cast<Eigen::Index>(ctx.config().arch.layer_count()));
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto& net = s.nets[static_cast<std::size_t>(i)];
        rec.w_norm(i) = net.w_hat.norm();
        for (std::size_t j = 0; j < net.v_hat.size(); ++j) rec.v_norm(i, static_cast<Eigen::Index>(j)) = net.v_hat[j].norm();
    }
    rec.active_layer = active_layer(s.t, ctx.config().arch.inner_layers(), ctx.config().adaptation);
    rec.barrier_value = ctx.barrier().potential(ev.r_norm);
    rec.v_obs = ctx.observable_lyapunov(ev.err, ev.r_norm);
    if (ctx.synthetic()) rec.v_full = rec.v_obs + ctx.weight_error_energy(s.nets);
    return rec;
}

struct MonitorSettings {
    double chatter_band = 0.0;
    double rel_tol = 1e-6;
    std::vector<double> v_upper;  // per layer; empty skips the band check
    double band_slack = 1e-3;

    static MonitorSettings from(const ScenarioConfig& cfg) {
        return MonitorSettings{cfg.chatter_band(), cfg.monitor.decrease_rel_tol, cfg.adaptation.v_upper, 1e-3};
    }
};

struct MonitorReport {
    std::size_t samples = 0;
    double max_r_norm = 0.0;
    double t_max_r_norm = 0.0;
    Vector max_e_norm;  // per m
    double max_e_norm_all = 0.0;
    bool barrier_respected = true;       // max ||r||_P < mu
    bool corollary_applicable = false;   // sum(lambda) > 1
    bool corollary_holds = true;         // max ||e^m||_P < mu while ||r||_P < mu
    std::size_t corollary_violations = 0;

    std::string lyapunov_kind = "observable";
    double chatter_band = 0.0;
    std::size_t decrease_checked = 0;
    std::size_t decrease_excluded = 0;
    std::size_t decrease_violations = 0;
    double worst_increase = 0.0;  // largest dV - tol over checked pairs (<= 0 when none)
    double t_worst_increase = 0.0;

    double initial_tracking_error = 0.0;  // max_i |x_i^1 - x0^1| at the first sample
    double tail_tracking_error = 0.0;     // same, max over the last 10% of the run
    Vector final_tracking_error;          // per agent at the last sample

    Vector max_v_norm;  // per layer across agents
    std::size_t band_violations = 0;
    double max_surface_residual = 0.0;
};

inline double tracking_error(const TraceRecord& rec) {
    return (rec.x.col(0).array() - rec.x0(0)).abs().maxCoeff();
}

/// Recomputes every report field from the trace. Errors and the observable
/// Lyapunov part are rebuilt from x and x0; the full candidate is read from
/// the trace because it depends on weights that the trace only summarizes.
inline MonitorReport monitor(const std::vector<TraceRecord>& trace, const SlidingDesign& design, const GraphMatrices& gm,
                             const BarrierFunction& barrier, const MonitorSettings& settings) {
    MonitorReport rep;
    rep.chatter_band = settings.chatter_band;
    rep.corollary_applicable = design.corollary_precondition();
    rep.samples = trace.size();
    if (trace.empty()) return rep;

    const Vector pd = gm.p_diag();
    const bool full = trace.front().v_full.has_value();
    rep.lyapunov_kind = full ? "full" : "observable";
    const auto order = trace.front().x.cols();
    rep.max_e_norm = Vector::Zero(order);
    rep.max_v_norm = Vector::Zero(trace.front().v_norm.cols());

    std::vector<double> lyap(trace.size());
    std::vector<double> min_abs_r(trace.size());
    bool r_ok_so_far = true;
    for (std::size_t k = 0; k < trace.size(); ++k) {
        const auto& rec = trace[k];
        const ErrorState err = sliding_variable(sync_errors(rec.x, rec.x0, gm), design.lambda_bar);
        const double rn = weighted_norm_diag(err.r, pd);
        if (rn > rep.max_r_norm) {
            rep.max_r_norm = rn;
            rep.t_max_r_norm = rec.t;
        }
        r_ok_so_far = r_ok_so_far && rn < barrier.mu();
        for (Eigen::Index m = 0; m < order; ++m) {
            const double en = weighted_norm_diag(err.e.col(m), pd);
            rep.max_e_norm(m) = std::max(rep.max_e_norm(m), en);
            if (r_ok_so_far && !(en < barrier.mu())) ++rep.corollary_violations;
        }
        rep.max_surface_residual = std::max(rep.max_surface_residual, err.surface_identity_residual(design));
        min_abs_r[k] = err.r.cwiseAbs().minCoeff();
        if (full) {
            lyap[k] = *rec.v_full;
        } else {
            lyap[k] = barrier.inside(rn) ? 0.5 * barrier.potential(rn) + 0.5 * (err.e1 * design.p1 * err.e1.transpose()).trace()
                                         : std::numeric_limits<double>::infinity();
        }
        for (Eigen::Index j = 0; j < rec.v_norm.cols(); ++j) {
            for (Eigen::Index i = 0; i < rec.v_norm.rows(); ++i) {
                const double v = rec.v_norm(i, j);
                rep.max_v_norm(j) = std::max(rep.max_v_norm(j), v);
                if (static_cast<std::size_t>(j) < settings.v_upper.size() &&
                    v > settings.v_upper[static_cast<std::size_t>(j)] * (1.0 + settings.band_slack))
                    ++rep.band_violations;
            }
        }
    }
    rep.max_e_norm_all = rep.max_e_norm.maxCoeff();
    rep.barrier_respected = rep.max_r_norm < barrier.mu();
    rep.corollary_holds = rep.corollary_violations == 0;

    rep.worst_increase = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k + 1 < trace.size(); ++k) {
        if (min_abs_r[k] < settings.chatter_band || min_abs_r[k + 1] < settings.chatter_band) {
            ++rep.decrease_excluded;
            continue;
        }
        ++rep.decrease_checked;
        const double tol = settings.rel_tol * (1.0 + std::abs(lyap[k]));
        const double excess = (lyap[k + 1] - lyap[k]) - tol;
        if (excess > rep.worst_increase) {
            rep.worst_increase = excess;
            rep.t_worst_increase = trace[k].t;
        }
        if (excess > 0.0) ++rep.decrease_violations;
    }
    if (rep.decrease_checked == 0) rep.worst_increase = 0.0;

    rep.initial_tracking_error = tracking_error(trace.front());
    const double t0 = trace.front().t;
    const double t1 = trace.back().t;
    const double tail_start = t1 - 0.1 * (t1 - t0);
    for (const auto& rec : trace)
        if (rec.t >= tail_start) rep.tail_tracking_error = std::max(rep.tail_tracking_error, tracking_error(rec));
    rep.final_tracking_error = (trace.back().x.col(0).array() - trace.back().x0(0)).abs().matrix();
    return rep;
}

enum class RunStatus { completed, barrier_breach, initial_barrier_violation, numeric_overflow, eval_error };

inline std::string_view to_string(RunStatus s) {
    switch (s) {
        case RunStatus::completed: return "completed";
        case RunStatus::barrier_breach: return "barrier_breach";
        case RunStatus::initial_barrier_violation: return "initial_barrier_violation";
        case RunStatus::numeric_overflow: return "numeric_overflow";
        case RunStatus::eval_error: return "eval_error";
    }
    return "completed";
}

struct RunResult {
    ScenarioConfig config;  // as run, including synthetic ideal networks
    std::vector<TraceRecord> trace;
    MonitorReport report;
    RunStatus status = RunStatus::completed;
    std::string message;  // abort diagnostics
    double t_end = 0.0;
    std::vector<double> amplitudes;
    long long steps = 0;

    bool completed() const { return status == RunStatus::completed; }
};

/// Runs a validated configuration to t_final. Aborts are reported through
/// the status; the trace keeps every sample recorded before the abort.
inline RunResult run(const ScenarioConfig& config) {
    validate_config(config);
    const SimContext ctx(config);
    RunResult res;
    res.config = ctx.config();
    res.amplitudes = ctx.amplitudes();

    const auto& in = ctx.config().integrator;
    const long long total = in.step_count();
    SimState state = ctx.initial_state();
    Vector y = ctx.pack(state);

    const auto finish = [&] {
        res.report = monitor(res.trace, ctx.design(), ctx.graph(), ctx.barrier(), MonitorSettings::from(ctx.config()));
    };

    const auto& ad = ctx.config().adaptation;
    for (std::size_t i = 0; i < state.nets.size(); ++i)
        for (std::size_t j = 0; j < state.nets[i].v_hat.size(); ++j) {
            const double v = state.nets[i].v_hat[j].norm();
            if (!in_band(v, ad.v_lower[j], ad.v_upper[j]))
                throw ValidationError(fmt::format(
                    "dnn.AdaptationConfig: initial ||V_{}{}||_F = {} must start inside the band [{}, {}]", i + 1, j, v,
                    ad.v_lower[j], ad.v_upper[j]));
        }

    {
        const auto ev = ctx.evaluate(state);
        if (!(ev.r_norm < ctx.barrier().mu())) {
            res.status = RunStatus::initial_barrier_violation;
            res.message = InitialBarrierViolation(fmt::format("||r(0)||_P = {} is not below mu = {}", ev.r_norm, ctx.barrier().mu())).what();
            finish();
            return res;
        }
    }

    long long n = 0;
    try {
        res.trace.push_back(make_record(ctx, state));
        for (n = 0; n < total; ++n) {
            const double t = static_cast<double>(n) * in.dt;
            y = ctx.step_packed(t, y);
            const long long done = n + 1;
            if (done % in.decimation == 0 || done == total)
                res.trace.push_back(make_record(ctx, ctx.unpack(y, static_cast<double>(done) * in.dt)));
        }
    } catch (const BarrierBreach& e) {
        res.status = RunStatus::barrier_breach;
        res.message = e.what();
    } catch (const NumericOverflow& e) {
        res.status = RunStatus::numeric_overflow;
        res.message = e.what();
    } catch (const EvalError& e) {
        res.status = RunStatus::eval_error;
        res.message = e.what();
    } catch (const DomainExceeded& e) {
        res.status = RunStatus::barrier_breach;
        res.message = e.what();
    }
    res.steps = n;
    res.t_end = static_cast<double>(n) * in.dt;
    finish();
    return res;
}

}  // namespace simlab
