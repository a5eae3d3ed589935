#pragma once

// Declarative description of one experiment and its cross-module checks.

#include "simlab/barrier.hpp"
#include "simlab/controller.hpp"
#include "simlab/dnn.hpp"
#include "simlab/errors.hpp"
#include "simlab/graph.hpp"
#include "simlab/integrator.hpp"
#include "simlab/plant.hpp"
#include "simlab/random.hpp"
#include "simlab/sliding.hpp"

#include <fmt/format.h>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace simlab {

enum class RunMode { standard, synthetic_truth };

inline std::string_view to_string(RunMode m) { return m == RunMode::standard ? "standard" : "synthetic_truth"; }

inline RunMode run_mode_from_string(std::string_view s) {
    if (s == "standard") return RunMode::standard;
    if (s == "synthetic_truth") return RunMode::synthetic_truth;
    throw ValidationError(fmt::format("sim.ScenarioConfig: mode must be standard or synthetic_truth, got '{}'", s));
}

struct SlidingConfig {
    std::vector<double> lambda;  // used when roots is empty
    std::vector<double> roots;   // factors (s + beta_k)
    double alpha = 1.0;

    Vector resolved_lambda() const {
        if (!roots.empty()) return lambdas_from_roots(roots);
        return Eigen::Map<const Vector>(lambda.data(), static_cast<Eigen::Index>(lambda.size()));
    }

    bool operator==(const SlidingConfig&) const = default;
};

struct DisturbanceConfig {
    double lower = -5.0;
    double upper = 5.0;
    std::optional<std::uint64_t> seed;

    bool operator==(const DisturbanceConfig&) const = default;
};

struct NetworkInitConfig {
    double lower = -10.5;
    double upper = 10.5;
    std::optional<std::uint64_t> seed;

    bool operator==(const NetworkInitConfig&) const = default;
};

struct IntegratorConfig {
    IntegrationMethod method = IntegrationMethod::rk4;
    double dt = 1e-3;
    double t_final = 20.0;
    int decimation = 10;

    long long step_count() const { return std::llround(t_final / dt); }

    bool operator==(const IntegratorConfig&) const = default;
};

struct MonitorConfig {
    std::optional<double> chatter_band;  // default 10 * dt * gamma2
    double decrease_rel_tol = 1e-6;

    bool operator==(const MonitorConfig&) const = default;
};

enum class SyntheticInit { ideal, perturbed, random };

inline std::string_view to_string(SyntheticInit s) {
    switch (s) {
        case SyntheticInit::ideal: return "ideal";
        case SyntheticInit::perturbed: return "perturbed";
        case SyntheticInit::random: return "random";
    }
    return "ideal";
}

inline SyntheticInit synthetic_init_from_string(std::string_view s) {
    if (s == "ideal") return SyntheticInit::ideal;
    if (s == "perturbed") return SyntheticInit::perturbed;
    if (s == "random") return SyntheticInit::random;
    throw ValidationError(fmt::format("sim.ScenarioConfig: synthetic init must be ideal, perturbed or random, got '{}'", s));
}

struct SyntheticConfig {
    double ideal_range = 1.0;  // ideal weights drawn from [-range, range]
    SyntheticInit init = SyntheticInit::perturbed;
    double perturbation = 0.05;
    std::optional<std::uint64_t> seed;
    /// Filled by synthetic_truth_setup; one ideal network per follower.
    std::vector<AgentNetwork> ideal;

    bool operator==(const SyntheticConfig& o) const {
        return ideal_range == o.ideal_range && init == o.init && perturbation == o.perturbation && seed == o.seed;
    }
};

struct ScenarioConfig {
    std::string name = "scenario";
    std::uint64_t seed = 0;
    RunMode mode = RunMode::standard;

    DirectedTopology topology;
    SlidingConfig sliding;
    double mu = 1.0;
    BarrierForm barrier_form = BarrierForm::rational;

    LeaderModel leader;
    std::vector<FollowerModel> agents;
    DisturbanceConfig disturbance;

    DeepNetworkArch arch;
    AdaptationConfig adaptation;
    NetworkInitConfig init;

    ControllerGains gains;
    IntegratorConfig integrator;
    MonitorConfig monitor;
    SyntheticConfig synthetic;

    std::size_t followers() const { return topology.size(); }
    int order() const { return leader.order(); }
    BarrierFunction barrier() const { return BarrierFunction(mu, barrier_form); }
    SlidingDesign design() const { return companion_and_lyapunov(sliding.resolved_lambda(), sliding.alpha); }

    double chatter_band() const {
        return monitor.chatter_band ? *monitor.chatter_band : 10.0 * integrator.dt * gains.gamma2;
    }

    std::uint64_t stream_seed(SeedStream s) const {
        switch (s) {
            case SeedStream::network_init:
                if (init.seed) return *init.seed;
                break;
            case SeedStream::disturbance:
                if (disturbance.seed) return *disturbance.seed;
                break;
            case SeedStream::ideal_network:
            case SeedStream::perturbation:
                if (synthetic.seed) return derive_seed(*synthetic.seed, s);
                break;
        }
        return derive_seed(seed, s);
    }

    bool operator==(const ScenarioConfig& o) const {
        if (!(name == o.name && seed == o.seed && mode == o.mode && topology.adjacency == o.topology.adjacency &&
              topology.pinning == o.topology.pinning && sliding == o.sliding && mu == o.mu &&
              barrier_form == o.barrier_form && leader.f0 == o.leader.f0 &&
              leader.initial_state == o.leader.initial_state && agents.size() == o.agents.size() &&
              disturbance == o.disturbance && arch == o.arch && adaptation == o.adaptation && init == o.init &&
              gains == o.gains && integrator == o.integrator && monitor == o.monitor && synthetic == o.synthetic))
            return false;
        for (std::size_t i = 0; i < agents.size(); ++i)
            if (!(agents[i].f == o.agents[i].f && agents[i].initial_state == o.agents[i].initial_state &&
                  agents[i].disturbance == o.agents[i].disturbance))
                return false;
        return true;
    }
};

inline bool is_symmetric_psd(const Matrix& m, bool strict) {
    if (m.rows() != m.cols() || !m.isApprox(m.transpose(), 1e-12)) return false;
    const double lo = symmetric_eigenvalues(m).minCoeff();
    const double scale = std::max(1.0, m.cwiseAbs().maxCoeff()) * static_cast<double>(m.rows());
    return strict ? lo > kPositiveDefiniteThreshold : lo >= -1e-12 * scale;
}

/// Checks every cross-module invariant that does not need a run. Throws
/// ValidationError naming the violated invariant.
inline void validate_config(const ScenarioConfig& cfg) {
    cfg.topology.validate_shape();
    const auto reach = check_reachability(cfg.topology);
    if (!reach.all_reachable) {
        std::string nodes;
        for (auto i : reach.unreachable) nodes += fmt::format(" {}", i);
        throw ValidationError("graph.DirectedTopology: every follower must be reachable from a pinned follower; unreachable:" +
                              nodes);
    }
    const std::size_t n = cfg.followers();

    if (!cfg.sliding.roots.empty() && !cfg.sliding.lambda.empty())
        throw ValidationError("sliding.SlidingDesign: give either lambda or roots, not both");
    if (cfg.sliding.roots.empty() && cfg.sliding.lambda.empty())
        throw ValidationError("sliding.SlidingDesign: one of lambda or roots is required");
    try {
        (void)cfg.design();
    } catch (const NotHurwitz& e) {
        throw ValidationError(std::string("sliding.SlidingDesign: surface polynomial must be Hurwitz (") + e.what() + ")");
    } catch (const NonPositiveRoot& e) {
        throw ValidationError(std::string("sliding.SlidingDesign: roots must be positive (") + e.what() + ")");
    } catch (const SolveFailure& e) {
        throw ValidationError(std::string("sliding.SlidingDesign: Lyapunov solution must exist and be PD (") + e.what() + ")");
    }
    const int order = static_cast<int>(cfg.sliding.resolved_lambda().size()) + 1;

    (void)cfg.barrier();

    if (cfg.leader.order() != order)
        throw ValidationError(fmt::format("plant.LeaderModel: leader state has {} entries but the surface implies order M = {}",
                                          cfg.leader.order(), order));
    if (!cfg.leader.f0.valid()) throw ValidationError("plant.LeaderModel: f0 expression is required");
    if (cfg.leader.f0.order() != order)
        throw ValidationError("plant.LeaderModel: f0 must be parsed with the scenario order");
    if (cfg.agents.size() != n)
        throw ValidationError(fmt::format("plant.FollowerModel: {} agents configured but topology has {} followers",
                                          cfg.agents.size(), n));
    for (std::size_t i = 0; i < n; ++i) {
        const auto& a = cfg.agents[i];
        if (a.initial_state.size() != order)
            throw ValidationError(fmt::format("plant.FollowerModel: agent {} initial state has {} entries, need M = {}", i + 1,
                                              a.initial_state.size(), order));
        if (cfg.mode == RunMode::standard && !a.f.valid())
            throw ValidationError(fmt::format("plant.FollowerModel: agent {} needs an f expression", i + 1));
    }
    if (!(cfg.disturbance.lower <= cfg.disturbance.upper))
        throw ValidationError("plant.DisturbanceModel: amplitude range must satisfy lower <= upper");

    cfg.arch.validate();
    if (cfg.arch.input_dim != order)
        throw ValidationError(fmt::format("dnn.DeepNetworkArch: input dimension {} must equal M = {}", cfg.arch.input_dim, order));
    const auto layers = cfg.arch.layer_count();
    const auto p = cfg.arch.output_width();
    const auto& ad = cfg.adaptation;
    if (ad.k_w.rows() != p || ad.k_w.cols() != p)
        throw ValidationError(fmt::format("dnn.AdaptationConfig: k_w must be {}x{}, got {}x{}", p, p, ad.k_w.rows(), ad.k_w.cols()));
    const bool strict = cfg.mode == RunMode::synthetic_truth;
    if (!is_symmetric_psd(ad.k_w, strict))
        throw ValidationError(strict ? "dnn.AdaptationConfig: k_w must be symmetric positive definite in synthetic_truth mode"
                                     : "dnn.AdaptationConfig: k_w must be symmetric positive semidefinite");
    if (ad.k_v.size() != layers)
        throw ValidationError(fmt::format("dnn.AdaptationConfig: need {} k_v gains (one per layer), got {}", layers, ad.k_v.size()));
    for (std::size_t j = 0; j < layers; ++j)
        if (ad.k_v[j].rows() != cfg.arch.layer_rows(j) || ad.k_v[j].cols() != cfg.arch.layer_cols(j))
            throw ValidationError(fmt::format("dnn.AdaptationConfig: k_v[{}] must be {}x{}, got {}x{}", j, cfg.arch.layer_rows(j),
                                              cfg.arch.layer_cols(j), ad.k_v[j].rows(), ad.k_v[j].cols()));
    if (ad.v_lower.size() != layers || ad.v_upper.size() != layers)
        throw ValidationError("dnn.AdaptationConfig: band [V_lower, V_upper] needs one entry per layer");
    for (std::size_t j = 0; j < layers; ++j) {
        if (!(0.0 <= ad.v_lower[j] && ad.v_lower[j] < ad.v_upper[j]))
            throw ValidationError(fmt::format("dnn.AdaptationConfig: band ordering 0 <= V_lower < V_upper violated for layer {} ({} , {})",
                                              j, ad.v_lower[j], ad.v_upper[j]));
        if (ad.v_bound && ad.v_upper[j] > *ad.v_bound)
            throw ValidationError(fmt::format("dnn.AdaptationConfig: V_upper[{}] = {} exceeds the bound V_m = {}", j, ad.v_upper[j],
                                              *ad.v_bound));
    }
    if (!(ad.switch_period > 0.0)) throw ValidationError("dnn.AdaptationConfig: switch period must be positive");
    if (!(cfg.init.lower <= cfg.init.upper)) throw ValidationError("dnn.AgentNetwork: init range must satisfy lower <= upper");

    cfg.gains.validate();

    const auto& in = cfg.integrator;
    if (!(in.dt > 0.0)) throw ValidationError(fmt::format("sim.ScenarioConfig: dt > 0, got {}", in.dt));
    if (!(in.t_final > 0.0)) throw ValidationError(fmt::format("sim.ScenarioConfig: t_final > 0, got {}", in.t_final));
    if (in.decimation < 1) throw ValidationError(fmt::format("sim.ScenarioConfig: decimation >= 1, got {}", in.decimation));
    if (in.step_count() < 1) throw ValidationError("sim.ScenarioConfig: t_final must cover at least one step");
    if (cfg.monitor.chatter_band && *cfg.monitor.chatter_band < 0.0)
        throw ValidationError("sim.MonitorReport: chatter band must be nonnegative");

    if (cfg.mode == RunMode::synthetic_truth) {
        if (!(cfg.synthetic.ideal_range > 0.0)) throw ValidationError("sim.ScenarioConfig: synthetic ideal_range must be positive");
        if (!(cfg.synthetic.perturbation >= 0.0)) throw ValidationError("sim.ScenarioConfig: synthetic perturbation must be >= 0");
    }
}

}  // namespace simlab
