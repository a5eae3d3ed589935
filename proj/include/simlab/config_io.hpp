#pragma once

// Scenario files are YAML (JSON is accepted too, being a YAML subset).
//
//   name: reference          # optional
//   seed: 42                 # required; no wall-clock seeding
//   mode: standard           # or synthetic_truth
//   topology:
//     adjacency: [[0, 0], [1, 0]]   # a_ij > 0 means follower i hears follower j
//     pinning: [1, 0]
//   sliding: {lambda: [2, 1], alpha: 1}       # or roots: [1, 2]
//   barrier: {mu: 300, form: rational}        # form: rational | log
//   leader: {f: "-sin(x2^2)", x0: [30, 5, 2]}
//   agents:
//     - {f: "x2*sin(x1)", x0: [40, 2.6, 1], disturbance: cos_t}
//   disturbance: {range: [-5, 5]}             # amplitudes g_i drawn once per run
//   network:
//     widths: [10, 12, 20]    # L_1 .. L_{k+1}; the last width is p
//     inner_activation: tanh
//     output_activation: tanh
//     init_range: [-10.5, 10.5]
//   adaptation:
//     k_w: "10 * ones(20,20)"   # matrix, or K * ones(a,b) | K * ones | K * eye(n) | K * eye
//     k_v: "10 * ones"          # one entry for every layer, or a list with one per layer
//     v_lower: 1e-6             # scalar or per-layer list
//     v_upper: 250
//     switch_period: 2
//     schedule: cyclic          # or one_shot
//     barrier_argument: per_agent   # or global
//   controller: {gamma1: 500, gamma2: 0.1, boundary_layer: 0}
//   integrator: {method: rk4, dt: 0.001, t_final: 20, decimation: 10}
//   monitor: {chatter_band: 0.001, decrease_rel_tol: 1e-6}
//   synthetic: {ideal_range: 1, init: perturbed, perturbation: 0.05}
//
// Unknown keys are rejected.

#include "simlab/errors.hpp"
#include "simlab/expr.hpp"
#include "simlab/scenario.hpp"

#include <fmt/format.h>
#include <nlohmann/json.hpp>
#include <yaml-cpp/yaml.h>

#include <cctype>
#include <fstream>
#include <initializer_list>
#include <regex>
#include <set>
#include <sstream>
#include <string>
#include <vector>

namespace simlab {

namespace detail {

inline std::string where(const YAML::Node& n) {
    const auto m = n.Mark();
    if (m.is_null()) return "";
    return fmt::format(" (line {}, column {})", m.line + 1, m.column + 1);
}

inline ParseError parse_error(const YAML::Node& n, const std::string& what) { return ParseError(what + where(n)); }

inline void check_keys(const YAML::Node& n, const std::string& section, std::initializer_list<const char*> allowed) {
    if (!n.IsMap()) throw parse_error(n, fmt::format("section '{}' must be a mapping", section));
    std::set<std::string> ok(allowed.begin(), allowed.end());
    for (const auto& kv : n) {
        const auto key = kv.first.as<std::string>();
        if (!ok.count(key))
            throw parse_error(kv.first, fmt::format("unknown key '{}' in section '{}'", key, section.empty() ? "<root>" : section));
    }
}

template <typename T>
T scalar(const YAML::Node& n, const std::string& what) {
    if (!n.IsScalar()) throw parse_error(n, fmt::format("'{}' must be a scalar", what));
    try {
        return n.as<T>();
    } catch (const YAML::Exception&) {
        throw parse_error(n, fmt::format("'{}' has an invalid value '{}'", what, n.Scalar()));
    }
}

inline double number(const YAML::Node& n, const std::string& what) {
    if (n.IsScalar()) {
        const std::string s = n.Scalar();
        if (s == ".inf" || s == "inf") return std::numeric_limits<double>::infinity();
    }
    return scalar<double>(n, what);
}

template <typename T>
T get_or(const YAML::Node& parent, const char* key, T fallback, const std::string& what) {
    const auto n = parent[key];
    if (!n) return fallback;
    if constexpr (std::is_same_v<T, double>)
        return number(n, what);
    else
        return scalar<T>(n, what);
}

inline YAML::Node require(const YAML::Node& parent, const char* key, const std::string& section) {
    const auto n = parent[key];
    if (!n) throw parse_error(parent, fmt::format("missing required key '{}' in section '{}'", key, section.empty() ? "<root>" : section));
    return n;
}

inline std::vector<double> number_list(const YAML::Node& n, const std::string& what) {
    if (!n.IsSequence()) throw parse_error(n, fmt::format("'{}' must be a list of numbers", what));
    std::vector<double> out;
    for (const auto& e : n) out.push_back(number(e, what));
    return out;
}

inline Vector to_vector(const std::vector<double>& v) {
    return Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
}

/// Parses a matrix given as nested lists or the gain shorthand. rows/cols
/// supply the shape for the shape-less forms.
inline Matrix gain_matrix(const YAML::Node& n, const std::string& what, Eigen::Index rows, Eigen::Index cols) {
    if (n.IsSequence()) {
        const auto r = static_cast<Eigen::Index>(n.size());
        if (r == 0) throw parse_error(n, fmt::format("'{}' is an empty matrix", what));
        const auto c = n[0].IsSequence() ? static_cast<Eigen::Index>(n[0].size()) : 0;
        Matrix m(r, c);
        for (Eigen::Index i = 0; i < r; ++i) {
            const auto row = n[static_cast<std::size_t>(i)];
            if (!row.IsSequence() || static_cast<Eigen::Index>(row.size()) != c)
                throw parse_error(row, fmt::format("'{}' rows must be lists of equal length", what));
            for (Eigen::Index j = 0; j < c; ++j) m(i, j) = number(row[static_cast<std::size_t>(j)], what);
        }
        return m;
    }
    if (!n.IsScalar()) throw parse_error(n, fmt::format("'{}' must be a matrix or gain shorthand", what));
    static const std::regex re(
        R"(^\s*([-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?)\s*\*\s*(ones|eye)\s*(?:\(\s*(\d+)\s*(?:,\s*(\d+)\s*)?\))?\s*$)");
    std::smatch mt;
    const std::string s = n.Scalar();
    if (!std::regex_match(s, mt, re)) {
        try {
            // A bare number means that constant times ones.
            const double k = n.as<double>();
            return Matrix::Constant(rows, cols, k);
        } catch (const YAML::Exception&) {
            throw parse_error(n, fmt::format("'{}': cannot read gain '{}' (expected K * ones(a,b), K * ones, K * eye(n), "
                                             "K * eye, a number or a nested list)",
                                             what, s));
        }
    }
    const double k = std::stod(mt[1].str());
    const bool eye = mt[2].str() == "eye";
    Eigen::Index r = rows, c = cols;
    if (mt[3].matched) {
        r = std::stol(mt[3].str());
        c = mt[4].matched ? std::stol(mt[4].str()) : r;
        if (eye && mt[4].matched && r != c) throw parse_error(n, fmt::format("'{}': eye needs a square shape", what));
    }
    return eye ? Matrix(k * Matrix::Identity(r, c)) : Matrix::Constant(r, c, k);
}

inline std::vector<double> per_layer(const YAML::Node& n, std::size_t layers, const std::string& what) {
    if (n.IsSequence()) return number_list(n, what);
    return std::vector<double>(layers, number(n, what));
}

inline DynamicsExpr expression(const YAML::Node& n, int order, ExprScope scope, const std::string& owner) {
    const auto src = scalar<std::string>(n, owner + ".f");
    try {
        return DynamicsExpr::parse(src, order, scope);
    } catch (const ExprError& e) {
        throw ValidationError(fmt::format("{}: dynamics expression '{}' is invalid ({}){}", owner, src, e.what(), where(n)));
    }
}

}  // namespace detail

/// Parses scenario text and validates it. Throws ParseError (with line and
/// column) for malformed input and ValidationError for broken invariants.
inline ScenarioConfig load_config_string(const std::string& text) {
    using namespace detail;
    YAML::Node root;
    try {
        root = YAML::Load(text);
    } catch (const YAML::ParserException& e) {
        throw ParseError(fmt::format("{} (line {}, column {})", e.msg, e.mark.line + 1, e.mark.column + 1));
    }
    if (!root || !root.IsMap()) throw ParseError("scenario must be a mapping at the top level");
    check_keys(root, "", {"name", "seed", "mode", "topology", "sliding", "barrier", "leader", "agents", "disturbance", "network",
                          "adaptation", "controller", "integrator", "monitor", "synthetic"});

    ScenarioConfig cfg;
    cfg.name = get_or<std::string>(root, "name", cfg.name, "name");
    cfg.seed = scalar<std::uint64_t>(require(root, "seed", ""), "seed");
    cfg.mode = run_mode_from_string(get_or<std::string>(root, "mode", "standard", "mode"));

    {
        const auto t = require(root, "topology", "");
        check_keys(t, "topology", {"adjacency", "pinning"});
        cfg.topology.pinning = to_vector(number_list(require(t, "pinning", "topology"), "topology.pinning"));
        const auto n = cfg.topology.pinning.size();
        cfg.topology.adjacency = t["adjacency"] ? gain_matrix(t["adjacency"], "topology.adjacency", n, n) : Matrix::Zero(n, n);
    }
    {
        const auto s = require(root, "sliding", "");
        check_keys(s, "sliding", {"lambda", "roots", "alpha"});
        if (s["lambda"]) cfg.sliding.lambda = number_list(s["lambda"], "sliding.lambda");
        if (s["roots"]) cfg.sliding.roots = number_list(s["roots"], "sliding.roots");
        cfg.sliding.alpha = get_or<double>(s, "alpha", 1.0, "sliding.alpha");
    }
    const int order = static_cast<int>(cfg.sliding.roots.empty() ? cfg.sliding.lambda.size() : cfg.sliding.roots.size()) + 1;
    {
        const auto b = require(root, "barrier", "");
        check_keys(b, "barrier", {"mu", "form"});
        cfg.mu = number(require(b, "mu", "barrier"), "barrier.mu");
        cfg.barrier_form = barrier_form_from_string(get_or<std::string>(b, "form", "rational", "barrier.form"));
    }
    {
        const auto l = require(root, "leader", "");
        check_keys(l, "leader", {"f", "x0"});
        cfg.leader.initial_state = to_vector(number_list(require(l, "x0", "leader"), "leader.x0"));
        cfg.leader.f0 = expression(require(l, "f", "leader"), order, ExprScope::leader, "plant.LeaderModel");
    }
    {
        const auto a = require(root, "agents", "");
        if (!a.IsSequence()) throw parse_error(a, "'agents' must be a list");
        std::size_t i = 0;
        for (const auto& ag : a) {
            ++i;
            const std::string sec = fmt::format("agents[{}]", i);
            check_keys(ag, sec, {"f", "x0", "disturbance"});
            FollowerModel fm;
            fm.initial_state = to_vector(number_list(require(ag, "x0", sec), sec + ".x0"));
            if (ag["f"])
                fm.f = expression(ag["f"], order, ExprScope::follower, fmt::format("plant.FollowerModel agent {}", i));
            fm.disturbance = disturbance_kind_from_string(get_or<std::string>(ag, "disturbance", "none", sec + ".disturbance"));
            cfg.agents.push_back(std::move(fm));
        }
    }
    if (const auto d = root["disturbance"]) {
        check_keys(d, "disturbance", {"range", "seed"});
        if (d["range"]) {
            const auto r = number_list(d["range"], "disturbance.range");
            if (r.size() != 2) throw parse_error(d["range"], "'disturbance.range' must be [lower, upper]");
            cfg.disturbance.lower = r[0];
            cfg.disturbance.upper = r[1];
        }
        if (d["seed"]) cfg.disturbance.seed = scalar<std::uint64_t>(d["seed"], "disturbance.seed");
    }
    {
        const auto nw = require(root, "network", "");
        check_keys(nw, "network", {"widths", "inner_activation", "output_activation", "init_range", "init_seed"});
        cfg.arch.input_dim = order;
        for (double w : number_list(require(nw, "widths", "network"), "network.widths")) {
            if (w != std::floor(w)) throw parse_error(nw["widths"], "'network.widths' must be integers");
            cfg.arch.widths.push_back(static_cast<int>(w));
        }
        cfg.arch.inner_activation = activation_from_string(get_or<std::string>(nw, "inner_activation", "tanh", "network"));
        cfg.arch.output_activation = activation_from_string(get_or<std::string>(nw, "output_activation", "tanh", "network"));
        if (nw["init_range"]) {
            const auto r = number_list(nw["init_range"], "network.init_range");
            if (r.size() != 2) throw parse_error(nw["init_range"], "'network.init_range' must be [lower, upper]");
            cfg.init.lower = r[0];
            cfg.init.upper = r[1];
        }
        if (nw["init_seed"]) cfg.init.seed = scalar<std::uint64_t>(nw["init_seed"], "network.init_seed");
    }
    {
        cfg.arch.validate();
        const auto ad = require(root, "adaptation", "");
        check_keys(ad, "adaptation",
                   {"k_w", "k_v", "v_lower", "v_upper", "switch_period", "schedule", "barrier_argument", "v_bound"});
        const auto p = cfg.arch.output_width();
        const auto layers = cfg.arch.layer_count();
        auto& a = cfg.adaptation;
        a.k_w = gain_matrix(require(ad, "k_w", "adaptation"), "adaptation.k_w", p, p);
        const auto kv = require(ad, "k_v", "adaptation");
        if (kv.IsSequence() && kv.size() > 0 && kv[0].IsSequence() && kv[0].size() > 0 && kv[0][0].IsSequence()) {
            // Explicit list of matrices.
            for (std::size_t j = 0; j < kv.size(); ++j)
                a.k_v.push_back(gain_matrix(kv[j], fmt::format("adaptation.k_v[{}]", j), 0, 0));
        } else if (kv.IsSequence() && kv.size() == layers && kv[0].IsScalar()) {
            // One shorthand per layer.
            for (std::size_t j = 0; j < layers; ++j)
                a.k_v.push_back(gain_matrix(kv[j], fmt::format("adaptation.k_v[{}]", j), cfg.arch.layer_rows(j), cfg.arch.layer_cols(j)));
        } else {
            for (std::size_t j = 0; j < layers; ++j)
                a.k_v.push_back(gain_matrix(kv, "adaptation.k_v", cfg.arch.layer_rows(j), cfg.arch.layer_cols(j)));
        }
        a.v_lower = ad["v_lower"] ? per_layer(ad["v_lower"], layers, "adaptation.v_lower") : std::vector<double>(layers, 0.0);
        a.v_upper = per_layer(require(ad, "v_upper", "adaptation"), layers, "adaptation.v_upper");
        a.switch_period = get_or<double>(ad, "switch_period", 2.0, "adaptation.switch_period");
        const auto sched = get_or<std::string>(ad, "schedule", "cyclic", "adaptation.schedule");
        if (sched != "cyclic" && sched != "one_shot")
            throw ValidationError(fmt::format("dnn.AdaptationConfig: schedule must be cyclic or one_shot, got '{}'", sched));
        a.cyclic = sched == "cyclic";
        const auto barg = get_or<std::string>(ad, "barrier_argument", "per_agent", "adaptation.barrier_argument");
        if (barg != "per_agent" && barg != "global")
            throw ValidationError(fmt::format("dnn.AdaptationConfig: barrier_argument must be per_agent or global, got '{}'", barg));
        a.barrier_arg = barg == "global" ? BarrierArgument::global : BarrierArgument::per_agent;
        if (ad["v_bound"]) a.v_bound = number(ad["v_bound"], "adaptation.v_bound");
    }
    {
        const auto c = require(root, "controller", "");
        check_keys(c, "controller", {"gamma1", "gamma2", "boundary_layer"});
        cfg.gains.gamma1 = number(require(c, "gamma1", "controller"), "controller.gamma1");
        cfg.gains.gamma2 = number(require(c, "gamma2", "controller"), "controller.gamma2");
        cfg.gains.boundary_layer = get_or<double>(c, "boundary_layer", 0.0, "controller.boundary_layer");
    }
    if (const auto in = root["integrator"]) {
        check_keys(in, "integrator", {"method", "dt", "t_final", "decimation"});
        cfg.integrator.method = integration_method_from_string(get_or<std::string>(in, "method", "rk4", "integrator.method"));
        cfg.integrator.dt = get_or<double>(in, "dt", cfg.integrator.dt, "integrator.dt");
        cfg.integrator.t_final = get_or<double>(in, "t_final", cfg.integrator.t_final, "integrator.t_final");
        cfg.integrator.decimation = get_or<int>(in, "decimation", cfg.integrator.decimation, "integrator.decimation");
    }
    if (const auto m = root["monitor"]) {
        check_keys(m, "monitor", {"chatter_band", "decrease_rel_tol"});
        if (m["chatter_band"]) cfg.monitor.chatter_band = number(m["chatter_band"], "monitor.chatter_band");
        cfg.monitor.decrease_rel_tol = get_or<double>(m, "decrease_rel_tol", 1e-6, "monitor.decrease_rel_tol");
    }
    if (const auto s = root["synthetic"]) {
        check_keys(s, "synthetic", {"ideal_range", "init", "perturbation", "seed"});
        cfg.synthetic.ideal_range = get_or<double>(s, "ideal_range", cfg.synthetic.ideal_range, "synthetic.ideal_range");
        cfg.synthetic.init = synthetic_init_from_string(get_or<std::string>(s, "init", "perturbed", "synthetic.init"));
        cfg.synthetic.perturbation = get_or<double>(s, "perturbation", cfg.synthetic.perturbation, "synthetic.perturbation");
        if (s["seed"]) cfg.synthetic.seed = scalar<std::uint64_t>(s["seed"], "synthetic.seed");
    }

    validate_config(cfg);
    return cfg;
}

inline ScenarioConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError(fmt::format("cannot open scenario file '{}'", path));
    std::stringstream ss;
    ss << in.rdbuf();
    return load_config_string(ss.str());
}

namespace detail {

inline nlohmann::json matrix_json(const Matrix& m) {
    nlohmann::json rows = nlohmann::json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        nlohmann::json row = nlohmann::json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        rows.push_back(std::move(row));
    }
    return rows;
}

inline nlohmann::json vector_json(const Vector& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

}  // namespace detail

/// Fully expanded echo of a configuration; loading it back yields an equal
/// configuration.
inline nlohmann::json config_to_json(const ScenarioConfig& cfg) {
    using detail::matrix_json;
    using detail::vector_json;
    nlohmann::json j;
    j["name"] = cfg.name;
    j["seed"] = cfg.seed;
    j["mode"] = std::string(to_string(cfg.mode));
    j["topology"] = {{"adjacency", matrix_json(cfg.topology.adjacency)}, {"pinning", vector_json(cfg.topology.pinning)}};
    nlohmann::json sl = {{"alpha", cfg.sliding.alpha}};
    if (!cfg.sliding.lambda.empty()) sl["lambda"] = cfg.sliding.lambda;
    if (!cfg.sliding.roots.empty()) sl["roots"] = cfg.sliding.roots;
    j["sliding"] = sl;
    j["barrier"] = {{"mu", cfg.mu}, {"form", cfg.barrier_form == BarrierForm::rational ? "rational" : "log"}};
    j["leader"] = {{"f", cfg.leader.f0.source()}, {"x0", vector_json(cfg.leader.initial_state)}};
    nlohmann::json agents = nlohmann::json::array();
    for (const auto& a : cfg.agents) {
        nlohmann::json aj = {{"x0", vector_json(a.initial_state)}, {"disturbance", std::string(to_string(a.disturbance))}};
        if (a.f.valid()) aj["f"] = a.f.source();
        agents.push_back(aj);
    }
    j["agents"] = agents;
    nlohmann::json dist = {{"range", {cfg.disturbance.lower, cfg.disturbance.upper}}};
    if (cfg.disturbance.seed) dist["seed"] = *cfg.disturbance.seed;
    j["disturbance"] = dist;
    nlohmann::json nw = {{"widths", cfg.arch.widths},
                         {"inner_activation", std::string(to_string(cfg.arch.inner_activation))},
                         {"output_activation", std::string(to_string(cfg.arch.output_activation))},
                         {"init_range", {cfg.init.lower, cfg.init.upper}}};
    if (cfg.init.seed) nw["init_seed"] = *cfg.init.seed;
    j["network"] = nw;
    const auto& a = cfg.adaptation;
    nlohmann::json kv = nlohmann::json::array();
    for (const auto& k : a.k_v) kv.push_back(matrix_json(k));
    nlohmann::json ad = {{"k_w", matrix_json(a.k_w)},
                         {"k_v", kv},
                         {"v_lower", a.v_lower},
                         {"v_upper", a.v_upper},
                         {"switch_period", a.switch_period},
                         {"schedule", a.cyclic ? "cyclic" : "one_shot"},
                         {"barrier_argument", a.barrier_arg == BarrierArgument::global ? "global" : "per_agent"}};
    if (a.v_bound) ad["v_bound"] = *a.v_bound;
    j["adaptation"] = ad;
    j["controller"] = {{"gamma1", cfg.gains.gamma1}, {"gamma2", cfg.gains.gamma2}, {"boundary_layer", cfg.gains.boundary_layer}};
    j["integrator"] = {{"method", std::string(to_string(cfg.integrator.method))},
                       {"dt", cfg.integrator.dt},
                       {"t_final", cfg.integrator.t_final},
                       {"decimation", cfg.integrator.decimation}};
    nlohmann::json mon = {{"decrease_rel_tol", cfg.monitor.decrease_rel_tol}};
    if (cfg.monitor.chatter_band) mon["chatter_band"] = *cfg.monitor.chatter_band;
    j["monitor"] = mon;
    nlohmann::json syn = {{"ideal_range", cfg.synthetic.ideal_range},
                          {"init", std::string(to_string(cfg.synthetic.init))},
                          {"perturbation", cfg.synthetic.perturbation}};
    if (cfg.synthetic.seed) syn["seed"] = *cfg.synthetic.seed;
    j["synthetic"] = syn;
    return j;
}

/// Bound estimates file: a flat mapping of the names below to nonnegative
/// numbers. Missing names surface later as MissingBound.
inline BoundEstimates load_bounds_string(const std::string& text) {
    using namespace detail;
    YAML::Node root;
    try {
        root = YAML::Load(text);
    } catch (const YAML::ParserException& e) {
        throw ParseError(fmt::format("{} (line {}, column {})", e.msg, e.mark.line + 1, e.mark.column + 1));
    }
    if (!root || !root.IsMap()) throw ParseError("bounds file must be a mapping");
    check_keys(root, "bounds", {"w_m", "v_m", "rho_m", "rho_hat_m", "eps_m", "omega_m", "f_m", "psi_mu"});
    BoundEstimates b;
    const auto opt = [&](const char* key, std::optional<double>& out) {
        if (root[key]) out = number(root[key], key);
    };
    opt("w_m", b.w_m);
    opt("v_m", b.v_m);
    opt("rho_m", b.rho_m);
    opt("rho_hat_m", b.rho_hat_m);
    opt("eps_m", b.eps_m);
    opt("omega_m", b.omega_m);
    opt("f_m", b.f_m);
    opt("psi_mu", b.psi_mu);
    return b;
}

inline BoundEstimates load_bounds(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError(fmt::format("cannot open bounds file '{}'", path));
    std::stringstream ss;
    ss << in.rdbuf();
    return load_bounds_string(ss.str());
}

}  // namespace simlab
