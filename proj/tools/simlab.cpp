// simlab command-line tool.
//
// Exit codes: 0 success, 1 I/O or runtime failure, 2 validation failure
// (including bad command lines), 3 barrier breach, 4 gain certificate failure.

#include "simlab/simlab.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>
#include <fmt/ranges.h>
#include <nlohmann/json.hpp>

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

namespace fs = std::filesystem;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitRuntime = 1;
constexpr int kExitValidation = 2;
constexpr int kExitBarrier = 3;
constexpr int kExitCertificate = 4;

constexpr const char* kOutRootEnv = "SIMLAB_OUT_ROOT";

fs::path output_dir(const std::string& explicit_dir, const std::string& leaf) {
    if (!explicit_dir.empty()) return explicit_dir;
    if (const char* root = std::getenv(kOutRootEnv); root && *root) return fs::path(root) / leaf;
    return fs::path("simlab_out") / leaf;
}

int status_exit(simlab::RunStatus s) {
    switch (s) {
        case simlab::RunStatus::completed: return kExitOk;
        case simlab::RunStatus::barrier_breach:
        case simlab::RunStatus::initial_barrier_violation: return kExitBarrier;
        case simlab::RunStatus::numeric_overflow:
        case simlab::RunStatus::eval_error: return kExitRuntime;
    }
    return kExitRuntime;
}

std::vector<double> to_std(const simlab::Vector& v) { return {v.data(), v.data() + v.size()}; }

nlohmann::json matrix_rows(const simlab::Matrix& m) { return simlab::detail::matrix_json(m); }

nlohmann::json certificate_json(const simlab::GainCertificate& c) {
    nlohmann::json b;
    const auto put = [&](const char* k, const std::optional<double>& v) {
        if (v) b[k] = *v;
    };
    put("w_m", c.bounds.w_m);
    put("v_m", c.bounds.v_m);
    put("rho_m", c.bounds.rho_m);
    put("rho_hat_m", c.bounds.rho_hat_m);
    put("eps_m", c.bounds.eps_m);
    put("omega_m", c.bounds.omega_m);
    put("f_m", c.bounds.f_m);
    return {{"gamma1_min", c.gamma1_min},
            {"gamma2_min", c.gamma2_min},
            {"gamma1", c.gamma1 ? nlohmann::json(*c.gamma1) : nlohmann::json(nullptr)},
            {"gamma2", c.gamma2 ? nlohmann::json(*c.gamma2) : nlohmann::json(nullptr)},
            {"gamma1_ok", c.gamma1_ok},
            {"gamma2_ok", c.gamma2_ok},
            {"gamma2_strict", c.gamma2_strict},
            {"gamma2_equal", c.gamma2_equal},
            {"passed", c.passed()},
            {"inputs",
             {{"sigma_max_A", c.sigma_max_a},
              {"sigma_max_LB", c.sigma_max_lb},
              {"sigma_min_DB", c.sigma_min_db},
              {"sigma_max_DB", c.sigma_max_db},
              {"sigma_max_P1", c.sigma_max_p1},
              {"sigma_min_P", c.sigma_min_p},
              {"lambda_norm", c.lambda_norm},
              {"companion_frobenius", c.companion_frobenius},
              {"alpha", c.alpha},
              {"inner_layers", c.inner_layers},
              {"psi_mu", c.psi_mu},
              {"bounds", b}}}};
}

int cmd_run(const std::string& cfg_path, const std::string& out, std::optional<std::uint64_t> seed, const std::string& formats) {
    auto cfg = simlab::load_config(cfg_path);
    if (seed) cfg.seed = *seed;
    const auto fmts = simlab::OutputFormats::parse(formats);
    const auto dir = output_dir(out, cfg.name);
    const auto res = simlab::run(cfg);
    const auto files = simlab::emit_outputs(res, dir, fmts);
    const auto& r = res.report;
    fmt::print("scenario {} seed {}: {}\n", cfg.name, cfg.seed, simlab::to_string(res.status));
    if (!res.completed()) fmt::print("  {}\n", res.message);
    fmt::print("  t_end {:.6g}, samples {}, max ||r||_P {:.6g} (mu {:g}), max ||e^m||_P {:.6g}\n", res.t_end, r.samples,
               r.max_r_norm, cfg.mu, r.max_e_norm_all);
    fmt::print("  tracking error: initial {:.6g}, tail {:.6g}; {} V decrease violations over {} checked pairs\n",
               r.initial_tracking_error, r.tail_tracking_error, r.decrease_violations, r.decrease_checked);
    for (const auto& f : files) fmt::print("  wrote {}\n", f.string());
    return status_exit(res.status);
}

int cmd_check(const std::string& cfg_path) {
    const auto cfg = simlab::load_config(cfg_path);
    const simlab::SimContext ctx(cfg);
    const auto ev = ctx.evaluate(ctx.initial_state());
    const bool inside = ev.r_norm < cfg.mu;
    fmt::print("{}: valid (N = {}, M = {}, k = {}, p = {}, gamma1 = {:g}, gamma2 = {:g}, mu = {:g})\n", cfg.name, cfg.followers(),
               cfg.order(), cfg.arch.inner_layers(), cfg.arch.output_width(), cfg.gains.gamma1, cfg.gains.gamma2, cfg.mu);
    const auto& d = ctx.design();
    fmt::print("surface polynomial Hurwitz: yes (lambda = [{}], alpha = {:g})\n", fmt::join(to_std(d.lambda_bar), ", "), d.alpha);
    fmt::print("P1 = {}, Lyapunov residual {:.3g}\n", matrix_rows(d.p1).dump(), d.lyapunov_residual);
    fmt::print("sum(lambda) = {:g}: error-norm corollary precondition {}\n", d.lambda_sum(),
               d.corollary_precondition() ? "holds" : "does not hold");
    fmt::print("initial ||r(0)||_P = {:.6g} ({} mu)\n", ev.r_norm, inside ? "below" : "NOT below");
    return inside ? kExitOk : kExitBarrier;
}

int cmd_check_gains(const std::string& cfg_path, const std::string& bounds_path) {
    const auto cfg = simlab::load_config(cfg_path);
    const auto bounds = simlab::load_bounds(bounds_path);
    const auto cert = simlab::certify_gains(cfg, bounds);
    fmt::print("{}\n", certificate_json(cert).dump(2));
    return cert.passed() ? kExitOk : kExitCertificate;
}

int cmd_graph_info(const std::string& cfg_path) {
    const auto cfg = simlab::load_config(cfg_path);
    const auto gm = simlab::build_matrices(cfg.topology);
    const auto reach = simlab::check_reachability(cfg.topology);
    const auto q_eigs = simlab::symmetric_eigenvalues(gm.q_matrix);
    nlohmann::json j = {{"followers", gm.size()},
                        {"all_reachable", reach.all_reachable},
                        {"unreachable", reach.unreachable},
                        {"adjacency", matrix_rows(gm.adjacency)},
                        {"pinning", to_std(cfg.topology.pinning)},
                        {"laplacian", matrix_rows(gm.laplacian)},
                        {"L_plus_B", matrix_rows(gm.lb)},
                        {"condition_L_plus_B", gm.lb_condition},
                        {"q", to_std(gm.q)},
                        {"q_residual", gm.q_residual},
                        {"P_diag", to_std(gm.p_diag())},
                        {"Q_eigenvalues", to_std(q_eigs)},
                        {"Q_positive_definite", q_eigs.minCoeff() > simlab::kPositiveDefiniteThreshold},
                        {"singular_values",
                         {{"A_max", gm.sv.a_max},
                          {"A_min", gm.sv.a_min},
                          {"LB_max", gm.sv.lb_max},
                          {"LB_min", gm.sv.lb_min},
                          {"DB_max", gm.sv.db_max},
                          {"DB_min", gm.sv.db_min},
                          {"P_min", gm.sv.p_min}}}};
    fmt::print("{}\n", j.dump(2));
    return kExitOk;
}

int cmd_sweep(const std::string& cfg_path, const std::string& axis, const std::string& out, const std::string& formats) {
    simlab::SweepSpec spec;
    spec.base = simlab::load_config(cfg_path);
    std::tie(spec.axis, spec.values) = simlab::SweepSpec::parse_axis(axis);
    spec.out_dir = output_dir(out, spec.base.name + "_sweep_" + spec.axis);
    const auto entries = simlab::run_sweep(spec, simlab::OutputFormats::parse(formats));
    int code = kExitOk;
    for (const auto& e : entries) {
        fmt::print("{}={}: {} (max ||r||_P {:.6g}, tail tracking error {:.6g}) -> {}\n", spec.axis, e.value,
                   simlab::to_string(e.status), e.report.max_r_norm, e.report.tail_tracking_error, e.dir.string());
        code = std::max(code, status_exit(e.status));
    }
    return code;
}

int cmd_plot(const std::string& trace_path, const std::string& out, std::optional<double> mu) {
    const auto tab = simlab::read_csv(trace_path);
    if (!mu) {
        const auto m = tab.meta_value("mu");
        if (!m.empty()) mu = std::stod(m);
    }
    const auto dir = output_dir(out, fs::path(trace_path).parent_path().filename().string() + "_plots");
    for (const auto& f : simlab::write_panels(tab, mu, dir)) fmt::print("wrote {}\n", f.string());
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"simlab: leader-follower consensus simulations with deep-network sliding-mode control"};
    app.require_subcommand(1);
    app.set_version_flag("--version", "simlab 0.1.0");

    std::string cfg_path, out, formats = "csv,json", bounds_path, axis, trace_path;
    std::optional<std::uint64_t> seed;
    std::optional<double> mu;

    auto* run = app.add_subcommand("run", "Simulate a scenario and write trace.csv, summary.json and optional SVG panels");
    run->add_option("config", cfg_path, "Scenario file")->required()->check(CLI::ExistingFile);
    run->add_option("--out", out, fmt::format("Output directory (default: ${}/<scenario>)", kOutRootEnv));
    run->add_option("--seed", seed, "Override the scenario seed");
    run->add_option("--format", formats, "Comma list of csv, json, svg (csv and json are always written)");

    auto* check = app.add_subcommand("check", "Load and validate a scenario, including the initial barrier condition");
    check->add_option("config", cfg_path, "Scenario file")->required()->check(CLI::ExistingFile);

    auto* gains = app.add_subcommand("check-gains", "Print the gain certificate as JSON");
    gains->add_option("config", cfg_path, "Scenario file")->required()->check(CLI::ExistingFile);
    gains->add_option("--bounds", bounds_path, "Bound estimates file")->required()->check(CLI::ExistingFile);

    auto* graph = app.add_subcommand("graph-info", "Print graph matrices and their certificates as JSON");
    graph->add_option("config", cfg_path, "Scenario file")->required()->check(CLI::ExistingFile);

    auto* sweep = app.add_subcommand("sweep", "Run one scenario per value of a parameter axis, concurrently");
    sweep->add_option("config", cfg_path, "Scenario file")->required()->check(CLI::ExistingFile);
    sweep->add_option("--axis", axis, "Axis such as gamma1=100,300,500")->required();
    sweep->add_option("--out", out, fmt::format("Output directory (default: ${}/<scenario>_sweep_<axis>)", kOutRootEnv));
    sweep->add_option("--format", formats, "Comma list of csv, json, svg");

    auto* plot = app.add_subcommand("plot", "Render SVG panels from a trace CSV");
    plot->add_option("trace", trace_path, "trace.csv written by run")->required()->check(CLI::ExistingFile);
    plot->add_option("--out", out, "Output directory");
    plot->add_option("--mu", mu, "Barrier level drawn on the ||r||_P panel (default: read from the trace)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitValidation;
    }

    try {
        if (*run) return cmd_run(cfg_path, out, seed, formats);
        if (*check) return cmd_check(cfg_path);
        if (*gains) return cmd_check_gains(cfg_path, bounds_path);
        if (*graph) return cmd_graph_info(cfg_path);
        if (*sweep) return cmd_sweep(cfg_path, axis, out, formats);
        if (*plot) return cmd_plot(trace_path, out, mu);
    } catch (const simlab::ParseError& e) {
        fmt::print(stderr, "error: {}\n", e.what());
        return kExitValidation;
    } catch (const simlab::ValidationError& e) {
        fmt::print(stderr, "error: {}\n", e.what());
        return kExitValidation;
    } catch (const simlab::MissingBound& e) {
        fmt::print(stderr, "error: {}\n", e.what());
        return kExitValidation;
    } catch (const simlab::BoundViolated& e) {
        fmt::print(stderr, "error: {}\n", e.what());
        return kExitCertificate;
    } catch (const simlab::SingularSystem& e) {
        fmt::print(stderr, "error: {}\n", e.what());
        return kExitValidation;
    } catch (const std::exception& e) {
        fmt::print(stderr, "error: {}\n", e.what());
        return kExitRuntime;
    }
    return kExitRuntime;
}
