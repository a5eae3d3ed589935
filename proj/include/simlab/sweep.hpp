#pragma once

// Parameter sweeps: one base scenario, one axis, one run per axis value.
// Runs are independent and execute concurrently; each owns its directory.

#include "simlab/config_io.hpp"
#include "simlab/errors.hpp"
#include "simlab/output.hpp"
#include "simlab/scenario.hpp"
#include "simlab/sim.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <filesystem>
#include <future>
#include <string>
#include <thread>
#include <vector>

namespace simlab {

inline const std::vector<std::string>& sweep_axes() {
    static const std::vector<std::string> axes{"gamma1", "gamma2", "boundary_layer", "mu", "alpha",
                                               "dt", "t_final", "decimation", "seed"};
    return axes;
}

struct SweepSpec {
    ScenarioConfig base;
    std::string axis;
    std::vector<std::string> values;
    std::filesystem::path out_dir;

    /// Parses "name=v1,v2,...".
    static std::pair<std::string, std::vector<std::string>> parse_axis(const std::string& text) {
        const auto eq = text.find('=');
        if (eq == std::string::npos || eq == 0)
            throw ValidationError(fmt::format("cli.SweepSpec: axis must look like name=v1,v2,..., got '{}'", text));
        std::string name = text.substr(0, eq);
        std::vector<std::string> values;
        std::string rest = text.substr(eq + 1);
        std::size_t start = 0;
        while (start <= rest.size()) {
            const auto comma = rest.find(',', start);
            std::string v = rest.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
            v.erase(0, v.find_first_not_of(' '));
            v.erase(v.find_last_not_of(' ') + 1);
            if (!v.empty()) values.push_back(v);
            if (comma == std::string::npos) break;
            start = comma + 1;
        }
        if (values.empty()) throw ValidationError(fmt::format("cli.SweepSpec: axis '{}' has no values", name));
        return {name, values};
    }
};

inline double sweep_number(const std::string& axis, const std::string& value) {
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(value, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used == 0 || used != value.size())
        throw ValidationError(fmt::format("cli.SweepSpec: value '{}' for axis '{}' is not a number", value, axis));
    return v;
}

/// Copy of cfg with one parameter replaced; the result is validated.
inline ScenarioConfig apply_axis(ScenarioConfig cfg, const std::string& axis, const std::string& value) {
    if (axis == "seed") {
        try {
            std::size_t used = 0;
            cfg.seed = std::stoull(value, &used);
            if (used != value.size()) throw std::invalid_argument(value);
        } catch (const std::exception&) {
            throw ValidationError(fmt::format("cli.SweepSpec: seed '{}' is not a nonnegative integer", value));
        }
    } else if (axis == "decimation") {
        const double d = sweep_number(axis, value);
        if (d != std::floor(d)) throw ValidationError("cli.SweepSpec: decimation must be an integer");
        cfg.integrator.decimation = static_cast<int>(d);
    } else {
        const double v = sweep_number(axis, value);
        if (axis == "gamma1")
            cfg.gains.gamma1 = v;
        else if (axis == "gamma2")
            cfg.gains.gamma2 = v;
        else if (axis == "boundary_layer")
            cfg.gains.boundary_layer = v;
        else if (axis == "mu")
            cfg.mu = v;
        else if (axis == "alpha")
            cfg.sliding.alpha = v;
        else if (axis == "dt")
            cfg.integrator.dt = v;
        else if (axis == "t_final")
            cfg.integrator.t_final = v;
        else
            throw ValidationError(fmt::format("cli.SweepSpec: unknown axis '{}' (expected one of {})", axis,
                                              fmt::join(sweep_axes(), ", ")));
    }
    validate_config(cfg);
    return cfg;
}

struct SweepEntry {
    std::string value;
    std::filesystem::path dir;
    RunStatus status = RunStatus::completed;
    std::string message;
    MonitorReport report;
};

inline std::string sweep_dir_name(const std::string& axis, const std::string& value) {
    std::string v = value;
    for (auto& c : v)
        if (c == '/' || c == '\\' || c == ' ') c = '_';
    return axis + "=" + v;
}

/// Validates every derived config up front, then runs them concurrently.
inline std::vector<SweepEntry> run_sweep(const SweepSpec& spec, const OutputFormats& formats, unsigned max_parallel = 0) {
    std::vector<ScenarioConfig> configs;
    for (const auto& v : spec.values) configs.push_back(apply_axis(spec.base, spec.axis, v));
    ensure_directory(spec.out_dir);

    if (max_parallel == 0) max_parallel = std::max(1u, std::thread::hardware_concurrency());
    std::vector<SweepEntry> entries(configs.size());
    std::size_t next = 0;
    while (next < configs.size()) {
        std::vector<std::future<void>> batch;
        for (unsigned k = 0; k < max_parallel && next < configs.size(); ++k, ++next) {
            batch.push_back(std::async(std::launch::async, [&, idx = next] {
                auto& e = entries[idx];
                e.value = spec.values[idx];
                e.dir = spec.out_dir / sweep_dir_name(spec.axis, e.value);
                const RunResult res = run(configs[idx]);
                e.status = res.status;
                e.message = res.message;
                e.report = res.report;
                emit_outputs(res, e.dir, formats);
            }));
        }
        for (auto& f : batch) f.get();
    }

    nlohmann::json index = nlohmann::json::array();
    for (const auto& e : entries)
        index.push_back({{spec.axis, e.value},
                         {"dir", e.dir.filename().string()},
                         {"status", std::string(to_string(e.status))},
                         {"max_r_norm_P", e.report.max_r_norm},
                         {"tail_tracking_error", e.report.tail_tracking_error}});
    write_file(spec.out_dir / "sweep.json", nlohmann::json{{"axis", spec.axis}, {"runs", index}}.dump(2) + "\n");
    return entries;
}

}  // namespace simlab
