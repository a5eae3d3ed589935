#pragma once

// Run artifacts: the trace as CSV, a JSON summary and SVG line charts.
//
// A trace CSV starts with '#'-prefixed metadata lines (scenario, seed, mu,
// N, M, disturbance amplitudes), then a header row, then one row per sample.

#include "simlab/config_io.hpp"
#include "simlab/errors.hpp"
#include "simlab/sim.hpp"

#include <fmt/format.h>
#include <fmt/ranges.h>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

namespace simlab {

/// Column-oriented view of a trace, shared by the CSV writer, the CSV reader
/// and the plotters.
struct Table {
    std::vector<std::pair<std::string, std::string>> meta;
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;

    std::ptrdiff_t index(const std::string& name) const {
        const auto it = std::find(columns.begin(), columns.end(), name);
        return it == columns.end() ? -1 : it - columns.begin();
    }

    std::vector<double> column(std::ptrdiff_t c) const {
        std::vector<double> out;
        out.reserve(rows.size());
        for (const auto& r : rows) out.push_back(r[static_cast<std::size_t>(c)]);
        return out;
    }

    std::string meta_value(const std::string& key) const {
        for (const auto& [k, v] : meta)
            if (k == key) return v;
        return {};
    }
};

inline std::vector<std::string> trace_columns(std::size_t n, int order, std::size_t layers, bool full) {
    std::vector<std::string> c{"t"};
    for (std::size_t i = 1; i <= n; ++i)
        for (int m = 1; m <= order; ++m) c.push_back(fmt::format("x_{}_{}", i, m));
    for (int m = 1; m <= order; ++m) c.push_back(fmt::format("x0_{}", m));
    for (int m = 1; m <= order; ++m) c.push_back(fmt::format("e_norm_{}", m));
    for (std::size_t i = 1; i <= n; ++i) c.push_back(fmt::format("r_{}", i));
    c.push_back("r_norm_P");
    for (std::size_t i = 1; i <= n; ++i) c.push_back(fmt::format("u_{}", i));
    for (std::size_t i = 1; i <= n; ++i) c.push_back(fmt::format("W_norm_{}", i));
    for (std::size_t i = 1; i <= n; ++i)
        for (std::size_t j = 0; j < layers; ++j) c.push_back(fmt::format("V_norm_{}_{}", i, j));
    c.push_back("active_layer");
    c.push_back("barrier_value");
    c.push_back("V_obs");
    if (full) c.push_back("V_full");
    return c;
}

inline Table trace_table(const RunResult& res) {
    const auto& cfg = res.config;
    Table tab;
    tab.meta.emplace_back("scenario", cfg.name);
    tab.meta.emplace_back("seed", fmt::format("{}", cfg.seed));
    tab.meta.emplace_back("mode", std::string(to_string(cfg.mode)));
    tab.meta.emplace_back("mu", fmt::format("{}", cfg.mu));
    tab.meta.emplace_back("N", fmt::format("{}", cfg.followers()));
    tab.meta.emplace_back("M", fmt::format("{}", cfg.order()));
    tab.meta.emplace_back("g", fmt::format("{}", fmt::join(res.amplitudes, ",")));
    tab.meta.emplace_back("status", std::string(to_string(res.status)));

    const std::size_t n = cfg.followers();
    const int order = cfg.order();
    const std::size_t layers = cfg.arch.layer_count();
    const bool full = cfg.mode == RunMode::synthetic_truth;
    tab.columns = trace_columns(n, order, layers, full);
    for (const auto& rec : res.trace) {
        std::vector<double> row;
        row.reserve(tab.columns.size());
        row.push_back(rec.t);
        for (std::size_t i = 0; i < n; ++i)
            for (int m = 0; m < order; ++m) row.push_back(rec.x(static_cast<Eigen::Index>(i), m));
        for (int m = 0; m < order; ++m) row.push_back(rec.x0(m));
        for (int m = 0; m < order; ++m) row.push_back(rec.e_norm(m));
        for (std::size_t i = 0; i < n; ++i) row.push_back(rec.r(static_cast<Eigen::Index>(i)));
        row.push_back(rec.r_norm);
        for (std::size_t i = 0; i < n; ++i) row.push_back(rec.u(static_cast<Eigen::Index>(i)));
        for (std::size_t i = 0; i < n; ++i) row.push_back(rec.w_norm(static_cast<Eigen::Index>(i)));
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < layers; ++j)
                row.push_back(rec.v_norm(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)));
        row.push_back(rec.active_layer);
        row.push_back(rec.barrier_value);
        row.push_back(rec.v_obs);
        if (full) row.push_back(rec.v_full.value_or(std::nan("")));
        tab.rows.push_back(std::move(row));
    }
    return tab;
}

/// Shortest round-trip formatting keeps the CSV byte-stable and lossless.
inline std::string table_to_csv(const Table& tab) {
    std::string out;
    for (const auto& [k, v] : tab.meta) out += fmt::format("# {}: {}\n", k, v);
    out += fmt::format("{}\n", fmt::join(tab.columns, ","));
    for (const auto& row : tab.rows) out += fmt::format("{}\n", fmt::join(row, ","));
    return out;
}

inline std::string trace_csv(const RunResult& res) { return table_to_csv(trace_table(res)); }

inline Table parse_csv(const std::string& text) {
    Table tab;
    std::istringstream in(text);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (line[0] == '#') {
            const auto colon = line.find(':');
            if (colon == std::string::npos) continue;
            auto key = line.substr(1, colon - 1);
            auto val = line.substr(colon + 1);
            const auto trim = [](std::string& s) {
                s.erase(0, s.find_first_not_of(' '));
                s.erase(s.find_last_not_of(' ') + 1);
            };
            trim(key);
            trim(val);
            tab.meta.emplace_back(key, val);
            continue;
        }
        std::vector<std::string> cells;
        std::string cell;
        std::istringstream ls(line);
        while (std::getline(ls, cell, ',')) cells.push_back(cell);
        if (tab.columns.empty()) {
            tab.columns = cells;
            continue;
        }
        if (cells.size() != tab.columns.size())
            throw ParseError(fmt::format("row has {} cells, header has {} (line {})", cells.size(), tab.columns.size(), lineno));
        std::vector<double> row;
        for (std::size_t c = 0; c < cells.size(); ++c) {
            std::size_t used = 0;
            double v = 0.0;
            try {
                v = std::stod(cells[c], &used);
            } catch (const std::exception&) {
                used = 0;
            }
            if (used == 0 || used != cells[c].size())
                throw ParseError(fmt::format("cannot read '{}' as a number (line {}, column {})", cells[c], lineno, c + 1));
            row.push_back(v);
        }
        tab.rows.push_back(std::move(row));
    }
    if (tab.columns.empty()) throw ParseError("trace has no header row");
    return tab;
}

inline Table read_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError(fmt::format("cannot open trace '{}'", path));
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_csv(ss.str());
}

inline nlohmann::json report_json(const MonitorReport& r) {
    const auto vec = [](const Vector& v) { return std::vector<double>(v.data(), v.data() + v.size()); };
    return {{"samples", r.samples},
            {"max_r_norm_P", r.max_r_norm},
            {"t_max_r_norm_P", r.t_max_r_norm},
            {"max_e_norm_P", vec(r.max_e_norm)},
            {"max_e_norm_P_all", r.max_e_norm_all},
            {"barrier_respected", r.barrier_respected},
            {"corollary_applicable", r.corollary_applicable},
            {"corollary_holds", r.corollary_holds},
            {"corollary_violations", r.corollary_violations},
            {"lyapunov_kind", r.lyapunov_kind},
            {"chatter_band", r.chatter_band},
            {"decrease_checked", r.decrease_checked},
            {"decrease_excluded", r.decrease_excluded},
            {"decrease_violations", r.decrease_violations},
            {"worst_increase", r.worst_increase},
            {"t_worst_increase", r.t_worst_increase},
            {"initial_tracking_error", r.initial_tracking_error},
            {"tail_tracking_error", r.tail_tracking_error},
            {"final_tracking_error", vec(r.final_tracking_error)},
            {"max_v_norm", vec(r.max_v_norm)},
            {"band_violations", r.band_violations},
            {"max_surface_residual", r.max_surface_residual}};
}

inline nlohmann::json summary_json(const RunResult& res) {
    nlohmann::json j;
    j["scenario"] = res.config.name;
    j["seed"] = res.config.seed;
    j["status"] = std::string(to_string(res.status));
    j["abort_reason"] = res.completed() ? nlohmann::json(nullptr) : nlohmann::json(res.message);
    j["t_end"] = res.t_end;
    j["steps"] = res.steps;
    j["amplitudes"] = res.amplitudes;
    j["report"] = report_json(res.report);
    j["notes"] = {"The corrective signal -(L+B)^{-1} A f_hat uses global graph quantities and is computed centrally; it is "
                  "not implementable from neighbour information alone."};
    j["config"] = config_to_json(res.config);
    return j;
}

// ---------------------------------------------------------------------------
// SVG line charts.

struct Series {
    std::string label;
    std::vector<double> x;
    std::vector<double> y;
    bool dashed = false;
};

namespace detail {

inline std::vector<double> nice_ticks(double lo, double hi, int target = 6) {
    if (!(hi > lo)) return {lo};
    const double raw = (hi - lo) / target;
    const double mag = std::pow(10.0, std::floor(std::log10(raw)));
    double step = mag;
    for (double f : {1.0, 2.0, 2.5, 5.0, 10.0})
        if (f * mag >= raw) {
            step = f * mag;
            break;
        }
    std::vector<double> t;
    for (double v = std::ceil(lo / step) * step; v <= hi + 1e-9 * step; v += step) t.push_back(std::abs(v) < 1e-12 * step ? 0.0 : v);
    return t;
}

inline std::string xml_escape(const std::string& s) {
    std::string o;
    for (char c : s) {
        switch (c) {
            case '&': o += "&amp;"; break;
            case '<': o += "&lt;"; break;
            case '>': o += "&gt;"; break;
            case '"': o += "&quot;"; break;
            default: o += c;
        }
    }
    return o;
}

}  // namespace detail

inline std::string render_svg(const std::string& title, const std::string& xlabel, const std::string& ylabel,
                              const std::vector<Series>& series) {
    static const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd",
                                    "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};
    const double w = 760, h = 440, ml = 80, mr = 170, mt = 40, mb = 55;
    const double pw = w - ml - mr, ph = h - mt - mb;

    double xlo = INFINITY, xhi = -INFINITY, ylo = INFINITY, yhi = -INFINITY;
    for (const auto& s : series)
        for (std::size_t k = 0; k < s.x.size(); ++k) {
            if (!std::isfinite(s.x[k]) || !std::isfinite(s.y[k])) continue;
            xlo = std::min(xlo, s.x[k]);
            xhi = std::max(xhi, s.x[k]);
            ylo = std::min(ylo, s.y[k]);
            yhi = std::max(yhi, s.y[k]);
        }
    if (!std::isfinite(xlo)) xlo = 0, xhi = 1, ylo = 0, yhi = 1;
    if (xhi == xlo) xhi = xlo + 1;
    if (yhi == ylo) ylo -= 0.5, yhi += 0.5;
    const double pad = 0.05 * (yhi - ylo);
    ylo -= pad;
    yhi += pad;
    const auto px = [&](double v) { return ml + (v - xlo) / (xhi - xlo) * pw; };
    const auto py = [&](double v) { return mt + (yhi - v) / (yhi - ylo) * ph; };

    std::string o;
    o += fmt::format("<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{}\" height=\"{}\" viewBox=\"0 0 {} {}\" "
                     "font-family=\"sans-serif\" font-size=\"12\">\n",
                     w, h, w, h);
    o += fmt::format("<rect width=\"{}\" height=\"{}\" fill=\"white\"/>\n", w, h);
    o += fmt::format("<text x=\"{}\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">{}</text>\n", ml + pw / 2,
                     detail::xml_escape(title));
    for (double t : detail::nice_ticks(xlo, xhi)) {
        o += fmt::format("<line x1=\"{0:.2f}\" y1=\"{1}\" x2=\"{0:.2f}\" y2=\"{2}\" stroke=\"#e5e5e5\"/>\n", px(t), mt, mt + ph);
        o += fmt::format("<text x=\"{:.2f}\" y=\"{}\" text-anchor=\"middle\">{:g}</text>\n", px(t), mt + ph + 16, t);
    }
    for (double t : detail::nice_ticks(ylo, yhi)) {
        o += fmt::format("<line x1=\"{1}\" y1=\"{0:.2f}\" x2=\"{2}\" y2=\"{0:.2f}\" stroke=\"#e5e5e5\"/>\n", py(t), ml, ml + pw);
        o += fmt::format("<text x=\"{}\" y=\"{:.2f}\" text-anchor=\"end\">{:g}</text>\n", ml - 6, py(t) + 4, t);
    }
    o += fmt::format("<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"black\"/>\n", ml, mt, pw, ph);
    o += fmt::format("<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">{}</text>\n", ml + pw / 2, h - 14, detail::xml_escape(xlabel));
    o += fmt::format("<text x=\"18\" y=\"{0}\" text-anchor=\"middle\" transform=\"rotate(-90 18 {0})\">{1}</text>\n", mt + ph / 2,
                     detail::xml_escape(ylabel));

    for (std::size_t s = 0; s < series.size(); ++s) {
        const auto& ser = series[s];
        const char* color = palette[s % std::size(palette)];
        // Thin long series to at most ~2000 vertices.
        const std::size_t stride = std::max<std::size_t>(1, ser.x.size() / 2000);
        std::string pts;
        for (std::size_t k = 0; k < ser.x.size(); k += stride) {
            if (!std::isfinite(ser.x[k]) || !std::isfinite(ser.y[k])) continue;
            pts += fmt::format("{:.2f},{:.2f} ", px(ser.x[k]), py(ser.y[k]));
        }
        if (!ser.x.empty() && (ser.x.size() - 1) % stride != 0 && std::isfinite(ser.y.back()))
            pts += fmt::format("{:.2f},{:.2f}", px(ser.x.back()), py(ser.y.back()));
        o += fmt::format("<polyline fill=\"none\" stroke=\"{}\" stroke-width=\"1.4\"{} points=\"{}\"/>\n", color,
                         ser.dashed ? " stroke-dasharray=\"6 4\"" : "", pts);
        const double ly = mt + 14 + 18 * static_cast<double>(s);
        o += fmt::format("<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"{}\" stroke-width=\"2\"{}/>\n", ml + pw + 12, ly,
                         ml + pw + 36, ly, color, ser.dashed ? " stroke-dasharray=\"6 4\"" : "");
        o += fmt::format("<text x=\"{}\" y=\"{}\">{}</text>\n", ml + pw + 42, ly + 4, detail::xml_escape(ser.label));
    }
    o += "</svg>\n";
    return o;
}

/// Panel name and SVG text for every chart the table supports: one panel per
/// state derivative, ||r||_P against mu, ||W_i||_F per agent and the layer
/// norms of agent 1.
inline std::vector<std::pair<std::string, std::string>> table_panels(const Table& tab, std::optional<double> mu) {
    std::vector<std::pair<std::string, std::string>> out;
    const auto tc = tab.index("t");
    if (tc < 0) throw ParseError("trace has no 't' column");
    const auto t = tab.column(tc);
    const auto col = [&](const std::string& name) -> std::optional<std::vector<double>> {
        const auto c = tab.index(name);
        if (c < 0) return std::nullopt;
        return tab.column(c);
    };

    static const char* names[] = {"positions", "velocities", "accelerations"};
    static const char* titles[] = {"Positions x^1", "Velocities x^2", "Accelerations x^3"};
    for (int m = 1;; ++m) {
        auto leader = col(fmt::format("x0_{}", m));
        if (!leader) break;
        std::vector<Series> series;
        series.push_back(Series{"leader", t, *leader, true});
        for (int i = 1;; ++i) {
            auto xi = col(fmt::format("x_{}_{}", i, m));
            if (!xi) break;
            series.push_back(Series{fmt::format("agent {}", i), t, *xi});
        }
        const std::string name = m <= 3 ? names[m - 1] : fmt::format("state_{}", m);
        const std::string title = m <= 3 ? titles[m - 1] : fmt::format("State x^{}", m);
        out.emplace_back(name, render_svg(title, "t [s]", fmt::format("x^{}", m), series));
    }

    if (auto r = col("r_norm_P")) {
        std::vector<Series> series{Series{"||r||_P", t, *r}};
        if (mu && !t.empty()) series.push_back(Series{fmt::format("mu = {:g}", *mu), {t.front(), t.back()}, {*mu, *mu}, true});
        out.emplace_back("r_norm", render_svg("Weighted sliding variable norm", "t [s]", "||r||_P", series));
    }

    {
        std::vector<Series> series;
        for (int i = 1;; ++i) {
            auto w = col(fmt::format("W_norm_{}", i));
            if (!w) break;
            series.push_back(Series{fmt::format("agent {}", i), t, *w});
        }
        if (!series.empty()) out.emplace_back("w_norm", render_svg("Outer-layer weight norms", "t [s]", "||W_i||_F", series));
    }
    {
        std::vector<Series> series;
        for (int j = 0;; ++j) {
            auto v = col(fmt::format("V_norm_1_{}", j));
            if (!v) break;
            series.push_back(Series{fmt::format("layer {}", j), t, *v});
        }
        if (!series.empty())
            out.emplace_back("v_norm_agent1", render_svg("Inner-layer weight norms, agent 1", "t [s]", "||V_1j||_F", series));
    }
    return out;
}

struct OutputFormats {
    bool csv = true;
    bool json = true;
    bool svg = false;

    /// Comma list of csv, json, svg. CSV and JSON are always written.
    static OutputFormats parse(const std::string& list) {
        OutputFormats f;
        std::stringstream ss(list);
        std::string item;
        while (std::getline(ss, item, ',')) {
            item.erase(0, item.find_first_not_of(' '));
            item.erase(item.find_last_not_of(' ') + 1);
            if (item == "svg")
                f.svg = true;
            else if (item != "csv" && item != "json" && !item.empty())
                throw ValidationError(fmt::format("cli.Command: unknown output format '{}' (expected csv, json, svg)", item));
        }
        return f;
    }
};

inline void write_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError(fmt::format("cannot write '{}'", path.string()));
    out << text;
    if (!out) throw IoError(fmt::format("write to '{}' failed", path.string()));
}

inline void ensure_directory(const std::filesystem::path& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec || !std::filesystem::is_directory(dir))
        throw IoError(fmt::format("cannot create output directory '{}': {}", dir.string(), ec.message()));
}

inline std::vector<std::filesystem::path> write_panels(const Table& tab, std::optional<double> mu, const std::filesystem::path& dir) {
    ensure_directory(dir);
    std::vector<std::filesystem::path> files;
    for (const auto& [name, svg] : table_panels(tab, mu)) {
        files.push_back(dir / (name + ".svg"));
        write_file(files.back(), svg);
    }
    return files;
}

/// Writes trace.csv and summary.json, plus SVG panels when requested.
inline std::vector<std::filesystem::path> emit_outputs(const RunResult& res, const std::filesystem::path& dir,
                                                       const OutputFormats& formats) {
    ensure_directory(dir);
    std::vector<std::filesystem::path> files;
    const Table tab = trace_table(res);
    files.push_back(dir / "trace.csv");
    write_file(files.back(), table_to_csv(tab));
    files.push_back(dir / "summary.json");
    write_file(files.back(), summary_json(res).dump(2) + "\n");
    if (formats.svg) {
        auto svgs = write_panels(tab, res.config.mu, dir);
        files.insert(files.end(), svgs.begin(), svgs.end());
    }
    return files;
}

}  // namespace simlab
