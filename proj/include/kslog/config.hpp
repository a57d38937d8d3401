/**
 * @file config.hpp
 * @brief Flat `key = value` experiment configuration with dotted sections.
 *
 * Grammar (one entry per line):
 *   line    := blank | comment | entry
 *   comment := '#' anything
 *   entry   := key '=' value        (surrounding whitespace ignored)
 *   key     := section '.' name     e.g. model.chi
 * Lists (sweep.values) are comma separated. Unknown keys and duplicate keys
 * are errors. Keys that are absent keep their defaults.
 */
#pragma once

#include <charconv>
#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include "kslog/errors.hpp"
#include "kslog/initial_data.hpp"
#include "kslog/params.hpp"
#include "kslog/solver.hpp"
#include "kslog/weakform.hpp"

namespace kslog {

struct ConfigError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

enum class SweepAxis { none, k, chi };

struct GridSpec {
    int dims = 1;
    double lx = 1.0;
    double ly = 1.0;
    int nx = 64;
    int ny = 64;

    [[nodiscard]] Grid make() const {
        if (dims == 1) return Grid(lx, nx);
        if (dims == 2) return Grid(lx, ly, nx, ny);
        throw DomainError("grid: dims must be 1 or 2");
    }
    friend bool operator==(const GridSpec&, const GridSpec&) = default;
};

struct SweepSpec {
    SweepAxis axis = SweepAxis::none;
    std::vector<double> values;
    friend bool operator==(const SweepSpec&, const SweepSpec&) = default;
};

struct ExperimentConfig {
    ModelParams model;
    GridSpec grid;
    InitialSpec initial;
    SolverConfig solver;
    RunOptions output_strides;
    WeakFormConfig weakform;
    SweepSpec sweep;
    std::string output_dir = "out";

    friend bool operator==(const ExperimentConfig& x, const ExperimentConfig& y) {
        auto model = [](const ModelParams& m) { return std::tie(m.chi, m.a, m.b, m.n, m.k); };
        auto solver = [](const SolverConfig& s) {
            return std::tie(s.dt_max, s.cfl_safety, s.t_end, s.scheme, s.flux, s.cg_tolerance, s.cg_max_iterations);
        };
        auto strides = [](const RunOptions& o) { return std::tie(o.record_stride, o.snapshot_stride); };
        auto wf = [](const WeakFormConfig& w) {
            return std::tie(w.trace_exponent, w.spatial_modes, w.temporal_bumps, w.tolerance);
        };
        return model(x.model) == model(y.model) && x.grid == y.grid && x.initial == y.initial &&
               solver(x.solver) == solver(y.solver) && strides(x.output_strides) == strides(y.output_strides) &&
               wf(x.weakform) == wf(y.weakform) && x.sweep == y.sweep && x.output_dir == y.output_dir;
    }
};

namespace detail {

inline std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

/// Shortest decimal text that parses back to the same double.
inline std::string format_double(double x) {
    char buf[64];
    const auto r = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, r.ptr);
}

template <class T>
T parse_number(const std::string& key, const std::string& text) {
    T out{};
    const auto r = std::from_chars(text.data(), text.data() + text.size(), out);
    if (r.ec != std::errc{} || r.ptr != text.data() + text.size())
        throw ConfigError("config: bad numeric value for " + key + ": '" + text + "'");
    return out;
}

inline std::vector<double> parse_list(const std::string& key, const std::string& text) {
    std::vector<double> out;
    if (trim(text).empty()) return out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(parse_number<double>(key, trim(item)));
    return out;
}

}  // namespace detail

/// Parses configuration text. Throws ConfigError on syntax errors, unknown or duplicate keys.
[[nodiscard]] inline ExperimentConfig parse_config(std::string_view text) {
    using detail::parse_number;
    ExperimentConfig c;
    std::map<std::string, std::string> entries;
    std::istringstream in{std::string(text)};
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string t = detail::trim(line);
        if (t.empty() || t.front() == '#') continue;
        const auto eq = t.find('=');
        if (eq == std::string::npos) throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
        const std::string key = detail::trim(std::string_view(t).substr(0, eq));
        const std::string value = detail::trim(std::string_view(t).substr(eq + 1));
        if (key.empty()) throw ConfigError("config line " + std::to_string(lineno) + ": empty key");
        if (!entries.emplace(key, value).second) throw ConfigError("config: duplicate key " + key);
    }
    for (const auto& [key, v] : entries) {
        if (key == "model.chi") c.model.chi = parse_number<double>(key, v);
        else if (key == "model.a") c.model.a = parse_number<double>(key, v);
        else if (key == "model.b") c.model.b = parse_number<double>(key, v);
        else if (key == "model.n") c.model.n = parse_number<int>(key, v);
        else if (key == "model.k") c.model.k = parse_number<double>(key, v);
        else if (key == "grid.dims") c.grid.dims = parse_number<int>(key, v);
        else if (key == "grid.lx") c.grid.lx = parse_number<double>(key, v);
        else if (key == "grid.ly") c.grid.ly = parse_number<double>(key, v);
        else if (key == "grid.nx") c.grid.nx = parse_number<int>(key, v);
        else if (key == "grid.ny") c.grid.ny = parse_number<int>(key, v);
        else if (key == "initial.profile") c.initial.profile = v;
        else if (key == "initial.u_base") c.initial.u_base = parse_number<double>(key, v);
        else if (key == "initial.u_amp") c.initial.u_amp = parse_number<double>(key, v);
        else if (key == "initial.v_base") c.initial.v_base = parse_number<double>(key, v);
        else if (key == "initial.v_amp") c.initial.v_amp = parse_number<double>(key, v);
        else if (key == "initial.width") c.initial.width = parse_number<double>(key, v);
        else if (key == "initial.noise") c.initial.noise = parse_number<double>(key, v);
        else if (key == "initial.seed") c.initial.seed = parse_number<std::uint64_t>(key, v);
        else if (key == "initial.u_snapshot") c.initial.u_snapshot = v;
        else if (key == "initial.v_snapshot") c.initial.v_snapshot = v;
        else if (key == "solver.scheme") {
            if (v == "explicit") c.solver.scheme = Scheme::explicit_euler;
            else if (v == "imex") c.solver.scheme = Scheme::imex;
            else throw ConfigError("config: solver.scheme must be explicit or imex");
        } else if (key == "solver.flux") {
            if (v == "upwind") c.solver.flux = FluxRule::upwind;
            else if (v == "central") c.solver.flux = FluxRule::central;
            else throw ConfigError("config: solver.flux must be upwind or central");
        } else if (key == "solver.dt_max") c.solver.dt_max = parse_number<double>(key, v);
        else if (key == "solver.cfl_safety") c.solver.cfl_safety = parse_number<double>(key, v);
        else if (key == "solver.t_end") c.solver.t_end = parse_number<double>(key, v);
        else if (key == "solver.cg_tolerance") c.solver.cg_tolerance = parse_number<double>(key, v);
        else if (key == "solver.cg_max_iterations") c.solver.cg_max_iterations = parse_number<int>(key, v);
        else if (key == "output.dir") c.output_dir = v;
        else if (key == "output.record_stride") c.output_strides.record_stride = parse_number<std::size_t>(key, v);
        else if (key == "output.snapshot_stride") c.output_strides.snapshot_stride = parse_number<std::size_t>(key, v);
        else if (key == "weakform.trace_exponent") c.weakform.trace_exponent = parse_number<double>(key, v);
        else if (key == "weakform.spatial_modes") c.weakform.spatial_modes = parse_number<int>(key, v);
        else if (key == "weakform.temporal_bumps") c.weakform.temporal_bumps = parse_number<int>(key, v);
        else if (key == "weakform.tolerance") c.weakform.tolerance = parse_number<double>(key, v);
        else if (key == "sweep.axis") {
            if (v == "none") c.sweep.axis = SweepAxis::none;
            else if (v == "k") c.sweep.axis = SweepAxis::k;
            else if (v == "chi") c.sweep.axis = SweepAxis::chi;
            else throw ConfigError("config: sweep.axis must be none, k or chi");
        } else if (key == "sweep.values") c.sweep.values = detail::parse_list(key, v);
        else throw ConfigError("config: unknown key " + key);
    }
    return c;
}

[[nodiscard]] inline std::string serialize_config(const ExperimentConfig& c) {
    using detail::format_double;
    std::ostringstream os;
    auto kv = [&](const char* key, const std::string& value) { os << key << " = " << value << '\n'; };
    kv("model.chi", format_double(c.model.chi));
    kv("model.a", format_double(c.model.a));
    kv("model.b", format_double(c.model.b));
    kv("model.n", std::to_string(c.model.n));
    kv("model.k", format_double(c.model.k));
    kv("grid.dims", std::to_string(c.grid.dims));
    kv("grid.lx", format_double(c.grid.lx));
    kv("grid.ly", format_double(c.grid.ly));
    kv("grid.nx", std::to_string(c.grid.nx));
    kv("grid.ny", std::to_string(c.grid.ny));
    kv("initial.profile", c.initial.profile);
    kv("initial.u_base", format_double(c.initial.u_base));
    kv("initial.u_amp", format_double(c.initial.u_amp));
    kv("initial.v_base", format_double(c.initial.v_base));
    kv("initial.v_amp", format_double(c.initial.v_amp));
    kv("initial.width", format_double(c.initial.width));
    kv("initial.noise", format_double(c.initial.noise));
    kv("initial.seed", std::to_string(c.initial.seed));
    if (!c.initial.u_snapshot.empty()) kv("initial.u_snapshot", c.initial.u_snapshot);
    if (!c.initial.v_snapshot.empty()) kv("initial.v_snapshot", c.initial.v_snapshot);
    kv("solver.scheme", c.solver.scheme == Scheme::imex ? "imex" : "explicit");
    kv("solver.flux", c.solver.flux == FluxRule::central ? "central" : "upwind");
    kv("solver.dt_max", format_double(c.solver.dt_max));
    kv("solver.cfl_safety", format_double(c.solver.cfl_safety));
    kv("solver.t_end", format_double(c.solver.t_end));
    kv("solver.cg_tolerance", format_double(c.solver.cg_tolerance));
    kv("solver.cg_max_iterations", std::to_string(c.solver.cg_max_iterations));
    kv("output.dir", c.output_dir);
    kv("output.record_stride", std::to_string(c.output_strides.record_stride));
    kv("output.snapshot_stride", std::to_string(c.output_strides.snapshot_stride));
    kv("weakform.trace_exponent", format_double(c.weakform.trace_exponent));
    kv("weakform.spatial_modes", std::to_string(c.weakform.spatial_modes));
    kv("weakform.temporal_bumps", std::to_string(c.weakform.temporal_bumps));
    kv("weakform.tolerance", format_double(c.weakform.tolerance));
    kv("sweep.axis", c.sweep.axis == SweepAxis::k ? "k" : c.sweep.axis == SweepAxis::chi ? "chi" : "none");
    std::string list;
    for (std::size_t i = 0; i < c.sweep.values.size(); ++i) list += (i ? "," : "") + format_double(c.sweep.values[i]);
    kv("sweep.values", list);
    return os.str();
}

[[nodiscard]] inline ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config: cannot open " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

}  // namespace kslog
