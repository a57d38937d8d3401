/**
 * @file harness.hpp
 * @brief Experiment orchestration behind the command-line tool.
 *
 * Artifacts of a run in the output directory:
 *   config.txt       resolved configuration (serialize_config)
 *   diagnostics.csv  one row per record
 *   verification.csv one row per weak-form check
 *   trajectory.kslg  concatenated snapshot records, u then v, per kept time
 *   u_final.kslg, v_final.kslg
 *
 * Exit codes: 0 success, 1 a verification check failed, 2 usage or domain
 * error, 3 inadmissible parameters without force, 4 solver abort.
 */
#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "kslog/config.hpp"
#include "kslog/diagnostics.hpp"
#include "kslog/initial_data.hpp"
#include "kslog/params.hpp"
#include "kslog/snapshot.hpp"
#include "kslog/solver.hpp"
#include "kslog/weakform.hpp"

namespace kslog {

enum ExitCode : int {
    exit_ok = 0,
    exit_check_failed = 1,
    exit_usage = 2,
    exit_inadmissible = 3,
    exit_solver_abort = 4,
};

namespace detail {

inline std::string g17(double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

inline std::ofstream open_out(const std::filesystem::path& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot write " + path.string());
    return os;
}

}  // namespace detail

/// Prints the admissibility report; b omitted prints only the branches and thresholds.
inline int cmd_admissible(double chi, double a, std::optional<double> b, std::ostream& out, std::ostream& err) {
    using detail::g17;
    try {
        if (!(a > 0.0) || !(chi >= 0.0) || !std::isfinite(a) || !std::isfinite(chi))
            throw DomainError("admissible: need a > 0 and chi >= 0");
        out << "b_plus=" << g17(b_plus(a, chi)) << '\n';
        out << "b_minus=" << g17(b_minus(a, chi)) << '\n';
        if (b) {
            ModelParams p{chi, a, *b, 2, 8.0};
            p.validate();
            const AdmissibilityReport r = analyze(p);
            out << "discriminant=" << g17(r.discriminant) << '\n';
            out << "coercivity=" << g17(r.coercivity) << '\n';
            out << "frontier=" << (r.frontier ? "true" : "false") << '\n';
            out << "admissible=" << (r.admissible ? "true" : "false") << '\n';
        }
        for (int n : {2, 3, 4}) {
            const double th = chi_threshold_lw(n);
            out << "threshold_n" << n << '=' << (std::isinf(th) ? std::string("inf") : g17(th))
                << " chi_above=" << (chi > th ? "true" : "false") << '\n';
        }
        return exit_ok;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return exit_usage;
    }
}

struct RunOutcome {
    std::vector<DiagnosticsRecord> records;
    std::vector<VerificationRow> rows;
    Trajectory trajectory;
    bool aborted = false;
    double abort_time = 0.0;
    std::string abort_message;
};

/// Builds initial data, runs the solver and the weak-form checks. Solver failures are captured, not thrown.
[[nodiscard]] inline RunOutcome execute(const ExperimentConfig& cfg, bool verify = true) {
    const Grid g = cfg.grid.make();
    auto [u0, v0] = make_initial_data(g, cfg.initial, cfg.model.k);
    RunOutcome out;
    DiagnosticsRecorder rec(cfg.model);
    try {
        out.trajectory = run(u0, v0, cfg.model, cfg.solver, cfg.output_strides, rec.hooks());
    } catch (const PositivityError& e) {
        out.aborted = true;
        out.abort_time = e.time();
        out.abort_message = e.what();
    } catch (const StabilityError& e) {
        out.aborted = true;
        out.abort_time = e.time();
        out.abort_message = e.what();
    } catch (const SolverError& e) {
        out.aborted = true;
        out.abort_time = rec.records().empty() ? 0.0 : rec.records().back().t;
        out.abort_message = e.what();
    }
    out.records = rec.take_records();
    if (!out.aborted && verify) out.rows = verify_trajectory(out.trajectory, out.records, cfg.model, cfg.weakform);
    return out;
}

inline void write_trajectory(std::ostream& os, const Trajectory& traj) {
    for (const auto& s : traj.snapshots) {
        write_snapshot(os, s.u, s.t);
        write_snapshot(os, s.v, s.t);
    }
}

/// Reads a trajectory file written by write_trajectory.
[[nodiscard]] inline Trajectory read_trajectory(std::istream& is, const Grid& grid) {
    Trajectory traj;
    Snapshot su, sv;
    while (read_snapshot(is, grid, su)) {
        if (!read_snapshot(is, grid, sv) || sv.time != su.time)
            throw std::runtime_error("trajectory file: unpaired u/v snapshot");
        traj.snapshots.push_back({su.time, su.field, sv.field});
    }
    if (traj.snapshots.empty()) throw std::runtime_error("trajectory file: no snapshots");
    traj.steps = traj.snapshots.size() - 1;
    return traj;
}

/// Parses a diagnostics CSV written by write_diagnostics_csv. mass_sat is recovered as mass_u - defect.
[[nodiscard]] inline std::vector<DiagnosticsRecord> read_diagnostics_csv(std::istream& is) {
    std::string line;
    if (!std::getline(is, line) || line != kDiagnosticsHeader)
        throw std::runtime_error("diagnostics CSV: unexpected header");
    std::vector<DiagnosticsRecord> out;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::vector<double> v;
        std::stringstream ss(line);
        std::string item;
        while (std::getline(ss, item, ',')) v.push_back(std::strtod(item.c_str(), nullptr));
        if (v.size() != 13) throw std::runtime_error("diagnostics CSV: expected 13 columns");
        DiagnosticsRecord r;
        r.t = v[0];
        r.mass_u = v[1];
        r.mass_v = v[2];
        r.min_u = v[3];
        r.min_v = v[4];
        r.max_u = v[5];
        r.max_v = v[6];
        r.energy = v[7];
        r.diss_grad = v[8];
        r.diss_cross = v[9];
        r.diss_react = v[10];
        r.defect = v[11];
        r.gronwall_bound = v[12];
        r.mass_sat = r.mass_u - r.defect;
        out.push_back(r);
    }
    return out;
}

struct RunSummary {
    double final_mass_u = 0.0;
    double final_energy = 0.0;
    double gronwall_slack = 0.0;
    double defect_integral = 0.0;
};

[[nodiscard]] inline RunSummary summarize(const std::vector<DiagnosticsRecord>& records, const ModelParams& p) {
    RunSummary s;
    if (records.empty()) return s;
    s.final_mass_u = records.back().mass_u;
    s.final_energy = records.back().energy;
    s.gronwall_slack = gronwall_check(records, p).max_slack;
    s.defect_integral = defect_time_integral(records);
    return s;
}

namespace detail {

inline bool all_pass(const std::vector<VerificationRow>& rows) {
    return std::all_of(rows.begin(), rows.end(), [](const VerificationRow& r) { return r.pass; });
}

inline void print_summary(std::ostream& out, const RunSummary& s, const std::vector<VerificationRow>& rows) {
    const auto passed = std::count_if(rows.begin(), rows.end(), [](const VerificationRow& r) { return r.pass; });
    out << "final_mass_u=" << g17(s.final_mass_u) << '\n';
    out << "final_energy=" << g17(s.final_energy) << '\n';
    out << "max_gronwall_slack=" << g17(s.gronwall_slack) << '\n';
    out << "defect_integral=" << g17(s.defect_integral) << '\n';
    out << "checks_passed=" << passed << '/' << rows.size() << '\n';
    for (const auto& r : rows)
        if (!r.pass) out << "FAIL " << r.check << ' ' << r.phi_id << ' ' << r.psi_id << " slack=" << g17(r.slack) << '\n';
}

inline bool refuse(const ModelParams& p, bool force, std::ostream& err) {
    const AdmissibilityReport r = analyze(p);
    if (r.admissible || force) return false;
    err << "error: parameters (chi=" << g17(p.chi) << ", a=" << g17(p.a) << ", b=" << g17(p.b)
        << ") are not admissible; use --force to run anyway\n";
    return true;
}

}  // namespace detail

inline int cmd_run(const ExperimentConfig& cfg, bool force, std::ostream& out, std::ostream& err) {
    namespace fs = std::filesystem;
    try {
        cfg.model.validate();
        if (detail::refuse(cfg.model, force, err)) return exit_inadmissible;
        const RunOutcome r = execute(cfg);
        const fs::path dir(cfg.output_dir);
        fs::create_directories(dir);
        detail::open_out(dir / "config.txt") << serialize_config(cfg);
        {
            auto os = detail::open_out(dir / "diagnostics.csv");
            write_diagnostics_csv(os, r.records);
        }
        if (r.aborted) {
            err << "solver aborted at t=" << detail::g17(r.abort_time) << ": " << r.abort_message << '\n';
            return exit_solver_abort;
        }
        {
            auto os = detail::open_out(dir / "verification.csv");
            write_verification_csv(os, r.rows);
        }
        {
            auto os = detail::open_out(dir / "trajectory.kslg");
            write_trajectory(os, r.trajectory);
        }
        save_snapshot((dir / "u_final.kslg").string(), r.trajectory.final().u, r.trajectory.final().t);
        save_snapshot((dir / "v_final.kslg").string(), r.trajectory.final().v, r.trajectory.final().t);
        detail::print_summary(out, summarize(r.records, cfg.model), r.rows);
        return detail::all_pass(r.rows) ? exit_ok : exit_check_failed;
    } catch (const std::invalid_argument& e) {
        err << "error: " << e.what() << '\n';
        return exit_usage;
    } catch (const std::domain_error& e) {
        err << "error: " << e.what() << '\n';
        return exit_usage;
    }
}

/// Re-runs the weak-form checks on the artifacts of a previous run in `dir`.
inline int cmd_verify(const ExperimentConfig& cfg, const std::string& dir, std::ostream& out, std::ostream& err) {
    namespace fs = std::filesystem;
    try {
        const Grid g = cfg.grid.make();
        std::ifstream tf(fs::path(dir) / "trajectory.kslg", std::ios::binary);
        std::ifstream df(fs::path(dir) / "diagnostics.csv");
        if (!tf || !df) throw std::invalid_argument("verify: missing trajectory.kslg or diagnostics.csv in " + dir);
        const Trajectory traj = read_trajectory(tf, g);
        const auto records = read_diagnostics_csv(df);
        const auto rows = verify_trajectory(traj, records, cfg.model, cfg.weakform);
        write_verification_csv(out, rows);
        return detail::all_pass(rows) ? exit_ok : exit_check_failed;
    } catch (const std::runtime_error& e) {
        err << "error: " << e.what() << '\n';
        return exit_usage;
    } catch (const std::logic_error& e) {
        err << "error: " << e.what() << '\n';
        return exit_usage;
    }
}

struct SweepRow {
    double param = 0.0;
    double defect_integral = std::numeric_limits<double>::quiet_NaN();
    double final_mass_u = std::numeric_limits<double>::quiet_NaN();
    double final_energy = std::numeric_limits<double>::quiet_NaN();
    double gronwall_slack = std::numeric_limits<double>::quiet_NaN();
    bool aborted = false;
};

inline constexpr const char* kSweepHeader = "param,defect_integral,final_mass_u,final_energy,gronwall_slack,aborted";

inline void write_sweep_csv(std::ostream& os, const std::vector<SweepRow>& rows) {
    using detail::g17;
    os << kSweepHeader << '\n';
    for (const auto& r : rows)
        os << g17(r.param) << ',' << g17(r.defect_integral) << ',' << g17(r.final_mass_u) << ','
           << g17(r.final_energy) << ',' << g17(r.gronwall_slack) << ',' << (r.aborted ? "true" : "false") << '\n';
}

/// Worker count: hardware concurrency, capped by KSLG_THREADS when set to a positive integer.
[[nodiscard]] inline unsigned worker_count(std::size_t jobs) {
    unsigned n = std::max(1u, std::thread::hardware_concurrency());
    if (const char* env = std::getenv("KSLG_THREADS")) {
        const long cap = std::strtol(env, nullptr, 10);
        if (cap > 0) n = std::min<unsigned>(n, static_cast<unsigned>(cap));
    }
    return static_cast<unsigned>(std::max<std::size_t>(1, std::min<std::size_t>(n, jobs)));
}

/// Member config for sweep point i: parameter substituted, output in <dir>/member_<i>.
[[nodiscard]] inline ExperimentConfig sweep_member(const ExperimentConfig& cfg, std::size_t i) {
    ExperimentConfig m = cfg;
    if (cfg.sweep.axis == SweepAxis::k) m.model.k = cfg.sweep.values[i];
    else if (cfg.sweep.axis == SweepAxis::chi) m.model.chi = cfg.sweep.values[i];
    m.sweep = {};
    m.output_dir = (std::filesystem::path(cfg.output_dir) / ("member_" + std::to_string(i))).string();
    return m;
}

/// Runs every sweep point; members that fail (domain, inadmissible without force, solver) become aborted rows.
[[nodiscard]] inline std::vector<SweepRow> run_sweep(const ExperimentConfig& cfg, bool force,
                                                     std::vector<std::vector<DiagnosticsRecord>>* member_records = nullptr) {
    const std::size_t n = cfg.sweep.values.size();
    std::vector<SweepRow> rows(n);
    std::vector<std::vector<DiagnosticsRecord>> recs(n);
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < n; i = next++) {
            const ExperimentConfig m = sweep_member(cfg, i);
            rows[i].param = cfg.sweep.values[i];
            try {
                m.model.validate();
                if (!force && !analyze(m.model).admissible) {
                    rows[i].aborted = true;
                    continue;
                }
                RunOutcome r = execute(m, false);
                const RunSummary s = summarize(r.records, m.model);
                rows[i].aborted = r.aborted;
                if (!r.aborted) {
                    rows[i].defect_integral = s.defect_integral;
                    rows[i].final_mass_u = s.final_mass_u;
                    rows[i].final_energy = s.final_energy;
                    rows[i].gronwall_slack = s.gronwall_slack;
                }
                recs[i] = std::move(r.records);
            } catch (const std::exception&) {
                rows[i].aborted = true;
            }
        }
    };
    std::vector<std::thread> pool;
    const unsigned threads = worker_count(n);
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    if (member_records) *member_records = std::move(recs);
    return rows;
}

inline int cmd_sweep(const ExperimentConfig& cfg, bool force, std::ostream& out, std::ostream& err) {
    namespace fs = std::filesystem;
    try {
        if (cfg.sweep.axis == SweepAxis::none && !cfg.sweep.values.empty())
            throw std::invalid_argument("sweep: sweep.axis must be k or chi");
        std::vector<std::vector<DiagnosticsRecord>> recs;
        const auto rows = run_sweep(cfg, force, &recs);
        fs::create_directories(cfg.output_dir);
        for (std::size_t i = 0; i < rows.size(); ++i) {
            const ExperimentConfig m = sweep_member(cfg, i);
            fs::create_directories(m.output_dir);
            detail::open_out(fs::path(m.output_dir) / "config.txt") << serialize_config(m);
            auto os = detail::open_out(fs::path(m.output_dir) / "diagnostics.csv");
            write_diagnostics_csv(os, recs[i]);
        }
        {
            auto os = detail::open_out(fs::path(cfg.output_dir) / "sweep.csv");
            write_sweep_csv(os, rows);
        }
        write_sweep_csv(out, rows);
        if (cfg.sweep.axis == SweepAxis::chi) {
            const double th = chi_threshold_lw(cfg.model.n);
            for (const auto& r : rows)
                out << "# chi=" << detail::g17(r.param) << (r.param > th ? " above" : " at or below")
                    << " the n=" << cfg.model.n << " threshold "
                    << (std::isinf(th) ? std::string("inf") : detail::g17(th)) << '\n';
        }
        return exit_ok;
    } catch (const std::invalid_argument& e) {
        err << "error: " << e.what() << '\n';
        return exit_usage;
    } catch (const std::domain_error& e) {
        err << "error: " << e.what() << '\n';
        return exit_usage;
    }
}

}  // namespace kslog
