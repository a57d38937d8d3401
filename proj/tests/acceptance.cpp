// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fails.
#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "kslog/harness.hpp"

using namespace kslog;

namespace {

struct Outcome {
    bool pass = true;
    std::string detail;
};

struct Experiment {
    Trajectory traj;
    std::vector<DiagnosticsRecord> records;
    double seconds = 0.0;
};

Experiment simulate_run(const Grid& g, const InitialSpec& init, const ModelParams& p, const SolverConfig& cfg,
                        const RunOptions& opts = {}) {
    auto [u0, v0] = make_initial_data(g, init, p.k);
    DiagnosticsRecorder rec(p);
    Experiment e;
    const auto t0 = std::chrono::steady_clock::now();
    e.traj = run(u0, v0, p, cfg, opts, rec.hooks());
    e.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    e.records = rec.take_records();
    return e;
}

std::string fmt(const char* f, double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, x);
    return buf;
}

double max_mass_drift(const std::vector<DiagnosticsRecord>& r) {
    double worst = 0.0;
    for (const auto& x : r) worst = std::max(worst, std::abs(x.mass_u - r.front().mass_u) / r.front().mass_u);
    return worst;
}

// Every run whose trajectory is kept is audited by the trace checks of criterion 10.
struct TraceLedger {
    double worst = 0.0;
    int runs = 0;
    void audit(const Trajectory& traj, const ModelParams& p) {
        if (traj.snapshots.size() < 2 || !(traj.horizon() > 0.0)) return;
        const Grid& g = traj.initial().u.grid;
        std::vector<SpatialProfile> phis;
        std::vector<TemporalProfile> psis;
        for (const auto& tf : build_bases(g, traj.horizon(), WeakFormConfig{})) {
            if (std::none_of(phis.begin(), phis.end(), [&](const SpatialProfile& q) { return q.modes == tf.phi.modes; }))
                phis.push_back(tf.phi);
            if (std::none_of(psis.begin(), psis.end(), [&](const TemporalProfile& q) { return q.center == tf.psi.center; }))
                psis.push_back(tf.psi);
        }
        for (const auto& psi : psis)
            for (auto which : {TraceField::flux_pr, TraceField::grad_v}) {
                const TraceReport r = trace_check(traj, psi, which, phis, p);
                if (r.scale > 0.0) worst = std::max(worst, r.max_pairing / r.scale);
            }
        ++runs;
    }
};

TraceLedger g_trace;

InitialSpec bump_1d() {
    InitialSpec s;
    s.profile = "gaussian-bump";
    s.u_base = 1.0;
    s.u_amp = 1.0;
    s.v_base = 1.0;
    s.width = 0.1;
    return s;
}

InitialSpec smooth_two_bumps() {
    InitialSpec s;
    s.profile = "two-bumps";
    s.u_amp = 0.5;
    return s;
}

// Criteria 1-3 share the two 256-cell runs.
struct MassRuns {
    Experiment explicit_run, imex_run;
};

MassRuns mass_runs() {
    const Grid g(1.0, 256);
    const ModelParams p{1, 1, 1, 2, 8};
    MassRuns m;
    SolverConfig ex;
    ex.t_end = 1.0;
    RunOptions opts;
    opts.snapshot_stride = 0;
    m.explicit_run = simulate_run(g, bump_1d(), p, ex, opts);
    SolverConfig im = ex;
    im.scheme = Scheme::imex;
    im.dt_max = 1e-3;
    m.imex_run = simulate_run(g, bump_1d(), p, im, opts);
    g_trace.audit(m.explicit_run.traj, p);
    g_trace.audit(m.imex_run.traj, p);
    return m;
}

Outcome criterion_1(const MassRuns& m) {
    const double de = max_mass_drift(m.explicit_run.records), di = max_mass_drift(m.imex_run.records);
    Outcome o;
    o.pass = de <= 1e-10 && di <= 1e-9 && m.explicit_run.seconds < 5.0 && m.imex_run.seconds < 5.0;
    o.detail = "explicit drift=" + fmt("%.3g", de) + " imex drift=" + fmt("%.3g", di) +
               " explicit runtime=" + fmt("%.2f", m.explicit_run.seconds) + "s imex runtime=" +
               fmt("%.2f", m.imex_run.seconds) + "s";
    return o;
}

Outcome criterion_2(const MassRuns& m) {
    const double se = v_mass_envelope_slack(m.explicit_run.records), si = v_mass_envelope_slack(m.imex_run.records);
    return {se >= -1e-8 && si >= -1e-8,
            "min relative slack explicit=" + fmt("%.3g", se) + " imex=" + fmt("%.3g", si)};
}

Outcome criterion_3(const MassRuns& m) {
    const double se = min_principle_slack(m.explicit_run.records), si = min_principle_slack(m.imex_run.records);
    return {se >= -1e-8 && si >= -1e-8, "min slack explicit=" + fmt("%.3g", se) + " imex=" + fmt("%.3g", si)};
}

Outcome criterion_4() {
    const Grid g(1.0, 64);
    const double dt_max = 4e-3;
    Outcome o;
    for (const ModelParams p : {ModelParams{1, 1, 1, 2, 8}, ModelParams{3, 0.5, 2 * b_plus(0.5, 3), 2, 8}}) {
        if (!analyze(p).admissible) return {false, "parameter set not admissible"};
        std::vector<double> slack;
        for (double f : {4.0, 8.0, 16.0}) {
            SolverConfig cfg;
            cfg.scheme = Scheme::imex;
            cfg.dt_max = dt_max / f;
            cfg.t_end = 1.0;
            const auto e = simulate_run(g, bump_1d(), p, cfg);
            const auto rep = gronwall_check(e.records, p);
            o.pass = o.pass && rep.passed && rep.max_slack <= 1e-2;
            slack.push_back(rep.max_slack);
            g_trace.audit(e.traj, p);
        }
        for (std::size_t i = 1; i < slack.size(); ++i)
            o.pass = o.pass && std::max(slack[i], 0.0) <= std::max(slack[i - 1], 0.0) &&
                     std::abs(slack[i]) < std::abs(slack[i - 1]);
        o.detail += "(chi,a,b)=(" + fmt("%g", p.chi) + "," + fmt("%g", p.a) + "," + fmt("%.4g", p.b) + ") slack";
        for (double s : slack) o.detail += " " + fmt("%.3g", s);
        o.detail += "; ";
    }
    return o;
}

Outcome criterion_5() {
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> lg(-3.0, 3.0);
    int disagreements = 0, frontier_bad = 0, non_monotone = 0;
    double worst_frontier = 0.0;
    for (int i = 0; i < 10000; ++i) {
        const double chi = std::pow(10.0, lg(rng)), a = std::pow(10.0, lg(rng)), b = std::pow(10.0, lg(rng));
        const ModelParams p{chi, a, b, 2, 8};
        const AdmissibilityReport r = analyze(p);
        if (!r.frontier) {
            const bool d = r.discriminant < 0.0, bp = b > r.b_plus, c = r.coercivity > 0.0;
            if (d != r.admissible || bp != r.admissible || c != r.admissible) ++disagreements;
        }
        const ModelParams f{chi, a, b_plus(a, chi), 2, 8};
        if (f.b > 0.0) {
            const double rel = std::abs(discriminant(f)) / discriminant_scale(f);
            worst_frontier = std::max(worst_frontier, rel);
            if (rel > 1e-9) ++frontier_bad;
        }
    }
    for (double chi : {0.01, 1.0, 100.0}) {
        double prev = -1.0;
        for (int i = 0; i < 100; ++i) {
            const double cur = b_plus(1e-3 * std::pow(1e6, i / 99.0), chi);
            if (!(cur > prev)) ++non_monotone;
            prev = cur;
        }
    }
    return {disagreements == 0 && frontier_bad == 0 && non_monotone == 0,
            "disagreements=" + std::to_string(disagreements) + " worst frontier |disc|/scale=" +
                fmt("%.3g", worst_frontier) + " monotonicity breaks=" + std::to_string(non_monotone)};
}

Outcome criterion_6() {
    std::mt19937_64 rng(77);
    std::uniform_real_distribution<double> lg(-1.0, 1.0);
    std::normal_distribution<double> nd;
    std::uniform_real_distribution<double> ang(0.0, 2.0 * std::numbers::pi);
    int samples = 0, violations = 0;
    double worst_excess = -1e300;
    while (samples < 1000) {
        const double chi = std::pow(10.0, lg(rng)), a = std::pow(10.0, lg(rng));
        const ModelParams p{chi, a, b_plus(a, chi) * (1.0 + std::pow(10.0, lg(rng))), 2, 8};
        if (!analyze(p).admissible) continue;
        ++samples;
        const double c = coercivity_constant(p);
        const auto m = dissipation_matrix(p);
        const double scale = std::abs(m.uu) + 2.0 * std::abs(m.uv) + std::abs(m.vv);
        for (int k = 0; k < 100; ++k) {
            const std::array<double, 2> U{nd(rng), nd(rng)}, V{nd(rng), nd(rng)};
            const double norm2 = U[0] * U[0] + U[1] * U[1] + V[0] * V[0] + V[1] * V[1];
            const double excess = c * norm2 - q_eval(p, U, V);
            worst_excess = std::max(worst_excess, excess / (scale * norm2));
            if (excess > 1e-12 * scale * norm2) ++violations;
        }
    }
    // Oracle: lambda_min of the 2x2 form by minimizing over random unit directions.
    double worst_oracle = 0.0;
    for (int s = 0; s < 20; ++s) {
        const double chi = std::pow(10.0, lg(rng)), a = std::pow(10.0, lg(rng));
        const ModelParams p{chi, a, b_plus(a, chi) * (1.0 + std::pow(10.0, lg(rng))), 2, 8};
        double best = 1e300;
        for (int k = 0; k < 200000; ++k) {
            const double th = ang(rng);
            best = std::min(best, q_eval(p, std::cos(th), std::sin(th)));
        }
        worst_oracle = std::max(worst_oracle, std::abs(best - coercivity_constant(p)));
    }
    return {violations == 0 && worst_oracle <= 1e-3,
            "violations=" + std::to_string(violations) + " worst (c|W|^2-q)/(scale|W|^2)=" + fmt("%.3g", worst_excess) +
                " lambda_min oracle gap=" + fmt("%.3g", worst_oracle)};
}

Outcome criterion_7() {
    const ModelParams p{1, 1, 1, 2, 8};
    std::vector<double> res;
    for (int n : {64, 128, 256}) {
        const Grid g(1.0, n);
        auto [u0, v0] = make_initial_data(g, smooth_two_bumps(), p.k);
        SolverConfig cfg;
        cfg.flux = FluxRule::central;
        cfg.dt_max = 0.2 / (double(n) * n);
        cfg.t_end = 0.05;
        RunOptions opts;
        opts.snapshot_stride = 0;
        const auto traj = run(u0, v0, p, cfg, opts);
        g_trace.audit(traj, p);
        const State next = step_with_dt(traj.final(), p, cfg, cfg.dt_max);
        res.push_back(l1_norm(key_identity_residual(traj.final(), next, p)));
    }
    Outcome o;
    o.detail = "L1 residuals";
    for (double r : res) o.detail += " " + fmt("%.3g", r);
    o.detail += " ratios";
    for (std::size_t i = 1; i < res.size(); ++i) {
        const double ratio = res[i - 1] / res[i];
        o.pass = o.pass && ratio >= 3.0 && ratio <= 5.5;
        o.detail += " " + fmt("%.3f", ratio);
    }
    return o;
}

// Criteria 8 and 9 share the dt ladder of smooth IMEX runs.
struct Ladder {
    std::vector<double> dts;
    std::vector<Experiment> runs;
    ModelParams p{1, 1, 1, 2, 8};
};

Ladder ladder() {
    Ladder l;
    const Grid g(1.0, 64);
    for (double dt : {4e-3, 2e-3, 1e-3, 5e-4, 2.5e-4}) {
        SolverConfig cfg;
        cfg.scheme = Scheme::imex;
        cfg.flux = FluxRule::central;
        cfg.dt_max = dt;
        cfg.t_end = 1.0;
        l.dts.push_back(dt);
        l.runs.push_back(simulate_run(g, smooth_two_bumps(), l.p, cfg));
        g_trace.audit(l.runs.back().traj, l.p);
    }
    return l;
}

Outcome criterion_8(const Ladder& l) {
    std::vector<double> worst;
    for (const auto& e : l.runs) {
        double w = 0.0;
        for (const auto& tf : build_bases(e.traj.initial().u.grid, e.traj.horizon(), WeakFormConfig{})) {
            const auto r = assemble_superu(e.traj, tf, l.p);
            w = std::max(w, std::abs(r.lhs - r.rhs) / r.scale);
        }
        worst.push_back(w);
    }
    Outcome o;
    o.detail = "max |lhs-rhs|/scale by dt";
    for (double w : worst) o.detail += " " + fmt("%.3g", w);
    o.detail += " halving ratios";
    for (std::size_t i = 1; i < worst.size(); ++i) {
        const double ratio = worst[i - 1] / worst[i];
        o.pass = o.pass && ratio >= 1.6 && ratio <= 2.5;
        o.detail += " " + fmt("%.2f", ratio);
    }
    o.pass = o.pass && worst.back() <= 1e-3;
    return o;
}

Outcome criterion_9(const Ladder& l) {
    const Experiment& e = l.runs.back();
    const Grid& g = e.traj.initial().u.grid;
    double worst_match = 0.0, min_residual = 1e300, worst_mass = 0.0;
    for (const auto& tf : build_bases(g, e.traj.horizon(), WeakFormConfig{})) {
        const auto r = assemble_superv(e.traj, tf, l.p);
        worst_match = std::max(worst_match, std::abs(r.residual - r.defect_pairing) / r.scale);
        min_residual = std::min(min_residual, r.residual);
        if (tf.phi.modes[0] == 0) {
            const auto mc = mass_control_check(e.records, tf.psi, l.p);
            worst_mass = std::max(worst_mass, std::abs(mc.slack) / mc.scale);
        }
    }
    ExperimentConfig sweep;
    sweep.grid.nx = 64;
    sweep.initial = bump_1d();
    sweep.solver.scheme = Scheme::imex;
    sweep.solver.dt_max = 2e-3;
    sweep.solver.t_end = 1.0;
    sweep.sweep = {SweepAxis::k, {2, 4, 8, 16, 32, 64, 128, 256}};
    const auto rows = run_sweep(sweep, false);
    bool decreasing = true;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        // Serial replay of each member: same defect as the threaded sweep, and its trajectory is trace-audited.
        const ExperimentConfig member = sweep_member(sweep, i);
        const RunOutcome replay = execute(member, false);
        g_trace.audit(replay.trajectory, member.model);
        decreasing = decreasing && !rows[i].aborted && !replay.aborted &&
                     defect_time_integral(replay.records) == rows[i].defect_integral;
        if (i > 0) decreasing = decreasing && rows[i].defect_integral < rows[i - 1].defect_integral;
    }
    Outcome o;
    o.pass = worst_match <= 1e-3 && min_residual >= -1e-8 && decreasing && worst_mass <= 1e-6;
    o.detail = "superv match=" + fmt("%.3g", worst_match) + " min residual=" + fmt("%.3g", min_residual) +
               " mass_control=" + fmt("%.3g", worst_mass) + " k-sweep defect";
    for (const auto& r : rows) o.detail += " " + fmt("%.4g", r.defect_integral);
    return o;
}

Outcome criterion_10() {
    // Synthetic unit outward flux on the right side: pairing equals that side's measure.
    const Grid g1(1.0, 16);
    FaceField f1(g1);
    f1.x[g1.xface(16, 0)] = 1.0;
    const double p1 = boundary_pairing(f1, Field(g1, 1.0)).pairing;
    const Grid g2(2.0, 0.75, 16, 12);
    FaceField f2(g2);
    for (int j = 0; j < 12; ++j) f2.x[g2.xface(16, j)] = 1.0;
    const double p2 = boundary_pairing(f2, Field(g2, 1.0)).pairing;
    const bool synthetic = std::abs(p1 - 1.0) <= 1e-12 && std::abs(p2 - 0.75) <= 1e-12;
    return {synthetic && g_trace.runs > 0 && g_trace.worst <= 1e-10,
            "runs audited=" + std::to_string(g_trace.runs) + " worst pairing/scale=" + fmt("%.3g", g_trace.worst) +
                " synthetic 1D=" + fmt("%.17g", p1) + " 2D=" + fmt("%.17g", p2)};
}

Outcome criterion_11() {
    const Grid g(1.0, 64);
    double defect8 = 0.0, defect256 = 0.0, ratio_bound = 0.0;
    for (double k : {8.0, 256.0}) {
        SolverConfig cfg;
        cfg.scheme = Scheme::imex;
        cfg.dt_max = 2e-3;
        cfg.t_end = 1.0;
        const auto e = simulate_run(g, bump_1d(), ModelParams{1, 1, 1, 2, k}, cfg);
        g_trace.audit(e.traj, ModelParams{1, 1, 1, 2, k});
        for (const auto& s : e.traj.snapshots)
            for (std::size_t i = 0; i < g.size(); ++i) ratio_bound = std::max(ratio_bound, s.u.values[i] / s.v.values[i]);
        (k == 8.0 ? defect8 : defect256) = defect_time_integral(e.records);
    }
    return {ratio_bound <= 10.0 && defect256 <= defect8 / 16.0,
            "max u/v=" + fmt("%.3g", ratio_bound) + " defect k=8: " + fmt("%.5g", defect8) +
                " k=256: " + fmt("%.5g", defect256) + " ratio=" + fmt("%.2f", defect8 / defect256)};
}

}  // namespace

int main() {
    int failed = 0;
    auto report = [&](int id, const char* name, const std::function<Outcome()>& f) {
        Outcome o;
        try {
            o = f();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        std::printf("criterion %2d %s  %s: %s\n", id, o.pass ? "PASS" : "FAIL", name, o.detail.c_str());
        std::fflush(stdout);
        if (!o.pass) ++failed;
    };
    const MassRuns m = mass_runs();
    report(1, "mass conservation", [&] { return criterion_1(m); });
    report(2, "v-mass envelope", [&] { return criterion_2(m); });
    report(3, "minimum principle", [&] { return criterion_3(m); });
    report(4, "Gronwall energy bound", criterion_4);
    report(5, "admissibility equivalence", criterion_5);
    report(6, "coercivity", criterion_6);
    report(7, "key identity residual", criterion_7);
    const Ladder l = ladder();
    report(8, "weak-form equality at finite k", [&] { return criterion_8(l); });
    report(9, "defect consistency", [&] { return criterion_9(l); });
    report(11, "vanishing defect cross-check", criterion_11);
    report(10, "trace checks", criterion_10);
    std::printf("%d of 11 criteria failed\n", failed);
    return failed == 0 ? 0 : 1;
}
