/**
 * @file diagnostics.hpp
 * @brief Functionals controlled by the energy estimate for u^{-a} v^{-b}, and the
 *        saturation defect u^2/(k+u) that stands in for the defect measure.
 *
 * Gradients of composite quantities are face differences of the composite
 * cell values; face quadrature gives each interior face one cell volume.
 */
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "kslog/errors.hpp"
#include "kslog/grid.hpp"
#include "kslog/params.hpp"
#include "kslog/solver.hpp"
#include "kslog/test_functions.hpp"

namespace kslog {

/**
 * One diagnostics row. The diss_* entries are time integrals accumulated
 * (left-endpoint rule, every step) since the previous record.
 */
struct DiagnosticsRecord {
    double t = 0.0;
    double mass_u = 0.0;
    double mass_v = 0.0;
    double min_u = 0.0;
    double min_v = 0.0;
    double max_u = 0.0;
    double max_v = 0.0;
    double energy = 0.0;          ///< integral of u^{-a} v^{-b}
    double diss_grad = 0.0;       ///< increment of || grad(u^{-a/2} v^{-b/2}) ||^2
    double diss_cross = 0.0;      ///< increment of || u^{-a/2} v^{-b/2-1} grad v ||^2
    double diss_react = 0.0;      ///< increment of integral u^{1-a} v^{-b-1} / (1+u/k)
    double defect = 0.0;          ///< integral of u^2/(k+u)
    double gronwall_bound = 0.0;  ///< e^{bt} energy(0)
    double mass_sat = 0.0;        ///< integral of u/(1+u/k); not part of the CSV
};

inline constexpr const char* kDiagnosticsHeader =
    "t,mass_u,mass_v,min_u,min_v,max_u,max_v,energy,diss_grad,diss_cross,diss_react,defect,gronwall_bound";

/// Composite cell quantities of one state.
struct CompositeFields {
    Field F;       ///< u^{-a} v^{-b}
    Field w;       ///< u^{-a/2} v^{-b/2}
    Field w_over_v;  ///< u^{-a/2} v^{-b/2-1}
    Field react;   ///< u^{1-a} v^{-b-1} / (1+u/k)
};

[[nodiscard]] inline CompositeFields composite_fields(const State& s, const ModelParams& p) {
    const Grid& g = s.u.grid;
    CompositeFields c{Field(g), Field(g), Field(g), Field(g)};
    for (std::size_t i = 0; i < g.size(); ++i) {
        const double u = s.u.values[i];
        const double v = s.v.values[i];
        if (!(u > 0.0) || !(v > 0.0)) throw PositivityError("diagnostics: non-positive cell value", s.t);
        const double log_w = -0.5 * (p.a * std::log(u) + p.b * std::log(v));
        const double w = std::exp(log_w);
        const double F = w * w;
        c.F.values[i] = F;
        c.w.values[i] = w;
        c.w_over_v.values[i] = w / v;
        c.react.values[i] = F * (u / v) / (1.0 + u / p.k);
    }
    return c;
}

/// Integral of u^{-a} v^{-b}.
[[nodiscard]] inline double energy(const State& s, const ModelParams& p) {
    return integrate(composite_fields(s, p).F);
}

struct Dissipation {
    double grad = 0.0;   ///< || grad(u^{-a/2} v^{-b/2}) ||^2
    double cross = 0.0;  ///< || u^{-a/2} v^{-b/2-1} grad v ||^2
    double react = 0.0;  ///< integral of u^{1-a} v^{-b-1} / (1+u/k)
};

namespace detail {

inline Dissipation dissipation_from(const State& s, const CompositeFields& c) {
    // Same face order and arithmetic as gradient_faces/face_average; boundary faces contribute zero.
    const Grid& g = s.u.grid;
    double grad = 0.0, cross = 0.0;
    auto add = [&](std::size_t lo, std::size_t hi, double inv_h) {
        const double dw = (c.w.values[hi] - c.w.values[lo]) * inv_h;
        const double dv = (s.v.values[hi] - s.v.values[lo]) * inv_h;
        const double q = 0.5 * (c.w_over_v.values[hi] + c.w_over_v.values[lo]) * dv;
        grad += dw * dw;
        cross += q * q;
    };
    const double inv_hx = 1.0 / g.h(0);
    for (int j = 0; j < g.ny(); ++j)
        for (int i = 1; i < g.nx(); ++i) add(g.index(i - 1, j), g.index(i, j), inv_hx);
    if (g.dims() == 2) {
        const double inv_hy = 1.0 / g.h(1);
        for (int j = 1; j < g.ny(); ++j)
            for (int i = 0; i < g.nx(); ++i) add(g.index(i, j - 1), g.index(i, j), inv_hy);
    }
    return {grad * g.cell_volume(), cross * g.cell_volume(), integrate(c.react)};
}

}  // namespace detail

/// Instantaneous integrands of the three dissipation channels.
[[nodiscard]] inline Dissipation dissipation_terms(const State& s, const ModelParams& p) {
    return detail::dissipation_from(s, composite_fields(s, p));
}

/// Integral of the saturation gap u - u/(1+u/k) = u^2/(k+u).
[[nodiscard]] inline double defect(const State& s, const ModelParams& p) {
    Field d(s.u.grid);
    for (std::size_t i = 0; i < d.values.size(); ++i) {
        const double u = s.u.values[i];
        d.values[i] = u * u / (p.k + u);
    }
    return integrate(d);
}

[[nodiscard]] inline double saturated_mass(const State& s, const ModelParams& p) {
    Field d(s.u.grid);
    for (std::size_t i = 0; i < d.values.size(); ++i) d.values[i] = sat(s.u.values[i], p.k);
    return integrate(d);
}

/**
 * @brief Accumulates dissipation every step and emits records on demand.
 *
 * Wire on_step/on_record into RunHooks.
 */
class DiagnosticsRecorder {
public:
    explicit DiagnosticsRecorder(const ModelParams& p, bool accumulate = true) : p_(p), accumulate_(accumulate) {}

    void on_step(const State& s, double dt) {
        if (!accumulate_) return;
        // run() hands on_step the state it just recorded; reuse its composite fields
        const bool cached = cache_valid_ && cache_t_ == s.t && cache_data_ == s.u.values.data();
        const Dissipation d = cached ? detail::dissipation_from(s, cache_) : dissipation_terms(s, p_);
        cache_valid_ = false;
        acc_.grad += dt * d.grad;
        acc_.cross += dt * d.cross;
        acc_.react += dt * d.react;
    }

    void on_record(const State& s) {
        DiagnosticsRecord r;
        cache_ = composite_fields(s, p_);
        cache_valid_ = true;
        cache_t_ = s.t;
        cache_data_ = s.u.values.data();
        const CompositeFields& c = cache_;
        r.t = s.t;
        r.mass_u = integrate(s.u);
        r.mass_v = integrate(s.v);
        r.min_u = s.u.min();
        r.min_v = s.v.min();
        r.max_u = s.u.max();
        r.max_v = s.v.max();
        r.energy = integrate(c.F);
        r.diss_grad = acc_.grad;
        r.diss_cross = acc_.cross;
        r.diss_react = acc_.react;
        r.defect = defect(s, p_);
        r.mass_sat = saturated_mass(s, p_);
        if (records_.empty()) energy0_ = r.energy;
        r.gronwall_bound = std::exp(p_.b * s.t) * energy0_;
        records_.push_back(r);
        acc_ = {};
    }

    [[nodiscard]] RunHooks hooks() {
        return {[this](const State& s, double dt) { on_step(s, dt); }, [this](const State& s) { on_record(s); }};
    }

    [[nodiscard]] const std::vector<DiagnosticsRecord>& records() const { return records_; }
    [[nodiscard]] std::vector<DiagnosticsRecord> take_records() { return std::move(records_); }

private:
    ModelParams p_;
    bool accumulate_;
    Dissipation acc_;
    CompositeFields cache_;
    bool cache_valid_ = false;
    double cache_t_ = 0.0;
    const double* cache_data_ = nullptr;
    double energy0_ = 0.0;
    std::vector<DiagnosticsRecord> records_;
};

struct SimulationResult {
    Trajectory trajectory;
    std::vector<DiagnosticsRecord> records;
};

/// run() with a DiagnosticsRecorder attached.
inline SimulationResult simulate(const Field& u0, const Field& v0, const ModelParams& p, const SolverConfig& cfg,
                                 const RunOptions& opts = {}) {
    DiagnosticsRecorder rec(p);
    Trajectory traj = run(u0, v0, p, cfg, opts, rec.hooks());
    return {std::move(traj), rec.take_records()};
}

struct GronwallReport {
    double max_slack = -std::numeric_limits<double>::infinity();  ///< max_j (lhs_j - rhs_j) / rhs_j
    double worst_time = 0.0;
    double coercivity = 0.0;
    bool passed = false;
};

/**
 * @brief Checks E(t) + C_low * int (grad + cross) + b * int react <= e^{bt} E(0) (1 + tol)
 * at every record, with C_low the coercivity constant. The reported slack is the
 * maximum over records after the first, where the two sides coincide by construction.
 * @throws std::invalid_argument for an empty record list
 */
[[nodiscard]] inline GronwallReport gronwall_check(const std::vector<DiagnosticsRecord>& records,
                                                   const ModelParams& p, double tol = 1e-2) {
    if (records.empty()) throw std::invalid_argument("gronwall_check: empty record list");
    GronwallReport rep;
    rep.coercivity = coercivity_constant(p);
    const double e0 = records.front().energy;
    double cum_qd = 0.0, cum_react = 0.0;
    for (std::size_t j = 0; j < records.size(); ++j) {
        const auto& r = records[j];
        cum_qd += r.diss_grad + r.diss_cross;
        cum_react += r.diss_react;
        const double lhs = r.energy + rep.coercivity * cum_qd + p.b * cum_react;
        const double rhs = std::exp(p.b * r.t) * e0;
        const double slack = (lhs - rhs) / rhs;
        if (j == 0 && records.size() > 1) continue;  // equality at t = 0
        if (slack > rep.max_slack) {
            rep.max_slack = slack;
            rep.worst_time = r.t;
        }
    }
    rep.passed = rep.max_slack <= tol;
    return rep;
}

/// Composite trapezoid weights on an increasing time line.
[[nodiscard]] inline std::vector<double> trapezoid_weights(const std::vector<double>& t) {
    std::vector<double> w(t.size(), 0.0);
    for (std::size_t j = 0; j + 1 < t.size(); ++j) {
        const double half = 0.5 * (t[j + 1] - t[j]);
        w[j] += half;
        w[j + 1] += half;
    }
    return w;
}

struct MassControlReport {
    double lhs = 0.0;           ///< int psi (||sat(u)||_1 + defect) dt
    double rhs = 0.0;           ///< ||u_k0||_1 ||psi||_1
    double slack = 0.0;         ///< lhs - rhs
    double psi_l1 = 0.0;        ///< ||psi||_1 by the same quadrature as lhs
    double psi_l1_exact = 0.0;  ///< analytic ||psi||_1
    double scale = 0.0;
};

/**
 * @brief Mass control with the saturation defect as measure proxy.
 *
 * Both time integrals use the trapezoid rule on the record times, so the two
 * sides agree to the accuracy of the discrete mass balance.
 */
[[nodiscard]] inline MassControlReport mass_control_check(const std::vector<DiagnosticsRecord>& records,
                                                          const TemporalProfile& psi, const ModelParams& p) {
    (void)p;
    if (records.empty()) throw std::invalid_argument("mass_control_check: empty record list");
    psi.validate(records.back().t);
    std::vector<double> times;
    times.reserve(records.size());
    for (const auto& r : records) times.push_back(r.t);
    const auto w = trapezoid_weights(times);
    MassControlReport rep;
    for (std::size_t j = 0; j < records.size(); ++j) {
        const double pv = psi.value(records[j].t);
        rep.lhs += w[j] * pv * (records[j].mass_sat + records[j].defect);
        rep.psi_l1 += w[j] * pv;
    }
    rep.psi_l1_exact = psi.l1_norm();
    rep.rhs = records.front().mass_u * rep.psi_l1;
    rep.slack = rep.lhs - rep.rhs;
    rep.scale = std::max(std::abs(rep.lhs), std::abs(rep.rhs));
    return rep;
}

/// Integral of the defect over the records' time line (trapezoid rule).
[[nodiscard]] inline double defect_time_integral(const std::vector<DiagnosticsRecord>& records) {
    std::vector<double> times;
    for (const auto& r : records) times.push_back(r.t);
    const auto w = trapezoid_weights(times);
    double s = 0.0;
    for (std::size_t j = 0; j < records.size(); ++j) s += w[j] * records[j].defect;
    return s;
}

/**
 * @brief Worst relative slack of the v-mass envelope
 *   int v(t) <= (1 - e^{-t}) int u(0) + e^{-t} int v(0)
 * over all records; negative means violated. Relative to int u(0) + int v(0).
 */
[[nodiscard]] inline double v_mass_envelope_slack(const std::vector<DiagnosticsRecord>& records) {
    if (records.empty()) throw std::invalid_argument("v_mass_envelope_slack: no records");
    const double mu = records.front().mass_u, mv = records.front().mass_v;
    const double scale = std::abs(mu) + std::abs(mv);
    double worst = std::numeric_limits<double>::infinity();
    for (const auto& r : records) {
        const double e = std::exp(-(r.t - records.front().t));
        worst = std::min(worst, ((1.0 - e) * mu + e * mv - r.mass_v) / scale);
    }
    return worst;
}

/// Worst slack of min v(t) >= e^{-t} min v(0) over all records; negative means violated.
[[nodiscard]] inline double min_principle_slack(const std::vector<DiagnosticsRecord>& records) {
    if (records.empty()) throw std::invalid_argument("min_principle_slack: no records");
    double worst = std::numeric_limits<double>::infinity();
    for (const auto& r : records)
        worst = std::min(worst, r.min_v - std::exp(-(r.t - records.front().t)) * records.front().min_v);
    return worst;
}

namespace detail {

/// Cell-centered gradient component along `axis` from the two adjacent face differences.
inline Field cell_gradient(const Field& f, int axis) {
    const Grid& g = f.grid;
    const FaceField d = gradient_faces(f);
    Field out(g);
    for (int j = 0; j < g.ny(); ++j)
        for (int i = 0; i < g.nx(); ++i) {
            out(i, j) = axis == 0 ? 0.5 * (d.x[g.xface(i, j)] + d.x[g.xface(i + 1, j)])
                                  : 0.5 * (d.y[g.yface(i, j)] + d.y[g.yface(i, j + 1)]);
        }
    return out;
}

/// grad F + chi a u^{-a} v^{-b-1} grad v on faces (zero on boundary faces).
inline FaceField energy_flux(const State& s, const CompositeFields& c, const ModelParams& p) {
    Field F_over_v(s.u.grid);
    for (std::size_t i = 0; i < F_over_v.values.size(); ++i) F_over_v.values[i] = c.F.values[i] / s.v.values[i];
    FaceField G = gradient_faces(c.F);
    const FaceField dv = gradient_faces(s.v);
    const FaceField avg = face_average(F_over_v);
    const double coef = p.chi * p.a;
    for (std::size_t f = 0; f < G.x.size(); ++f) G.x[f] += coef * avg.x[f] * dv.x[f];
    for (std::size_t f = 0; f < G.y.size(); ++f) G.y[f] += coef * avg.y[f] * dv.y[f];
    return G;
}

}  // namespace detail

/**
 * @brief Cellwise residual of the pointwise identity for d/dt (u^{-a} v^{-b}) between two states.
 *
 * residual = (F(after) - F(before)) / dt
 *            - [ -Q(grad w, w/v grad v) + div(grad F + chi a F/v grad v) + b F - b react ]
 * with every spatial term evaluated at `before`.
 */
[[nodiscard]] inline Field key_identity_residual(const State& before, const State& after, const ModelParams& p) {
    const double dt = after.t - before.t;
    if (!(dt > 0.0)) throw DomainError("key_identity_residual: states must be time-ordered");
    const Grid& g = before.u.grid;
    const CompositeFields c0 = composite_fields(before, p);
    const CompositeFields c1 = composite_fields(after, p);
    const Field div_G = div_flux_neumann(detail::energy_flux(before, c0, p));
    Field res(g);
    std::vector<Field> Ug, Vg;
    for (int d = 0; d < g.dims(); ++d) {
        Ug.push_back(detail::cell_gradient(c0.w, d));
        Vg.push_back(detail::cell_gradient(before.v, d));
    }
    for (std::size_t i = 0; i < g.size(); ++i) {
        double q = 0.0;
        for (int d = 0; d < g.dims(); ++d) q += q_eval(p, Ug[d].values[i], c0.w_over_v.values[i] * Vg[d].values[i]);
        const double rhs = -q + div_G.values[i] + p.b * c0.F.values[i] - p.b * c0.react.values[i];
        res.values[i] = (c1.F.values[i] - c0.F.values[i]) / dt - rhs;
    }
    return res;
}

[[nodiscard]] inline double l1_norm(const Field& f) {
    Field a = f;
    for (double& x : a.values) x = std::abs(x);
    return integrate(a);
}

inline void write_diagnostics_csv(std::ostream& os, const std::vector<DiagnosticsRecord>& records) {
    os << kDiagnosticsHeader << '\n';
    char buf[64];
    auto put = [&](double x, bool last) {
        std::snprintf(buf, sizeof buf, "%.17g", x);
        os << buf << (last ? '\n' : ',');
    };
    for (const auto& r : records) {
        put(r.t, false);
        put(r.mass_u, false);
        put(r.mass_v, false);
        put(r.min_u, false);
        put(r.min_v, false);
        put(r.max_u, false);
        put(r.max_v, false);
        put(r.energy, false);
        put(r.diss_grad, false);
        put(r.diss_cross, false);
        put(r.diss_react, false);
        put(r.defect, false);
        put(r.gronwall_bound, true);
    }
}

}  // namespace kslog
