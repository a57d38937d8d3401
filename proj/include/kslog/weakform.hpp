/**
 * @file weakform.hpp
 * @brief Variational checks of simulated trajectories against finite families
 *        of nonnegative test functions psi(t) phi(x).
 *
 * Time integrals use the trapezoid rule on the snapshot times, so snapshots
 * should be dense (every step) for the equality checks to be sharp. Spatial
 * integrals of gradient terms are face sums with analytic test-function
 * gradients at face centers.
 */
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <string>
#include <vector>

#include "kslog/diagnostics.hpp"
#include "kslog/errors.hpp"
#include "kslog/grid.hpp"
#include "kslog/params.hpp"
#include "kslog/solver.hpp"
#include "kslog/test_functions.hpp"

namespace kslog {

struct TestFunctionPair {
    SpatialProfile phi;
    TemporalProfile psi;
    std::string phi_id;
    std::string psi_id;
};

struct WeakFormConfig {
    double trace_exponent = 1.5;  ///< p in (1, n/(n-1)); documentation of the trace space only
    int spatial_modes = 6;
    int temporal_bumps = 5;  ///< includes the one profile with psi(0) = 1
    double tolerance = 1e-2;

    /// Throws DomainError unless p lies in (1, n/(n-1)) for the grid dimension n and sizes are positive.
    void validate(int n) const {
        const double upper = n <= 1 ? std::numeric_limits<double>::infinity() : double(n) / double(n - 1);
        if (!(trace_exponent > 1.0 && trace_exponent < upper))
            throw DomainError("weakform: trace exponent must lie in (1, n/(n-1))");
        if (spatial_modes < 1 || temporal_bumps < 1) throw DomainError("weakform: basis sizes must be positive");
        if (!(tolerance > 0.0)) throw DomainError("weakform: tolerance must be positive");
    }
};

/**
 * @brief Spatial cosine modes (ordered by total degree) times temporal profiles:
 * one initial profile centered at 0 and temporal_bumps-1 interior bumps, all
 * of half-width horizon/temporal_bumps.
 */
[[nodiscard]] inline std::vector<TestFunctionPair> build_bases(const Grid& grid, double horizon,
                                                               const WeakFormConfig& cfg) {
    cfg.validate(grid.dims());
    if (!(horizon > 0.0) || !std::isfinite(horizon)) throw DomainError("build_bases: degenerate horizon");
    std::vector<SpatialProfile> phis;
    if (grid.dims() == 1) {
        for (int m = 0; m < cfg.spatial_modes; ++m) phis.push_back({{m, 0}});
    } else {
        for (int total = 0; static_cast<int>(phis.size()) < cfg.spatial_modes; ++total)
            for (int mx = total; mx >= 0 && static_cast<int>(phis.size()) < cfg.spatial_modes; --mx)
                phis.push_back({{mx, total - mx}});
    }
    const double width = horizon / cfg.temporal_bumps;
    std::vector<TemporalProfile> psis;
    psis.push_back({TemporalProfile::Shape::bump, 0.0, width, 1.0});
    for (int j = 1; j < cfg.temporal_bumps; ++j)
        psis.push_back({TemporalProfile::Shape::bump, horizon * j / cfg.temporal_bumps, width, 1.0});
    std::vector<TestFunctionPair> out;
    for (std::size_t a = 0; a < phis.size(); ++a)
        for (std::size_t b = 0; b < psis.size(); ++b) {
            psis[b].validate(horizon);
            out.push_back({phis[a], psis[b], phis[a].id(grid), "t" + std::to_string(b)});
        }
    return out;
}

namespace detail {

inline std::vector<double> snapshot_times(const Trajectory& traj) {
    std::vector<double> t;
    t.reserve(traj.snapshots.size());
    for (const auto& s : traj.snapshots) t.push_back(s.t);
    return t;
}

/// Face sum of A . B over matching face fields, times cell volume.
inline double face_dot(const FaceField& A, const FaceField& B) {
    double s = 0.0;
    for (std::size_t f = 0; f < A.x.size(); ++f) s += A.x[f] * B.x[f];
    for (std::size_t f = 0; f < A.y.size(); ++f) s += A.y[f] * B.y[f];
    return s * A.grid.cell_volume();
}

inline double cell_dot(const Field& a, const Field& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.values.size(); ++i) s += a.values[i] * b.values[i];
    return s * a.grid.cell_volume();
}

/// Values of phi at face centers (boundary faces included).
inline FaceField face_values(const SpatialProfile& phi, const Grid& g) {
    FaceField out(g);
    for (int j = 0; j < g.ny(); ++j)
        for (int i = 0; i <= g.nx(); ++i) {
            const auto c = xface_center(g, i, j);
            out.x[g.xface(i, j)] = phi.value(g, c[0], c[1]);
        }
    if (g.dims() == 2) {
        for (int j = 0; j <= g.ny(); ++j)
            for (int i = 0; i < g.nx(); ++i) {
                const auto c = yface_center(g, i, j);
                out.y[g.yface(i, j)] = phi.value(g, c[0], c[1]);
            }
    }
    return out;
}

inline void require_trajectory(const Trajectory& traj) {
    if (traj.snapshots.size() < 2) throw DomainError("weakform: trajectory needs at least two snapshots");
}

}  // namespace detail

/// Which reaction term the u-functional uses.
enum class ReactionForm {
    saturated,  ///< b (F - u^{1-a} v^{-b-1} / (1+u/k)): equality for the regularized system
    limit,      ///< b (F - u^{1-a} v^{-b-1}): the inequality for generalised supersolutions
};

struct SuperUResult {
    double lhs = 0.0;  ///< -int psi' int F phi - psi(0) int F0 phi
    double rhs = 0.0;  ///< Q block + flux block + reaction block
    double time_block = 0.0;
    double initial_block = 0.0;
    double q_block = 0.0;
    double flux_block = 0.0;
    double reaction_block = 0.0;
    double scale = 0.0;  ///< quadrature of the absolute values of every integrand
};

/**
 * @brief Both sides of the variational relation for u^{-a} v^{-b}:
 *
 *   -int psi' int F phi - psi(0) int F0 phi
 *     (<= or =) -int psi int Q(grad w, w/v grad v) phi
 *               -int psi int (grad F + chi a F/v grad v) . grad phi
 *               +int psi int b (F - reaction) phi
 */
[[nodiscard]] inline SuperUResult assemble_superu(const Trajectory& traj, const TestFunctionPair& tf,
                                                  const ModelParams& p,
                                                  ReactionForm form = ReactionForm::saturated) {
    detail::require_trajectory(traj);
    tf.psi.validate(traj.horizon());
    SuperUResult r;
    if (tf.psi.amplitude == 0.0) return r;
    const Grid& g = traj.initial().u.grid;
    const Field phi = tf.phi.cell_values(g);
    const FaceField dphi = tf.phi.face_gradients(g);
    const FaceField phi_f = detail::face_values(tf.phi, g);
    const auto times = detail::snapshot_times(traj);
    const auto w = trapezoid_weights(times);

    for (std::size_t j = 0; j < traj.snapshots.size(); ++j) {
        const double pv = tf.psi.value(times[j]);
        const double pd = tf.psi.derivative(times[j]);
        if (pv == 0.0 && pd == 0.0 && j != 0) continue;
        const State& s = traj.snapshots[j];
        const CompositeFields c = composite_fields(s, p);
        const double F_phi = detail::cell_dot(c.F, phi);
        if (j == 0) {
            r.initial_block = -tf.psi.value(0.0) * F_phi;
            r.scale += std::abs(r.initial_block);
        }
        r.time_block += -w[j] * pd * F_phi;
        r.scale += w[j] * std::abs(pd) * F_phi;
        if (pv == 0.0) continue;

        const FaceField dw = gradient_faces(c.w);
        const FaceField dv = gradient_faces(s.v);
        const FaceField wv = face_average(c.w_over_v);
        double q = 0.0;
        for (std::size_t f = 0; f < dw.x.size(); ++f) q += q_eval(p, dw.x[f], wv.x[f] * dv.x[f]) * phi_f.x[f];
        for (std::size_t f = 0; f < dw.y.size(); ++f) q += q_eval(p, dw.y[f], wv.y[f] * dv.y[f]) * phi_f.y[f];
        q *= g.cell_volume();

        const FaceField G = detail::energy_flux(s, c, p);
        const double flux = detail::face_dot(G, dphi);
        double flux_abs = 0.0;
        for (std::size_t f = 0; f < G.x.size(); ++f) flux_abs += std::abs(G.x[f] * dphi.x[f]);
        for (std::size_t f = 0; f < G.y.size(); ++f) flux_abs += std::abs(G.y[f] * dphi.y[f]);
        flux_abs *= g.cell_volume();

        double react = 0.0, react_abs = 0.0;
        for (std::size_t i = 0; i < g.size(); ++i) {
            const double loss = form == ReactionForm::saturated
                                    ? c.react.values[i]
                                    : c.F.values[i] * s.u.values[i] / s.v.values[i];
            react += p.b * (c.F.values[i] - loss) * phi.values[i];
            react_abs += p.b * (c.F.values[i] + loss) * phi.values[i];
        }
        react *= g.cell_volume();
        react_abs *= g.cell_volume();

        r.q_block += -w[j] * pv * q;
        r.flux_block += -w[j] * pv * flux;
        r.reaction_block += w[j] * pv * react;
        r.scale += w[j] * pv * (q + flux_abs + react_abs);
    }
    r.lhs = r.time_block + r.initial_block;
    r.rhs = r.q_block + r.flux_block + r.reaction_block;
    return r;
}

struct SuperVResult {
    double residual = 0.0;        ///< measure-proxy pairing recovered from the v-equation budget
    double defect_pairing = 0.0;  ///< int psi int u^2/(k+u) phi
    double scale = 0.0;           ///< quadrature of the absolute values of every integrand
};

/**
 * @brief Pairing of the defect measure proxy with psi phi, recovered from v alone:
 *
 *   residual = int psi int (-grad v . grad phi + (u - v) phi) + int psi' int v phi + psi(0) int v0 phi
 *
 * i.e. the part of the source u that the v-equation did not absorb. For the
 * regularized system this equals int psi int u^2/(k+u) phi up to discretization.
 */
[[nodiscard]] inline SuperVResult assemble_superv(const Trajectory& traj, const TestFunctionPair& tf,
                                                  const ModelParams& p) {
    detail::require_trajectory(traj);
    tf.psi.validate(traj.horizon());
    SuperVResult r;
    if (tf.psi.amplitude == 0.0) return r;
    const Grid& g = traj.initial().u.grid;
    const Field phi = tf.phi.cell_values(g);
    const FaceField dphi = tf.phi.face_gradients(g);
    const auto times = detail::snapshot_times(traj);
    const auto w = trapezoid_weights(times);
    double time_block = 0.0, init_block = 0.0, grad_block = 0.0, source_block = 0.0, defect_sum = 0.0;
    for (std::size_t j = 0; j < traj.snapshots.size(); ++j) {
        const State& s = traj.snapshots[j];
        const double pv = tf.psi.value(times[j]);
        const double pd = tf.psi.derivative(times[j]);
        const double v_phi = detail::cell_dot(s.v, phi);
        if (j == 0) {
            init_block = tf.psi.value(0.0) * v_phi;
            r.scale += init_block;
        }
        time_block += w[j] * pd * v_phi;
        r.scale += w[j] * std::abs(pd) * v_phi;
        if (pv == 0.0) continue;
        const FaceField dv = gradient_faces(s.v);
        double grad_abs = 0.0;
        for (std::size_t f = 0; f < dv.x.size(); ++f) grad_abs += std::abs(dv.x[f] * dphi.x[f]);
        for (std::size_t f = 0; f < dv.y.size(); ++f) grad_abs += std::abs(dv.y[f] * dphi.y[f]);
        grad_block += -w[j] * pv * detail::face_dot(dv, dphi);
        double src = 0.0, src_abs = 0.0, dft = 0.0;
        for (std::size_t i = 0; i < g.size(); ++i) {
            const double u = s.u.values[i];
            src += (u - s.v.values[i]) * phi.values[i];
            src_abs += (u + s.v.values[i]) * phi.values[i];
            dft += u * u / (p.k + u) * phi.values[i];
        }
        source_block += w[j] * pv * src * g.cell_volume();
        defect_sum += w[j] * pv * dft * g.cell_volume();
        r.scale += w[j] * pv * (grad_abs + src_abs) * g.cell_volume();
    }
    r.residual = grad_block + source_block + time_block + init_block;
    r.defect_pairing = defect_sum;
    return r;
}

/**
 * @brief Discrete Gauss-Green boundary pairing
 *   <F.nu, phi> = sum_faces F . D phi + sum_cells (div F) phi
 * with D phi the face differences of the cell values of phi (zero on boundary
 * faces) and div F using the boundary fluxes of F as given. The result equals
 * the boundary flux of F weighted by the adjacent cell values of phi.
 */
struct BoundaryPairing {
    double pairing = 0.0;
    double scale = 0.0;  ///< sum of the absolute values of the two volume terms
};

[[nodiscard]] inline BoundaryPairing boundary_pairing(const FaceField& F, const Field& phi) {
    F.check_shape();
    const FaceField dphi = gradient_faces(phi);
    const Field divF = divergence(F);
    const double a = detail::face_dot(F, dphi);
    const double b = detail::cell_dot(divF, phi);
    double abs_a = 0.0, abs_b = 0.0;
    for (std::size_t f = 0; f < F.x.size(); ++f) abs_a += std::abs(F.x[f] * dphi.x[f]);
    for (std::size_t f = 0; f < F.y.size(); ++f) abs_a += std::abs(F.y[f] * dphi.y[f]);
    for (std::size_t i = 0; i < phi.values.size(); ++i) abs_b += std::abs(divF.values[i] * phi.values[i]);
    return {a + b, (abs_a + abs_b) * phi.grid.cell_volume()};
}

enum class TraceField {
    flux_pr,  ///< grad(u^{-a} v^{-b}) + chi a u^{-a} v^{-b-1} grad v
    grad_v,   ///< grad v
};

struct TraceReport {
    double max_pairing = 0.0;  ///< max |boundary pairing| over the phi basis
    double scale = 0.0;        ///< largest pairing scale over the basis
};

/// psi-weighted time integral of the selected face field.
[[nodiscard]] inline FaceField time_integrated_field(const Trajectory& traj, const TemporalProfile& psi,
                                                     const ModelParams& p, TraceField which) {
    detail::require_trajectory(traj);
    psi.validate(traj.horizon());
    const Grid& g = traj.initial().u.grid;
    FaceField acc(g);
    const auto times = detail::snapshot_times(traj);
    const auto w = trapezoid_weights(times);
    for (std::size_t j = 0; j < traj.snapshots.size(); ++j) {
        const double c = w[j] * psi.value(times[j]);
        if (c == 0.0) continue;
        const State& s = traj.snapshots[j];
        const FaceField G =
            which == TraceField::grad_v ? gradient_faces(s.v) : detail::energy_flux(s, composite_fields(s, p), p);
        for (std::size_t f = 0; f < acc.x.size(); ++f) acc.x[f] += c * G.x[f];
        for (std::size_t f = 0; f < acc.y.size(); ++f) acc.y[f] += c * G.y[f];
    }
    return acc;
}

[[nodiscard]] inline TraceReport trace_check(const Trajectory& traj, const TemporalProfile& psi, TraceField which,
                                             const std::vector<SpatialProfile>& phis, const ModelParams& p) {
    TraceReport rep;
    const FaceField F = time_integrated_field(traj, psi, p, which);
    const Grid& g = F.grid;
    for (const auto& phi : phis) {
        const BoundaryPairing bp = boundary_pairing(F, phi.cell_values(g));
        rep.max_pairing = std::max(rep.max_pairing, std::abs(bp.pairing));
        rep.scale = std::max(rep.scale, bp.scale);
    }
    return rep;
}

/// One row of the verification report.
struct VerificationRow {
    std::string check;
    std::string phi_id;
    std::string psi_id;
    double lhs = 0.0;
    double rhs = 0.0;
    double slack = 0.0;
    bool pass = false;
};

inline constexpr const char* kVerificationHeader = "check,phi_id,psi_id,lhs,rhs,slack,pass";

inline void write_verification_csv(std::ostream& os, const std::vector<VerificationRow>& rows) {
    os << kVerificationHeader << '\n';
    char buf[64];
    auto num = [&](double x) {
        std::snprintf(buf, sizeof buf, "%.17g", x);
        return std::string(buf);
    };
    for (const auto& r : rows)
        os << r.check << ',' << r.phi_id << ',' << r.psi_id << ',' << num(r.lhs) << ',' << num(r.rhs) << ','
           << num(r.slack) << ',' << (r.pass ? "true" : "false") << '\n';
}

/**
 * @brief Runs every check over the basis and returns report rows.
 *
 * Row semantics (slack is always relative to the check's scale):
 *   superu        lhs/rhs of the saturated identity, pass iff lhs <= rhs + tol*scale
 *   superv        lhs = measure-proxy residual, rhs = defect pairing, pass iff |lhs-rhs| <= tol*scale
 *                 and lhs >= -tol*scale
 *   mass_control  per psi, pass iff |lhs-rhs| <= 1e-6*scale
 *   trace_flux_pr / trace_grad_v  per psi, lhs = max |pairing|, pass iff <= 1e-10*scale
 *   gronwall      lhs = max relative excess, rhs = tol, pass iff lhs <= tol
 */
[[nodiscard]] inline std::vector<VerificationRow> verify_trajectory(const Trajectory& traj,
                                                                  const std::vector<DiagnosticsRecord>& records,
                                                                  const ModelParams& p, const WeakFormConfig& cfg) {
    std::vector<VerificationRow> rows;
    const Grid& g = traj.initial().u.grid;
    const double horizon = traj.horizon();
    const GronwallReport gr = gronwall_check(records, p, cfg.tolerance);
    const VerificationRow gronwall_row{"gronwall", "1", "-", gr.max_slack, cfg.tolerance, gr.max_slack, gr.passed};
    if (!(horizon > 0.0) || traj.snapshots.size() < 2) {
        rows.push_back(gronwall_row);
        return rows;
    }
    const auto basis = build_bases(g, horizon, cfg);
    for (const auto& tf : basis) {
        const SuperUResult su = assemble_superu(traj, tf, p);
        const double su_slack = su.scale > 0.0 ? (su.lhs - su.rhs) / su.scale : 0.0;
        rows.push_back({"superu", tf.phi_id, tf.psi_id, su.lhs, su.rhs, su_slack, su_slack <= cfg.tolerance});
    }
    for (const auto& tf : basis) {
        const SuperVResult sv = assemble_superv(traj, tf, p);
        const double sv_slack = sv.scale > 0.0 ? (sv.residual - sv.defect_pairing) / sv.scale : 0.0;
        const bool nonneg = sv.residual >= -cfg.tolerance * sv.scale;
        rows.push_back({"superv", tf.phi_id, tf.psi_id, sv.residual, sv.defect_pairing, sv_slack,
                        std::abs(sv_slack) <= cfg.tolerance && nonneg});
    }
    std::vector<SpatialProfile> phis;
    std::vector<TemporalProfile> psis;
    std::vector<std::string> psi_ids;
    for (const auto& tf : basis) {
        if (std::none_of(phis.begin(), phis.end(), [&](const SpatialProfile& q) { return q.modes == tf.phi.modes; }))
            phis.push_back(tf.phi);
        if (std::find(psi_ids.begin(), psi_ids.end(), tf.psi_id) == psi_ids.end()) {
            psis.push_back(tf.psi);
            psi_ids.push_back(tf.psi_id);
        }
    }
    for (std::size_t b = 0; b < psis.size(); ++b) {
        const MassControlReport mc = mass_control_check(records, psis[b], p);
        const double slack = mc.scale > 0.0 ? mc.slack / mc.scale : 0.0;
        rows.push_back({"mass_control", "1", psi_ids[b], mc.lhs, mc.rhs, slack, std::abs(slack) <= 1e-6});
    }
    for (std::size_t b = 0; b < psis.size(); ++b) {
        for (auto which : {TraceField::flux_pr, TraceField::grad_v}) {
            const TraceReport tr = trace_check(traj, psis[b], which, phis, p);
            const double slack = tr.scale > 0.0 ? tr.max_pairing / tr.scale : 0.0;
            rows.push_back({which == TraceField::flux_pr ? "trace_flux_pr" : "trace_grad_v", "all", psi_ids[b],
                            tr.max_pairing, 0.0, slack, slack <= 1e-10});
        }
    }
    rows.push_back(gronwall_row);
    return rows;
}

}  // namespace kslog
