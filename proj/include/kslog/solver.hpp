/**
 * @file solver.hpp
 * @brief Time integration of the saturated logarithmic-sensitivity Keller-Segel system
 *
 *   u_t = div(grad u - chi (u/v) grad v)
 *   v_t = lap v - v + u / (1 + u/k)
 *
 * with zero-flux boundaries, on cell-centered grids.
 *
 * Two schemes are provided. `explicit_euler` advances everything with forward
 * Euler. `imex` treats the diffusion of both equations (and the -v decay)
 * with backward Euler, solved by conjugate gradients, and the advection and
 * the saturated source explicitly. In both schemes positivity comes from the
 * time-step rule; a step that would lose positivity aborts instead of clipping.
 */
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "kslog/errors.hpp"
#include "kslog/grid.hpp"
#include "kslog/params.hpp"

namespace kslog {

struct State {
    double t = 0.0;
    Field u;  ///< cell density, strictly positive
    Field v;  ///< signal concentration, strictly positive
};

enum class Scheme { explicit_euler, imex };

/// How u/v is evaluated at a face in the advective flux.
enum class FluxRule {
    upwind,   ///< value of the upwind cell with respect to the sign of chi * dv
    central,  ///< arithmetic mean of both cells; for convergence studies only
};

struct SolverConfig {
    double dt_max = 1e-3;
    double cfl_safety = 0.9;
    double t_end = 1.0;
    Scheme scheme = Scheme::explicit_euler;
    FluxRule flux = FluxRule::upwind;
    double cg_tolerance = 1e-10;  ///< relative residual of the implicit solves
    int cg_max_iterations = 20000;

    void validate() const {
        if (!(dt_max > 0.0)) throw DomainError("solver: dt_max must be positive");
        if (!(cfl_safety > 0.0 && cfl_safety <= 1.0)) throw DomainError("solver: cfl_safety must lie in (0, 1]");
        if (!(t_end >= 0.0) || !std::isfinite(t_end)) throw DomainError("solver: t_end must be finite and >= 0");
        if (!(cg_tolerance > 0.0)) throw DomainError("solver: cg_tolerance must be positive");
    }
};

/// Saturated source u / (1 + u/k).
[[nodiscard]] inline double sat(double u, double k) { return u / (1.0 + u / k); }

/**
 * @brief Clamp construction of admissible initial data:
 * u_k0 = max(k^{-b/a}, min(u0, k)), v_k0 = max(k^{-a/b}, min(v0, k)).
 */
[[nodiscard]] inline std::pair<Field, Field> regularize_initial_data(const Field& u0, const Field& v0,
                                                                   const ModelParams& p) {
    p.validate();
    if (!(u0.grid == v0.grid)) throw ShapeError("regularize_initial_data: u0 and v0 live on different grids");
    auto check = [](const Field& f, const char* name) {
        bool nonzero = false;
        for (double x : f.values) {
            if (!(x >= 0.0) || !std::isfinite(x))
                throw DomainError(std::string("regularize_initial_data: ") + name + " must be finite and >= 0");
            nonzero = nonzero || x > 0.0;
        }
        if (!nonzero) throw DomainError(std::string("regularize_initial_data: ") + name + " is identically zero");
    };
    check(u0, "u0");
    check(v0, "v0");
    const double u_floor = std::pow(p.k, -p.b / p.a);
    const double v_floor = std::pow(p.k, -p.a / p.b);
    Field uk = u0, vk = v0;
    for (double& x : uk.values) x = std::max(u_floor, std::min(x, p.k));
    for (double& x : vk.values) x = std::max(v_floor, std::min(x, p.k));
    return {std::move(uk), std::move(vk)};
}

namespace detail {

inline void require_positive(const Field& f, const char* name, double t) {
    for (double x : f.values) {
        if (!(x > 0.0) || !std::isfinite(x))
            throw PositivityError(std::string(name) + " lost positivity or finiteness", t);
    }
}

/// Face value of u/v for a face between cells lo and hi with signal gradient g.
inline double face_ratio(double u_lo, double v_lo, double u_hi, double v_hi, double chi_g, FluxRule rule) {
    if (rule == FluxRule::central) return 0.5 * (u_lo / v_lo + u_hi / v_hi);
    return chi_g >= 0.0 ? u_lo / v_lo : u_hi / v_hi;
}

}  // namespace detail

/**
 * @brief Advective part -chi (u/v)|_face grad v of the face flux.
 *
 * Boundary faces are zero.
 */
[[nodiscard]] inline FaceField advective_flux(const State& s, const ModelParams& p, FluxRule rule = FluxRule::upwind) {
    detail::require_positive(s.v, "v", s.t);
    const Grid& g = s.u.grid;
    FaceField gv = gradient_faces(s.v);
    FaceField out(g);
    for (int j = 0; j < g.ny(); ++j)
        for (int i = 1; i < g.nx(); ++i) {
            const std::size_t f = g.xface(i, j);
            const double cg = p.chi * gv.x[f];
            out.x[f] = -cg * detail::face_ratio(s.u(i - 1, j), s.v(i - 1, j), s.u(i, j), s.v(i, j), cg, rule);
        }
    if (g.dims() == 2) {
        for (int j = 1; j < g.ny(); ++j)
            for (int i = 0; i < g.nx(); ++i) {
                const std::size_t f = g.yface(i, j);
                const double cg = p.chi * gv.y[f];
                out.y[f] = -cg * detail::face_ratio(s.u(i, j - 1), s.v(i, j - 1), s.u(i, j), s.v(i, j), cg, rule);
            }
    }
    return out;
}

/// Full face flux grad u - chi (u/v)|_face grad v; zero on boundary faces.
[[nodiscard]] inline FaceField chemotactic_flux(const State& s, const ModelParams& p, FluxRule rule = FluxRule::upwind) {
    FaceField flux = advective_flux(s, p, rule);
    const FaceField gu = gradient_faces(s.u);
    for (std::size_t f = 0; f < flux.x.size(); ++f) flux.x[f] += gu.x[f];
    for (std::size_t f = 0; f < flux.y.size(); ++f) flux.y[f] += gu.y[f];
    return flux;
}

/**
 * @brief Largest per-cell rate at which advection drains u, max_i sum_f chi |dv_f| / (v_i h_f),
 * summed over the faces for which cell i is upwind (all faces for the central rule).
 */
[[nodiscard]] inline double advective_drain_rate(const State& s, const ModelParams& p, FluxRule rule) {
    const Grid& g = s.u.grid;
    if (p.chi == 0.0) return 0.0;
    const FaceField gv = gradient_faces(s.v);
    double worst = 0.0;
    const bool central = rule == FluxRule::central;
    for (int j = 0; j < g.ny(); ++j)
        for (int i = 0; i < g.nx(); ++i) {
            double out_rate = 0.0;
            const double right = p.chi * gv.x[g.xface(i + 1, j)];
            const double left = p.chi * gv.x[g.xface(i, j)];
            out_rate += (central ? std::abs(right) : std::max(right, 0.0)) / g.h(0);
            out_rate += (central ? std::abs(left) : std::max(-left, 0.0)) / g.h(0);
            if (g.dims() == 2) {
                const double top = p.chi * gv.y[g.yface(i, j + 1)];
                const double bottom = p.chi * gv.y[g.yface(i, j)];
                out_rate += (central ? std::abs(top) : std::max(top, 0.0)) / g.h(1);
                out_rate += (central ? std::abs(bottom) : std::max(-bottom, 0.0)) / g.h(1);
            }
            worst = std::max(worst, out_rate / s.v(i, j));
        }
    return worst;
}

/// Diffusive rate 2 * sum_d 1/h_d^2 of the explicit Laplacian.
[[nodiscard]] inline double diffusive_rate(const Grid& g) {
    double r = 2.0 / (g.h(0) * g.h(0));
    if (g.dims() == 2) r += 2.0 / (g.h(1) * g.h(1));
    return r;
}

/**
 * @brief Positivity-preserving step bound, before the cfl_safety factor.
 *
 * explicit: 1 / max(2 sum 1/h^2 + drain_u, 2 sum 1/h^2 + 1)
 * imex:     1 / drain_u  (infinite when nothing is advected)
 */
[[nodiscard]] inline double positivity_dt_bound(const State& s, const ModelParams& p, Scheme scheme, FluxRule rule) {
    const double drain = advective_drain_rate(s, p, rule);
    if (scheme == Scheme::imex)
        return drain > 0.0 ? 1.0 / drain : std::numeric_limits<double>::infinity();
    const double diff = diffusive_rate(s.u.grid);
    return 1.0 / std::max(diff + drain, diff + 1.0);
}

/// Step size actually used by step(): min(dt_max, cfl_safety * bound, t_end - t).
[[nodiscard]] inline double choose_dt(const State& s, const ModelParams& p, const SolverConfig& cfg) {
    const double bound = cfg.cfl_safety * positivity_dt_bound(s, p, cfg.scheme, cfg.flux);
    return std::min({cfg.dt_max, bound, cfg.t_end - s.t});
}

struct CgResult {
    int iterations = 0;
    double relative_residual = 0.0;
};

/**
 * @brief Solves (alpha I - beta lap) x = rhs by conjugate gradients.
 *
 * The initial guess rhs/alpha has the same integral as the solution, and the
 * Krylov iterates stay in the zero-mean complement, so the integral of x is
 * preserved to rounding regardless of the stopping tolerance.
 */
inline CgResult solve_shifted_laplacian(double alpha, double beta, const Field& rhs, Field& x, double tol, int max_iter) {
    const Grid& g = rhs.grid;
    const std::size_t n = g.size();
    auto apply = [&](const Field& in, Field& out) {
        const Field lap = laplacian_neumann(in);
        for (std::size_t i = 0; i < n; ++i) out.values[i] = alpha * in.values[i] - beta * lap.values[i];
    };
    auto dot = [n](const Field& a, const Field& b) {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) s += a.values[i] * b.values[i];
        return s;
    };
    x = rhs;
    for (double& xi : x.values) xi /= alpha;
    Field r(g), ap(g);
    apply(x, ap);
    for (std::size_t i = 0; i < n; ++i) r.values[i] = rhs.values[i] - ap.values[i];
    const double bnorm = std::sqrt(dot(rhs, rhs));
    CgResult res;
    if (bnorm == 0.0) return res;
    double rr = dot(r, r);
    Field pdir = r;
    while (std::sqrt(rr) > tol * bnorm) {
        if (res.iterations >= max_iter)
            throw SolverError("conjugate gradients did not converge in " + std::to_string(max_iter) + " iterations");
        apply(pdir, ap);
        const double alpha_k = rr / dot(pdir, ap);
        for (std::size_t i = 0; i < n; ++i) {
            x.values[i] += alpha_k * pdir.values[i];
            r.values[i] -= alpha_k * ap.values[i];
        }
        const double rr_new = dot(r, r);
        const double beta_k = rr_new / rr;
        rr = rr_new;
        for (std::size_t i = 0; i < n; ++i) pdir.values[i] = r.values[i] + beta_k * pdir.values[i];
        ++res.iterations;
    }
    res.relative_residual = std::sqrt(rr) / bnorm;
    return res;
}

/**
 * @brief Advances by exactly `dt`, which must satisfy the scaled positivity bound.
 * @throws StabilityError if dt exceeds cfl_safety * positivity_dt_bound
 * @throws PositivityError if either component stops being positive and finite
 */
[[nodiscard]] inline State step_with_dt(const State& s, const ModelParams& p, const SolverConfig& cfg, double dt) {
    detail::require_positive(s.u, "u", s.t);
    detail::require_positive(s.v, "v", s.t);
    const double bound = cfg.cfl_safety * positivity_dt_bound(s, p, cfg.scheme, cfg.flux);
    if (!(dt > 0.0) || dt > bound * (1.0 + 1e-12))
        throw StabilityError("time step " + std::to_string(dt) + " exceeds stability bound " + std::to_string(bound), s.t);

    const Grid& g = s.u.grid;
    const std::size_t n = g.size();
    State next{s.t + dt, Field(g), Field(g)};
    if (cfg.scheme == Scheme::explicit_euler) {
        const Field div_u = div_flux_neumann(chemotactic_flux(s, p, cfg.flux));
        const Field lap_v = laplacian_neumann(s.v);
        for (std::size_t i = 0; i < n; ++i) {
            const double u = s.u.values[i];
            const double v = s.v.values[i];
            next.u.values[i] = u + dt * div_u.values[i];
            next.v.values[i] = v + dt * (lap_v.values[i] - v + sat(u, p.k));
        }
    } else {
        const Field div_adv = div_flux_neumann(advective_flux(s, p, cfg.flux));
        Field rhs_u(g), rhs_v(g);
        for (std::size_t i = 0; i < n; ++i) {
            rhs_u.values[i] = s.u.values[i] + dt * div_adv.values[i];
            rhs_v.values[i] = s.v.values[i] + dt * sat(s.u.values[i], p.k);
        }
        detail::require_positive(rhs_u, "u (explicit part)", s.t);
        try {
            solve_shifted_laplacian(1.0, dt, rhs_u, next.u, cfg.cg_tolerance, cfg.cg_max_iterations);
            solve_shifted_laplacian(1.0 + dt, dt, rhs_v, next.v, cfg.cg_tolerance, cfg.cg_max_iterations);
        } catch (const SolverError& e) {
            throw SolverError(std::string(e.what()) + " (t = " + std::to_string(s.t) + ")");
        }
    }
    detail::require_positive(next.u, "u", next.t);
    detail::require_positive(next.v, "v", next.t);
    return next;
}

/// One step with the size chosen by choose_dt().
[[nodiscard]] inline State step(const State& s, const ModelParams& p, const SolverConfig& cfg) {
    return step_with_dt(s, p, cfg, choose_dt(s, p, cfg));
}

struct RunOptions {
    std::size_t record_stride = 1;    ///< on_record every this many steps (plus first and last)
    std::size_t snapshot_stride = 1;  ///< keep a snapshot every this many steps; 0 keeps first and last only
};

struct RunHooks {
    /// Called before every step with the state the step starts from and its size.
    std::function<void(const State&, double)> on_step;
    /// Called at t = 0, every record_stride steps, and at the final state.
    std::function<void(const State&)> on_record;
};

/// Snapshots of one run; read-only after completion.
struct Trajectory {
    std::vector<State> snapshots;
    std::size_t steps = 0;

    [[nodiscard]] const State& initial() const { return snapshots.front(); }
    [[nodiscard]] const State& final() const { return snapshots.back(); }
    [[nodiscard]] double horizon() const { return snapshots.back().t; }
};

/**
 * @brief Regularizes (u0, v0) and integrates to cfg.t_end.
 *
 * Errors from step() propagate; PositivityError and StabilityError carry the
 * time at which the run aborted.
 */
inline Trajectory run(const Field& u0, const Field& v0, const ModelParams& p, const SolverConfig& cfg,
                      const RunOptions& opts = {}, const RunHooks& hooks = {}) {
    cfg.validate();
    auto [uk, vk] = regularize_initial_data(u0, v0, p);
    State s{0.0, std::move(uk), std::move(vk)};
    Trajectory traj;
    traj.snapshots.push_back(s);
    if (hooks.on_record) hooks.on_record(s);

    const double t_tol = 1e-12 * std::max(1.0, cfg.t_end);
    std::size_t steps = 0;
    while (cfg.t_end - s.t > t_tol) {
        const double dt = choose_dt(s, p, cfg);
        if (hooks.on_step) hooks.on_step(s, dt);
        s = step_with_dt(s, p, cfg, dt);
        ++steps;
        const bool last = cfg.t_end - s.t <= t_tol;
        if (last) s.t = cfg.t_end;
        if (hooks.on_record && (last || (opts.record_stride > 0 && steps % opts.record_stride == 0)))
            hooks.on_record(s);
        if (last || (opts.snapshot_stride > 0 && steps % opts.snapshot_stride == 0)) traj.snapshots.push_back(s);
    }
    traj.steps = steps;
    return traj;
}

}  // namespace kslog
