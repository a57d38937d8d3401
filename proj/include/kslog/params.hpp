/**
 * @file params.hpp
 * @brief Model constants and closed-form admissibility analysis of (chi, a, b).
 *
 * The coupled quantity u^{-a} v^{-b} yields a coercive dissipation form exactly
 * when b lies above the frontier b_plus(a). Three equivalent characterizations
 * are exposed (frontier comparison, discriminant sign, smallest eigenvalue of
 * the dissipation form) so that callers and tests can cross-check them.
 *
 * All functions are pure and thread-safe.
 */
#pragma once

#include <cmath>
#include <limits>
#include <span>
#include <string>

#include "kslog/errors.hpp"

namespace kslog {

/// Physical and regularization constants of the saturated system.
struct ModelParams {
    double chi = 1.0;  ///< chemotactic sensitivity
    double a = 1.0;    ///< exponent of u in u^{-a} v^{-b}
    double b = 1.0;    ///< exponent of v in u^{-a} v^{-b}
    int n = 2;         ///< space dimension used for threshold reporting
    double k = 8.0;    ///< saturation level of the source u/(1+u/k)

    /// Throws DomainError unless chi >= 0, a > 0, b > 0, n >= 1, k >= 2.
    void validate() const {
        if (!(chi >= 0.0) || !std::isfinite(chi)) throw DomainError("chi must be a finite value >= 0");
        if (!(a > 0.0) || !std::isfinite(a)) throw DomainError("a must be positive");
        if (!(b > 0.0) || !std::isfinite(b)) throw DomainError("b must be positive");
        if (n < 1) throw DomainError("n must be >= 1");
        if (!(k >= 2.0)) throw DomainError("k must be >= 2");
    }
};

namespace detail {
inline void require_exponent(double a, double chi) {
    if (!(a > 0.0) || !std::isfinite(a)) throw DomainError("a must be positive");
    if (!(chi >= 0.0) || !std::isfinite(chi)) throw DomainError("chi must be >= 0");
}
}  // namespace detail

/// Admissibility frontier ((1+a)/2)(sqrt(1+chi^2 a) - 1).
[[nodiscard]] inline double b_plus(double a, double chi) {
    detail::require_exponent(a, chi);
    const double x = chi * chi * a;
    // sqrt(1+x)-1 rewritten without cancellation
    return 0.5 * (1.0 + a) * x / (std::sqrt(1.0 + x) + 1.0);
}

/// Negative lower root -((1+a)/2)(sqrt(1+chi^2 a) + 1). Classifier only.
[[nodiscard]] inline double b_minus(double a, double chi) {
    detail::require_exponent(a, chi);
    return -0.5 * (1.0 + a) * (std::sqrt(1.0 + chi * chi * a) + 1.0);
}

/// chi^2 (a+1)^2 / 4 - (b+a+1) b / a; negative exactly in the admissible region.
[[nodiscard]] inline double discriminant(const ModelParams& p) {
    return p.chi * p.chi * (p.a + 1.0) * (p.a + 1.0) / 4.0 - (p.b + p.a + 1.0) * p.b / p.a;
}

/// Magnitude used to judge whether a discriminant value is numerically zero.
[[nodiscard]] inline double discriminant_scale(const ModelParams& p) {
    return p.chi * p.chi * (p.a + 1.0) * (p.a + 1.0) / 4.0 + std::abs((p.b + p.a + 1.0) * p.b / p.a);
}

/// Symmetric 2x2 matrix of the dissipation form Q(U,V) = [U V] M [U V]^T (per component).
struct QuadraticFormMatrix {
    double uu;
    double uv;
    double vv;
};

[[nodiscard]] inline QuadraticFormMatrix dissipation_matrix(const ModelParams& p) {
    return {4.0 * (p.a + 1.0) / p.a,
            2.0 * (p.b / p.a + p.chi * (p.a + 1.0) / 2.0),
            p.b * p.b / p.a + p.b + p.chi * p.b};
}

/**
 * @brief Largest C with Q(U,V) >= C (|U|^2 + |V|^2), i.e. lambda_min of the form matrix.
 *
 * Evaluated as det / lambda_max with det = -4 * discriminant, so the sign is
 * exactly the sign of -discriminant. Vanishes on the frontier.
 */
[[nodiscard]] inline double coercivity_constant(const ModelParams& p) {
    const auto m = dissipation_matrix(p);
    const double half_trace = 0.5 * (m.uu + m.vv);
    const double radius = std::hypot(0.5 * (m.uu - m.vv), m.uv);
    const double lambda_max = half_trace + radius;
    const double det = -4.0 * discriminant(p);
    return det / lambda_max;
}

/**
 * @brief Exact evaluation of
 * Q(U,V) = 4((a+1)/a |U|^2 + (b/a + chi(a+1)/2) U.V + (1/4)(b^2/a + b + chi b) |V|^2).
 */
[[nodiscard]] inline double q_eval(const ModelParams& p, std::span<const double> U, std::span<const double> V) {
    if (U.size() != V.size()) throw ShapeError("q_eval: U and V must have the same dimension");
    double uu = 0.0, uv = 0.0, vv = 0.0;
    for (std::size_t i = 0; i < U.size(); ++i) {
        uu += U[i] * U[i];
        uv += U[i] * V[i];
        vv += V[i] * V[i];
    }
    const auto m = dissipation_matrix(p);
    return m.uu * uu + 2.0 * m.uv * uv + m.vv * vv;
}

/// Scalar (one-component) form of q_eval.
[[nodiscard]] inline double q_eval(const ModelParams& p, double U, double V) {
    const auto m = dissipation_matrix(p);
    return m.uu * U * U + 2.0 * m.uv * U * V + m.vv * V * V;
}

/// Prior-work global solvability threshold in chi: inf (n=2), sqrt(8) (n=3), n/(n-2) (n>=4).
[[nodiscard]] inline double chi_threshold_lw(int n) {
    if (n < 2) throw DomainError("chi_threshold_lw: n must be >= 2");
    if (n == 2) return std::numeric_limits<double>::infinity();
    if (n == 3) return std::sqrt(8.0);
    return static_cast<double>(n) / static_cast<double>(n - 2);
}

struct AdmissibilityReport {
    double b_plus = 0.0;
    double b_minus = 0.0;
    double discriminant = 0.0;
    double coercivity = 0.0;
    bool admissible = false;
    bool frontier = false;  ///< |discriminant| within rounding of zero
};

/// Strict inequality b > b_plus: frontier points are not admissible.
[[nodiscard]] inline AdmissibilityReport analyze(const ModelParams& p) {
    p.validate();
    AdmissibilityReport r;
    r.b_plus = b_plus(p.a, p.chi);
    r.b_minus = b_minus(p.a, p.chi);
    r.discriminant = discriminant(p);
    r.coercivity = coercivity_constant(p);
    r.frontier = std::abs(r.discriminant) <= 1e-12 * discriminant_scale(p);
    r.admissible = !r.frontier && r.discriminant < 0.0;
    return r;
}

}  // namespace kslog
