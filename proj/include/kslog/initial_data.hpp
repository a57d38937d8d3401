/**
 * @file initial_data.hpp
 * @brief Named analytic initial profiles and snapshot-loaded initial data.
 */
#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <string>
#include <utility>

#include "kslog/errors.hpp"
#include "kslog/grid.hpp"
#include "kslog/snapshot.hpp"

namespace kslog {

/**
 * Profiles (x measured in units of the extents, c = domain center):
 *   constant               u = u_base,                          v = v_base
 *   gaussian-bump          u = u_base + u_amp exp(-|x-c|^2/2w^2), v = v_base + v_amp exp(...)
 *   two-bumps              same with bumps at x = 0.3 L and 0.7 L (second at 60% amplitude)
 *   checkerboard-positive  u = u_base + u_amp (-1)^(i+j),       v = v_base
 *   steady                 u = u_base, v = u_base / (1 + u_base/k) (needs k)
 * `width` is relative to the x extent. A nonzero `noise` multiplies u by
 * (1 + noise (2 U - 1)), U uniform from a seeded 64-bit Mersenne twister.
 * If both snapshot paths are set the profile is ignored.
 */
struct InitialSpec {
    std::string profile = "gaussian-bump";
    double u_base = 1.0;
    double u_amp = 1.0;
    double v_base = 1.0;
    double v_amp = 0.0;
    double width = 0.1;
    double noise = 0.0;
    std::uint64_t seed = 0;
    std::string u_snapshot;
    std::string v_snapshot;

    friend bool operator==(const InitialSpec&, const InitialSpec&) = default;
};

namespace detail {

/// Portable uniform double in [0,1) from the raw 64-bit engine output.
inline double unit_uniform(std::mt19937_64& eng) { return static_cast<double>(eng() >> 11) * 0x1.0p-53; }

inline double gaussian(const Grid& g, double x, double y, double cx, double cy, double w) {
    const double s = w * g.extent(0);
    double r2 = (x - cx) * (x - cx);
    if (g.dims() == 2) r2 += (y - cy) * (y - cy);
    return std::exp(-r2 / (2.0 * s * s));
}

}  // namespace detail

[[nodiscard]] inline std::pair<Field, Field> make_initial_data(const Grid& g, const InitialSpec& spec,
                                                            double k = std::numeric_limits<double>::infinity()) {
    if (!spec.u_snapshot.empty() || !spec.v_snapshot.empty()) {
        if (spec.u_snapshot.empty() || spec.v_snapshot.empty())
            throw DomainError("initial data: both u and v snapshots are required");
        return {load_snapshot(spec.u_snapshot, g).field, load_snapshot(spec.v_snapshot, g).field};
    }
    const double cx = 0.5 * g.extent(0);
    const double cy = 0.5 * g.extent(1);
    Field u(g), v(g);
    if (spec.profile == "constant") {
        u = Field(g, spec.u_base);
        v = Field(g, spec.v_base);
    } else if (spec.profile == "steady") {
        if (!(k > 0.0)) throw DomainError("initial data: steady profile needs k > 0");
        u = Field(g, spec.u_base);
        v = Field(g, spec.u_base / (1.0 + spec.u_base / k));
    } else if (spec.profile == "gaussian-bump") {
        u = Field::sample(g, [&](double x, double y) {
            return spec.u_base + spec.u_amp * detail::gaussian(g, x, y, cx, cy, spec.width);
        });
        v = Field::sample(g, [&](double x, double y) {
            return spec.v_base + spec.v_amp * detail::gaussian(g, x, y, cx, cy, spec.width);
        });
    } else if (spec.profile == "two-bumps") {
        const double x1 = 0.3 * g.extent(0), x2 = 0.7 * g.extent(0);
        auto shape = [&](double x, double y) {
            return detail::gaussian(g, x, y, x1, cy, spec.width) + 0.6 * detail::gaussian(g, x, y, x2, cy, spec.width);
        };
        u = Field::sample(g, [&](double x, double y) { return spec.u_base + spec.u_amp * shape(x, y); });
        v = Field::sample(g, [&](double x, double y) { return spec.v_base + spec.v_amp * shape(x, y); });
    } else if (spec.profile == "checkerboard-positive") {
        if (!(spec.u_base > std::abs(spec.u_amp)))
            throw DomainError("initial data: checkerboard-positive needs u_base > |u_amp|");
        for (int j = 0; j < g.ny(); ++j)
            for (int i = 0; i < g.nx(); ++i) u(i, j) = spec.u_base + spec.u_amp * (((i + j) % 2 == 0) ? 1.0 : -1.0);
        v = Field(g, spec.v_base);
    } else {
        throw DomainError("initial data: unknown profile '" + spec.profile + "'");
    }
    if (spec.noise != 0.0) {
        std::mt19937_64 eng(spec.seed);
        for (double& x : u.values) x *= 1.0 + spec.noise * (2.0 * detail::unit_uniform(eng) - 1.0);
    }
    return {std::move(u), std::move(v)};
}

}  // namespace kslog
