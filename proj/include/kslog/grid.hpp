/**
 * @file grid.hpp
 * @brief Uniform rectangular 1D/2D grids, cell-centered fields and zero-flux operators.
 *
 * Cells are stored row-major (x fastest). Face arrays hold one value per face
 * normal to each axis: (nx+1)*ny x-faces and nx*(ny+1) y-faces. Boundary faces
 * of the Neumann operators carry exactly zero flux, so every divergence they
 * produce integrates to zero up to rounding.
 */
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "kslog/errors.hpp"

namespace kslog {

class Grid {
public:
    Grid() = default;

    /// 1D grid on (0, length) with `cells` cells.
    Grid(double length, int cells) : Grid(1, {length, 1.0}, {cells, 1}) {}

    /// 2D grid on (0, lx) x (0, ly).
    Grid(double lx, double ly, int nx, int ny) : Grid(2, {lx, ly}, {nx, ny}) {}

    Grid(int dims, std::array<double, 2> extents, std::array<int, 2> cells)
        : dims_(dims), extents_(extents), cells_(cells) {
        if (dims_ != 1 && dims_ != 2) throw DomainError("grid: dims must be 1 or 2");
        if (dims_ == 1) {
            extents_[1] = 1.0;
            cells_[1] = 1;
        }
        for (int d = 0; d < dims_; ++d) {
            if (cells_[d] < 4) throw DomainError("grid: at least 4 cells per axis required");
            if (!(extents_[d] > 0.0) || !std::isfinite(extents_[d]))
                throw DomainError("grid: extents must be positive");
        }
        for (int d = 0; d < 2; ++d) h_[d] = extents_[d] / cells_[d];
    }

    [[nodiscard]] int dims() const noexcept { return dims_; }
    [[nodiscard]] int nx() const noexcept { return cells_[0]; }
    [[nodiscard]] int ny() const noexcept { return cells_[1]; }
    [[nodiscard]] int cells(int axis) const noexcept { return cells_[axis]; }
    [[nodiscard]] double extent(int axis) const noexcept { return extents_[axis]; }
    [[nodiscard]] double h(int axis) const noexcept { return h_[axis]; }
    [[nodiscard]] std::size_t size() const noexcept {
        return static_cast<std::size_t>(cells_[0]) * static_cast<std::size_t>(cells_[1]);
    }
    [[nodiscard]] double cell_volume() const noexcept { return dims_ == 2 ? h_[0] * h_[1] : h_[0]; }
    [[nodiscard]] double measure() const noexcept {
        return dims_ == 2 ? extents_[0] * extents_[1] : extents_[0];
    }
    [[nodiscard]] std::size_t index(int i, int j) const noexcept {
        return static_cast<std::size_t>(j) * static_cast<std::size_t>(cells_[0]) + static_cast<std::size_t>(i);
    }
    [[nodiscard]] double x_center(int i) const noexcept { return (i + 0.5) * h_[0]; }
    [[nodiscard]] double y_center(int j) const noexcept { return dims_ == 2 ? (j + 0.5) * h_[1] : 0.0; }

    /// Number of faces normal to `axis` (zero for the y axis of a 1D grid).
    [[nodiscard]] std::size_t face_count(int axis) const noexcept {
        if (axis == 0) return static_cast<std::size_t>(cells_[0] + 1) * static_cast<std::size_t>(cells_[1]);
        if (dims_ == 1) return 0;
        return static_cast<std::size_t>(cells_[0]) * static_cast<std::size_t>(cells_[1] + 1);
    }
    /// x-face i sits between cells i-1 and i of row j.
    [[nodiscard]] std::size_t xface(int i, int j) const noexcept {
        return static_cast<std::size_t>(j) * static_cast<std::size_t>(cells_[0] + 1) + static_cast<std::size_t>(i);
    }
    /// y-face j sits between cells j-1 and j of column i.
    [[nodiscard]] std::size_t yface(int i, int j) const noexcept {
        return static_cast<std::size_t>(j) * static_cast<std::size_t>(cells_[0]) + static_cast<std::size_t>(i);
    }

    friend bool operator==(const Grid&, const Grid&) = default;

private:
    int dims_ = 1;
    std::array<double, 2> extents_{1.0, 1.0};
    std::array<int, 2> cells_{4, 1};
    std::array<double, 2> h_{0.25, 1.0};
};

/// Cell-centered scalar field.
struct Field {
    Grid grid;
    std::vector<double> values;

    Field() = default;
    explicit Field(const Grid& g, double fill = 0.0) : grid(g), values(g.size(), fill) {}
    Field(const Grid& g, std::vector<double> v) : grid(g), values(std::move(v)) {
        if (values.size() != grid.size()) throw ShapeError("field: value count does not match grid");
    }

    [[nodiscard]] double& operator()(int i, int j = 0) { return values[grid.index(i, j)]; }
    [[nodiscard]] double operator()(int i, int j = 0) const { return values[grid.index(i, j)]; }
    [[nodiscard]] double min() const { return *std::min_element(values.begin(), values.end()); }
    [[nodiscard]] double max() const { return *std::max_element(values.begin(), values.end()); }
    [[nodiscard]] bool all_finite() const {
        return std::all_of(values.begin(), values.end(), [](double x) { return std::isfinite(x); });
    }

    /// Samples f(x, y) at cell centers.
    template <class F>
    static Field sample(const Grid& g, F&& f) {
        Field out(g);
        for (int j = 0; j < g.ny(); ++j)
            for (int i = 0; i < g.nx(); ++i) out(i, j) = f(g.x_center(i), g.y_center(j));
        return out;
    }
};

/// Values on the faces of a grid, one array per axis.
struct FaceField {
    Grid grid;
    std::vector<double> x;
    std::vector<double> y;

    FaceField() = default;
    explicit FaceField(const Grid& g) : grid(g), x(g.face_count(0), 0.0), y(g.face_count(1), 0.0) {}

    void check_shape() const {
        if (x.size() != grid.face_count(0) || y.size() != grid.face_count(1))
            throw ShapeError("face field: array sizes do not conform to grid");
    }
};

/// Midpoint quadrature: sum of cell values times cell volume.
[[nodiscard]] inline double integrate(const Field& f) {
    // Neumaier summation keeps conservation audits at rounding level
    double sum = 0.0, comp = 0.0;
    for (double x : f.values) {
        const double t = sum + x;
        comp += std::abs(sum) >= std::abs(x) ? (sum - t) + x : (x - t) + sum;
        sum = t;
    }
    return (sum + comp) * f.grid.cell_volume();
}

/// Two-point face differences; boundary faces are zero (mirror ghost cells).
[[nodiscard]] inline FaceField gradient_faces(const Field& f) {
    const Grid& g = f.grid;
    FaceField out(g);
    const double inv_hx = 1.0 / g.h(0);
    for (int j = 0; j < g.ny(); ++j)
        for (int i = 1; i < g.nx(); ++i) out.x[g.xface(i, j)] = (f(i, j) - f(i - 1, j)) * inv_hx;
    if (g.dims() == 2) {
        const double inv_hy = 1.0 / g.h(1);
        for (int j = 1; j < g.ny(); ++j)
            for (int i = 0; i < g.nx(); ++i) out.y[g.yface(i, j)] = (f(i, j) - f(i, j - 1)) * inv_hy;
    }
    return out;
}

/// Cellwise divergence of a face field using its boundary values as given.
[[nodiscard]] inline Field divergence(const FaceField& flux) {
    flux.check_shape();
    const Grid& g = flux.grid;
    Field out(g);
    const double inv_hx = 1.0 / g.h(0);
    for (int j = 0; j < g.ny(); ++j)
        for (int i = 0; i < g.nx(); ++i)
            out(i, j) = (flux.x[g.xface(i + 1, j)] - flux.x[g.xface(i, j)]) * inv_hx;
    if (g.dims() == 2) {
        const double inv_hy = 1.0 / g.h(1);
        for (int j = 0; j < g.ny(); ++j)
            for (int i = 0; i < g.nx(); ++i)
                out(i, j) += (flux.y[g.yface(i, j + 1)] - flux.y[g.yface(i, j)]) * inv_hy;
    }
    return out;
}

/// Conservative divergence with zero flux imposed on every boundary face.
[[nodiscard]] inline Field div_flux_neumann(const FaceField& flux) {
    flux.check_shape();
    const Grid& g = flux.grid;
    FaceField masked = flux;
    for (int j = 0; j < g.ny(); ++j) {
        masked.x[g.xface(0, j)] = 0.0;
        masked.x[g.xface(g.nx(), j)] = 0.0;
    }
    if (g.dims() == 2) {
        for (int i = 0; i < g.nx(); ++i) {
            masked.y[g.yface(i, 0)] = 0.0;
            masked.y[g.yface(i, g.ny())] = 0.0;
        }
    }
    return divergence(masked);
}

/// 3/5-point Laplacian with mirror ghost cells, in flux-difference form.
[[nodiscard]] inline Field laplacian_neumann(const Field& f) { return divergence(gradient_faces(f)); }

/// Face-centered coordinate of an x-face / y-face.
[[nodiscard]] inline std::array<double, 2> xface_center(const Grid& g, int i, int j) {
    return {i * g.h(0), g.y_center(j)};
}
[[nodiscard]] inline std::array<double, 2> yface_center(const Grid& g, int i, int j) {
    return {g.x_center(i), j * g.h(1)};
}

/// Arithmetic mean of the two cells adjacent to each face; boundary faces take the inner cell.
[[nodiscard]] inline FaceField face_average(const Field& f) {
    const Grid& g = f.grid;
    FaceField out(g);
    for (int j = 0; j < g.ny(); ++j) {
        out.x[g.xface(0, j)] = f(0, j);
        out.x[g.xface(g.nx(), j)] = f(g.nx() - 1, j);
        for (int i = 1; i < g.nx(); ++i) out.x[g.xface(i, j)] = 0.5 * (f(i, j) + f(i - 1, j));
    }
    if (g.dims() == 2) {
        for (int i = 0; i < g.nx(); ++i) {
            out.y[g.yface(i, 0)] = f(i, 0);
            out.y[g.yface(i, g.ny())] = f(i, g.ny() - 1);
            for (int j = 1; j < g.ny(); ++j) out.y[g.yface(i, j)] = 0.5 * (f(i, j) + f(i, j - 1));
        }
    }
    return out;
}

/// Face quadrature: each face carries the volume of one cell (boundary faces half).
[[nodiscard]] inline double integrate_faces(const FaceField& f) {
    const Grid& g = f.grid;
    double sum = 0.0;
    for (int j = 0; j < g.ny(); ++j)
        for (int i = 0; i <= g.nx(); ++i) {
            const double w = (i == 0 || i == g.nx()) ? 0.5 : 1.0;
            sum += w * f.x[g.xface(i, j)];
        }
    if (g.dims() == 2) {
        for (int j = 0; j <= g.ny(); ++j)
            for (int i = 0; i < g.nx(); ++i) {
                const double w = (j == 0 || j == g.ny()) ? 0.5 : 1.0;
                sum += w * f.y[g.yface(i, j)];
            }
    }
    return sum * g.cell_volume();
}

}  // namespace kslog
