#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "kslog/grid.hpp"

using namespace kslog;

namespace {

Field random_field(const Grid& g, std::uint64_t seed, double lo = -1.0, double hi = 1.0) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> ud(lo, hi);
    Field f(g);
    for (double& x : f.values) x = ud(rng);
    return f;
}

double l1(const Field& f) {
    double s = 0.0;
    for (double x : f.values) s += std::abs(x);
    return s * f.grid.cell_volume();
}

}  // namespace

TEST(Grid, GeometryAndIndexing) {
    const Grid g(2.0, 3.0, 8, 6);
    EXPECT_EQ(g.dims(), 2);
    EXPECT_EQ(g.size(), 48u);
    EXPECT_DOUBLE_EQ(g.h(0), 0.25);
    EXPECT_DOUBLE_EQ(g.h(1), 0.5);
    EXPECT_DOUBLE_EQ(g.measure(), 6.0);
    EXPECT_EQ(g.index(3, 2), 2u * 8u + 3u);
    EXPECT_EQ(g.face_count(0), 9u * 6u);
    EXPECT_EQ(g.face_count(1), 8u * 7u);
    EXPECT_DOUBLE_EQ(g.x_center(0), 0.125);
}

TEST(Grid, OneDimensional) {
    const Grid g(1.0, 10);
    EXPECT_EQ(g.dims(), 1);
    EXPECT_EQ(g.ny(), 1);
    EXPECT_DOUBLE_EQ(g.cell_volume(), 0.1);
    EXPECT_DOUBLE_EQ(g.measure(), 1.0);
}

TEST(Grid, RejectsDegenerateSizes) {
    EXPECT_THROW(Grid(1.0, 2), DomainError);
    EXPECT_THROW(Grid(0.0, 8), DomainError);
    EXPECT_THROW(Grid(1.0, 1.0, 8, 3), DomainError);
}

TEST(Integrate, Constants) {
    EXPECT_EQ(integrate(Field(Grid(1.0, 1.0, 16, 16), 1.0)), 1.0);
    EXPECT_NEAR(integrate(Field(Grid(2.0, 3.0, 8, 12), 2.5)), 15.0, 1e-14);
}

TEST(Integrate, HalfIndicator) {
    const Grid g(1.0, 64);
    Field f(g);
    for (int i = 0; i < 32; ++i) f(i) = 1.0;
    EXPECT_DOUBLE_EQ(integrate(f), 0.5);
}

TEST(Laplacian, AnnihilatesConstants) {
    const Field lap = laplacian_neumann(Field(Grid(1.0, 1.0, 16, 16), 3.7));
    for (double x : lap.values) EXPECT_EQ(x, 0.0);
}

TEST(Laplacian, ExactOnQuadraticsAwayFromBoundary) {
    const Grid g(1.0, 32);
    const Field f = Field::sample(g, [](double x, double) { return x * x; });
    const Field lap = laplacian_neumann(f);
    for (int i = 1; i < 31; ++i) EXPECT_NEAR(lap(i), 2.0, 1e-9);
}

TEST(Laplacian, ConservativeOnSpecGrid) {
    const Grid g(1.0, 1.0, 16, 16);
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const Field f = random_field(g, seed);
        EXPECT_LE(std::abs(integrate(laplacian_neumann(f))), 1e-13 * l1(f));
    }
}

TEST(Laplacian, ConservativeToRoundingOnFineGrids) {
    // Face differences carry 1/h^2, so the rounding floor grows like eps * ||f||_1 / h^2.
    for (int n : {128, 512}) {
        const Grid g(1.0, 1.0, n, n);
        const Field f = random_field(g, 99);
        const double h = g.h(0);
        EXPECT_LE(std::abs(integrate(laplacian_neumann(f))), 64.0 * 2.2e-16 * l1(f) / (h * h));
    }
}

TEST(Laplacian, SecondOrderOnCosine) {
    double prev = 0.0;
    for (int n : {32, 64, 128, 256}) {
        const double L = 2.0;
        const Grid g(L, n);
        const double k = std::numbers::pi / L;
        const Field f = Field::sample(g, [&](double x, double) { return std::cos(k * x); });
        const Field lap = laplacian_neumann(f);
        double err = 0.0;
        for (int i = 0; i < n; ++i) err = std::max(err, std::abs(lap(i) + k * k * std::cos(k * g.x_center(i))));
        if (prev > 0.0) {
            EXPECT_NEAR(prev / err, 4.0, 0.5) << n;
        }
        prev = err;
    }
}

TEST(Gradient, AffineAndBoundary) {
    const Grid g(1.0, 10);
    const Field f = Field::sample(g, [](double x, double) { return 3.0 * x; });
    const FaceField d = gradient_faces(f);
    for (int i = 1; i < 10; ++i) EXPECT_NEAR(d.x[g.xface(i, 0)], 3.0, 1e-12);
    EXPECT_EQ(d.x[g.xface(0, 0)], 0.0);
    EXPECT_EQ(d.x[g.xface(10, 0)], 0.0);
}

TEST(Gradient, ConstantIsZero) {
    const FaceField d = gradient_faces(Field(Grid(1.0, 1.0, 8, 8), 2.0));
    for (double x : d.x) EXPECT_EQ(x, 0.0);
    for (double y : d.y) EXPECT_EQ(y, 0.0);
}

TEST(Gradient, BoundaryFacesZeroIn2D) {
    const Grid g(1.0, 1.0, 8, 6);
    const FaceField d = gradient_faces(random_field(g, 4));
    for (int j = 0; j < 6; ++j) {
        EXPECT_EQ(d.x[g.xface(0, j)], 0.0);
        EXPECT_EQ(d.x[g.xface(8, j)], 0.0);
    }
    for (int i = 0; i < 8; ++i) {
        EXPECT_EQ(d.y[g.yface(i, 0)], 0.0);
        EXPECT_EQ(d.y[g.yface(i, 6)], 0.0);
    }
}

TEST(DivFlux, ZeroFlux) {
    const Field d = div_flux_neumann(FaceField(Grid(1.0, 1.0, 8, 8)));
    for (double x : d.values) EXPECT_EQ(x, 0.0);
}

TEST(DivFlux, ConstantInteriorFluxTouchesOnlyEndCells) {
    const Grid g(1.0, 8);
    FaceField F(g);
    for (double& x : F.x) x = 1.0;
    const Field d = div_flux_neumann(F);
    for (int i = 1; i < 7; ++i) EXPECT_EQ(d(i), 0.0);
    EXPECT_NE(d(0), 0.0);
    EXPECT_NE(d(7), 0.0);
    EXPECT_NEAR(integrate(d), 0.0, 1e-14);
}

TEST(DivFlux, RandomFluxesConserve) {
    const Grid g(1.0, 1.0, 16, 16);
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> ud(-1.0, 1.0);
    for (int rep = 0; rep < 20; ++rep) {
        FaceField F(g);
        double total = 0.0;
        for (double& x : F.x) total += std::abs(x = ud(rng));
        for (double& y : F.y) total += std::abs(y = ud(rng));
        EXPECT_LE(std::abs(integrate(div_flux_neumann(F))), 1e-13 * total);
    }
}

TEST(DivFlux, ShapeMismatchThrows) {
    FaceField F(Grid(1.0, 1.0, 8, 8));
    F.x.pop_back();
    EXPECT_THROW((void)div_flux_neumann(F), ShapeError);
}

TEST(Divergence, KeepsBoundaryFluxes) {
    const Grid g(1.0, 8);
    FaceField F(g);
    F.x[g.xface(8, 0)] = 1.0;
    EXPECT_NEAR(integrate(divergence(F)), 1.0, 1e-14);
    EXPECT_NEAR(integrate(div_flux_neumann(F)), 0.0, 1e-14);
}

TEST(FaceAverage, InteriorMeanBoundaryInnerCell) {
    const Grid g(1.0, 4);
    const Field f(g, std::vector<double>{1, 3, 5, 7});
    const FaceField a = face_average(f);
    EXPECT_EQ(a.x[g.xface(0, 0)], 1.0);
    EXPECT_EQ(a.x[g.xface(1, 0)], 2.0);
    EXPECT_EQ(a.x[g.xface(4, 0)], 7.0);
}

TEST(Field, SampleAndExtrema) {
    const Grid g(1.0, 1.0, 4, 4);
    const Field f = Field::sample(g, [](double x, double y) { return x + 10 * y; });
    EXPECT_DOUBLE_EQ(f(1, 2), 0.375 + 6.25);
    EXPECT_DOUBLE_EQ(f.min(), 0.125 + 1.25);
    EXPECT_TRUE(f.all_finite());
}
