#include <cmath>
#include <random>
#include <sstream>
#include <vector>

#include <Eigen/Eigenvalues>
#include <gtest/gtest.h>

#include "cmcflow/errors.hpp"
#include "cmcflow/hypersurface.hpp"
#include "support.hpp"

using namespace cmcflow;
using namespace testing_support;

namespace {

double sine_bump(const std::vector<double>& x, double base, double amp, double b) {
  return base + amp * std::sin(kPi * x[0] / b);
}

}  // namespace

TEST(InducedGeometry, ConstantGraphClosedFormsForAllFamilies) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> time(0.2, 5.0);
  const std::vector<MultiWarpedSpacetime> models = {
      power_law_example(),
      MultiWarpedSpacetime(0.0, kInf, {{2, 1.0, WarpingLaw::exponential(0.8)}, {1, 2.0, WarpingLaw::constant(3.0)}}),
      MultiWarpedSpacetime(0.0, kInf, {{1, 1.0, WarpingLaw::sinh(1.5)}, {2, 1.0, WarpingLaw::power(-0.5)}})};
  for (const auto& m : models) {
    const auto grid = PeriodicGrid::for_model(m, {4, 3, 2});
    for (int trial = 0; trial < 50; ++trial) {
      const double t0 = time(rng);
      const auto geom = induced_geometry(m, GraphSurface::constant(grid, t0));
      const double H = m.slice_mean_curvature(t0);
      const double A2 = m.slice_second_fundamental_norm(t0);
      const double r0 = ricci_diagonal(m, t0).r0;
      for (Eigen::Index i = 0; i < geom.H.size(); ++i) {
        EXPECT_NEAR(geom.H[i], H, 1e-12 * std::max(1.0, std::abs(H)));
        EXPECT_NEAR(geom.v[i], 1.0, 1e-12);
        EXPECT_NEAR(geom.A2[i], A2, 1e-12 * std::max(1.0, A2));
        EXPECT_NEAR(geom.ric_nu[i], r0, 1e-12 * std::max(1.0, std::abs(r0)));
        EXPECT_NEAR(geom.sigma2[i], A2 - H * H / 3.0, 1e-12 * std::max(1.0, A2));
      }
    }
  }
}

TEST(InducedGeometry, PowerLawExampleSlice) {
  const auto m = power_law_example();
  const auto grid = PeriodicGrid::for_model(m, {8, 8, 8});
  for (double t0 : {0.5, 1.0, 4.0}) {
    const auto geom = induced_geometry(m, GraphSurface::constant(grid, t0));
    EXPECT_NEAR(geom.H.maxCoeff(), 2.75 / t0, 1e-14);
    EXPECT_NEAR(geom.H.minCoeff(), 2.75 / t0, 1e-14);
    EXPECT_EQ(geom.v.maxCoeff(), 1.0);
    const Field flux = mean_curvature_flux_form(m, GraphSurface::constant(grid, t0));
    EXPECT_NEAR((flux.array() - 2.75 / t0).abs().maxCoeff(), 0.0, 1e-8);
  }
}

TEST(InducedGeometry, MinkowskiAndDeSitterSlices) {
  const auto flat = minkowski(2);
  auto geom = induced_geometry(flat, GraphSurface::constant(PeriodicGrid::for_model(flat, {6, 6}), 0.3));
  EXPECT_EQ(geom.H.cwiseAbs().maxCoeff(), 0.0);
  EXPECT_EQ(geom.A2.cwiseAbs().maxCoeff(), 0.0);
  const auto ds = de_sitter(1.0);
  geom = induced_geometry(ds, GraphSurface::constant(PeriodicGrid::for_model(ds, {5, 5, 5}), 0.7));
  EXPECT_NEAR((geom.H.array() - 3.0).abs().maxCoeff(), 0.0, 1e-14);
  EXPECT_NEAR(geom.sigma2.cwiseAbs().maxCoeff(), 0.0, 1e-13);
}

TEST(InducedGeometry, MeanCurvatureConvergesAtSecondOrder) {
  const auto m = flrw_linear_1d();
  std::vector<Field> H;
  for (int N : {256, 512, 1024}) {
    const auto grid = PeriodicGrid::for_model(m, {N});
    H.push_back(induced_geometry(m, sample_surface(grid, [](const auto& x) { return sine_bump(x, 2.0, 0.1, kPi); })).H);
  }
  const double e1 = coarse_fine_gap(H[0], H[1]);
  const double e2 = coarse_fine_gap(H[1], H[2]);
  EXPECT_NEAR(e1 / e2, 4.0, 0.2);
  // Richardson limit from the two finer grids; the coarse error is O(dx^2)
  double worst = 0.0;
  for (Eigen::Index i = 0; i < H[0].size(); ++i) {
    const double limit = (4.0 * H[2][4 * i] - H[1][2 * i]) / 3.0;
    worst = std::max(worst, std::abs(H[0][i] - limit));
  }
  const double dx = 2.0 * kPi / 256;
  EXPECT_LT(worst, 0.1 * dx * dx);
}

TEST(InducedGeometry, QuasilinearAndFluxFormsAgreeToSecondOrder) {
  const auto m = power_law_example(2.0);
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> coef(-0.05, 0.05);
  for (int trial = 0; trial < 3; ++trial) {
    const double a = coef(rng), b = coef(rng), c = coef(rng);
    auto f = [&](const std::vector<double>& x) {
      return 1.5 + a * std::sin(kPi * x[0] / 2.0) + b * std::cos(kPi * x[1] / 2.0) +
             c * std::sin(kPi * (x[0] + x[2]) / 2.0);
    };
    std::vector<double> gaps;
    for (int N : {16, 32, 64}) {
      const auto s = sample_surface(PeriodicGrid::for_model(m, {N, N, N}), f);
      gaps.push_back((induced_geometry(m, s).H - mean_curvature_flux_form(m, s)).cwiseAbs().maxCoeff());
    }
    EXPECT_GT(gaps[0] / gaps[1], 3.0) << "trial " << trial;
    EXPECT_GT(gaps[1] / gaps[2], 3.5) << "trial " << trial;
  }
}

TEST(InducedGeometry, PointwiseInequalitiesOnRandomSurfaces) {
  const auto m = power_law_example(2.0);
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> coef(-0.15, 0.15);
  for (int trial = 0; trial < 10; ++trial) {
    const double a = coef(rng), b = coef(rng), c = coef(rng);
    const auto s = sample_surface(PeriodicGrid::for_model(m, {12, 10, 8}), [&](const auto& x) {
      return 2.0 + a * std::sin(kPi * x[0] / 2.0) + b * std::sin(kPi * (x[1] - x[2]) / 2.0) +
             c * std::cos(kPi * x[2]);
    });
    const auto geom = induced_geometry(m, s);
    EXPECT_GE(geom.v.minCoeff(), 1.0 - 1e-12);
    EXPECT_GE(geom.sigma2.minCoeff(), -1e-12);
    const Field trace_free = geom.A2 - geom.H.cwiseProduct(geom.H) / 3.0;
    EXPECT_LT((trace_free - geom.sigma2).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(InducedGeometry, TranslationEquivariance) {
  const auto m = power_law_example(2.0);
  const auto grid = PeriodicGrid::for_model(m, {12, 10, 8});
  const auto s = sample_surface(grid, [](const auto& x) {
    return 2.0 + 0.1 * std::sin(kPi * x[0] / 2.0) * std::cos(kPi * x[1] / 2.0) + 0.05 * std::sin(kPi * x[2] / 2.0);
  });
  // shift by (3, 2, 5) nodes
  GraphSurface shifted = s;
  for (std::size_t i = 0; i < grid.points(); ++i) {
    std::size_t j = grid.shifted(grid.shifted(grid.shifted(i, 0, 3), 1, 2), 2, 5);
    shifted.u[static_cast<Eigen::Index>(j)] = s.u[static_cast<Eigen::Index>(i)];
  }
  const auto g0 = induced_geometry(m, s);
  const auto g1 = induced_geometry(m, shifted);
  for (std::size_t i = 0; i < grid.points(); ++i) {
    const auto j = static_cast<Eigen::Index>(grid.shifted(grid.shifted(grid.shifted(i, 0, 3), 1, 2), 2, 5));
    const auto ii = static_cast<Eigen::Index>(i);
    EXPECT_NEAR(g1.H[j], g0.H[ii], 1e-13);
    EXPECT_NEAR(g1.v[j], g0.v[ii], 1e-13);
    EXPECT_NEAR(g1.A2[j], g0.A2[ii], 1e-13);
    EXPECT_NEAR(g1.ric_nu[j], g0.ric_nu[ii], 1e-13);
  }
}

TEST(InducedGeometry, NonSpacelikeSurfaceIsGeometryErrorAtThePoint) {
  const auto m = minkowski(1, 1.0);
  const auto grid = PeriodicGrid::for_model(m, {64});
  const auto s = sample_surface(grid, [](const auto& x) { return 0.5 * std::sin(kPi * x[0]); });
  try {
    induced_geometry(m, s);
    FAIL() << "expected GeometryError";
  } catch (const GeometryError& e) {
    const auto report = spacelike_check(m, s);
    EXPECT_FALSE(report.spacelike);
    std::array<double, kMaxGridDim> du{};
    std::array<std::array<double, kMaxGridDim>, kMaxGridDim> d2u{};
    grid_derivatives(grid, s.u, e.point(), du, d2u);
    EXPECT_GE(du[0] * du[0], 1.0 - 1e-6);
  }
}

TEST(SpacelikeCheck, ConstantSurfaceMarginIsSmallestMetricCoefficient) {
  const auto m = power_law_example();
  const auto report = spacelike_check(m, GraphSurface::constant(PeriodicGrid::for_model(m, {4, 4, 4}), 2.0));
  EXPECT_TRUE(report.spacelike);
  EXPECT_NEAR(report.margin, std::pow(2.0, 1.5), 1e-12);
}

TEST(SpacelikeCheck, SteepGraphInFlatModelFails) {
  const auto m = minkowski(1, 1.0);
  const auto grid = PeriodicGrid::for_model(m, {128});
  EXPECT_FALSE(spacelike_check(m, sample_surface(grid, [](const auto& x) { return 0.4 * std::sin(kPi * x[0]); })).spacelike);
  EXPECT_TRUE(spacelike_check(m, sample_surface(grid, [](const auto& x) { return 0.2 * std::sin(kPi * x[0]); })).spacelike);
}

TEST(SpacelikeCheck, VerdictFlipsExactlyWhenDiscreteMetricLosesPositivity) {
  const MultiWarpedSpacetime m(0.0, kInf, {{1, 1.0, WarpingLaw::power(1.0)}, {1, 1.0, WarpingLaw::constant(1.0)}});
  const auto grid = PeriodicGrid::for_model(m, {24, 20});
  const double tol = 1e-6;
  int flips = 0;
  bool previous = true;
  for (int step = 0; step <= 400; ++step) {
    const double amp = 0.5 * step / 400.0;
    const auto s = sample_surface(grid, [&](const auto& x) {
      return 1.0 + amp * (std::sin(kPi * x[0]) + std::cos(kPi * x[1]) + 0.5 * std::sin(kPi * (x[0] - x[1])));
    });
    // direct scan of the discrete induced metric
    bool oracle = true;
    for (std::size_t i = 0; i < grid.points(); ++i) {
      const double u = s.u[static_cast<Eigen::Index>(i)];
      Eigen::Vector2d du;
      for (int k = 0; k < 2; ++k)
        du[k] = (s.u[static_cast<Eigen::Index>(grid.shifted(i, k, 1))] -
                 s.u[static_cast<Eigen::Index>(grid.shifted(i, k, -1))]) /
                (2.0 * grid.spacing(k));
      Eigen::Matrix2d h = Eigen::Vector2d(u * u, 1.0).asDiagonal();
      h -= du * du.transpose();
      const double lmin = Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d>(h).eigenvalues()[0];
      if (!(u > 0.0) || lmin < tol * std::min(u * u, 1.0)) oracle = false;
    }
    const bool verdict = spacelike_check(m, s, tol).spacelike;
    EXPECT_EQ(verdict, oracle) << "amplitude " << amp;
    if (verdict != previous) ++flips;
    previous = verdict;
  }
  EXPECT_EQ(flips, 1);
}

TEST(SurfaceCsv, RoundTripsExactly) {
  const auto m = power_law_example();
  const auto grid = PeriodicGrid::for_model(m, {5, 3, 2});
  const auto s = sample_surface(grid, [](const auto& x) { return 1.0 + 0.1 * std::sin(x[0]) + 0.01 * x[1] * x[2]; });
  std::stringstream buffer;
  write_surface_csv(buffer, grid, s.u);
  EXPECT_EQ(buffer.str().substr(0, 33), "# grid: 5,3,2; periods: 5,5,5\n0,0");
  const auto back = read_surface_csv(buffer);
  EXPECT_EQ(back.grid, grid);
  EXPECT_EQ(back.u, s.u);
}
