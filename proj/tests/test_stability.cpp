#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "cmcflow/errors.hpp"
#include "cmcflow/stability.hpp"
#include "support.hpp"

using namespace cmcflow;
using namespace testing_support;

namespace {

MultiWarpedSpacetime flrw3() { return power_model(1.0, 3, kPi); }

GraphSurface wavy(const MultiWarpedSpacetime& m, int N, double amp = 0.1) {
  return sample_surface(PeriodicGrid::for_model(m, {N}), [&](const auto& x) { return 1.2 + amp * std::sin(x[0]); });
}

Field random_smooth(const PeriodicGrid& grid, std::mt19937_64& rng) {
  std::normal_distribution<double> normal;
  const double a = normal(rng), b = normal(rng), c = normal(rng), d = normal(rng);
  Field phi(static_cast<Eigen::Index>(grid.points()));
  for (std::size_t i = 0; i < grid.points(); ++i) {
    const double x = kPi * grid.coordinate(i, 0) / grid.half_width(0);
    phi[static_cast<Eigen::Index>(i)] = a + b * std::sin(x) + c * std::cos(2.0 * x) + d * std::sin(3.0 * x);
  }
  return phi;
}

}  // namespace

TEST(StabilityApply, ConstantGraphPotential) {
  const auto m = flrw3();
  for (double t : {0.5, 2.0, 3.0}) {
    const auto s = GraphSurface::constant(PeriodicGrid::for_model(m, {16}), t);
    const Field L1 = stability_apply(m, s, Field::Ones(16));
    EXPECT_LT((L1.array() - 3.0 / (t * t)).abs().maxCoeff(), 1e-13);
  }
}

TEST(StabilityApply, FlatSliceHasZeroPotential) {
  const auto m = minkowski(2, 1.0);
  const auto s = GraphSurface::constant(PeriodicGrid::for_model(m, {8, 8}), 0.0);
  EXPECT_EQ(stability_apply(m, s, Field::Ones(64)).cwiseAbs().maxCoeff(), 0.0);
}

TEST(StabilityApply, Linearity) {
  const auto m = power_law_example(2.0);
  const auto grid = PeriodicGrid::for_model(m, {10, 8, 6});
  const auto s = sample_surface(grid, [](const auto& x) { return 1.5 + 0.1 * std::sin(kPi * x[0] / 2) * std::cos(kPi * x[2] / 2); });
  std::mt19937_64 rng(2);
  std::normal_distribution<double> normal;
  Field a(grid.points()), b(grid.points());
  for (Eigen::Index i = 0; i < a.size(); ++i) a[i] = normal(rng), b[i] = normal(rng);
  const Field lhs = stability_apply(m, s, a + b);
  const Field rhs = stability_apply(m, s, a) + stability_apply(m, s, b);
  EXPECT_LT((lhs - rhs).cwiseAbs().maxCoeff(), 1e-12 * rhs.cwiseAbs().maxCoeff());
}

TEST(StabilityOperator, SelfAdjointInInducedMeasure) {
  const auto m = power_law_example(2.0);
  const auto grid = PeriodicGrid::for_model(m, {10, 8, 6});
  const auto s = sample_surface(grid, [](const auto& x) {
    return 1.5 + 0.15 * std::sin(kPi * x[0] / 2) * std::cos(kPi * x[1] / 2) + 0.05 * std::sin(kPi * x[2]);
  });
  const auto L = stability_operator(m, s);
  std::mt19937_64 rng(4);
  std::normal_distribution<double> normal;
  for (int trial = 0; trial < 10; ++trial) {
    Field phi(grid.points()), chi(grid.points());
    for (Eigen::Index i = 0; i < phi.size(); ++i) phi[i] = normal(rng), chi[i] = normal(rng);
    const double a = L.laplacian.inner(L.apply(phi), chi);
    const double b = L.laplacian.inner(phi, L.apply(chi));
    EXPECT_NEAR(a, b, 1e-10 * std::max(1.0, std::abs(a)));
  }
}

TEST(PrincipalEigen, ConstantGraphInLinearExpansion) {
  const auto m = flrw3();
  const auto eig = principal_eigen(m, GraphSurface::constant(PeriodicGrid::for_model(m, {64}), 2.0));
  EXPECT_NEAR(eig.lambda1, 0.75, 1e-8);
  EXPECT_LT((eig.phi1.array() - 1.0).abs().maxCoeff(), 1e-8);
  EXPECT_LE(eig.residual, 1e-9);
}

TEST(PrincipalEigen, FlatSliceHasZeroEigenvalue) {
  const auto m = minkowski(1, 1.0);
  const auto eig = principal_eigen(m, GraphSurface::constant(PeriodicGrid::for_model(m, {32}), 0.0));
  EXPECT_NEAR(eig.lambda1, 0.0, 1e-10);
  EXPECT_LT((eig.phi1.array() - 1.0).abs().maxCoeff(), 1e-8);
}

TEST(PrincipalEigen, LowerBoundForRayleighQuotients) {
  const auto m = flrw3();
  const auto s = wavy(m, 64, 0.2);
  const auto eig = principal_eigen(m, s);
  EXPECT_GT(eig.phi1.minCoeff(), 0.0);
  EXPECT_NEAR(eig.phi1.maxCoeff(), 1.0, 1e-15);
  const auto L = stability_operator(m, s);
  EXPECT_NEAR(L.rayleigh_quotient(eig.phi1), eig.lambda1, 1e-8);
  EXPECT_NEAR(eig.rayleigh_min, eig.lambda1, 1e-8);
  std::mt19937_64 rng(8);
  std::normal_distribution<double> normal;
  for (int trial = 0; trial < 1000; ++trial) {
    Field phi(64);
    for (Eigen::Index i = 0; i < phi.size(); ++i) phi[i] = normal(rng);
    if (trial % 2 == 0) phi += 3.0 * eig.phi1;
    EXPECT_GE(L.rayleigh_quotient(phi), eig.lambda1 - 1e-8);
  }
}

TEST(PrincipalEigen, PositiveOnNonnegativeBumpSurface) {
  const auto m = power_law_example();
  const auto s = bump_with_min_H(m, PeriodicGrid::for_model(m, {128}), 1.0, 0.3, 0.0);
  const auto geom = induced_geometry(m, s);
  EXPECT_GE(geom.H.minCoeff(), 0.0);
  EXPECT_LT(geom.H.minCoeff(), 1e-10);
  const auto eig = principal_eigen(m, s);
  EXPECT_GT(eig.lambda1, 0.0);
  EXPECT_GT(eig.phi1.minCoeff(), 0.0);
}

TEST(VariationIdentity, MatchesFiniteDifferencesOfMeanCurvature) {
  const auto m = flrw3();
  const auto s = wavy(m, 256);
  std::mt19937_64 rng(12);
  for (int trial = 0; trial < 5; ++trial) {
    const Field phi = random_smooth(s.grid, rng);
    const Field Lphi = stability_apply(m, s, phi);
    const Field defect = variation_defect(m, s, phi);
    EXPECT_LT(defect.cwiseAbs().maxCoeff(), 1e-4 * Lphi.cwiseAbs().maxCoeff()) << "trial " << trial;
  }
}

TEST(VariationIdentity, DefectIsSecondOrderInTheGrid) {
  const auto m = flrw3();
  std::vector<double> errs;
  for (int N : {64, 128, 256}) {
    const auto s = wavy(m, N);
    Field phi(N);
    for (int i = 0; i < N; ++i) phi[i] = 1.0 + 0.3 * std::cos(2.0 * s.grid.coordinate(i, 0));
    errs.push_back(variation_defect(m, s, phi).cwiseAbs().maxCoeff());
  }
  EXPECT_GT(errs[0] / errs[1], 3.5);
  EXPECT_GT(errs[1] / errs[2], 3.5);
}

TEST(PerturbToPositive, AlreadyPositiveSurfaceStaysPositive) {
  const auto m = flrw3();
  const auto s = GraphSurface::constant(PeriodicGrid::for_model(m, {32}), 2.0);
  const auto out = perturb_to_positive(m, s, 0.05);
  EXPECT_GT(induced_geometry(m, out).H.minCoeff(), 0.0);
  EXPECT_LT(out.u.maxCoeff(), 2.0);
}

TEST(PerturbToPositive, ZeroEpsilonIsIdentity) {
  const auto m = flrw3();
  const auto s = wavy(m, 32);
  EXPECT_EQ(perturb_to_positive(m, s, 0.0).u, s.u);
}

TEST(PerturbToPositive, BumpSurfaceBecomesStrictlyPositive) {
  const auto m = power_law_example();
  const auto s = bump_with_min_H(m, PeriodicGrid::for_model(m, {128}), 1.0, 0.3, 0.0);
  const auto out = perturb_to_positive(m, s, 0.05);
  EXPECT_GT(induced_geometry(m, out).H.minCoeff(), 0.0);
  // first-order prediction: min H grows by about eps * lambda1 * phi1
  EXPECT_TRUE((out.u.array() <= s.u.array()).all());
}

TEST(PerturbToPositive, ExhaustedEpsilonReportsTrace) {
  const auto m = power_law_example();
  const auto s = bump_with_min_H(m, PeriodicGrid::for_model(m, {64}), 1.0, 0.3, -5e-9);
  try {
    perturb_to_positive(m, s, 1e-20);
    FAIL() << "expected PerturbationError";
  } catch (const PerturbationError& e) {
    EXPECT_EQ(e.min_H_trace().size(), 41u);
    for (double h : e.min_H_trace()) EXPECT_LT(h, 0.0);
  }
}

TEST(PerturbToPositive, RejectsNonPositiveEigenvalue) {
  const auto m = minkowski(1, 1.0);
  const auto s = GraphSurface::constant(PeriodicGrid::for_model(m, {16}), 0.0);
  EXPECT_THROW(perturb_to_positive(m, s, 0.1), ArgumentError);
}
