#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "cmcflow/spacetime.hpp"

namespace testing_support {

using cmcflow::FiberSpec;
using cmcflow::MultiWarpedSpacetime;
using cmcflow::WarpingLaw;

inline constexpr double kInf = MultiWarpedSpacetime::kInfinity;
inline constexpr double kPi = 3.14159265358979323846;

inline std::string model_path(const std::string& name) { return std::string(CMCFLOW_SOURCE_DIR) + "/models/" + name; }

/// a1 = a2 = t^{3/4}, a3 = t^{5/4} on three circles of half-width b.
inline MultiWarpedSpacetime power_law_example(double b = 5.0) {
  return MultiWarpedSpacetime(0.0, kInf,
                              {{1, b, WarpingLaw::power(0.75)},
                               {1, b, WarpingLaw::power(0.75)},
                               {1, b, WarpingLaw::power(1.25)}});
}

/// Single fiber T^n with a(t) = t^p.
inline MultiWarpedSpacetime power_model(double p, int n = 3, double b = kPi) {
  return MultiWarpedSpacetime(0.0, kInf, {{n, b, WarpingLaw::power(p)}});
}

/// a(t) = t on the circle of half-width pi.
inline MultiWarpedSpacetime flrw_linear_1d() { return power_model(1.0, 1, kPi); }

/// a(t) = exp(sqrt(lambda) t) on T^3.
inline MultiWarpedSpacetime de_sitter(double lambda = 1.0, double b = kPi) {
  return MultiWarpedSpacetime(-kInf, kInf, {{3, b, WarpingLaw::exponential(std::sqrt(lambda))}}, lambda);
}

inline MultiWarpedSpacetime minkowski(int n = 1, double b = 1.0) {
  return MultiWarpedSpacetime(-kInf, kInf, {{n, b, WarpingLaw::constant(1.0)}});
}

/// Scale factor per spatial axis, for the oracles.
inline auto axis_scales(const MultiWarpedSpacetime& m) {
  return [m](double t) {
    std::vector<double> a(static_cast<std::size_t>(m.dimension()));
    for (int k = 0; k < m.dimension(); ++k) a[static_cast<std::size_t>(k)] = m.axis_scale(k, t);
    return a;
  };
}

}  // namespace testing_support

#include "cmcflow/hypersurface.hpp"

namespace testing_support {

/// Samples f(x) at every grid node; x has one entry per grid axis.
template <class F>
cmcflow::GraphSurface sample_surface(const cmcflow::PeriodicGrid& grid, F&& f) {
  cmcflow::Field u(static_cast<Eigen::Index>(grid.points()));
  std::vector<double> x(static_cast<std::size_t>(grid.dim()));
  for (std::size_t i = 0; i < grid.points(); ++i) {
    for (int k = 0; k < grid.dim(); ++k) x[static_cast<std::size_t>(k)] = grid.coordinate(i, k);
    u[static_cast<Eigen::Index>(i)] = f(x);
  }
  return {grid, u};
}

/// max |a(i) - b(2i)| over the nodes of a 1-d grid shared with its refinement.
inline double coarse_fine_gap(const cmcflow::Field& coarse, const cmcflow::Field& fine) {
  double gap = 0.0;
  for (Eigen::Index i = 0; i < coarse.size(); ++i) gap = std::max(gap, std::abs(coarse[i] - fine[2 * i]));
  return gap;
}

}  // namespace testing_support

#include "cmcflow/stability.hpp"

namespace testing_support {

/// Central difference of H along the normal variation phi * nu, seen at fixed
/// x: the height moves by phi / v and the point slides horizontally, which
/// adds the transport term phi v sum_k (u_k / a_k^2) d_k H. Returns
/// dH/dt + L phi, which vanishes up to discretization error.
inline cmcflow::Field variation_defect(const MultiWarpedSpacetime& m, const cmcflow::GraphSurface& s,
                                       const cmcflow::Field& phi, double t = 1e-4) {
  using cmcflow::Field;
  const auto geom = cmcflow::induced_geometry(m, s);
  const Field step = phi.cwiseQuotient(geom.v);
  auto central = [&](double h) -> Field {
    const cmcflow::GraphSurface plus{s.grid, s.u + h * step};
    const cmcflow::GraphSurface minus{s.grid, s.u - h * step};
    return (cmcflow::induced_geometry(m, plus).H - cmcflow::induced_geometry(m, minus).H) / (2.0 * h);
  };
  // Richardson extrapolation in the variation parameter
  Field dH = (4.0 * central(0.5 * t) - central(t)) / 3.0;
  std::array<double, cmcflow::kMaxGridDim> du{}, dh{};
  std::array<std::array<double, cmcflow::kMaxGridDim>, cmcflow::kMaxGridDim> scratch{};
  for (std::size_t i = 0; i < s.grid.points(); ++i) {
    const auto ii = static_cast<Eigen::Index>(i);
    cmcflow::grid_derivatives(s.grid, s.u, i, du, scratch);
    cmcflow::grid_derivatives(s.grid, geom.H, i, dh, scratch);
    double transport = 0.0;
    for (int k = 0; k < s.grid.dim(); ++k) {
      const double a = m.axis_scale(k, s.u[ii]);
      transport += du[static_cast<std::size_t>(k)] * dh[static_cast<std::size_t>(k)] / (a * a);
    }
    dH[ii] += phi[ii] * geom.v[ii] * transport;
  }
  return dH + cmcflow::stability_apply(m, s, phi);
}

/// u = T + A exp(-x1^2 / w^2) with A bisected so that min H lands on
/// `target` (to 1e-12); H >= target everywhere, with equality at the crest.
inline cmcflow::GraphSurface bump_with_min_H(const MultiWarpedSpacetime& m, const cmcflow::PeriodicGrid& grid,
                                             double T, double w, double target) {
  auto surface = [&](double amp) {
    return sample_surface(grid, [&](const std::vector<double>& x) { return T + amp * std::exp(-x[0] * x[0] / (w * w)); });
  };
  auto min_h = [&](double amp) { return cmcflow::induced_geometry(m, surface(amp)).H.minCoeff(); };
  double lo = 0.0, hi = 0.05;
  while (min_h(hi) > target) hi *= 2.0;
  for (int it = 0; it < 200 && hi - lo > 1e-15; ++it) {
    const double mid = 0.5 * (lo + hi);
    (min_h(mid) >= target ? lo : hi) = mid;
  }
  return surface(lo);
}

}  // namespace testing_support
