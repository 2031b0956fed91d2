#pragma once

// Null geodesics, observer horizons and the future causal boundary of
// multiply warped models with compact flat fibers.

#include <string>
#include <vector>

#include "cmcflow/spacetime.hpp"

namespace cmcflow {

enum class Orientation { Past, Future };

/// Null geodesic parameterized by t. The momenta p_k = a_k^2 dx^k/dsigma are
/// conserved; dx^k/dt = +-p_k / (a_k^2 E) with E = sqrt(sum_j p_j^2 / a_j^2),
/// and a past-directed ray moves along +p as t decreases.
struct NullGeodesic {
  double t0 = 0.0;
  std::vector<double> x0;
  std::vector<double> momenta;
  Orientation orientation = Orientation::Past;

  std::vector<double> t;
  std::vector<std::vector<double>> x;
  /// The ray hit the end of the model interval before t_stop.
  bool truncated = false;
  /// max over samples of |g(gamma', gamma')| / (dt/dsigma)^2 with the
  /// momenta recovered from the tangent.
  double null_residual = 0.0;
  /// max over samples and axes of |p_k(recovered) - p_k| / max|p|.
  double conservation_residual = 0.0;
};

NullGeodesic null_geodesic(const MultiWarpedSpacetime& model, double t0, const std::vector<double>& x0,
                           const std::vector<double>& momenta, double t_stop, Orientation orientation);

/// \int_{t1}^{t0} a_k(t)^{-1} dt for the fiber owning spatial axis k. t0 may be
/// +inf; the value is +inf when the integral diverges.
double confinement_bound(const MultiWarpedSpacetime& model, int axis, double t1, double t0);

struct HorizonOptions {
  /// Mixed directions per axis pair in addition to the axis-aligned rays.
  int fan = 8;
  double t_cap = 1e6;
  int jobs = 1;
};

struct HorizonReport {
  bool covers_slice = false;
  /// True when the sampled rays alone reach the period on every axis.
  bool sampled_covers = false;
  double t1 = 0.0;
  /// Largest |x^k - xi^k| reached on the t1 slice by the sampled rays.
  std::vector<double> extent;
  /// sup over t0 of the reachable extent: \int_{t1}^{infinity} a_k^{-1} dt.
  std::vector<double> analytic_extent;
  std::vector<double> period;
  std::vector<double> ladder;
  std::size_t geodesics = 0;
};

/// Shoots past-directed null rays from gamma(t0) = (t0, xi) for t0 on a
/// geometric ladder up to t_cap and records how far they reach on the t1
/// slice. An axis is covered when the sampled extent reaches its period b or
/// the analytic supremum exceeds b; covers_slice requires every axis.
HorizonReport observer_horizon_test(const MultiWarpedSpacetime& model, const std::vector<double>& xi, double t1,
                                    const HorizonOptions& options = {});

struct BoundaryClass {
  std::vector<int> divergent_fibers;
  std::vector<int> convergent_fibers;
  /// \int_{t_ref}^\infty a_i^{-1} dt per fiber (+inf when divergent).
  std::vector<double> tail_integrals;
  double t_ref = 0.0;
  std::string shape;
  bool spacelike = false;
};

/// Requires t_max = +inf (DomainError otherwise).
BoundaryClass classify_boundary(const MultiWarpedSpacetime& model);

struct CompletenessReport {
  /// \int^\infty a_i dt = infinity per fiber.
  std::vector<bool> divergent;
  bool overall = false;
};

/// Requires t_max = +inf (DomainError otherwise).
CompletenessReport completeness_test(const MultiWarpedSpacetime& model);

}  // namespace cmcflow
