#pragma once

// Raychaudhuri comparison: mean-curvature bounds for Lorentzian distance
// spheres, future existence time and barrier selection for the flow.

#include <functional>
#include <optional>
#include <vector>

#include "cmcflow/ode.hpp"
#include "cmcflow/spacetime.hpp"

namespace cmcflow {

/// Support-sense mean curvature bound of the distance sphere S_tau:
/// n / tau for lambda = 0, n sqrt(lambda) coth(sqrt(lambda) tau) otherwise.
/// Throws ArgumentError for tau <= 0 or lambda < 0.
double mean_curvature_bound(int n, double tau, double lambda = 0.0);

struct RaychaudhuriTrace {
  std::vector<double> u;
  std::vector<double> H;
  /// mean_curvature_bound(n, u, lambda) at each sample.
  std::vector<double> bound;
  /// H -> -infinity in finite u (focal point).
  bool blew_up = false;
  double blowup_u = 0.0;
};

using ScalarFunction = std::function<double(double)>;

/// Integrates the equality case dH/du = -ric(u) - H^2/n - sigma2(u) from
/// H(u0) = H0 to u1 > u0 with an adaptive 5(4) pair.
RaychaudhuriTrace raychaudhuri_integrate(const ScalarFunction& ric, double H0, double u0, double u1, int n,
                                         double lambda = 0.0, const ScalarFunction& sigma2 = {},
                                         ode::Tolerance tol = {1e-13, 1e-11});

struct BarrierCertificate {
  double tau = 0.0;
  int n = 0;
  double lambda = 0.0;
  double bound = 0.0;
  /// Height of S_tau; in a warped model it is the slice t0 + tau.
  double t_slice = 0.0;
  /// Mean curvature of the actual slice at t_slice.
  double slice_H = 0.0;
};

/// The distance sphere of the t0-slice at distance tau, which in a warped
/// model is the slice t0 + tau. Throws DomainError if it leaves the model.
BarrierCertificate distance_sphere_slice(const MultiWarpedSpacetime& model, double t0, double tau);

struct ExistenceTime {
  /// t_max - t0 (+inf for future-complete models).
  double T0 = 0.0;
  /// T0 > n / c, when a forcing constant was given.
  std::optional<bool> sufficient;
};

ExistenceTime future_existence_time(const MultiWarpedSpacetime& model, double t0,
                                    std::optional<double> c = std::nullopt);

struct BarrierPair {
  double t1 = 0.0;
  /// H of the t1-slice, strictly above c.
  double H1 = 0.0;
  BarrierCertificate upper;
};

/// Lower barrier t1 = t_ref and upper barrier S_tau with bound below c.
/// Target bound is c/2 (lambda = 0), or c/2 when it exceeds n sqrt(lambda)
/// and (c + n sqrt(lambda))/2 otherwise. Throws DomainError when the t_ref
/// slice has H <= c, when c <= n sqrt(lambda), or when t_ref + tau leaves the model.
BarrierPair barrier_pair_select(const MultiWarpedSpacetime& model, double c, double t_ref);

}  // namespace cmcflow
