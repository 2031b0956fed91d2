#pragma once

// Pointwise checks of the curvature estimate along the forced flow:
// the evolution identity
//   (d/ds - Delta)(H - c) = -(H - c)(|A|^2 + Ric(nu, nu)),
// the Peter-Paul chain for the cubic term, and the differential inequality
//   (d/ds - Delta) f^2 <= -f^4/n + n eps1 eps2 c^4 + n lambda eps3,  f = H - c.

#include <cstddef>
#include <vector>

#include "cmcflow/flow.hpp"

namespace cmcflow {

struct EpsilonTriple {
  double eps1 = 8.0;
  double eps2 = 32.0;
  double eps3 = 1.0;
  int n = 1;
  double lambda = 0.0;
};

/// (8, 32, 2 n^2 lambda); eps3 = 1 with no contribution when lambda = 0.
EpsilonTriple select_epsilons(int n, double lambda);

/// Coefficient of f^4 after both Peter-Paul steps:
///   -2/n + (4/n)(1/(2 eps1) + eps1/(4 eps2)) + n lambda / eps3,
/// with the last term dropped for lambda = 0. Works for any field type,
/// e.g. boost::rational for exact checks.
template <class T>
T f4_coefficient(int n, const T& lambda, const T& eps1, const T& eps2, const T& eps3) {
  const T nn(n);
  T c = T(-2) / nn + (T(4) / nn) * (T(1) / (T(2) * eps1) + eps1 / (T(4) * eps2));
  if (lambda != T(0)) c += nn * lambda / eps3;
  return c;
}

double f4_coefficient(const EpsilonTriple& eps);

struct PeterPaulResult {
  bool ok = true;
  /// 0 when both hold, 1 for the cubic bound, 2 for the lambda bound.
  int violated = 0;
  double lhs = 0.0;
  double rhs = 0.0;
};

/// |f^3 Hs| <= f^4/(2 eps1) + (eps1/2)(f^4/(2 eps2) + eps2 Hs^4 / 2) and
/// 2 n lambda f^2 <= 2 n lambda (f^4/(2 eps3) + eps3/2), up to rounding.
PeterPaulResult peter_paul_check(double f, double Hs, const EpsilonTriple& eps);

struct EstimateReport {
  /// max |D_s f - Delta f + f (|A|^2 + Ric(nu, nu))| over checked points.
  double identity_residual = 0.0;
  /// min of RHS - LHS of the f^2 inequality.
  double inequality_margin_min = 0.0;
  /// C (ds + dx^2).
  double slack = 0.0;
  std::size_t violations = 0;
  int worst_step = 0;
  std::size_t worst_point = 0;
  std::size_t checked_steps = 0;
};

/// Runs over every snapshot whose predecessor and successor steps are also
/// present. d/ds is the material derivative along the normal trajectories:
///   D_s f = df/ds|_x + (H - c) v sum_k (u_k / a_k^2) d_k f,
/// with a three-point difference in s. Throws ArgumentError when there is
/// no such triple.
EstimateReport flow_inequality_monitor(const MultiWarpedSpacetime& model, const PeriodicGrid& grid,
                                       const std::vector<FlowSnapshot>& snapshots, const EpsilonTriple& eps,
                                       double c, double slack_constant = 1.0);

}  // namespace cmcflow
