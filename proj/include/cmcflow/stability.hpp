#pragma once

// Stability operator L phi = -Delta phi + (Ric(nu,nu) + H^2/n + sigma^2) phi on a
// graph surface, its principal eigenpair, and the past-directed normal
// perturbation along the principal eigenfunction.

#include <vector>

#include <Eigen/Sparse>

#include "cmcflow/errors.hpp"
#include "cmcflow/hypersurface.hpp"

namespace cmcflow {

/// Divergence-form Laplace-Beltrami operator of the induced metric.
///
/// The Dirichlet energy sum_i w_i <grad phi, grad phi>_h is evaluated with
/// one-sided differences averaged over the 2^d quadrants around each node, so
/// Delta = -W^{-1} K with K symmetric positive semidefinite and
/// w_i = sqrt(det h_i) * cell volume. In 1-d it reduces to the standard
/// three-point flux stencil with face-averaged coefficients.
struct DiscreteLaplacian {
  Eigen::SparseMatrix<double> stiffness;
  Field weights;

  Field apply(const Field& phi) const;
  /// <a, b>_h = sum_i w_i a_i b_i
  double inner(const Field& a, const Field& b) const;
};

DiscreteLaplacian laplace_beltrami(const MultiWarpedSpacetime& model, const GraphSurface& surface);

struct StabilityOperator {
  DiscreteLaplacian laplacian;
  /// Ric(nu, nu) + H^2/n + sigma^2 = Ric(nu, nu) + |A|^2.
  Field potential;

  Field apply(const Field& phi) const;
  double rayleigh_quotient(const Field& phi) const;
};

StabilityOperator stability_operator(const MultiWarpedSpacetime& model, const GraphSurface& surface);

Field stability_apply(const MultiWarpedSpacetime& model, const GraphSurface& surface, const Field& phi);

struct EigenResult {
  double lambda1 = 0.0;
  /// Positive, normalized to max = 1.
  Field phi1;
  int iterations = 0;
  /// max |L phi1 - lambda1 phi1|
  double residual = 0.0;
  /// Smallest Rayleigh quotient seen over the iteration history.
  double rayleigh_min = 0.0;
  double shift = 0.0;
};

/// Inverse power iteration shifted below the Gershgorin lower bound.
/// Throws NumericError (with the residual) when it does not converge.
EigenResult principal_eigen(const MultiWarpedSpacetime& model, const GraphSurface& surface,
                            double tol = 1e-9, int max_iterations = 5000);

class PerturbationError : public NumericError {
 public:
  PerturbationError(const std::string& what, std::vector<double> min_H_trace)
      : NumericError(what), trace_(std::move(min_H_trace)) {}
  const std::vector<double>& min_H_trace() const { return trace_; }

 private:
  std::vector<double> trace_;
};

/// Pushes the surface to the past along -eps * phi1 * nu. As a graph this is
/// u - eps * phi1 / v (the height change of a normal variation seen at fixed x).
/// Halves eps up to 40 times until min H > 0.
GraphSurface perturb_to_positive(const MultiWarpedSpacetime& model, const GraphSurface& surface, double eps,
                                 double h_tol = 1e-8);

}  // namespace cmcflow
