#include "cmcflow/stability.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace cmcflow {

namespace {

using Vec = std::array<double, kMaxGridDim>;
using Mat = std::array<Vec, kMaxGridDim>;

}  // namespace

Field DiscreteLaplacian::apply(const Field& phi) const {
  return -(stiffness * phi).cwiseQuotient(weights);
}

double DiscreteLaplacian::inner(const Field& a, const Field& b) const {
  return (weights.array() * a.array() * b.array()).sum();
}

DiscreteLaplacian laplace_beltrami(const MultiWarpedSpacetime& model, const GraphSurface& surface) {
  const auto& grid = surface.grid;
  if (model.dimension() != grid.dim()) throw ArgumentError("surface grid dimension does not match the model");
  const auto n = static_cast<Eigen::Index>(grid.points());
  const auto& active = grid.active_axes();
  const int d_act = static_cast<int>(active.size());
  const int quadrants = 1 << d_act;
  const double cell = grid.cell_volume();

  DiscreteLaplacian lap;
  lap.weights.resize(n);
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(grid.points() * static_cast<std::size_t>(quadrants * (4 * d_act * d_act + 1)));

  Vec du{};
  Mat d2u{};
  for (std::size_t i = 0; i < grid.points(); ++i) {
    const auto ii = static_cast<Eigen::Index>(i);
    grid_derivatives(grid, surface.u, i, du, d2u);
    const LocalGeometry g = local_geometry(model, grid.dim(), surface.u[ii], du, d2u);
    if (!g.spacelike) throw GeometryError(i, "surface is not spacelike at grid point " + std::to_string(i));
    const double w = g.sqrt_det_h * cell;
    lap.weights[ii] = w;
    const double base = w / quadrants;

    for (int q = 0; q < quadrants; ++q) {
      std::array<Eigen::Index, kMaxGridDim> nb{};
      std::array<double, kMaxGridDim> sgn{};
      for (int a = 0; a < d_act; ++a) {
        const auto as = static_cast<std::size_t>(a);
        sgn[as] = (q >> a) & 1 ? 1.0 : -1.0;
        nb[as] = static_cast<Eigen::Index>(grid.shifted(i, active[as], static_cast<int>(sgn[as])));
      }
      for (int a = 0; a < d_act; ++a) {
        const auto as = static_cast<std::size_t>(a);
        const auto ka = static_cast<std::size_t>(active[as]);
        for (int b = 0; b < d_act; ++b) {
          const auto bs = static_cast<std::size_t>(b);
          const auto kb = static_cast<std::size_t>(active[bs]);
          const double c = base * g.hinv[ka][kb] * sgn[as] * sgn[bs] /
                           (grid.spacing(active[as]) * grid.spacing(active[bs]));
          // c (phi_na - phi_i)(phi_nb - phi_i)
          triplets.emplace_back(nb[as], nb[bs], c);
          triplets.emplace_back(ii, ii, c);
          triplets.emplace_back(nb[as], ii, -c);
          triplets.emplace_back(ii, nb[bs], -c);
        }
      }
    }
  }
  lap.stiffness.resize(n, n);
  lap.stiffness.setFromTriplets(triplets.begin(), triplets.end());
  lap.stiffness.makeCompressed();
  return lap;
}

Field StabilityOperator::apply(const Field& phi) const {
  return -laplacian.apply(phi) + potential.cwiseProduct(phi);
}

double StabilityOperator::rayleigh_quotient(const Field& phi) const {
  const double energy = phi.dot(laplacian.stiffness * phi) + laplacian.inner(potential.cwiseProduct(phi), phi);
  return energy / laplacian.inner(phi, phi);
}

StabilityOperator stability_operator(const MultiWarpedSpacetime& model, const GraphSurface& surface) {
  const SurfaceGeometry geom = induced_geometry(model, surface);
  StabilityOperator op;
  op.laplacian = laplace_beltrami(model, surface);
  op.potential = geom.ric_nu + geom.A2;
  return op;
}

Field stability_apply(const MultiWarpedSpacetime& model, const GraphSurface& surface, const Field& phi) {
  if (phi.size() != surface.u.size()) throw ArgumentError("field size does not match the surface grid");
  return stability_operator(model, surface).apply(phi);
}

EigenResult principal_eigen(const MultiWarpedSpacetime& model, const GraphSurface& surface, double tol,
                            int max_iterations) {
  const StabilityOperator op = stability_operator(model, surface);
  const auto& K = op.laplacian.stiffness;
  const Field& w = op.laplacian.weights;
  const Eigen::Index n = w.size();

  // Gershgorin lower bound of L = W^{-1} K + diag(V)
  double lower = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < n; ++i) {
    double diag = 0.0;
    double off = 0.0;
    for (Eigen::SparseMatrix<double>::InnerIterator it(K, i); it; ++it) {
      if (it.row() == i)
        diag += it.value();
      else
        off += std::abs(it.value());
    }
    lower = std::min(lower, (diag - off) / w[i] + op.potential[i]);
  }
  const double shift = lower - std::max(1e-3, 1e-3 * std::abs(lower));

  // W (L - shift) = K + W diag(V - shift), symmetric positive definite
  Eigen::SparseMatrix<double> A = K;
  for (Eigen::Index i = 0; i < n; ++i) A.coeffRef(i, i) += w[i] * (op.potential[i] - shift);
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver(A);
  if (solver.info() != Eigen::Success) throw NumericError("factorization of the shifted stability operator failed");

  EigenResult result;
  result.shift = shift;
  result.rayleigh_min = std::numeric_limits<double>::infinity();
  Field x = Field::Ones(n);
  for (int it = 1; it <= max_iterations; ++it) {
    Field y = solver.solve(w.cwiseProduct(x));
    if (!y.allFinite()) throw NumericError("inverse iteration produced non-finite values");
    Eigen::Index imax = 0;
    y.cwiseAbs().maxCoeff(&imax);
    x = y / y[imax];

    const double rq = op.rayleigh_quotient(x);
    result.rayleigh_min = std::min(result.rayleigh_min, rq);
    const double residual = (op.apply(x) - rq * x).cwiseAbs().maxCoeff();
    result.lambda1 = rq;
    result.iterations = it;
    result.residual = residual;
    if (residual <= tol) {
      result.phi1 = std::move(x);
      return result;
    }
  }
  std::ostringstream msg;
  msg << "inverse iteration did not converge in " << max_iterations << " iterations (residual "
      << result.residual << ")";
  throw NumericError(msg.str());
}

GraphSurface perturb_to_positive(const MultiWarpedSpacetime& model, const GraphSurface& surface, double eps,
                                 double h_tol) {
  if (!(eps >= 0.0)) throw ArgumentError("perturbation size must be nonnegative");
  if (eps == 0.0) return surface;

  const SurfaceGeometry geom = induced_geometry(model, surface);
  if (geom.H.minCoeff() < -h_tol) throw ArgumentError("initial surface must have H >= 0");
  const EigenResult eig = principal_eigen(model, surface);
  if (!(eig.lambda1 > 0.0)) {
    std::ostringstream msg;
    msg << "principal eigenvalue " << eig.lambda1 << " is not positive";
    throw ArgumentError(msg.str());
  }

  std::vector<double> trace;
  const Field step = eig.phi1.cwiseQuotient(geom.v);
  for (int halving = 0; halving <= 40; ++halving, eps *= 0.5) {
    GraphSurface candidate{surface.grid, surface.u - eps * step};
    if (!spacelike_check(model, candidate).spacelike) {
      trace.push_back(-std::numeric_limits<double>::infinity());
      continue;
    }
    const double min_h = induced_geometry(model, candidate).H.minCoeff();
    trace.push_back(min_h);
    if (min_h > 0.0) return candidate;
  }
  throw PerturbationError("no perturbation size produced min H > 0", std::move(trace));
}

}  // namespace cmcflow
