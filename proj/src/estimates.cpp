#include "cmcflow/estimates.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "cmcflow/errors.hpp"
#include "cmcflow/stability.hpp"

namespace cmcflow {

namespace {

constexpr double kRoundoff = 1e-12;

Field gradient_dot(const MultiWarpedSpacetime& model, const PeriodicGrid& grid, const Field& u, const Field& f) {
  Field out(f.size());
  std::array<double, kMaxGridDim> du{};
  std::array<double, kMaxGridDim> df{};
  std::array<std::array<double, kMaxGridDim>, kMaxGridDim> scratch{};
  for (std::size_t i = 0; i < grid.points(); ++i) {
    const auto ii = static_cast<Eigen::Index>(i);
    grid_derivatives(grid, u, i, du, scratch);
    grid_derivatives(grid, f, i, df, scratch);
    double sum = 0.0;
    for (int k = 0; k < grid.dim(); ++k) {
      const auto ks = static_cast<std::size_t>(k);
      const double a = model.axis_scale(k, u[ii]);
      sum += du[ks] * df[ks] / (a * a);
    }
    out[ii] = sum;
  }
  return out;
}

}  // namespace

EpsilonTriple select_epsilons(int n, double lambda) {
  if (n < 1) throw ArgumentError("dimension must be positive");
  if (!(lambda >= 0.0)) throw ArgumentError("lambda must be nonnegative");
  EpsilonTriple eps;
  eps.n = n;
  eps.lambda = lambda;
  eps.eps3 = lambda > 0.0 ? 2.0 * n * n * lambda : 1.0;
  return eps;
}

double f4_coefficient(const EpsilonTriple& eps) {
  return f4_coefficient<double>(eps.n, eps.lambda, eps.eps1, eps.eps2, eps.eps3);
}

PeterPaulResult peter_paul_check(double f, double Hs, const EpsilonTriple& eps) {
  PeterPaulResult out;
  const double f2 = f * f;
  const double f4 = f2 * f2;
  const double h4 = Hs * Hs * Hs * Hs;
  const double cubic_lhs = std::abs(f2 * f * Hs);
  const double cubic_rhs = f4 / (2.0 * eps.eps1) + 0.5 * eps.eps1 * (f4 / (2.0 * eps.eps2) + 0.5 * eps.eps2 * h4);
  if (cubic_lhs > cubic_rhs * (1.0 + kRoundoff)) return {false, 1, cubic_lhs, cubic_rhs};
  const double scale = 2.0 * eps.n * eps.lambda;
  const double lambda_lhs = scale * f2;
  const double lambda_rhs = scale * (f4 / (2.0 * eps.eps3) + 0.5 * eps.eps3);
  if (lambda_lhs > lambda_rhs * (1.0 + kRoundoff)) return {false, 2, lambda_lhs, lambda_rhs};
  out.lhs = cubic_lhs;
  out.rhs = cubic_rhs;
  return out;
}

EstimateReport flow_inequality_monitor(const MultiWarpedSpacetime& model, const PeriodicGrid& grid,
                                       const std::vector<FlowSnapshot>& snapshots, const EpsilonTriple& eps,
                                       double c, double slack_constant) {
  if (model.dimension() != grid.dim()) throw ArgumentError("grid dimension does not match the model");
  const int n = model.dimension();
  const double constant = n * eps.eps1 * eps.eps2 * std::pow(c, 4) + n * eps.lambda * eps.eps3;

  EstimateReport report;
  report.inequality_margin_min = std::numeric_limits<double>::infinity();
  double ds_max = 0.0;
  std::vector<std::size_t> centers;
  for (std::size_t j = 1; j + 1 < snapshots.size(); ++j) {
    if (snapshots[j - 1].step + 1 == snapshots[j].step && snapshots[j].step + 1 == snapshots[j + 1].step)
      centers.push_back(j);
  }
  if (centers.empty()) throw ArgumentError("run record has no three consecutive snapshots");
  for (std::size_t j : centers)
    ds_max = std::max({ds_max, snapshots[j].s - snapshots[j - 1].s, snapshots[j + 1].s - snapshots[j].s});
  const double dx = grid.min_active_spacing();
  report.slack = slack_constant * (ds_max + (std::isfinite(dx) ? dx * dx : 0.0));

  for (std::size_t j : centers) {
    const GraphSurface prev{grid, snapshots[j - 1].u};
    const GraphSurface cur{grid, snapshots[j].u};
    const GraphSurface next{grid, snapshots[j + 1].u};
    const SurfaceGeometry g = induced_geometry(model, cur);
    const Field f_prev = induced_geometry(model, prev).H.array() - c;
    const Field f_next = induced_geometry(model, next).H.array() - c;
    const Field f = g.H.array() - c;

    const double h1 = snapshots[j].s - snapshots[j - 1].s;
    const double h2 = snapshots[j + 1].s - snapshots[j].s;
    auto time_derivative = [&](const Field& a, const Field& b, const Field& z) -> Field {
      return (h1 * h1 * z - h2 * h2 * a + (h2 * h2 - h1 * h1) * b) / (h1 * h2 * (h1 + h2));
    };

    const DiscreteLaplacian lap = laplace_beltrami(model, cur);
    const Field transport = f.cwiseProduct(g.v);

    const Field df = time_derivative(f_prev, f, f_next) + transport.cwiseProduct(gradient_dot(model, grid, cur.u, f));
    const Field identity = df - lap.apply(f) + f.cwiseProduct(g.A2 + g.ric_nu);

    const Field f2 = f.cwiseProduct(f);
    const Field f2_prev = f_prev.cwiseProduct(f_prev);
    const Field f2_next = f_next.cwiseProduct(f_next);
    const Field df2 =
        time_derivative(f2_prev, f2, f2_next) + transport.cwiseProduct(gradient_dot(model, grid, cur.u, f2));
    const Field lhs = df2 - lap.apply(f2);
    const Field rhs = (-f2.cwiseProduct(f2) / n).array() + constant;
    const Field margin = rhs - lhs;

    Eigen::Index worst = 0;
    const double step_min = margin.minCoeff(&worst);
    if (step_min < report.inequality_margin_min) {
      report.inequality_margin_min = step_min;
      report.worst_step = snapshots[j].step;
      report.worst_point = static_cast<std::size_t>(worst);
    }
    report.identity_residual = std::max(report.identity_residual, identity.cwiseAbs().maxCoeff());
    ++report.checked_steps;
    report.violations += static_cast<std::size_t>((margin.array() < -report.slack).count());
  }
  return report;
}

}  // namespace cmcflow
