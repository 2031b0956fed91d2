#include "cmcflow/comparison.hpp"

#include <array>
#include <cmath>
#include <sstream>

#include "cmcflow/errors.hpp"

namespace cmcflow {

double mean_curvature_bound(int n, double tau, double lambda) {
  if (!(tau > 0.0)) throw ArgumentError("distance tau must be positive");
  if (!(lambda >= 0.0)) throw ArgumentError("lambda must be nonnegative");
  if (lambda == 0.0) return n / tau;
  const double root = std::sqrt(lambda);
  const double x = root * tau;
  if (x < 1e-4) return n / tau + n * lambda * tau / 3.0;  // coth x = 1/x + x/3 + O(x^3)
  return n * root / std::tanh(x);
}

RaychaudhuriTrace raychaudhuri_integrate(const ScalarFunction& ric, double H0, double u0, double u1, int n,
                                         double lambda, const ScalarFunction& sigma2, ode::Tolerance tol) {
  if (!(u0 > 0.0) || !(u1 > u0)) throw ArgumentError("Raychaudhuri integration needs 0 < u0 < u1");
  if (n < 1) throw ArgumentError("dimension must be positive");
  if (!std::isfinite(H0)) throw ArgumentError("initial mean curvature must be finite");

  using State = std::array<double, 1>;
  auto rhs = [&](const State& y, State& dy, double u) {
    const double r = ric(u);
    const double s = sigma2 ? sigma2(u) : 0.0;
    if (!std::isfinite(r) || !std::isfinite(s)) {
      std::ostringstream msg;
      msg << "non-finite Ricci or shear input at u = " << u;
      throw ArgumentError(msg.str());
    }
    dy[0] = -r - y[0] * y[0] / n - s;
  };

  RaychaudhuriTrace trace;
  auto record = [&](double u, double H) {
    trace.u.push_back(u);
    trace.H.push_back(H);
    trace.bound.push_back(mean_curvature_bound(n, u, lambda));
  };
  record(u0, H0);

  const double blowup_level = -1e8 * (1.0 + std::abs(H0));
  State y{H0};
  const double dt0 = 1e-3 * (u1 - u0);
  try {
    ode::integrate(rhs, y, u0, u1, dt0, tol, [&](double u, const State& s) {
      record(u, s[0]);
      if (s[0] < blowup_level) {
        trace.blew_up = true;
        // H ~ -n / (u_focal - u) near the focal point
        trace.blowup_u = u + n / std::abs(s[0]);
        return false;
      }
      return true;
    });
  } catch (const NumericError&) {
    if (trace.H.back() > -1e3 * (1.0 + std::abs(H0))) throw;
    trace.blew_up = true;
    trace.blowup_u = trace.u.back() + n / std::abs(trace.H.back());
  }
  return trace;
}

BarrierCertificate distance_sphere_slice(const MultiWarpedSpacetime& model, double t0, double tau) {
  if (!(tau > 0.0)) throw ArgumentError("distance tau must be positive");
  model.require_contains(t0);
  if (!model.contains(t0 + tau)) {
    std::ostringstream msg;
    msg << "distance sphere at tau = " << tau << " from t0 = " << t0 << " leaves the model";
    throw DomainError(msg.str());
  }
  BarrierCertificate cert;
  cert.tau = tau;
  cert.n = model.dimension();
  cert.lambda = model.lambda();
  cert.bound = mean_curvature_bound(cert.n, tau, cert.lambda);
  cert.t_slice = t0 + tau;
  cert.slice_H = model.slice_mean_curvature(cert.t_slice);
  return cert;
}

ExistenceTime future_existence_time(const MultiWarpedSpacetime& model, double t0, std::optional<double> c) {
  model.require_contains(t0);
  ExistenceTime out;
  out.T0 = model.t_max() - t0;
  if (c) {
    if (!(*c > 0.0)) throw ArgumentError("forcing constant must be positive");
    out.sufficient = out.T0 > model.dimension() / *c;
  }
  return out;
}

BarrierPair barrier_pair_select(const MultiWarpedSpacetime& model, double c, double t_ref) {
  if (!(c > 0.0)) throw ArgumentError("forcing constant must be positive");
  model.require_contains(t_ref);
  const int n = model.dimension();
  const double lambda = model.lambda();

  BarrierPair pair;
  pair.t1 = t_ref;
  pair.H1 = model.slice_mean_curvature(t_ref);
  if (!(pair.H1 > c)) {
    std::ostringstream msg;
    msg << "lower barrier slice t = " << t_ref << " has H = " << pair.H1 << ", not above c = " << c;
    throw DomainError(msg.str());
  }

  double tau = 0.0;
  if (lambda == 0.0) {
    tau = 2.0 * n / c;  // bound n/tau = c/2
  } else {
    const double asymptote = n * std::sqrt(lambda);
    if (!(c > asymptote)) {
      std::ostringstream msg;
      msg << "no upper barrier: c = " << c << " does not exceed n sqrt(lambda) = " << asymptote;
      throw DomainError(msg.str());
    }
    const double target = 0.5 * c > asymptote ? 0.5 * c : 0.5 * (c + asymptote);
    const double y = target / asymptote;
    tau = 0.5 * std::log((y + 1.0) / (y - 1.0)) / std::sqrt(lambda);  // arcoth(y) / sqrt(lambda)
  }
  pair.upper = distance_sphere_slice(model, t_ref, tau);
  return pair;
}

}  // namespace cmcflow
