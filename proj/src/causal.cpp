#include "cmcflow/causal.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <sstream>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "cmcflow/errors.hpp"
#include "cmcflow/ode.hpp"

namespace cmcflow {

namespace {

double inverse_scale2(const MultiWarpedSpacetime& model, int axis, double t) {
  const double a = model.axis_scale(axis, t);
  return 1.0 / (a * a);
}

double energy(const MultiWarpedSpacetime& model, const std::vector<double>& p, double t) {
  double e2 = 0.0;
  for (std::size_t k = 0; k < p.size(); ++k) e2 += p[k] * p[k] * inverse_scale2(model, static_cast<int>(k), t);
  return std::sqrt(e2);
}

std::string superscript(int value) {
  static const char* digits[] = {"⁰", "¹", "²", "³", "⁴", "⁵", "⁶", "⁷", "⁸", "⁹"};
  const std::string plain = std::to_string(value);
  std::string out;
  for (char ch : plain) out += digits[ch - '0'];
  return out;
}

void require_future_infinite(const MultiWarpedSpacetime& model, const char* what) {
  if (std::isfinite(model.t_max())) {
    std::ostringstream msg;
    msg << what << " needs a model with t_max = infinity (got " << model.t_max() << ")";
    throw DomainError(msg.str());
  }
}

double quadrature(const std::function<double(double)>& f, double lo, double hi) {
  using boost::math::quadrature::gauss_kronrod;
  double error = 0.0;
  return gauss_kronrod<double, 61>::integrate(f, lo, hi, 20, 1e-14, &error);
}

}  // namespace

NullGeodesic null_geodesic(const MultiWarpedSpacetime& model, double t0, const std::vector<double>& x0,
                           const std::vector<double>& momenta, double t_stop, Orientation orientation) {
  const auto n = static_cast<std::size_t>(model.dimension());
  if (x0.size() != n || momenta.size() != n) throw ArgumentError("start point and momenta need one entry per axis");
  model.require_contains(t0);
  if (!std::isfinite(t_stop)) throw ArgumentError("stop time must be finite");
  if (std::all_of(momenta.begin(), momenta.end(), [](double p) { return p == 0.0; }))
    throw ArgumentError("momenta must not all vanish");
  const bool past = orientation == Orientation::Past;
  if (past ? !(t_stop < t0) : !(t_stop > t0))
    throw ArgumentError("stop time lies on the wrong side of the start for this orientation");

  NullGeodesic geo;
  geo.t0 = t0;
  geo.x0 = x0;
  geo.momenta = momenta;
  geo.orientation = orientation;

  double target = t_stop;
  if (!model.contains(t_stop)) {
    const double edge = past ? model.t_min() : model.t_max();
    target = edge + (past ? 1.0 : -1.0) * 1e-9 * std::max(1.0, std::abs(t0 - edge));
    geo.truncated = true;
  }

  // moving with +p as t decreases in the past direction
  const double sign = past ? -1.0 : 1.0;
  auto rhs = [&](const std::vector<double>& /*x*/, std::vector<double>& dx, double t) {
    const double e = energy(model, momenta, t);
    for (std::size_t k = 0; k < n; ++k)
      dx[k] = sign * momenta[k] * inverse_scale2(model, static_cast<int>(k), t) / e;
  };

  double pmax = 0.0;
  for (double p : momenta) pmax = std::max(pmax, std::abs(p));
  std::vector<double> tangent(n);
  auto record = [&](double t, const std::vector<double>& x) {
    geo.t.push_back(t);
    geo.x.push_back(x);
    // tangent with dt/dsigma = E recovers the momenta and the null condition
    rhs(x, tangent, t);
    const double e = energy(model, momenta, t);
    double spatial = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      const double a = model.axis_scale(static_cast<int>(k), t);
      const double dx_dsigma = sign * tangent[k] * e;
      spatial += a * a * dx_dsigma * dx_dsigma;
      geo.conservation_residual =
          std::max(geo.conservation_residual, std::abs(a * a * dx_dsigma - momenta[k]) / pmax);
    }
    geo.null_residual = std::max(geo.null_residual, std::abs(spatial - e * e) / (e * e));
    return true;
  };

  std::vector<double> x = x0;
  record(t0, x);
  ode::integrate(rhs, x, t0, target, 1e-3 * std::abs(target - t0), ode::Tolerance{1e-13, 1e-12}, record);
  return geo;
}

double confinement_bound(const MultiWarpedSpacetime& model, int axis, double t1, double t0) {
  if (axis < 0 || axis >= model.dimension()) throw ArgumentError("axis out of range");
  model.require_contains(t1);
  if (!(t0 > t1)) throw ArgumentError("confinement_bound needs t1 < t0");
  const WarpingLaw& law = model.fibers()[static_cast<std::size_t>(model.axis_fiber(axis))].warping;
  auto inv = [&](double t) { return 1.0 / law.value(t); };

  const bool infinite = !std::isfinite(t0);
  if (infinite && !law.inverse_integral_converges()) return MultiWarpedSpacetime::kInfinity;
  if (!infinite && t0 > model.t_max()) {
    std::ostringstream msg;
    msg << "t0 = " << t0 << " lies beyond t_max = " << model.t_max();
    throw DomainError(msg.str());
  }

  double finite_end = t0;
  if (infinite) finite_end = t1 > 0.0 ? 2.0 * t1 : t1 + 1.0;
  double value = 0.0;
  if (t1 > 0.0 && finite_end / t1 > 4.0) {
    // t = e^y spreads power-law integrands evenly over decades
    value = quadrature([&](double y) { const double t = std::exp(y); return inv(t) * t; }, std::log(t1),
                       std::log(finite_end));
  } else {
    value = quadrature(inv, t1, finite_end);
  }
  if (infinite) value += law.inverse_tail(finite_end);
  return value;
}

HorizonReport observer_horizon_test(const MultiWarpedSpacetime& model, const std::vector<double>& xi, double t1,
                                    const HorizonOptions& options) {
  const int n = model.dimension();
  if (xi.size() != static_cast<std::size_t>(n)) throw ArgumentError("base point needs one entry per axis");
  model.require_contains(t1);
  if (options.fan < 1) throw ArgumentError("fan must be at least 1");
  if (options.jobs < 1) throw ArgumentError("jobs must be at least 1");
  if (!(options.t_cap > t1)) throw ArgumentError("t_cap must exceed t1");

  HorizonReport report;
  report.t1 = t1;
  double cap = options.t_cap;
  if (!model.contains(cap)) cap = model.t_max() - 1e-9 * std::max(1.0, std::abs(model.t_max() - t1));
  for (double step = std::max(1.0, std::abs(t1));; step *= 2.0) {
    const double t0 = t1 + step;
    if (t0 >= cap) break;
    report.ladder.push_back(t0);
  }
  report.ladder.push_back(cap);

  std::vector<std::vector<double>> directions;
  for (int k = 0; k < n; ++k) {
    std::vector<double> p(static_cast<std::size_t>(n), 0.0);
    p[static_cast<std::size_t>(k)] = 1.0;
    directions.push_back(p);
  }
  for (int j = 0; j < n; ++j) {
    for (int k = j + 1; k < n; ++k) {
      for (int m = 1; m <= options.fan; ++m) {
        const double theta = 0.5 * M_PI * m / (options.fan + 1);
        std::vector<double> p(static_cast<std::size_t>(n), 0.0);
        p[static_cast<std::size_t>(j)] = std::cos(theta);
        p[static_cast<std::size_t>(k)] = std::sin(theta);
        directions.push_back(p);
      }
    }
  }

  auto shoot = [&](std::size_t begin, std::size_t end) {
    std::vector<double> extent(static_cast<std::size_t>(n), 0.0);
    for (std::size_t l = begin; l < end; ++l) {
      for (const auto& p : directions) {
        const NullGeodesic geo = null_geodesic(model, report.ladder[l], xi, p, t1, Orientation::Past);
        const auto& x = geo.x.back();
        for (std::size_t k = 0; k < extent.size(); ++k) extent[k] = std::max(extent[k], std::abs(x[k] - xi[k]));
      }
    }
    return extent;
  };

  const std::size_t rungs = report.ladder.size();
  const auto jobs = std::min<std::size_t>(static_cast<std::size_t>(options.jobs), rungs);
  std::vector<std::future<std::vector<double>>> parts;
  for (std::size_t j = 0; j < jobs; ++j) {
    const std::size_t begin = rungs * j / jobs;
    const std::size_t end = rungs * (j + 1) / jobs;
    parts.push_back(std::async(jobs > 1 ? std::launch::async : std::launch::deferred, shoot, begin, end));
  }
  report.extent.assign(static_cast<std::size_t>(n), 0.0);
  for (auto& part : parts) {
    const auto extent = part.get();
    for (std::size_t k = 0; k < extent.size(); ++k) report.extent[k] = std::max(report.extent[k], extent[k]);
  }
  report.geodesics = rungs * directions.size();

  report.covers_slice = true;
  report.sampled_covers = true;
  for (int k = 0; k < n; ++k) {
    const double b = model.fibers()[static_cast<std::size_t>(model.axis_fiber(k))].period;
    report.period.push_back(b);
    report.analytic_extent.push_back(std::isfinite(model.t_max())
                                         ? confinement_bound(model, k, t1, cap)
                                         : confinement_bound(model, k, t1, MultiWarpedSpacetime::kInfinity));
    const bool reached = report.extent[static_cast<std::size_t>(k)] >= b;
    if (!reached) report.sampled_covers = false;
    if (!reached && !(report.analytic_extent.back() > b)) report.covers_slice = false;
  }
  return report;
}

BoundaryClass classify_boundary(const MultiWarpedSpacetime& model) {
  require_future_infinite(model, "boundary classification");
  BoundaryClass out;
  out.t_ref = std::isfinite(model.t_min()) ? std::max(model.t_min() + 1.0, 1.0) : 1.0;
  std::vector<int> dims;
  for (std::size_t i = 0; i < model.fibers().size(); ++i) {
    const auto& fiber = model.fibers()[i];
    const bool converges = fiber.warping.inverse_integral_converges();
    (converges ? out.convergent_fibers : out.divergent_fibers).push_back(static_cast<int>(i));
    out.tail_integrals.push_back(converges ? fiber.warping.inverse_tail(out.t_ref) : MultiWarpedSpacetime::kInfinity);
    if (converges) dims.push_back(fiber.dim);
  }
  std::sort(dims.begin(), dims.end());
  if (dims.empty()) {
    out.shape = "point";
  } else if (dims.size() == 1 && dims.front() == 1) {
    out.shape = "T¹ (circle)";
  } else {
    for (std::size_t i = 0; i < dims.size(); ++i) out.shape += (i ? " × T" : "T") + superscript(dims[i]);
  }
  out.spacelike = true;
  return out;
}

CompletenessReport completeness_test(const MultiWarpedSpacetime& model) {
  require_future_infinite(model, "completeness test");
  CompletenessReport out;
  out.overall = true;
  for (const auto& fiber : model.fibers()) {
    const bool divergent = fiber.warping.integral_diverges();
    out.divergent.push_back(divergent);
    out.overall = out.overall && divergent;
  }
  return out;
}

}  // namespace cmcflow
