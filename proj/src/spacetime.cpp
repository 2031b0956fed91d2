#include "cmcflow/spacetime.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "cmcflow/errors.hpp"

namespace cmcflow {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

}  // namespace

WarpingLaw::WarpingLaw(Variant law) : law_(law) {
  std::visit(Overloaded{
                 [](const PowerLaw& l) {
                   if (!std::isfinite(l.exponent)) throw ArgumentError("power law exponent must be finite");
                 },
                 [](const ExponentialLaw& l) {
                   if (!std::isfinite(l.rate)) throw ArgumentError("exponential rate must be finite");
                 },
                 [](const ConstantLaw& l) {
                   if (!(l.value > 0.0) || !std::isfinite(l.value))
                     throw ArgumentError("constant warping must be positive");
                 },
                 [](const SinhLaw& l) {
                   if (!(l.rate > 0.0) || !std::isfinite(l.rate))
                     throw ArgumentError("sinh rate must be positive");
                 },
             },
             law_);
}

double WarpingLaw::value(double t) const {
  return std::visit(Overloaded{
                        [t](const PowerLaw& l) { return std::pow(t, l.exponent); },
                        [t](const ExponentialLaw& l) { return std::exp(l.rate * t); },
                        [](const ConstantLaw& l) { return l.value; },
                        [t](const SinhLaw& l) { return std::sinh(l.rate * t); },
                    },
                    law_);
}

double WarpingLaw::first_derivative(double t) const {
  return std::visit(Overloaded{
                        [t](const PowerLaw& l) { return l.exponent * std::pow(t, l.exponent - 1.0); },
                        [t](const ExponentialLaw& l) { return l.rate * std::exp(l.rate * t); },
                        [](const ConstantLaw&) { return 0.0; },
                        [t](const SinhLaw& l) { return l.rate * std::cosh(l.rate * t); },
                    },
                    law_);
}

double WarpingLaw::second_derivative(double t) const {
  return std::visit(Overloaded{
                        [t](const PowerLaw& l) {
                          return l.exponent * (l.exponent - 1.0) * std::pow(t, l.exponent - 2.0);
                        },
                        [t](const ExponentialLaw& l) { return l.rate * l.rate * std::exp(l.rate * t); },
                        [](const ConstantLaw&) { return 0.0; },
                        [t](const SinhLaw& l) { return l.rate * l.rate * std::sinh(l.rate * t); },
                    },
                    law_);
}

double WarpingLaw::hubble(double t) const {
  return std::visit(Overloaded{
                        [t](const PowerLaw& l) { return l.exponent / t; },
                        [](const ExponentialLaw& l) { return l.rate; },
                        [](const ConstantLaw&) { return 0.0; },
                        [t](const SinhLaw& l) { return l.rate / std::tanh(l.rate * t); },
                    },
                    law_);
}

double WarpingLaw::acceleration(double t) const {
  return std::visit(Overloaded{
                        [t](const PowerLaw& l) { return l.exponent * (l.exponent - 1.0) / (t * t); },
                        [](const ExponentialLaw& l) { return l.rate * l.rate; },
                        [](const ConstantLaw&) { return 0.0; },
                        [](const SinhLaw& l) { return l.rate * l.rate; },
                    },
                    law_);
}

double WarpingLaw::natural_lower_bound() const {
  return std::visit(Overloaded{
                        [](const PowerLaw&) { return 0.0; },
                        [](const ExponentialLaw&) { return -MultiWarpedSpacetime::kInfinity; },
                        [](const ConstantLaw&) { return -MultiWarpedSpacetime::kInfinity; },
                        [](const SinhLaw&) { return 0.0; },
                    },
                    law_);
}

bool WarpingLaw::inverse_integral_converges() const {
  return std::visit(Overloaded{
                        [](const PowerLaw& l) { return l.exponent > 1.0; },
                        [](const ExponentialLaw& l) { return l.rate > 0.0; },
                        [](const ConstantLaw&) { return false; },
                        [](const SinhLaw&) { return true; },
                    },
                    law_);
}

bool WarpingLaw::integral_diverges() const {
  return std::visit(Overloaded{
                        [](const PowerLaw& l) { return l.exponent >= -1.0; },
                        [](const ExponentialLaw& l) { return l.rate >= 0.0; },
                        [](const ConstantLaw&) { return true; },
                        [](const SinhLaw&) { return true; },
                    },
                    law_);
}

double WarpingLaw::inverse_tail(double T) const {
  constexpr double inf = MultiWarpedSpacetime::kInfinity;
  if (!inverse_integral_converges()) return inf;
  return std::visit(Overloaded{
                        [T](const PowerLaw& l) {
                          return std::pow(T, 1.0 - l.exponent) / (l.exponent - 1.0);
                        },
                        [T](const ExponentialLaw& l) { return std::exp(-l.rate * T) / l.rate; },
                        [](const ConstantLaw&) { return inf; },
                        // d/dT log(tanh(rT/2)) = r / sinh(rT)
                        [T](const SinhLaw& l) { return -std::log(std::tanh(0.5 * l.rate * T)) / l.rate; },
                    },
                    law_);
}

std::string WarpingLaw::describe() const {
  std::ostringstream out;
  std::visit(Overloaded{
                 [&](const PowerLaw& l) { out << "t^" << l.exponent; },
                 [&](const ExponentialLaw& l) { out << "exp(" << l.rate << " t)"; },
                 [&](const ConstantLaw& l) { out << l.value; },
                 [&](const SinhLaw& l) { out << "sinh(" << l.rate << " t)"; },
             },
             law_);
  return out.str();
}

MultiWarpedSpacetime::MultiWarpedSpacetime(double t_min, double t_max, std::vector<FiberSpec> fibers,
                                           double lambda)
    : t_min_(t_min), t_max_(t_max), fibers_(std::move(fibers)), lambda_(lambda) {
  if (fibers_.empty()) throw ArgumentError("model needs at least one fiber");
  if (std::isnan(t_min_) || std::isnan(t_max_) || !(t_min_ < t_max_))
    throw ArgumentError("model interval requires t_min < t_max");
  if (!(lambda_ >= 0.0) || !std::isfinite(lambda_)) throw ArgumentError("lambda must be >= 0");
  for (std::size_t i = 0; i < fibers_.size(); ++i) {
    const auto& f = fibers_[i];
    if (f.dim < 1) throw ArgumentError("fiber " + std::to_string(i) + ": dimension must be >= 1");
    if (!(f.period > 0.0) || !std::isfinite(f.period))
      throw ArgumentError("fiber " + std::to_string(i) + ": period must be > 0");
    if (t_min_ < f.warping.natural_lower_bound())
      throw ArgumentError("fiber " + std::to_string(i) + ": warping " + f.warping.describe() +
                          " is not positive on the whole interval");
    for (int k = 0; k < f.dim; ++k) axis_fiber_.push_back(static_cast<int>(i));
  }
}

void MultiWarpedSpacetime::require_contains(double t) const {
  if (!contains(t)) {
    std::ostringstream msg;
    msg << "t = " << t << " outside the model interval (" << t_min_ << ", " << t_max_ << ")";
    throw DomainError(msg.str());
  }
}

double MultiWarpedSpacetime::slice_mean_curvature(double t) const {
  double h = 0.0;
  for (const auto& f : fibers_) h += f.dim * f.warping.hubble(t);
  return h;
}

double MultiWarpedSpacetime::slice_second_fundamental_norm(double t) const {
  double a2 = 0.0;
  for (const auto& f : fibers_) {
    const double hub = f.warping.hubble(t);
    a2 += f.dim * hub * hub;
  }
  return a2;
}

MultiWarpedSpacetime MultiWarpedSpacetime::with_scaled_periods(double factor) const {
  auto fibers = fibers_;
  for (auto& f : fibers) f.period *= factor;
  return {t_min_, t_max_, std::move(fibers), lambda_};
}

RicciDiagonal ricci_diagonal(const MultiWarpedSpacetime& model, double t) {
  model.require_contains(t);
  const auto& fibers = model.fibers();
  RicciDiagonal ric;
  ric.fiber.reserve(fibers.size());

  double expansion = 0.0;
  for (const auto& f : fibers) {
    ric.r0 -= f.dim * f.warping.acceleration(t);
    expansion += f.dim * f.warping.hubble(t);
  }
  // R_{kk} in the orthonormal frame of a diagonal metric -dt^2 + sum A_k^2 dx_k^2:
  // A_k''/A_k + (A_k'/A_k) * sum_{j != k} A_j'/A_j.
  for (const auto& f : fibers) {
    const double hub = f.warping.hubble(t);
    ric.fiber.push_back(f.warping.acceleration(t) + hub * (expansion - hub));
  }
  if (!std::isfinite(ric.r0) ||
      std::any_of(ric.fiber.begin(), ric.fiber.end(), [](double r) { return !std::isfinite(r); }))
    throw NumericError("non-finite Ricci component");
  return ric;
}

EnergyConditionReport check_energy_condition(const MultiWarpedSpacetime& model, double lambda,
                                             std::span<const double> t_samples) {
  if (t_samples.empty()) throw ArgumentError("energy condition check needs at least one sample");
  if (!(lambda >= 0.0)) throw ArgumentError("lambda must be >= 0");
  const double n = model.dimension();

  EnergyConditionReport report;
  report.samples = t_samples.size();
  for (double t : t_samples) {
    const auto ric = ricci_diagonal(model, t);
    double scale = std::abs(ric.r0) + n * lambda;
    double sample_margin = ric.r0 + n * lambda;
    int sample_fiber = -1;
    for (std::size_t i = 0; i < ric.fiber.size(); ++i) {
      scale = std::max(scale, std::abs(ric.fiber[i]));
      if (ric.r0 + ric.fiber[i] < sample_margin) {
        sample_margin = ric.r0 + ric.fiber[i];
        sample_fiber = static_cast<int>(i);
      }
    }
    if (sample_margin < report.worst_margin) {
      report.worst_margin = sample_margin;
      report.worst_t = t;
      report.worst_fiber = sample_fiber;
    }
    // equality cases (de Sitter) sit at zero up to rounding of the inputs
    if (sample_margin < -1e-12 * scale) report.pass = false;
  }
  return report;
}

namespace {

double require_number(const nlohmann::json& doc, const std::string& key, const std::string& path) {
  if (!doc.contains(key)) throw ModelParseError(path + key, "missing required key");
  const auto& v = doc.at(key);
  if (!v.is_number()) throw ModelParseError(path + key, "expected a number");
  return v.get<double>();
}

double bound_or_null(const nlohmann::json& doc, const std::string& key, double fallback) {
  if (!doc.contains(key) || doc.at(key).is_null()) return fallback;
  if (!doc.at(key).is_number()) throw ModelParseError(key, "expected a number or null");
  return doc.at(key).get<double>();
}

WarpingLaw parse_law(const nlohmann::json& law, const std::string& path) {
  if (!law.is_object()) throw ModelParseError(path, "expected an object");
  if (!law.contains("type") || !law.at("type").is_string())
    throw ModelParseError(path + ".type", "expected one of power, exponential, constant, sinh");
  const auto type = law.at("type").get<std::string>();
  const std::string prefix = path + ".";
  try {
    if (type == "power") return WarpingLaw::power(require_number(law, "p", prefix));
    if (type == "exponential") return WarpingLaw::exponential(require_number(law, "rate", prefix));
    if (type == "constant") return WarpingLaw::constant(require_number(law, "value", prefix));
    if (type == "sinh") return WarpingLaw::sinh(require_number(law, "rate", prefix));
  } catch (const ArgumentError& e) {
    throw ModelParseError(path, e.what());
  }
  throw ModelParseError(path + ".type", "unknown warping law '" + type + "'");
}

}  // namespace

MultiWarpedSpacetime model_from_json(const nlohmann::json& doc) {
  if (!doc.is_object()) throw ModelParseError("<root>", "expected a JSON object");
  const double t_min = bound_or_null(doc, "t_min", -MultiWarpedSpacetime::kInfinity);
  const double t_max = bound_or_null(doc, "t_max", MultiWarpedSpacetime::kInfinity);
  double lambda = 0.0;
  if (doc.contains("lambda")) {
    if (!doc.at("lambda").is_number()) throw ModelParseError("lambda", "expected a number");
    lambda = doc.at("lambda").get<double>();
    if (lambda < 0.0) throw ModelParseError("lambda", "must be >= 0");
  }
  if (!doc.contains("fibers")) throw ModelParseError("fibers", "missing required key");
  const auto& fibers_doc = doc.at("fibers");
  if (!fibers_doc.is_array() || fibers_doc.empty())
    throw ModelParseError("fibers", "expected a nonempty array");

  std::vector<FiberSpec> fibers;
  for (std::size_t i = 0; i < fibers_doc.size(); ++i) {
    const std::string path = "fibers[" + std::to_string(i) + "]";
    const auto& f = fibers_doc[i];
    if (!f.is_object()) throw ModelParseError(path, "expected an object");
    FiberSpec spec;
    if (!f.contains("dim") || !f.at("dim").is_number_integer())
      throw ModelParseError(path + ".dim", "expected a positive integer");
    spec.dim = f.at("dim").get<int>();
    if (spec.dim < 1) throw ModelParseError(path + ".dim", "expected a positive integer");
    spec.period = require_number(f, "period", path + ".");
    if (!(spec.period > 0.0)) throw ModelParseError(path + ".period", "must be > 0");
    if (!f.contains("law")) throw ModelParseError(path + ".law", "missing required key");
    spec.warping = parse_law(f.at("law"), path + ".law");
    fibers.push_back(spec);
  }
  try {
    return {t_min, t_max, std::move(fibers), lambda};
  } catch (const ArgumentError& e) {
    throw ModelParseError("<model>", e.what());
  }
}

MultiWarpedSpacetime load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ModelParseError("<file>", "cannot open model file " + path);
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::parse_error& e) {
    throw ModelParseError("<json>", e.what());
  }
  return model_from_json(doc);
}

nlohmann::json model_to_json(const MultiWarpedSpacetime& model) {
  auto bound = [](double t) -> nlohmann::json {
    if (std::isinf(t)) return nullptr;
    return t;
  };
  nlohmann::json doc;
  doc["t_min"] = bound(model.t_min());
  doc["t_max"] = bound(model.t_max());
  doc["lambda"] = model.lambda();
  doc["fibers"] = nlohmann::json::array();
  for (const auto& f : model.fibers()) {
    nlohmann::json law = std::visit(
        Overloaded{
            [](const PowerLaw& l) { return nlohmann::json{{"type", "power"}, {"p", l.exponent}}; },
            [](const ExponentialLaw& l) { return nlohmann::json{{"type", "exponential"}, {"rate", l.rate}}; },
            [](const ConstantLaw& l) { return nlohmann::json{{"type", "constant"}, {"value", l.value}}; },
            [](const SinhLaw& l) { return nlohmann::json{{"type", "sinh"}, {"rate", l.rate}}; },
        },
        f.warping.law());
    doc["fibers"].push_back({{"dim", f.dim}, {"period", f.period}, {"law", law}});
  }
  return doc;
}

}  // namespace cmcflow
