#pragma once

// Multiply warped product spacetimes
//
//   M = (t_min, t_max) x T^{n_1} x ... x T^{n_m},
//   g = -dt^2 + sum_i a_i(t)^2 h_i,   h_i flat,
//
// with analytic warping laws. Curvature is reported in the orthonormal frame
// e_0 = d/dt, e_{i,k} = a_i^{-1} d/dx^k.

#include <limits>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

namespace cmcflow {

/// a(t) = t^p, defined for t > 0.
struct PowerLaw {
  double exponent;
};

/// a(t) = exp(rate * t).
struct ExponentialLaw {
  double rate;
};

/// a(t) = value > 0.
struct ConstantLaw {
  double value;
};

/// a(t) = sinh(rate * t), rate > 0, defined for t > 0. Slices have
/// H = n * rate * coth(rate * t), which approaches the de Sitter value n * rate
/// from above.
struct SinhLaw {
  double rate;
};

class WarpingLaw {
 public:
  using Variant = std::variant<PowerLaw, ExponentialLaw, ConstantLaw, SinhLaw>;

  WarpingLaw(Variant law);  // NOLINT: implicit from any family

  static WarpingLaw power(double exponent) { return WarpingLaw(PowerLaw{exponent}); }
  static WarpingLaw exponential(double rate) { return WarpingLaw(ExponentialLaw{rate}); }
  static WarpingLaw constant(double value) { return WarpingLaw(ConstantLaw{value}); }
  static WarpingLaw sinh(double rate) { return WarpingLaw(SinhLaw{rate}); }

  double value(double t) const;
  double first_derivative(double t) const;
  double second_derivative(double t) const;

  /// a'/a, evaluated analytically (no division of rounded values).
  double hubble(double t) const;
  /// a''/a, evaluated analytically.
  double acceleration(double t) const;

  /// Smallest t at which the law is positive (0 for power and sinh laws).
  double natural_lower_bound() const;

  /// Whether \int^\infty a^{-1} dt is finite.
  bool inverse_integral_converges() const;
  /// Whether \int^\infty a dt diverges.
  bool integral_diverges() const;
  /// \int_T^\infty a^{-1} dt in closed form; +inf when it diverges.
  double inverse_tail(double T) const;

  const Variant& law() const { return law_; }
  std::string describe() const;

 private:
  Variant law_;
};

struct FiberSpec {
  int dim = 1;
  /// Half-width b: each coordinate of the flat torus lies in [-b, b].
  double period = 1.0;
  WarpingLaw warping = WarpingLaw::constant(1.0);
};

class MultiWarpedSpacetime {
 public:
  static constexpr double kInfinity = std::numeric_limits<double>::infinity();

  /// Throws ArgumentError when an invariant fails (empty fibers, n_i < 1,
  /// b_i <= 0, t_min >= t_max, negative lambda, a law undefined on the interval).
  MultiWarpedSpacetime(double t_min, double t_max, std::vector<FiberSpec> fibers,
                       double lambda = 0.0);

  double t_min() const { return t_min_; }
  double t_max() const { return t_max_; }
  double lambda() const { return lambda_; }
  const std::vector<FiberSpec>& fibers() const { return fibers_; }

  /// Total spatial dimension n = sum n_i.
  int dimension() const { return static_cast<int>(axis_fiber_.size()); }
  /// Fiber index owning spatial axis k.
  int axis_fiber(int axis) const { return axis_fiber_[static_cast<std::size_t>(axis)]; }

  bool contains(double t) const { return t > t_min_ && t < t_max_; }
  /// Throws DomainError unless t lies in the open interval.
  void require_contains(double t) const;

  /// Scale factor of spatial axis k at time t.
  double axis_scale(int axis, double t) const {
    return fibers_[static_cast<std::size_t>(axis_fiber(axis))].warping.value(t);
  }

  /// H of the slice {t} with respect to the future normal: sum_i n_i a_i'/a_i.
  double slice_mean_curvature(double t) const;
  /// |A|^2 of the slice {t}: sum_i n_i (a_i'/a_i)^2.
  double slice_second_fundamental_norm(double t) const;

  /// Same model with every period multiplied by `factor`.
  MultiWarpedSpacetime with_scaled_periods(double factor) const;

 private:
  double t_min_;
  double t_max_;
  std::vector<FiberSpec> fibers_;
  double lambda_;
  std::vector<int> axis_fiber_;
};

struct RicciDiagonal {
  /// Ric(e_0, e_0).
  double r0 = 0.0;
  /// Ric(e, e) for a unit vector e tangent to fiber i.
  std::vector<double> fiber;
};

/// Ricci eigenvalues at time t. Throws DomainError outside (t_min, t_max).
RicciDiagonal ricci_diagonal(const MultiWarpedSpacetime& model, double t);

struct EnergyConditionReport {
  bool pass = true;
  /// min over samples of min(r_0 + n lambda, min_i(r_0 + r_i)); this is the
  /// infimum of Ric(X, X) + n lambda over unit timelike X whenever it is >= 0.
  double worst_margin = std::numeric_limits<double>::infinity();
  double worst_t = 0.0;
  /// -1 when the worst term is r_0 + n lambda, otherwise the fiber index.
  int worst_fiber = -1;
  std::size_t samples = 0;
};

/// Ric(X, X) >= -n lambda for all unit timelike X, checked at each sample via
/// the eigenvalue pair r_0 >= -n lambda and r_0 + r_i >= 0.
EnergyConditionReport check_energy_condition(const MultiWarpedSpacetime& model, double lambda,
                                             std::span<const double> t_samples);

/// Parse the model JSON document. Throws ModelParseError naming the key.
MultiWarpedSpacetime model_from_json(const nlohmann::json& doc);
MultiWarpedSpacetime load_model(const std::string& path);
nlohmann::json model_to_json(const MultiWarpedSpacetime& model);

}  // namespace cmcflow
