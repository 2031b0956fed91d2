#pragma once

// Thin adaptive-step driver over Boost.Odeint's Dormand-Prince 5(4) pair that
// hands every accepted step to an observer which may stop the integration.

#include <algorithm>
#include <cmath>
#include <cstddef>

#include <boost/numeric/odeint.hpp>

#include "cmcflow/errors.hpp"

namespace cmcflow::ode {

struct Tolerance {
  double abs = 1e-12;
  double rel = 1e-10;
};

/// Integrate y' = f(y, t) from t0 to t1 (either direction). `f` has the odeint
/// signature void(const State&, State&, double); `observe(t, y)` returns false
/// to stop early. Returns the final t.
template <class State, class System, class Observer>
double integrate(System&& f, State& y, double t0, double t1, double dt0, Tolerance tol,
                 Observer&& observe, std::size_t max_steps = 2'000'000) {
  namespace odeint = boost::numeric::odeint;
  auto stepper = odeint::make_controlled(tol.abs, tol.rel, odeint::runge_kutta_dopri5<State>());
  const double dir = t1 >= t0 ? 1.0 : -1.0;
  double t = t0;
  double dt = dir * std::abs(dt0);
  std::size_t steps = 0;
  while (dir * (t1 - t) > 0.0) {
    if (dir * (t + dt - t1) > 0.0) dt = t1 - t;
    const auto result = stepper.try_step(f, y, t, dt);
    if (result == odeint::success) {
      if (!observe(t, y)) return t;
    }
    if (++steps > max_steps) throw NumericError("ODE integration exceeded the step budget");
    if (std::abs(dt) < 1e-14 * std::max(1.0, std::abs(t))) throw NumericError("ODE step size underflow");
  }
  return t;
}

}  // namespace cmcflow::ode
