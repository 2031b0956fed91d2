#pragma once

// Forced mean curvature flow of graph surfaces with constant forcing c.
//
// A normal variation with speed (H - c) moves the graph height at fixed x by
//   du/ds = (H - c) / v,
// which is the form integrated here; along the normal trajectories the time
// coordinate changes at rate (H - c) v.

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "cmcflow/hypersurface.hpp"

namespace cmcflow {

enum class TimeScheme { Euler, Heun };

struct FlowConfig {
  double c = 0.0;
  /// Safety factor in (0, 1).
  double cfl = 0.4;
  double ds_max = 1e-2;
  /// Converged when max |H - c| < tol_H.
  double tol_H = 1e-6;
  int max_steps = 1'000'000;
  /// Do not declare convergence before this many steps.
  int min_steps = 0;
  std::optional<double> barrier_lower;
  std::optional<double> barrier_upper;
  TimeScheme scheme = TimeScheme::Heun;
  /// Diagnostics are sampled every `sample_every` steps (and at the end).
  int sample_every = 1;
  double spacelike_tol = 1e-6;
  /// When positive, the full height field is kept at steps k, k+1, k+2 for
  /// every k divisible by the stride.
  int snapshot_stride = 0;
  /// Stop once s reaches this flow time (verdict MaxSteps); the last step is
  /// shortened to land on it.
  std::optional<double> s_stop;

  /// Throws ArgumentError when the configuration is inconsistent.
  void validate() const;
  /// delta = 10 tol_H ds_max.
  double barrier_slack() const { return 10.0 * tol_H * ds_max; }
};

struct FlowDiagnostics {
  double min_H = 0.0;
  double max_H = 0.0;
  double max_v = 0.0;
  double min_u = 0.0;
  double max_u = 0.0;
  /// max |H - c|
  double residual = 0.0;
};

struct FlowState {
  double s = 0.0;
  int step = 0;
  GraphSurface surface;
  SurfaceGeometry geom;
  FlowDiagnostics diagnostics;
  /// Step size that produced this state (0 for the initial state).
  double ds = 0.0;
};

/// State at flow time 0. Throws GeometryError when S0 is not spacelike.
FlowState flow_initial_state(const MultiWarpedSpacetime& model, const GraphSurface& surface, double c,
                             double spacelike_tol = 1e-6);

/// Delta s = min(ds_max, cfl * dx_min^2 / P), P = 2 d max_i hinv_max_i max(1, v_i^2)
/// over the d active axes. Returns ds_max when no axis is active.
double flow_time_step(const FlowState& state, const FlowConfig& cfg);

/// One step of the flow. Throws GeometryError when the new surface is not
/// spacelike and NumericError on non-finite values.
FlowState flow_step(const MultiWarpedSpacetime& model, const FlowState& state, const FlowConfig& cfg);

enum class FlowVerdict { Converged, MaxSteps, BarrierViolation, SpacelikenessLost };

std::string to_string(FlowVerdict verdict);

enum class BarrierSide { Lower, Upper };

struct BarrierReport {
  bool ok = true;
  std::size_t point = 0;
  BarrierSide side = BarrierSide::Lower;
  /// Distance beyond the barrier (without slack).
  double amount = 0.0;
};

/// First grid point with u < t1 - slack or u > t2 + slack.
BarrierReport barrier_monitor(const FlowState& state, std::optional<double> t1, std::optional<double> t2,
                              double slack = 0.0);

struct FlowSample {
  int step = 0;
  double s = 0.0;
  double ds = 0.0;
  FlowDiagnostics diagnostics;
};

struct FlowSnapshot {
  int step = 0;
  double s = 0.0;
  Field u;
};

struct FlowResult {
  FlowVerdict verdict = FlowVerdict::MaxSteps;
  FlowState final;
  std::vector<FlowSample> series;
  std::vector<FlowSnapshot> snapshots;
  /// First barrier violation, if any.
  BarrierReport barrier;
  /// Largest parabolicity factor P seen.
  double max_parabolicity = 0.0;
  std::string message;
};

/// Steps until converged, out of steps, out of the barriers or no longer
/// spacelike. Throws ArgumentError when S0 is not strictly between the
/// barriers, GeometryError when S0 is not spacelike.
FlowResult flow_run(const MultiWarpedSpacetime& model, const GraphSurface& initial, const FlowConfig& cfg);

}  // namespace cmcflow
