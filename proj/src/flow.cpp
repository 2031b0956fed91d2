#include "cmcflow/flow.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "cmcflow/errors.hpp"

namespace cmcflow {

namespace {

FlowDiagnostics diagnose(const GraphSurface& surface, const SurfaceGeometry& geom, double c) {
  FlowDiagnostics d;
  d.min_H = geom.H.minCoeff();
  d.max_H = geom.H.maxCoeff();
  d.max_v = geom.v.maxCoeff();
  d.min_u = surface.u.minCoeff();
  d.max_u = surface.u.maxCoeff();
  d.residual = (geom.H.array() - c).abs().maxCoeff();
  return d;
}

double parabolicity(const FlowState& state) {
  const auto d_act = static_cast<double>(state.surface.grid.active_axes().size());
  const Field v2 = state.geom.v.cwiseProduct(state.geom.v).cwiseMax(1.0);
  return 2.0 * d_act * state.geom.hinv_max.cwiseProduct(v2).maxCoeff();
}

Field speed(const SurfaceGeometry& geom, double c) {
  return (geom.H.array() - c).matrix().cwiseQuotient(geom.v);
}

SurfaceGeometry geometry_at(const MultiWarpedSpacetime& model, const GraphSurface& surface, double tol) {
  if (!surface.u.allFinite()) throw NumericError("flow produced non-finite heights");
  return induced_geometry(model, surface, tol);
}

}  // namespace

void FlowConfig::validate() const {
  if (!std::isfinite(c)) throw ArgumentError("forcing constant must be finite");
  if (!(cfl > 0.0 && cfl < 1.0)) throw ArgumentError("cfl must lie in (0, 1)");
  if (!(ds_max > 0.0)) throw ArgumentError("ds_max must be positive");
  if (!(tol_H > 0.0)) throw ArgumentError("tol_H must be positive");
  if (max_steps < 1) throw ArgumentError("max_steps must be positive");
  if (min_steps < 0 || min_steps > max_steps) throw ArgumentError("min_steps must lie in [0, max_steps]");
  if (sample_every < 1) throw ArgumentError("sample_every must be positive");
  if (snapshot_stride < 0) throw ArgumentError("snapshot_stride must be nonnegative");
  if (s_stop && !(*s_stop > 0.0)) throw ArgumentError("s_stop must be positive");
  if (barrier_lower && barrier_upper && !(*barrier_lower < *barrier_upper))
    throw ArgumentError("lower barrier must lie below the upper barrier");
}

FlowState flow_initial_state(const MultiWarpedSpacetime& model, const GraphSurface& surface, double c,
                             double spacelike_tol) {
  FlowState state;
  state.surface = surface;
  state.geom = geometry_at(model, surface, spacelike_tol);
  state.diagnostics = diagnose(surface, state.geom, c);
  return state;
}

double flow_time_step(const FlowState& state, const FlowConfig& cfg) {
  const double dx = state.surface.grid.min_active_spacing();
  if (!std::isfinite(dx)) return cfg.ds_max;
  return std::min(cfg.ds_max, cfg.cfl * dx * dx / parabolicity(state));
}

FlowState flow_step(const MultiWarpedSpacetime& model, const FlowState& state, const FlowConfig& cfg) {
  double ds = flow_time_step(state, cfg);
  if (cfg.s_stop) ds = std::min(ds, *cfg.s_stop - state.s);
  if (!(ds > 0.0)) throw ArgumentError("flow time step must be positive");
  const Field f0 = speed(state.geom, cfg.c);

  FlowState next;
  next.step = state.step + 1;
  next.s = state.s + ds;
  next.ds = ds;
  next.surface.grid = state.surface.grid;
  if (cfg.scheme == TimeScheme::Euler) {
    next.surface.u = state.surface.u + ds * f0;
  } else {
    const GraphSurface predictor{state.surface.grid, state.surface.u + ds * f0};
    const SurfaceGeometry g1 = geometry_at(model, predictor, cfg.spacelike_tol);
    next.surface.u = state.surface.u + 0.5 * ds * (f0 + speed(g1, cfg.c));
  }
  next.geom = geometry_at(model, next.surface, cfg.spacelike_tol);
  next.diagnostics = diagnose(next.surface, next.geom, cfg.c);
  return next;
}

std::string to_string(FlowVerdict verdict) {
  switch (verdict) {
    case FlowVerdict::Converged: return "Converged";
    case FlowVerdict::MaxSteps: return "MaxSteps";
    case FlowVerdict::BarrierViolation: return "BarrierViolation";
    case FlowVerdict::SpacelikenessLost: return "SpacelikenessLost";
  }
  return "unknown";
}

BarrierReport barrier_monitor(const FlowState& state, std::optional<double> t1, std::optional<double> t2,
                              double slack) {
  BarrierReport report;
  const Field& u = state.surface.u;
  for (Eigen::Index i = 0; i < u.size(); ++i) {
    if (t1 && u[i] < *t1 - slack) {
      report = {false, static_cast<std::size_t>(i), BarrierSide::Lower, *t1 - u[i]};
      return report;
    }
    if (t2 && u[i] > *t2 + slack) {
      report = {false, static_cast<std::size_t>(i), BarrierSide::Upper, u[i] - *t2};
      return report;
    }
  }
  return report;
}

FlowResult flow_run(const MultiWarpedSpacetime& model, const GraphSurface& initial, const FlowConfig& cfg) {
  cfg.validate();
  const double umin = initial.u.minCoeff();
  const double umax = initial.u.maxCoeff();
  if (cfg.barrier_lower && !(*cfg.barrier_lower < umin))
    throw ArgumentError("initial surface must lie strictly above the lower barrier");
  if (cfg.barrier_upper && !(umax < *cfg.barrier_upper))
    throw ArgumentError("initial surface must lie strictly below the upper barrier");

  FlowResult result;
  FlowState state = flow_initial_state(model, initial, cfg.c, cfg.spacelike_tol);
  const double slack = cfg.barrier_slack();

  auto sample = [&](const FlowState& st) {
    result.series.push_back({st.step, st.s, st.ds, st.diagnostics});
  };
  auto snapshot = [&](const FlowState& st) {
    if (cfg.snapshot_stride > 0 && st.step % cfg.snapshot_stride <= 2)
      result.snapshots.push_back({st.step, st.s, st.surface.u});
  };
  auto finish = [&](FlowVerdict verdict, std::string message) {
    if (result.series.empty() || result.series.back().step != state.step) sample(state);
    result.verdict = verdict;
    result.message = std::move(message);
    result.final = std::move(state);
    return std::move(result);
  };

  sample(state);
  snapshot(state);
  while (true) {
    result.max_parabolicity = std::max(result.max_parabolicity, parabolicity(state));
    if (state.diagnostics.residual < cfg.tol_H && state.step >= cfg.min_steps) {
      std::ostringstream msg;
      msg << "converged at step " << state.step << " (s = " << state.s << ")";
      return finish(FlowVerdict::Converged, msg.str());
    }
    if (cfg.s_stop && state.s >= *cfg.s_stop) {
      std::ostringstream msg;
      msg << "reached flow time " << state.s << " after " << state.step << " steps, max |H - c| = "
          << state.diagnostics.residual;
      return finish(FlowVerdict::MaxSteps, msg.str());
    }
    if (state.step >= cfg.max_steps) {
      std::ostringstream msg;
      msg << "no convergence after " << state.step << " steps, max |H - c| = " << state.diagnostics.residual;
      return finish(FlowVerdict::MaxSteps, msg.str());
    }
    try {
      state = flow_step(model, state, cfg);
    } catch (const GeometryError& e) {
      return finish(FlowVerdict::SpacelikenessLost, e.what());
    }
    if (state.step % cfg.sample_every == 0) sample(state);
    snapshot(state);
    const BarrierReport barrier = barrier_monitor(state, cfg.barrier_lower, cfg.barrier_upper, slack);
    if (!barrier.ok) {
      result.barrier = barrier;
      std::ostringstream msg;
      msg << (barrier.side == BarrierSide::Lower ? "lower" : "upper") << " barrier crossed at step " << state.step
          << ", grid point " << barrier.point << ", by " << barrier.amount;
      return finish(FlowVerdict::BarrierViolation, msg.str());
    }
  }
}

}  // namespace cmcflow
