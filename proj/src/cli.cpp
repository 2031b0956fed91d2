#include "cmcflow/cli.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "cmcflow/causal.hpp"
#include "cmcflow/comparison.hpp"
#include "cmcflow/errors.hpp"
#include "cmcflow/estimates.hpp"
#include "cmcflow/flow.hpp"
#include "cmcflow/spacetime.hpp"
#include "cmcflow/stability.hpp"
#include "cmcflow/version.hpp"

namespace cmcflow::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> parts;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, sep)) parts.push_back(item);
  return parts;
}

double to_double(const std::string& text, const std::string& what) {
  std::size_t used = 0;
  double value = 0.0;
  try {
    value = std::stod(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != text.size()) throw ArgumentError("cannot parse " + what + " from '" + text + "'");
  return value;
}

std::vector<double> parse_list(const std::string& text, const std::string& what) {
  std::vector<double> out;
  for (const auto& part : split(text, ',')) out.push_back(to_double(part, what));
  return out;
}

std::string fmt(double value) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

json number(double value) {
  if (std::isfinite(value)) return value;
  if (std::isnan(value)) return "nan";
  return value > 0 ? "inf" : "-inf";
}

/// Shared options and bookkeeping for one command invocation.
struct Context {
  std::string command;
  std::string out = "./out";
  std::uint64_t seed = 42;
  int jobs = 1;
  std::string model_path;
  json flags = json::object();
  json outputs = json::array();
  json summary = json::object();
  std::optional<MultiWarpedSpacetime> model;

  fs::path dir() const { return fs::path(out); }

  const MultiWarpedSpacetime& load() {
    if (!model) {
      if (model_path.empty()) throw ArgumentError("--model is required");
      model = load_model(model_path);
    }
    return *model;
  }

  std::ofstream open(const std::string& name) {
    fs::create_directories(dir());
    std::ofstream file(dir() / name);
    if (!file) throw std::runtime_error("cannot write " + (dir() / name).string());
    outputs.push_back(name);
    return file;
  }

  void write_json(const std::string& name, const json& doc) { open(name) << doc.dump(2) << '\n'; }
};

void write_run_record(Context& ctx, int exit_code, double wall) {
  json record;
  record["tool"] = "cmcflow";
  record["version"] = kVersion;
  record["command"] = ctx.command;
  record["flags"] = ctx.flags;
  record["seed"] = ctx.seed;
  record["model"] = ctx.model ? model_to_json(*ctx.model) : json(nullptr);
  record["outputs"] = ctx.outputs;
  record["summary"] = ctx.summary;
  record["exit_code"] = exit_code;
  record["wall_time_s"] = wall;
  fs::create_directories(ctx.dir());
  std::ofstream(ctx.dir() / "run_record.json") << record.dump(2) << '\n';
}

// ---------------------------------------------------------------- commands

struct EnergyArgs {
  std::optional<double> lambda;
  std::string t;
};

int run_check_energy(Context& ctx, const EnergyArgs& args) {
  const auto& model = ctx.load();
  const double lambda = args.lambda.value_or(model.lambda());
  const auto samples = parse_samples(args.t);
  const EnergyConditionReport report = check_energy_condition(model, lambda, samples);
  json doc = {{"pass", report.pass},
              {"lambda", lambda},
              {"worst_margin", number(report.worst_margin)},
              {"worst_t", report.worst_t},
              {"worst_term", report.worst_fiber < 0 ? "r0 + n lambda" : "r0 + r" + std::to_string(report.worst_fiber)},
              {"samples", report.samples}};
  ctx.write_json("energy.json", doc);
  ctx.summary = doc;
  std::cout << (report.pass ? "PASS" : "FAIL") << " energy condition with lambda = " << lambda
            << ", worst margin " << report.worst_margin << " at t = " << report.worst_t << '\n';
  return report.pass ? kSuccess : kVerificationFailed;
}

int run_ricci(Context& ctx, const std::string& t_spec) {
  const auto& model = ctx.load();
  const auto samples = parse_samples(t_spec);
  auto csv = ctx.open("ricci.csv");
  csv << "t,r0";
  for (std::size_t i = 0; i < model.fibers().size(); ++i) csv << ",r" << i + 1;
  csv << '\n';
  json rows = json::array();
  for (double t : samples) {
    const RicciDiagonal ric = ricci_diagonal(model, t);
    csv << fmt(t) << ',' << fmt(ric.r0);
    for (double r : ric.fiber) csv << ',' << fmt(r);
    csv << '\n';
    rows.push_back({{"t", t}, {"r0", ric.r0}, {"fiber", ric.fiber}});
  }
  ctx.write_json("ricci.json", rows);
  ctx.summary = {{"samples", samples.size()}};
  std::cout << "ricci at " << samples.size() << " times written to " << (ctx.dir() / "ricci.csv").string() << '\n';
  return kSuccess;
}

struct FlowArgs {
  double c = 0.0;
  std::string u0;
  std::vector<int> grid{256};
  double cfl = 0.4;
  double ds_max = 1e-2;
  double tol_H = 1e-6;
  int max_steps = 1'000'000;
  int min_steps = 0;
  bool auto_barriers = false;
  std::optional<double> t1;
  std::optional<double> t2;
  std::string scheme = "heun";
  int sample_every = 1;
  int snapshot_stride = 0;
};

int run_flow(Context& ctx, const FlowArgs& args) {
  const auto& model = ctx.load();
  const GraphSurface initial = parse_initial_surface(args.u0, PeriodicGrid::for_model(model, args.grid));

  FlowConfig cfg;
  cfg.c = args.c;
  cfg.cfl = args.cfl;
  cfg.ds_max = args.ds_max;
  cfg.tol_H = args.tol_H;
  cfg.max_steps = args.max_steps;
  cfg.min_steps = args.min_steps;
  cfg.sample_every = args.sample_every;
  cfg.snapshot_stride = args.snapshot_stride;
  cfg.scheme = args.scheme == "euler" ? TimeScheme::Euler : TimeScheme::Heun;
  cfg.barrier_lower = args.t1;
  cfg.barrier_upper = args.t2;
  json barriers = json::object();
  if (args.auto_barriers) {
    const BarrierPair pair = barrier_pair_select(model, args.c, initial.u.minCoeff() - 0.1);
    cfg.barrier_lower = pair.t1;
    cfg.barrier_upper = pair.upper.t_slice;
    barriers = {{"t1", pair.t1}, {"H1", pair.H1}, {"tau", pair.upper.tau}, {"t2", pair.upper.t_slice},
                {"bound", pair.upper.bound}};
  }

  const FlowResult result = flow_run(model, initial, cfg);

  auto series = ctx.open("flow.csv");
  series << "step,s,ds,minH,maxH,maxv,minu,maxu,residual\n";
  for (const auto& row : result.series) {
    const auto& d = row.diagnostics;
    series << row.step << ',' << fmt(row.s) << ',' << fmt(row.ds) << ',' << fmt(d.min_H) << ',' << fmt(d.max_H)
           << ',' << fmt(d.max_v) << ',' << fmt(d.min_u) << ',' << fmt(d.max_u) << ',' << fmt(d.residual) << '\n';
  }
  series.close();
  auto surface = ctx.open("surface.csv");
  write_surface_csv(surface, result.final.surface.grid, result.final.surface.u);
  surface.close();

  json run;
  run["model"] = model_to_json(model);
  run["grid"] = {{"sizes", initial.grid.sizes()}, {"periods", initial.grid.half_widths()}};
  run["c"] = args.c;
  run["verdict"] = to_string(result.verdict);
  run["snapshots"] = json::array();
  for (const auto& snap : result.snapshots)
    run["snapshots"].push_back({{"step", snap.step}, {"s", snap.s}, {"u", std::vector<double>(snap.u.begin(), snap.u.end())}});
  ctx.write_json("run.json", run);

  const auto& d = result.final.diagnostics;
  ctx.summary = {{"verdict", to_string(result.verdict)},
                 {"steps", result.final.step},
                 {"s", result.final.s},
                 {"residual", d.residual},
                 {"min_u", d.min_u},
                 {"max_u", d.max_u},
                 {"barriers", barriers},
                 {"max_parabolicity", result.max_parabolicity},
                 {"time_step_rule", "ds = min(ds_max, cfl dx^2 / P), P = 2 d max hinv_max max(1, v^2)"},
                 {"message", result.message}};
  std::cout << to_string(result.verdict) << ": " << result.message << "; u in [" << d.min_u << ", " << d.max_u
            << "]\n";
  switch (result.verdict) {
    case FlowVerdict::Converged: return kSuccess;
    case FlowVerdict::BarrierViolation: return kBarrierViolation;
    case FlowVerdict::SpacelikenessLost: return kSpacelikenessLost;
    case FlowVerdict::MaxSteps: return kMaxSteps;
  }
  return kMaxSteps;
}

struct BarrierArgs {
  double c = 0.0;
  double t_ref = 0.0;
  std::optional<double> tau;
};

int run_barrier(Context& ctx, const BarrierArgs& args) {
  const auto& model = ctx.load();
  json doc;
  const ExistenceTime existence = future_existence_time(model, args.t_ref, args.c);
  doc["existence"] = {{"T0", number(existence.T0)}, {"sufficient", *existence.sufficient}};
  if (args.tau) {
    const BarrierCertificate cert = distance_sphere_slice(model, args.t_ref, *args.tau);
    doc["certificate"] = {{"tau", cert.tau}, {"bound", cert.bound}, {"t_slice", cert.t_slice}, {"slice_H", cert.slice_H}};
  }
  const BarrierPair pair = barrier_pair_select(model, args.c, args.t_ref);
  doc["t1"] = pair.t1;
  doc["t2"] = pair.upper.t_slice;
  doc["tau"] = pair.upper.tau;
  doc["bound"] = pair.upper.bound;
  doc["H1"] = pair.H1;
  doc["slice_H2"] = pair.upper.slice_H;
  ctx.write_json("barrier.json", doc);
  ctx.summary = doc;
  std::cout << "barriers t1 = " << pair.t1 << " (H = " << pair.H1 << "), t2 = " << pair.upper.t_slice
            << " (bound " << pair.upper.bound << ")\n";
  return kSuccess;
}

struct GeodesicArgs {
  double t0 = 0.0;
  double t_stop = 0.0;
  std::string x0;
  std::string p;
  std::string orientation = "past";
  int random = 0;
};

int run_geodesics(Context& ctx, const GeodesicArgs& args) {
  const auto& model = ctx.load();
  const auto n = static_cast<std::size_t>(model.dimension());
  const std::vector<double> x0 = args.x0.empty() ? std::vector<double>(n, 0.0) : parse_list(args.x0, "x0");
  const Orientation orientation = args.orientation == "future" ? Orientation::Future : Orientation::Past;

  json doc;
  if (!args.p.empty()) {
    const NullGeodesic geo = null_geodesic(model, args.t0, x0, parse_list(args.p, "momenta"), args.t_stop, orientation);
    auto csv = ctx.open("geodesic.csv");
    csv << 't';
    for (std::size_t k = 0; k < n; ++k) csv << ",x" << k + 1;
    csv << '\n';
    for (std::size_t i = 0; i < geo.t.size(); ++i) {
      csv << fmt(geo.t[i]);
      for (double xk : geo.x[i]) csv << ',' << fmt(xk);
      csv << '\n';
    }
    doc["endpoint"] = geo.x.back();
    doc["t_end"] = geo.t.back();
    doc["truncated"] = geo.truncated;
    doc["null_residual"] = geo.null_residual;
    doc["conservation_residual"] = geo.conservation_residual;
  }
  if (args.random > 0) {
    std::mt19937_64 rng(ctx.seed);
    std::normal_distribution<double> normal;
    std::vector<double> extent(n, 0.0);
    auto csv = ctx.open("fan.csv");
    for (std::size_t k = 0; k < n; ++k) csv << (k ? "," : "") << 'p' << k + 1;
    for (std::size_t k = 0; k < n; ++k) csv << ",dx" << k + 1;
    csv << '\n';
    for (int r = 0; r < args.random; ++r) {
      std::vector<double> p(n);
      for (auto& pk : p) pk = normal(rng);
      const NullGeodesic geo = null_geodesic(model, args.t0, x0, p, args.t_stop, orientation);
      for (std::size_t k = 0; k < n; ++k) csv << (k ? "," : "") << fmt(p[k]);
      for (std::size_t k = 0; k < n; ++k) {
        const double dx = std::abs(geo.x.back()[k] - x0[k]);
        extent[k] = std::max(extent[k], dx);
        csv << ',' << fmt(dx);
      }
      csv << '\n';
    }
    doc["random_extent"] = extent;
  }
  if (args.p.empty() && args.random == 0) throw ArgumentError("give --p or --random");
  json bounds = json::array();
  for (int k = 0; k < model.dimension(); ++k)
    bounds.push_back(number(confinement_bound(model, k, std::min(args.t0, args.t_stop), std::max(args.t0, args.t_stop))));
  doc["confinement_bound"] = bounds;
  ctx.write_json("geodesics.json", doc);
  ctx.summary = doc;
  std::cout << "geodesics from t0 = " << args.t0 << " to t = " << args.t_stop << " written to "
            << ctx.dir().string() << '\n';
  return kSuccess;
}

struct HorizonArgs {
  double t1 = 1.0;
  std::string xi;
  HorizonOptions options;
};

int run_horizon(Context& ctx, HorizonArgs args) {
  const auto& model = ctx.load();
  const auto n = static_cast<std::size_t>(model.dimension());
  const std::vector<double> xi = args.xi.empty() ? std::vector<double>(n, 0.0) : parse_list(args.xi, "xi");
  args.options.jobs = ctx.jobs;
  const HorizonReport report = observer_horizon_test(model, xi, args.t1, args.options);
  json analytic = json::array();
  for (double a : report.analytic_extent) analytic.push_back(number(a));
  json doc = {{"covers_slice", report.covers_slice}, {"sampled_covers", report.sampled_covers}, {"t1", report.t1},
              {"extent", report.extent},             {"analytic_extent", analytic},
              {"period", report.period},             {"t0_ladder", report.ladder},
              {"geodesics", report.geodesics}};
  ctx.write_json("horizon.json", doc);
  ctx.summary = {{"covers_slice", report.covers_slice}, {"extent", report.extent}};
  std::cout << "covers_slice = " << std::boolalpha << report.covers_slice << '\n';
  return kSuccess;
}

int run_boundary(Context& ctx) {
  const auto& model = ctx.load();
  const BoundaryClass bc = classify_boundary(model);
  const CompletenessReport complete = completeness_test(model);
  json tails = json::array();
  for (double v : bc.tail_integrals) tails.push_back(number(v));
  json doc = {{"shape", bc.shape},
              {"spacelike", bc.spacelike},
              {"divergent_fibers", bc.divergent_fibers},
              {"convergent_fibers", bc.convergent_fibers},
              {"t_ref", bc.t_ref},
              {"tail_integrals", tails},
              {"completeness", {{"divergent", complete.divergent}, {"overall", complete.overall}}}};
  ctx.write_json("boundary.json", doc);
  ctx.summary = doc;
  std::cout << "boundary shape: " << bc.shape << '\n';
  return kSuccess;
}

struct EigenArgs {
  std::string u0;
  std::string surface;
  std::vector<int> grid{128};
  std::optional<double> perturb;
  double tol = 1e-9;
};

int run_eigen(Context& ctx, const EigenArgs& args) {
  const auto& model = ctx.load();
  if (args.u0.empty() == args.surface.empty()) throw ArgumentError("give exactly one of --u0 and --surface");
  const GraphSurface surface = args.surface.empty()
                                   ? parse_initial_surface(args.u0, PeriodicGrid::for_model(model, args.grid))
                                   : load_surface(args.surface);
  const EigenResult eig = principal_eigen(model, surface, args.tol);
  auto csv = ctx.open("phi1.csv");
  write_surface_csv(csv, surface.grid, eig.phi1);
  csv.close();
  json doc = {{"lambda1", eig.lambda1},
              {"iters", eig.iterations},
              {"residual", eig.residual},
              {"rayleigh_min", eig.rayleigh_min},
              {"shift", eig.shift}};
  if (args.perturb) {
    const GraphSurface moved = perturb_to_positive(model, surface, *args.perturb);
    auto out = ctx.open("perturbed.csv");
    write_surface_csv(out, moved.grid, moved.u);
    doc["perturbed_min_H"] = induced_geometry(model, moved).H.minCoeff();
  }
  ctx.write_json("eigen.json", doc);
  ctx.summary = doc;
  std::cout << "lambda1 = " << eig.lambda1 << " after " << eig.iterations << " iterations\n";
  return kSuccess;
}

struct EstimateArgs {
  std::string run;
  std::optional<double> lambda;
  std::optional<double> c;
  double slack_constant = 1.0;
};

int run_verify_estimates(Context& ctx, const EstimateArgs& args) {
  std::ifstream in(args.run);
  if (!in) throw ArgumentError("cannot open run file " + args.run);
  const json run = json::parse(in);
  ctx.model = model_from_json(run.at("model"));
  const auto& model = *ctx.model;
  const PeriodicGrid grid(run.at("grid").at("sizes").get<std::vector<int>>(),
                          run.at("grid").at("periods").get<std::vector<double>>());
  std::vector<FlowSnapshot> snapshots;
  for (const auto& snap : run.at("snapshots")) {
    const auto u = snap.at("u").get<std::vector<double>>();
    snapshots.push_back({snap.at("step").get<int>(), snap.at("s").get<double>(),
                         Eigen::Map<const Field>(u.data(), static_cast<Eigen::Index>(u.size()))});
  }
  const double lambda = args.lambda.value_or(model.lambda());
  const double c = args.c.value_or(run.at("c").get<double>());
  const EpsilonTriple eps = select_epsilons(model.dimension(), lambda);
  const EstimateReport report = flow_inequality_monitor(model, grid, snapshots, eps, c, args.slack_constant);
  const bool ok = report.violations == 0;
  json doc = {{"identity_residual", report.identity_residual},
              {"inequality_margin_min", report.inequality_margin_min},
              {"slack", report.slack},
              {"violations", report.violations},
              {"worst_step", report.worst_step},
              {"worst_point", report.worst_point},
              {"checked_steps", report.checked_steps},
              {"epsilons", {eps.eps1, eps.eps2, eps.eps3}},
              {"f4_coefficient", f4_coefficient(eps)},
              {"pass", ok}};
  ctx.write_json("estimates.json", doc);
  ctx.summary = doc;
  std::cout << (ok ? "PASS" : "FAIL") << " estimate monitor: identity residual " << report.identity_residual
            << ", margin " << report.inequality_margin_min << " (slack " << report.slack << ")\n";
  return ok ? kSuccess : kVerificationFailed;
}

}  // namespace

std::vector<double> parse_samples(const std::string& spec) {
  if (spec.empty()) throw ArgumentError("empty sample specification");
  const auto parts = split(spec, ':');
  if (parts.size() == 3) {
    const double start = to_double(parts[0], "start");
    const double stop = to_double(parts[1], "stop");
    const double count = to_double(parts[2], "count");
    if (!(count >= 1.0) || count != std::floor(count)) throw ArgumentError("sample count must be a positive integer");
    const auto m = static_cast<int>(count);
    std::vector<double> out;
    for (int i = 0; i < m; ++i) out.push_back(m == 1 ? start : start + (stop - start) * i / (m - 1));
    return out;
  }
  if (parts.size() == 1) return parse_list(spec, "sample");
  throw ArgumentError("samples must be start:stop:count or a comma separated list");
}

GraphSurface parse_initial_surface(const std::string& spec, const PeriodicGrid& grid) {
  const auto colon = spec.find(':');
  if (colon == std::string::npos) throw ArgumentError("initial surface must be const:T, sine:T,A,k or file:PATH");
  const std::string kind = spec.substr(0, colon);
  const std::string rest = spec.substr(colon + 1);
  if (kind == "const") return GraphSurface::constant(grid, to_double(rest, "height"));
  if (kind == "sine") {
    const auto values = parse_list(rest, "sine parameter");
    if (values.size() != 3) throw ArgumentError("sine needs T,A,k");
    GraphSurface surface = GraphSurface::constant(grid, values[0]);
    const double b = grid.half_width(0);
    for (std::size_t i = 0; i < grid.points(); ++i)
      surface.u[static_cast<Eigen::Index>(i)] += values[1] * std::sin(values[2] * M_PI * grid.coordinate(i, 0) / b);
    return surface;
  }
  if (kind == "file") return load_surface(rest);
  throw ArgumentError("unknown initial surface kind '" + kind + "'");
}

int dispatch(int argc, const char* const* argv) {
  CLI::App app{"Forced mean curvature flow and causal diagnostics in warped product spacetimes", "cmcflow"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kVersion));

  Context ctx;
  auto common = [&](CLI::App* sub, bool needs_model = true) {
    if (needs_model) sub->add_option("--model", ctx.model_path, "Model JSON file")->required();
    sub->add_option("--out", ctx.out, "Output directory")->capture_default_str();
    sub->add_option("--seed", ctx.seed, "Random seed")->capture_default_str();
    sub->add_option("--jobs", ctx.jobs, "Parallel jobs for geodesic fans")->check(CLI::PositiveNumber)->capture_default_str();
  };

  EnergyArgs energy;
  auto* check = app.add_subcommand("check-energy", "Check Ric(X,X) >= -n lambda on sampled times");
  common(check);
  check->add_option("--lambda", energy.lambda, "Cosmological constant (default: model value)");
  check->add_option("--t", energy.t, "Times as start:stop:count or a list")->required();

  std::string ricci_t;
  auto* ricci = app.add_subcommand("ricci", "Ricci eigenvalues in the orthonormal frame");
  common(ricci);
  ricci->add_option("--t", ricci_t, "Times as start:stop:count or a list")->required();

  FlowArgs flow;
  auto* flow_cmd = app.add_subcommand("flow", "Run the forced mean curvature flow");
  common(flow_cmd);
  flow_cmd->add_option("--c", flow.c, "Forcing constant")->required();
  flow_cmd->add_option("--u0", flow.u0, "Initial surface: const:T, sine:T,A,k or file:PATH")->required();
  flow_cmd->add_option("--grid", flow.grid, "Grid sizes (one value: first axis only)")->delimiter(',')->capture_default_str();
  flow_cmd->add_option("--cfl", flow.cfl)->capture_default_str();
  flow_cmd->add_option("--ds-max", flow.ds_max)->capture_default_str();
  flow_cmd->add_option("--tol-h", flow.tol_H, "Convergence tolerance on max |H - c|")->capture_default_str();
  flow_cmd->add_option("--max-steps", flow.max_steps)->capture_default_str();
  flow_cmd->add_option("--min-steps", flow.min_steps)->capture_default_str();
  auto* auto_opt = flow_cmd->add_flag("--auto-barriers", flow.auto_barriers, "Select barriers from the comparison bounds");
  flow_cmd->add_option("--t1", flow.t1, "Lower barrier slice")->excludes(auto_opt);
  flow_cmd->add_option("--t2", flow.t2, "Upper barrier slice")->excludes(auto_opt);
  flow_cmd->add_option("--scheme", flow.scheme)->check(CLI::IsMember({"heun", "euler"}))->capture_default_str();
  flow_cmd->add_option("--sample-every", flow.sample_every)->capture_default_str();
  flow_cmd->add_option("--snapshot-stride", flow.snapshot_stride, "Keep full states for verify-estimates")->capture_default_str();

  BarrierArgs barrier;
  auto* barrier_cmd = app.add_subcommand("barrier", "Select barrier slices for a forcing constant");
  common(barrier_cmd);
  barrier_cmd->add_option("--c", barrier.c)->required();
  barrier_cmd->add_option("--t-ref", barrier.t_ref, "Lower barrier slice")->required();
  barrier_cmd->add_option("--tau", barrier.tau, "Also certify the distance sphere at tau");

  GeodesicArgs geodesic;
  auto* geo_cmd = app.add_subcommand("geodesics", "Integrate null geodesics");
  common(geo_cmd);
  geo_cmd->add_option("--t0", geodesic.t0)->required();
  geo_cmd->add_option("--t-stop", geodesic.t_stop)->required();
  geo_cmd->add_option("--x0", geodesic.x0, "Start point, comma separated (default origin)");
  geo_cmd->add_option("--p", geodesic.p, "Momenta, comma separated");
  geo_cmd->add_option("--random", geodesic.random, "Number of random momenta (uses --seed)");
  geo_cmd->add_option("--orientation", geodesic.orientation)->check(CLI::IsMember({"past", "future"}))->capture_default_str();

  HorizonArgs horizon;
  auto* horizon_cmd = app.add_subcommand("horizon", "Observer horizon test along a t-line");
  common(horizon_cmd);
  horizon_cmd->add_option("--t1", horizon.t1, "Target slice")->capture_default_str();
  horizon_cmd->add_option("--xi", horizon.xi, "Base point, comma separated (default origin)");
  horizon_cmd->add_option("--fan", horizon.options.fan)->capture_default_str();
  horizon_cmd->add_option("--t-cap", horizon.options.t_cap)->capture_default_str();

  auto* boundary_cmd = app.add_subcommand("boundary", "Classify the future causal boundary");
  common(boundary_cmd);

  EigenArgs eigen;
  auto* eigen_cmd = app.add_subcommand("eigen", "Principal eigenpair of the stability operator");
  common(eigen_cmd);
  eigen_cmd->add_option("--u0", eigen.u0, "Surface: const:T, sine:T,A,k or file:PATH");
  eigen_cmd->add_option("--surface", eigen.surface, "Surface CSV file");
  eigen_cmd->add_option("--grid", eigen.grid)->delimiter(',')->capture_default_str();
  eigen_cmd->add_option("--perturb", eigen.perturb, "Push to the past along phi1 until min H > 0");
  eigen_cmd->add_option("--tol", eigen.tol)->capture_default_str();

  EstimateArgs estimate;
  auto* est_cmd = app.add_subcommand("verify-estimates", "Monitor the curvature estimate along a flow run");
  common(est_cmd, false);
  est_cmd->add_option("--run", estimate.run, "run.json written by flow --snapshot-stride")->required();
  est_cmd->add_option("--lambda", estimate.lambda);
  est_cmd->add_option("--c", estimate.c);
  est_cmd->add_option("--slack-constant", estimate.slack_constant)->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kSuccess : kUsage;
  }

  if (const char* env = std::getenv("CMCFLOW_OUT"); env && *env) ctx.out = env;
  CLI::App* sub = app.get_subcommands().front();
  ctx.command = sub->get_name();
  for (const CLI::Option* opt : sub->get_options()) {
    if (opt->count() == 0 || opt->get_name() == "--help") continue;
    const auto results = opt->results();
    ctx.flags[opt->get_name()] = results.size() == 1 ? json(results.front()) : json(results);
  }

  const auto start = std::chrono::steady_clock::now();
  int code = kSuccess;
  try {
    if (ctx.command == "check-energy") code = run_check_energy(ctx, energy);
    else if (ctx.command == "ricci") code = run_ricci(ctx, ricci_t);
    else if (ctx.command == "flow") code = run_flow(ctx, flow);
    else if (ctx.command == "barrier") code = run_barrier(ctx, barrier);
    else if (ctx.command == "geodesics") code = run_geodesics(ctx, geodesic);
    else if (ctx.command == "horizon") code = run_horizon(ctx, horizon);
    else if (ctx.command == "boundary") code = run_boundary(ctx);
    else if (ctx.command == "eigen") code = run_eigen(ctx, eigen);
    else if (ctx.command == "verify-estimates") code = run_verify_estimates(ctx, estimate);
  } catch (const ModelParseError& e) {
    std::cerr << "model error: " << e.what() << '\n';
    code = kModelError;
  } catch (const DomainError& e) {
    std::cerr << "domain error: " << e.what() << '\n';
    code = kModelError;
  } catch (const ArgumentError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    code = kUsage;
  } catch (const GeometryError& e) {
    std::cerr << "not spacelike: " << e.what() << '\n';
    code = kSpacelikenessLost;
  } catch (const json::exception& e) {
    std::cerr << "malformed JSON: " << e.what() << '\n';
    code = kModelError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    code = kModelError;
  }
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  try {
    write_run_record(ctx, code, wall);
  } catch (const std::exception& e) {
    std::cerr << "cannot write run record: " << e.what() << '\n';
  }
  return code;
}

}  // namespace cmcflow::cli
