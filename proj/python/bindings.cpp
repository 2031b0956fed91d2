#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "cmcflow/causal.hpp"
#include "cmcflow/comparison.hpp"
#include "cmcflow/errors.hpp"
#include "cmcflow/estimates.hpp"
#include "cmcflow/flow.hpp"
#include "cmcflow/spacetime.hpp"
#include "cmcflow/stability.hpp"
#include "cmcflow/version.hpp"

namespace py = pybind11;
using namespace cmcflow;

namespace {

void init_spacetime(py::module_& m) {
  py::class_<WarpingLaw>(m, "WarpingLaw")
      .def_static("power", &WarpingLaw::power, py::arg("exponent"))
      .def_static("exponential", &WarpingLaw::exponential, py::arg("rate"))
      .def_static("constant", &WarpingLaw::constant, py::arg("value"))
      .def_static("sinh", &WarpingLaw::sinh, py::arg("rate"))
      .def("value", &WarpingLaw::value)
      .def("hubble", &WarpingLaw::hubble)
      .def("acceleration", &WarpingLaw::acceleration)
      .def("inverse_tail", &WarpingLaw::inverse_tail)
      .def("__repr__", &WarpingLaw::describe);

  py::class_<FiberSpec>(m, "FiberSpec")
      .def(py::init([](int dim, double period, const WarpingLaw& law) { return FiberSpec{dim, period, law}; }),
           py::arg("dim"), py::arg("period"), py::arg("law"))
      .def_readwrite("dim", &FiberSpec::dim)
      .def_readwrite("period", &FiberSpec::period)
      .def_readwrite("warping", &FiberSpec::warping);

  py::class_<MultiWarpedSpacetime>(m, "Spacetime")
      .def(py::init<double, double, std::vector<FiberSpec>, double>(), py::arg("t_min"), py::arg("t_max"),
           py::arg("fibers"), py::arg("lambda_") = 0.0)
      .def_property_readonly("t_min", &MultiWarpedSpacetime::t_min)
      .def_property_readonly("t_max", &MultiWarpedSpacetime::t_max)
      .def_property_readonly("lambda_", &MultiWarpedSpacetime::lambda)
      .def_property_readonly("dimension", &MultiWarpedSpacetime::dimension)
      .def_property_readonly("fibers", &MultiWarpedSpacetime::fibers)
      .def("slice_mean_curvature", &MultiWarpedSpacetime::slice_mean_curvature)
      .def("to_json", [](const MultiWarpedSpacetime& s) { return model_to_json(s).dump(); });

  m.def("model_from_json", [](const std::string& text) { return model_from_json(nlohmann::json::parse(text)); },
        py::arg("text"));
  m.def("load_model", &load_model, py::arg("path"));

  py::class_<RicciDiagonal>(m, "RicciDiagonal")
      .def_readonly("r0", &RicciDiagonal::r0)
      .def_readonly("fiber", &RicciDiagonal::fiber);
  m.def("ricci_diagonal", &ricci_diagonal, py::arg("model"), py::arg("t"));

  py::class_<EnergyConditionReport>(m, "EnergyConditionReport")
      .def_readonly("passed", &EnergyConditionReport::pass)
      .def_readonly("worst_margin", &EnergyConditionReport::worst_margin)
      .def_readonly("worst_t", &EnergyConditionReport::worst_t)
      .def_readonly("worst_fiber", &EnergyConditionReport::worst_fiber);
  m.def("check_energy_condition",
        [](const MultiWarpedSpacetime& model, double lambda, const std::vector<double>& t) {
          return check_energy_condition(model, lambda, t);
        },
        py::arg("model"), py::arg("lambda_"), py::arg("t"));
}

void init_surfaces(py::module_& m) {
  py::class_<PeriodicGrid>(m, "PeriodicGrid")
      .def(py::init<std::vector<int>, std::vector<double>>(), py::arg("sizes"), py::arg("half_widths"))
      .def_static("for_model", &PeriodicGrid::for_model, py::arg("model"), py::arg("sizes"))
      .def_property_readonly("points", &PeriodicGrid::points)
      .def_property_readonly("sizes", &PeriodicGrid::sizes)
      .def("coordinate", &PeriodicGrid::coordinate, py::arg("index"), py::arg("axis"));

  py::class_<GraphSurface>(m, "GraphSurface")
      .def(py::init([](const PeriodicGrid& grid, const Field& u) {
             if (static_cast<std::size_t>(u.size()) != grid.points())
               throw ArgumentError("height field size does not match the grid");
             return GraphSurface{grid, u};
           }),
           py::arg("grid"), py::arg("u"))
      .def_static("constant", &GraphSurface::constant, py::arg("grid"), py::arg("height"))
      .def_readonly("grid", &GraphSurface::grid)
      .def_readonly("u", &GraphSurface::u);

  py::class_<SurfaceGeometry>(m, "SurfaceGeometry")
      .def_readonly("H", &SurfaceGeometry::H)
      .def_readonly("v", &SurfaceGeometry::v)
      .def_readonly("A2", &SurfaceGeometry::A2)
      .def_readonly("sigma2", &SurfaceGeometry::sigma2)
      .def_readonly("ric_nu", &SurfaceGeometry::ric_nu);
  m.def("induced_geometry", &induced_geometry, py::arg("model"), py::arg("surface"), py::arg("margin_tol") = 1e-6);
  m.def("mean_curvature_flux_form", &mean_curvature_flux_form, py::arg("model"), py::arg("surface"));
}

void init_comparison(py::module_& m) {
  m.def("mean_curvature_bound", &mean_curvature_bound, py::arg("n"), py::arg("tau"), py::arg("lambda_") = 0.0);

  py::class_<BarrierCertificate>(m, "BarrierCertificate")
      .def_readonly("tau", &BarrierCertificate::tau)
      .def_readonly("bound", &BarrierCertificate::bound)
      .def_readonly("t_slice", &BarrierCertificate::t_slice)
      .def_readonly("slice_H", &BarrierCertificate::slice_H);
  py::class_<BarrierPair>(m, "BarrierPair")
      .def_readonly("t1", &BarrierPair::t1)
      .def_readonly("H1", &BarrierPair::H1)
      .def_readonly("upper", &BarrierPair::upper);
  m.def("barrier_pair_select", &barrier_pair_select, py::arg("model"), py::arg("c"), py::arg("t_ref"));
}

void init_flow(py::module_& m) {
  py::enum_<TimeScheme>(m, "TimeScheme").value("Euler", TimeScheme::Euler).value("Heun", TimeScheme::Heun);
  py::enum_<FlowVerdict>(m, "FlowVerdict")
      .value("Converged", FlowVerdict::Converged)
      .value("MaxSteps", FlowVerdict::MaxSteps)
      .value("BarrierViolation", FlowVerdict::BarrierViolation)
      .value("SpacelikenessLost", FlowVerdict::SpacelikenessLost);

  py::class_<FlowConfig>(m, "FlowConfig")
      .def(py::init<>())
      .def_readwrite("c", &FlowConfig::c)
      .def_readwrite("cfl", &FlowConfig::cfl)
      .def_readwrite("ds_max", &FlowConfig::ds_max)
      .def_readwrite("tol_H", &FlowConfig::tol_H)
      .def_readwrite("max_steps", &FlowConfig::max_steps)
      .def_readwrite("min_steps", &FlowConfig::min_steps)
      .def_readwrite("barrier_lower", &FlowConfig::barrier_lower)
      .def_readwrite("barrier_upper", &FlowConfig::barrier_upper)
      .def_readwrite("scheme", &FlowConfig::scheme)
      .def_readwrite("sample_every", &FlowConfig::sample_every)
      .def_readwrite("snapshot_stride", &FlowConfig::snapshot_stride);

  py::class_<FlowDiagnostics>(m, "FlowDiagnostics")
      .def_readonly("min_H", &FlowDiagnostics::min_H)
      .def_readonly("max_H", &FlowDiagnostics::max_H)
      .def_readonly("max_v", &FlowDiagnostics::max_v)
      .def_readonly("min_u", &FlowDiagnostics::min_u)
      .def_readonly("max_u", &FlowDiagnostics::max_u)
      .def_readonly("residual", &FlowDiagnostics::residual);
  py::class_<FlowState>(m, "FlowState")
      .def_readonly("s", &FlowState::s)
      .def_readonly("step", &FlowState::step)
      .def_readonly("surface", &FlowState::surface)
      .def_readonly("diagnostics", &FlowState::diagnostics);
  py::class_<FlowResult>(m, "FlowResult")
      .def_readonly("verdict", &FlowResult::verdict)
      .def_readonly("final", &FlowResult::final)
      .def_readonly("message", &FlowResult::message)
      .def_property_readonly("series", [](const FlowResult& r) {
        std::vector<std::pair<double, double>> out;
        for (const auto& row : r.series) out.emplace_back(row.s, row.diagnostics.residual);
        return out;
      });
  m.def("flow_run", &flow_run, py::arg("model"), py::arg("initial"), py::arg("config"),
        py::call_guard<py::gil_scoped_release>());
}

void init_stability(py::module_& m) {
  m.def("stability_apply", &stability_apply, py::arg("model"), py::arg("surface"), py::arg("phi"));
  py::class_<EigenResult>(m, "EigenResult")
      .def_readonly("lambda1", &EigenResult::lambda1)
      .def_readonly("phi1", &EigenResult::phi1)
      .def_readonly("iterations", &EigenResult::iterations)
      .def_readonly("residual", &EigenResult::residual);
  m.def("principal_eigen", &principal_eigen, py::arg("model"), py::arg("surface"), py::arg("tol") = 1e-9,
        py::arg("max_iterations") = 5000);
  m.def("perturb_to_positive", &perturb_to_positive, py::arg("model"), py::arg("surface"), py::arg("eps"),
        py::arg("h_tol") = 1e-8);
}

void init_causal(py::module_& m) {
  py::enum_<Orientation>(m, "Orientation").value("Past", Orientation::Past).value("Future", Orientation::Future);
  py::class_<NullGeodesic>(m, "NullGeodesic")
      .def_readonly("t", &NullGeodesic::t)
      .def_readonly("x", &NullGeodesic::x)
      .def_readonly("truncated", &NullGeodesic::truncated);
  m.def("null_geodesic", &null_geodesic, py::arg("model"), py::arg("t0"), py::arg("x0"), py::arg("momenta"),
        py::arg("t_stop"), py::arg("orientation") = Orientation::Past);
  m.def("confinement_bound", &confinement_bound, py::arg("model"), py::arg("axis"), py::arg("t1"), py::arg("t0"));

  py::class_<HorizonReport>(m, "HorizonReport")
      .def_readonly("covers_slice", &HorizonReport::covers_slice)
      .def_readonly("sampled_covers", &HorizonReport::sampled_covers)
      .def_readonly("extent", &HorizonReport::extent)
      .def_readonly("analytic_extent", &HorizonReport::analytic_extent);
  m.def(
      "observer_horizon_test",
      [](const MultiWarpedSpacetime& model, const std::vector<double>& xi, double t1, int fan, double t_cap) {
        return observer_horizon_test(model, xi, t1, HorizonOptions{fan, t_cap, 1});
      },
      py::arg("model"), py::arg("xi"), py::arg("t1"), py::arg("fan") = 8, py::arg("t_cap") = 1e6);

  py::class_<BoundaryClass>(m, "BoundaryClass")
      .def_readonly("shape", &BoundaryClass::shape)
      .def_readonly("divergent_fibers", &BoundaryClass::divergent_fibers)
      .def_readonly("convergent_fibers", &BoundaryClass::convergent_fibers);
  m.def("classify_boundary", &classify_boundary, py::arg("model"));
  m.def(
      "completeness_test", [](const MultiWarpedSpacetime& model) { return completeness_test(model).overall; },
      py::arg("model"));
}

void init_estimates(py::module_& m) {
  py::class_<EpsilonTriple>(m, "EpsilonTriple")
      .def_readonly("eps1", &EpsilonTriple::eps1)
      .def_readonly("eps2", &EpsilonTriple::eps2)
      .def_readonly("eps3", &EpsilonTriple::eps3);
  m.def("select_epsilons", &select_epsilons, py::arg("n"), py::arg("lambda_"));
  m.def("f4_coefficient", [](const EpsilonTriple& eps) { return f4_coefficient(eps); }, py::arg("eps"));
  m.def(
      "peter_paul_check", [](double f, double hs, const EpsilonTriple& eps) { return peter_paul_check(f, hs, eps).ok; },
      py::arg("f"), py::arg("Hs"), py::arg("eps"));
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Forced mean curvature flow in multiply warped product spacetimes";

  py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);
  py::register_exception<ArgumentError>(m, "ArgumentError", PyExc_ValueError);
  py::register_exception<ModelParseError>(m, "ModelParseError", PyExc_ValueError);
  py::register_exception<GeometryError>(m, "GeometryError", PyExc_RuntimeError);
  py::register_exception<NumericError>(m, "NumericError", PyExc_RuntimeError);

  init_spacetime(m);
  init_surfaces(m);
  init_comparison(m);
  init_flow(m);
  init_stability(m);
  init_causal(m);
  init_estimates(m);

  m.attr("__version__") = kVersion;
}
