#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "cloudrecon/cli.hpp"
#include "cloudrecon/forward.hpp"
#include "cloudrecon/geometry.hpp"
#include "cloudrecon/jacobian.hpp"
#include "cloudrecon/radiance.hpp"
#include "cloudrecon/scenario.hpp"
#include "cloudrecon/solver.hpp"

namespace py = pybind11;
using namespace cloudrecon;

namespace {

ScenarioOptions make_options(const std::optional<std::string>& out,
                             const std::optional<unsigned>& seed,
                             const std::string& preset, bool mirror_sun) {
  ScenarioOptions o;
  o.out = out;
  if (seed) o.seed = *seed;
  o.preset = preset;
  o.mirror_sun = mirror_sun;
  return o;
}

template <class State, class Module>
void bind_result(Module& m, const char* name) {
  py::class_<ReconstructionResult<State>>(m, name)
      .def_readonly("state", &ReconstructionResult<State>::state)
      .def_readonly("history", &ReconstructionResult<State>::history)
      .def_readonly("diagnostics", &ReconstructionResult<State>::diagnostics)
      .def_readonly("converged", &ReconstructionResult<State>::converged)
      .def_readonly("final_residual",
                    &ReconstructionResult<State>::final_residual)
      .def_readonly("dropped_rows", &ReconstructionResult<State>::dropped_rows);
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "multi-angle reconstruction of 2D cloud boundaries";

  py::register_exception<ScenarioError>(m, "ScenarioError");

  py::class_<GraphCloud>(m, "GraphCloud")
      .def(py::init<double, double, double, std::vector<double>>(),
           py::arg("x_left"), py::arg("x_right"), py::arg("base"),
           py::arg("heights"))
      .def_property_readonly("x_left", &GraphCloud::x_left)
      .def_property_readonly("x_right", &GraphCloud::x_right)
      .def_property_readonly("base", &GraphCloud::base)
      .def_property_readonly("node_count", &GraphCloud::node_count)
      .def_property_readonly("segment_count", &GraphCloud::segment_count)
      .def_property_readonly("heights", &GraphCloud::heights)
      .def_property_readonly("max_height", &GraphCloud::max_height)
      .def("node_x", &GraphCloud::node_x, py::arg("k"));

  py::class_<PolarCloud>(m, "PolarCloud")
      .def(py::init<double, std::vector<double>>(), py::arg("theta0"),
           py::arg("radii"))
      .def_property_readonly("theta0", &PolarCloud::theta0)
      .def_property_readonly("vertex_count", &PolarCloud::vertex_count)
      .def_property_readonly("radii", &PolarCloud::radii)
      .def_property_readonly("max_radius", &PolarCloud::max_radius)
      .def("vertex_angle", &PolarCloud::vertex_angle, py::arg("k"));

  py::class_<AlphaField>(m, "AlphaField")
      .def(py::init([](std::vector<double> segments, double alpha_L,
                       double alpha_R) {
             AlphaField a;
             a.segment_values = std::move(segments);
             a.alpha_L = alpha_L;
             a.alpha_R = alpha_R;
             return a;
           }),
           py::arg("segment_values"), py::arg("alpha_L") = 0.0,
           py::arg("alpha_R") = 0.0)
      .def_readwrite("segment_values", &AlphaField::segment_values)
      .def_readwrite("alpha_L", &AlphaField::alpha_L)
      .def_readwrite("alpha_R", &AlphaField::alpha_R);

  py::class_<BetaProfile>(m, "BetaProfile")
      .def(py::init<std::vector<double>>(), py::arg("knots"))
      .def_static("sine", &BetaProfile::sine, py::arg("P"))
      .def_static("constant", &BetaProfile::constant, py::arg("P"))
      .def_property_readonly("knots", &BetaProfile::knots)
      .def_property_readonly("knot_count", &BetaProfile::knot_count)
      .def("knot_angle", &BetaProfile::knot_angle, py::arg("p"))
      .def("eval", &BetaProfile::eval, py::arg("angle"))
      .def("slope", &BetaProfile::slope, py::arg("angle"))
      .def_property_readonly("nadir_value", &BetaProfile::nadir_value);

  py::class_<DetectorLine>(m, "DetectorLine")
      .def(py::init<>())
      .def_readwrite("Z", &DetectorLine::Z)
      .def_readwrite("pixel_size", &DetectorLine::pixel_size)
      .def_readwrite("first_pixel", &DetectorLine::first_pixel)
      .def_readwrite("pixel_count", &DetectorLine::pixel_count)
      .def_readwrite("angles", &DetectorLine::angles)
      .def_readwrite("subsamples", &DetectorLine::subsamples);

  py::class_<DetectorCircle>(m, "DetectorCircle")
      .def(py::init<>())
      .def_readwrite("R", &DetectorCircle::R)
      .def_readwrite("pixel_count", &DetectorCircle::pixel_count)
      .def_readwrite("angles", &DetectorCircle::angles)
      .def_readwrite("subsamples", &DetectorCircle::subsamples);

  py::enum_<PixelStatus>(m, "PixelStatus")
      .value("Hit", PixelStatus::Hit)
      .value("Miss", PixelStatus::Miss)
      .value("Blocked", PixelStatus::Blocked);

  py::class_<MeasurementSet>(m, "MeasurementSet")
      .def_readonly("first_pixel", &MeasurementSet::first_pixel)
      .def_readonly("step", &MeasurementSet::step)
      .def_readonly("polar", &MeasurementSet::polar)
      .def_readonly("angles", &MeasurementSet::angles)
      .def_readonly("values", &MeasurementSet::values)
      .def_readonly("mask", &MeasurementSet::mask)
      .def_property_readonly("pixel_count", &MeasurementSet::pixel_count)
      .def_property_readonly("angle_count", &MeasurementSet::angle_count)
      .def("pixel_center", &MeasurementSet::pixel_center, py::arg("i"))
      .def("value", &MeasurementSet::value, py::arg("i"), py::arg("j"))
      .def("status", &MeasurementSet::status, py::arg("i"), py::arg("j"));

  py::class_<GraphState>(m, "GraphState")
      .def(py::init<GraphCloud, AlphaField, BetaProfile, double>(),
           py::arg("cloud"), py::arg("alpha"), py::arg("beta"),
           py::arg("lambda_") = 1.0)
      .def_readwrite("cloud", &GraphState::cloud)
      .def_readwrite("alpha", &GraphState::alpha)
      .def_readwrite("beta", &GraphState::beta)
      .def_readwrite("lambda_", &GraphState::lambda);

  py::class_<PolarState>(m, "PolarState")
      .def(py::init<PolarCloud, AlphaField, BetaProfile>(), py::arg("cloud"),
           py::arg("alpha"), py::arg("beta"))
      .def_readwrite("cloud", &PolarState::cloud)
      .def_readwrite("alpha", &PolarState::alpha)
      .def_readwrite("beta", &PolarState::beta);

  py::class_<SolverConfig>(m, "SolverConfig")
      .def(py::init<>())
      .def_readwrite("reg_weight", &SolverConfig::reg_weight)
      .def_readwrite("max_iter", &SolverConfig::max_iter)
      .def_readwrite("tol_step", &SolverConfig::tol_step)
      .def_readwrite("tol_resid", &SolverConfig::tol_resid)
      .def_readwrite("max_halvings", &SolverConfig::max_halvings)
      .def_readwrite("pin_index", &SolverConfig::pin_index);

  py::class_<IterationRecord>(m, "IterationRecord")
      .def_readonly("residual", &IterationRecord::residual)
      .def_readonly("step", &IterationRecord::step)
      .def_readonly("condition", &IterationRecord::condition);

  py::class_<IdentifiabilityReport>(m, "IdentifiabilityReport")
      .def_readonly("spectrum", &IdentifiabilityReport::spectrum)
      .def_readonly("rank_threshold", &IdentifiabilityReport::rank_threshold)
      .def_readonly("rank", &IdentifiabilityReport::rank)
      .def_readonly("gram_condition", &IdentifiabilityReport::gram_condition)
      .def_readonly("angular_slope_matches_cot",
                    &IdentifiabilityReport::angular_slope_matches_cot)
      .def_readonly("speed_column_norm",
                    &IdentifiabilityReport::speed_column_norm)
      .def_readonly("speed_degenerate",
                    &IdentifiabilityReport::speed_degenerate)
      .def_readonly("insensitive_nodes",
                    &IdentifiabilityReport::insensitive_nodes)
      .def("summary", &IdentifiabilityReport::summary);

  bind_result<GraphState>(m, "GraphResult");
  bind_result<PolarState>(m, "PolarResult");

  py::class_<Scenario>(m, "Scenario")
      .def_property_readonly(
          "kind",
          [](const Scenario& s) { return s.graph ? "graph" : "polar"; })
      .def_property_readonly(
          "graph_truth",
          [](const Scenario& s) -> const GraphState& {
            if (!s.graph) throw py::value_error("polar scenario");
            return s.graph->truth;
          },
          py::return_value_policy::reference_internal)
      .def_property_readonly(
          "graph_init",
          [](const Scenario& s) -> const GraphState& {
            if (!s.graph) throw py::value_error("polar scenario");
            return s.graph->init;
          },
          py::return_value_policy::reference_internal)
      .def_property_readonly(
          "polar_truth",
          [](const Scenario& s) -> const PolarState& {
            if (!s.polar) throw py::value_error("graph scenario");
            return s.polar->truth;
          },
          py::return_value_policy::reference_internal)
      .def_property_readonly(
          "graph_detector",
          [](const Scenario& s) -> const DetectorLine& {
            if (!s.graph) throw py::value_error("polar scenario");
            return s.graph->det;
          },
          py::return_value_policy::reference_internal)
      .def_property_readonly(
          "polar_detector",
          [](const Scenario& s) -> const DetectorCircle& {
            if (!s.polar) throw py::value_error("graph scenario");
            return s.polar->det;
          },
          py::return_value_policy::reference_internal)
      .def_readonly("solver", &Scenario::solver)
      .def_readonly("noise_sigma", &Scenario::noise_sigma)
      .def_readonly("noise_seed", &Scenario::noise_seed)
      .def_readonly("estimate_speed", &Scenario::estimate_speed)
      .def_readonly("outdir", &Scenario::outdir);

  m.def("misr_angles", &misr_angles);
  m.def("paper_polar_angles", &paper_polar_angles);
  m.def(
      "load_scenario",
      [](const std::string& path, const std::optional<std::string>& out,
         const std::optional<unsigned>& seed, const std::string& preset,
         bool mirror_sun) {
        return load_scenario(path,
                             make_options(out, seed, preset, mirror_sun));
      },
      py::arg("path"), py::arg("out") = std::nullopt,
      py::arg("seed") = std::nullopt, py::arg("preset") = "desk",
      py::arg("mirror_sun") = false);

  m.def("measure", &measure_graph, py::arg("cloud"), py::arg("alpha"),
        py::arg("beta"), py::arg("detector"), py::arg("lambda_") = 1.0);
  m.def("measure",
        py::overload_cast<const PolarCloud&, const AlphaField&,
                          const BetaProfile&, const DetectorCircle&>(
            &measure_polar),
        py::arg("cloud"), py::arg("alpha"), py::arg("beta"),
        py::arg("detector"));
  m.def("add_noise", &add_noise, py::arg("measurements"), py::arg("sigma"),
        py::arg("seed"));
  m.def("detect_support", &detect_support, py::arg("measurements"),
        py::arg("floor_rel") = 1e-12);
  m.def("relative_misfit", &relative_misfit, py::arg("data"),
        py::arg("current"));

  m.def("reconstruct",
        py::overload_cast<const MeasurementSet&, const DetectorLine&,
                          const GraphState&, const SolverConfig&, bool>(
            &reconstruct),
        py::arg("data"), py::arg("detector"), py::arg("init"), py::arg("config"),
        py::arg("with_speed") = false);
  m.def("reconstruct",
        py::overload_cast<const MeasurementSet&, const DetectorCircle&,
                          const PolarState&, const SolverConfig&>(&reconstruct),
        py::arg("data"), py::arg("detector"), py::arg("init"),
        py::arg("config"));
  m.def("fix_gauge", py::overload_cast<const GraphState&>(&fix_gauge),
        py::arg("state"));
  m.def("fix_gauge", py::overload_cast<const PolarState&>(&fix_gauge),
        py::arg("state"));

  m.def(
      "diagnose",
      [](const GraphState& state, const DetectorLine& det, bool with_speed) {
        return diagnose(assemble_graph(state, det, with_speed));
      },
      py::arg("state"), py::arg("detector"), py::arg("with_speed") = false);
  m.def(
      "diagnose",
      [](const PolarState& state, const DetectorCircle& det) {
        return diagnose(assemble_polar(state, det));
      },
      py::arg("state"), py::arg("detector"));

  m.def("run_forward", &cmd_forward, py::arg("scenario"));
  m.def("run_invert", &cmd_invert, py::arg("scenario"));
  m.def("run_speed_demo", &cmd_speed_demo, py::arg("scenario"));
  m.def("run_diagnose", &cmd_diagnose, py::arg("scenario"));

  py::class_<ForwardArtifacts>(m, "ForwardArtifacts")
      .def_readonly("data", &ForwardArtifacts::data)
      .def_readonly("files", &ForwardArtifacts::files);
  py::class_<InvertArtifacts>(m, "InvertArtifacts")
      .def_readonly("files", &InvertArtifacts::files)
      .def_readonly("converged", &InvertArtifacts::converged)
      .def_readonly("iterations", &InvertArtifacts::iterations)
      .def_readonly("final_residual", &InvertArtifacts::final_residual)
      .def_readonly("dropped_rows", &InvertArtifacts::dropped_rows)
      .def_readonly("lambda_", &InvertArtifacts::lambda);
  py::class_<SpeedSweepRow>(m, "SpeedSweepRow")
      .def_readonly("lambda_true", &SpeedSweepRow::lambda_true)
      .def_readonly("lambda_rec", &SpeedSweepRow::lambda_rec)
      .def_readonly("sigma_min", &SpeedSweepRow::sigma_min)
      .def_readonly("sigma_max", &SpeedSweepRow::sigma_max)
      .def_readonly("speed_degenerate", &SpeedSweepRow::speed_degenerate);
  py::class_<SpeedSweepArtifacts>(m, "SpeedSweepArtifacts")
      .def_readonly("files", &SpeedSweepArtifacts::files)
      .def_readonly("rows", &SpeedSweepArtifacts::rows);
  py::class_<DiagnoseArtifacts>(m, "DiagnoseArtifacts")
      .def_readonly("files", &DiagnoseArtifacts::files)
      .def_readonly("report", &DiagnoseArtifacts::report)
      .def_readonly("degeneracy_count", &DiagnoseArtifacts::degeneracy_count);
}
