#include "cloudrecon/cli.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace cloudrecon {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

fs::path ensure_outdir(const std::string& dir) {
  fs::path p(dir);
  std::error_code ec;
  fs::create_directories(p, ec);
  if (ec)
    throw std::runtime_error("cannot create output directory '" + dir + "'");
  return p;
}

std::ofstream open_text(const fs::path& p) {
  std::ofstream f(p);
  if (!f) throw std::runtime_error("cannot write '" + p.string() + "'");
  f << std::setprecision(17);
  return f;
}

const char* status_name(PixelStatus s) {
  switch (s) {
    case PixelStatus::Hit:
      return "HIT";
    case PixelStatus::Miss:
      return "MISS";
    default:
      return "BLOCKED";
  }
}

std::string write_measurements(const fs::path& dir, const MeasurementSet& ms) {
  const fs::path p = dir / "measurements.csv";
  std::ofstream f = open_text(p);
  f << "n," << (ms.polar ? "Theta_center" : "X_center")
    << ",j,phi_j,value,mask\n";
  for (int i = 0; i < ms.pixel_count(); ++i)
    for (int j = 0; j < ms.angle_count(); ++j)
      f << ms.first_pixel + i << "," << ms.pixel_center(i) << "," << j << ","
        << ms.angles[j] << "," << ms.value(i, j) << ","
        << status_name(ms.status(i, j)) << "\n";
  return p.string();
}

// ---- chart output ---------------------------------------------------------

struct Series {
  std::string label;
  std::string color;
  std::vector<double> xs;
  std::vector<double> ys;
};

std::string tick(double v) {
  std::ostringstream os;
  os << std::setprecision(5) << v;
  return os.str();
}

std::string svg_chart(const std::string& title,
                      const std::vector<Series>& series) {
  constexpr double W = 720, H = 440, ml = 64, mr = 20, mt = 44, mb = 40;
  double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin;
  double ymin = xmin, ymax = -xmin;
  for (const Series& s : series)
    for (std::size_t i = 0; i < s.xs.size(); ++i) {
      xmin = std::min(xmin, s.xs[i]);
      xmax = std::max(xmax, s.xs[i]);
      ymin = std::min(ymin, s.ys[i]);
      ymax = std::max(ymax, s.ys[i]);
    }
  if (!(xmin <= xmax)) xmin = 0, xmax = 1;
  if (!(ymin <= ymax)) ymin = 0, ymax = 1;
  if (xmax == xmin) xmin -= 0.5, xmax += 0.5;
  if (ymax == ymin) ymin -= 0.5, ymax += 0.5;
  const auto px = [&](double x) {
    return ml + (x - xmin) / (xmax - xmin) * (W - ml - mr);
  };
  const auto py = [&](double y) {
    return mt + (ymax - y) / (ymax - ymin) * (H - mt - mb);
  };

  std::ostringstream os;
  os << std::fixed << std::setprecision(2);
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W
     << "\" height=\"" << H << "\" viewBox=\"0 0 " << W << " " << H
     << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  os << "<rect width=\"" << W << "\" height=\"" << H << "\" fill=\"white\"/>\n";
  os << "<text x=\"" << ml << "\" y=\"20\" font-size=\"14\">" << title
     << "</text>\n";
  os << "<rect x=\"" << ml << "\" y=\"" << mt << "\" width=\"" << W - ml - mr
     << "\" height=\"" << H - mt - mb
     << "\" fill=\"none\" stroke=\"#999\"/>\n";
  os << "<text x=\"" << ml << "\" y=\"" << H - 8 << "\">" << tick(xmin)
     << "</text>\n";
  os << "<text x=\"" << W - mr << "\" y=\"" << H - 8
     << "\" text-anchor=\"end\">" << tick(xmax) << "</text>\n";
  os << "<text x=\"" << ml - 6 << "\" y=\"" << py(ymin)
     << "\" text-anchor=\"end\">" << tick(ymin) << "</text>\n";
  os << "<text x=\"" << ml - 6 << "\" y=\"" << py(ymax) + 10
     << "\" text-anchor=\"end\">" << tick(ymax) << "</text>\n";

  double legend_y = mt + 16;
  for (const Series& s : series) {
    if (s.xs.size() == 1) {
      os << "<circle cx=\"" << px(s.xs[0]) << "\" cy=\"" << py(s.ys[0])
         << "\" r=\"3\" fill=\"" << s.color << "\"/>\n";
    } else if (!s.xs.empty()) {
      os << "<polyline fill=\"none\" stroke=\"" << s.color
         << "\" stroke-width=\"1.5\" points=\"";
      for (std::size_t i = 0; i < s.xs.size(); ++i)
        os << (i ? " " : "") << px(s.xs[i]) << "," << py(s.ys[i]);
      os << "\"/>\n";
    }
    os << "<text x=\"" << W - mr - 6 << "\" y=\"" << legend_y
       << "\" text-anchor=\"end\" fill=\"" << s.color << "\">" << s.label
       << "</text>\n";
    legend_y += 16;
  }
  os << "</svg>\n";
  return os.str();
}

std::string write_chart(const fs::path& file, const std::string& title,
                        const std::vector<Series>& series) {
  std::ofstream f = open_text(file);
  f << svg_chart(title, series);
  return file.string();
}

// Triptych palette shared by all comparison charts.
constexpr const char* kTrueColor = "#1a9641";
constexpr const char* kRecColor = "#2b6cb0";
constexpr const char* kInitColor = "#d7301f";

// ---- scenario plumbing ----------------------------------------------------

MeasurementSet simulate(const Scenario& s) {
  MeasurementSet ms =
      s.graph ? measure_graph(s.graph->truth.cloud, s.graph->truth.alpha,
                              s.graph->truth.beta, s.graph->det,
                              s.graph->truth.lambda)
              : measure_polar(s.polar->truth.cloud, s.polar->truth.alpha,
                              s.polar->truth.beta, s.polar->det);
  if (s.noise_sigma > 0.0) ms = add_noise(ms, s.noise_sigma, s.noise_seed);
  return ms;
}

std::vector<double> node_coords(const GraphCloud& c) {
  std::vector<double> x(c.node_count());
  for (int i = 0; i < c.node_count(); ++i) x[i] = c.node_x(i);
  return x;
}

std::vector<double> segment_coords(const GraphCloud& c) {
  std::vector<double> x(c.segment_count());
  for (int k = 0; k < c.segment_count(); ++k)
    x[k] = c.x_left() + (k + 0.5) * c.dx();
  return x;
}

std::vector<double> vertex_coords(const PolarCloud& c) {
  std::vector<double> t(c.vertex_count());
  for (int i = 0; i < c.vertex_count(); ++i) t[i] = c.vertex_angle(i);
  return t;
}

std::vector<double> segment_coords(const PolarCloud& c) {
  std::vector<double> t(c.vertex_count());
  for (int i = 0; i < c.vertex_count(); ++i)
    t[i] = c.vertex_angle(i) + 0.5 * c.dtheta();
  return t;
}

std::vector<double> knot_coords(const BetaProfile& b) {
  std::vector<double> t(b.knot_count());
  for (int p = 0; p < b.knot_count(); ++p) t[p] = b.knot_angle(p);
  return t;
}

void csv_section(std::ofstream& f, const char* name,
                 const std::vector<double>& coords,
                 const std::vector<double>& tru, const std::vector<double>& ini,
                 const std::vector<double>& rec) {
  for (std::size_t i = 0; i < coords.size(); ++i)
    f << name << "," << i << "," << coords[i] << "," << tru[i] << "," << ini[i]
      << "," << rec[i] << "\n";
}

std::string diagnostics_text(const IdentifiabilityReport& rep) {
  std::ostringstream os;
  os << rep.summary();
  os << "degeneracies flagged: " << degeneracy_count(rep) << "\n";
  return os.str();
}

std::string write_diagnostics(const fs::path& file,
                              const IdentifiabilityReport& rep,
                              const std::string& extra = {}) {
  std::ofstream f = open_text(file);
  f << diagnostics_text(rep);
  if (!extra.empty()) f << extra;
  return file.string();
}

template <class History>
std::string write_history(const fs::path& dir, const History& history) {
  const fs::path p = dir / "history.csv";
  std::ofstream f = open_text(p);
  f << "iter,resid,step,cond_estimate\n";
  int k = 0;
  for (const auto& rec : history)
    f << ++k << "," << rec.residual << "," << rec.step << "," << rec.condition
      << "\n";
  return p.string();
}

json cloud_json(const GraphCloud& c) {
  return {{"kind", "graph"},
          {"x_left", c.x_left()},
          {"x_right", c.x_right()},
          {"base", c.base()},
          {"shape", {{"kind", "explicit"}, {"heights", c.heights()}}}};
}

json cloud_json(const PolarCloud& c) {
  return {{"kind", "polar"},
          {"theta0", c.theta0()},
          {"shape", {{"kind", "explicit"}, {"radii", c.radii()}}}};
}

json state_json(const GraphState& st) {
  return {{"cloud", cloud_json(st.cloud)},
          {"alpha",
           {{"kind", "explicit"},
            {"values", st.alpha.segment_values},
            {"side_left", st.alpha.alpha_L},
            {"side_right", st.alpha.alpha_R}}},
          {"beta", {{"kind", "explicit"}, {"knots", st.beta.knots()}}},
          {"speed", {{"lambda", st.lambda}}}};
}

json state_json(const PolarState& st) {
  return {{"cloud", cloud_json(st.cloud)},
          {"alpha", {{"kind", "explicit"}, {"values", st.alpha.segment_values}}},
          {"beta", {{"kind", "explicit"}, {"knots", st.beta.knots()}}}};
}

template <class State>
std::string write_final_state(const fs::path& dir, const State& st) {
  const fs::path p = dir / "final_state.json";
  std::ofstream f = open_text(p);
  f << state_json(st).dump(2) << "\n";
  return p.string();
}

struct SpeedFit {
  ReconstructionResult<GraphState> result;
  double misfit;  // whole-grid misfit of the winning state
};

// Recovering the drift speed takes more than one local iteration: as the
// footprint dilates, rays enter and leave pixels, so the misfit seen from a
// wrong speed is full of small ledges and a solve started there stalls on
// them. The speed axis is instead swept with fixed-speed solves on nested
// grids, ranked by the whole-grid misfit so a candidate cannot win by
// shrinking its footprint, and the best basin is polished with the speed
// column enabled.
SpeedFit fit_speed(const MeasurementSet& data, const GraphScenario& g,
                   const SolverConfig& cfg) {
  SolverConfig scan_cfg = cfg;
  scan_cfg.max_iter = std::min(cfg.max_iter, 12);

  std::optional<ReconstructionResult<GraphState>> best;
  double best_mis = std::numeric_limits<double>::infinity();
  std::optional<SingularSystemError> singular;
  std::optional<std::string> rejected;
  const auto consider = [&](const GraphState& init, const SolverConfig& c,
                            bool with_speed) {
    try {
      auto res = reconstruct(data, g.det, init, c, with_speed);
      const double mis = relative_misfit(
          data, measure_graph(res.state.cloud, res.state.alpha, res.state.beta,
                              g.det, res.state.lambda));
      if (mis < best_mis) {
        best = std::move(res);
        best_mis = mis;
      }
    } catch (const SingularSystemError& e) {
      if (!singular) singular = e;
    } catch (const std::invalid_argument& e) {
      if (!rejected) rejected = e.what();
    }
  };

  double center = 1.0;
  double half_width = 0.5;
  for (const double step : {0.05, 0.01, 0.002}) {
    const int n = static_cast<int>(std::lround(2.0 * half_width / step));
    for (int i = 0; i <= n && best_mis > 1e-8; ++i) {
      GraphState init = g.init;
      init.lambda = std::clamp(center - half_width + i * step, 0.05, 2.0);
      consider(init, scan_cfg, false);
    }
    if (best_mis <= 1e-8) break;
    if (!best) break;
    center = best->state.lambda;
    half_width = step;
  }

  if (best) consider(best->state, cfg, true);
  if (!best) {
    if (singular) throw *singular;
    throw std::invalid_argument(
        rejected ? *rejected : "fit_speed: no candidate speed produced a fit");
  }
  return {*std::move(best), best_mis};
}

}  // namespace

int degeneracy_count(const IdentifiabilityReport& report) {
  int c = static_cast<int>(report.near_null.size());
  if (report.speed_degenerate) ++c;
  if (report.angular_slope_matches_cot) ++c;
  if (!report.insensitive_nodes.empty()) ++c;
  return c;
}

ForwardArtifacts cmd_forward(const Scenario& s) {
  const fs::path dir = ensure_outdir(s.outdir);
  ForwardArtifacts out{simulate(s), {}};
  out.files.push_back(write_measurements(dir, out.data));

  std::vector<double> centers(out.data.pixel_count());
  for (int i = 0; i < out.data.pixel_count(); ++i)
    centers[i] = out.data.pixel_center(i);
  for (int j = 0; j < out.data.angle_count(); ++j) {
    std::vector<double> ys(out.data.pixel_count());
    for (int i = 0; i < out.data.pixel_count(); ++i)
      ys[i] = out.data.value(i, j);
    std::ostringstream title;
    title << "pixel profile, phi_" << j << " = " << std::setprecision(5)
          << out.data.angles[j];
    out.files.push_back(
        write_chart(dir / ("measurements_angle_" + std::to_string(j) + ".svg"),
                    title.str(), {{"value", kRecColor, centers, ys}}));
  }
  return out;
}

InvertArtifacts cmd_invert(const Scenario& s) {
  const fs::path dir = ensure_outdir(s.outdir);
  const MeasurementSet data = simulate(s);
  InvertArtifacts out;
  out.files.push_back(write_measurements(dir, data));

  if (s.graph) {
    const GraphScenario& g = *s.graph;
    const ReconstructionResult<GraphState> res = [&] {
      try {
        if (s.estimate_speed) return fit_speed(data, g, s.solver).result;
        return reconstruct(data, g.det, g.init, s.solver, false);
      } catch (const SingularSystemError& e) {
        write_diagnostics(dir / "diagnostics.txt", e.diagnostics,
                          "aborted: singular system at the initial state\n");
        throw;
      }
    }();
    out.converged = res.converged;
    out.iterations = static_cast<int>(res.history.size());
    out.final_residual = res.final_residual;
    out.dropped_rows = res.dropped_rows;
    out.lambda = res.state.lambda;

    const fs::path rc = dir / "reconstruction.csv";
    {
      std::ofstream f = open_text(rc);
      f << "section,index,coord,true_value,init_value,rec_value\n";
      csv_section(f, "shape", node_coords(g.truth.cloud),
                  g.truth.cloud.heights(), g.init.cloud.heights(),
                  res.state.cloud.heights());
      csv_section(f, "alpha", segment_coords(g.truth.cloud),
                  g.truth.alpha.segment_values, g.init.alpha.segment_values,
                  res.state.alpha.segment_values);
      csv_section(f, "alpha_side",
                  {g.truth.cloud.x_left(), g.truth.cloud.x_right()},
                  {g.truth.alpha.alpha_L, g.truth.alpha.alpha_R},
                  {g.init.alpha.alpha_L, g.init.alpha.alpha_R},
                  {res.state.alpha.alpha_L, res.state.alpha.alpha_R});
      csv_section(f, "beta", knot_coords(g.truth.beta), g.truth.beta.knots(),
                  g.init.beta.knots(), res.state.beta.knots());
    }
    out.files.push_back(rc.string());
    out.files.push_back(write_history(dir, res.history));

    std::ostringstream extra;
    extra << "converged: " << (res.converged ? "yes" : "no") << "\n"
          << "iterations: " << res.history.size() << "\n"
          << "final residual: " << std::setprecision(17) << res.final_residual
          << "\n"
          << "dropped rows: " << res.dropped_rows << "\n";
    if (s.estimate_speed)
      extra << "recovered speed factor: " << res.state.lambda << "\n";
    out.files.push_back(
        write_diagnostics(dir / "diagnostics.txt", res.diagnostics,
                          extra.str()));
    out.files.push_back(write_final_state(dir, res.state));

    out.files.push_back(write_chart(
        dir / "shape.svg", "boundary height",
        {{"true", kTrueColor, node_coords(g.truth.cloud),
          g.truth.cloud.heights()},
         {"reconstructed", kRecColor, node_coords(g.truth.cloud),
          res.state.cloud.heights()},
         {"initial", kInitColor, node_coords(g.truth.cloud),
          g.init.cloud.heights()}}));
    out.files.push_back(write_chart(
        dir / "alpha.svg", "emission strength",
        {{"true", kTrueColor, segment_coords(g.truth.cloud),
          g.truth.alpha.segment_values},
         {"reconstructed", kRecColor, segment_coords(g.truth.cloud),
          res.state.alpha.segment_values},
         {"initial", kInitColor, segment_coords(g.truth.cloud),
          g.init.alpha.segment_values}}));
    out.files.push_back(write_chart(
        dir / "beta.svg", "angular profile",
        {{"true", kTrueColor, knot_coords(g.truth.beta), g.truth.beta.knots()},
         {"reconstructed", kRecColor, knot_coords(g.truth.beta),
          res.state.beta.knots()},
         {"initial", kInitColor, knot_coords(g.truth.beta),
          g.init.beta.knots()}}));
  } else {
    const PolarScenario& p = *s.polar;
    const ReconstructionResult<PolarState> res = [&] {
      try {
        return reconstruct(data, p.det, p.init, s.solver);
      } catch (const SingularSystemError& e) {
        write_diagnostics(dir / "diagnostics.txt", e.diagnostics,
                          "aborted: singular system at the initial state\n");
        throw;
      }
    }();
    out.converged = res.converged;
    out.iterations = static_cast<int>(res.history.size());
    out.final_residual = res.final_residual;
    out.dropped_rows = res.dropped_rows;

    const fs::path rc = dir / "reconstruction.csv";
    {
      std::ofstream f = open_text(rc);
      f << "section,index,coord,true_value,init_value,rec_value\n";
      csv_section(f, "shape", vertex_coords(p.truth.cloud),
                  p.truth.cloud.radii(), p.init.cloud.radii(),
                  res.state.cloud.radii());
      csv_section(f, "alpha", segment_coords(p.truth.cloud),
                  p.truth.alpha.segment_values, p.init.alpha.segment_values,
                  res.state.alpha.segment_values);
      csv_section(f, "beta", knot_coords(p.truth.beta), p.truth.beta.knots(),
                  p.init.beta.knots(), res.state.beta.knots());
    }
    out.files.push_back(rc.string());
    out.files.push_back(write_history(dir, res.history));

    std::ostringstream extra;
    extra << "converged: " << (res.converged ? "yes" : "no") << "\n"
          << "iterations: " << res.history.size() << "\n"
          << "final residual: " << std::setprecision(17) << res.final_residual
          << "\n"
          << "dropped rows: " << res.dropped_rows << "\n";
    out.files.push_back(
        write_diagnostics(dir / "diagnostics.txt", res.diagnostics,
                          extra.str()));
    out.files.push_back(write_final_state(dir, res.state));

    out.files.push_back(write_chart(
        dir / "shape.svg", "boundary radius",
        {{"true", kTrueColor, vertex_coords(p.truth.cloud),
          p.truth.cloud.radii()},
         {"reconstructed", kRecColor, vertex_coords(p.truth.cloud),
          res.state.cloud.radii()},
         {"initial", kInitColor, vertex_coords(p.truth.cloud),
          p.init.cloud.radii()}}));
    out.files.push_back(write_chart(
        dir / "alpha.svg", "emission strength",
        {{"true", kTrueColor, segment_coords(p.truth.cloud),
          p.truth.alpha.segment_values},
         {"reconstructed", kRecColor, segment_coords(p.truth.cloud),
          res.state.alpha.segment_values},
         {"initial", kInitColor, segment_coords(p.truth.cloud),
          p.init.alpha.segment_values}}));
    out.files.push_back(write_chart(
        dir / "beta.svg", "angular profile",
        {{"true", kTrueColor, knot_coords(p.truth.beta), p.truth.beta.knots()},
         {"reconstructed", kRecColor, knot_coords(p.truth.beta),
          res.state.beta.knots()},
         {"initial", kInitColor, knot_coords(p.truth.beta),
          p.init.beta.knots()}}));
  }
  return out;
}

SpeedSweepArtifacts cmd_speed_demo(const Scenario& s) {
  if (!s.graph)
    throw ScenarioError("speed-demo: needs a graph scenario");
  const GraphScenario& g = *s.graph;
  const fs::path dir = ensure_outdir(s.outdir);
  std::vector<double> sweep = s.speed_sweep;
  if (sweep.empty()) sweep = {0.7, 0.8, 0.9};

  SpeedSweepArtifacts out;
  for (std::size_t k = 0; k < sweep.size(); ++k) {
    MeasurementSet ms = measure_graph(g.truth.cloud, g.truth.alpha,
                                      g.truth.beta, g.det, sweep[k]);
    if (s.noise_sigma > 0.0)
      ms = add_noise(ms, s.noise_sigma,
                     s.noise_seed + static_cast<std::uint32_t>(k));

    SpeedSweepRow row;
    row.lambda_true = sweep[k];
    row.lambda_rec = std::numeric_limits<double>::quiet_NaN();
    double fit_mis = std::numeric_limits<double>::quiet_NaN();
    try {
      const SpeedFit fit = fit_speed(ms, g, s.solver);
      row.lambda_rec = fit.result.state.lambda;
      fit_mis = fit.misfit;
    } catch (const SingularSystemError&) {
    }

    const GraphState truth{g.truth.cloud, g.truth.alpha, g.truth.beta,
                           sweep[k]};
    const LinearizedSystem ts = assemble_graph(truth, g.det, true);
    const IdentifiabilityReport rep = diagnose(ts);
    {
      const std::vector<int> pins = pinned_columns(ts, s.solver);
      Eigen::MatrixXd A(ts.row_count(), ts.col_count() -
                                            static_cast<int>(pins.size()));
      int w = 0;
      for (int c = 0; c < ts.col_count(); ++c)
        if (!std::binary_search(pins.begin(), pins.end(), c))
          A.col(w++) = ts.A.col(c);
      const Eigen::JacobiSVD<Eigen::MatrixXd> svd(A);
      row.sigma_max = svd.singularValues()(0);
      row.sigma_min = svd.singularValues()(svd.singularValues().size() - 1);
    }
    row.speed_degenerate = rep.speed_degenerate;
    out.rows.push_back(row);

    std::ostringstream extra;
    extra << std::setprecision(17);
    extra << "true speed factor: " << row.lambda_true << "\n";
    extra << "recovered speed factor: " << row.lambda_rec << "\n";
    extra << "reconstruction misfit: " << fit_mis << "\n";
    out.files.push_back(write_diagnostics(
        dir / ("diagnostics_" + std::to_string(k) + ".txt"), rep,
        extra.str()));
  }

  const fs::path sp = dir / "speed_sweep.csv";
  {
    std::ofstream f = open_text(sp);
    f << "lambda_true,lambda_rec,sigma_min,sigma_max,speed_degenerate\n";
    for (const SpeedSweepRow& r : out.rows)
      f << r.lambda_true << "," << r.lambda_rec << "," << r.sigma_min << ","
        << r.sigma_max << "," << (r.speed_degenerate ? 1 : 0) << "\n";
  }
  out.files.push_back(sp.string());
  return out;
}

DiagnoseArtifacts cmd_diagnose(const Scenario& s) {
  const fs::path dir = ensure_outdir(s.outdir);
  const LinearizedSystem sys =
      s.graph ? assemble_graph(s.graph->init, s.graph->det, s.estimate_speed)
              : assemble_polar(s.polar->init, s.polar->det);
  DiagnoseArtifacts out;
  out.report = diagnose(sys);
  out.degeneracy_count = degeneracy_count(out.report);
  out.files.push_back(write_diagnostics(dir / "diagnostics.txt", out.report));
  return out;
}

}  // namespace cloudrecon
