#include "cloudrecon/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>

namespace cloudrecon {

namespace {

// Relative eigenvalue cutoff below which a direction of the normal matrix is
// treated as rank-deficient and receives no step.
constexpr double kEigFloor = 1e-12;

constexpr double kNormFloor = std::numeric_limits<double>::min();

double largest_eigenvalue(const Eigen::MatrixXd& sym) {
  if (sym.rows() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sym,
                                                    Eigen::EigenvaluesOnly);
  return es.eigenvalues().maxCoeff();
}

}  // namespace

std::vector<int> pinned_columns(const LinearizedSystem& sys,
                                const SolverConfig& cfg) {
  const int P = sys.block_size(UnknownBlock::Beta) - 1;
  if (P % 2 != 0)
    throw std::invalid_argument(
        "solver: gauge fixing needs a profile knot at pi/2, "
        "use an even interval count");
  std::vector<int> pins{sys.block_offset(UnknownBlock::Beta) + P / 2};
  const int off = sys.block_offset(UnknownBlock::Shape);
  const int n = sys.block_size(UnknownBlock::Shape);
  if (sys.polar) {
    if (cfg.pin_index < 0 || cfg.pin_index >= n)
      throw std::invalid_argument("solver: pin_index outside the radius grid");
    pins.push_back(off + cfg.pin_index);
  } else {
    pins.push_back(off);
    pins.push_back(off + n - 1);
  }
  std::sort(pins.begin(), pins.end());
  return pins;
}

namespace {

struct Reduction {
  std::vector<int> keep;  // kept column indices into the full layout
  Eigen::MatrixXd A;
  Eigen::MatrixXd B;  // penalty spread over the kept columns
};

Reduction reduce(const LinearizedSystem& sys, const SolverConfig& cfg) {
  const std::vector<int> pins = pinned_columns(sys, cfg);
  Reduction red;
  red.keep.reserve(sys.col_count() - pins.size());
  for (int c = 0; c < sys.col_count(); ++c)
    if (!std::binary_search(pins.begin(), pins.end(), c))
      red.keep.push_back(c);
  const int m = static_cast<int>(red.keep.size());
  const int shape_off = sys.block_offset(UnknownBlock::Shape);
  const int shape_n = sys.block_size(UnknownBlock::Shape);
  red.A.resize(sys.A.rows(), m);
  red.B = Eigen::MatrixXd::Zero(sys.B.rows(), m);
  for (int c = 0; c < m; ++c) {
    const int j = red.keep[c];
    red.A.col(c) = sys.A.col(j);
    if (sys.B.rows() > 0 && j >= shape_off && j < shape_off + shape_n)
      red.B.col(c) = sys.B.col(j - shape_off);
  }
  return red;
}

}  // namespace

void SolverConfig::validate() const {
  if (max_iter < 1) throw std::invalid_argument("solver: max_iter must be >= 1");
  if (!(tol_step > 0.0) || !(tol_resid > 0.0))
    throw std::invalid_argument("solver: tolerances must be positive");
  if (max_halvings < 0)
    throw std::invalid_argument("solver: max_halvings must be >= 0");
  if (reg_weight && !(*reg_weight >= 0.0))
    throw std::invalid_argument("solver: reg_weight must be >= 0");
}

SingularSystemError::SingularSystemError(IdentifiabilityReport rep)
    : std::runtime_error(
          "normal matrix is numerically singular without a penalty weight; "
          "see the attached identifiability report"),
      diagnostics(std::move(rep)) {}

double resolve_reg_weight(const LinearizedSystem& system,
                          const SolverConfig& cfg) {
  if (cfg.reg_weight) return *cfg.reg_weight;
  const Reduction red = reduce(system, cfg);
  const double amax = largest_eigenvalue(red.A.transpose() * red.A);
  const double bmax = largest_eigenvalue(red.B.transpose() * red.B);
  return bmax > 0.0 ? 1e-4 * amax / bmax : 0.0;
}

GnStep gn_step(const LinearizedSystem& system, const Eigen::VectorXd& residual,
               const SolverConfig& cfg) {
  cfg.validate();
  if (residual.size() != system.row_count())
    throw std::invalid_argument(
        "gn_step: residual length does not match the row count");
  const Reduction red = reduce(system, cfg);
  const Eigen::MatrixXd AtA = red.A.transpose() * red.A;
  const Eigen::MatrixXd BtB = red.B.transpose() * red.B;
  double mu;
  if (cfg.reg_weight) {
    mu = *cfg.reg_weight;
  } else {
    const double bmax = largest_eigenvalue(BtB);
    mu = bmax > 0.0 ? 1e-4 * largest_eigenvalue(AtA) / bmax : 0.0;
  }
  Eigen::MatrixXd H = AtA;
  if (mu > 0.0 && BtB.rows() > 0) H += mu * BtB;

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(H);
  if (es.info() != Eigen::Success)
    throw std::runtime_error("gn_step: eigendecomposition failed");
  const Eigen::VectorXd& ev = es.eigenvalues();  // ascending
  const double lmax = std::max(ev.size() > 0 ? ev.maxCoeff() : 0.0, 0.0);
  const double cut = kEigFloor * lmax;
  if (mu == 0.0 && (lmax <= 0.0 || ev.minCoeff() <= cut))
    throw SingularSystemError(diagnose(system));

  const Eigen::VectorXd g = red.A.transpose() * residual;
  const Eigen::VectorXd gh = es.eigenvectors().transpose() * g;
  Eigen::VectorXd xr = Eigen::VectorXd::Zero(static_cast<int>(red.keep.size()));
  double lmin_used = lmax;
  for (int i = 0; i < ev.size(); ++i) {
    if (ev(i) <= cut) continue;
    xr += (gh(i) / ev(i)) * es.eigenvectors().col(i);
    lmin_used = std::min(lmin_used, ev(i));
  }
  GnStep out;
  out.delta = Eigen::VectorXd::Zero(system.col_count());
  for (std::size_t c = 0; c < red.keep.size(); ++c)
    out.delta(red.keep[c]) = xr(static_cast<int>(c));
  out.condition = lmin_used > 0.0 ? lmax / lmin_used : 0.0;
  return out;
}

namespace {

struct Filtered {
  LinearizedSystem sys;
  Eigen::VectorXd data_values;
  int data_hits = 0;  // hit rays in the data, kept or not
};

// Restricts a linearized system to the rows whose ray is also hit in the
// data and gathers the matching data values.
Filtered filter_rows(const LinearizedSystem& sys, const MeasurementSet& data) {
  Filtered out;
  for (int n = 0; n < data.pixel_count(); ++n)
    for (int j = 0; j < data.angle_count(); ++j)
      if (data.status(n, j) == PixelStatus::Hit) ++out.data_hits;

  std::vector<int> kept;
  for (int r = 0; r < sys.row_count(); ++r) {
    const RowRef& rr = sys.rows[static_cast<std::size_t>(r)];
    if (rr.pixel < 0 || rr.pixel >= data.pixel_count() || rr.angle < 0 ||
        rr.angle >= data.angle_count())
      throw std::invalid_argument(
          "reconstruct: measurement grid does not match the detector");
    if (data.status(rr.pixel, rr.angle) == PixelStatus::Hit) kept.push_back(r);
  }

  const int m = static_cast<int>(kept.size());
  Eigen::MatrixXd A(m, sys.col_count());
  Eigen::VectorXd pred(m), vals(m);
  std::vector<RowRef> rows(static_cast<std::size_t>(m));
  for (int i = 0; i < m; ++i) {
    const int r = kept[static_cast<std::size_t>(i)];
    A.row(i) = sys.A.row(r);
    pred(i) = sys.predicted(r);
    rows[static_cast<std::size_t>(i)] = sys.rows[static_cast<std::size_t>(r)];
    vals(i) = data.value(rows[static_cast<std::size_t>(i)].pixel,
                         rows[static_cast<std::size_t>(i)].angle);
  }
  out.sys = sys;
  out.sys.A = std::move(A);
  out.sys.predicted = std::move(pred);
  out.sys.rows = std::move(rows);
  out.data_values = std::move(vals);
  return out;
}

// Misfit of a trial state over a fixed row set, against the same denominator
// the current iterate was scored with. Rows where the trial loses the ray
// count the full data value, so a step cannot pay for itself by shrinking the
// footprint; rays outside the set are ignored, so rays flickering across the
// tangency threshold cannot veto an otherwise descending step.
double masked_misfit(const MeasurementSet& data, const MeasurementSet& trial,
                     const std::vector<RowRef>& rows, double denom) {
  double rr = 0.0;
  for (const RowRef& r : rows) {
    const double dv = data.value(r.pixel, r.angle);
    const double tv = trial.status(r.pixel, r.angle) == PixelStatus::Hit
                          ? trial.value(r.pixel, r.angle)
                          : 0.0;
    rr += (dv - tv) * (dv - tv);
  }
  return std::sqrt(rr) / denom;
}

void clamp_nonneg(double* begin, double* end) {
  for (double* p = begin; p != end; ++p) *p = std::max(*p, 0.0);
}

struct GraphProblem {
  using State = GraphState;
  const DetectorLine& det;
  bool with_speed;

  LinearizedSystem assemble(const State& s) const {
    return assemble_graph(s, det, with_speed);
  }
  MeasurementSet measure(const State& s) const {
    return measure_graph(s.cloud, s.alpha, s.beta, det, s.lambda);
  }
  Eigen::VectorXd pack(const State& s) const {
    return pack_state(s, with_speed);
  }
  State unpack(const State& ref, const Eigen::VectorXd& v) const {
    return unpack_state(ref, v, with_speed);
  }

  // Keeps candidate vectors inside the region the forward model accepts:
  // emission strengths and knots stay nonnegative, heights stay strictly
  // between the base and the detector line, the speed stays in a band that
  // keeps the advected abscissae on the track.
  Eigen::VectorXd clamp(const State& ref, Eigen::VectorXd v) const {
    const int n_seg = static_cast<int>(ref.alpha.segment_values.size());
    const int K = ref.beta.knot_count();
    const int N = ref.cloud.node_count();
    const double base = ref.cloud.base();
    if (!(det.Z > base))
      throw std::invalid_argument("solver: detector line below the cloud base");
    const double margin = 1e-6 * (det.Z - base);
    clamp_nonneg(v.data(), v.data() + n_seg + 2);
    clamp_nonneg(v.data() + n_seg + 2, v.data() + n_seg + 2 + K);
    double* h = v.data() + n_seg + 2 + K;
    for (int i = 0; i < N; ++i)
      h[i] = std::clamp(h[i], base + margin, det.Z - margin);
    if (with_speed) {
      double& lam = v(n_seg + 2 + K + N);
      lam = std::clamp(lam, 0.05, 2.0);
    }
    return v;
  }
};

struct PolarProblem {
  using State = PolarState;
  const DetectorCircle& det;

  LinearizedSystem assemble(const State& s) const {
    return assemble_polar(s, det);
  }
  MeasurementSet measure(const State& s) const {
    return measure_polar(s.cloud, s.alpha, s.beta, det);
  }
  Eigen::VectorXd pack(const State& s) const { return pack_state(s); }
  State unpack(const State& ref, const Eigen::VectorXd& v) const {
    return unpack_state(ref, v);
  }

  Eigen::VectorXd clamp(const State& ref, Eigen::VectorXd v) const {
    const int n_seg = static_cast<int>(ref.alpha.segment_values.size());
    const int K = ref.beta.knot_count();
    const int N = ref.cloud.vertex_count();
    clamp_nonneg(v.data(), v.data() + n_seg + K);
    double* r = v.data() + n_seg + K;
    for (int i = 0; i < N; ++i)
      r[i] = std::clamp(r[i], 1e-6 * det.R, (1.0 - 1e-6) * det.R);
    return v;
  }
};

template <class Problem>
ReconstructionResult<typename Problem::State> run_gn(
    const Problem& pb, const MeasurementSet& data,
    const typename Problem::State& init, const SolverConfig& cfg) {
  cfg.validate();
  using State = typename Problem::State;

  State state = pb.unpack(init, pb.clamp(init, pb.pack(init)));
  ReconstructionResult<State> out{state, {}, {}, false, 0.0, 0};
  SolverConfig local = cfg;

  LinearizedSystem sys = pb.assemble(state);
  for (int iter = 0; iter < local.max_iter; ++iter) {
    const Filtered f = filter_rows(sys, data);
    if (f.sys.row_count() == 0)
      throw std::invalid_argument(
          "reconstruct: the data and the current state share no hit rays");
    const Eigen::VectorXd resid = f.data_values - f.sys.predicted;
    const double denom = std::max(f.data_values.norm(), kNormFloor);
    const double rel = resid.norm() / denom;
    if (iter == 0 && !local.reg_weight)
      local.reg_weight = resolve_reg_weight(f.sys, local);
    if (rel <= local.tol_resid) {
      out.converged = true;
      break;
    }

    const GnStep gs = gn_step(f.sys, resid, local);
    const Eigen::VectorXd v = pb.pack(state);
    bool accepted = false;
    State cand = state;
    double t = 1.0;
    for (int k = 0; k <= local.max_halvings; ++k, t *= 0.5) {
      State trial = state;
      try {
        trial = pb.unpack(state, pb.clamp(state, v + t * gs.delta));
      } catch (const std::invalid_argument&) {
        continue;  // clamping cannot rule out every degenerate polygon
      }
      double trial_rel;
      try {
        trial_rel = masked_misfit(data, pb.measure(trial), f.sys.rows, denom);
      } catch (const std::domain_error&) {
        continue;
      }
      if (trial_rel < rel) {
        cand = std::move(trial);
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      out.history.push_back({rel, 0.0, gs.condition});
      break;  // stagnation: no damping level improved the misfit
    }

    const double step_rel =
        (pb.pack(cand) - v).norm() / std::max(v.norm(), kNormFloor);
    state = std::move(cand);
    out.history.push_back({rel, step_rel, gs.condition});
    sys = pb.assemble(state);
    if (step_rel <= local.tol_step) {
      out.converged = true;
      break;
    }
  }

  const Filtered f = filter_rows(sys, data);
  out.final_residual = (f.data_values - f.sys.predicted).norm() /
                       std::max(f.data_values.norm(), kNormFloor);
  out.dropped_rows = f.data_hits - f.sys.row_count();
  out.diagnostics = diagnose(f.sys);
  out.state = std::move(state);
  return out;
}

AlphaField scale_alpha(AlphaField a, double c) {
  for (double& v : a.segment_values) v *= c;
  a.alpha_L *= c;
  a.alpha_R *= c;
  return a;
}

BetaProfile divide_beta(const BetaProfile& b, double c) {
  std::vector<double> knots = b.knots();
  for (double& v : knots) v /= c;
  return BetaProfile(std::move(knots), b.normalization());
}

double gauge_factor(const BetaProfile& b) {
  const double c = b.nadir_value();
  if (!(c > 0.0))
    throw GaugeError("fix_gauge: profile value at pi/2 must be positive");
  return c;
}

}  // namespace

ReconstructionResult<GraphState> reconstruct(const MeasurementSet& data,
                                             const DetectorLine& det,
                                             const GraphState& init,
                                             const SolverConfig& cfg,
                                             bool with_speed) {
  if (data.polar)
    throw std::invalid_argument(
        "reconstruct: polar data passed to the graph solver");
  const GraphProblem pb{det, with_speed};
  return run_gn(pb, data, init, cfg);
}

double relative_misfit(const MeasurementSet& data,
                       const MeasurementSet& current) {
  double rr = 0.0, dd = 0.0;
  int data_hits = 0;
  for (int n = 0; n < data.pixel_count(); ++n) {
    for (int j = 0; j < data.angle_count(); ++j) {
      const double dv =
          data.status(n, j) == PixelStatus::Hit ? data.value(n, j) : 0.0;
      const double cv =
          current.status(n, j) == PixelStatus::Hit ? current.value(n, j) : 0.0;
      rr += (dv - cv) * (dv - cv);
      if (data.status(n, j) == PixelStatus::Hit) {
        dd += dv * dv;
        ++data_hits;
      }
    }
  }
  if (data_hits == 0) return std::numeric_limits<double>::infinity();
  return std::sqrt(rr) / std::max(std::sqrt(dd), kNormFloor);
}

ReconstructionResult<PolarState> reconstruct(const MeasurementSet& data,
                                             const DetectorCircle& det,
                                             const PolarState& init,
                                             const SolverConfig& cfg) {
  if (!data.polar)
    throw std::invalid_argument(
        "reconstruct: graph data passed to the polar solver");
  const PolarProblem pb{det};
  return run_gn(pb, data, init, cfg);
}

GraphState fix_gauge(const GraphState& state) {
  const double c = gauge_factor(state.beta);
  return {state.cloud, scale_alpha(state.alpha, c), divide_beta(state.beta, c),
          state.lambda};
}

PolarState fix_gauge(const PolarState& state) {
  const double c = gauge_factor(state.beta);
  return {state.cloud, scale_alpha(state.alpha, c),
          divide_beta(state.beta, c)};
}

}  // namespace cloudrecon
