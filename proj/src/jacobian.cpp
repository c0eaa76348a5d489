#include "cloudrecon/jacobian.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace cloudrecon {

namespace {

// Curvature magnitude of the surface at each node, from second differences.
std::vector<double> graph_curvature(const GraphCloud& cloud) {
  const auto& h = cloud.heights();
  const int N = cloud.node_count();
  const double dx = cloud.dx();
  std::vector<double> kappa(N, 0.0);
  for (int i = 1; i + 1 < N; ++i) {
    const double d2 = (h[i - 1] - 2.0 * h[i] + h[i + 1]) / (dx * dx);
    const double d1 = (h[i + 1] - h[i - 1]) / (2.0 * dx);
    kappa[i] = std::abs(d2) / std::pow(1.0 + d1 * d1, 1.5);
  }
  if (N > 2) {
    kappa[0] = kappa[1];
    kappa[N - 1] = kappa[N - 2];
  }
  return kappa;
}

// For a polar boundary the radius itself bends along a straight chord, so the
// flatness test needs the true curve curvature, not r''.
std::vector<double> polar_curvature(const PolarCloud& cloud) {
  const auto& r = cloud.radii();
  const int N = cloud.vertex_count();
  const double dt = cloud.dtheta();
  std::vector<double> kappa(N, 0.0);
  for (int i = 0; i < N; ++i) {
    const double rm = r[(i + N - 1) % N], rp = r[(i + 1) % N];
    const double d1 = (rp - rm) / (2.0 * dt);
    const double d2 = (rm - 2.0 * r[i] + rp) / (dt * dt);
    const double g = r[i] * r[i] + d1 * d1;
    kappa[i] = std::abs(r[i] * r[i] + 2.0 * d1 * d1 - r[i] * d2) /
               std::pow(g, 1.5);
  }
  return kappa;
}

std::vector<double> nodal_slopes(const AlphaReconstruction& rec,
                                 double spacing, bool cyclic) {
  const auto& a = rec.nodal();
  const int n = rec.node_count();
  std::vector<double> s(n, 0.0);
  if (cyclic) {
    for (int i = 0; i < n; ++i)
      s[i] = (a[(i + 1) % n] - a[(i + n - 1) % n]) / (2.0 * spacing);
  } else {
    for (int i = 1; i + 1 < n; ++i)
      s[i] = (a[i + 1] - a[i - 1]) / (2.0 * spacing);
    if (n > 1) {
      s[0] = (a[1] - a[0]) / spacing;
      s[n - 1] = (a[n - 1] - a[n - 2]) / spacing;
    }
  }
  return s;
}

// Samples of (1, cot(phi), (ln beta)'(phi)) at the detector angles; angles
// outside the open upper half-plane contribute zero columns.
Eigen::MatrixXd gram_rows(const std::vector<double>& angles,
                          const BetaProfile& beta) {
  Eigen::MatrixXd S = Eigen::MatrixXd::Zero(3, angles.size());
  for (std::size_t j = 0; j < angles.size(); ++j) {
    const double phi = angles[j];
    if (!(phi > kGrazeTol && phi < M_PI - kGrazeTol)) continue;
    S(0, j) = 1.0;
    S(1, j) = std::cos(phi) / std::sin(phi);
    S(2, j) = beta.slope(phi) / std::max(beta.eval(phi), 1e-12);
  }
  return S;
}

int count_hits(const MeasurementSet& ms) {
  int n = 0;
  for (PixelStatus s : ms.mask) n += s == PixelStatus::Hit;
  return n;
}

}  // namespace

int LinearizedSystem::block_offset(UnknownBlock b) const {
  for (int c = 0; c < static_cast<int>(col_map.size()); ++c)
    if (col_map[c].block == b) return c;
  return -1;
}

int LinearizedSystem::block_size(UnknownBlock b) const {
  int n = 0;
  for (const ColumnRef& c : col_map) n += c.block == b;
  return n;
}

const char* block_name(UnknownBlock b) {
  switch (b) {
    case UnknownBlock::AlphaSegment: return "alpha";
    case UnknownBlock::AlphaSide: return "alpha-side";
    case UnknownBlock::Beta: return "beta";
    case UnknownBlock::Shape: return "shape";
    case UnknownBlock::Speed: return "speed";
  }
  return "?";
}

Eigen::MatrixXd curvature_penalty(int node_count, double spacing, bool cyclic) {
  if (node_count < 3)
    throw std::invalid_argument("curvature penalty: need at least three nodes");
  if (!(spacing > 0.0))
    throw std::invalid_argument("curvature penalty: spacing must be positive");
  const double w = 1.0 / (spacing * spacing);
  if (cyclic) {
    Eigen::MatrixXd B = Eigen::MatrixXd::Zero(node_count, node_count);
    for (int i = 0; i < node_count; ++i) {
      B(i, (i + node_count - 1) % node_count) += w;
      B(i, i) += -2.0 * w;
      B(i, (i + 1) % node_count) += w;
    }
    return B;
  }
  Eigen::MatrixXd B = Eigen::MatrixXd::Zero(node_count - 2, node_count);
  for (int i = 0; i + 2 < node_count; ++i) {
    B(i, i) = w;
    B(i, i + 1) = -2.0 * w;
    B(i, i + 2) = w;
  }
  return B;
}

LinearizedSystem assemble_graph(const GraphState& state,
                                const DetectorLine& det, bool with_speed) {
  const GraphCloud& cloud = state.cloud;
  const BetaProfile& beta = state.beta;
  const MeasurementSet ms =
      measure_graph(cloud, state.alpha, beta, det, state.lambda);
  const AlphaReconstruction rec(state.alpha.segment_values, false);

  const int N = cloud.node_count();
  const int n_seg = cloud.segment_count();
  const int P = beta.P();
  const int J = ms.angle_count();
  const int m = det.subsamples;
  const double dx = cloud.dx();

  LinearizedSystem sys;
  sys.polar = false;
  sys.with_speed = with_speed;
  sys.angles = det.angles;
  for (int k = 0; k < n_seg; ++k)
    sys.col_map.push_back({UnknownBlock::AlphaSegment, k});
  sys.col_map.push_back({UnknownBlock::AlphaSide, 0});
  sys.col_map.push_back({UnknownBlock::AlphaSide, 1});
  for (int p = 0; p <= P; ++p) sys.col_map.push_back({UnknownBlock::Beta, p});
  for (int i = 0; i < N; ++i) sys.col_map.push_back({UnknownBlock::Shape, i});
  if (with_speed) sys.col_map.push_back({UnknownBlock::Speed, 0});

  const int cols = static_cast<int>(sys.col_map.size());
  const int col_aL = n_seg, col_aR = n_seg + 1, col_b = n_seg + 2;
  const int col_h = col_b + P + 1;
  const int col_lam = col_h + N;

  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(count_hits(ms), cols);
  Eigen::VectorXd pred(A.rows());
  const double wsub = 1.0 / m;
  int r = 0;

  std::vector<RayProbe> probes(m);
  std::vector<double> xs(m);
  for (int n = 0; n < ms.pixel_count(); ++n) {
    for (int j = 0; j < J; ++j) {
      if (ms.status(n, j) != PixelStatus::Hit) continue;
      const double phi = det.angles[j];
      const double tphi = std::tan(phi);
      const double sphi = std::sin(phi), cphi = std::cos(phi);

      bool tangent = false;
      for (int s = 0; s < m; ++s) {
        xs[s] = det.pixel_size * (det.first_pixel + n + (s + 0.5) / m);
        probes[s] = probe_graph_ray(cloud, state.alpha, rec, beta,
                                    state.lambda * xs[s], det.Z, phi);
        const auto& p = probes[s];
        if (p.intersected && p.hit.piece == BoundaryPiece::Upper &&
            std::abs(tphi - cloud.segment_slope(p.hit.segment_index)) <
                kTangencyTol)
          tangent = true;
      }
      if (tangent) {
        ++sys.dropped_near_tangent;
        continue;
      }

      for (int s = 0; s < m; ++s) {
        const auto& p = probes[s];
        if (!(p.intersected && p.outgoing && !p.blocked)) continue;
        const double bv = beta.eval(p.gamma);
        const double bs = beta.slope(p.gamma);
        const int p0 =
            std::clamp(static_cast<int>(p.gamma / (M_PI / P)), 0, P - 1);

        if (p.hit.piece == BoundaryPiece::Upper) {
          const int k = p.hit.segment_index;
          const double sk = cloud.segment_slope(k);
          const double t = (p.hit.x_or_theta - cloud.x_left()) / dx;
          const double av = rec.value(t);
          const double as = rec.slope(t) / dx;
          for (int q = std::max(0, k - 1); q <= std::min(n_seg - 1, k + 1); ++q)
            A(r, q) += wsub * rec.weight(t, q) * bv;
          for (int p2 = p0; p2 <= p0 + 1; ++p2)
            A(r, col_b + p2) += wsub * av * beta.knot_weight(p.gamma, p2);

          // Shape sensitivity: a height change moves the hit point along the
          // ray by delta_h / (tan(phi) - h') and tilts the segment, changing
          // the emission angle by -(delta_h)' / (1 + h'^2). The cos-scaled
          // forms stay finite at nadir, where tan(phi) diverges.
          const double denom = sphi - sk * cphi;
          const double psi3 = as * bv * cphi / denom;
          const double psi4 = -av * bs / (1.0 + sk * sk);
          const double f = t - k;
          A(r, col_h + k) += wsub * (psi3 * (1.0 - f) - psi4 / dx);
          A(r, col_h + k + 1) += wsub * (psi3 * f + psi4 / dx);
          if (with_speed)
            A(r, col_lam) += wsub * as * bv * sphi / denom * xs[s];
        } else if (p.hit.piece == BoundaryPiece::LeftSide ||
                   p.hit.piece == BoundaryPiece::RightSide) {
          const bool left = p.hit.piece == BoundaryPiece::LeftSide;
          A(r, left ? col_aL : col_aR) += wsub * bv;
          const double av = left ? state.alpha.alpha_L : state.alpha.alpha_R;
          for (int p2 = p0; p2 <= p0 + 1; ++p2)
            A(r, col_b + p2) += wsub * av * beta.knot_weight(p.gamma, p2);
        }
      }
      pred(r) = ms.value(n, j);
      sys.rows.push_back({n, j});
      ++r;
    }
  }

  if (r == 0 && sys.dropped_near_tangent > 0)
    throw DegenerateGeometryError(
        "linearization: every active row is nearly tangent to the surface");

  sys.A = A.topRows(r);
  sys.predicted = pred.head(r);
  sys.B = N >= 3 ? curvature_penalty(N, dx, false)
                 : Eigen::MatrixXd::Zero(0, N);
  sys.gram_samples = gram_rows(det.angles, beta);
  sys.node_alpha_slope = nodal_slopes(rec, dx, false);
  sys.node_curvature = graph_curvature(cloud);
  return sys;
}

LinearizedSystem assemble_polar(const PolarState& state,
                                const DetectorCircle& det) {
  const PolarCloud& cloud = state.cloud;
  const BetaProfile& beta = state.beta;
  const MeasurementSet ms = measure_polar(cloud, state.alpha, beta, det);
  const AlphaReconstruction rec(state.alpha.segment_values, true);

  const int N = cloud.vertex_count();
  const int P = beta.P();
  const int J = ms.angle_count();
  const int m = det.subsamples;
  const double dth = cloud.dtheta();

  LinearizedSystem sys;
  sys.polar = true;
  sys.angles = det.angles;
  for (int k = 0; k < N; ++k)
    sys.col_map.push_back({UnknownBlock::AlphaSegment, k});
  for (int p = 0; p <= P; ++p) sys.col_map.push_back({UnknownBlock::Beta, p});
  for (int i = 0; i < N; ++i) sys.col_map.push_back({UnknownBlock::Shape, i});

  const int cols = static_cast<int>(sys.col_map.size());
  const int col_b = N, col_r = N + P + 1;

  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(count_hits(ms), cols);
  Eigen::VectorXd pred(A.rows());
  const double wsub = 1.0 / m;
  int r = 0;

  // The radius block is finite-differenced after the main pass: perturbing
  // one vertex only disturbs rays whose hit edge touches it, so each
  // contributing subsample is re-traced for its two edge vertices only.
  struct SubRec {
    int row;
    double Theta, phi;
  };
  std::vector<std::vector<SubRec>> by_vertex(N);

  std::vector<RayProbe> probes(m);
  std::vector<double> thetas(m);
  for (int n = 0; n < ms.pixel_count(); ++n) {
    for (int j = 0; j < J; ++j) {
      if (ms.status(n, j) != PixelStatus::Hit) continue;
      const double phi_local = det.angles[j];

      bool tangent = false;
      for (int s = 0; s < m; ++s) {
        thetas[s] = det.dTheta() * (n + (s + 0.5) / m);
        const double phi = polar_global_angle(thetas[s], phi_local);
        probes[s] = probe_polar_ray(cloud, rec, beta, thetas[s], det.R, phi);
        const auto& p = probes[s];
        if (p.intersected) {
          const int k = p.hit.segment_index;
          const Vec2 e =
              (cloud.vertex((k + 1) % N) - cloud.vertex(k)).normalized();
          const Vec2 d{std::cos(phi), std::sin(phi)};
          if (std::abs(d.cross(e)) < kTangencyTol) tangent = true;
        }
      }
      if (tangent) {
        ++sys.dropped_near_tangent;
        continue;
      }

      for (int s = 0; s < m; ++s) {
        const auto& p = probes[s];
        if (!(p.intersected && p.outgoing && !p.blocked)) continue;
        const double bv = beta.eval(p.gamma);
        const int p0 =
            std::clamp(static_cast<int>(p.gamma / (M_PI / P)), 0, P - 1);
        const int k = p.hit.segment_index;
        const double t = (p.hit.x_or_theta - cloud.theta0()) / dth;
        const double av = rec.value(t);
        for (int dq = -1; dq <= 1; ++dq)
          A(r, (k + dq + N) % N) += wsub * rec.weight(t, (k + dq + N) % N) * bv;
        for (int p2 = p0; p2 <= p0 + 1; ++p2)
          A(r, col_b + p2) += wsub * av * beta.knot_weight(p.gamma, p2);
        const double phi = polar_global_angle(thetas[s], phi_local);
        by_vertex[k].push_back({r, thetas[s], phi});
        by_vertex[(k + 1) % N].push_back({r, thetas[s], phi});
      }
      pred(r) = ms.value(n, j);
      sys.rows.push_back({n, j});
      ++r;
    }
  }

  if (r == 0 && sys.dropped_near_tangent > 0)
    throw DegenerateGeometryError(
        "linearization: every active row is nearly tangent to the surface");

  for (int v = 0; v < N; ++v) {
    if (by_vertex[v].empty()) continue;
    const double eps = 1e-6 * std::max(1.0, cloud.radii()[v]);
    std::vector<double> rp = cloud.radii(), rm = cloud.radii();
    rp[v] += eps;
    rm[v] -= eps;
    const PolarCloud plus(cloud.theta0(), rp);
    const PolarCloud minus(cloud.theta0(), rm);
    for (const SubRec& sr : by_vertex[v]) {
      const double up =
          probe_polar_ray(plus, rec, beta, sr.Theta, det.R, sr.phi).value;
      const double um =
          probe_polar_ray(minus, rec, beta, sr.Theta, det.R, sr.phi).value;
      A(sr.row, col_r + v) += wsub * (up - um) / (2.0 * eps);
    }
  }

  sys.A = A.topRows(r);
  sys.predicted = pred.head(r);
  sys.B = curvature_penalty(N, dth, true);
  sys.gram_samples = gram_rows(det.angles, beta);
  sys.node_alpha_slope = nodal_slopes(rec, dth, true);
  sys.node_curvature = polar_curvature(cloud);
  return sys;
}

Eigen::VectorXd pack_state(const GraphState& state, bool with_speed) {
  const int n_seg = static_cast<int>(state.alpha.segment_values.size());
  const int K = static_cast<int>(state.beta.knots().size());
  const int N = state.cloud.node_count();
  Eigen::VectorXd v(n_seg + 2 + K + N + (with_speed ? 1 : 0));
  int c = 0;
  for (double a : state.alpha.segment_values) v(c++) = a;
  v(c++) = state.alpha.alpha_L;
  v(c++) = state.alpha.alpha_R;
  for (double b : state.beta.knots()) v(c++) = b;
  for (double h : state.cloud.heights()) v(c++) = h;
  if (with_speed) v(c++) = state.lambda;
  return v;
}

GraphState unpack_state(const GraphState& reference, const Eigen::VectorXd& v,
                        bool with_speed) {
  const int n_seg = static_cast<int>(reference.alpha.segment_values.size());
  const int K = static_cast<int>(reference.beta.knots().size());
  const int N = reference.cloud.node_count();
  if (v.size() != n_seg + 2 + K + N + (with_speed ? 1 : 0))
    throw std::invalid_argument("state vector: length mismatch");
  int c = 0;
  AlphaField alpha;
  alpha.segment_values.assign(v.data(), v.data() + n_seg);
  c += n_seg;
  alpha.alpha_L = v(c++);
  alpha.alpha_R = v(c++);
  std::vector<double> knots(v.data() + c, v.data() + c + K);
  c += K;
  std::vector<double> heights(v.data() + c, v.data() + c + N);
  c += N;
  GraphState out{
      GraphCloud(reference.cloud.x_left(), reference.cloud.x_right(),
                 reference.cloud.base(), std::move(heights)),
      std::move(alpha),
      BetaProfile(std::move(knots), reference.beta.normalization()),
      with_speed ? v(c) : reference.lambda};
  return out;
}

Eigen::VectorXd pack_state(const PolarState& state) {
  const int n_seg = static_cast<int>(state.alpha.segment_values.size());
  const int K = static_cast<int>(state.beta.knots().size());
  const int N = state.cloud.vertex_count();
  Eigen::VectorXd v(n_seg + K + N);
  int c = 0;
  for (double a : state.alpha.segment_values) v(c++) = a;
  for (double b : state.beta.knots()) v(c++) = b;
  for (double rr : state.cloud.radii()) v(c++) = rr;
  return v;
}

PolarState unpack_state(const PolarState& reference, const Eigen::VectorXd& v) {
  const int n_seg = static_cast<int>(reference.alpha.segment_values.size());
  const int K = static_cast<int>(reference.beta.knots().size());
  const int N = reference.cloud.vertex_count();
  if (v.size() != n_seg + K + N)
    throw std::invalid_argument("state vector: length mismatch");
  int c = 0;
  AlphaField alpha;
  alpha.segment_values.assign(v.data(), v.data() + n_seg);
  c += n_seg;
  std::vector<double> knots(v.data() + c, v.data() + c + K);
  c += K;
  std::vector<double> radii(v.data() + c, v.data() + c + N);
  PolarState out{PolarCloud(reference.cloud.theta0(), std::move(radii)),
                 std::move(alpha),
                 BetaProfile(std::move(knots), reference.beta.normalization())};
  return out;
}

Eigen::VectorXd forward_rows(const GraphState& state, const DetectorLine& det,
                             const std::vector<RowRef>& rows) {
  const MeasurementSet ms =
      measure_graph(state.cloud, state.alpha, state.beta, det, state.lambda);
  Eigen::VectorXd v(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i)
    v(i) = ms.value(rows[i].pixel, rows[i].angle);
  return v;
}

Eigen::VectorXd forward_rows(const PolarState& state, const DetectorCircle& det,
                             const std::vector<RowRef>& rows) {
  const MeasurementSet ms =
      measure_polar(state.cloud, state.alpha, state.beta, det);
  Eigen::VectorXd v(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i)
    v(i) = ms.value(rows[i].pixel, rows[i].angle);
  return v;
}

Eigen::MatrixXd finite_difference_jacobian(
    const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& forward_map,
    const Eigen::VectorXd& v0, double eps_rel) {
  if (!(eps_rel >= 1e-8 && eps_rel <= 1e-3))
    throw std::invalid_argument(
        "finite differences: relative step must lie in [1e-8, 1e-3]");
  Eigen::MatrixXd J;
  for (int i = 0; i < v0.size(); ++i) {
    const double h = eps_rel * std::max(1.0, std::abs(v0(i)));
    Eigen::VectorXd vp = v0, vm = v0;
    vp(i) += h;
    vm(i) -= h;
    const Eigen::VectorXd fp = forward_map(vp);
    const Eigen::VectorXd fm = forward_map(vm);
    if (J.size() == 0) J = Eigen::MatrixXd::Zero(fp.size(), v0.size());
    J.col(i) = (fp - fm) / (2.0 * h);
  }
  return J;
}

IdentifiabilityReport diagnose(const LinearizedSystem& system) {
  IdentifiabilityReport rep;
  const int C = system.col_count();
  const Eigen::MatrixXd M = system.A.transpose() * system.A;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(M);
  rep.spectrum = es.eigenvalues().reverse();
  const double top = std::max(rep.spectrum(0), 0.0);
  rep.rank_threshold = 1e-10 * top;
  for (int i = 0; i < C; ++i) rep.rank += rep.spectrum(i) > rep.rank_threshold;

  for (int i = 0; i < C; ++i) {
    const double ev = es.eigenvalues()(i);
    if (ev > rep.rank_threshold) continue;
    const auto vec = es.eigenvectors().col(i);
    double mass[5] = {};
    for (int c = 0; c < C; ++c)
      mass[static_cast<int>(system.col_map[c].block)] += vec(c) * vec(c);
    int best = 0;
    for (int b = 1; b < 5; ++b)
      if (mass[b] > mass[best]) best = b;
    rep.near_null.push_back(
        {ev, static_cast<UnknownBlock>(best), mass[best]});
  }

  if (system.gram_samples.cols() > 0) {
    const Eigen::Matrix3d G =
        system.gram_samples * system.gram_samples.transpose();
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> gs(G);
    const double lo = std::max(gs.eigenvalues()(0), 0.0);
    const double hi = gs.eigenvalues()(2);
    rep.gram_condition =
        lo > 0.0 ? hi / lo : std::numeric_limits<double>::infinity();
    const double n2 = system.gram_samples.row(1).norm();
    const double n3 = system.gram_samples.row(2).norm();
    if (n2 > 0.0 && n3 > 0.0) {
      const double corr =
          system.gram_samples.row(1).dot(system.gram_samples.row(2)) /
          (n2 * n3);
      rep.angular_slope_matches_cot = std::abs(corr) > 0.995;
    }
  }

  const int sp = system.block_offset(UnknownBlock::Speed);
  if (sp >= 0) {
    rep.speed_column_norm = system.A.col(sp).norm();
    rep.speed_degenerate =
        rep.speed_column_norm <= 1e-10 * std::max(system.A.norm(), 1e-300);
  }

  const auto& sl = system.node_alpha_slope;
  const auto& cu = system.node_curvature;
  if (!sl.empty() && sl.size() == cu.size()) {
    double max_s = 0.0, max_c = 0.0;
    for (double v : sl) max_s = std::max(max_s, std::abs(v));
    for (double v : cu) max_c = std::max(max_c, v);
    const double s_tol = 1e-2 * max_s + 1e-9;
    const double c_tol = 1e-2 * max_c + 1e-9;
    for (std::size_t i = 0; i < sl.size(); ++i)
      if (std::abs(sl[i]) <= s_tol && cu[i] <= c_tol)
        rep.insensitive_nodes.push_back(static_cast<int>(i));
  }
  return rep;
}

std::string IdentifiabilityReport::summary() const {
  std::ostringstream os;
  os << "rank " << rank << "/" << spectrum.size() << " (threshold "
     << rank_threshold << ")\n";
  os << "near-null modes: " << near_null.size() << "\n";
  for (const NullMode& m : near_null)
    os << "  eigenvalue " << m.eigenvalue << " dominated by "
       << block_name(m.dominant) << " (mass " << m.mass_fraction << ")\n";
  os << "gram condition " << gram_condition
     << (angular_slope_matches_cot
             ? " (angular slope indistinguishable from cot)\n"
             : "\n");
  if (speed_column_norm >= 0.0)
    os << "speed column norm " << speed_column_norm
       << (speed_degenerate ? " (degenerate)" : "") << "\n";
  os << "insensitive nodes: " << insensitive_nodes.size();
  if (!insensitive_nodes.empty() && insensitive_nodes.size() <= 24) {
    os << " (";
    for (std::size_t i = 0; i < insensitive_nodes.size(); ++i)
      os << (i ? " " : "") << insensitive_nodes[i];
    os << ")";
  }
  os << "\n";
  return os.str();
}

}  // namespace cloudrecon
