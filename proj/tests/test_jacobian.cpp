#include "cloudrecon/jacobian.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "doctest.h"

using namespace cloudrecon;

namespace {

AlphaField constant_alpha(int segments, double value, double side = 0.2) {
  AlphaField a;
  a.segment_values.assign(segments, value);
  a.alpha_L = side;
  a.alpha_R = side;
  return a;
}

Eigen::VectorXd gauge_direction(const LinearizedSystem& sys,
                                const AlphaField& alpha,
                                const BetaProfile& beta) {
  Eigen::VectorXd g = Eigen::VectorXd::Zero(sys.col_count());
  for (int c = 0; c < sys.col_count(); ++c) {
    const ColumnRef& ref = sys.col_map[c];
    if (ref.block == UnknownBlock::AlphaSegment)
      g(c) = alpha.segment_values[ref.index];
    else if (ref.block == UnknownBlock::AlphaSide)
      g(c) = ref.index == 0 ? alpha.alpha_L : alpha.alpha_R;
    else if (ref.block == UnknownBlock::Beta)
      g(c) = -beta.knots()[ref.index];
  }
  return g;
}

}  // namespace

TEST_CASE("curvature penalty is the scaled second-difference stencil") {
  const Eigen::MatrixXd B = curvature_penalty(6, 0.5, false);
  REQUIRE(B.rows() == 4);
  REQUIRE(B.cols() == 6);

  Eigen::VectorXd affine(6), parabola(6), hat(6);
  for (int i = 0; i < 6; ++i) {
    const double x = 0.5 * i;
    affine(i) = 3.0 - 2.0 * x;
    parabola(i) = x * x;
    hat(i) = i == 3 ? 1.0 : 0.0;
  }
  CHECK((B * affine).norm() == doctest::Approx(0.0).epsilon(1e-12));
  const Eigen::VectorXd p2 = B * parabola;
  for (int i = 0; i < 4; ++i) CHECK(p2(i) == doctest::Approx(2.0));
  const Eigen::VectorXd ph = B * hat;
  CHECK(ph(0) == doctest::Approx(0.0));   // row centred at node 1, off support
  CHECK(ph(1) == doctest::Approx(4.0));
  CHECK(ph(2) == doctest::Approx(-8.0));  // centre of the hat
  CHECK(ph(3) == doctest::Approx(4.0));

  const Eigen::MatrixXd C = curvature_penalty(5, 0.25, true);
  REQUIRE(C.rows() == 5);
  CHECK((C * Eigen::VectorXd::Ones(5)).norm() ==
        doctest::Approx(0.0).epsilon(1e-12));
  CHECK(C(0, 4) == doctest::Approx(16.0));  // cyclic wrap of the stencil

  CHECK_THROWS_AS(curvature_penalty(2, 0.5, false), std::invalid_argument);
  CHECK_THROWS_AS(curvature_penalty(5, 0.0, false), std::invalid_argument);
}

TEST_CASE("graph column layout orders alpha, sides, beta, heights, speed") {
  GraphCloud cloud(-4.0, 4.0, 0.5, std::vector<double>(17, 2.0));
  GraphState state{cloud, constant_alpha(16, 1.0), BetaProfile::sine(8), 1.0};
  DetectorLine det{10.0, 0.2, -10, 20, {1.1, M_PI / 2, 2.0}, 2};

  const auto sys = assemble_graph(state, det, true);
  CHECK(sys.col_count() == 16 + 2 + 9 + 17 + 1);
  CHECK(sys.block_size(UnknownBlock::AlphaSegment) == 16);
  CHECK(sys.block_size(UnknownBlock::AlphaSide) == 2);
  CHECK(sys.block_size(UnknownBlock::Beta) == 9);
  CHECK(sys.block_size(UnknownBlock::Shape) == 17);
  CHECK(sys.block_size(UnknownBlock::Speed) == 1);
  CHECK(sys.block_offset(UnknownBlock::AlphaSegment) == 0);
  CHECK(sys.block_offset(UnknownBlock::AlphaSide) == 16);
  CHECK(sys.block_offset(UnknownBlock::Beta) == 18);
  CHECK(sys.block_offset(UnknownBlock::Shape) == 27);
  CHECK(sys.block_offset(UnknownBlock::Speed) == 44);

  const auto no_speed = assemble_graph(state, det, false);
  CHECK(no_speed.col_count() == 44);
  CHECK(no_speed.block_offset(UnknownBlock::Speed) == -1);

  // Every emitted row is a HIT pixel of the forward measurement and carries
  // its predicted value.
  const auto ms = measure_graph(cloud, state.alpha, state.beta, det);
  for (int r = 0; r < sys.row_count(); ++r) {
    const RowRef& row = sys.rows[r];
    CHECK(ms.status(row.pixel, row.angle) == PixelStatus::Hit);
    CHECK(sys.predicted(r) == ms.value(row.pixel, row.angle));
  }
}

TEST_CASE("flat cloud shape coefficients follow the closed form") {
  // Flat surface at height 2, near-exact sine profile: the shape block of a
  // row reduces to psi3 * hat + psi4 * hat', with psi3 = alpha' beta cot(phi)
  // and psi4 = -alpha beta'(phi).
  GraphCloud cloud(-4.0, 4.0, 0.5, std::vector<double>(17, 2.0));
  const auto beta = BetaProfile::sine(2000);
  const double phi = 1.0;
  AlphaField alpha;
  for (int k = 0; k < 16; ++k)
    alpha.segment_values.push_back(1.0 + 0.3 * std::sin(0.7 * k));
  alpha.alpha_L = alpha.alpha_R = 0.4;

  // One pixel, one subsample: X chosen so the ray lands mid-segment.
  DetectorLine det{10.0, 0.04, 148, 1, {phi}, 1};
  GraphState state{cloud, alpha, beta, 1.0};
  const auto sys = assemble_graph(state, det, false);
  REQUIRE(sys.row_count() == 1);

  const double X = 0.04 * 148.5;
  const double x0 = X - 8.0 / std::tan(phi);
  const AlphaReconstruction rec(alpha.segment_values, false);
  const double t = (x0 + 4.0) / 0.5;
  const int k = static_cast<int>(t);
  const double f = t - k;
  const double av = rec.value(t);
  const double as = rec.slope(t) / 0.5;
  const double psi3 = as * std::sin(phi) / std::tan(phi);
  const double psi4 = -av * std::cos(phi);

  const int h0 = sys.block_offset(UnknownBlock::Shape);
  CHECK(sys.A(0, h0 + k) ==
        doctest::Approx(psi3 * (1.0 - f) - psi4 / 0.5).epsilon(5e-3));
  CHECK(sys.A(0, h0 + k + 1) ==
        doctest::Approx(psi3 * f + psi4 / 0.5).epsilon(5e-3));

  // Applied to an affine height direction of unit slope the hat derivatives
  // sum to the (delta h)' coefficient: -alpha * cos(phi) plus the transport
  // term psi3 * x0.
  Eigen::VectorXd d = Eigen::VectorXd::Zero(sys.col_count());
  for (int i = 0; i < 17; ++i) d(h0 + i) = cloud.node_x(i);
  CHECK((sys.A * d)(0) ==
        doctest::Approx(psi3 * x0 - av * std::cos(phi)).epsilon(5e-3));
}

TEST_CASE("flat constant state: uniform height shifts are invisible") {
  GraphCloud cloud(-4.0, 4.0, 0.5, std::vector<double>(17, 2.0));
  GraphState state{cloud, constant_alpha(16, 1.5), BetaProfile::sine(8), 1.0};
  DetectorLine det{10.0, 0.2, 10, 18, {0.9, 1.4, M_PI / 2}, 4};

  const auto sys = assemble_graph(state, det, false);
  REQUIRE(sys.row_count() > 20);
  Eigen::VectorXd d = Eigen::VectorXd::Zero(sys.col_count());
  const int h0 = sys.block_offset(UnknownBlock::Shape);
  for (int i = 0; i < 17; ++i) d(h0 + i) = 1.0;
  CHECK((sys.A * d).lpNorm<Eigen::Infinity>() <= 1e-12);
}

TEST_CASE("analytic graph jacobian matches central differences") {
  std::vector<double> heights;
  for (int i = 0; i < 21; ++i) {
    const double x = -2.0 + 0.2 * i;
    heights.push_back(1.6 + 0.3 * std::sin(0.8 * x));
  }
  GraphCloud cloud(-2.0, 2.0, 0.5, heights);
  AlphaField alpha;
  for (int k = 0; k < 20; ++k)
    alpha.segment_values.push_back(1.2 + 0.4 * std::cos(0.5 * (-1.9 + 0.2 * k)));
  alpha.alpha_L = 0.7;
  alpha.alpha_R = 0.9;
  std::vector<double> knots;
  for (int p = 0; p <= 8; ++p) knots.push_back(0.25 + 0.8 * std::sin(M_PI * p / 8));
  const BetaProfile beta{knots};
  GraphState state{cloud, alpha, beta, 0.9};

  DetectorLine det{6.0, 0.1, -46, 92, {1.05, M_PI / 2, 2.1}, 4};
  const auto sys = assemble_graph(state, det, true);
  REQUIRE(sys.row_count() > 100);
  CHECK(sys.dropped_near_tangent == 0);

  const auto fmap = [&](const Eigen::VectorXd& v) {
    return forward_rows(unpack_state(state, v, true), det, sys.rows);
  };
  const Eigen::MatrixXd fd =
      finite_difference_jacobian(fmap, pack_state(state, true), 1e-6);
  REQUIRE(fd.rows() == sys.A.rows());
  CHECK((fd - sys.A).norm() <= 1e-5 * sys.A.norm());

  // Consistency of the packed layout with the assembled columns.
  CHECK(pack_state(state, true).size() == sys.col_count());

  // Gauge direction: scaling alpha up and beta down leaves every
  // measurement unchanged, so it must be annihilated by both operators.
  const Eigen::VectorXd g = gauge_direction(sys, alpha, beta);
  CHECK((sys.A * g).norm() <= 1e-10 * sys.A.norm() * g.norm());
  CHECK((fd * g).norm() <= 1e-7 * fd.norm() * g.norm());
}

TEST_CASE("polar jacobian matches central differences") {
  std::vector<double> radii, avals;
  for (int i = 0; i < 16; ++i) {
    const double th = 2.0 * M_PI * i / 16;
    radii.push_back(1.5 + 0.2 * std::cos(3.0 * th));
    avals.push_back(1.0 + 0.3 * std::sin(2.0 * th));
  }
  PolarCloud cloud(0.0, radii);
  AlphaField alpha;
  alpha.segment_values = avals;
  std::vector<double> knots;
  for (int p = 0; p <= 6; ++p) knots.push_back(0.3 + 0.7 * std::sin(M_PI * p / 6));
  const BetaProfile beta{knots};
  PolarState state{cloud, alpha, beta};

  DetectorCircle det{2.6, 24, {M_PI / 2 - 0.35, M_PI / 2, M_PI / 2 + 0.3}, 3};
  const auto sys = assemble_polar(state, det);
  REQUIRE(sys.row_count() > 40);
  CHECK(sys.col_count() == 16 + 7 + 16);

  const auto fmap = [&](const Eigen::VectorXd& v) {
    return forward_rows(unpack_state(state, v), det, sys.rows);
  };
  const Eigen::MatrixXd fd =
      finite_difference_jacobian(fmap, pack_state(state), 1e-6);
  CHECK((fd - sys.A).norm() <= 1e-5 * sys.A.norm());

  const Eigen::VectorXd g = gauge_direction(sys, alpha, beta);
  CHECK((sys.A * g).norm() <= 1e-10 * sys.A.norm() * g.norm());
}

TEST_CASE("uniform expansion of a uniform disk is invisible") {
  PolarCloud cloud(0.0, std::vector<double>(40, 2.0));
  AlphaField alpha;
  alpha.segment_values.assign(40, 1.0);
  PolarState state{cloud, alpha, BetaProfile::sine(10)};
  DetectorCircle det{2.6, 40, {M_PI / 2 - 0.3, M_PI / 2, M_PI / 2 + 0.3}, 3};

  const auto sys = assemble_polar(state, det);
  REQUIRE(sys.row_count() > 60);
  Eigen::VectorXd d = Eigen::VectorXd::Zero(sys.col_count());
  const int r0 = sys.block_offset(UnknownBlock::Shape);
  for (int i = 0; i < 40; ++i) d(r0 + i) = 1.0;
  CHECK((sys.A * d).norm() <= 1e-3 * sys.A.norm() * d.norm());
}

TEST_CASE("doubling alpha doubles the beta and shape blocks only") {
  std::vector<double> heights;
  for (int i = 0; i < 13; ++i)
    heights.push_back(1.5 + 0.2 * std::sin(0.9 * i));
  GraphCloud cloud(-3.0, 3.0, 0.5, heights);
  AlphaField alpha;
  for (int k = 0; k < 12; ++k) alpha.segment_values.push_back(1.0 + 0.05 * k);
  alpha.alpha_L = 0.5;
  alpha.alpha_R = 0.8;
  const auto beta = BetaProfile::sine(8);
  DetectorLine det{8.0, 0.15, -40, 80, {1.1, M_PI / 2, 2.0}, 3};

  GraphState base{cloud, alpha, beta, 1.0};
  AlphaField doubled = alpha;
  for (double& v : doubled.segment_values) v *= 2.0;
  doubled.alpha_L *= 2.0;
  doubled.alpha_R *= 2.0;
  GraphState twice{cloud, doubled, beta, 1.0};

  const auto s1 = assemble_graph(base, det, true);
  const auto s2 = assemble_graph(twice, det, true);
  REQUIRE(s1.rows.size() == s2.rows.size());

  for (int c = 0; c < s1.col_count(); ++c) {
    const UnknownBlock b = s1.col_map[c].block;
    const double scale =
        (b == UnknownBlock::AlphaSegment || b == UnknownBlock::AlphaSide)
            ? 1.0
            : 2.0;
    CHECK((s2.A.col(c) - scale * s1.A.col(c)).lpNorm<Eigen::Infinity>() <=
          1e-12 * s1.A.norm());
  }
}

TEST_CASE("rays nearly parallel to the surface drop their rows") {
  // A single long ramp of slope 0.5, viewed at an angle whose tangent sits
  // inside the guard band around that slope.
  GraphCloud cloud(-50.0, 50.0, 1.0, {5.0, 55.0});
  const double phi_t = std::atan(0.5 + 5e-4);
  GraphState state{cloud, constant_alpha(1, 1.0), BetaProfile::sine(8), 1.0};

  DetectorLine tangent_only{60.0, 0.02, 2995, 4, {phi_t}, 2};
  CHECK_THROWS_AS(assemble_graph(state, tangent_only, false),
                  DegenerateGeometryError);

  // A second, safe angle keeps its rows (they land on the right wall).
  DetectorLine mixed{60.0, 0.02, 2995, 4, {phi_t, 1.2}, 2};
  const auto sys = assemble_graph(state, mixed, false);
  CHECK(sys.dropped_near_tangent == 4);
  REQUIRE(sys.row_count() == 4);
  const int h0 = sys.block_offset(UnknownBlock::Shape);
  for (int r = 0; r < sys.row_count(); ++r) {
    CHECK(sys.rows[r].angle == 1);
    CHECK(sys.A(r, h0) == 0.0);
    CHECK(sys.A(r, h0 + 1) == 0.0);
    CHECK(sys.A(r, sys.block_offset(UnknownBlock::AlphaSide) + 1) > 0.0);
  }
}

TEST_CASE("finite difference step is validated") {
  const auto id = [](const Eigen::VectorXd& v) { return v; };
  Eigen::VectorXd v0 = Eigen::VectorXd::Ones(3);
  CHECK_THROWS_AS(finite_difference_jacobian(id, v0, 1e-9),
                  std::invalid_argument);
  CHECK_THROWS_AS(finite_difference_jacobian(id, v0, 1e-2),
                  std::invalid_argument);
  const Eigen::MatrixXd J = finite_difference_jacobian(id, v0, 1e-6);
  CHECK((J - Eigen::MatrixXd::Identity(3, 3)).norm() <= 1e-9);
}

TEST_CASE("diagnosis separates degenerate and well-posed speed problems") {
  // Flat surface with constant emission: the speed column vanishes, uniform
  // height shifts are invisible, and every node is flagged featureless.
  GraphCloud flat(-4.0, 4.0, 0.5, std::vector<double>(17, 2.0));
  GraphState degen{flat, constant_alpha(16, 1.0), BetaProfile::sine(8), 1.0};
  DetectorLine det{10.0, 0.2, -28, 56, {1.1, M_PI / 2, 2.05}, 4};

  const auto sys_d = assemble_graph(degen, det, true);
  const auto rep_d = diagnose(sys_d);
  CHECK(rep_d.speed_column_norm <= 1e-12);
  CHECK(rep_d.speed_degenerate);
  CHECK(rep_d.insensitive_nodes.size() == 17);
  const auto rep_d0 = diagnose(assemble_graph(degen, det, false));
  CHECK(rep_d.near_null.size() == rep_d0.near_null.size() + 1);
  bool speed_mode = false;
  for (const auto& m : rep_d.near_null)
    speed_mode |= m.dominant == UnknownBlock::Speed;
  CHECK(speed_mode);

  // Tilted surface with varying emission: the speed column is active and
  // adds no new degeneracy.
  std::vector<double> ramp;
  for (int i = 0; i < 17; ++i) ramp.push_back(1.0 + 0.15 * (0.5 * i));
  GraphCloud tilted(-4.0, 4.0, 0.2, ramp);
  AlphaField alpha;
  for (int k = 0; k < 16; ++k) alpha.segment_values.push_back(0.8 + 0.06 * k);
  alpha.alpha_L = 0.4;
  alpha.alpha_R = 0.6;
  GraphState good{tilted, alpha, BetaProfile::sine(8), 1.0};

  const auto rep_g = diagnose(assemble_graph(good, det, true));
  const auto rep_g0 = diagnose(assemble_graph(good, det, false));
  CHECK(rep_g.speed_column_norm > 1e-3);
  CHECK_FALSE(rep_g.speed_degenerate);
  CHECK(rep_g.near_null.size() == rep_g0.near_null.size());
  for (const auto& m : rep_g.near_null)
    CHECK(m.dominant != UnknownBlock::Speed);
  CHECK(rep_g.insensitive_nodes.empty());
}

TEST_CASE("sine profiles are flagged as cot-degenerate, shifted ones not") {
  GraphCloud flat(-4.0, 4.0, 0.5, std::vector<double>(17, 2.0));
  std::vector<double> angles;
  for (double off : {-70.5, -60.0, -45.6, -26.1, 0.0, 26.1, 45.6, 60.0, 70.5})
    angles.push_back(M_PI / 2 + off * M_PI / 180.0);
  std::sort(angles.begin(), angles.end());
  DetectorLine det{10.0, 0.2, -60, 120, angles, 2};

  GraphState sine_state{flat, constant_alpha(16, 1.0), BetaProfile::sine(8),
                        1.0};
  const auto rep_sine = diagnose(assemble_graph(sine_state, det, false));
  CHECK(rep_sine.angular_slope_matches_cot);

  std::vector<double> shifted;
  for (int p = 0; p <= 8; ++p) shifted.push_back(0.5 + 0.5 * std::sin(M_PI * p / 8));
  GraphState mixed{flat, constant_alpha(16, 1.0), BetaProfile{shifted}, 1.0};
  const auto rep_mixed = diagnose(assemble_graph(mixed, det, false));
  CHECK_FALSE(rep_mixed.angular_slope_matches_cot);
  CHECK(rep_mixed.gram_condition < rep_sine.gram_condition);
}

TEST_CASE("straight chord of a polar boundary is flagged insensitive") {
  // Disk of radius 2 cut by a chord at distance 1.6: along the chord both
  // the curvature and (with constant alpha) the emission gradient vanish.
  const int N = 160;
  std::vector<double> radii;
  for (int i = 0; i < N; ++i) {
    const double th = 2.0 * M_PI * i / N;
    const double c = std::cos(th - 2.4);
    radii.push_back(c > 0.8 ? 1.6 / c : 2.0);
  }
  PolarCloud cloud(0.0, radii);
  AlphaField alpha;
  alpha.segment_values.assign(N, 1.0);
  PolarState state{cloud, alpha, BetaProfile::sine(10)};
  DetectorCircle det{2.6, 60, {M_PI / 2 - 0.3, M_PI / 2, M_PI / 2 + 0.3}, 2};

  const auto rep = diagnose(assemble_polar(state, det));
  std::vector<bool> flagged(N, false);
  for (int i : rep.insensitive_nodes) flagged[i] = true;

  const auto on_chord = [&](int i) { return radii[i] < 2.0 - 1e-9; };
  for (int i = 0; i < N; ++i) {
    const bool interior_chord =
        on_chord(i) && on_chord((i + 1) % N) && on_chord((i + N - 1) % N);
    const bool interior_arc =
        !on_chord(i) && !on_chord((i + 1) % N) && !on_chord((i + N - 1) % N);
    if (interior_chord) CHECK(flagged[i]);
    if (interior_arc) CHECK_FALSE(flagged[i]);
  }
}
