#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>
#include <vector>

#include "cloudrecon/forward.hpp"

using namespace cloudrecon;

namespace {

AlphaField constant_alpha(int segments, double value, double sides = 0.0) {
  AlphaField a;
  a.segment_values.assign(segments, value);
  a.alpha_L = a.alpha_R = sides;
  return a;
}

}  // namespace

TEST_CASE("nadir view of a flat cloud reads alpha") {
  GraphCloud cloud(-5.0, 5.0, 0.0, std::vector<double>(11, 1.0));
  const auto beta = BetaProfile::sine(10);
  DetectorLine det{10.0, 0.1, -100, 200, {M_PI / 2}, 8};
  const auto ms =
      measure_graph(cloud, constant_alpha(10, 2.0, 1.0), beta, det);

  REQUIRE(ms.pixel_count() == 200);
  for (int n = 0; n < ms.pixel_count(); ++n) {
    const double left = ms.pixel_left(n), right = left + ms.step;
    if (left >= -5.0 && right <= 5.0) {
      CHECK(ms.value(n, 0) == doctest::Approx(2.0).epsilon(1e-10));
      CHECK(ms.status(n, 0) == PixelStatus::Hit);
    } else if (right <= -5.0 || left >= 5.0) {
      CHECK(ms.value(n, 0) == 0.0);
      CHECK(ms.status(n, 0) == PixelStatus::Miss);
    }
  }

  const auto [xl, xr] = detect_support(ms);
  CHECK(xl == doctest::Approx(-5.0).epsilon(1e-9));
  CHECK(xr == doctest::Approx(4.9).epsilon(1e-9));
}

TEST_CASE("gauge rescaling leaves measurements unchanged") {
  GraphCloud cloud(-5.0, 5.0, 0.0,
                   {1.0, 1.6, 2.2, 1.9, 1.3, 1.8, 2.4, 2.0, 1.5, 1.1, 1.0});
  const auto beta = BetaProfile::sine(10);
  std::vector<double> halved = beta.knots();
  for (double& v : halved) v /= 2.0;
  const BetaProfile beta_half{halved};

  AlphaField alpha = constant_alpha(10, 1.0, 0.7);
  for (int k = 0; k < 10; ++k) alpha.segment_values[k] = 0.8 + 0.1 * k;
  AlphaField alpha2 = alpha;
  for (double& v : alpha2.segment_values) v *= 2.0;
  alpha2.alpha_L *= 2.0;
  alpha2.alpha_R *= 2.0;

  DetectorLine det{10.0, 0.2, -40, 80, {0.9, 1.4, M_PI / 2, 2.0}, 4};
  const auto a = measure_graph(cloud, alpha, beta, det);
  const auto b = measure_graph(cloud, alpha2, beta_half, det);
  REQUIRE(a.values.size() == b.values.size());
  for (std::size_t i = 0; i < a.values.size(); ++i) {
    CHECK(b.values[i] ==
          doctest::Approx(a.values[i]).epsilon(1e-13).scale(1.0));
    CHECK(a.mask[i] == b.mask[i]);
  }
}

TEST_CASE("tilted plane gives the closed-form value") {
  // h rises from 1 to 3 across [-5, 5]: slope 0.2 everywhere.
  std::vector<double> h(11);
  for (int i = 0; i < 11; ++i) h[i] = 1.0 + 0.2 * i;
  GraphCloud cloud(-5.0, 5.0, 0.0, h);
  const auto beta = BetaProfile::sine(10);
  const double a0 = 1.5;

  DetectorLine det{10.0, 0.1, -80, 160, {1.2, M_PI / 2, 1.9}, 8};
  const auto ms = measure_graph(cloud, constant_alpha(10, a0), beta, det);

  for (int j = 0; j < 3; ++j) {
    const double expect = emission(a0, beta, 0.2, det.angles[j]);
    for (int n = 0; n < ms.pixel_count(); ++n) {
      if (std::abs(ms.pixel_center(n)) > 1.0) continue;
      CHECK(ms.status(n, j) == PixelStatus::Hit);
      CHECK(ms.value(n, j) == doctest::Approx(expect).epsilon(1e-12));
    }
  }
}

TEST_CASE("circular cloud measurements are rotation symmetric") {
  PolarCloud cloud(0.0, std::vector<double>(40, 2.0));
  const auto beta = BetaProfile::sine(10);
  // Oblique rays only reach the cloud from nearby: the impact parameter is
  // R sin|phi - pi/2|, which must stay below the cloud radius.
  DetectorCircle det{3.0, 40, {1.2, M_PI / 2, 1.9}, 4};
  const auto ms = measure_polar(cloud, constant_alpha(40, 1.0), beta, det);

  REQUIRE(ms.pixel_count() == 40);
  for (int j = 0; j < 3; ++j) {
    double lo = 1e300, hi = -1e300;
    for (int n = 0; n < 40; ++n) {
      CHECK(ms.status(n, j) == PixelStatus::Hit);
      lo = std::min(lo, ms.value(n, j));
      hi = std::max(hi, ms.value(n, j));
    }
    CHECK(hi - lo < 1e-12);
  }
}

TEST_CASE("locally vertical viewing reads alpha on the circle") {
  PolarCloud cloud(0.0, std::vector<double>(40, 2.0));
  const auto beta = BetaProfile::sine(10);
  DetectorCircle det{10.0, 40, {M_PI / 2}, 4};
  const auto ms = measure_polar(cloud, constant_alpha(40, 1.0), beta, det);
  for (int n = 0; n < 40; ++n)
    CHECK(ms.value(n, 0) == doctest::Approx(1.0).epsilon(1e-2));
}

TEST_CASE("dark cloud measures zero") {
  PolarCloud cloud(0.0, std::vector<double>(24, 2.0));
  const auto beta = BetaProfile::sine(10);
  DetectorCircle det{10.0, 24, {1.1, 2.0}, 2};
  const auto ms = measure_polar(cloud, constant_alpha(24, 0.0), beta, det);
  for (double v : ms.values) CHECK(v == 0.0);
}

TEST_CASE("nearest hits are outgoing and unobstructed") {
  // The back ray stops at the first boundary crossing, so the surface it
  // reports always faces the detector with a clear line of sight; the
  // emission filters only ever reject grazing-tolerance cases.
  std::mt19937 rng(47);
  std::uniform_real_distribution<double> hgt(0.4, 3.0);
  std::uniform_real_distribution<double> xs(-9.0, 9.0);
  std::uniform_real_distribution<double> ang(0.05, M_PI - 0.05);
  const auto beta = BetaProfile::sine(10);
  for (int trial = 0; trial < 40; ++trial) {
    std::vector<double> h(7);
    for (double& v : h) v = hgt(rng);
    GraphCloud cloud(-4.0, 4.0, 0.0, h);
    const auto alpha = constant_alpha(6, 1.0, 1.0);
    const AlphaReconstruction rec(alpha.segment_values, false);
    for (int r = 0; r < 50; ++r) {
      const double phi = ang(rng);
      const auto p =
          probe_graph_ray(cloud, alpha, rec, beta, xs(rng), 10.0, phi);
      if (!p.intersected) continue;
      const Vec2 theta{std::cos(phi), std::sin(phi)};
      if (theta.dot(p.hit.normal) < 1e-6) continue;
      CHECK(p.outgoing);
      CHECK_FALSE(p.blocked);
    }
  }
}

TEST_CASE("drifting cloud equals a rescaled pixel grid") {
  GraphCloud cloud(-5.0, 5.0, 0.0,
                   {1.2, 1.7, 2.1, 1.8, 1.4, 2.0, 2.3, 1.9, 1.5, 1.3, 1.2});
  const auto beta = BetaProfile::sine(10);
  const auto alpha = constant_alpha(10, 1.4, 0.8);
  const double lambda = 0.8;

  DetectorLine det{10.0, 0.1, -80, 160, {1.1, M_PI / 2, 2.0}, 4};
  DetectorLine scaled = det;
  scaled.pixel_size = lambda * det.pixel_size;

  const auto drift = measure_graph(cloud, alpha, beta, det, lambda);
  const auto fixed = measure_graph(cloud, alpha, beta, scaled, 1.0);
  REQUIRE(drift.values.size() == fixed.values.size());
  for (std::size_t i = 0; i < drift.values.size(); ++i) {
    CHECK(drift.values[i] ==
          doctest::Approx(fixed.values[i]).epsilon(1e-12).scale(1.0));
    CHECK(drift.mask[i] == fixed.mask[i]);
  }
}

TEST_CASE("step alpha reads exactly away from the transition") {
  GraphCloud cloud(-5.0, 5.0, 0.0, std::vector<double>(21, 2.0));
  AlphaField alpha = constant_alpha(20, 1.0);
  for (int k = 10; k < 20; ++k) alpha.segment_values[k] = 2.0;
  const auto beta = BetaProfile::sine(10);

  DetectorLine det{10.0, 0.1, -60, 120, {M_PI / 2}, 8};
  const auto ms = measure_graph(cloud, alpha, beta, det);
  double prev = 0.0;
  for (int n = 0; n < ms.pixel_count(); ++n) {
    const double c = ms.pixel_center(n);
    if (c < -4.9 || c > 4.9) continue;
    // The nodal smoothing of the step spans one segment on each side of 0.
    if (c <= -0.6) CHECK(ms.value(n, 0) == doctest::Approx(1.0).epsilon(1e-10));
    if (c >= 0.6) CHECK(ms.value(n, 0) == doctest::Approx(2.0).epsilon(1e-10));
    if (n > 0 && std::abs(c) <= 0.7) CHECK(ms.value(n, 0) >= prev - 1e-12);
    prev = ms.value(n, 0);
  }
}

TEST_CASE("noise injection") {
  GraphCloud cloud(-5.0, 5.0, 0.0, std::vector<double>(11, 1.5));
  const auto beta = BetaProfile::sine(10);
  std::vector<double> phis(10);
  for (int j = 0; j < 10; ++j) phis[j] = 1.2 + 0.07 * j;
  DetectorLine det{10.0, 0.01, -500, 1000, phis, 1};
  const auto clean = measure_graph(cloud, constant_alpha(10, 2.0, 1.0), beta, det);

  SUBCASE("zero sigma is the identity") {
    const auto same = add_noise(clean, 0.0, 123);
    CHECK(same.values == clean.values);
  }
  SUBCASE("fixed seed is deterministic") {
    const auto a = add_noise(clean, 0.01, 77);
    const auto b = add_noise(clean, 0.01, 77);
    CHECK(a.values == b.values);
    const auto c = add_noise(clean, 0.01, 78);
    CHECK(c.values != a.values);
  }
  SUBCASE("empirical spread matches sigma") {
    const double sigma = 0.01;
    const auto noisy = add_noise(clean, sigma, 2024);
    const double peak =
        *std::max_element(clean.values.begin(), clean.values.end());
    double sum2 = 0.0;
    int count = 0;
    for (std::size_t i = 0; i < clean.values.size(); ++i) {
      if (clean.mask[i] != PixelStatus::Hit) continue;
      const double d = noisy.values[i] - clean.values[i];
      sum2 += d * d;
      ++count;
    }
    REQUIRE(count > 5000);
    const double emp = std::sqrt(sum2 / count);
    CHECK(emp == doctest::Approx(sigma * peak).epsilon(0.05));
  }
}

TEST_CASE("support detection under noise and for empty scenes") {
  GraphCloud cloud(-5.0, 5.0, 0.0, std::vector<double>(11, 1.0));
  const auto beta = BetaProfile::sine(10);
  DetectorLine det{10.0, 0.1, -100, 200, {M_PI / 2}, 4};
  const auto clean = measure_graph(cloud, constant_alpha(10, 2.0), beta, det);

  const double sigma = 0.001;
  for (std::uint32_t seed : {1u, 2u, 3u}) {
    const auto noisy = add_noise(clean, sigma, seed);
    const auto [xl, xr] = detect_support(noisy, 3.0 * sigma);
    CHECK(std::abs(xl - (-5.0)) <= 0.1 + 1e-9);
    CHECK(std::abs(xr - 4.9) <= 0.1 + 1e-9);
  }

  const auto dark = measure_graph(cloud, constant_alpha(10, 0.0), beta, det);
  CHECK_THROWS_AS(detect_support(dark), std::runtime_error);
  CHECK_THROWS_AS(
      detect_support(measure_graph(cloud, constant_alpha(10, 1.0), beta,
                                   DetectorLine{10.0, 0.1, -100, 200, {1.0}, 2})),
      std::invalid_argument);
}

TEST_CASE("detector validation") {
  GraphCloud cloud(-5.0, 5.0, 0.0, std::vector<double>(6, 1.0));
  const auto beta = BetaProfile::sine(10);
  const auto alpha = constant_alpha(5, 1.0);
  CHECK_THROWS_AS(
      measure_graph(cloud, alpha, beta, {0.5, 0.1, 0, 10, {M_PI / 2}, 4}),
      std::invalid_argument);
  CHECK_THROWS_AS(
      measure_graph(cloud, alpha, beta, {10.0, 0.1, 0, 10, {2.0, 1.0}, 4}),
      std::invalid_argument);
  CHECK_THROWS_AS(
      measure_graph(cloud, constant_alpha(4, 1.0), beta,
                    {10.0, 0.1, 0, 10, {M_PI / 2}, 4}),
      std::invalid_argument);
  CHECK_THROWS_AS(measure_graph(cloud, alpha, beta,
                                {10.0, 0.1, 0, 10, {M_PI / 2}, 4}, 2.5),
                  std::invalid_argument);
}
