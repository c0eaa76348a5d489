#include "cloudrecon/forward.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

namespace cloudrecon {

namespace {

void check_alpha(const AlphaField& alpha, int expected, bool polar) {
  if (static_cast<int>(alpha.segment_values.size()) != expected)
    throw std::invalid_argument("alpha field: segment count mismatch");
  for (double v : alpha.segment_values) {
    if (!(v >= 0.0))
      throw std::invalid_argument("alpha field: values must be >= 0");
  }
  if (!polar && (!(alpha.alpha_L >= 0.0) || !(alpha.alpha_R >= 0.0)))
    throw std::invalid_argument("alpha field: side values must be >= 0");
}

// Emission angle of direction theta in the frame of a surface element with
// outward normal nu: gamma = atan2(theta . nu, theta . tau) with tau the
// tangent obtained by rotating nu clockwise. Outgoing means gamma in (0, pi).
double emission_angle(Vec2 theta, Vec2 nu) {
  const Vec2 tau{nu.y, -nu.x};
  return std::atan2(theta.dot(nu), theta.dot(tau));
}

}  // namespace

RayProbe probe_graph_ray(const GraphCloud& cloud, const AlphaField& alpha,
                         const AlphaReconstruction& alpha_rec,
                         const BetaProfile& beta, double X, double Z,
                         double phi) {
  RayProbe p;
  const auto hit = trace_ray_graph(cloud, X, Z, phi);
  if (!hit) return p;
  p.intersected = true;
  p.hit = *hit;

  const Vec2 theta{std::cos(phi), std::sin(phi)};
  p.gamma = emission_angle(theta, hit->normal);
  p.outgoing = p.gamma > kGrazeTol && p.gamma < M_PI - kGrazeTol;
  if (!p.outgoing) return p;

  switch (hit->piece) {
    case BoundaryPiece::Upper:
      p.alpha = alpha_rec.value((hit->x_or_theta - cloud.x_left()) / cloud.dx());
      break;
    case BoundaryPiece::LeftSide:
      p.alpha = alpha.alpha_L;
      break;
    case BoundaryPiece::RightSide:
      p.alpha = alpha.alpha_R;
      break;
    case BoundaryPiece::Bottom:
    default:
      p.alpha = 0.0;  // unreachable: the bottom never faces the detector
      break;
  }

  p.blocked = is_blocked(cloud, hit->point, phi);
  if (p.blocked) return p;

  p.value = p.alpha * beta.eval(p.gamma);
  return p;
}

RayProbe probe_polar_ray(const PolarCloud& cloud,
                         const AlphaReconstruction& alpha_rec,
                         const BetaProfile& beta, double Theta, double R,
                         double phi_global) {
  RayProbe p;
  const auto hit = trace_ray_polar(cloud, Theta, R, phi_global);
  if (!hit) return p;
  p.intersected = true;
  p.hit = *hit;

  const Vec2 theta{std::cos(phi_global), std::sin(phi_global)};
  p.gamma = emission_angle(theta, hit->normal);
  p.outgoing = p.gamma > kGrazeTol && p.gamma < M_PI - kGrazeTol;
  if (!p.outgoing) return p;

  p.alpha = alpha_rec.value((hit->x_or_theta - cloud.theta0()) / cloud.dtheta());
  p.blocked = is_blocked(cloud, hit->point, phi_global);
  if (p.blocked) return p;

  p.value = p.alpha * beta.eval(p.gamma);
  return p;
}

MeasurementSet measure_graph(const GraphCloud& cloud, const AlphaField& alpha,
                             const BetaProfile& beta, const DetectorLine& det,
                             double lambda) {
  check_alpha(alpha, cloud.segment_count(), false);
  if (!(det.Z > cloud.max_height()))
    throw std::invalid_argument("detector line: Z must exceed the cloud top");
  if (det.pixel_count < 1 || det.subsamples < 1)
    throw std::invalid_argument("detector line: need pixels and subsamples");
  for (std::size_t j = 0; j < det.angles.size(); ++j) {
    if (!(det.angles[j] > 0.0 && det.angles[j] < M_PI))
      throw std::invalid_argument("detector line: angles must lie in (0, pi)");
    if (j > 0 && !(det.angles[j] > det.angles[j - 1]))
      throw std::invalid_argument("detector line: angles must increase");
  }
  if (!(lambda > 0.0 && lambda <= 2.0))
    throw std::invalid_argument("speed factor: lambda must be in (0, 2]");

  const AlphaReconstruction rec(alpha.segment_values, false);
  const int J = static_cast<int>(det.angles.size());
  const int m = det.subsamples;

  MeasurementSet ms;
  ms.first_pixel = det.first_pixel;
  ms.step = det.pixel_size;
  ms.polar = false;
  ms.angles = det.angles;
  ms.values.assign(static_cast<std::size_t>(det.pixel_count) * J, 0.0);
  ms.mask.assign(ms.values.size(), PixelStatus::Miss);

  for (int n = 0; n < det.pixel_count; ++n) {
    for (int j = 0; j < J; ++j) {
      double sum = 0.0;
      bool any_contrib = false, any_intersect = false;
      for (int s = 0; s < m; ++s) {
        const double X =
            det.pixel_size * (det.first_pixel + n + (s + 0.5) / m);
        const auto p = probe_graph_ray(cloud, alpha, rec, beta, lambda * X,
                                       det.Z, det.angles[j]);
        any_intersect |= p.intersected;
        if (p.intersected && p.outgoing && !p.blocked) {
          any_contrib = true;
          sum += p.value;
        }
      }
      ms.values[n * J + j] = sum / m;
      ms.mask[n * J + j] = any_contrib    ? PixelStatus::Hit
                           : any_intersect ? PixelStatus::Blocked
                                           : PixelStatus::Miss;
    }
  }
  return ms;
}

MeasurementSet measure_polar(const PolarCloud& cloud, const AlphaField& alpha,
                             const BetaProfile& beta,
                             const DetectorCircle& det) {
  check_alpha(alpha, cloud.vertex_count(), true);
  if (!(det.R > cloud.max_radius()))
    throw std::invalid_argument("detector circle: R must enclose the cloud");
  if (det.pixel_count < 1 || det.subsamples < 1)
    throw std::invalid_argument("detector circle: need pixels and subsamples");

  const AlphaReconstruction rec(alpha.segment_values, true);
  const int J = static_cast<int>(det.angles.size());
  const int m = det.subsamples;

  MeasurementSet ms;
  ms.first_pixel = 0;
  ms.step = det.dTheta();
  ms.polar = true;
  ms.angles = det.angles;
  ms.values.assign(static_cast<std::size_t>(det.pixel_count) * J, 0.0);
  ms.mask.assign(ms.values.size(), PixelStatus::Miss);

  for (int n = 0; n < det.pixel_count; ++n) {
    for (int j = 0; j < J; ++j) {
      double sum = 0.0;
      bool any_contrib = false, any_intersect = false;
      for (int s = 0; s < m; ++s) {
        const double Theta = ms.step * (n + (s + 0.5) / m);
        const double phi = polar_global_angle(Theta, det.angles[j]);
        const auto p = probe_polar_ray(cloud, rec, beta, Theta, det.R, phi);
        any_intersect |= p.intersected;
        if (p.intersected && p.outgoing && !p.blocked) {
          any_contrib = true;
          sum += p.value;
        }
      }
      ms.values[n * J + j] = sum / m;
      ms.mask[n * J + j] = any_contrib    ? PixelStatus::Hit
                           : any_intersect ? PixelStatus::Blocked
                                           : PixelStatus::Miss;
    }
  }
  return ms;
}

std::pair<double, double> detect_support(const MeasurementSet& ms,
                                         double floor_rel) {
  if (ms.polar)
    throw std::invalid_argument("detect_support: graph measurements only");
  int nadir = -1;
  for (int j = 0; j < ms.angle_count(); ++j) {
    if (std::abs(ms.angles[j] - M_PI / 2) < 1e-9) nadir = j;
  }
  if (nadir < 0)
    throw std::invalid_argument("detect_support: no nadir angle in the set");

  double peak = 0.0;
  for (int n = 0; n < ms.pixel_count(); ++n)
    peak = std::max(peak, ms.value(n, nadir));
  if (peak <= 0.0)
    throw std::runtime_error("detect_support: nadir row is empty, no cloud");

  const double floor = floor_rel * peak;
  int n_L = -1, n_R = -1;
  for (int n = 0; n < ms.pixel_count(); ++n) {
    if (ms.value(n, nadir) > floor) {
      if (n_L < 0) n_L = n;
      n_R = n;
    }
  }
  return {ms.pixel_left(n_L), ms.pixel_left(n_R)};
}

MeasurementSet add_noise(const MeasurementSet& ms, double sigma,
                         std::uint32_t seed) {
  if (!(sigma >= 0.0))
    throw std::invalid_argument("add_noise: sigma must be >= 0");
  MeasurementSet out = ms;
  if (sigma == 0.0) return out;

  double peak = 0.0;
  for (double v : ms.values) peak = std::max(peak, v);
  const double scale = sigma * peak;

  // Box-Muller over a fixed-width engine keeps the stream identical across
  // platforms, unlike std::normal_distribution.
  std::mt19937 rng(seed);
  const auto gaussian = [&rng]() {
    double u1 = 0.0;
    do {
      u1 = (rng() + 0.5) / 4294967296.0;
    } while (u1 <= 0.0);
    const double u2 = (rng() + 0.5) / 4294967296.0;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
  };

  for (std::size_t i = 0; i < out.values.size(); ++i) {
    if (out.mask[i] != PixelStatus::Hit) continue;
    out.values[i] = std::max(0.0, out.values[i] + scale * gaussian());
  }
  return out;
}

}  // namespace cloudrecon
