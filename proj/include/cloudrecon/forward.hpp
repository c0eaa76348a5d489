#pragma once

// Discrete measurement operators: pixel-averaged multi-angle intensities seen
// by a line of detector pixels above a graph cloud, or by an arc of pixels on
// a circle enclosing a polar cloud. Each pixel value averages m midpoint
// subsamples; every subsample traces a back-ray, applies the outgoing-
// direction and occlusion filters, and evaluates the surface emission.

#include <cstdint>
#include <vector>

#include "cloudrecon/geometry.hpp"
#include "cloudrecon/radiance.hpp"

namespace cloudrecon {

struct DetectorLine {
  double Z = 10.0;
  double pixel_size = 0.1;
  int first_pixel = 0;
  int pixel_count = 0;
  std::vector<double> angles;  // phi_j in (0, pi), strictly increasing
  int subsamples = 8;
};

struct DetectorCircle {
  double R = 10.0;
  int pixel_count = 0;  // arcs of width 2pi/pixel_count starting at angle 0
  std::vector<double> angles;  // detector-local phi_j, any values
  int subsamples = 8;

  double dTheta() const { return 2.0 * M_PI / pixel_count; }
};

// Pixel angles on the circle are detector-local: measured from the clockwise
// tangent at the pixel toward the outward radial, so phi = pi/2 always looks
// straight down onto the cloud. This converts to the global direction angle.
inline double polar_global_angle(double Theta, double phi_local) {
  return Theta + phi_local - M_PI / 2;
}

enum class PixelStatus : std::uint8_t { Hit, Miss, Blocked };

struct MeasurementSet {
  int first_pixel = 0;
  double step = 0.0;  // pixel width: a length (graph) or an angle (polar)
  bool polar = false;
  std::vector<double> angles;
  std::vector<double> values;      // pixel-major: values[n * J + j]
  std::vector<PixelStatus> mask;

  int pixel_count() const {
    return angles.empty() ? 0 : static_cast<int>(values.size() / angles.size());
  }
  int angle_count() const { return static_cast<int>(angles.size()); }
  double pixel_left(int i) const { return (first_pixel + i) * step; }
  double pixel_center(int i) const { return (first_pixel + i + 0.5) * step; }
  double value(int i, int j) const { return values[i * angle_count() + j]; }
  PixelStatus status(int i, int j) const { return mask[i * angle_count() + j]; }
};

// One traced subsample. intersected: the back-ray met the boundary at all;
// outgoing: the emitted direction lies in the open upper half-space of the
// hit element; blocked: the emitted ray re-enters the cloud. value is the
// emission contribution (zero unless intersected && outgoing && !blocked).
struct RayProbe {
  bool intersected = false;
  bool outgoing = false;
  bool blocked = false;
  double value = 0.0;
  double gamma = 0.0;  // emission angle in the local tangent frame
  double alpha = 0.0;  // emission strength at the hit
  SurfaceHit hit{};
};

RayProbe probe_graph_ray(const GraphCloud& cloud, const AlphaField& alpha,
                         const AlphaReconstruction& alpha_rec,
                         const BetaProfile& beta, double X, double Z,
                         double phi);

RayProbe probe_polar_ray(const PolarCloud& cloud,
                         const AlphaReconstruction& alpha_rec,
                         const BetaProfile& beta, double Theta, double R,
                         double phi_global);

// Pixel-averaged measurements. The optional speed factor lambda rescales the
// ray start abscissa: a subsample nominally at X traces from (lambda*X, Z),
// which models a cloud drifting relative to the detector track.
MeasurementSet measure_graph(const GraphCloud& cloud, const AlphaField& alpha,
                             const BetaProfile& beta, const DetectorLine& det,
                             double lambda = 1.0);

MeasurementSet measure_polar(const PolarCloud& cloud, const AlphaField& alpha,
                             const BetaProfile& beta,
                             const DetectorCircle& det);

// Support interval of the cloud from the nadir row: left edges of the first
// and last pixels whose nadir value exceeds floor_rel * max. Requires a graph
// measurement containing an angle equal to pi/2.
std::pair<double, double> detect_support(const MeasurementSet& ms,
                                         double floor_rel = 1e-12);

// Additive Gaussian noise of standard deviation sigma * max(values) on HIT
// entries, clamped at zero; deterministic for a fixed seed.
MeasurementSet add_noise(const MeasurementSet& ms, double sigma,
                         std::uint32_t seed);

}  // namespace cloudrecon
