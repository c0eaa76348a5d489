#include "cloudrecon/radiance.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace cloudrecon {

BetaProfile::BetaProfile(std::vector<double> knots, BetaNormalization norm)
    : b_(std::move(knots)), norm_(norm) {
  if (b_.size() < 2)
    throw std::invalid_argument("beta profile: need at least two knots");
  for (double v : b_) {
    if (!(v >= 0.0))
      throw std::invalid_argument("beta profile: knot values must be >= 0");
  }
  dphi_ = M_PI / P();
}

BetaProfile BetaProfile::sine(int P) {
  if (P < 1) throw std::invalid_argument("beta profile: P must be positive");
  std::vector<double> b(P + 1);
  for (int p = 0; p <= P; ++p) b[p] = std::sin(M_PI * p / P);
  BetaProfile prof(std::move(b));
  const double c = prof.nadir_value();  // exactly 1 for even P
  for (double& v : prof.b_) v /= c;
  return prof;
}

BetaProfile BetaProfile::constant(int P) {
  if (P < 1) throw std::invalid_argument("beta profile: P must be positive");
  return BetaProfile(std::vector<double>(P + 1, 1.0));
}

double BetaProfile::eval(double angle) const {
  if (angle < -1e-12 || angle > M_PI + 1e-12)
    throw std::domain_error("beta profile: angle outside [0, pi]");
  const double a = std::clamp(angle, 0.0, M_PI);
  int p = std::clamp(static_cast<int>(a / dphi_), 0, P() - 1);
  const double w = a / dphi_ - p;
  return (1.0 - w) * b_[p] + w * b_[p + 1];
}

double BetaProfile::slope(double angle) const {
  if (angle < -1e-12 || angle > M_PI + 1e-12)
    throw std::domain_error("beta profile: angle outside [0, pi]");
  const double a = std::clamp(angle, 0.0, M_PI);
  int p = static_cast<int>(std::ceil(a / dphi_)) - 1;
  p = std::clamp(p, 0, P() - 1);
  return (b_[p + 1] - b_[p]) / dphi_;
}

double BetaProfile::knot_weight(double angle, int p) const {
  if (angle < -1e-12 || angle > M_PI + 1e-12)
    throw std::domain_error("beta profile: angle outside [0, pi]");
  const double a = std::clamp(angle, 0.0, M_PI);
  const int q = std::clamp(static_cast<int>(a / dphi_), 0, P() - 1);
  const double w = a / dphi_ - q;
  if (p == q) return 1.0 - w;
  if (p == q + 1) return w;
  return 0.0;
}

double BetaProfile::integral() const {
  double s = 0.0;
  for (int p = 0; p < P(); ++p) s += 0.5 * (b_[p] + b_[p + 1]) * dphi_;
  return s;
}

AlphaReconstruction::AlphaReconstruction(
    const std::vector<double>& segment_values, bool cyclic)
    : cyclic_(cyclic), n_seg_(static_cast<int>(segment_values.size())) {
  if (n_seg_ < 1)
    throw std::invalid_argument("alpha reconstruction: no segment values");
  if (cyclic_) {
    nodal_.resize(n_seg_);
    for (int k = 0; k < n_seg_; ++k)
      nodal_[k] =
          0.5 * (segment_values[(k + n_seg_ - 1) % n_seg_] + segment_values[k]);
  } else {
    nodal_.resize(n_seg_ + 1);
    nodal_.front() = segment_values.front();
    nodal_.back() = segment_values.back();
    for (int k = 1; k < n_seg_; ++k)
      nodal_[k] = 0.5 * (segment_values[k - 1] + segment_values[k]);
  }
}

double AlphaReconstruction::value(double t) const {
  if (cyclic_) {
    t = std::fmod(t, static_cast<double>(n_seg_));
    if (t < 0.0) t += n_seg_;
  } else {
    t = std::clamp(t, 0.0, static_cast<double>(n_seg_));
  }
  const int k = std::clamp(static_cast<int>(t), 0, n_seg_ - 1);
  const double w = t - k;
  const double right = cyclic_ ? nodal_[(k + 1) % n_seg_] : nodal_[k + 1];
  return (1.0 - w) * nodal_[k] + w * right;
}

double AlphaReconstruction::slope(double t) const {
  if (cyclic_) {
    t = std::fmod(t, static_cast<double>(n_seg_));
    if (t < 0.0) t += n_seg_;
  } else {
    t = std::clamp(t, 0.0, static_cast<double>(n_seg_));
  }
  int k = static_cast<int>(std::ceil(t)) - 1;
  k = std::clamp(k, 0, n_seg_ - 1);
  const double right = cyclic_ ? nodal_[(k + 1) % n_seg_] : nodal_[k + 1];
  return right - nodal_[k];
}

double AlphaReconstruction::weight(double t, int j) const {
  if (cyclic_) {
    t = std::fmod(t, static_cast<double>(n_seg_));
    if (t < 0.0) t += n_seg_;
  } else {
    t = std::clamp(t, 0.0, static_cast<double>(n_seg_));
  }
  const int k = std::clamp(static_cast<int>(t), 0, n_seg_ - 1);
  const double w = t - k;
  // d value / d nodal, then d nodal / d segment j.
  const auto nodal_weight = [&](int node) {
    if (cyclic_) {
      const int n = n_seg_;
      const int m = ((node % n) + n) % n;
      return 0.5 * (static_cast<double>(j == (m + n - 1) % n) +
                    static_cast<double>(j == m));
    }
    if (node == 0) return static_cast<double>(j == 0);
    if (node == n_seg_) return static_cast<double>(j == n_seg_ - 1);
    return 0.5 * (static_cast<double>(j == node - 1) +
                  static_cast<double>(j == node));
  };
  return (1.0 - w) * nodal_weight(k) + w * nodal_weight(k + 1);
}

double emission(double alpha_value, const BetaProfile& beta, double slope,
                double phi) {
  const double gamma = phi - std::atan(slope);
  if (!(gamma > 0.0 && gamma < M_PI))
    throw std::domain_error("emission: direction not outgoing for this slope");
  return alpha_value * beta.eval(gamma);
}

namespace {

double sun_value(double incidence, bool blocked, double rho) {
  if (incidence >= rho && !blocked) return incidence;
  return rho;
}

}  // namespace

AlphaField solar_alpha(const GraphCloud& cloud, const SunModel& sun) {
  if (!(sun.elevation > 0.0 && sun.elevation < M_PI))
    throw std::invalid_argument("sun model: elevation must be in (0, pi)");
  if (!(sun.floor >= 0.0 && sun.floor <= 1.0))
    throw std::invalid_argument("sun model: floor must be in [0, 1]");
  const Vec2 toward{std::cos(sun.elevation), std::sin(sun.elevation)};

  AlphaField out;
  out.segment_values.resize(cloud.segment_count());
  for (int k = 0; k < cloud.segment_count(); ++k) {
    const double slope = cloud.segment_slope(k);
    const Vec2 nu = surface_normal(slope);
    const Vec2 mid{0.5 * (cloud.node_x(k) + cloud.node_x(k + 1)),
                   0.5 * (cloud.heights()[k] + cloud.heights()[k + 1])};
    out.segment_values[k] = sun_value(
        toward.dot(nu), is_blocked(cloud, mid, sun.elevation), sun.floor);
  }
  const Vec2 left_mid{cloud.x_left(),
                      0.5 * (cloud.base() + cloud.heights().front())};
  const Vec2 right_mid{cloud.x_right(),
                       0.5 * (cloud.base() + cloud.heights().back())};
  out.alpha_L = sun_value(-toward.x, is_blocked(cloud, left_mid, sun.elevation),
                          sun.floor);
  out.alpha_R = sun_value(toward.x, is_blocked(cloud, right_mid, sun.elevation),
                          sun.floor);
  return out;
}

AlphaField solar_alpha(const PolarCloud& cloud, const SunModel& sun) {
  if (!(sun.elevation > 0.0 && sun.elevation < M_PI))
    throw std::invalid_argument("sun model: elevation must be in (0, pi)");
  if (!(sun.floor >= 0.0 && sun.floor <= 1.0))
    throw std::invalid_argument("sun model: floor must be in [0, 1]");
  const Vec2 toward{std::cos(sun.elevation), std::sin(sun.elevation)};

  AlphaField out;
  out.segment_values.resize(cloud.vertex_count());
  for (int k = 0; k < cloud.vertex_count(); ++k) {
    const Vec2 a = cloud.vertex(k), b = cloud.vertex(k + 1);
    const Vec2 e = b - a;
    Vec2 nu{e.y, -e.x};
    if (nu.dot(a + b) < 0.0) nu = nu * -1.0;
    nu = nu.normalized();
    const Vec2 mid = (a + b) * 0.5;
    out.segment_values[k] = sun_value(
        toward.dot(nu), is_blocked(cloud, mid, sun.elevation), sun.floor);
  }
  return out;
}

}  // namespace cloudrecon
