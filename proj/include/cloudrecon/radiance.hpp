#pragma once

// Surface radiance model: the outgoing intensity at a boundary point is
// u = alpha(x) * beta(gamma), where alpha is the spatial emission strength,
// beta the angular profile, and gamma the emitted direction measured from
// the local surface tangent.

#include <vector>

#include "cloudrecon/geometry.hpp"

namespace cloudrecon {

enum class BetaNormalization { ValueAtNadir, UnitIntegral };

// Piecewise-linear angular profile with knots at pi*p/P, p = 0..P.
class BetaProfile {
 public:
  explicit BetaProfile(std::vector<double> knots,
                       BetaNormalization norm = BetaNormalization::ValueAtNadir);

  // sin sampled at the knots and rescaled so the interpolant is 1 at pi/2.
  static BetaProfile sine(int P);
  static BetaProfile constant(int P);

  int knot_count() const { return static_cast<int>(b_.size()); }
  int P() const { return knot_count() - 1; }
  double knot_angle(int p) const { return M_PI * p / P(); }
  const std::vector<double>& knots() const { return b_; }
  BetaNormalization normalization() const { return norm_; }

  // Interpolant value / derivative at an emission angle in [0, pi]. At knots
  // the left segment supplies the derivative.
  double eval(double angle) const;
  double slope(double angle) const;
  // Derivative of eval(angle) with respect to knot value p; the hat basis
  // function of knot p. Nonzero for at most two knots at any angle.
  double knot_weight(double angle, int p) const;

  double nadir_value() const { return eval(M_PI / 2); }
  // Trapezoid integral of the interpolant over [0, pi] (exact for the
  // piecewise-linear function).
  double integral() const;

 private:
  std::vector<double> b_;
  BetaNormalization norm_;
  double dphi_;
};

// Per-segment emission strengths. For a graph cloud, segment_values holds one
// value per upper segment and the two sides emit alpha_L, alpha_R; the bottom
// is dark. For a polar cloud, segment_values covers every polygon edge and
// the side values are unused.
struct AlphaField {
  std::vector<double> segment_values;
  double alpha_L = 0.0;
  double alpha_R = 0.0;
};

// Continuous emission field built from per-segment values: segment values are
// averaged onto the nodes (end nodes copy their single neighbour; cyclic
// fields average around the wrap) and interpolated linearly between nodes.
// Parameterized by the segment coordinate t, where node k sits at t = k; the
// caller rescales derivatives by its own grid spacing.
class AlphaReconstruction {
 public:
  AlphaReconstruction(const std::vector<double>& segment_values, bool cyclic);

  int node_count() const { return static_cast<int>(nodal_.size()); }
  const std::vector<double>& nodal() const { return nodal_; }

  double value(double t) const;
  // Piecewise-constant derivative in t; left tie-break at nodes.
  double slope(double t) const;

  // Derivative of value(t) with respect to segment value j; at most three
  // segments carry weight at any t.
  double weight(double t, int j) const;

 private:
  std::vector<double> nodal_;
  bool cyclic_;
  int n_seg_;
};

// u = alpha * beta(phi - arctan slope) for an upper-surface element of the
// given slope. The emitted direction must lie in the open upward half-space
// of the element: 0 < phi - arctan(slope) < pi.
double emission(double alpha_value, const BetaProfile& beta, double slope,
                double phi);

// Solar illumination: sun direction (cos xi, sin xi) with elevation xi, and a
// floor value rho for shaded surface.
struct SunModel {
  double elevation = M_PI / 2;
  double floor = 0.2;
};

// Per-segment alpha from the sun: the cosine of incidence where the surface
// faces the sun and the sun ray is unobstructed, the floor rho elsewhere.
// Evaluated at segment midpoints. The graph overload also fills the side
// values alpha_L, alpha_R.
AlphaField solar_alpha(const GraphCloud& cloud, const SunModel& sun);
AlphaField solar_alpha(const PolarCloud& cloud, const SunModel& sun);

}  // namespace cloudrecon
