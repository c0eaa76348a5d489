#pragma once

// Planar geometry of cloud boundaries and back-ray tracing.
//
// Two boundary parameterizations are supported:
//  - GraphCloud: an upper surface h(x) given by heights on a uniform grid,
//    closed by two vertical sides and a flat bottom at h_B.
//  - PolarCloud: a closed curve r(theta) sampled at uniformly spaced angles,
//    realized as the polygon through the sampled vertices.
//
// Rays are straight lines. A detector sees radiance along direction
// theta(phi) = (cos phi, sin phi); tracing walks the ray backwards from the
// detector and reports the nearest boundary intersection. Grazing incidence
// (ray nearly parallel to the segment, or intersection inside the tolerance
// band around the start point) counts as a miss rather than a hit.

#include <cmath>
#include <optional>
#include <vector>

namespace cloudrecon {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  Vec2 operator+(Vec2 o) const { return {x + o.x, y + o.y}; }
  Vec2 operator-(Vec2 o) const { return {x - o.x, y - o.y}; }
  Vec2 operator*(double c) const { return {c * x, c * y}; }
  double dot(Vec2 o) const { return x * o.x + y * o.y; }
  double cross(Vec2 o) const { return x * o.y - y * o.x; }
  double norm() const { return std::hypot(x, y); }
  Vec2 normalized() const;
};

// Relative tolerance declaring an intersection grazing; scaled by the cloud
// diameter wherever a length is needed.
inline constexpr double kGrazeTol = 1e-9;

// Unit outward normal of an upper surface element with slope h'.
Vec2 surface_normal(double slope);

class GraphCloud {
 public:
  // Heights are listed left to right on the uniform grid over [x_L, x_R].
  // Requires x_L < x_R, at least two nodes, and every node above the base.
  GraphCloud(double x_L, double x_R, double h_B, std::vector<double> heights);

  double x_left() const { return x_L_; }
  double x_right() const { return x_R_; }
  double base() const { return h_B_; }
  int node_count() const { return static_cast<int>(h_.size()); }
  int segment_count() const { return node_count() - 1; }
  double dx() const { return dx_; }
  const std::vector<double>& heights() const { return h_; }
  double node_x(int i) const;
  double max_height() const { return max_h_; }
  // Characteristic size used to scale geometric tolerances.
  double diameter() const;

  // Piecewise linear interpolation of the upper surface. At interior nodes
  // the left segment supplies the slope. Throws std::domain_error outside
  // [x_L, x_R].
  struct Sample {
    double height;
    double slope;
    int segment;
  };
  Sample eval(double x) const;

  double segment_slope(int k) const;

 private:
  double x_L_, x_R_, h_B_, dx_, max_h_;
  std::vector<double> h_;
};

class PolarCloud {
 public:
  // Radii sampled at theta_j = theta0 + j * 2pi/N, j = 0..N-1; the boundary
  // is the closed polygon through the sampled vertices. Requires at least
  // three positive radii and a simple (non-self-intersecting) polygon.
  PolarCloud(double theta0, std::vector<double> radii);

  double theta0() const { return theta0_; }
  int vertex_count() const { return static_cast<int>(r_.size()); }
  double dtheta() const { return dtheta_; }
  const std::vector<double>& radii() const { return r_; }
  double vertex_angle(int i) const { return theta0_ + i * dtheta_; }
  Vec2 vertex(int i) const;
  double max_radius() const { return max_r_; }
  double diameter() const { return 2.0 * max_r_; }

  // Boundary point at polar angle theta, with the Cartesian slope of the
  // supporting segment (+-inf for vertical segments) and the outward unit
  // normal. theta is taken modulo 2pi.
  struct Sample {
    Vec2 point;
    double slope;
    Vec2 normal;
    int segment;
  };
  Sample eval(double theta) const;

  // Angle folded into [theta0, theta0 + 2pi).
  double normalize_angle(double theta) const;

 private:
  double theta0_, dtheta_, max_r_;
  std::vector<double> r_;
};

enum class BoundaryPiece { Upper, LeftSide, RightSide, Bottom, Polar };

struct SurfaceHit {
  double s = 0.0;          // distance travelled backwards from the detector
  double x_or_theta = 0.0; // surface coordinate: x (graph) or theta (polar)
  int segment_index = -1;  // upper/polar segment id; -1 for sides and bottom
  BoundaryPiece piece = BoundaryPiece::Upper;
  Vec2 point;
  Vec2 normal;             // unit outward normal of the hit segment
};

// Nearest boundary intersection of the back ray from detector point (X, Z)
// looking along direction (cos phi, sin phi). Requires Z above the cloud top
// and 0 < phi < pi. Returns nothing when the ray misses.
std::optional<SurfaceHit> trace_ray_graph(const GraphCloud& cloud, double X,
                                          double Z, double phi);

// Polar counterpart: detector at circle angle Theta on radius R (R beyond the
// cloud), phi the global direction angle of light travel. Any phi is allowed.
std::optional<SurfaceHit> trace_ray_polar(const PolarCloud& cloud, double Theta,
                                          double R, double phi);

// True when the outgoing ray from boundary point p along (cos phi, sin phi)
// re-enters the cloud silhouette before escaping. Segments passing through p
// itself (the emitting element) are excluded; grazing contacts do not block.
bool is_blocked(const GraphCloud& cloud, Vec2 p, double phi);
bool is_blocked(const PolarCloud& cloud, Vec2 p, double phi);

}  // namespace cloudrecon
