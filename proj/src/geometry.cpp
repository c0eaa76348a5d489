#include "cloudrecon/geometry.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>

namespace cloudrecon {

Vec2 Vec2::normalized() const {
  const double n = norm();
  if (n == 0.0) throw std::domain_error("cannot normalize a zero vector");
  return {x / n, y / n};
}

Vec2 surface_normal(double slope) {
  const double n = std::sqrt(1.0 + slope * slope);
  return {-slope / n, 1.0 / n};
}

namespace {

struct Edge {
  Vec2 a, b;
  BoundaryPiece piece;
  int index;  // upper/polar segment id, -1 otherwise
  Vec2 normal;
};

// Closed boundary loop; edge i runs from vertex i to vertex i+1 (mod size).
struct Loop {
  std::vector<Edge> edges;
  double scale = 1.0;  // cloud diameter, used for tolerance bands
};

Loop graph_loop(const GraphCloud& c) {
  Loop loop;
  loop.scale = c.diameter();
  const int n = c.node_count();
  const Vec2 bl{c.x_left(), c.base()};
  const Vec2 br{c.x_right(), c.base()};
  // Counterclockwise: bottom, right side, upper surface right to left, left
  // side. Upper segment k keeps its left-to-right index.
  loop.edges.push_back({bl, br, BoundaryPiece::Bottom, -1, {0.0, -1.0}});
  loop.edges.push_back({br, Vec2{c.x_right(), c.heights()[n - 1]},
                        BoundaryPiece::RightSide, -1, {1.0, 0.0}});
  for (int k = n - 2; k >= 0; --k) {
    const Vec2 a{c.node_x(k + 1), c.heights()[k + 1]};
    const Vec2 b{c.node_x(k), c.heights()[k]};
    loop.edges.push_back(
        {a, b, BoundaryPiece::Upper, k, surface_normal(c.segment_slope(k))});
  }
  loop.edges.push_back({Vec2{c.x_left(), c.heights()[0]}, bl,
                        BoundaryPiece::LeftSide, -1, {-1.0, 0.0}});
  return loop;
}

Loop polar_loop(const PolarCloud& c) {
  Loop loop;
  loop.scale = c.diameter();
  for (int i = 0; i < c.vertex_count(); ++i) {
    const Vec2 a = c.vertex(i), b = c.vertex(i + 1);
    const Vec2 e = b - a;
    Vec2 nrm{e.y, -e.x};
    if (nrm.dot(a + b) < 0.0) nrm = nrm * -1.0;  // outward along the radial
    loop.edges.push_back({a, b, BoundaryPiece::Polar, i, nrm.normalized()});
  }
  return loop;
}

struct RawHit {
  double s;
  Vec2 point;
  int edge;
};

// Nearest transversal intersection of the half-line start + s*dir (s > s_min,
// dir unit) with the loop. Grazing contact is a miss: edges nearly parallel
// to the ray are skipped, and contact at a vertex counts only when the ray
// genuinely pierces the boundary there, i.e. the neighbouring vertices lie
// strictly on opposite sides of the ray line. A silhouette ray that just
// touches an apex therefore passes by unobstructed.
std::optional<RawHit> trace_loop(const Loop& loop, Vec2 start, Vec2 dir,
                                 double s_min) {
  const double eps = kGrazeTol * loop.scale;
  const int m = static_cast<int>(loop.edges.size());
  std::optional<RawHit> best;
  const auto offer = [&](double s, Vec2 point, int edge) {
    if (s > s_min && (!best || s < best->s)) best = RawHit{s, point, edge};
  };

  for (int i = 0; i < m; ++i) {
    const Edge& e = loop.edges[i];
    const Vec2 seg = e.b - e.a;
    const double len = seg.norm();
    const double denom = dir.cross(seg);
    if (std::abs(denom) <= kGrazeTol * len) continue;  // parallel band
    const Vec2 w = e.a - start;
    const double s = w.cross(seg) / denom;
    const double t = w.cross(dir) / denom;
    const double band = len > 0.0 ? eps / len : 0.0;
    if (t < band || t > 1.0 - band) continue;  // endpoint contact handled below
    offer(s, e.a + seg * t, i);
  }

  for (int i = 0; i < m; ++i) {
    const Vec2 v = loop.edges[i].a;  // vertex between edges i-1 and i
    const Vec2 rel = v - start;
    if (std::abs(dir.cross(rel)) > eps) continue;
    const double s = rel.dot(dir);
    if (s <= s_min) continue;
    const Vec2 prev = loop.edges[(i + m - 1) % m].a;
    const Vec2 next = loop.edges[i].b;
    const double dp = dir.cross(prev - start);
    const double dn = dir.cross(next - start);
    if (dp * dn < 0.0 && std::abs(dp) > eps && std::abs(dn) > eps)
      offer(s, v, i);
  }
  return best;
}

// Of the two edges meeting at vertex i of the loop, report the hit on the one
// that sorts first by piece then segment index; for an interior upper vertex
// this is the left segment, matching the interpolation tie-break.
int vertex_edge_choice(const Loop& loop, int i) {
  const int m = static_cast<int>(loop.edges.size());
  const int before = (i + m - 1) % m;
  const auto key = [&](int e) {
    return std::make_pair(static_cast<int>(loop.edges[e].piece),
                          loop.edges[e].index);
  };
  return key(before) <= key(i) ? before : i;
}

std::optional<SurfaceHit> finish_hit(const Loop& loop,
                                     const std::optional<RawHit>& raw,
                                     bool polar, const PolarCloud* pc) {
  if (!raw) return std::nullopt;
  int e = raw->edge;
  // Vertex snaps land exactly on loop vertices; resolve the owning edge there.
  if ((raw->point - loop.edges[e].a).norm() == 0.0)
    e = vertex_edge_choice(loop, e);
  const Edge& edge = loop.edges[e];
  SurfaceHit hit;
  hit.s = raw->s;
  hit.point = raw->point;
  hit.piece = edge.piece;
  hit.segment_index = edge.index;
  hit.normal = edge.normal;
  hit.x_or_theta =
      polar ? pc->normalize_angle(std::atan2(raw->point.y, raw->point.x))
            : raw->point.x;
  return hit;
}

}  // namespace

GraphCloud::GraphCloud(double x_L, double x_R, double h_B,
                       std::vector<double> heights)
    : x_L_(x_L), x_R_(x_R), h_B_(h_B), h_(std::move(heights)) {
  if (!(x_L_ < x_R_)) throw std::invalid_argument("graph cloud: x_L must be < x_R");
  if (h_.size() < 2) throw std::invalid_argument("graph cloud: need at least 2 nodes");
  for (double h : h_) {
    if (!(h > h_B_))
      throw std::invalid_argument("graph cloud: every node height must exceed the base");
  }
  dx_ = (x_R_ - x_L_) / static_cast<double>(h_.size() - 1);
  max_h_ = *std::max_element(h_.begin(), h_.end());
}

double GraphCloud::node_x(int i) const {
  const int n = node_count();
  if (i < 0 || i >= n) throw std::domain_error("graph cloud: node index out of range");
  // Evaluated so the last node lands on x_R exactly.
  return x_L_ + (x_R_ - x_L_) * (static_cast<double>(i) / (n - 1));
}

double GraphCloud::diameter() const {
  return std::hypot(x_R_ - x_L_, max_h_ - h_B_);
}

double GraphCloud::segment_slope(int k) const {
  if (k < 0 || k >= segment_count())
    throw std::domain_error("graph cloud: segment index out of range");
  return (h_[k + 1] - h_[k]) / dx_;
}

GraphCloud::Sample GraphCloud::eval(double x) const {
  if (x < x_L_ || x > x_R_)
    throw std::domain_error("graph cloud: evaluation point outside [x_L, x_R]");
  // ceil - 1 assigns a point landing exactly on an interior node to the
  // segment on its left.
  int k = static_cast<int>(std::ceil((x - x_L_) / dx_)) - 1;
  k = std::clamp(k, 0, segment_count() - 1);
  const double slope = segment_slope(k);
  return {h_[k] + slope * (x - node_x(k)), slope, k};
}

PolarCloud::PolarCloud(double theta0, std::vector<double> radii)
    : theta0_(theta0), r_(std::move(radii)) {
  const int n = static_cast<int>(r_.size());
  if (n < 3) throw std::invalid_argument("polar cloud: need at least 3 radii");
  for (double r : r_) {
    if (!(r > 0.0)) throw std::invalid_argument("polar cloud: radii must be positive");
  }
  dtheta_ = 2.0 * M_PI / n;
  max_r_ = *std::max_element(r_.begin(), r_.end());

  // The vertex polygon must be a simple closed curve.
  const auto cross_test = [&](int i, int j) {
    const Vec2 a = vertex(i), b = vertex(i + 1);
    const Vec2 c = vertex(j), d = vertex(j + 1);
    const auto side = [](Vec2 p, Vec2 q, Vec2 r) { return (q - p).cross(r - p); };
    const double d1 = side(a, b, c), d2 = side(a, b, d);
    const double d3 = side(c, d, a), d4 = side(c, d, b);
    return ((d1 > 0) != (d2 > 0)) && ((d3 > 0) != (d4 > 0));
  };
  for (int i = 0; i < n; ++i) {
    for (int j = i + 2; j < n; ++j) {
      if (i == 0 && j == n - 1) continue;  // closing edge is adjacent to edge 0
      if (cross_test(i, j))
        throw std::invalid_argument("polar cloud: boundary polygon self-intersects");
    }
  }
}

Vec2 PolarCloud::vertex(int i) const {
  const int n = vertex_count();
  const int k = ((i % n) + n) % n;
  const double th = theta0_ + k * dtheta_;
  return {r_[k] * std::cos(th), r_[k] * std::sin(th)};
}

double PolarCloud::normalize_angle(double theta) const {
  double t = std::fmod(theta - theta0_, 2.0 * M_PI);
  if (t < 0.0) t += 2.0 * M_PI;
  return theta0_ + t;
}

PolarCloud::Sample PolarCloud::eval(double theta) const {
  const double th = normalize_angle(theta);
  int i = static_cast<int>((th - theta0_) / dtheta_);
  i = std::clamp(i, 0, vertex_count() - 1);
  const Vec2 a = vertex(i), b = vertex(i + 1);
  const Vec2 e = b - a;
  const Vec2 u{std::cos(th), std::sin(th)};
  // The segment spans the angular cone [theta_i, theta_i+1] (< pi wide), so
  // the ray from the origin at th crosses it exactly once.
  const double denom = u.cross(e);
  Vec2 q;
  if (std::abs(denom) < 1e-300) {
    q = a;  // degenerate sliver; fall back to the opening vertex
  } else {
    const double t = std::clamp(a.cross(u) / denom, 0.0, 1.0);
    q = a + e * t;
  }
  Vec2 nrm{e.y, -e.x};
  if (nrm.dot(q) < 0.0) nrm = nrm * -1.0;
  return {q, e.y / e.x, nrm.normalized(), i};
}

std::optional<SurfaceHit> trace_ray_graph(const GraphCloud& cloud, double X,
                                          double Z, double phi) {
  if (!(Z > cloud.max_height()))
    throw std::domain_error("trace_ray_graph: detector must sit above the cloud top");
  if (!(phi > 0.0 && phi < M_PI))
    throw std::domain_error("trace_ray_graph: phi must lie in (0, pi)");
  const Loop loop = graph_loop(cloud);
  const Vec2 dir{-std::cos(phi), -std::sin(phi)};
  const auto raw =
      trace_loop(loop, {X, Z}, dir, kGrazeTol * loop.scale);
  return finish_hit(loop, raw, false, nullptr);
}

std::optional<SurfaceHit> trace_ray_polar(const PolarCloud& cloud, double Theta,
                                          double R, double phi) {
  if (!(R > cloud.max_radius()))
    throw std::domain_error("trace_ray_polar: detector circle must enclose the cloud");
  const Loop loop = polar_loop(cloud);
  const Vec2 start{R * std::cos(Theta), R * std::sin(Theta)};
  const Vec2 dir{-std::cos(phi), -std::sin(phi)};
  const auto raw = trace_loop(loop, start, dir, kGrazeTol * loop.scale);
  return finish_hit(loop, raw, true, &cloud);
}

// A boundary point emits along (cos phi, sin phi); the emitted ray is blocked
// when it meets the boundary again. The start point sits on its own edge, so
// that edge can only re-intersect at parameter zero, which the s_min band
// already rejects; no explicit exclusion is needed.
bool is_blocked(const GraphCloud& cloud, Vec2 p, double phi) {
  const Loop loop = graph_loop(cloud);
  return trace_loop(loop, p, {std::cos(phi), std::sin(phi)},
                    kGrazeTol * loop.scale)
      .has_value();
}

bool is_blocked(const PolarCloud& cloud, Vec2 p, double phi) {
  const Loop loop = polar_loop(cloud);
  return trace_loop(loop, p, {std::cos(phi), std::sin(phi)},
                    kGrazeTol * loop.scale)
      .has_value();
}

}  // namespace cloudrecon
