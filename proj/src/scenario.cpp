#include "cloudrecon/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <initializer_list>
#include <numeric>
#include <string>
#include <vector>

#include "cloudrecon/radiance.hpp"

namespace cloudrecon {
namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw ScenarioError(path + ": " + what);
}

std::string join(const std::string& path, const std::string& key) {
  return path.empty() ? key : path + "." + key;
}

void expect_object(const json& j, const std::string& path) {
  if (!j.is_object()) fail(path, "expected an object");
}

// Strict schema: anything we do not recognize is a typo, not an extension
// point, so it fails with its full path instead of being ignored.
void check_keys(const json& obj, const std::string& path,
                std::initializer_list<const char*> allowed) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    const bool known = std::any_of(allowed.begin(), allowed.end(),
                                   [&](const char* k) { return it.key() == k; });
    if (!known) fail(join(path, it.key()), "unknown entry");
  }
}

const json* find(const json& obj, const char* key) {
  const auto it = obj.find(key);
  return it == obj.end() || it->is_null() ? nullptr : &*it;
}

double get_num(const json& obj, const std::string& path, const char* key) {
  const json* j = find(obj, key);
  if (!j) fail(join(path, key), "required entry is missing");
  if (!j->is_number()) fail(join(path, key), "expected a number");
  return j->get<double>();
}

double opt_num(const json& obj, const std::string& path, const char* key,
               double dflt) {
  return find(obj, key) ? get_num(obj, path, key) : dflt;
}

int get_int(const json& obj, const std::string& path, const char* key) {
  const json* j = find(obj, key);
  if (!j) fail(join(path, key), "required entry is missing");
  if (!j->is_number_integer()) fail(join(path, key), "expected an integer");
  return j->get<int>();
}

int opt_int(const json& obj, const std::string& path, const char* key,
            int dflt) {
  return find(obj, key) ? get_int(obj, path, key) : dflt;
}

bool opt_bool(const json& obj, const std::string& path, const char* key,
              bool dflt) {
  const json* j = find(obj, key);
  if (!j) return dflt;
  if (!j->is_boolean()) fail(join(path, key), "expected true or false");
  return j->get<bool>();
}

std::string opt_str(const json& obj, const std::string& path, const char* key,
                    const std::string& dflt) {
  const json* j = find(obj, key);
  if (!j) return dflt;
  if (!j->is_string()) fail(join(path, key), "expected a string");
  return j->get<std::string>();
}

const json& get_obj(const json& obj, const std::string& path, const char* key) {
  const json* j = find(obj, key);
  if (!j) fail(join(path, key), "required entry is missing");
  expect_object(*j, join(path, key));
  return *j;
}

std::vector<double> get_vec(const json& obj, const std::string& path,
                            const char* key) {
  const json* j = find(obj, key);
  if (!j) fail(join(path, key), "required entry is missing");
  if (!j->is_array() || j->empty())
    fail(join(path, key), "expected a non-empty array of numbers");
  std::vector<double> out;
  out.reserve(j->size());
  for (const json& e : *j) {
    if (!e.is_number())
      fail(join(path, key), "expected a non-empty array of numbers");
    out.push_back(e.get<double>());
  }
  return out;
}

std::string get_kind(const json& obj, const std::string& path) {
  const json* j = find(obj, "kind");
  if (!j) fail(join(path, "kind"), "required entry is missing");
  if (!j->is_string()) fail(join(path, "kind"), "expected a string");
  return j->get<std::string>();
}

struct Preset {
  double height;
  double pixel_size;
};

Preset lookup_preset(const std::string& name) {
  if (name == "desk") return {10.0, 0.1};
  if (name == "misr") return {705.0, 0.275};
  throw ScenarioError("preset: unknown preset '" + name + "'");
}

// ---- cloud shapes ---------------------------------------------------------

int node_count_for(const json& c, const std::string& path, const json& shape,
                   const std::string& spath, const char* values_key,
                   int minimum) {
  const json* given = find(c, "nodes");
  if (get_kind(shape, spath) == "explicit") {
    const std::vector<double> v = get_vec(shape, spath, values_key);
    const int n = static_cast<int>(v.size());
    if (given && get_int(c, path, "nodes") != n)
      fail(join(path, "nodes"), "does not match the explicit value count");
    if (n < minimum)
      fail(join(spath, values_key),
           "need at least " + std::to_string(minimum) + " entries");
    return n;
  }
  const int n = get_int(c, path, "nodes");
  if (n < minimum)
    fail(join(path, "nodes"),
         "need at least " + std::to_string(minimum) + " grid nodes");
  return n;
}

std::vector<double> graph_heights(const json& shape, const std::string& path,
                                  int n, double x_left, double x_right) {
  const std::string kind = get_kind(shape, path);
  std::vector<double> h(n);
  const double mid = 0.5 * (x_left + x_right);
  const double half = 0.5 * (x_right - x_left);
  if (kind == "flat") {
    check_keys(shape, path, {"kind", "height"});
    std::fill(h.begin(), h.end(), get_num(shape, path, "height"));
  } else if (kind == "line") {
    check_keys(shape, path, {"kind", "left", "right"});
    const double a = get_num(shape, path, "left");
    const double b = get_num(shape, path, "right");
    for (int i = 0; i < n; ++i) h[i] = a + (b - a) * i / (n - 1);
  } else if (kind == "cosine") {
    check_keys(shape, path, {"kind", "mean", "amplitude", "cycles"});
    const double mean = get_num(shape, path, "mean");
    const double ampl = get_num(shape, path, "amplitude");
    const double cyc = opt_num(shape, path, "cycles", 1.0);
    for (int i = 0; i < n; ++i) {
      const double x = x_left + (x_right - x_left) * i / (n - 1);
      h[i] = mean + ampl * std::cos(M_PI * cyc * (x - mid) / half);
    }
  } else if (kind == "bumps") {
    check_keys(shape, path, {"kind", "mean", "terms"});
    const double mean = get_num(shape, path, "mean");
    const json* terms = find(shape, "terms");
    if (!terms || !terms->is_array() || terms->empty())
      fail(join(path, "terms"), "expected a non-empty array");
    std::fill(h.begin(), h.end(), mean);
    int t = 0;
    for (const json& term : *terms) {
      const std::string tpath = join(path, "terms[" + std::to_string(t++) + "]");
      expect_object(term, tpath);
      check_keys(term, tpath, {"amplitude", "frequency", "phase"});
      const double a = get_num(term, tpath, "amplitude");
      const double f = get_num(term, tpath, "frequency");
      const double p = opt_num(term, tpath, "phase", 0.0);
      for (int i = 0; i < n; ++i) {
        const double x = x_left + (x_right - x_left) * i / (n - 1);
        h[i] += a * std::sin(f * x + p);
      }
    }
  } else if (kind == "explicit") {
    check_keys(shape, path, {"kind", "heights"});
    h = get_vec(shape, path, "heights");
  } else {
    fail(join(path, "kind"), "unknown shape '" + kind + "'");
  }
  return h;
}

GraphCloud build_graph_cloud(const json& c, const std::string& path) {
  check_keys(c, path,
             {"kind", "x_left", "x_right", "base", "nodes", "shape"});
  const double xl = get_num(c, path, "x_left");
  const double xr = get_num(c, path, "x_right");
  const double base = opt_num(c, path, "base", 0.0);
  const json& shape = get_obj(c, path, "shape");
  const std::string spath = join(path, "shape");
  const int n = node_count_for(c, path, shape, spath, "heights", 2);
  try {
    return GraphCloud(xl, xr, base, graph_heights(shape, spath, n, xl, xr));
  } catch (const std::invalid_argument& e) {
    fail(path, e.what());
  }
}

std::vector<double> polar_radii(const json& shape, const std::string& path,
                                int n, double theta0) {
  const std::string kind = get_kind(shape, path);
  std::vector<double> r(n);
  const double dtheta = 2.0 * M_PI / n;
  if (kind == "circle") {
    check_keys(shape, path, {"kind", "radius"});
    std::fill(r.begin(), r.end(), get_num(shape, path, "radius"));
  } else if (kind == "star") {
    check_keys(shape, path, {"kind", "radius", "amplitude", "lobes", "phase"});
    const double r0 = get_num(shape, path, "radius");
    const double a = get_num(shape, path, "amplitude");
    const int lobes = get_int(shape, path, "lobes");
    const double p = opt_num(shape, path, "phase", 0.0);
    for (int i = 0; i < n; ++i)
      r[i] = r0 + a * std::cos(lobes * (theta0 + i * dtheta - p));
  } else if (kind == "chord") {
    // A circle truncated by a straight edge: the chord at distance d from the
    // centre, facing direction "angle", replaces the arc it cuts off.
    check_keys(shape, path, {"kind", "radius", "distance", "angle"});
    const double r0 = get_num(shape, path, "radius");
    const double d = get_num(shape, path, "distance");
    const double ang = opt_num(shape, path, "angle", 0.0);
    if (!(d > 0.0) || !(d < r0))
      fail(join(path, "distance"), "must lie in (0, radius)");
    for (int i = 0; i < n; ++i) {
      const double c = std::cos(theta0 + i * dtheta - ang);
      r[i] = (c * r0 > d) ? d / c : r0;
    }
  } else if (kind == "explicit") {
    check_keys(shape, path, {"kind", "radii"});
    r = get_vec(shape, path, "radii");
  } else {
    fail(join(path, "kind"), "unknown shape '" + kind + "'");
  }
  return r;
}

PolarCloud build_polar_cloud(const json& c, const std::string& path) {
  check_keys(c, path, {"kind", "nodes", "theta0", "shape"});
  const double theta0 = opt_num(c, path, "theta0", 0.0);
  const json& shape = get_obj(c, path, "shape");
  const std::string spath = join(path, "shape");
  const int n = node_count_for(c, path, shape, spath, "radii", 3);
  try {
    return PolarCloud(theta0, polar_radii(shape, spath, n, theta0));
  } catch (const std::invalid_argument& e) {
    fail(path, e.what());
  }
}

// ---- emission -------------------------------------------------------------

void require_nonneg(const std::vector<double>& v, const std::string& path) {
  for (double x : v)
    if (!(x >= 0.0)) fail(path, "emission strengths must be nonnegative");
}

double segment_midpoint(const GraphCloud& cloud, int k) {
  return cloud.x_left() + (k + 0.5) * cloud.dx();
}

double segment_midpoint(const PolarCloud& cloud, int k) {
  return cloud.theta0() + (k + 0.5) * cloud.dtheta();
}

template <class Cloud>
std::vector<double> alpha_values(const json& a, const std::string& path,
                                 const Cloud& cloud, int segments,
                                 bool mirror_sun) {
  const std::string kind = get_kind(a, path);
  std::vector<double> v(segments);
  if (kind == "constant") {
    check_keys(a, path, {"kind", "value", "side"});
    std::fill(v.begin(), v.end(), get_num(a, path, "value"));
  } else if (kind == "step") {
    check_keys(a, path, {"kind", "left", "right", "split"});
    const double lo = get_num(a, path, "left");
    const double hi = get_num(a, path, "right");
    const double split = get_num(a, path, "split");
    for (int k = 0; k < segments; ++k)
      v[k] = segment_midpoint(cloud, k) < split ? lo : hi;
  } else if (kind == "solar") {
    check_keys(a, path, {"kind", "elevation", "floor"});
    SunModel sun;
    sun.elevation = get_num(a, path, "elevation");
    sun.floor = opt_num(a, path, "floor", 0.2);
    if (mirror_sun) sun.elevation = M_PI - sun.elevation;
    try {
      return solar_alpha(cloud, sun).segment_values;
    } catch (const std::invalid_argument& e) {
      fail(path, e.what());
    }
  } else if (kind == "explicit") {
    check_keys(a, path, {"kind", "values", "side_left", "side_right"});
    v = get_vec(a, path, "values");
    if (static_cast<int>(v.size()) != segments)
      fail(join(path, "values"), "expected " + std::to_string(segments) +
                                     " segment values, got " +
                                     std::to_string(v.size()));
  } else {
    fail(join(path, "kind"), "unknown emission model '" + kind + "'");
  }
  require_nonneg(v, path);
  return v;
}

AlphaField build_graph_alpha(const json& a, const std::string& path,
                             const GraphCloud& cloud, bool mirror_sun) {
  const std::string kind = get_kind(a, path);
  if (kind == "solar") {
    check_keys(a, path, {"kind", "elevation", "floor"});
    SunModel sun;
    sun.elevation = get_num(a, path, "elevation");
    sun.floor = opt_num(a, path, "floor", 0.2);
    if (mirror_sun) sun.elevation = M_PI - sun.elevation;
    try {
      return solar_alpha(cloud, sun);
    } catch (const std::invalid_argument& e) {
      fail(path, e.what());
    }
  }
  AlphaField f;
  f.segment_values =
      alpha_values(a, path, cloud, cloud.segment_count(), mirror_sun);
  if (kind == "constant") {
    f.alpha_L = f.alpha_R = opt_num(a, path, "side", f.segment_values.front());
  } else if (kind == "step") {
    f.alpha_L = f.segment_values.front();
    f.alpha_R = f.segment_values.back();
  } else {
    f.alpha_L = opt_num(a, path, "side_left", f.segment_values.front());
    f.alpha_R = opt_num(a, path, "side_right", f.segment_values.back());
  }
  if (!(f.alpha_L >= 0.0) || !(f.alpha_R >= 0.0))
    fail(path, "emission strengths must be nonnegative");
  return f;
}

AlphaField build_polar_alpha(const json& a, const std::string& path,
                             const PolarCloud& cloud, bool mirror_sun) {
  AlphaField f;
  f.segment_values =
      alpha_values(a, path, cloud, cloud.vertex_count(), mirror_sun);
  return f;
}

AlphaField constant_alpha(int segments, double value) {
  AlphaField f;
  f.segment_values.assign(segments, value);
  f.alpha_L = f.alpha_R = value;
  return f;
}

BetaProfile build_beta(const json& b, const std::string& path) {
  const std::string kind = get_kind(b, path);
  if (kind == "sine" || kind == "constant") {
    check_keys(b, path, {"kind", "intervals"});
    const int P = opt_int(b, path, "intervals", 8);
    if (P < 2 || P % 2 != 0)
      fail(join(path, "intervals"),
           "must be a positive even count so a knot sits at pi/2");
    return kind == "sine" ? BetaProfile::sine(P) : BetaProfile::constant(P);
  }
  if (kind == "explicit") {
    check_keys(b, path, {"kind", "knots"});
    try {
      return BetaProfile(get_vec(b, path, "knots"));
    } catch (const std::invalid_argument& e) {
      fail(path, e.what());
    }
  }
  fail(join(path, "kind"), "unknown profile '" + kind + "'");
}

// ---- detectors ------------------------------------------------------------

std::vector<double> fan_angles(int count, double half_width) {
  std::vector<double> a(count);
  for (int i = 0; i < count; ++i)
    a[i] = M_PI / 2 + half_width * (2.0 * i / (count - 1) - 1.0);
  return a;
}

std::vector<double> build_angles(const json* spec, const std::string& path,
                                 bool polar) {
  if (!spec) return polar ? paper_polar_angles() : misr_angles();
  if (spec->is_string()) {
    const std::string name = spec->get<std::string>();
    if (name == "misr") return misr_angles();
    if (name == "paper") return paper_polar_angles();
    fail(path, "unknown angle set '" + name + "'");
  }
  expect_object(*spec, path);
  const std::string kind = get_kind(*spec, path);
  if (kind == "fan") {
    check_keys(*spec, path, {"kind", "count", "half_width"});
    const int count = get_int(*spec, path, "count");
    const double hw = get_num(*spec, path, "half_width");
    if (count < 2) fail(join(path, "count"), "need at least two angles");
    if (!(hw > 0.0)) fail(join(path, "half_width"), "must be positive");
    return fan_angles(count, hw);
  }
  if (kind == "explicit") {
    check_keys(*spec, path, {"kind", "values"});
    return get_vec(*spec, path, "values");
  }
  fail(join(path, "kind"), "unknown angle set '" + kind + "'");
}

DetectorLine build_line_detector(const json* dj, const std::string& path,
                                 const GraphCloud& cloud,
                                 const Preset& preset) {
  const json empty = json::object();
  const json& d = dj ? *dj : empty;
  expect_object(d, path);
  check_keys(d, path,
             {"height", "pixel_size", "first_pixel", "pixel_count",
              "subsamples", "angles"});
  DetectorLine det;
  det.Z = opt_num(d, path, "height", preset.height);
  det.pixel_size = opt_num(d, path, "pixel_size", preset.pixel_size);
  det.subsamples = opt_int(d, path, "subsamples", 8);
  if (!(det.Z > cloud.max_height()))
    fail(join(path, "height"), "detector must sit above the cloud top");
  if (!(det.pixel_size > 0.0)) fail(join(path, "pixel_size"), "must be positive");
  if (det.subsamples < 1) fail(join(path, "subsamples"), "must be at least 1");

  det.angles = build_angles(find(d, "angles"), join(path, "angles"), false);
  for (std::size_t j = 0; j < det.angles.size(); ++j) {
    if (!(det.angles[j] > 0.0) || !(det.angles[j] < M_PI))
      fail(join(path, "angles"),
           "line detectors need angles strictly inside (0, pi)");
    if (j > 0 && !(det.angles[j] > det.angles[j - 1]))
      fail(join(path, "angles"), "angles must be strictly increasing");
  }

  const json* fp = find(d, "first_pixel");
  const json* pc = find(d, "pixel_count");
  if (fp && pc) {
    det.first_pixel = get_int(d, path, "first_pixel");
    det.pixel_count = get_int(d, path, "pixel_count");
    if (det.pixel_count < 1) fail(join(path, "pixel_count"), "must be at least 1");
  } else if (fp || pc) {
    fail(join(path, fp ? "pixel_count" : "first_pixel"),
         "first_pixel and pixel_count must be given together");
  } else {
    // Wide enough that every ray able to meet the cloud starts on a pixel,
    // whatever the viewing angle.
    double max_cot = 0.0;
    for (double phi : det.angles)
      max_cot = std::max(max_cot, std::abs(std::cos(phi) / std::sin(phi)));
    const double margin = (det.Z - cloud.base()) * max_cot;
    const int n0 = static_cast<int>(
                       std::floor((cloud.x_left() - margin) / det.pixel_size)) -
                   1;
    const int n1 = static_cast<int>(
                       std::floor((cloud.x_right() + margin) / det.pixel_size)) +
                   1;
    det.first_pixel = n0;
    det.pixel_count = n1 - n0 + 1;
  }
  return det;
}

DetectorCircle build_circle_detector(const json* dj, const std::string& path,
                                     const PolarCloud& cloud) {
  const json empty = json::object();
  const json& d = dj ? *dj : empty;
  expect_object(d, path);
  check_keys(d, path, {"radius", "pixel_count", "subsamples", "angles"});
  DetectorCircle det;
  det.R = opt_num(d, path, "radius", 1.3 * cloud.max_radius());
  det.pixel_count = opt_int(d, path, "pixel_count", 240);
  det.subsamples = opt_int(d, path, "subsamples", 8);
  det.angles = build_angles(find(d, "angles"), join(path, "angles"), true);
  if (!(det.R > cloud.max_radius()))
    fail(join(path, "radius"), "detector circle must enclose the cloud");
  if (det.pixel_count < 3) fail(join(path, "pixel_count"), "must be at least 3");
  if (det.subsamples < 1) fail(join(path, "subsamples"), "must be at least 1");
  return det;
}

// ---- initial guess --------------------------------------------------------

GraphState build_graph_init(const json* ij, const std::string& path,
                            const GraphState& truth, bool estimate_speed,
                            bool mirror_sun) {
  const json empty = json::object();
  const json& i = ij ? *ij : empty;
  expect_object(i, path);
  check_keys(i, path, {"shape", "alpha", "beta"});

  const std::vector<double>& th = truth.cloud.heights();
  const int n = truth.cloud.node_count();
  std::vector<double> h;
  const json* sj = find(i, "shape");
  const std::string spath = join(path, "shape");
  std::string skind = sj ? get_kind(*sj, spath) : "flat";
  if (skind == "truth") {
    check_keys(*sj, spath, {"kind"});
    h = th;
  } else if (skind == "flat" && (!sj || !find(*sj, "height"))) {
    if (sj) check_keys(*sj, spath, {"kind", "height"});
    const double mean = std::accumulate(th.begin(), th.end(), 0.0) / n;
    h.assign(n, mean);
  } else {
    h = graph_heights(*sj, spath, n, truth.cloud.x_left(),
                      truth.cloud.x_right());
    if (static_cast<int>(h.size()) != n)
      fail(join(spath, "heights"), "expected " + std::to_string(n) +
                                       " entries matching the truth grid");
  }
  // The endpoint heights act as boundary data for the reconstruction, so any
  // generated guess starts from the true ones. Explicit guesses are taken as
  // written.
  if (skind != "truth" && skind != "explicit") {
    h.front() = th.front();
    h.back() = th.back();
  }

  GraphState init{truth.cloud, truth.alpha, truth.beta,
                  estimate_speed ? 1.0 : truth.lambda};
  try {
    init.cloud = GraphCloud(truth.cloud.x_left(), truth.cloud.x_right(),
                            truth.cloud.base(), h);
  } catch (const std::invalid_argument& e) {
    fail(spath, e.what());
  }

  const json* aj = find(i, "alpha");
  if (!aj) {
    init.alpha = constant_alpha(truth.cloud.segment_count(), 1.0);
  } else if (get_kind(*aj, join(path, "alpha")) == "truth") {
    init.alpha = truth.alpha;
  } else {
    init.alpha =
        build_graph_alpha(*aj, join(path, "alpha"), init.cloud, mirror_sun);
  }

  const json* bj = find(i, "beta");
  if (!bj) {
    init.beta = BetaProfile::constant(truth.beta.P());
  } else if (get_kind(*bj, join(path, "beta")) == "truth") {
    init.beta = truth.beta;
  } else {
    init.beta = build_beta(*bj, join(path, "beta"));
  }
  return init;
}

PolarState build_polar_init(const json* ij, const std::string& path,
                            const PolarState& truth, int pin_index,
                            bool mirror_sun) {
  const json empty = json::object();
  const json& i = ij ? *ij : empty;
  expect_object(i, path);
  check_keys(i, path, {"shape", "alpha", "beta"});

  const std::vector<double>& tr = truth.cloud.radii();
  const int n = truth.cloud.vertex_count();
  std::vector<double> r;
  const json* sj = find(i, "shape");
  const std::string spath = join(path, "shape");
  std::string skind = sj ? get_kind(*sj, spath) : "circle";
  if (skind == "truth") {
    check_keys(*sj, spath, {"kind"});
    r = tr;
  } else if (skind == "circle" && (!sj || !find(*sj, "radius"))) {
    if (sj) check_keys(*sj, spath, {"kind", "radius"});
    const double mean = std::accumulate(tr.begin(), tr.end(), 0.0) / n;
    r.assign(n, mean);
  } else {
    r = polar_radii(*sj, spath, n, truth.cloud.theta0());
    if (static_cast<int>(r.size()) != n)
      fail(join(spath, "radii"), "expected " + std::to_string(n) +
                                     " entries matching the truth grid");
  }
  // One radius is held fixed by the solver; generated guesses carry the true
  // value there so the constraint is consistent with the truth.
  if (skind != "truth" && skind != "explicit") {
    if (pin_index < 0 || pin_index >= n)
      fail("solver.pin_index", "outside the radius grid");
    r[pin_index] = tr[pin_index];
  }

  PolarState init{truth.cloud, truth.alpha, truth.beta};
  try {
    init.cloud = PolarCloud(truth.cloud.theta0(), r);
  } catch (const std::invalid_argument& e) {
    fail(spath, e.what());
  }

  const json* aj = find(i, "alpha");
  if (!aj) {
    init.alpha = constant_alpha(n, 1.0);
  } else if (get_kind(*aj, join(path, "alpha")) == "truth") {
    init.alpha = truth.alpha;
  } else {
    init.alpha =
        build_polar_alpha(*aj, join(path, "alpha"), init.cloud, mirror_sun);
  }

  const json* bj = find(i, "beta");
  if (!bj) {
    init.beta = BetaProfile::constant(truth.beta.P());
  } else if (get_kind(*bj, join(path, "beta")) == "truth") {
    init.beta = truth.beta;
  } else {
    init.beta = build_beta(*bj, join(path, "beta"));
  }
  return init;
}

SolverConfig build_solver(const json* sj, const std::string& path) {
  SolverConfig cfg;
  if (!sj) return cfg;
  expect_object(*sj, path);
  check_keys(*sj, path,
             {"reg_weight", "max_iter", "tol_step", "tol_resid",
              "max_halvings", "pin_index"});
  if (find(*sj, "reg_weight")) cfg.reg_weight = get_num(*sj, path, "reg_weight");
  cfg.max_iter = opt_int(*sj, path, "max_iter", cfg.max_iter);
  cfg.tol_step = opt_num(*sj, path, "tol_step", cfg.tol_step);
  cfg.tol_resid = opt_num(*sj, path, "tol_resid", cfg.tol_resid);
  cfg.max_halvings = opt_int(*sj, path, "max_halvings", cfg.max_halvings);
  cfg.pin_index = opt_int(*sj, path, "pin_index", cfg.pin_index);
  try {
    cfg.validate();
  } catch (const std::invalid_argument& e) {
    fail(path, e.what());
  }
  return cfg;
}

}  // namespace

std::vector<double> misr_angles() {
  std::vector<double> a;
  a.reserve(9);
  for (double deg : {-70.5, -60.0, -45.6, -26.1, 0.0, 26.1, 45.6, 60.0, 70.5})
    a.push_back(M_PI / 2 + deg * M_PI / 180.0);
  return a;
}

std::vector<double> paper_polar_angles() {
  return {0.0,
          M_PI / 4,
          M_PI / 3,
          M_PI / 2.3,
          M_PI / 2.1,
          M_PI / 2,
          M_PI - M_PI / 2.1,
          M_PI - M_PI / 2.3,
          2 * M_PI / 3,
          3 * M_PI / 4,
          M_PI};
}

Scenario parse_scenario(const nlohmann::json& doc,
                        const ScenarioOptions& options) {
  expect_object(doc, "scenario");
  check_keys(doc, "",
             {"cloud", "alpha", "beta", "detector", "solver", "noise", "speed",
              "init", "output"});
  const Preset preset = lookup_preset(options.preset);

  Scenario s;
  s.solver = build_solver(find(doc, "solver"), "solver");

  if (const json* nj = find(doc, "noise")) {
    expect_object(*nj, "noise");
    check_keys(*nj, "noise", {"sigma", "seed"});
    s.noise_sigma = opt_num(*nj, "noise", "sigma", 0.0);
    if (!(s.noise_sigma >= 0.0)) fail("noise.sigma", "must be nonnegative");
    const int seed = opt_int(*nj, "noise", "seed", 1);
    if (seed < 0) fail("noise.seed", "must be nonnegative");
    s.noise_seed = static_cast<std::uint32_t>(seed);
  }
  if (options.seed) s.noise_seed = *options.seed;

  double lambda = 1.0;
  if (const json* vj = find(doc, "speed")) {
    expect_object(*vj, "speed");
    check_keys(*vj, "speed", {"lambda", "estimate", "sweep"});
    lambda = opt_num(*vj, "speed", "lambda", 1.0);
    if (!(lambda > 0.0) || !(lambda <= 2.0))
      fail("speed.lambda", "must lie in (0, 2]");
    s.estimate_speed = opt_bool(*vj, "speed", "estimate", false);
    if (find(*vj, "sweep")) {
      s.speed_sweep = get_vec(*vj, "speed", "sweep");
      for (double l : s.speed_sweep)
        if (!(l > 0.0) || !(l <= 2.0))
          fail("speed.sweep", "entries must lie in (0, 2]");
    }
  }

  const json& cj = get_obj(doc, "", "cloud");
  const std::string ckind = get_kind(cj, "cloud");
  if (ckind == "graph") {
    GraphCloud cloud = build_graph_cloud(cj, "cloud");
    AlphaField alpha =
        find(doc, "alpha")
            ? build_graph_alpha(*find(doc, "alpha"), "alpha", cloud,
                                options.mirror_sun)
            : constant_alpha(cloud.segment_count(), 1.0);
    BetaProfile beta = find(doc, "beta")
                           ? build_beta(*find(doc, "beta"), "beta")
                           : BetaProfile::sine(8);
    GraphState truth{std::move(cloud), std::move(alpha), std::move(beta),
                     lambda};
    DetectorLine det = build_line_detector(find(doc, "detector"), "detector",
                                           truth.cloud, preset);
    GraphState init = build_graph_init(find(doc, "init"), "init", truth,
                                       s.estimate_speed, options.mirror_sun);
    s.graph = GraphScenario{std::move(truth), std::move(init), std::move(det)};
  } else if (ckind == "polar") {
    if (s.estimate_speed)
      fail("speed.estimate", "polar scenarios have no speed parameter");
    if (lambda != 1.0)
      fail("speed.lambda", "polar scenarios have no speed parameter");
    PolarCloud cloud = build_polar_cloud(cj, "cloud");
    AlphaField alpha =
        find(doc, "alpha")
            ? build_polar_alpha(*find(doc, "alpha"), "alpha", cloud,
                                options.mirror_sun)
            : constant_alpha(cloud.vertex_count(), 1.0);
    BetaProfile beta = find(doc, "beta")
                           ? build_beta(*find(doc, "beta"), "beta")
                           : BetaProfile::sine(8);
    PolarState truth{std::move(cloud), std::move(alpha), std::move(beta)};
    DetectorCircle det =
        build_circle_detector(find(doc, "detector"), "detector", truth.cloud);
    PolarState init = build_polar_init(find(doc, "init"), "init", truth,
                                       s.solver.pin_index, options.mirror_sun);
    s.polar = PolarScenario{std::move(truth), std::move(init), std::move(det)};
  } else {
    fail("cloud.kind", "unknown kind '" + ckind + "'");
  }

  s.outdir = opt_str(doc, "", "output", "out");
  if (options.out) s.outdir = *options.out;
  return s;
}

Scenario load_scenario(const std::string& path, const ScenarioOptions& options) {
  std::ifstream in(path);
  if (!in) throw ScenarioError("scenario file not readable: " + path);
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ScenarioError("scenario file is not valid JSON: " +
                        std::string(e.what()));
  }
  return parse_scenario(doc, options);
}

}  // namespace cloudrecon
