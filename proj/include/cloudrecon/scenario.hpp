// Scenario documents. One JSON file describes a synthetic experiment end to
// end: the true cloud and emission model, the detector, solver settings,
// noise, and the initial guess handed to the solver. The command-line tools
// and the tests share this as their single source of configuration.
//
// Parsing is strict: unknown keys, missing entries, and out-of-range values
// raise ScenarioError with the JSON path of the offending entry, so a typo in
// a scenario file fails loudly instead of silently falling back to a default.
#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "cloudrecon/forward.hpp"
#include "cloudrecon/jacobian.hpp"
#include "cloudrecon/solver.hpp"
#include "json.hpp"

namespace cloudrecon {

class ScenarioError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct GraphScenario {
  GraphState truth;
  GraphState init;
  DetectorLine det;
};

struct PolarScenario {
  PolarState truth;
  PolarState init;
  DetectorCircle det;
};

// Exactly one of graph/polar is populated.
struct Scenario {
  std::optional<GraphScenario> graph;
  std::optional<PolarScenario> polar;
  SolverConfig solver;
  double noise_sigma = 0.0;
  std::uint32_t noise_seed = 1;
  bool estimate_speed = false;
  std::vector<double> speed_sweep;
  std::string outdir = "out";
};

// Command-line overrides applied on top of the document. The preset supplies
// detector height and pixel size when the file leaves them out: "desk" is the
// dimensionless bench scale (Z = 10, pixels 0.1), "misr" the satellite scale
// (Z = 705 km, pixels 0.275 km).
struct ScenarioOptions {
  std::optional<std::string> out;
  std::optional<std::uint32_t> seed;
  std::string preset = "desk";
  bool mirror_sun = false;
};

Scenario parse_scenario(const nlohmann::json& doc,
                        const ScenarioOptions& options = {});
Scenario load_scenario(const std::string& path,
                       const ScenarioOptions& options = {});

// The nine-angle fan of the MISR cameras, expressed as ray directions phi in
// (0, pi): pi/2 plus the view zenith angles -70.5 .. 70.5 degrees.
std::vector<double> misr_angles();

// The eleven-angle polar set {0, pi/4, pi/3, pi/2.3, pi/2.1, pi/2, ...} and
// its mirror images, spanning the full local half-circle including the
// tangential directions 0 and pi.
std::vector<double> paper_polar_angles();

}  // namespace cloudrecon
