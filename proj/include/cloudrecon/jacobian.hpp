#pragma once

// Linearization of the measurement operator around a working state. Each
// active pixel row carries the derivative of the pixel value with respect to
// the emission strengths, the angular-profile knots, the boundary shape
// nodes, and optionally the drift speed. A finite-difference oracle with the
// same column layout backs the analytic assembly, and the curvature penalty
// operator used by the regularized solver lives here too.

#include <Eigen/Dense>

#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "cloudrecon/forward.hpp"

namespace cloudrecon {

// Rows whose ray runs nearly parallel to the hit segment are dropped: the
// shape sensitivity carries a 1/(tan(phi) - h') factor that blows up there.
inline constexpr double kTangencyTol = 1e-3;

struct GraphState {
  GraphCloud cloud;
  AlphaField alpha;
  BetaProfile beta;
  double lambda = 1.0;
};

struct PolarState {
  PolarCloud cloud;
  AlphaField alpha;
  BetaProfile beta;
};

enum class UnknownBlock : std::uint8_t {
  AlphaSegment,  // per-segment emission strengths
  AlphaSide,     // graph side walls: index 0 = left, 1 = right
  Beta,          // angular-profile knot values
  Shape,         // heights (graph) or radii (polar)
  Speed,         // single drift-speed column
};

const char* block_name(UnknownBlock b);

// Raised when every active measurement row runs nearly parallel to its hit
// segment, leaving nothing to linearize.
struct DegenerateGeometryError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ColumnRef {
  UnknownBlock block;
  int index;
};

struct RowRef {
  int pixel;
  int angle;
};

struct LinearizedSystem {
  Eigen::MatrixXd A;
  // Forward value per row at the linearization state; subtract from measured
  // values to form the update residual.
  Eigen::VectorXd predicted;
  std::vector<ColumnRef> col_map;
  // Second-difference curvature penalty acting on the shape columns only
  // (its column count equals the shape block size).
  Eigen::MatrixXd B;
  std::vector<RowRef> rows;
  std::vector<double> angles;  // detector angle set (local angles for polar)
  bool polar = false;
  bool with_speed = false;
  int dropped_near_tangent = 0;

  // Assembly-time metadata consumed by diagnose(): the sampled functions
  // (1, cot(phi_j), (ln beta)'(phi_j)) row by row, and per-node magnitudes of
  // the emission gradient and the boundary curvature.
  Eigen::MatrixXd gram_samples;
  std::vector<double> node_alpha_slope;
  std::vector<double> node_curvature;

  int row_count() const { return static_cast<int>(A.rows()); }
  int col_count() const { return static_cast<int>(A.cols()); }
  int block_offset(UnknownBlock b) const;
  int block_size(UnknownBlock b) const;
};

LinearizedSystem assemble_graph(const GraphState& state,
                                const DetectorLine& det, bool with_speed);

// Polar systems have no side walls and no speed column. The emission blocks
// are analytic; the radius block is assembled by central differences
// restricted to the rays whose hit edge touches the perturbed vertex.
LinearizedSystem assemble_polar(const PolarState& state,
                                const DetectorCircle& det);

// (node_count - 2) x node_count interior second-difference stencil
// (1, -2, 1)/spacing^2, or the cyclic node_count x node_count version.
Eigen::MatrixXd curvature_penalty(int node_count, double spacing, bool cyclic);

// State packing in the column order of the assembled systems. unpack rebuilds
// a state reusing the reference's fixed data (support, base, theta0, gauge
// convention).
Eigen::VectorXd pack_state(const GraphState& state, bool with_speed);
GraphState unpack_state(const GraphState& reference, const Eigen::VectorXd& v,
                        bool with_speed);
Eigen::VectorXd pack_state(const PolarState& state);
PolarState unpack_state(const PolarState& reference, const Eigen::VectorXd& v);

// Forward values for the given rows (zero where the ray misses).
Eigen::VectorXd forward_rows(const GraphState& state, const DetectorLine& det,
                             const std::vector<RowRef>& rows);
Eigen::VectorXd forward_rows(const PolarState& state, const DetectorCircle& det,
                             const std::vector<RowRef>& rows);

// Central differences of an arbitrary packed-state forward map; coordinate i
// is stepped by eps_rel * max(1, |v0[i]|). Requires eps_rel in [1e-8, 1e-3].
Eigen::MatrixXd finite_difference_jacobian(
    const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& forward_map,
    const Eigen::VectorXd& v0, double eps_rel);

struct IdentifiabilityReport {
  // Eigenvalues of A^T A in descending order.
  Eigen::VectorXd spectrum;
  double rank_threshold = 0.0;  // 1e-10 * largest eigenvalue
  int rank = 0;

  struct NullMode {
    double eigenvalue;
    UnknownBlock dominant;
    double mass_fraction;  // squared mass of the dominant block in the mode
  };
  std::vector<NullMode> near_null;

  // Gram matrix condition of the sampled functions (1, cot, (ln beta)');
  // for a sine-like profile the last two coincide and the condition blows up.
  double gram_condition = 0.0;
  bool angular_slope_matches_cot = false;

  double speed_column_norm = -1.0;  // -1 when the system has no speed column
  bool speed_degenerate = false;

  // Nodes where both the emission gradient and the boundary curvature are
  // small: shape updates there barely change the data.
  std::vector<int> insensitive_nodes;

  std::string summary() const;
};

IdentifiabilityReport diagnose(const LinearizedSystem& system);

}  // namespace cloudrecon
