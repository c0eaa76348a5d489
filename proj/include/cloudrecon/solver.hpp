#pragma once

// Damped Gauss-Newton driver for the boundary reconstruction. Each iteration
// linearizes the measurement operator at the working state, solves the
// curvature-regularized normal equations with the gauge and Dirichlet pins in
// place, and halves the step until the forward misfit actually drops.

#include <Eigen/Dense>

#include <optional>
#include <stdexcept>
#include <vector>

#include "cloudrecon/forward.hpp"
#include "cloudrecon/jacobian.hpp"

namespace cloudrecon {

struct SolverConfig {
  // Weight on the curvature penalty. Leave unset to pick a value that is
  // small against the data term at the initial state, so the penalty only
  // steers directions the measurements barely see.
  std::optional<double> reg_weight;
  int max_iter = 30;
  double tol_step = 1e-10;   // relative accepted-step norm counted as converged
  double tol_resid = 1e-12;  // relative forward misfit counted as converged
  int max_halvings = 12;     // step-halving budget before declaring stagnation
  int pin_index = 0;         // polar: index of the radius node held fixed

  void validate() const;
};

struct IterationRecord {
  double residual = 0.0;   // relative forward misfit entering the iteration
  double step = 0.0;       // relative norm of the accepted update, 0 if none
  double condition = 0.0;  // condition estimate of the reduced normal matrix
};

struct GnStep {
  // Update over the full unknown vector; pinned entries are zero.
  Eigen::VectorXd delta;
  double condition = 0.0;
};

// The normal matrix could not be factored to a usable step: without a penalty
// weight the operator is rank-deficient. Carries the identifiability report
// taken at the failing state so callers can show which directions are lost.
struct SingularSystemError : std::runtime_error {
  IdentifiabilityReport diagnostics;
  explicit SingularSystemError(IdentifiabilityReport rep);
};

struct GaugeError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

template <class State>
struct ReconstructionResult {
  State state;
  std::vector<IterationRecord> history;
  IdentifiabilityReport diagnostics;  // taken at the final state
  bool converged = false;
  double final_residual = 0.0;
  // Rays hit in the data but not at the final state; such rows are excluded
  // from every solve because the linearization does not cover them.
  int dropped_rows = 0;
};

// Forward misfit of a candidate state against the data over the whole pixel
// grid, relative to the data norm. Rays hit on one side only count the other
// side's value against zero, so a candidate cannot look better by shrinking
// its own footprint and shedding the rays it fails to explain. Useful for
// ranking states whose footprints differ.
double relative_misfit(const MeasurementSet& data,
                       const MeasurementSet& current);

// Columns held fixed during a solve: the profile knot at pi/2 (gauge) and
// the Dirichlet shape nodes. The drift speed, when present, stays free.
std::vector<int> pinned_columns(const LinearizedSystem& system,
                                const SolverConfig& cfg);

// The penalty weight gn_step uses: cfg.reg_weight when set, otherwise
// 1e-4 times the top eigenvalue of the data term scaled down by the top
// eigenvalue of the penalty term.
double resolve_reg_weight(const LinearizedSystem& system,
                          const SolverConfig& cfg);

// One regularized step. residual holds measured minus predicted per retained
// row. Pins the profile knot at pi/2 (gauge) and the Dirichlet shape nodes:
// both endpoints for a graph system, cfg.pin_index for a polar one. The knot
// count must place a knot at pi/2, so the interval count has to be even.
GnStep gn_step(const LinearizedSystem& system, const Eigen::VectorXd& residual,
               const SolverConfig& cfg);

// Full iteration from an initial guess. data must come from the same detector
// geometry; each solve is restricted to rays hit both in the data and at the
// current state. The shape values of init at the pinned nodes serve as the
// boundary conditions and never move.
ReconstructionResult<GraphState> reconstruct(const MeasurementSet& data,
                                             const DetectorLine& det,
                                             const GraphState& init,
                                             const SolverConfig& cfg,
                                             bool with_speed = false);

ReconstructionResult<PolarState> reconstruct(const MeasurementSet& data,
                                             const DetectorCircle& det,
                                             const PolarState& init,
                                             const SolverConfig& cfg);

// Rescales (alpha * c, beta / c) with c the profile value at pi/2, so the
// returned profile is 1 at nadir. Forward measurements are unchanged.
GraphState fix_gauge(const GraphState& state);
PolarState fix_gauge(const PolarState& state);

}  // namespace cloudrecon
