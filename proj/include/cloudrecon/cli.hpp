// Command layer shared by the cloudrecon executable and the tests. Each
// command takes a parsed scenario, runs the corresponding pipeline, writes
// its artifacts under the scenario's output directory, and returns a small
// summary alongside the list of files written.
//
// CSV files are the normative output; the SVG charts next to them are
// conveniences for a quick look in a browser.
#pragma once

#include <string>
#include <vector>

#include "cloudrecon/scenario.hpp"

namespace cloudrecon {

struct ForwardArtifacts {
  MeasurementSet data;  // noisy when the scenario requests noise
  std::vector<std::string> files;
};

struct InvertArtifacts {
  std::vector<std::string> files;
  bool converged = false;
  int iterations = 0;
  double final_residual = 0.0;
  int dropped_rows = 0;
  double lambda = 1.0;  // recovered speed factor (graph scenarios)
};

struct SpeedSweepRow {
  double lambda_true = 1.0;
  double lambda_rec = 1.0;  // NaN when the solve aborted as singular
  double sigma_min = 0.0;
  double sigma_max = 0.0;
  bool speed_degenerate = false;
};

struct SpeedSweepArtifacts {
  std::vector<std::string> files;
  std::vector<SpeedSweepRow> rows;
};

struct DiagnoseArtifacts {
  std::vector<std::string> files;
  IdentifiabilityReport report;
  int degeneracy_count = 0;
};

// Number of distinct degeneracy findings a report raises: one per near-null
// mode, one if the speed column is degenerate, one if the angular profile's
// slope is indistinguishable from cot at the sampled angles, and one if any
// boundary nodes are insensitive.
int degeneracy_count(const IdentifiabilityReport& report);

// Simulate measurements for the true state; writes measurements.csv and one
// profile chart per viewing angle.
ForwardArtifacts cmd_forward(const Scenario& s);

// Simulate, then reconstruct from the scenario's initial guess; writes the
// data, reconstruction.csv, history.csv, diagnostics.txt, final_state.json,
// and comparison charts. A singular system still writes diagnostics.txt
// before the error propagates.
InvertArtifacts cmd_invert(const Scenario& s);

// For each true speed factor in the sweep: simulate with that speed, then
// reconstruct with the speed treated as unknown; writes speed_sweep.csv and a
// diagnostics file per sweep entry. Graph scenarios only.
SpeedSweepArtifacts cmd_speed_demo(const Scenario& s);

// Identifiability report for the scenario's initial state, without iterating.
DiagnoseArtifacts cmd_diagnose(const Scenario& s);

}  // namespace cloudrecon
