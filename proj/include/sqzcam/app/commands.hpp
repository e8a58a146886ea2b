#pragma once

// Subcommands of the sqzcam tool. Each takes a resolved RunConfig, writes its
// artifacts into cfg.out_dir (creating it) and returns the computed result so
// it can be checked programmatically.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "sqzcam/app/config.hpp"
#include "sqzcam/estimator.hpp"

namespace sqzcam::app {

enum ExitCode : int {
  kExitOk = 0,
  kExitFailure = 1,
  kExitValidation = 2,
  kExitIo = 3,
  kExitCheckFailed = 4,
};

// analytic ------------------------------------------------------------------

struct BranchAnalytics {
  double phi1 = 0.0;
  double variance = 0.0;
  double q = 0.0;
  std::optional<SensitivityReport> sensitivity;  // absent when n_s = 0
};

struct AnalyticReport {
  double mean = 0.0;
  double shot_noise = 0.0;
  double homodyne_var_ns = 0.0;
  BranchAnalytics squeezed;
  BranchAnalytics anti_squeezed;
};

AnalyticReport cmd_analytic(const RunConfig& cfg, std::ostream& log);

// simulate ------------------------------------------------------------------

struct SimulatedFile {
  std::filesystem::path path;
  double phi1 = 0.0;
  std::uint64_t checksum = 0;
};

/// Stream id for the i-th phase branch.
std::uint32_t branch_stream(std::size_t branch_index);

/// File name used for a phase branch, e.g. frames_phi_0.sqzf.
std::string branch_file_name(double phi1);

std::vector<SimulatedFile> cmd_simulate(const RunConfig& cfg, std::ostream& log);

// estimate ------------------------------------------------------------------

struct BranchEstimate {
  std::filesystem::path source;
  StateParams params;
  BatchAnalysis analysis;
};

struct EstimateReport {
  std::optional<BranchEstimate> squeezed;
  std::optional<BranchEstimate> anti_squeezed;
  std::vector<BranchEstimate> other;  // phases other than 0 and pi/2
  std::optional<SqueezingEstimate> estimate;
  double n_total = 0.0;
};

/// Reads cfg.inputs (one batch per phase branch). Mismatched state or
/// geometry between files is a ConfigError.
EstimateReport cmd_estimate(const RunConfig& cfg, std::ostream& log);

// sweep ---------------------------------------------------------------------

struct SweepRow {
  double phi1;
  double variance;
  double shot_noise;
  bool below_shot_noise;
};

struct SweepReport {
  std::vector<SweepRow> rows;
  /// Analytic phase in [0, pi/2] where the variance meets the shot noise.
  std::optional<double> crossing_phase;
  /// Same crossing located by bisection on the sampled variance curve.
  std::optional<double> crossing_phase_bisection;
};

SweepReport cmd_sweep(const RunConfig& cfg, std::ostream& log);

// precision -----------------------------------------------------------------

struct PrecisionReport {
  PrecisionStudy squeezed;
  PrecisionStudy anti_squeezed;
  double sd_ratio = 0.0;         // sd_q(anti) / sd_q(squeezed)
  double photon_sd_ratio = 0.0;  // SD of frame totals, anti / squeezed
};

PrecisionReport cmd_precision(const RunConfig& cfg, std::ostream& log);

// oracle-check --------------------------------------------------------------

struct OracleCheck {
  std::string name;
  double worst = 0.0;  // largest deviation observed
  double tolerance = 0.0;
  bool passed = false;
};

struct OracleReport {
  std::vector<OracleCheck> checks;
  std::vector<double> theta_gap_ratios;
  bool passed() const;
};

OracleReport cmd_oracle_check(const RunConfig& cfg, std::ostream& log);

// ---------------------------------------------------------------------------

nlohmann::json to_json(const AnalyticReport& r);
nlohmann::json to_json(const EstimateReport& r);
nlohmann::json to_json(const PrecisionReport& r);
nlohmann::json to_json(const OracleReport& r);

/// Theta-convergence study of the beam-splitter approximation: absolute
/// moment gaps between the exact traced signal mode and the displaced
/// squeezed vacuum with displacement alpha*sin(theta) and unchanged r.
struct MixGap {
  double theta;
  double mean_gap;
  double variance_gap;
};
std::vector<MixGap> beam_splitter_gaps(double pump_photons, double r, const std::vector<double>& thetas);

/// Entry point shared by the executable: parses argv, dispatches, maps
/// exceptions to exit codes.
int run_cli(int argc, char** argv);

}  // namespace sqzcam::app
