#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "sqzcam/camera_sim.hpp"
#include "sqzcam/gaussian_state.hpp"

namespace sqzcam::app {

/// Invalid or inconsistent configuration; maps to the validation exit code.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Everything a command needs. Serialises to a key = value text block that
/// is archived beside every output.
struct RunConfig {
  double n_alpha = 1e6;
  double n_s = 1.0;
  /// Phases to run; defaults to the squeezed and anti-squeezed branches.
  std::vector<double> phases = {kSqueezedPhase, kAntiSqueezedPhase};
  std::uint32_t rows = 32;
  std::uint32_t cols = 32;
  /// "uniform" or a path to a whitespace-separated list of rows*cols weights.
  std::string weights = "uniform";
  std::size_t frames = 10000;
  std::uint64_t seed = 1;
  unsigned threads = 1;
  std::filesystem::path out_dir = ".";

  // sweep
  std::size_t sweep_points = 181;
  double sweep_max = 3.141592653589793;

  // precision study
  std::vector<std::size_t> run_counts = {4, 8, 16, 32, 64};
  std::size_t frames_per_run = 1000;
  std::size_t groups = 32;

  // oracle check
  double tolerance = 1e-9;

  // estimate
  std::size_t jackknife_blocks = 20;
  std::vector<std::filesystem::path> inputs;

  /// Also export frame batches as CSV.
  bool export_csv = false;

  StateParams state(double phi) const { return {n_alpha, n_s, phi}; }
  SensorGeometry geometry() const;

  /// Throws ConfigError with an actionable message.
  void validate() const;

  std::string to_text() const;
};

/// Applies `key = value` lines (blank lines and `#` comments ignored) on
/// top of `base`. Unknown keys are errors.
RunConfig parse_config_text(const std::string& text, RunConfig base = {});
RunConfig load_config_file(const std::filesystem::path& path, RunConfig base = {});

/// Sets one key from its textual value; keys match the long flag names
/// without the leading dashes (n-alpha, frames, run-counts, ...).
void set_config_value(RunConfig& cfg, const std::string& key, const std::string& value);

}  // namespace sqzcam::app
