#pragma once

// Monte Carlo camera frames: each frame draws a total photon number from the
// state's statistics and spreads it over the pixel grid with a multinomial
// split whose cell probabilities are the pixel weights.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "sqzcam/fock_oracle.hpp"
#include "sqzcam/gaussian_state.hpp"
#include "sqzcam/philox.hpp"

namespace sqzcam {

/// Mean photon number at and above which totals are drawn from a normal law
/// with the exact first two moments.
inline constexpr double kGaussianSamplingThreshold = 1e4;

class SensorGeometry {
 public:
  /// Throws DomainError unless rows, cols >= 1, weights has rows*cols
  /// non-negative entries and they sum to one within 1e-12.
  SensorGeometry(std::uint32_t rows, std::uint32_t cols, std::vector<double> weights);

  static SensorGeometry uniform(std::uint32_t rows, std::uint32_t cols);

  std::uint32_t rows() const { return rows_; }
  std::uint32_t cols() const { return cols_; }
  std::size_t pixel_count() const { return weights_.size(); }
  std::span<const double> weights() const { return weights_; }
  double weight(std::size_t i) const { return weights_[i]; }

  /// Conditional probability that a photon not placed in pixels 0..i-1
  /// lands in pixel i.
  double split_probability(std::size_t i) const { return split_[i]; }

  friend bool operator==(const SensorGeometry& a, const SensorGeometry& b) {
    return a.rows_ == b.rows_ && a.cols_ == b.cols_ && a.weights_ == b.weights_;
  }

 private:
  std::uint32_t rows_;
  std::uint32_t cols_;
  std::vector<double> weights_;
  std::vector<double> split_;
};

struct SeedRecord {
  std::uint64_t seed = 0;
  std::uint32_t stream = 0;

  friend bool operator==(const SeedRecord&, const SeedRecord&) = default;
};

class FrameBatch {
 public:
  FrameBatch(StateParams params, SensorGeometry geometry, SeedRecord seed, std::size_t n_frames,
             std::vector<std::uint32_t> counts);

  const StateParams& params() const { return params_; }
  const SensorGeometry& geometry() const { return geometry_; }
  const SeedRecord& seed() const { return seed_; }
  std::size_t n_frames() const { return n_frames_; }
  std::size_t pixel_count() const { return geometry_.pixel_count(); }

  std::span<const std::uint32_t> counts() const { return counts_; }
  std::span<const std::uint32_t> frame(std::size_t f) const {
    return std::span<const std::uint32_t>(counts_).subspan(f * pixel_count(), pixel_count());
  }
  std::uint64_t frame_total(std::size_t f) const;

  friend bool operator==(const FrameBatch&, const FrameBatch&) = default;

 private:
  StateParams params_;
  SensorGeometry geometry_;
  SeedRecord seed_;
  std::size_t n_frames_;
  std::vector<std::uint32_t> counts_;
};

/// Draws frame totals for one state. Below kGaussianSamplingThreshold the
/// exact Fock distribution is built once and sampled by inverse CDF.
class TotalPhotonSampler {
 public:
  explicit TotalPhotonSampler(const StateParams& p,
                              double gaussian_threshold = kGaussianSamplingThreshold);

  bool exact() const { return exact_.has_value(); }
  std::uint64_t operator()(Philox4x32& eng) const;

 private:
  double mean_ = 0.0;
  double sd_ = 0.0;
  std::optional<FockDistribution> exact_;
};

std::uint64_t sample_total_photons(const StateParams& p, Philox4x32& eng);

/// Multinomial split of n photons over the pixels by sequential conditional
/// binomials. `out` must have geometry.pixel_count() entries.
void distribute_to_pixels(std::uint64_t n, const SensorGeometry& g, Philox4x32& eng,
                          std::span<std::uint32_t> out);

struct SimulationOptions {
  unsigned threads = 1;
  double gaussian_threshold = kGaussianSamplingThreshold;
};

/// Frame f is generated from Philox4x32(seed, stream, f) alone, so the
/// batch is identical for every thread count.
FrameBatch simulate_batch(const StateParams& p, const SensorGeometry& g, std::size_t n_frames,
                          std::uint64_t seed, std::uint32_t stream = 0,
                          const SimulationOptions& opts = {});

}  // namespace sqzcam
