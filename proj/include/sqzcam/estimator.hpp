#pragma once

// Frame batches -> noise-law analysis: per-pixel moments, pixel-integration
// curves, the fit of V = <n> + q<n>^2, recovery of (n_s, n_alpha) and the
// scaling of the q precision with the amount of data.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "sqzcam/camera_sim.hpp"
#include "sqzcam/gaussian_state.hpp"

namespace sqzcam {

struct PixelStats {
  std::vector<double> per_pixel_mean;
  std::vector<double> per_pixel_var;  // unbiased, N - 1 denominator
  std::size_t n_frames = 0;
};

/// Throws DomainError for batches with fewer than two frames.
PixelStats accumulate_stats(const FrameBatch& b, unsigned threads = 1);

struct CurvePoint {
  std::size_t k;    // number of integrated pixels
  double eta;       // summed weight of those pixels
  double mean;
  double variance;  // unbiased variance over frames of the partial sums
};

struct IntegrationCurve {
  std::vector<CurvePoint> points;
  std::size_t n_frames = 0;
};

/// Point k holds the frame statistics of the partial sum over the first k
/// pixels in `order` (row-major when empty). Throws DomainError for fewer
/// than two frames or an order that is not a permutation of the pixels.
IntegrationCurve integrate_pixels(const FrameBatch& b, std::span<const std::size_t> order = {},
                                  unsigned threads = 1);

/// Same, restricted to frames [first, last).
IntegrationCurve integrate_frame_range(const FrameBatch& b, std::size_t first, std::size_t last,
                                       std::span<const std::size_t> order = {}, unsigned threads = 1);

/// Pools curves built from disjoint frame sets over the same pixel order
/// into the curve of the concatenated frames.
IntegrationCurve merge_curves(std::span<const IntegrationCurve> curves);

enum class FitMode { kConstrained, kFreeQuadratic };

struct QFit {
  double q = 0.0;
  double q_se = 0.0;
  FitMode mode = FitMode::kConstrained;
  double residual_norm = 0.0;
  /// Constant and linear coefficients (0 and 1 for the constrained fit).
  double intercept = 0.0;
  double linear = 1.0;
};

struct NoiseLawFit {
  QFit constrained;
  /// a + b x + q x^2; present when the curve has at least three points.
  std::optional<QFit> free_quadratic;

  double q() const { return constrained.q; }
  double q_se() const { return constrained.q_se; }
};

/// Least squares of var_k = mean_k + q mean_k^2 with the unit linear term
/// fixed, plus the unconstrained quadratic as a diagnostic. Throws
/// DomainError for fewer than two points, non-positive means, or a design
/// whose means are all equal.
NoiseLawFit fit_q(const IntegrationCurve& c);

struct SqueezingEstimate {
  double n_s_hat = 0.0;
  double n_alpha_hat = 0.0;
  double n_s_se = 0.0;
  double n_alpha_se = 0.0;
  double consistency_residual = 0.0;
  bool physical = true;
};

/// First-order error propagation of the fit uncertainties (and optionally
/// of the measured total) through invert_q. Non-physical recoveries are
/// flagged, never clipped.
SqueezingEstimate estimate_squeezing(const QFit& q_s, const QFit& q_as, double n_total,
                                     double n_total_se = 0.0);

/// Mean frame total of a batch.
double mean_frame_total(const FrameBatch& b);

/// Full single-batch analysis. The residual-based q_se of the fit ignores
/// that the nested partial sums are correlated; q_se_jackknife is the
/// delete-one-block jackknife over contiguous frame blocks and is the
/// uncertainty to quote.
struct BatchAnalysis {
  IntegrationCurve curve;
  NoiseLawFit fit;
  double q_se_jackknife = 0.0;
  std::size_t jackknife_blocks = 0;  // 0 when the batch is too short
  double mean_total = 0.0;
  double mean_total_se = 0.0;

  /// Constrained fit with the jackknife uncertainty substituted.
  QFit reported_fit() const;
};

BatchAnalysis analyse_batch(const FrameBatch& b, std::span<const std::size_t> order = {},
                            std::size_t jackknife_blocks = 20, unsigned threads = 1);

struct PrecisionRow {
  std::size_t runs = 0;
  std::size_t groups = 0;  // independent replicates behind sd_q
  double sd_q = 0.0;
  double mean_q = 0.0;
};

struct PrecisionStudy {
  std::vector<PrecisionRow> rows;
  std::optional<double> slope;  // d log(sd_q) / d log(runs)
  std::size_t frames_per_run = 0;
  std::size_t pool_runs = 0;
  /// Sample SD of the per-frame total photon number, pooled over all runs.
  double photon_sd = 0.0;
};

struct PrecisionOptions {
  /// Independent replicates available at the largest run count; the pool
  /// holds groups * max(run_counts) simulated runs.
  std::size_t groups = 32;
  std::uint32_t stream_base = 1u << 16;
  unsigned threads = 1;
};

/// For each run count R, the precision of q obtained from R runs of
/// `frames_per_run` frames: the pool of runs is cut into consecutive groups
/// of R, each group's frames are analysed as one data set, and sd_q is the
/// spread of the resulting q over groups. The slope is the least-squares
/// slope of log(sd_q) against log(R), each row weighted by its degrees of
/// freedom (groups - 1); undefined for a single run count.
PrecisionStudy precision_study(const StateParams& p, const SensorGeometry& g, std::size_t frames_per_run,
                               std::span<const std::size_t> run_counts, std::uint64_t seed,
                               const PrecisionOptions& opts = {});

/// Geometric mean over common run counts of sd_q(anti) / sd_q(squeezed).
double precision_sd_ratio(const PrecisionStudy& anti_squeezed, const PrecisionStudy& squeezed);

}  // namespace sqzcam
