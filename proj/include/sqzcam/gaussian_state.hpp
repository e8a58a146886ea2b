#pragma once

// Closed-form photon statistics of a displaced squeezed vacuum and of its
// attenuated (single-pixel) version, plus the homodyne / camera sensitivity
// calculus for the squeezed-photon number.
//
// Conventions: n_alpha = |beta|^2 is the displacement photon number,
// n_s = sinh^2 r the squeezed-vacuum photon number, phi1 the relative phase
// between displacement and squeezing. phi1 = 0 is the amplitude-squeezed
// (sub-Poissonian) branch, phi1 = pi/2 the anti-squeezed branch.

#include <numbers>
#include <span>
#include <vector>

namespace sqzcam {

inline constexpr double kSqueezedPhase = 0.0;
inline constexpr double kAntiSqueezedPhase = std::numbers::pi / 2.0;

struct StateParams {
  double n_alpha = 0.0;
  double n_s = 0.0;
  double phi1 = 0.0;

  /// Throws DomainError unless n_alpha, n_s >= 0 and phi1 is finite.
  void validate() const;

  /// Squeezing magnitude r = asinh(sqrt(n_s)).
  double squeeze_r() const;

  /// Pump photon number for a beam splitter of reflectivity angle theta,
  /// n_pump = n_alpha / theta^2.
  double pump_photons(double theta) const;

  static StateParams from_squeezing(double n_alpha, double r, double phi1);

  StateParams with_phase(double phi) const { return {n_alpha, n_s, phi}; }

  friend bool operator==(const StateParams&, const StateParams&) = default;
};

enum class PhaseBranch { kSqueezed, kAntiSqueezed };

struct SensitivityReport {
  double homodyne_var_ns = 0.0;
  double camera_var_ns = 0.0;
  double ratio = 0.0;
  PhaseBranch phase_branch = PhaseBranch::kSqueezed;
};

double mean_total(const StateParams& p);
double variance_total(const StateParams& p);
double shot_noise_limit(const StateParams& p);

/// Mean photon number behind a loss channel of transmission eta.
double pixel_mean(const StateParams& p, double eta);

/// Photon-number variance behind a loss channel of transmission eta, in the
/// binomial-thinning form V(eta) = eta*M + eta^2*(V1 - M).
double pixel_variance(const StateParams& p, double eta);

/// Quadratic noise-law coefficient q in V = <n> + q<n>^2. Negative q means
/// sub-Poissonian statistics. Throws DomainError when mean_total is zero.
double q_coefficient(const StateParams& p);

/// Numerator of q_coefficient: V1 - M.
double excess_noise(const StateParams& p);

struct SweepPoint {
  double phi1;
  double variance;
  double shot_noise;
};

std::vector<SweepPoint> phase_sweep(const StateParams& p, std::span<const double> phases);

/// Phase in [0, pi/2] where the number variance crosses the shot-noise level
/// (root of q(phi1) = 0). Returns a negative value when no crossing exists.
double shot_noise_crossing_phase(const StateParams& p);

/// Quadrature variance seen by a homodyne detector at local-oscillator
/// phase phi1 (vacuum = 1/2).
double homodyne_quadrature_variance(const StateParams& p);

/// Per-sample variance of the squeezed-photon estimate from homodyne
/// detection, 2 n_s (n_s + 1).
double homodyne_sensitivity(double n_s);

/// Same quantity as the quotient 2 X^2 / (dX/dn_s)^2 of the quadrature
/// variance X at phase phi1. Equals homodyne_sensitivity at phi1 = 0 and
/// phi1 = pi and exceeds it elsewhere.
double homodyne_sensitivity_quotient(double n_s, double phi1);

/// Partial derivatives of q = (V - M)/M^2 and of q_coefficient used in the
/// camera error propagation.
struct CameraPartials {
  double dq_dmean;      // d q / d<n>   at fixed V
  double dq_dvariance;  // d q / dV     at fixed <n>
  double dq_dns;        // d q_coefficient / d n_s at fixed n_alpha, phi1
};

CameraPartials camera_partials(const StateParams& p, double eta);

/// Central finite differences of the same partials, relative step `rel_step`.
CameraPartials camera_partials_numeric(const StateParams& p, double eta, double rel_step = 1e-6);

/// Per-sample variance of the squeezed-photon estimate from the camera
/// q-method at transmission eta. Throws DegenerateDerivativeError when
/// |dq/dn_s| < 1e-30.
double camera_sensitivity(const StateParams& p, double eta);

SensitivityReport sensitivity_report(const StateParams& p, double eta);

struct QInversion {
  double n_s = 0.0;
  double n_alpha = 0.0;
  /// Relative mismatch between the measured (q_as - q_s) and the value
  /// implied by the recovered photon numbers.
  double consistency_residual = 0.0;
  /// False when the recovered n_s lies outside [0, n_total].
  bool physical = true;
};

/// Recovers (n_s, n_alpha) from the noise-law coefficients at the squeezed
/// and anti-squeezed phases and the measured total photon number.
QInversion invert_q(double q_s, double q_as, double n_total);

}  // namespace sqzcam
