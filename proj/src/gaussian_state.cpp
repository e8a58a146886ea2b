#include "sqzcam/gaussian_state.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "sqzcam/errors.hpp"

namespace sqzcam {

namespace {

void check_eta(double eta) {
  if (!(eta >= 0.0 && eta <= 1.0)) {
    throw DomainError("transmission must lie in [0, 1], got " + std::to_string(eta));
  }
}

// sqrt(n_s (1 + n_s)) = sinh(r) cosh(r) = sinh(2r)/2
double pair_amplitude(double n_s) { return std::sqrt(n_s * (1.0 + n_s)); }

// q(M, V) written in the measured moments.
double q_of_moments(double mean, double variance) { return (variance - mean) / (mean * mean); }

}  // namespace

void StateParams::validate() const {
  if (!(n_alpha >= 0.0) || !std::isfinite(n_alpha)) {
    throw DomainError("n_alpha must be finite and >= 0");
  }
  if (!(n_s >= 0.0) || !std::isfinite(n_s)) {
    throw DomainError("n_s must be finite and >= 0");
  }
  if (!std::isfinite(phi1)) {
    throw DomainError("phi1 must be finite");
  }
}

double StateParams::squeeze_r() const { return std::asinh(std::sqrt(n_s)); }

double StateParams::pump_photons(double theta) const {
  if (theta == 0.0) throw DomainError("theta must be nonzero");
  return n_alpha / (theta * theta);
}

StateParams StateParams::from_squeezing(double n_alpha, double r, double phi1) {
  const double s = std::sinh(r);
  return {n_alpha, s * s, phi1};
}

double mean_total(const StateParams& p) { return p.n_alpha + p.n_s; }

double excess_noise(const StateParams& p) {
  return p.n_s * (1.0 + 2.0 * p.n_alpha + 2.0 * p.n_s) -
         2.0 * p.n_alpha * pair_amplitude(p.n_s) * std::cos(2.0 * p.phi1);
}

double variance_total(const StateParams& p) {
  return p.n_alpha + 2.0 * p.n_alpha * p.n_s + 2.0 * p.n_s + 2.0 * p.n_s * p.n_s -
         2.0 * std::cos(2.0 * p.phi1) * p.n_alpha * pair_amplitude(p.n_s);
}

double shot_noise_limit(const StateParams& p) { return p.n_alpha + p.n_s; }

double pixel_mean(const StateParams& p, double eta) {
  check_eta(eta);
  return eta * mean_total(p);
}

double pixel_variance(const StateParams& p, double eta) {
  check_eta(eta);
  return eta * mean_total(p) + eta * eta * excess_noise(p);
}

double q_coefficient(const StateParams& p) {
  const double m = mean_total(p);
  if (m <= 0.0) throw DomainError("q_coefficient undefined for zero mean photon number");
  return excess_noise(p) / (m * m);
}

std::vector<SweepPoint> phase_sweep(const StateParams& p, std::span<const double> phases) {
  std::vector<SweepPoint> out;
  out.reserve(phases.size());
  for (double phi : phases) {
    const StateParams at = p.with_phase(phi);
    out.push_back({phi, variance_total(at), shot_noise_limit(at)});
  }
  return out;
}

double shot_noise_crossing_phase(const StateParams& p) {
  if (p.n_s <= 0.0 || p.n_alpha <= 0.0) return -1.0;
  const double c = p.n_s * (1.0 + 2.0 * p.n_alpha + 2.0 * p.n_s) /
                   (2.0 * p.n_alpha * pair_amplitude(p.n_s));
  if (c > 1.0) return -1.0;
  return 0.5 * std::acos(c);
}

double homodyne_quadrature_variance(const StateParams& p) {
  return 0.5 * (2.0 * p.n_s + 1.0 - 2.0 * pair_amplitude(p.n_s) * std::cos(p.phi1));
}

double homodyne_sensitivity(double n_s) {
  if (!(n_s >= 0.0)) throw DomainError("n_s must be >= 0");
  return 2.0 * n_s * (n_s + 1.0);
}

double homodyne_sensitivity_quotient(double n_s, double phi1) {
  if (!(n_s > 0.0)) throw DomainError("quotient form needs n_s > 0");
  const double x = homodyne_quadrature_variance({0.0, n_s, phi1});
  const double dx = 1.0 - 0.5 * (2.0 * n_s + 1.0) * std::cos(phi1) / pair_amplitude(n_s);
  if (std::abs(dx) < 1e-300) throw DegenerateDerivativeError("dX/dn_s vanishes at this phase");
  // Gaussian statistics: the variance of the measured quadrature variance is 2 X^2.
  return 2.0 * x * x / (dx * dx);
}

CameraPartials camera_partials(const StateParams& p, double eta) {
  const double m = pixel_mean(p, eta);
  const double v = pixel_variance(p, eta);
  const double total = mean_total(p);
  if (total <= 0.0 || m <= 0.0) throw DomainError("camera partials need a nonzero mean");

  CameraPartials d{};
  d.dq_dmean = (m - 2.0 * v) / (m * m * m);
  d.dq_dvariance = 1.0 / (m * m);

  const double a = excess_noise(p);
  double da = 1.0 + 2.0 * p.n_alpha + 4.0 * p.n_s;
  if (p.n_alpha != 0.0) {
    if (p.n_s <= 0.0) throw DegenerateDerivativeError("dq/dn_s diverges at n_s = 0");
    da -= p.n_alpha * std::cos(2.0 * p.phi1) * (1.0 + 2.0 * p.n_s) / pair_amplitude(p.n_s);
  }
  d.dq_dns = da / (total * total) - 2.0 * a / (total * total * total);
  return d;
}

CameraPartials camera_partials_numeric(const StateParams& p, double eta, double rel_step) {
  const double m = pixel_mean(p, eta);
  const double v = pixel_variance(p, eta);
  CameraPartials d{};
  const double hm = rel_step * m;
  d.dq_dmean = (q_of_moments(m + hm, v) - q_of_moments(m - hm, v)) / (2.0 * hm);
  const double hv = rel_step * std::abs(v);
  d.dq_dvariance = (q_of_moments(m, v + hv) - q_of_moments(m, v - hv)) / (2.0 * hv);
  const double hs = rel_step * p.n_s;
  StateParams up = p, down = p;
  up.n_s += hs;
  down.n_s -= hs;
  d.dq_dns = (q_coefficient(up) - q_coefficient(down)) / (2.0 * hs);
  return d;
}

double camera_sensitivity(const StateParams& p, double eta) {
  if (!(eta > 0.0 && eta <= 1.0)) throw DomainError("camera sensitivity needs 0 < eta <= 1");
  if (!(p.n_s > 0.0)) throw DegenerateDerivativeError("camera sensitivity needs n_s > 0");
  const CameraPartials d = camera_partials(p, eta);
  if (std::abs(d.dq_dns) < 1e-30) {
    throw DegenerateDerivativeError("dq/dn_s vanishes; n_s is not identifiable at this phase");
  }
  const double v = pixel_variance(p, eta);
  const double var_mean = v;
  const double var_variance = 2.0 * v * v;
  const double var_q =
      d.dq_dmean * d.dq_dmean * var_mean + d.dq_dvariance * d.dq_dvariance * var_variance;
  return var_q / (d.dq_dns * d.dq_dns);
}

SensitivityReport sensitivity_report(const StateParams& p, double eta) {
  SensitivityReport r;
  r.homodyne_var_ns = homodyne_sensitivity(p.n_s);
  r.camera_var_ns = camera_sensitivity(p, eta);
  r.ratio = r.camera_var_ns / r.homodyne_var_ns;
  r.phase_branch = std::cos(2.0 * p.phi1) >= 0.0 ? PhaseBranch::kSqueezed : PhaseBranch::kAntiSqueezed;
  return r;
}

QInversion invert_q(double q_s, double q_as, double n_total) {
  if (!(n_total > 0.0)) throw DomainError("n_total must be positive");
  QInversion out;
  out.n_s = (q_s + q_as) * n_total * n_total / (2.0 * (1.0 + 2.0 * n_total));
  out.n_alpha = n_total - out.n_s;
  out.physical = out.n_s >= 0.0 && out.n_s <= n_total;

  const double measured = q_as - q_s;
  const double implied = out.physical ? 4.0 * out.n_alpha * pair_amplitude(out.n_s) / (n_total * n_total)
                                      : 0.0;
  if (implied > 0.0) {
    out.consistency_residual = (measured - implied) / implied;
  } else {
    out.consistency_residual = measured - implied;
  }
  return out;
}

}  // namespace sqzcam
