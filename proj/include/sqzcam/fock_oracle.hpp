#pragma once

// Exact photon-number distributions in a truncated Fock basis. Used as ground
// truth for the closed-form statistics and as the exact sampler at small mean
// photon numbers.

#include <algorithm>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "sqzcam/philox.hpp"

namespace sqzcam {

inline constexpr double kDefaultTailTol = 1e-12;
inline constexpr int kDefaultMaxCutoff = 4096;

/// Photon-number distribution on {0, ..., cutoff}. Immutable.
class FockDistribution {
 public:
  /// Takes ownership of `probs`; tail_mass = 1 - sum(probs). Throws
  /// DomainError for entries outside [0, 1] or a sum exceeding 1 beyond
  /// rounding, InsufficientCutoffError if the tail exceeds `tail_tol`.
  FockDistribution(std::vector<double> probs, double tail_tol);

  int cutoff() const { return static_cast<int>(probs_.size()) - 1; }
  std::span<const double> probs() const { return probs_; }
  double prob(int n) const { return n >= 0 && n <= cutoff() ? probs_[n] : 0.0; }
  double tail_mass() const { return tail_mass_; }

  /// Inverse-CDF draw. Mass in the tail is folded onto the represented range.
  template <class Engine>
  std::int64_t sample(Engine& eng) const {
    const double u = uniform01(eng) * cdf_.back();
    auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
    if (it == cdf_.end()) --it;
    return static_cast<std::int64_t>(it - cdf_.begin());
  }

 private:
  std::vector<double> probs_;
  std::vector<double> cdf_;
  double tail_mass_ = 0.0;
};

struct FockMoments {
  double mean = 0.0;
  double variance = 0.0;
  /// Probability mass not represented; moments are conditional on the
  /// represented range.
  double tail_mass = 0.0;
};

/// Complex amplitudes <n| D(beta) S(r) |0>, n = 0..cutoff, up to a global
/// phase. S(r) squeezes the real quadrature for r > 0.
struct FockAmplitudes {
  std::vector<std::complex<double>> amps;
  double tail_mass = 0.0;
};

FockAmplitudes dsv_amplitudes(std::complex<double> beta, double r, int cutoff);

/// Photon-number distribution of D(beta e^{i phi1}) S(r) |0>.
FockDistribution dsv_distribution(std::complex<double> beta, double r, double phi1, int cutoff,
                                  double tail_tol = kDefaultTailTol);

/// Same, growing the cutoff until the tail drops below tail_tol (hard cap
/// max_cutoff).
FockDistribution dsv_distribution_auto(std::complex<double> beta, double r, double phi1,
                                       double tail_tol = kDefaultTailTol,
                                       int max_cutoff = kDefaultMaxCutoff);

/// Binomial loss channel of transmission eta.
FockDistribution apply_loss(const FockDistribution& d, double eta);

FockMoments moments(const FockDistribution& d);

/// Poisson(lambda) truncated at `cutoff`.
FockDistribution poisson_distribution(double lambda, int cutoff, double tail_tol = kDefaultTailTol);

/// Mixes a coherent pump |alpha> with squeezed vacuum S(r)|0> on a beam
/// splitter of reflectivity sin(theta) and returns the photon statistics of
/// the signal port after tracing out the pump port. The two-mode state lives
/// on all (n_pump, n_signal) with n_pump + n_signal <= max_total; the
/// beam splitter conserves total photon number so only the input truncation
/// contributes to the tail.
FockDistribution exact_mix_and_trace(std::complex<double> alpha, double r, double theta,
                                     int max_total, double tail_tol = 1e-10);

/// Smallest max_total for which the product input state has tail < tail_tol.
int mix_cutoff_for(std::complex<double> alpha, double r, double tail_tol = 1e-10,
                   int max_cutoff = kDefaultMaxCutoff);

/// CSV dump with columns n,probability.
void write_csv(const FockDistribution& d, std::ostream& os);

}  // namespace sqzcam
