#include "sqzcam/fock_oracle.hpp"

#include <cmath>
#include <limits>
#include <ostream>
#include <string>

#include "sqzcam/errors.hpp"

namespace sqzcam {

namespace {

// Neumaier-compensated sum.
class CompensatedSum {
 public:
  void add(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      comp_ += (sum_ - t) + x;
    } else {
      comp_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

std::vector<double> log_factorials(int n) {
  std::vector<double> lf(static_cast<std::size_t>(n) + 1, 0.0);
  for (int k = 1; k <= n; ++k) lf[k] = lf[k - 1] + std::log(static_cast<double>(k));
  return lf;
}

constexpr double kRescaleHi = 1e100;
constexpr double kRescaleLo = 1e-100;

}  // namespace

FockDistribution::FockDistribution(std::vector<double> probs, double tail_tol)
    : probs_(std::move(probs)) {
  if (probs_.empty()) throw DomainError("FockDistribution needs at least one entry");
  CompensatedSum total;
  cdf_.resize(probs_.size());
  for (std::size_t n = 0; n < probs_.size(); ++n) {
    const double p = probs_[n];
    if (!(p >= 0.0 && p <= 1.0 + 1e-15)) {
      throw DomainError("probability at n=" + std::to_string(n) + " outside [0, 1]");
    }
    total.add(p);
    cdf_[n] = total.value();
  }
  const double sum = total.value();
  // Amplitude recurrences lose about one ulp per step.
  const double slack = 1e-12 + 16.0 * std::numeric_limits<double>::epsilon() * static_cast<double>(probs_.size());
  if (sum > 1.0 + slack) throw DomainError("probabilities sum above one");
  tail_mass_ = std::max(0.0, 1.0 - sum);
  if (tail_mass_ > tail_tol) {
    throw InsufficientCutoffError("tail mass " + std::to_string(tail_mass_) +
                                  " exceeds tolerance at cutoff " + std::to_string(cutoff()));
  }
}

FockAmplitudes dsv_amplitudes(std::complex<double> beta, double r, int cutoff) {
  if (cutoff < 0) throw DomainError("cutoff must be >= 0");
  if (!(r >= 0.0)) throw DomainError("squeezing magnitude must be >= 0");

  const double t = std::tanh(r);
  const std::complex<double> g = beta + std::conj(beta) * t;
  // log|<0|D(beta)S(r)|0>|, kept in extended precision: it and the running
  // scale are large and of opposite sign for bright states.
  const long double br = beta.real(), bi = beta.imag();
  const long double log_c0 = -0.5L * (br * br + bi * bi) - 0.5L * (br * br - bi * bi) * t -
                             0.5L * std::log(std::cosh(static_cast<long double>(r)));

  // Three-term recurrence from (a - beta) cosh r + (a^dag - beta^*) sinh r
  // annihilating the state; values kept with a running power-of-ten scale.
  std::vector<std::complex<double>> scaled(static_cast<std::size_t>(cutoff) + 1);
  std::vector<long double> log_scale(scaled.size(), 0.0L);
  scaled[0] = 1.0;
  long double log_s = 0.0L;
  std::complex<double> prev = 0.0, cur = 1.0;
  for (int n = 0; n < cutoff; ++n) {
    std::complex<double> next = g * cur;
    if (n > 0) next -= t * std::sqrt(static_cast<double>(n)) * prev;
    next /= std::sqrt(static_cast<double>(n + 1));
    prev = cur;
    cur = next;
    const double mag = std::max(std::abs(prev), std::abs(cur));
    if (mag > kRescaleHi || (mag > 0.0 && mag < kRescaleLo)) {
      const double f = 1.0 / mag;
      prev *= f;
      cur *= f;
      log_s += std::log(static_cast<long double>(mag));
    }
    scaled[n + 1] = cur;
    log_scale[n + 1] = log_s;
  }

  FockAmplitudes out;
  out.amps.resize(scaled.size());
  CompensatedSum norm;
  for (std::size_t n = 0; n < scaled.size(); ++n) {
    const double a = std::abs(scaled[n]);
    if (a == 0.0) continue;
    const double f = static_cast<double>(std::exp(log_scale[n] + log_c0));
    out.amps[n] = scaled[n] * f;
    norm.add(std::norm(out.amps[n]));
  }
  out.tail_mass = std::max(0.0, 1.0 - norm.value());
  return out;
}

FockDistribution dsv_distribution(std::complex<double> beta, double r, double phi1, int cutoff,
                                  double tail_tol) {
  const FockAmplitudes a = dsv_amplitudes(beta * std::polar(1.0, phi1), r, cutoff);
  std::vector<double> probs(a.amps.size());
  for (std::size_t n = 0; n < probs.size(); ++n) probs[n] = std::norm(a.amps[n]);
  return FockDistribution(std::move(probs), tail_tol);
}

FockDistribution dsv_distribution_auto(std::complex<double> beta, double r, double phi1,
                                       double tail_tol, int max_cutoff) {
  const double sh = std::sinh(r);
  const double mean = std::norm(beta) + sh * sh;
  // upper bound on the number variance over all phases
  const double spread = std::sqrt(std::norm(beta) * std::exp(2.0 * r) + 2.0 * sh * sh * (1.0 + sh * sh) + 1.0);
  int cutoff = static_cast<int>(mean + 12.0 * spread + 16.0);
  cutoff = std::min(cutoff, max_cutoff);
  for (;;) {
    try {
      return dsv_distribution(beta, r, phi1, cutoff, tail_tol);
    } catch (const InsufficientCutoffError&) {
      if (cutoff >= max_cutoff) throw;
      cutoff = std::min(max_cutoff, cutoff + cutoff / 2 + 8);
    }
  }
}

FockDistribution apply_loss(const FockDistribution& d, double eta) {
  if (!(eta >= 0.0 && eta <= 1.0)) throw DomainError("transmission must lie in [0, 1]");
  const int c = d.cutoff();
  const auto in = d.probs();
  std::vector<double> out(in.size(), 0.0);
  if (eta == 1.0) {
    out.assign(in.begin(), in.end());
  } else if (eta == 0.0) {
    double s = 0.0;
    for (double p : in) s += p;
    out[0] = s;
  } else {
    const std::vector<double> lf = log_factorials(c);
    const double le = std::log(eta);
    const double l1 = std::log1p(-eta);
    std::vector<CompensatedSum> acc(in.size());
    for (int n = 0; n <= c; ++n) {
      if (in[n] == 0.0) continue;
      for (int m = 0; m <= n; ++m) {
        const double lp = lf[n] - lf[m] - lf[n - m] + m * le + (n - m) * l1;
        acc[m].add(in[n] * std::exp(lp));
      }
    }
    for (int m = 0; m <= c; ++m) out[m] = acc[m].value();
  }
  return FockDistribution(std::move(out), std::max(d.tail_mass(), 0.0) + 1e-12);
}

FockMoments moments(const FockDistribution& d) {
  CompensatedSum mass, first;
  const auto p = d.probs();
  for (std::size_t n = 0; n < p.size(); ++n) {
    mass.add(p[n]);
    first.add(static_cast<double>(n) * p[n]);
  }
  FockMoments m;
  m.mean = first.value() / mass.value();
  CompensatedSum second;
  for (std::size_t n = 0; n < p.size(); ++n) {
    const double dev = static_cast<double>(n) - m.mean;
    second.add(dev * dev * p[n]);
  }
  m.variance = second.value() / mass.value();
  m.tail_mass = d.tail_mass();
  return m;
}

FockDistribution poisson_distribution(double lambda, int cutoff, double tail_tol) {
  if (!(lambda >= 0.0)) throw DomainError("Poisson mean must be >= 0");
  if (cutoff < 0) throw DomainError("cutoff must be >= 0");
  std::vector<double> probs(static_cast<std::size_t>(cutoff) + 1, 0.0);
  if (lambda == 0.0) {
    probs[0] = 1.0;
  } else {
    const double ll = std::log(lambda);
    for (int n = 0; n <= cutoff; ++n) {
      probs[n] = std::exp(n * ll - lambda - std::lgamma(n + 1.0));
    }
  }
  return FockDistribution(std::move(probs), tail_tol);
}

int mix_cutoff_for(std::complex<double> alpha, double r, double tail_tol, int max_cutoff) {
  auto needed = [&](std::complex<double> beta, double rr) {
    for (int c = 8;; c += 8) {
      if (c > max_cutoff) throw InsufficientCutoffError("no per-mode cutoff below the cap");
      if (dsv_amplitudes(beta, rr, c).tail_mass < 0.5 * tail_tol) return c;
    }
  };
  return needed(alpha, 0.0) + needed(0.0, r);
}

FockDistribution exact_mix_and_trace(std::complex<double> alpha, double r, double theta,
                                     int max_total, double tail_tol) {
  if (max_total < 0) throw DomainError("max_total must be >= 0");
  const FockAmplitudes pump = dsv_amplitudes(alpha, 0.0, max_total);
  const FockAmplitudes sqz = dsv_amplitudes(0.0, r, max_total);

  std::vector<double> signal(static_cast<std::size_t>(max_total) + 1, 0.0);
  CompensatedSum kept;
  std::vector<std::complex<double>> v, term, next;

  // Blocks of fixed total photon number N; index k = photons in the signal
  // port, N - k in the pump port. Generator G = a_s^dag a_p - a_s a_p^dag,
  // U = exp(theta G), so that a_s -> a_s cos(theta) + a_p sin(theta).
  for (int total = 0; total <= max_total; ++total) {
    const std::size_t dim = static_cast<std::size_t>(total) + 1;
    v.assign(dim, 0.0);
    for (int k = 0; k <= total; ++k) {
      v[k] = pump.amps[total - k] * sqz.amps[k];
      kept.add(std::norm(v[k]));
    }

    const int steps = static_cast<int>(std::ceil(2.0 * std::abs(theta) * total)) + 1;
    const double h = theta / steps;
    auto apply_g = [&](const std::vector<std::complex<double>>& x, std::vector<std::complex<double>>& y) {
      y.assign(dim, 0.0);
      for (int k = 0; k <= total; ++k) {
        if (x[k] == 0.0) continue;
        const double np = total - k;
        if (k < total) y[k + 1] += std::sqrt(np * (k + 1.0)) * x[k];
        if (k > 0) y[k - 1] -= std::sqrt(k * (np + 1.0)) * x[k];
      }
    };
    for (int s = 0; s < steps; ++s) {
      term = v;
      for (int order = 1; order < 200; ++order) {
        apply_g(term, next);
        double tn = 0.0;
        for (std::size_t i = 0; i < dim; ++i) {
          term[i] = next[i] * (h / order);
          v[i] += term[i];
          tn = std::max(tn, std::abs(term[i]));
        }
        if (tn < 1e-18) break;
      }
    }
    for (int k = 0; k <= total; ++k) signal[k] += std::norm(v[k]);
  }

  const double input_tail = 1.0 - kept.value();
  if (input_tail > tail_tol) {
    throw InsufficientCutoffError("two-mode input tail " + std::to_string(input_tail) +
                                  " exceeds tolerance at max_total " + std::to_string(max_total));
  }
  return FockDistribution(std::move(signal), tail_tol + 1e-12);
}

void write_csv(const FockDistribution& d, std::ostream& os) {
  os << "n,probability\n";
  const auto p = d.probs();
  os.precision(17);
  for (std::size_t n = 0; n < p.size(); ++n) os << n << ',' << p[n] << '\n';
}

}  // namespace sqzcam
