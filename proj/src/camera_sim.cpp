#include "sqzcam/camera_sim.hpp"

#include <boost/random/binomial_distribution.hpp>
#include <boost/random/normal_distribution.hpp>
#include <cmath>
#include <limits>
#include <string>

#include "sqzcam/errors.hpp"
#include "sqzcam/parallel.hpp"

namespace sqzcam {

namespace {

// Exact-path distributions can be much wider than the oracle's default cap.
constexpr int kSamplerMaxCutoff = 1 << 17;
// Far below anything a finite batch can resolve, and above the round-off of
// amplitude recurrences thousands of steps long.
constexpr double kSamplerTailTol = 1e-10;

}  // namespace

SensorGeometry::SensorGeometry(std::uint32_t rows, std::uint32_t cols, std::vector<double> weights)
    : rows_(rows), cols_(cols), weights_(std::move(weights)) {
  if (rows == 0 || cols == 0) throw DomainError("sensor needs at least one row and one column");
  if (weights_.size() != std::size_t{rows} * cols) {
    throw DomainError("expected " + std::to_string(std::size_t{rows} * cols) + " weights, got " +
                      std::to_string(weights_.size()));
  }
  double sum = 0.0;
  for (double w : weights_) {
    if (!(w >= 0.0) || !std::isfinite(w)) throw DomainError("pixel weights must be finite and >= 0");
    sum += w;
  }
  if (std::abs(sum - 1.0) > 1e-12) {
    throw DomainError("pixel weights must sum to 1 (got " + std::to_string(sum) + ")");
  }
  split_.resize(weights_.size());
  double suffix = 0.0;
  for (std::size_t i = weights_.size(); i-- > 0;) {
    suffix += weights_[i];
    split_[i] = suffix > 0.0 ? std::min(1.0, weights_[i] / suffix) : 0.0;
  }
  // whatever survives to the last pixel with nonzero weight stays there
  for (std::size_t i = weights_.size(); i-- > 0;) {
    if (weights_[i] > 0.0) {
      split_[i] = 1.0;
      break;
    }
  }
}

SensorGeometry SensorGeometry::uniform(std::uint32_t rows, std::uint32_t cols) {
  const std::size_t n = std::size_t{rows} * cols;
  if (n == 0) throw DomainError("sensor needs at least one row and one column");
  return SensorGeometry(rows, cols, std::vector<double>(n, 1.0 / static_cast<double>(n)));
}

FrameBatch::FrameBatch(StateParams params, SensorGeometry geometry, SeedRecord seed,
                       std::size_t n_frames, std::vector<std::uint32_t> counts)
    : params_(params),
      geometry_(std::move(geometry)),
      seed_(seed),
      n_frames_(n_frames),
      counts_(std::move(counts)) {
  if (n_frames_ == 0) throw DomainError("a batch needs at least one frame");
  if (counts_.size() != n_frames_ * geometry_.pixel_count()) {
    throw DomainError("count matrix does not match n_frames x pixels");
  }
}

std::uint64_t FrameBatch::frame_total(std::size_t f) const {
  std::uint64_t s = 0;
  for (std::uint32_t c : frame(f)) s += c;
  return s;
}

TotalPhotonSampler::TotalPhotonSampler(const StateParams& p, double gaussian_threshold) {
  p.validate();
  mean_ = mean_total(p);
  sd_ = std::sqrt(std::max(0.0, variance_total(p)));
  if (mean_ < gaussian_threshold && mean_ > 0.0) {
    exact_.emplace(dsv_distribution_auto(std::sqrt(p.n_alpha), p.squeeze_r(), p.phi1,
                                         kSamplerTailTol, kSamplerMaxCutoff));
  }
}

std::uint64_t TotalPhotonSampler::operator()(Philox4x32& eng) const {
  if (mean_ == 0.0) return 0;
  if (exact_) return static_cast<std::uint64_t>(exact_->sample(eng));
  boost::random::normal_distribution<double> normal(mean_, sd_);
  const double x = std::nearbyint(normal(eng));
  return x <= 0.0 ? 0 : static_cast<std::uint64_t>(x);
}

std::uint64_t sample_total_photons(const StateParams& p, Philox4x32& eng) {
  return TotalPhotonSampler(p)(eng);
}

void distribute_to_pixels(std::uint64_t n, const SensorGeometry& g, Philox4x32& eng,
                          std::span<std::uint32_t> out) {
  if (out.size() != g.pixel_count()) throw DomainError("output span does not match the sensor");
  std::uint64_t remaining = n;
  for (std::size_t i = 0; i < out.size(); ++i) {
    std::uint64_t k = 0;
    if (remaining > 0) {
      const double p = g.split_probability(i);
      if (p >= 1.0) {
        k = remaining;
      } else if (p > 0.0) {
        boost::random::binomial_distribution<std::int64_t, double> bin(
            static_cast<std::int64_t>(remaining), p);
        k = static_cast<std::uint64_t>(bin(eng));
      }
    }
    if (k > std::numeric_limits<std::uint32_t>::max()) {
      throw DomainError("pixel count overflows 32 bits");
    }
    out[i] = static_cast<std::uint32_t>(k);
    remaining -= k;
  }
}

FrameBatch simulate_batch(const StateParams& p, const SensorGeometry& g, std::size_t n_frames,
                          std::uint64_t seed, std::uint32_t stream, const SimulationOptions& opts) {
  if (n_frames == 0) throw DomainError("n_frames must be >= 1");
  const TotalPhotonSampler totals(p, opts.gaussian_threshold);
  const std::size_t pixels = g.pixel_count();
  std::vector<std::uint32_t> counts(n_frames * pixels);
  parallel_for(n_frames, opts.threads, [&](std::size_t begin, std::size_t end) {
    for (std::size_t f = begin; f < end; ++f) {
      Philox4x32 eng(seed, stream, f);
      const std::uint64_t n = totals(eng);
      distribute_to_pixels(n, g, eng, std::span<std::uint32_t>(counts).subspan(f * pixels, pixels));
    }
  });
  return FrameBatch(p, g, SeedRecord{seed, stream}, n_frames, std::move(counts));
}

}  // namespace sqzcam
