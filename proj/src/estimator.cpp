#include "sqzcam/estimator.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "sqzcam/errors.hpp"
#include "sqzcam/parallel.hpp"

namespace sqzcam {

namespace {

// Exact first and second raw moments of an integer sample. Counts are at most
// 2^32 per pixel and partial sums fit in 64 bits, so 128-bit accumulators
// cannot overflow for any realistic frame count.
struct IntegerMoments {
  unsigned __int128 sum = 0;
  unsigned __int128 sum_sq = 0;

  void add(std::uint64_t x) {
    sum += x;
    sum_sq += static_cast<unsigned __int128>(x) * x;
  }
  double mean(std::size_t n) const {
    return static_cast<double>(static_cast<long double>(sum) / static_cast<long double>(n));
  }
  // (n sum_sq - sum^2) / (n (n - 1)), numerator evaluated exactly when it fits
  double variance(std::size_t n) const {
    const long double nn = static_cast<long double>(n);
    const unsigned __int128 a = sum_sq * n;
    const unsigned __int128 b = sum * sum;
    const long double num = static_cast<long double>(a - b);
    return static_cast<double>(num / (nn * (nn - 1.0L)));
  }
};

void require_two_frames(const FrameBatch& b) {
  if (b.n_frames() < 2) {
    throw DomainError("at least two frames are needed for a variance, got " + std::to_string(b.n_frames()));
  }
}

}  // namespace

PixelStats accumulate_stats(const FrameBatch& b, unsigned threads) {
  require_two_frames(b);
  const std::size_t pixels = b.pixel_count();
  const std::size_t n = b.n_frames();
  PixelStats s;
  s.n_frames = n;
  s.per_pixel_mean.resize(pixels);
  s.per_pixel_var.resize(pixels);
  parallel_for(pixels, threads, [&](std::size_t begin, std::size_t end) {
    std::vector<IntegerMoments> acc(end - begin);
    for (std::size_t f = 0; f < n; ++f) {
      const auto fr = b.frame(f);
      for (std::size_t i = begin; i < end; ++i) acc[i - begin].add(fr[i]);
    }
    for (std::size_t i = begin; i < end; ++i) {
      s.per_pixel_mean[i] = acc[i - begin].mean(n);
      s.per_pixel_var[i] = acc[i - begin].variance(n);
    }
  });
  return s;
}

IntegrationCurve integrate_pixels(const FrameBatch& b, std::span<const std::size_t> order, unsigned threads) {
  return integrate_frame_range(b, 0, b.n_frames(), order, threads);
}

IntegrationCurve integrate_frame_range(const FrameBatch& b, std::size_t first, std::size_t last,
                                       std::span<const std::size_t> order, unsigned threads) {
  if (last > b.n_frames() || first > last) throw DomainError("frame range outside the batch");
  const std::size_t n = last - first;
  if (n < 2) throw DomainError("at least two frames are needed for a variance, got " + std::to_string(n));
  const std::size_t pixels = b.pixel_count();

  std::vector<std::size_t> perm(pixels);
  if (order.empty()) {
    std::iota(perm.begin(), perm.end(), std::size_t{0});
  } else {
    if (order.size() != pixels) throw DomainError("pixel order must list every pixel once");
    std::vector<bool> seen(pixels, false);
    for (std::size_t i = 0; i < pixels; ++i) {
      if (order[i] >= pixels || seen[order[i]]) throw DomainError("pixel order is not a permutation");
      seen[order[i]] = true;
      perm[i] = order[i];
    }
  }

  IntegrationCurve c;
  c.n_frames = n;
  c.points.resize(pixels);
  double eta = 0.0;
  for (std::size_t k = 0; k < pixels; ++k) {
    eta += b.geometry().weight(perm[k]);
    c.points[k].k = k + 1;
    c.points[k].eta = eta;
  }

  parallel_for(pixels, threads, [&](std::size_t begin, std::size_t end) {
    std::vector<IntegerMoments> acc(end - begin);
    for (std::size_t f = first; f < last; ++f) {
      const auto fr = b.frame(f);
      std::uint64_t partial = 0;
      for (std::size_t k = 0; k < begin; ++k) partial += fr[perm[k]];
      for (std::size_t k = begin; k < end; ++k) {
        partial += fr[perm[k]];
        acc[k - begin].add(partial);
      }
    }
    for (std::size_t k = begin; k < end; ++k) {
      c.points[k].mean = acc[k - begin].mean(n);
      c.points[k].variance = acc[k - begin].variance(n);
    }
  });
  return c;
}

IntegrationCurve merge_curves(std::span<const IntegrationCurve> curves) {
  if (curves.empty()) throw DomainError("nothing to merge");
  IntegrationCurve out = curves.front();
  for (std::size_t c = 1; c < curves.size(); ++c) {
    const IntegrationCurve& other = curves[c];
    if (other.points.size() != out.points.size()) throw DomainError("curves differ in length");
    const double na = static_cast<double>(out.n_frames);
    const double nb = static_cast<double>(other.n_frames);
    const double nt = na + nb;
    for (std::size_t k = 0; k < out.points.size(); ++k) {
      CurvePoint& a = out.points[k];
      const CurvePoint& p = other.points[k];
      const double delta = p.mean - a.mean;
      const double m2 = a.variance * (na - 1.0) + p.variance * (nb - 1.0) + delta * delta * na * nb / nt;
      a.mean += delta * nb / nt;
      a.variance = m2 / (nt - 1.0);
    }
    out.n_frames += other.n_frames;
  }
  return out;
}

NoiseLawFit fit_q(const IntegrationCurve& c) {
  const auto& pts = c.points;
  if (pts.size() < 2) throw DomainError("noise-law fit needs at least two points");
  double xmin = pts.front().mean, xmax = pts.front().mean;
  for (const auto& p : pts) {
    if (!(p.mean > 0.0)) throw DomainError("noise-law fit needs strictly positive means");
    xmin = std::min(xmin, p.mean);
    xmax = std::max(xmax, p.mean);
  }
  if (xmin == xmax) throw DomainError("degenerate design: all curve means are equal");

  NoiseLawFit fit;
  {
    // Work in u = x / xmax to keep x^4 representable and well scaled.
    double num = 0.0, den = 0.0;
    for (const auto& p : pts) {
      const double u = p.mean / xmax;
      num += u * u * (p.variance - p.mean);
      den += u * u * u * u;
    }
    const double q = num / den / (xmax * xmax);
    double rss = 0.0;
    for (const auto& p : pts) {
      const double r = p.variance - p.mean - q * p.mean * p.mean;
      rss += r * r;
    }
    QFit& f = fit.constrained;
    f.q = q;
    f.mode = FitMode::kConstrained;
    f.residual_norm = std::sqrt(rss);
    f.q_se = std::sqrt(rss / static_cast<double>(pts.size() - 1) / den) / (xmax * xmax);
  }

  if (pts.size() >= 3) {
    const Eigen::Index m = static_cast<Eigen::Index>(pts.size());
    Eigen::MatrixXd design(m, 3);
    Eigen::VectorXd y(m);
    for (Eigen::Index i = 0; i < m; ++i) {
      const double u = pts[i].mean / xmax;
      design(i, 0) = 1.0;
      design(i, 1) = u;
      design(i, 2) = u * u;
      y(i) = pts[i].variance;
    }
    const Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
    const Eigen::Vector3d coef = qr.solve(y);
    const Eigen::VectorXd resid = y - design * coef;
    const double rss = resid.squaredNorm();
    QFit f;
    f.mode = FitMode::kFreeQuadratic;
    f.intercept = coef(0);
    f.linear = coef(1) / xmax;
    f.q = coef(2) / (xmax * xmax);
    f.residual_norm = std::sqrt(rss);
    if (m > 3) {
      const Eigen::Matrix3d cov = (design.transpose() * design).inverse() * (rss / static_cast<double>(m - 3));
      f.q_se = std::sqrt(std::max(0.0, cov(2, 2))) / (xmax * xmax);
    }
    fit.free_quadratic = f;
  }
  return fit;
}

SqueezingEstimate estimate_squeezing(const QFit& q_s, const QFit& q_as, double n_total, double n_total_se) {
  const QInversion inv = invert_q(q_s.q, q_as.q, n_total);
  SqueezingEstimate e;
  e.n_s_hat = inv.n_s;
  e.n_alpha_hat = inv.n_alpha;
  e.consistency_residual = inv.consistency_residual;
  e.physical = inv.physical;

  // n_s = (q_s + q_as) g(n),  g(n) = n^2 / (2 (1 + 2n))
  const double n = n_total;
  const double g = n * n / (2.0 * (1.0 + 2.0 * n));
  const double dg = (n + n * n) / ((1.0 + 2.0 * n) * (1.0 + 2.0 * n));
  const double qsum = q_s.q + q_as.q;
  const double var_qsum = q_s.q_se * q_s.q_se + q_as.q_se * q_as.q_se;
  const double dns_dn = qsum * dg;
  e.n_s_se = std::sqrt(g * g * var_qsum + dns_dn * dns_dn * n_total_se * n_total_se);
  const double dna_dn = 1.0 - dns_dn;
  e.n_alpha_se = std::sqrt(g * g * var_qsum + dna_dn * dna_dn * n_total_se * n_total_se);
  return e;
}

double mean_frame_total(const FrameBatch& b) {
  IntegerMoments m;
  for (std::size_t f = 0; f < b.n_frames(); ++f) m.add(b.frame_total(f));
  return m.mean(b.n_frames());
}

QFit BatchAnalysis::reported_fit() const {
  QFit f = fit.constrained;
  if (jackknife_blocks > 0) f.q_se = q_se_jackknife;
  return f;
}

BatchAnalysis analyse_batch(const FrameBatch& b, std::span<const std::size_t> order,
                            std::size_t jackknife_blocks, unsigned threads) {
  require_two_frames(b);
  const std::size_t n = b.n_frames();
  BatchAnalysis a;
  const std::size_t blocks = std::min(jackknife_blocks, n / 2);

  if (blocks >= 2) {
    std::vector<IntegrationCurve> parts(blocks);
    for (std::size_t j = 0; j < blocks; ++j) {
      parts[j] = integrate_frame_range(b, j * n / blocks, (j + 1) * n / blocks, order, threads);
    }
    a.curve = merge_curves(parts);
    std::vector<double> loo(blocks);
    std::vector<IntegrationCurve> rest;
    for (std::size_t j = 0; j < blocks; ++j) {
      rest.clear();
      for (std::size_t i = 0; i < blocks; ++i) {
        if (i != j) rest.push_back(parts[i]);
      }
      loo[j] = fit_q(merge_curves(rest)).q();
    }
    const double mean = std::accumulate(loo.begin(), loo.end(), 0.0) / static_cast<double>(blocks);
    double ss = 0.0;
    for (double q : loo) ss += (q - mean) * (q - mean);
    a.q_se_jackknife = std::sqrt(ss * static_cast<double>(blocks - 1) / static_cast<double>(blocks));
    a.jackknife_blocks = blocks;
  } else {
    a.curve = integrate_pixels(b, order, threads);
  }
  a.fit = fit_q(a.curve);
  // the last curve point integrates every pixel, i.e. the frame totals
  a.mean_total = mean_frame_total(b);
  a.mean_total_se = std::sqrt(a.curve.points.back().variance / static_cast<double>(n));
  return a;
}

PrecisionStudy precision_study(const StateParams& p, const SensorGeometry& g, std::size_t frames_per_run,
                               std::span<const std::size_t> run_counts, std::uint64_t seed,
                               const PrecisionOptions& opts) {
  if (run_counts.empty()) throw DomainError("precision study needs at least one run count");
  for (std::size_t r : run_counts) {
    if (r < 2) throw DomainError("run counts must be >= 2");
  }
  if (frames_per_run < 2) throw DomainError("frames per run must be >= 2");
  if (opts.groups < 2) throw DomainError("precision study needs at least two groups");

  const std::size_t max_runs = *std::max_element(run_counts.begin(), run_counts.end());
  const std::size_t pool = opts.groups * max_runs;

  std::vector<IntegrationCurve> curves(pool);
  parallel_for(pool, opts.threads, [&](std::size_t begin, std::size_t end) {
    for (std::size_t j = begin; j < end; ++j) {
      const FrameBatch b =
          simulate_batch(p, g, frames_per_run, seed, opts.stream_base + static_cast<std::uint32_t>(j));
      curves[j] = integrate_pixels(b);
    }
  });

  PrecisionStudy study;
  study.frames_per_run = frames_per_run;
  study.pool_runs = pool;
  {
    const IntegrationCurve all = merge_curves(curves);
    study.photon_sd = std::sqrt(all.points.back().variance);
  }

  for (std::size_t runs : run_counts) {
    const std::size_t groups = pool / runs;
    std::vector<double> qs(groups);
    for (std::size_t gi = 0; gi < groups; ++gi) {
      const IntegrationCurve merged =
          merge_curves(std::span<const IntegrationCurve>(curves).subspan(gi * runs, runs));
      qs[gi] = fit_q(merged).q();
    }
    const double mean = std::accumulate(qs.begin(), qs.end(), 0.0) / static_cast<double>(groups);
    double ss = 0.0;
    for (double q : qs) ss += (q - mean) * (q - mean);
    study.rows.push_back({runs, groups, std::sqrt(ss / static_cast<double>(groups - 1)), mean});
  }

  // log(sd) has variance ~ 1 / (2 (groups - 1)); weight rows accordingly
  double sw = 0.0, swx = 0.0, swy = 0.0;
  std::size_t used = 0;
  for (const auto& row : study.rows) {
    if (row.sd_q > 0.0) {
      const double w = static_cast<double>(row.groups - 1);
      sw += w;
      swx += w * std::log(static_cast<double>(row.runs));
      swy += w * std::log(row.sd_q);
      ++used;
    }
  }
  if (used >= 2) {
    const double mx = swx / sw, my = swy / sw;
    double sxx = 0.0, sxy = 0.0;
    for (const auto& row : study.rows) {
      if (row.sd_q <= 0.0) continue;
      const double w = static_cast<double>(row.groups - 1);
      const double dx = std::log(static_cast<double>(row.runs)) - mx;
      sxx += w * dx * dx;
      sxy += w * dx * (std::log(row.sd_q) - my);
    }
    if (sxx > 0.0) study.slope = sxy / sxx;
  }
  return study;
}

double precision_sd_ratio(const PrecisionStudy& anti_squeezed, const PrecisionStudy& squeezed) {
  double log_sum = 0.0;
  std::size_t matched = 0;
  for (const auto& a : anti_squeezed.rows) {
    for (const auto& s : squeezed.rows) {
      if (a.runs == s.runs && a.sd_q > 0.0 && s.sd_q > 0.0) {
        log_sum += std::log(a.sd_q / s.sd_q);
        ++matched;
      }
    }
  }
  if (matched == 0) throw DomainError("precision studies share no run count");
  return std::exp(log_sum / static_cast<double>(matched));
}

}  // namespace sqzcam
