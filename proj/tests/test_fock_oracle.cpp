#include <gtest/gtest.h>

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/normal.hpp>
#include <cmath>
#include <numbers>
#include <sstream>

#include "sqzcam/errors.hpp"
#include "sqzcam/fock_oracle.hpp"
#include "sqzcam/gaussian_state.hpp"
#include "sqzcam/philox.hpp"

using namespace sqzcam;

namespace {

constexpr double kPi = std::numbers::pi;
const double kR1 = std::asinh(1.0);  // n_s = 1

double rel(double got, double want) { return std::abs(got - want) / std::abs(want); }

// Upper chi-square quantile matching a two-sided 4 sigma normal tail.
double chi2_critical(double dof) {
  const double p = 2.0 * boost::math::cdf(boost::math::complement(boost::math::normal(), 4.0));
  return boost::math::quantile(boost::math::complement(boost::math::chi_squared(dof), p));
}

// Pearson statistic, pooling cells with expected count below 5 into the tail.
std::pair<double, double> pearson(const std::vector<std::size_t>& observed, const FockDistribution& d,
                                  std::size_t draws) {
  double chi2 = 0.0, pooled_e = 0.0, pooled_o = 0.0;
  int cells = 0;
  for (int n = 0; n <= d.cutoff(); ++n) {
    const double e = d.prob(n) * draws;
    const double o = n < static_cast<int>(observed.size()) ? observed[n] : 0.0;
    if (e < 5.0) {
      pooled_e += e;
      pooled_o += o;
      continue;
    }
    chi2 += (o - e) * (o - e) / e;
    ++cells;
  }
  if (pooled_e > 0.0) {
    chi2 += (pooled_o - pooled_e) * (pooled_o - pooled_e) / pooled_e;
    ++cells;
  }
  return {chi2, cells - 1.0};
}

}  // namespace

TEST(FockDistribution, ValidatesEntriesAndTail) {
  EXPECT_THROW(FockDistribution({0.5, -0.1}, 1.0), DomainError);
  EXPECT_THROW(FockDistribution({0.7, 0.7}, 1.0), DomainError);
  EXPECT_THROW(FockDistribution({0.5, 0.4}, 1e-3), InsufficientCutoffError);
  const FockDistribution d({0.5, 0.4}, 0.2);
  EXPECT_NEAR(d.tail_mass(), 0.1, 1e-15);
  EXPECT_EQ(d.cutoff(), 1);
  EXPECT_EQ(d.prob(5), 0.0);
}

TEST(DsvDistribution, Vacuum) {
  const auto d = dsv_distribution(0.0, 0.0, 0.0, 10);
  EXPECT_EQ(d.prob(0), 1.0);
  for (int n = 1; n <= 10; ++n) EXPECT_EQ(d.prob(n), 0.0);
}

TEST(DsvDistribution, SqueezedVacuumHasOnlyEvenPhotonNumbers) {
  const auto d = dsv_distribution(0.0, 0.8, 0.0, 200);
  for (int n = 1; n <= d.cutoff(); n += 2) EXPECT_EQ(d.prob(n), 0.0) << n;
  const FockMoments m = moments(d);
  EXPECT_LT(rel(m.mean, std::pow(std::sinh(0.8), 2)), 1e-10);
}

TEST(DsvDistribution, CoherentStateIsPoisson) {
  const auto d = dsv_distribution(1.0, 0.0, 0.0, 40);
  for (int n = 0; n <= 20; ++n) {
    EXPECT_LT(rel(d.prob(n), std::exp(-1.0 - std::lgamma(n + 1.0))), 1e-12) << n;
  }
}

TEST(DsvDistribution, MomentsAtSqueezedPhase) {
  const FockMoments m = moments(dsv_distribution(2.0, kR1, 0.0, 120));
  EXPECT_LT(rel(m.mean, 5.0), 1e-9);
  EXPECT_LT(rel(m.variance, 4 * (3 - 2 * std::sqrt(2.0)) + 4), 1e-9);
}

TEST(DsvDistribution, MomentsAtAntiSqueezedPhase) {
  const FockMoments m = moments(dsv_distribution(2.0, kR1, kPi / 2, 200));
  EXPECT_LT(rel(m.variance, 4 * (3 + 2 * std::sqrt(2.0)) + 4), 1e-9);
  EXPECT_NEAR(m.variance, 27.314, 1e-3);
}

TEST(DsvDistribution, InsufficientCutoff) {
  EXPECT_THROW(dsv_distribution(3.0, kR1, 0.0, 5), InsufficientCutoffError);
}

TEST(DsvAmplitudes, Normalised) {
  for (double b : {0.0, 0.7, 3.0}) {
    for (double r : {0.0, 0.4, kR1, 1.2}) {
      const FockAmplitudes a = dsv_amplitudes(b, r, 400);
      double s = 0.0;
      for (const auto& c : a.amps) s += std::norm(c);
      EXPECT_NEAR(s + a.tail_mass, 1.0, 1e-12);
      EXPECT_LT(a.tail_mass, 1e-12);
    }
  }
}

TEST(DsvDistribution, MatchesClosedFormsOverParameterBox) {
  for (double na : {0.5, 2.0, 4.0, 10.0}) {
    for (double ns : {0.25, 1.0, 2.0}) {
      for (double phi : {0.0, kPi / 4, kPi / 2}) {
        const StateParams p{na, ns, phi};
        const auto d = dsv_distribution_auto(std::sqrt(na), p.squeeze_r(), phi, 1e-14);
        const FockMoments m = moments(d);
        EXPECT_LT(rel(m.mean, mean_total(p)), 1e-9);
        EXPECT_LT(rel(m.variance, variance_total(p)), 1e-9);
        for (double eta : {0.1, 0.25, 0.5, 0.9}) {
          const FockMoments ml = moments(apply_loss(d, eta));
          EXPECT_LT(rel(ml.mean, pixel_mean(p, eta)), 1e-9);
          EXPECT_LT(rel(ml.variance, pixel_variance(p, eta)), 1e-9);
        }
      }
    }
  }
}

TEST(ApplyLoss, Identity) {
  const auto d = dsv_distribution_auto(1.5, 0.5, 0.3);
  const auto l = apply_loss(d, 1.0);
  for (int n = 0; n <= d.cutoff(); ++n) EXPECT_NEAR(l.prob(n), d.prob(n), 1e-15);
}

TEST(ApplyLoss, TotalLoss) {
  const auto l = apply_loss(dsv_distribution_auto(1.5, 0.5, 0.3), 0.0);
  EXPECT_NEAR(l.prob(0), 1.0, 1e-12);
  for (int n = 1; n <= l.cutoff(); ++n) EXPECT_EQ(l.prob(n), 0.0);
}

TEST(ApplyLoss, PoissonClosure) {
  const auto l = apply_loss(poisson_distribution(6.0, 80), 0.35);
  const auto want = poisson_distribution(6.0 * 0.35, 80);
  for (int n = 0; n <= 40; ++n) EXPECT_NEAR(l.prob(n), want.prob(n), 1e-14) << n;
}

TEST(ApplyLoss, PixelExample) {
  const StateParams p{10.0, 1.0, 0.0};
  const auto d = dsv_distribution_auto(std::sqrt(10.0), p.squeeze_r(), 0.0, 1e-14);
  EXPECT_LT(rel(moments(apply_loss(d, 0.5)).variance, 4.178932188134524755991556), 1e-9);
}

TEST(ApplyLoss, Composition) {
  for (double phi : {0.0, kPi / 2}) {
    const auto d = dsv_distribution_auto(2.0, kR1, phi);
    for (auto [e1, e2] : {std::pair{0.7, 0.4}, {0.9, 0.1}, {0.33, 0.66}}) {
      const auto two = apply_loss(apply_loss(d, e1), e2);
      const auto one = apply_loss(d, e1 * e2);
      for (int n = 0; n <= d.cutoff(); ++n) EXPECT_NEAR(two.prob(n), one.prob(n), 1e-12);
    }
  }
}

TEST(ApplyLoss, RejectsBadEta) {
  const auto d = poisson_distribution(1.0, 30);
  EXPECT_THROW(apply_loss(d, -0.1), DomainError);
  EXPECT_THROW(apply_loss(d, 1.1), DomainError);
}

TEST(Moments, Examples) {
  const FockMoments v = moments(dsv_distribution(0.0, 0.0, 0.0, 4));
  EXPECT_EQ(v.mean, 0.0);
  EXPECT_EQ(v.variance, 0.0);
  const FockMoments p = moments(poisson_distribution(3.0, 60));
  EXPECT_LT(p.tail_mass, 1e-12);
  EXPECT_LT(rel(p.mean, 3.0), 1e-9);
  EXPECT_LT(rel(p.variance, 3.0), 1e-9);
}

TEST(Sampling, VacuumAlwaysZero) {
  const auto d = dsv_distribution(0.0, 0.0, 0.0, 3);
  Philox4x32 eng(1, 0, 0);
  for (int i = 0; i < 1000; ++i) EXPECT_EQ(d.sample(eng), 0);
}

TEST(Sampling, PoissonChiSquare) {
  const auto d = poisson_distribution(2.0, 40);
  const std::size_t draws = 1000000;
  std::vector<std::size_t> counts(41, 0);
  Philox4x32 eng(2024, 7, 0);
  for (std::size_t i = 0; i < draws; ++i) ++counts[d.sample(eng)];
  const auto [chi2, dof] = pearson(counts, d, draws);
  EXPECT_LT(chi2, chi2_critical(dof)) << "dof " << dof;
}

TEST(Sampling, DsvMomentsWithinThreeSigma) {
  const auto d = dsv_distribution_auto(2.0, kR1, 0.0);
  const FockMoments m = moments(d);
  const std::size_t draws = 1000000;
  Philox4x32 eng(99, 0, 0);
  double s1 = 0.0, s2 = 0.0, s4 = 0.0;
  std::vector<double> xs(draws);
  for (auto& x : xs) {
    x = static_cast<double>(d.sample(eng));
    s1 += x;
  }
  const double mean = s1 / draws;
  for (double x : xs) {
    s2 += (x - mean) * (x - mean);
    s4 += std::pow(x - m.mean, 4);
  }
  const double var = s2 / (draws - 1);
  const double mu4 = s4 / draws;
  EXPECT_LT(std::abs(mean - m.mean), 3.0 * std::sqrt(m.variance / draws));
  EXPECT_LT(std::abs(var - m.variance), 3.0 * std::sqrt((mu4 - m.variance * m.variance) / draws));
}

TEST(ExactMix, NoMixingLeavesSqueezedVacuum) {
  const int total = mix_cutoff_for(3.0, kR1);
  const auto d = exact_mix_and_trace(3.0, kR1, 0.0, total);
  const auto sv = dsv_distribution_auto(0.0, kR1, 0.0);
  for (int n = 0; n <= 30; ++n) EXPECT_NEAR(d.prob(n), sv.prob(n), 1e-10) << n;
}

TEST(ExactMix, CoherentInputGivesPoisson) {
  const double theta = 0.3;
  const int total = mix_cutoff_for(4.0, 0.0);
  const auto d = exact_mix_and_trace(4.0, 0.0, theta, total);
  const double lambda = 16.0 * std::pow(std::sin(theta), 2);
  const auto want = poisson_distribution(lambda, 60);
  for (int n = 0; n <= 30; ++n) EXPECT_NEAR(d.prob(n), want.prob(n), 1e-10) << n;
}

TEST(ExactMix, GapToApproximatedStateShrinksAsThetaSquared) {
  const double alpha = 10.0;
  const int total = mix_cutoff_for(alpha, kR1);
  std::vector<double> gaps;
  for (double theta : {0.2, 0.1, 0.05}) {
    const FockMoments exact = moments(exact_mix_and_trace(alpha, kR1, theta, total));
    const FockMoments approx = moments(dsv_distribution_auto(alpha * std::sin(theta), kR1, 0.0));
    if (theta == 0.1) {
      EXPECT_LT(rel(exact.mean, approx.mean), 0.05);
      EXPECT_LT(rel(exact.variance, approx.variance), 0.05);
    }
    gaps.push_back(exact.mean - approx.mean);
  }
  EXPECT_NEAR(gaps[0] / gaps[1], 4.0, 0.8);
  EXPECT_NEAR(gaps[1] / gaps[2], 4.0, 0.8);
}

TEST(WriteCsv, Format) {
  std::ostringstream os;
  write_csv(dsv_distribution(0.0, 0.0, 0.0, 1), os);
  EXPECT_EQ(os.str(), "n,probability\n0,1\n1,0\n");
}
