#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "elicit/fitting/variance.hpp"
#include "elicit/transforms.hpp"
#include "oracles.hpp"

namespace elicit {
namespace {

const Transform kIdentity{TransformTag::identity};
const Transform kLog{TransformTag::log};
const Transform kLogit{TransformTag::logit};

TEST(Transform, Examples) {
  EXPECT_EQ(apply(kIdentity, 3.7), 3.7);
  EXPECT_EQ(apply(kLog, 1.0), 0.0);
  EXPECT_EQ(invert(kLog, 0.0), 1.0);
  EXPECT_EQ(apply(kLogit, 0.5), 0.0);
  EXPECT_NEAR(invert(kLogit, 2.0), 1.0 / (1.0 + std::exp(-2.0)), 1e-15);
  EXPECT_NEAR(invert(kLogit, 2.0), 0.880797, 1e-6);
}

TEST(Transform, ParseTags) {
  EXPECT_EQ(parse_transform("identity"), kIdentity);
  EXPECT_EQ(parse_transform("log"), kLog);
  EXPECT_EQ(parse_transform("logit"), kLogit);
  try {
    parse_transform("cubic");
    FAIL() << "expected InvalidTransform";
  } catch (const InvalidTransform& e) {
    EXPECT_EQ(e.code(), "invalid-transform");
  }
}

TEST(Transform, SupportErrors) {
  EXPECT_THROW(apply(kLog, 0.0), DomainError);
  EXPECT_THROW(apply(kLog, -1.0), DomainError);
  EXPECT_THROW(apply(kLogit, 0.0), DomainError);
  EXPECT_THROW(apply(kLogit, 1.0), DomainError);
  EXPECT_THROW(apply(kIdentity, std::nan("")), DomainError);
  EXPECT_THROW(check_bounds(kLog, 0.0, 10.0), DomainError);
  EXPECT_THROW(check_bounds(kLogit, 0.2, 1.5), DomainError);
  EXPECT_THROW(check_bounds(kIdentity, 5.0, 5.0), InvalidJudgement);
  EXPECT_NO_THROW(check_bounds(kLogit, 0.01, 0.99));
}

TEST(Transform, RoundTripAndMonotoneProperty) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> unit(1e-9, 1.0 - 1e-9);
  std::uniform_real_distribution<double> wide(-1e3, 1e3);
  std::uniform_real_distribution<double> positive_log(-30.0, 30.0);
  for (int i = 0; i < 2000; ++i) {
    const double x = wide(rng);
    EXPECT_EQ(invert(kIdentity, apply(kIdentity, x)), x);
    const double p = std::exp(positive_log(rng));
    EXPECT_NEAR(invert(kLog, apply(kLog, p)), p, 1e-12 * p);
    const double u = unit(rng);
    EXPECT_NEAR(invert(kLogit, apply(kLogit, u)), u, 1e-12);
    const double v = unit(rng);
    if (u < v) {
      EXPECT_LT(apply(kLogit, u), apply(kLogit, v));
    }
  }
  EXPECT_GT(invert(kLogit, 800.0), 0.0);
  EXPECT_LE(invert(kLogit, 800.0), 1.0);
  EXPECT_GE(invert(kLogit, -800.0), 0.0);
}

TEST(Transform, DerivativeMatchesDifference) {
  for (double x : {0.1, 0.5, 0.9}) {
    const double h = 1e-6;
    EXPECT_NEAR(derivative(kLogit, x), (apply(kLogit, x + h) - apply(kLogit, x - h)) / (2 * h), 1e-4);
    EXPECT_NEAR(derivative(kLog, x), 1.0 / x, 1e-15);
  }
}

TEST(VarianceIntervalEndpoints, Examples) {
  const auto id = variance_interval_endpoints(35.0, 10.0, kIdentity);
  EXPECT_EQ(id.first, 35.0);
  EXPECT_EQ(id.second, 45.0);
  const auto lg = variance_interval_endpoints(0.0, 1.0, kLog);
  EXPECT_EQ(lg.first, 1.0);
  EXPECT_NEAR(lg.second, std::numbers::e, 1e-15);
  const auto lt = variance_interval_endpoints(0.0, 1.0, kLogit);
  EXPECT_EQ(lt.first, 0.5);
  EXPECT_NEAR(lt.second, 1.0 / (1.0 + std::exp(-1.0)), 1e-15);
  EXPECT_NEAR(lt.second, 0.731059, 1e-6);
  EXPECT_THROW(variance_interval_endpoints(0.0, 0.0, kLog), DomainError);
}

TEST(VarianceIntervalEndpoints, OrderedProperty) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> anchor(-5.0, 5.0), width(1e-3, 3.0);
  for (int i = 0; i < 500; ++i) {
    const double m = anchor(rng), c = width(rng);
    for (const auto& t : {kIdentity, kLog, kLogit}) {
      const auto [k1, k2] = variance_interval_endpoints(m, c, t);
      EXPECT_LT(k1, k2);
    }
  }
}

TEST(VarianceIntervalEndpoints, WidthEquationIndependentOfTransform) {
  // Same transformed-scale judgements give the same variance quantiles for every transform.
  const ProportionJudgement pj{0.3, 0.8, 0.30, 0.40};
  const auto base = variance_quantiles_from_proportion(pj);
  for (const auto& t : {kIdentity, kLog, kLogit}) {
    const auto [k1, k2] = variance_interval_endpoints(pj.anchor, pj.width, t);
    ProportionJudgement again = pj;
    again.width = apply(t, k2) - apply(t, k1);
    const auto vq = variance_quantiles_from_proportion(again);
    EXPECT_NEAR(vq.lower, base.lower, 1e-12 * base.lower) << to_string(t);
    EXPECT_NEAR(vq.upper, base.upper, 1e-12 * base.upper) << to_string(t);
  }
}

TEST(MedianPrior, IdentityReducesToTwoQuantileFit) {
  const std::vector<QuantileJudgement> two{{0.05, 30.0}, {0.95, 40.0}};
  const auto mp = elicit_median_prior(two, LocationFamily::normal, kIdentity);
  EXPECT_EQ(std::get<NormalParams>(mp.prior.dist), fit_normal_from_two_quantiles(two[0], two[1]));
  EXPECT_EQ(mp.anchor, 35.0);

  const std::vector<QuantileJudgement> three{{0.05, 30.0}, {0.5, 35.0}, {0.95, 40.0}};
  const auto fitted = elicit_median_prior(three, LocationFamily::normal, kIdentity);
  const auto closed = fit_normal_from_two_quantiles(three[0], three[2]);
  const auto& n = std::get<NormalParams>(fitted.prior.dist);
  EXPECT_NEAR(n.mean, closed.mean, 1e-6);
  EXPECT_NEAR(n.variance, closed.variance, 1e-6);
  EXPECT_LE(fitted.prior.residual, 1e-8);
}

TEST(MedianPrior, LogTransformRecoversLogNormal) {
  const LogNormalParams truth{2.0, 0.3};
  std::vector<QuantileJudgement> qs;
  for (double a : {0.1, 0.5, 0.9}) {
    qs.push_back({a, std::exp(truth.meanlog + truth.sdlog * oracle::normal_quantile(a))});
  }
  const auto mp = elicit_median_prior(qs, LocationFamily::lognormal, kLog);
  const auto& l = std::get<LogNormalParams>(mp.prior.dist);
  EXPECT_NEAR(l.meanlog, 2.0, 1e-6);
  EXPECT_NEAR(l.sdlog, 0.3, 1e-6);
  EXPECT_NEAR(mp.anchor, 2.0, 1e-6);
}

TEST(MedianPrior, LogitWithInconsistentBetaQuantiles) {
  const std::pair<double, double> support{0.05, 0.95};
  const std::vector<QuantileJudgement> qs{{0.1, 0.2}, {0.5, 0.4}, {0.9, 0.85}};
  const auto mp = elicit_median_prior(qs, LocationFamily::beta, kLogit, support);
  const auto& b = std::get<BetaParams>(mp.prior.dist);
  EXPECT_GT(mp.prior.residual, 1e-3);

  auto objective = [&](double a, double bb) {
    double total = 0.0;
    for (const auto& q : qs) {
      const double e = oracle::beta_cdf((q.value - support.first) / (support.second - support.first), a, bb) - q.alpha;
      total += e * e;
    }
    return total;
  };
  // The objective is flat along a ridge, so compare objective values and
  // require the fit to sit close to the grid optimum.
  const auto coarse = oracle::grid_search(objective, 1.0, 5.0, 1.0, 7.0, 40);
  const auto fine = oracle::grid_search(objective, coarse.first - 0.1, coarse.first + 0.1, coarse.second - 0.15,
                                        coarse.second + 0.15, 40);
  EXPECT_NEAR(mp.prior.residual, objective(b.alpha, b.beta), 1e-9);
  EXPECT_LE(mp.prior.residual, objective(fine.first, fine.second) + 1e-12);
  EXPECT_NEAR(mp.prior.residual, objective(fine.first, fine.second), 1e-5);
  EXPECT_NEAR(b.alpha, fine.first, 0.1);
  EXPECT_NEAR(b.beta, fine.second, 0.15);
  EXPECT_NEAR(mp.anchor, apply(kLogit, mp.prior.median()), 1e-15);
}

TEST(MedianPrior, FamilyAndSupportChecks) {
  const std::vector<QuantileJudgement> qs{{0.1, 0.2}, {0.5, 0.4}, {0.9, 0.85}};
  EXPECT_THROW(elicit_median_prior(qs, LocationFamily::normal, kLogit), DomainError);
  EXPECT_THROW(elicit_median_prior(qs, LocationFamily::lognormal, kLogit), DomainError);
  const std::vector<QuantileJudgement> negative{{0.1, -1.0}, {0.5, 1.0}, {0.9, 3.0}};
  EXPECT_THROW(elicit_median_prior(negative, LocationFamily::lognormal, kLog), DomainError);
  EXPECT_THROW(elicit_median_prior(negative, LocationFamily::normal, kLog), DomainError);
}

}  // namespace
}  // namespace elicit
