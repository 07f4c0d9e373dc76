#pragma once

// From proportion judgements to a prior on the population variance.
//
// With the population centred at m and sd sigma, the proportion inside
// [m, m + c] is Φ(c / sigma) - 1/2. Inverting that monotone map turns a
// quantile of theta into the opposite quantile of sigma²:
//   sigma²_(1 - alpha) = (c / Φ^{-1}(theta_(alpha) + 1/2))².
// A two-parameter family is then fitted to the two variance quantiles by
// least squares on the CDF.

#include <array>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "elicit/errors.hpp"
#include "elicit/fitting/judgements.hpp"
#include "elicit/fitting/nelder_mead.hpp"
#include "elicit/numerics/distributions.hpp"

namespace elicit {

enum class PrecisionFamily { inverse_gamma, gamma_precision, lognormal_precision };

inline std::string_view to_string(PrecisionFamily f) {
  switch (f) {
    case PrecisionFamily::inverse_gamma: return "inverse-gamma";
    case PrecisionFamily::gamma_precision: return "gamma-precision";
    case PrecisionFamily::lognormal_precision: return "lognormal-precision";
  }
  return "inverse-gamma";
}

inline PrecisionFamily parse_precision_family(std::string_view s) {
  if (s == "inverse-gamma" || s == "invgamma" || s == "ig") return PrecisionFamily::inverse_gamma;
  if (s == "gamma-precision" || s == "gamma") return PrecisionFamily::gamma_precision;
  if (s == "lognormal-precision" || s == "lognormal") return PrecisionFamily::lognormal_precision;
  throw InvalidJudgement("unknown variance family '" + std::string(s) +
                         "' (expected inverse-gamma, gamma-precision or lognormal-precision)");
}

// Prior on sigma². params by family:
//   inverse_gamma        sigma² ~ IG(shape = p1, scale = p2)
//   gamma_precision      1/sigma² ~ Gamma(shape = p1, rate = p2)
//   lognormal_precision  log(1/sigma²) ~ N(meanlog = p1, sdlog = p2)
struct VariancePrior {
  PrecisionFamily family = PrecisionFamily::inverse_gamma;
  double p1 = 1.0;
  double p2 = 1.0;
  VarianceQuantiles target;
  double residual = 0.0;

  static VariancePrior inverse_gamma(InverseGammaParams ig) {
    return {PrecisionFamily::inverse_gamma, ig.shape, ig.scale, {}, 0.0};
  }

  void validate() const {
    elicit::detail::require_domain(std::isfinite(p1) && std::isfinite(p2) && p2 > 0.0 &&
                                       (family == PrecisionFamily::lognormal_precision || p1 > 0.0),
                                   "variance prior parameters out of range");
  }

  // P(sigma² <= x).
  double cdf(double x) const {
    validate();
    if (!(x > 0.0)) return 0.0;
    switch (family) {
      case PrecisionFamily::inverse_gamma:
      case PrecisionFamily::gamma_precision:
        // Gamma(a, rate b) on the precision is IG(a, b) on the variance.
        return numerics::gamma_q(p1, p2 / x);
      case PrecisionFamily::lognormal_precision:
        return numerics::standard_normal_cdf((std::log(x) + p1) / p2);
    }
    return 0.0;
  }

  double quantile(double alpha) const {
    validate();
    elicit::detail::require_domain(alpha > 0.0 && alpha < 1.0, "variance quantile: alpha must lie in (0, 1)");
    switch (family) {
      case PrecisionFamily::inverse_gamma:
      case PrecisionFamily::gamma_precision:
        return p2 / numerics::gamma_q_inv(p1, alpha);
      case PrecisionFamily::lognormal_precision:
        return std::exp(-p1 + p2 * numerics::standard_normal_quantile(alpha));
    }
    return 0.0;
  }

  double pdf(double x) const {
    validate();
    if (!(x > 0.0) || std::isinf(x)) return 0.0;
    switch (family) {
      case PrecisionFamily::inverse_gamma:
      case PrecisionFamily::gamma_precision:
        return numerics::pdf(x, InverseGammaParams{p1, p2});
      case PrecisionFamily::lognormal_precision:
        return numerics::pdf(x, LogNormalParams{-p1, p2});
    }
    return 0.0;
  }

  // Distribution of sigma² itself (lognormal precision is lognormal variance).
  Distribution variance_distribution() const {
    if (family == PrecisionFamily::lognormal_precision) return LogNormalParams{-p1, p2};
    return InverseGammaParams{p1, p2};
  }

  friend bool operator==(const VariancePrior&, const VariancePrior&) = default;
};

// sigma² quantile implied by a theta quantile and interval width c.
inline double sigma2_quantile_from_theta(double c, double theta) {
  elicit::detail::require_domain(c > 0.0 && std::isfinite(c), "interval width c must be positive");
  elicit::detail::require_domain(theta > 0.0 && theta < 0.5, "theta must lie in (0, 0.5)");
  const double z = numerics::standard_normal_quantile(theta + 0.5);
  const double sigma = c / z;
  return sigma * sigma;
}

// theta_lo (level alpha_lo) gives the upper variance quantile at level
// 1 - alpha_lo; theta_hi gives the lower one.
inline VarianceQuantiles variance_quantiles_from_proportion(const ProportionJudgement& p) {
  validate(p);
  return {complement_level(p.alpha_hi), sigma2_quantile_from_theta(p.width, p.theta_hi),
          complement_level(p.alpha_lo), sigma2_quantile_from_theta(p.width, p.theta_lo)};
}

// Inverse of the theta -> sigma² map: proportion in [m, m + c] for a given sigma².
inline double theta_from_sigma2(double c, double sigma2) {
  elicit::detail::require_domain(c > 0.0 && sigma2 > 0.0, "theta_from_sigma2: c and sigma² must be positive");
  return numerics::standard_normal_cdf(c / std::sqrt(sigma2)) - 0.5;
}

inline constexpr double kShapeCap = 1e6;
inline constexpr double kVarianceFitTolerance = 1e-12;

namespace detail {

inline double variance_objective(const VariancePrior& prior, const VarianceQuantiles& vq) {
  const double e1 = prior.cdf(vq.lower) - vq.lower_alpha;
  const double e2 = prior.cdf(vq.upper) - vq.upper_alpha;
  return e1 * e1 + e2 * e2;
}

}  // namespace detail

// Least-squares fit of the chosen family to two sigma² quantiles, searched
// over log parameters (positivity by construction). Initialised by treating
// log sigma² as normal through the two quantiles and matching the mean and
// variance of the implied precision with a gamma. Throws FitFailure when the
// objective does not reach 1e-12 or the shape would exceed 1e6.
inline VariancePrior fit_variance_prior(const VarianceQuantiles& vq,
                                        PrecisionFamily family = PrecisionFamily::inverse_gamma) {
  validate(vq);
  const double z_lo = numerics::standard_normal_quantile(vq.lower_alpha);
  const double z_hi = numerics::standard_normal_quantile(vq.upper_alpha);
  const double log_sd = (std::log(vq.upper) - std::log(vq.lower)) / (z_hi - z_lo);
  const double log_mean = std::log(vq.lower) - log_sd * z_lo;

  VariancePrior prior{family, 0.0, 0.0, vq, 0.0};
  if (family == PrecisionFamily::lognormal_precision) {
    // Exact: log sigma² ~ N(log_mean, log_sd²), precision flips the sign of the mean.
    prior.p1 = -log_mean;
    prior.p2 = log_sd;
    prior.residual = detail::variance_objective(prior, vq);
    return prior;
  }

  const double spread = std::expm1(log_sd * log_sd);
  const double shape0 = 1.0 / spread;
  const double rate0 = std::exp(log_mean - 0.5 * log_sd * log_sd) / spread;
  if (!(shape0 < kShapeCap)) {
    throw FitFailure("variance quantiles are too close together: the fitted shape would exceed the cap of 1e6",
                     shape0, rate0, std::numeric_limits<double>::infinity());
  }

  const double log_cap = std::log(kShapeCap);
  auto objective = [&](const std::array<double, 2>& p) {
    if (p[0] > log_cap) return std::numeric_limits<double>::infinity();
    VariancePrior candidate{family, std::exp(p[0]), std::exp(p[1]), vq, 0.0};
    return detail::variance_objective(candidate, vq);
  };
  fitting::NelderMeadOptions options;
  options.max_iterations = 500;
  options.target = 1e-26;
  options.initial_step = 0.1;
  const auto result = fitting::nelder_mead(objective, std::array<double, 2>{std::log(shape0), std::log(rate0)},
                                           options);
  prior.p1 = std::exp(result.x[0]);
  prior.p2 = std::exp(result.x[1]);
  prior.residual = result.value;
  if (!(result.value <= kVarianceFitTolerance)) {
    throw FitFailure("variance fit did not reach the 1e-12 objective tolerance", prior.p1, prior.p2, result.value);
  }
  return prior;
}

// Facilitator's default interval width: a third of the way from the anchor to U.
inline double suggest_c(double m_hat, double upper) {
  elicit::detail::require_domain(std::isfinite(m_hat) && std::isfinite(upper) && upper > m_hat,
                                 "suggest_c: upper bound must exceed the anchor");
  return (upper - m_hat) / 3.0;
}

inline constexpr double kRobustThetaLow = 0.2;
inline constexpr double kRobustThetaHigh = 0.45;

struct ThetaSensitivity {
  double log_sigma = 0.0;
  double gradient = 0.0;  // |d log sigma / d theta|
  bool in_robust_band = false;
};

inline double log_sigma_from_theta(double c, double theta) {
  return 0.5 * std::log(sigma2_quantile_from_theta(c, theta));
}

// log sigma = log c - log Φ^{-1}(theta + 1/2) and its slope in theta.
inline ThetaSensitivity theta_sensitivity(double theta, double c) {
  elicit::detail::require_domain(theta > 0.0 && theta < 0.5 && c > 0.0, "theta must lie in (0, 0.5), c > 0");
  ThetaSensitivity s;
  s.log_sigma = std::log(c) - std::log(numerics::standard_normal_quantile(theta + 0.5));
  const double h = std::min({1e-6, 0.5 * theta, 0.5 * (0.5 - theta)});
  s.gradient = std::abs(log_sigma_from_theta(c, theta + h) - log_sigma_from_theta(c, theta - h)) / (2.0 * h);
  s.in_robust_band = theta >= kRobustThetaLow && theta <= kRobustThetaHigh;
  return s;
}

struct SensitivityPoint {
  double theta;
  double log_sigma;
  double gradient;
};

// Plot data for log sigma against theta over (0, 0.5), c = 1 (drops the log c offset).
inline std::vector<SensitivityPoint> theta_sensitivity_curve(int points = 99) {
  elicit::detail::require_domain(points >= 2, "sensitivity curve needs at least two points");
  std::vector<SensitivityPoint> out;
  out.reserve(static_cast<std::size_t>(points));
  for (int i = 1; i <= points; ++i) {
    const double theta = 0.5 * i / (points + 1);
    const auto s = theta_sensitivity(theta, 1.0);
    out.push_back({theta, s.log_sigma, s.gradient});
  }
  return out;
}

// Advisory text when either theta judgement sits outside [0.2, 0.45].
inline std::optional<std::string> robustness_warning(double theta_lo, double theta_hi) {
  const bool lo_ok = theta_lo >= kRobustThetaLow && theta_lo <= kRobustThetaHigh;
  const bool hi_ok = theta_hi >= kRobustThetaLow && theta_hi <= kRobustThetaHigh;
  if (lo_ok && hi_ok) return std::nullopt;
  return std::string(
      "theta quantiles outside [0.2, 0.45]: the implied sigma quantiles are sensitive to small changes in "
      "these judgements; consider repeating the question with a larger interval width c");
}

}  // namespace elicit
