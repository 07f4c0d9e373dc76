#pragma once

// PDF / CDF / quantile for the prior families used by the elicitation
// engine. Conventions:
//   - pdf outside the support is 0.
//   - cdf below the support is 0, above it 1.
//   - quantile requires alpha in (0, 1) and throws DomainError otherwise.
//   - invalid parameters throw DomainError.

#include <cmath>
#include <limits>
#include <string_view>
#include <variant>

#include "elicit/errors.hpp"
#include "elicit/numerics/special_functions.hpp"

namespace elicit {

struct NormalParams {
  double mean = 0.0;
  double variance = 1.0;

  double sd() const { return std::sqrt(variance); }
  friend bool operator==(const NormalParams&, const NormalParams&) = default;
};

// σ² ~ IG(shape, scale): density b^a/Γ(a) x^{-(a+1)} exp(-b/x).
struct InverseGammaParams {
  double shape = 1.0;
  double scale = 1.0;
  friend bool operator==(const InverseGammaParams&, const InverseGammaParams&) = default;
};

// Gamma with a rate parameter (mean shape / rate).
struct GammaParams {
  double shape = 1.0;
  double rate = 1.0;
  friend bool operator==(const GammaParams&, const GammaParams&) = default;
};

// log X ~ N(meanlog, sdlog²).
struct LogNormalParams {
  double meanlog = 0.0;
  double sdlog = 1.0;
  friend bool operator==(const LogNormalParams&, const LogNormalParams&) = default;
};

// Beta(alpha, beta) rescaled onto [lower, upper].
struct BetaParams {
  double alpha = 1.0;
  double beta = 1.0;
  double lower = 0.0;
  double upper = 1.0;
  friend bool operator==(const BetaParams&, const BetaParams&) = default;
};

using Distribution =
    std::variant<NormalParams, InverseGammaParams, GammaParams, LogNormalParams, BetaParams>;

namespace numerics {

namespace detail {

inline bool finite(double x) { return std::isfinite(x); }

inline void require_alpha(double alpha) {
  elicit::detail::require_domain(alpha > 0.0 && alpha < 1.0, "quantile: alpha must lie in (0, 1)");
}

inline void require_x(double x) {
  elicit::detail::require_domain(!std::isnan(x), "distribution: x must not be NaN");
}

}  // namespace detail

inline void validate(const NormalParams& p) {
  elicit::detail::require_domain(detail::finite(p.mean) && detail::finite(p.variance) && p.variance > 0.0,
                                 "normal: mean must be finite and variance positive");
}
inline void validate(const InverseGammaParams& p) {
  elicit::detail::require_domain(detail::finite(p.shape) && detail::finite(p.scale) && p.shape > 0.0 &&
                                     p.scale > 0.0,
                                 "inverse gamma: shape and scale must be positive");
}
inline void validate(const GammaParams& p) {
  elicit::detail::require_domain(detail::finite(p.shape) && detail::finite(p.rate) && p.shape > 0.0 && p.rate > 0.0,
                                 "gamma: shape and rate must be positive");
}
inline void validate(const LogNormalParams& p) {
  elicit::detail::require_domain(detail::finite(p.meanlog) && detail::finite(p.sdlog) && p.sdlog > 0.0,
                                 "lognormal: sdlog must be positive");
}
inline void validate(const BetaParams& p) {
  elicit::detail::require_domain(detail::finite(p.alpha) && detail::finite(p.beta) && p.alpha > 0.0 &&
                                     p.beta > 0.0 && detail::finite(p.lower) && detail::finite(p.upper) &&
                                     p.lower < p.upper,
                                 "beta: shapes must be positive and lower < upper");
}

// ---- normal

inline double pdf(double x, const NormalParams& p) {
  validate(p);
  detail::require_x(x);
  const double sd = p.sd();
  return standard_normal_pdf((x - p.mean) / sd) / sd;
}

inline double cdf(double x, const NormalParams& p) {
  validate(p);
  elicit::detail::require_domain(!std::isnan(x), "normal cdf: x must not be NaN");
  return standard_normal_cdf((x - p.mean) / p.sd());
}

inline double quantile(double alpha, const NormalParams& p) {
  validate(p);
  detail::require_alpha(alpha);
  return p.mean + p.sd() * standard_normal_quantile(alpha);
}

// ---- inverse gamma

inline double pdf(double x, const InverseGammaParams& p) {
  validate(p);
  detail::require_x(x);
  if (x <= 0.0 || std::isinf(x)) return 0.0;
  return std::exp(p.shape * std::log(p.scale) - log_gamma(p.shape) - (p.shape + 1.0) * std::log(x) -
                  p.scale / x);
}

// Q(a, b/x); 0 for x <= 0.
inline double cdf(double x, const InverseGammaParams& p) {
  validate(p);
  detail::require_x(x);
  if (x <= 0.0) return 0.0;
  return gamma_q(p.shape, p.scale / x);
}

inline double quantile(double alpha, const InverseGammaParams& p) {
  validate(p);
  detail::require_alpha(alpha);
  return p.scale / gamma_q_inv(p.shape, alpha);
}

// ---- gamma (rate parameterization)

inline double pdf(double x, const GammaParams& p) {
  validate(p);
  detail::require_x(x);
  if (x < 0.0 || std::isinf(x)) return 0.0;
  if (x == 0.0) {
    if (p.shape < 1.0) return std::numeric_limits<double>::infinity();
    return p.shape == 1.0 ? p.rate : 0.0;
  }
  return std::exp(p.shape * std::log(p.rate) - log_gamma(p.shape) + (p.shape - 1.0) * std::log(x) -
                  p.rate * x);
}

inline double cdf(double x, const GammaParams& p) {
  validate(p);
  detail::require_x(x);
  if (x <= 0.0) return 0.0;
  return gamma_p(p.shape, p.rate * x);
}

inline double quantile(double alpha, const GammaParams& p) {
  validate(p);
  detail::require_alpha(alpha);
  return gamma_p_inv(p.shape, alpha) / p.rate;
}

// ---- lognormal

inline double pdf(double x, const LogNormalParams& p) {
  validate(p);
  detail::require_x(x);
  if (x <= 0.0 || std::isinf(x)) return 0.0;
  return standard_normal_pdf((std::log(x) - p.meanlog) / p.sdlog) / (p.sdlog * x);
}

inline double cdf(double x, const LogNormalParams& p) {
  validate(p);
  detail::require_x(x);
  if (x <= 0.0) return 0.0;
  return standard_normal_cdf((std::log(x) - p.meanlog) / p.sdlog);
}

inline double quantile(double alpha, const LogNormalParams& p) {
  validate(p);
  detail::require_alpha(alpha);
  return std::exp(p.meanlog + p.sdlog * standard_normal_quantile(alpha));
}

// ---- scaled beta

inline double pdf(double x, const BetaParams& p) {
  validate(p);
  detail::require_x(x);
  const double width = p.upper - p.lower;
  const double u = (x - p.lower) / width;
  if (u < 0.0 || u > 1.0) return 0.0;
  if (u == 0.0 || u == 1.0) {
    const double edge_shape = u == 0.0 ? p.alpha : p.beta;
    if (edge_shape < 1.0) return std::numeric_limits<double>::infinity();
    if (edge_shape > 1.0) return 0.0;
  }
  const double log_beta = log_gamma(p.alpha) + log_gamma(p.beta) - log_gamma(p.alpha + p.beta);
  double log_density = -log_beta - std::log(width);
  if (p.alpha != 1.0) log_density += (p.alpha - 1.0) * std::log(u);
  if (p.beta != 1.0) log_density += (p.beta - 1.0) * std::log1p(-u);
  return std::exp(log_density);
}

inline double cdf(double x, const BetaParams& p) {
  validate(p);
  detail::require_x(x);
  const double u = (x - p.lower) / (p.upper - p.lower);
  if (u <= 0.0) return 0.0;
  if (u >= 1.0) return 1.0;
  return beta_inc(p.alpha, p.beta, u);
}

inline double quantile(double alpha, const BetaParams& p) {
  validate(p);
  detail::require_alpha(alpha);
  return p.lower + (p.upper - p.lower) * beta_inc_inv(p.alpha, p.beta, alpha);
}

// ---- type-erased access

inline double pdf(double x, const Distribution& d) {
  return std::visit([x](const auto& p) { return pdf(x, p); }, d);
}
inline double cdf(double x, const Distribution& d) {
  return std::visit([x](const auto& p) { return cdf(x, p); }, d);
}
inline double quantile(double alpha, const Distribution& d) {
  return std::visit([alpha](const auto& p) { return quantile(alpha, p); }, d);
}
inline void validate(const Distribution& d) {
  std::visit([](const auto& p) { validate(p); }, d);
}

inline std::string_view family_name(const Distribution& d) {
  struct Namer {
    std::string_view operator()(const NormalParams&) const { return "normal"; }
    std::string_view operator()(const InverseGammaParams&) const { return "inverse-gamma"; }
    std::string_view operator()(const GammaParams&) const { return "gamma"; }
    std::string_view operator()(const LogNormalParams&) const { return "lognormal"; }
    std::string_view operator()(const BetaParams&) const { return "beta"; }
  };
  return std::visit(Namer{}, d);
}

}  // namespace numerics

// Short names for the two primitives the elicitation steps lean on most.
inline double normal_cdf(double x, const NormalParams& p) {
  elicit::detail::require_domain(std::isfinite(x), "normal_cdf: x must be finite");
  return numerics::cdf(x, p);
}
inline double normal_quantile(double alpha, const NormalParams& p) { return numerics::quantile(alpha, p); }
inline double invgamma_cdf(double x, const InverseGammaParams& p) { return numerics::cdf(x, p); }
inline double invgamma_quantile(double alpha, const InverseGammaParams& p) {
  return numerics::quantile(alpha, p);
}
inline double dist_pdf(double x, const Distribution& d) { return numerics::pdf(x, d); }

}  // namespace elicit
