#pragma once

// Monotone transforms g with g(X) normal, for skewed or bounded populations.
// The location prior is fitted to the population median phi on the
// observable scale; the normal model's mean is mu = g(phi).

#include <cmath>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>

#include "elicit/errors.hpp"
#include "elicit/fitting/location.hpp"

namespace elicit {

enum class TransformTag { identity, log, logit };

struct Transform {
  TransformTag tag = TransformTag::identity;
  friend bool operator==(const Transform&, const Transform&) = default;
};

inline std::string_view to_string(TransformTag t) {
  switch (t) {
    case TransformTag::identity: return "identity";
    case TransformTag::log: return "log";
    case TransformTag::logit: return "logit";
  }
  return "identity";
}
inline std::string_view to_string(const Transform& t) { return to_string(t.tag); }

inline Transform parse_transform(std::string_view tag) {
  if (tag == "identity") return {TransformTag::identity};
  if (tag == "log") return {TransformTag::log};
  if (tag == "logit") return {TransformTag::logit};
  throw InvalidTransform(tag);
}

inline bool in_support(const Transform& t, double x) {
  switch (t.tag) {
    case TransformTag::identity: return std::isfinite(x);
    case TransformTag::log: return x > 0.0 && std::isfinite(x);
    case TransformTag::logit: return x > 0.0 && x < 1.0;
  }
  return false;
}

inline double apply(const Transform& t, double x) {
  if (!in_support(t, x)) {
    throw DomainError("value " + std::to_string(x) + " is outside the support of the " +
                      std::string(to_string(t)) + " transform");
  }
  switch (t.tag) {
    case TransformTag::identity: return x;
    case TransformTag::log: return std::log(x);
    case TransformTag::logit: return std::log(x) - std::log1p(-x);
  }
  return x;
}

inline double invert(const Transform& t, double y) {
  elicit::detail::require_domain(!std::isnan(y), "transform inverse: value must not be NaN");
  switch (t.tag) {
    case TransformTag::identity: return y;
    case TransformTag::log: return std::exp(y);
    case TransformTag::logit:
      // Split by sign so neither branch overflows.
      if (y >= 0.0) return 1.0 / (1.0 + std::exp(-y));
      {
        const double e = std::exp(y);
        return e / (1.0 + e);
      }
  }
  return y;
}

// dg/dx, for densities moved between scales.
inline double derivative(const Transform& t, double x) {
  if (!in_support(t, x)) throw DomainError("derivative: value outside the transform support");
  switch (t.tag) {
    case TransformTag::identity: return 1.0;
    case TransformTag::log: return 1.0 / x;
    case TransformTag::logit: return 1.0 / (x * (1.0 - x));
  }
  return 1.0;
}

// Plausible bounds [L, U] must sit inside the support (log: L > 0; logit: 0 < L < U < 1).
inline void check_bounds(const Transform& t, double lower, double upper) {
  if (!(std::isfinite(lower) && std::isfinite(upper) && lower < upper)) {
    throw InvalidJudgement("bounds must be finite with L < U");
  }
  if (!in_support(t, lower) || !in_support(t, upper)) {
    throw DomainError("bounds [" + std::to_string(lower) + ", " + std::to_string(upper) +
                      "] fall outside the support of the " + std::string(to_string(t)) + " transform");
  }
}

// Location families whose support matches the transform. A normal phi
// prior could put mass where log or logit is undefined.
inline bool family_compatible(const Transform& t, LocationFamily family) {
  switch (t.tag) {
    case TransformTag::identity: return true;
    case TransformTag::log: return family == LocationFamily::lognormal || family == LocationFamily::beta;
    case TransformTag::logit: return family == LocationFamily::beta;
  }
  return false;
}

inline void check_family(const Transform& t, LocationFamily family) {
  if (!family_compatible(t, family)) {
    throw DomainError("the " + std::string(to_string(family)) + " location family can put mass outside the " +
                      std::string(to_string(t)) + " transform's support");
  }
}

// Observable interval [g^{-1}(m_hat), g^{-1}(m_hat + c)] for the proportion
// question; m_hat lives on the transformed scale.
inline std::pair<double, double> variance_interval_endpoints(double m_hat, double c, const Transform& t) {
  elicit::detail::require_domain(std::isfinite(m_hat), "anchor must be finite");
  elicit::detail::require_domain(c > 0.0 && std::isfinite(c), "interval width c must be positive");
  return {invert(t, m_hat), invert(t, m_hat + c)};
}

struct MedianPrior {
  LocationPrior prior;  // on the observable (phi) scale
  double anchor = 0.0;  // m_hat = g(median of phi), on the transformed scale
};

// Fit the median prior on the observable scale and derive the variance
// anchor. With the identity transform and two quantiles this is the plain
// two-quantile normal fit.
inline MedianPrior elicit_median_prior(std::span<const QuantileJudgement> quantiles, LocationFamily family,
                                       const Transform& t,
                                       std::optional<std::pair<double, double>> support = std::nullopt) {
  for (const auto& q : quantiles) {
    if (!in_support(t, q.value)) {
      throw DomainError("median quantile " + std::to_string(q.value) + " is outside the " +
                        std::string(to_string(t)) + " transform's support");
    }
  }
  check_family(t, family);
  auto prior = fit_location_prior(quantiles, family, support);
  const double anchor = apply(t, prior.median());
  return {std::move(prior), anchor};
}

}  // namespace elicit
