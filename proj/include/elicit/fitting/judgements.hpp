#pragma once

#include <cmath>
#include <string>

#include "elicit/errors.hpp"

namespace elicit {

// P(quantity <= value) = alpha, as stated by the expert.
struct QuantileJudgement {
  double alpha = 0.5;
  double value = 0.0;
  friend bool operator==(const QuantileJudgement&, const QuantileJudgement&) = default;
};

// Judgements about the proportion theta of the population inside
// [anchor, anchor + width], given the population location equals anchor.
// theta_lo / theta_hi are the expert's quantiles of theta at levels
// alpha_lo / alpha_hi (5th and 95th percentiles by default).
struct ProportionJudgement {
  double anchor = 0.0;
  double width = 1.0;
  double theta_lo = 0.0;
  double theta_hi = 0.0;
  double alpha_lo = 0.05;
  double alpha_hi = 0.95;
  friend bool operator==(const ProportionJudgement&, const ProportionJudgement&) = default;
};

// Two quantiles of the expert's distribution for sigma².
struct VarianceQuantiles {
  double lower_alpha = 0.05;
  double lower = 0.0;
  double upper_alpha = 0.95;
  double upper = 0.0;
  friend bool operator==(const VarianceQuantiles&, const VarianceQuantiles&) = default;
};

inline void validate(const QuantileJudgement& q) {
  if (!(q.alpha > 0.0 && q.alpha < 1.0)) throw InvalidJudgement("quantile level must lie in (0, 1)");
  if (!std::isfinite(q.value)) throw InvalidJudgement("quantile value must be finite");
}

inline void validate(const ProportionJudgement& p) {
  if (!std::isfinite(p.anchor)) throw InvalidJudgement("proportion anchor must be finite");
  if (!(p.width > 0.0) || !std::isfinite(p.width)) throw DomainError("interval width c must be positive");
  if (!(p.theta_lo > 0.0 && p.theta_lo < 0.5) || !(p.theta_hi > 0.0 && p.theta_hi < 0.5)) {
    throw DomainError("theta quantiles must lie in (0, 0.5)");
  }
  if (!(p.theta_lo < p.theta_hi)) throw InvalidJudgement("theta_lo must be smaller than theta_hi");
  if (!(p.alpha_lo > 0.0 && p.alpha_lo < p.alpha_hi && p.alpha_hi < 1.0)) {
    throw InvalidJudgement("theta quantile levels must satisfy 0 < alpha_lo < alpha_hi < 1");
  }
}

inline void validate(const VarianceQuantiles& v) {
  if (!(v.lower > 0.0 && v.lower < v.upper) || !std::isfinite(v.upper)) {
    throw InvalidJudgement("variance quantiles must satisfy 0 < lower < upper");
  }
  if (!(v.lower_alpha > 0.0 && v.lower_alpha < v.upper_alpha && v.upper_alpha < 1.0)) {
    throw InvalidJudgement("variance quantile levels must satisfy 0 < lower_alpha < upper_alpha < 1");
  }
}

// 1 - alpha snapped to a 1e-12 grid so 1 - 0.95 reads back as 0.05.
inline double complement_level(double alpha) { return std::round((1.0 - alpha) * 1e12) / 1e12; }

// Accepts a theta judgement as a proportion in (0, 0.5) or a percentage in
// [1, 50); anything else is outside the proportion question's range.
inline double normalize_theta(double value) {
  if (value > 0.0 && value < 0.5) return value;
  if (value >= 1.0 && value < 50.0) return value / 100.0;
  throw DomainError("theta must be a proportion in (0, 0.5) or a percentage in [1, 50)");
}

// Parses "0.33" or "33%".
inline double parse_theta(const std::string& text) {
  std::size_t used = 0;
  double value = 0.0;
  try {
    value = std::stod(text, &used);
  } catch (const std::exception&) {
    throw DomainError("theta '" + text + "' is not a number");
  }
  const std::string rest = text.substr(used);
  if (rest == "%") {
    if (!(value > 0.0 && value < 50.0)) throw DomainError("theta percentage must lie in (0, 50)");
    return value / 100.0;
  }
  if (!rest.empty()) throw DomainError("theta '" + text + "' has trailing characters");
  return normalize_theta(value);
}

}  // namespace elicit
