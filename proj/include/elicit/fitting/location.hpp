#pragma once

// Fitting the expert's distribution for the population location (the mean,
// or the median under a transform) to elicited quantiles.

#include <algorithm>
#include <array>
#include <cmath>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "elicit/errors.hpp"
#include "elicit/fitting/judgements.hpp"
#include "elicit/fitting/nelder_mead.hpp"
#include "elicit/numerics/distributions.hpp"

namespace elicit {

enum class LocationFamily { normal, lognormal, beta };

inline std::string_view to_string(LocationFamily f) {
  switch (f) {
    case LocationFamily::normal: return "normal";
    case LocationFamily::lognormal: return "lognormal";
    case LocationFamily::beta: return "beta";
  }
  return "normal";
}

inline LocationFamily parse_location_family(std::string_view s) {
  if (s == "normal") return LocationFamily::normal;
  if (s == "lognormal" || s == "log-normal") return LocationFamily::lognormal;
  if (s == "beta" || s == "beta-scaled" || s == "scaled-beta") return LocationFamily::beta;
  throw InvalidJudgement("unknown location family '" + std::string(s) + "' (expected normal, lognormal or beta)");
}

// Fitted distribution for the population location. dist holds NormalParams,
// LogNormalParams or BetaParams (scaled onto the elicited bounds).
struct LocationPrior {
  Distribution dist = NormalParams{};
  std::vector<QuantileJudgement> fitted_from;
  double residual = 0.0;  // sum of squared CDF errors at the judgements

  LocationFamily family() const {
    if (std::holds_alternative<LogNormalParams>(dist)) return LocationFamily::lognormal;
    if (std::holds_alternative<BetaParams>(dist)) return LocationFamily::beta;
    return LocationFamily::normal;
  }
  double cdf(double x) const { return numerics::cdf(x, dist); }
  double quantile(double alpha) const { return numerics::quantile(alpha, dist); }
  double pdf(double x) const { return numerics::pdf(x, dist); }
  double median() const {
    if (const auto* n = std::get_if<NormalParams>(&dist)) return n->mean;
    if (const auto* l = std::get_if<LogNormalParams>(&dist)) return std::exp(l->meanlog);
    return quantile(0.5);
  }

  friend bool operator==(const LocationPrior&, const LocationPrior&) = default;
};

namespace detail {

inline void check_increasing(std::span<const QuantileJudgement> qs) {
  for (const auto& q : qs) validate(q);
  for (std::size_t i = 1; i < qs.size(); ++i) {
    if (!(qs[i].alpha > qs[i - 1].alpha)) throw InvalidJudgement("quantile levels must be strictly increasing");
    if (!(qs[i].value > qs[i - 1].value)) throw InvalidJudgement("quantile values must be strictly increasing");
  }
}

inline double sum_squared_cdf_error(const Distribution& d, std::span<const QuantileJudgement> qs) {
  double total = 0.0;
  for (const auto& q : qs) {
    const double e = numerics::cdf(q.value, d) - q.alpha;
    total += e * e;
  }
  return total;
}

}  // namespace detail

// Closed-form normal through two quantiles:
//   m = (μ1 z2 - μ2 z1) / (z2 - z1),  v = ((μ2 - μ1) / (z2 - z1))²,  z_i = Φ^{-1}(α_i).
inline NormalParams fit_normal_from_two_quantiles(const QuantileJudgement& q1, const QuantileJudgement& q2) {
  const std::array<QuantileJudgement, 2> qs{q1, q2};
  detail::check_increasing(qs);
  const double z1 = numerics::standard_normal_quantile(q1.alpha);
  const double z2 = numerics::standard_normal_quantile(q2.alpha);
  const double mean = (q1.value * z2 - q2.value * z1) / (z2 - z1);
  const double sd = (q2.value - q1.value) / (z2 - z1);
  return {mean, sd * sd};
}

namespace detail {

struct LocationParameterization {
  LocationFamily family;
  std::optional<std::pair<double, double>> support;

  Distribution decode(const std::array<double, 2>& p) const {
    switch (family) {
      case LocationFamily::normal: return NormalParams{p[0], std::exp(2.0 * p[1])};
      case LocationFamily::lognormal: return LogNormalParams{p[0], std::exp(p[1])};
      case LocationFamily::beta:
        return BetaParams{std::exp(p[0]), std::exp(p[1]), support->first, support->second};
    }
    return NormalParams{};
  }

  std::array<double, 2> initial(std::span<const QuantileJudgement> qs) const {
    const auto& lo = qs.front();
    const auto& hi = qs.back();
    switch (family) {
      case LocationFamily::normal: {
        const auto n = fit_normal_from_two_quantiles(lo, hi);
        return {n.mean, std::log(n.sd())};
      }
      case LocationFamily::lognormal: {
        const auto n = fit_normal_from_two_quantiles({lo.alpha, std::log(lo.value)}, {hi.alpha, std::log(hi.value)});
        return {n.mean, std::log(n.sd())};
      }
      case LocationFamily::beta: {
        const double width = support->second - support->first;
        const auto n = fit_normal_from_two_quantiles({lo.alpha, (lo.value - support->first) / width},
                                                     {hi.alpha, (hi.value - support->first) / width});
        const double mean = std::clamp(n.mean, 0.02, 0.98);
        const double var = std::min(n.variance, 0.5 * mean * (1.0 - mean));
        const double concentration = mean * (1.0 - mean) / var - 1.0;
        return {std::log(mean * concentration), std::log((1.0 - mean) * concentration)};
      }
    }
    return {0.0, 0.0};
  }
};

inline LocationPrior least_squares_location(std::span<const QuantileJudgement> qs, LocationFamily family,
                                            std::optional<std::pair<double, double>> support) {
  if (family == LocationFamily::lognormal && !(qs.front().value > 0.0)) {
    throw DomainError("lognormal location prior requires positive quantile values");
  }
  if (family == LocationFamily::beta) {
    if (!support) throw InvalidJudgement("beta location prior needs the elicited bounds as its support");
    if (!(support->first < support->second)) throw InvalidJudgement("beta support requires lower < upper");
    if (!(qs.front().value > support->first && qs.back().value < support->second)) {
      throw DomainError("beta location quantiles must lie strictly inside the bounds");
    }
  }
  const LocationParameterization param{family, support};
  auto objective = [&](const std::array<double, 2>& p) {
    const Distribution d = param.decode(p);
    try {
      numerics::validate(d);
    } catch (const DomainError&) {
      return std::numeric_limits<double>::infinity();
    }
    return sum_squared_cdf_error(d, qs);
  };
  fitting::NelderMeadOptions options;
  options.max_iterations = 2000;
  options.max_restarts = 8;
  options.x_spread = 1e-12;
  const auto result = fitting::nelder_mead(objective, param.initial(qs), options);
  const Distribution best = param.decode(result.x);
  if (!result.converged || !std::isfinite(result.value)) {
    throw FitFailure("location fit did not converge", result.x[0], result.x[1], result.value);
  }
  return LocationPrior{best, std::vector<QuantileJudgement>(qs.begin(), qs.end()), result.value};
}

}  // namespace detail

// Least-squares fit of a two-parameter family to three or more quantiles,
// minimising Σ (F(value_i) - alpha_i)². beta needs its support (the
// elicited plausible bounds).
inline LocationPrior fit_location_family(std::span<const QuantileJudgement> quantiles, LocationFamily family,
                                         std::optional<std::pair<double, double>> support = std::nullopt) {
  if (quantiles.size() < 3) throw InvalidJudgement("least-squares location fit needs at least three quantiles");
  detail::check_increasing(quantiles);
  return detail::least_squares_location(quantiles, family, support);
}

// Entry point used by the workflow: two quantiles of a normal or lognormal
// family use the exact closed form, everything else goes to least squares.
inline LocationPrior fit_location_prior(std::span<const QuantileJudgement> quantiles, LocationFamily family,
                                        std::optional<std::pair<double, double>> support = std::nullopt) {
  if (quantiles.size() < 2) throw InvalidJudgement("at least two quantiles are required");
  detail::check_increasing(quantiles);
  std::vector<QuantileJudgement> from(quantiles.begin(), quantiles.end());
  if (quantiles.size() == 2 && family == LocationFamily::normal) {
    const Distribution d = fit_normal_from_two_quantiles(quantiles[0], quantiles[1]);
    return LocationPrior{d, std::move(from), detail::sum_squared_cdf_error(d, quantiles)};
  }
  if (quantiles.size() == 2 && family == LocationFamily::lognormal) {
    if (!(quantiles[0].value > 0.0)) throw DomainError("lognormal location prior requires positive quantile values");
    const auto n = fit_normal_from_two_quantiles({quantiles[0].alpha, std::log(quantiles[0].value)},
                                                 {quantiles[1].alpha, std::log(quantiles[1].value)});
    const Distribution d = LogNormalParams{n.mean, n.sd()};
    return LocationPrior{d, std::move(from), detail::sum_squared_cdf_error(d, quantiles)};
  }
  return detail::least_squares_location(quantiles, family, support);
}

}  // namespace elicit
