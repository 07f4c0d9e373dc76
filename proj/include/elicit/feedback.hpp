#pragma once

// Monte Carlo feedback on the fitted priors: draw (mu, sigma²) pairs, then
// summarise the implied population CDFs and population quantiles, all on
// the observable scale.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "elicit/errors.hpp"
#include "elicit/fitting/location.hpp"
#include "elicit/fitting/variance.hpp"
#include "elicit/random.hpp"
#include "elicit/transforms.hpp"

namespace elicit {

struct Bounds {
  double lower = 0.0;
  double upper = 1.0;
  friend bool operator==(const Bounds&, const Bounds&) = default;
};

struct PopulationModel {
  Transform transform;
  LocationPrior location;
  VariancePrior variance;
  Bounds bounds;

  // m_hat on the transformed scale.
  double anchor() const { return apply(transform, location.median()); }

  void validate() const {
    check_bounds(transform, bounds.lower, bounds.upper);
    numerics::validate(location.dist);
    variance.validate();
    check_family(transform, location.family());
  }
};

struct FeedbackConfig {
  int draws = 300;                        // K
  int grid_size = 300;                    // J
  std::uint64_t seed = 0;
  double band_level = 0.95;
  double quantile_interval_level = 0.90;
  std::vector<double> quantiles{0.05, 0.95};  // population quantiles to report intervals for
  int threads = 1;                        // grid work only; results do not depend on it

  void validate() const {
    if (draws < 2) throw InvalidConfig("K must be at least 2");
    if (grid_size < 2) throw InvalidConfig("J must be at least 2");
    if (!(band_level > 0.0 && band_level < 1.0)) throw InvalidConfig("band_level must lie in (0, 1)");
    if (!(quantile_interval_level > 0.0 && quantile_interval_level < 1.0)) {
      throw InvalidConfig("quantile_interval_level must lie in (0, 1)");
    }
    for (double a : quantiles) {
      if (!(a > 0.0 && a < 1.0)) throw InvalidConfig("population quantile levels must lie in (0, 1)");
    }
    if (threads < 1) throw InvalidConfig("threads must be at least 1");
  }
};

struct ParameterDraw {
  double mean;      // mu, transformed scale
  double variance;  // sigma²
};

struct QuantileInterval {
  double alpha;
  double lower;
  double upper;
  friend bool operator==(const QuantileInterval&, const QuantileInterval&) = default;
};

struct DensityCurve {
  std::string label;
  double mean = 0.0;      // transformed scale
  double variance = 0.0;
  std::vector<double> grid;
  std::vector<double> density;  // observable scale
  friend bool operator==(const DensityCurve&, const DensityCurve&) = default;
};

struct FeedbackBundle {
  FeedbackConfig config;
  std::vector<double> grid;
  std::vector<double> cdf_lower;
  std::vector<double> cdf_median;
  std::vector<double> cdf_upper;
  std::vector<QuantileInterval> quantile_intervals;
  std::vector<DensityCurve> overlay_curves;
};

inline bool operator==(const FeedbackConfig& a, const FeedbackConfig& b) {
  return a.draws == b.draws && a.grid_size == b.grid_size && a.seed == b.seed && a.band_level == b.band_level &&
         a.quantile_interval_level == b.quantile_interval_level && a.quantiles == b.quantiles;
}

inline bool operator==(const FeedbackBundle& a, const FeedbackBundle& b) {
  return a.config == b.config && a.grid == b.grid && a.cdf_lower == b.cdf_lower && a.cdf_median == b.cdf_median &&
         a.cdf_upper == b.cdf_upper && a.quantile_intervals == b.quantile_intervals &&
         a.overlay_curves == b.overlay_curves;
}

// Linear interpolation between order statistics: h = (n - 1) p.
// Reorders values.
inline double empirical_quantile(std::vector<double>& values, double p) {
  elicit::detail::require_domain(!values.empty(), "empirical quantile of an empty sample");
  elicit::detail::require_domain(p >= 0.0 && p <= 1.0, "empirical quantile level must lie in [0, 1]");
  const double h = (static_cast<double>(values.size()) - 1.0) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(lo), values.end());
  const double below = values[lo];
  if (lo + 1 >= values.size()) return below;
  const double above = *std::min_element(values.begin() + static_cast<std::ptrdiff_t>(lo) + 1, values.end());
  return below + (h - static_cast<double>(lo)) * (above - below);
}

// x_1 = L, x_J = U, evenly spaced.
inline std::vector<double> even_grid(double lower, double upper, int points) {
  elicit::detail::require_domain(points >= 2 && lower < upper, "grid needs two or more points and lower < upper");
  std::vector<double> grid(static_cast<std::size_t>(points));
  const double step = (upper - lower) / (points - 1);
  for (int j = 0; j < points; ++j) grid[static_cast<std::size_t>(j)] = lower + step * j;
  grid.back() = upper;
  return grid;
}

namespace detail {

inline constexpr unsigned kLocationStream = 0;
inline constexpr unsigned kVarianceStream = 1;

inline double draw_variance(random::Xoshiro256& rng, const VariancePrior& prior) {
  switch (prior.family) {
    case PrecisionFamily::inverse_gamma:
    case PrecisionFamily::gamma_precision:
      return prior.p2 / random::standard_gamma(rng, prior.p1);
    case PrecisionFamily::lognormal_precision:
      return std::exp(-prior.p1 + prior.p2 * random::standard_normal(rng));
  }
  return 0.0;
}

// Runs body(j) for j in [0, n) over up to `threads` workers, each owning a
// contiguous block. Every j writes only its own outputs.
template <class Body>
void parallel_for(std::size_t n, int threads, Body&& body) {
  const std::size_t workers = std::min<std::size_t>(static_cast<std::size_t>(std::max(threads, 1)), n);
  if (workers <= 1) {
    for (std::size_t j = 0; j < n; ++j) body(j);
    return;
  }
  std::vector<std::thread> pool;
  std::exception_ptr failure;
  std::mutex failure_mutex;
  const std::size_t block = (n + workers - 1) / workers;
  for (std::size_t w = 0; w < workers; ++w) {
    const std::size_t begin = w * block;
    const std::size_t end = std::min(n, begin + block);
    pool.emplace_back([&, begin, end] {
      try {
        for (std::size_t j = begin; j < end; ++j) body(j);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

}  // namespace detail

// K independent draws. The location prior (phi scale) is sampled by
// inversion on its own stream and mapped to mu = g(phi); sigma² comes from
// a second stream, so the two sets of draws are independent.
inline std::vector<ParameterDraw> sample_parameters(const PopulationModel& model, const FeedbackConfig& cfg) {
  model.validate();
  cfg.validate();
  random::Xoshiro256 location_rng(cfg.seed, detail::kLocationStream);
  random::Xoshiro256 variance_rng(cfg.seed, detail::kVarianceStream);
  std::vector<ParameterDraw> draws(static_cast<std::size_t>(cfg.draws));
  for (auto& d : draws) {
    const double phi = model.location.quantile(random::uniform_open(location_rng));
    d.mean = apply(model.transform, phi);
    d.variance = detail::draw_variance(variance_rng, model.variance);
  }
  return draws;
}

struct CdfBand {
  std::vector<double> grid;
  std::vector<double> lower;
  std::vector<double> median;
  std::vector<double> upper;
};

inline CdfBand cdf_band_from_draws(const PopulationModel& model, const std::vector<ParameterDraw>& draws,
                                   const FeedbackConfig& cfg) {
  CdfBand band;
  band.grid = even_grid(model.bounds.lower, model.bounds.upper, cfg.grid_size);
  const std::size_t n = band.grid.size();
  band.lower.resize(n);
  band.median.resize(n);
  band.upper.resize(n);
  std::vector<double> sds(draws.size());
  for (std::size_t k = 0; k < draws.size(); ++k) sds[k] = std::sqrt(draws[k].variance);
  const double tail = 0.5 * (1.0 - cfg.band_level);
  detail::parallel_for(n, cfg.threads, [&](std::size_t j) {
    const double y = apply(model.transform, band.grid[j]);
    std::vector<double> values(draws.size());
    for (std::size_t k = 0; k < draws.size(); ++k) {
      values[k] = numerics::standard_normal_cdf((y - draws[k].mean) / sds[k]);
    }
    band.lower[j] = empirical_quantile(values, tail);
    band.median[j] = empirical_quantile(values, 0.5);
    band.upper[j] = empirical_quantile(values, 1.0 - tail);
  });
  return band;
}

inline CdfBand pointwise_cdf_band(const PopulationModel& model, const FeedbackConfig& cfg) {
  return cdf_band_from_draws(model, sample_parameters(model, cfg), cfg);
}

// Central interval at the configured level for X_(alpha) = mu + sigma z_alpha,
// computed on the transformed scale and mapped back.
inline QuantileInterval quantile_interval_from_draws(const PopulationModel& model,
                                                     const std::vector<ParameterDraw>& draws, double alpha,
                                                     const FeedbackConfig& cfg) {
  elicit::detail::require_domain(alpha > 0.0 && alpha < 1.0, "population quantile level must lie in (0, 1)");
  const double z = numerics::standard_normal_quantile(alpha);
  std::vector<double> values(draws.size());
  for (std::size_t k = 0; k < draws.size(); ++k) values[k] = draws[k].mean + std::sqrt(draws[k].variance) * z;
  const double tail = 0.5 * (1.0 - cfg.quantile_interval_level);
  const double lo = empirical_quantile(values, tail);
  const double hi = empirical_quantile(values, 1.0 - tail);
  return {alpha, invert(model.transform, lo), invert(model.transform, hi)};
}

inline QuantileInterval population_quantile_interval(const PopulationModel& model, double alpha,
                                                     const FeedbackConfig& cfg) {
  return quantile_interval_from_draws(model, sample_parameters(model, cfg), alpha, cfg);
}

// Normal density N(mean, variance) on the transformed scale, reported per
// unit of the observable scale.
inline DensityCurve normal_density_curve(std::string label, double mean, double variance,
                                         const std::vector<double>& grid, const Transform& t = {}) {
  elicit::detail::require_domain(variance > 0.0 && std::isfinite(mean), "density curve needs a positive variance");
  DensityCurve curve{std::move(label), mean, variance, grid, {}};
  const double sd = std::sqrt(variance);
  curve.density.reserve(grid.size());
  for (double x : grid) {
    curve.density.push_back(numerics::standard_normal_pdf((apply(t, x) - mean) / sd) / sd * derivative(t, x));
  }
  return curve;
}

// The two fixed-variance population densities at the elicited variance
// quantiles, both centred at m_hat.
inline std::pair<DensityCurve, DensityCurve> variance_overlay_densities(double m_hat, const VarianceQuantiles& vq,
                                                                        const Bounds& bounds, int points = 300,
                                                                        const Transform& t = {}) {
  validate(vq);
  const auto grid = even_grid(bounds.lower, bounds.upper, points);
  return {normal_density_curve("variance-lower-quantile", m_hat, vq.lower, grid, t),
          normal_density_curve("variance-upper-quantile", m_hat, vq.upper, grid, t)};
}

struct ProportionShading {
  DensityCurve curve;
  double interval_lower;
  double interval_upper;
  double mass;
};

// Population density with the mass of [k1, k2] that the proportion question asks about.
inline ProportionShading proportion_shading_data(double m_hat, double sigma, std::pair<double, double> interval,
                                                 const Bounds& bounds, int points = 300) {
  elicit::detail::require_domain(sigma > 0.0 && std::isfinite(sigma), "sigma must be positive");
  elicit::detail::require_domain(interval.first <= interval.second, "interval must satisfy k1 <= k2");
  const auto grid = even_grid(bounds.lower, bounds.upper, points);
  ProportionShading out{normal_density_curve("population", m_hat, sigma * sigma, grid), interval.first,
                        interval.second, 0.0};
  if (interval.first < interval.second) {
    out.mass = numerics::standard_normal_cdf((interval.second - m_hat) / sigma) -
               numerics::standard_normal_cdf((interval.first - m_hat) / sigma);
  }
  return out;
}

// Fixed-variance overlays for a fitted model: the variance prior's target
// quantiles, or its own 5% and 95% quantiles when no target is recorded.
inline std::pair<DensityCurve, DensityCurve> model_overlays(const PopulationModel& model, int points) {
  VarianceQuantiles vq = model.variance.target;
  if (!(vq.lower > 0.0 && vq.upper > vq.lower)) {
    vq = {0.05, model.variance.quantile(0.05), 0.95, model.variance.quantile(0.95)};
  }
  return variance_overlay_densities(model.anchor(), vq, model.bounds, points, model.transform);
}

inline FeedbackBundle compute_feedback(const PopulationModel& model, const FeedbackConfig& cfg) {
  const auto draws = sample_parameters(model, cfg);
  FeedbackBundle bundle;
  bundle.config = cfg;
  auto band = cdf_band_from_draws(model, draws, cfg);
  bundle.grid = std::move(band.grid);
  bundle.cdf_lower = std::move(band.lower);
  bundle.cdf_median = std::move(band.median);
  bundle.cdf_upper = std::move(band.upper);
  std::vector<double> levels = cfg.quantiles;
  std::sort(levels.begin(), levels.end());
  levels.erase(std::unique(levels.begin(), levels.end()), levels.end());
  for (double a : levels) bundle.quantile_intervals.push_back(quantile_interval_from_draws(model, draws, a, cfg));
  auto [first, second] = model_overlays(model, cfg.grid_size);
  bundle.overlay_curves = {std::move(first), std::move(second)};
  return bundle;
}

// Percentiles of the location prior on the observable scale (the 1st and
// 99th are the usual check on a mean fit).
inline std::vector<QuantileJudgement> location_percentiles(const LocationPrior& prior,
                                                           const std::vector<double>& levels = {0.01, 0.99}) {
  std::vector<QuantileJudgement> out;
  for (double a : levels) out.push_back({a, prior.quantile(a)});
  return out;
}

}  // namespace elicit
