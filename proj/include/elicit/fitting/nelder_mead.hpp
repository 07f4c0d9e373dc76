#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>

namespace elicit::fitting {

struct NelderMeadOptions {
  int max_iterations = 500;     // per run
  int max_restarts = 4;
  double target = 0.0;          // stop as soon as f <= target
  double f_spread = 1e-30;      // simplex objective spread at convergence
  double x_spread = 1e-13;      // simplex diameter (relative) at convergence
  double initial_step = 0.25;
};

template <std::size_t N>
struct NelderMeadResult {
  std::array<double, N> x{};
  double value = std::numeric_limits<double>::infinity();
  int iterations = 0;
  int restarts = 0;
  bool converged = false;
};

namespace detail {

template <std::size_t N, class F>
NelderMeadResult<N> nelder_mead_run(F& f, const std::array<double, N>& start, double step,
                                    const NelderMeadOptions& opt) {
  using Point = std::array<double, N>;
  std::array<Point, N + 1> simplex;
  std::array<double, N + 1> values;
  simplex[0] = start;
  for (std::size_t i = 0; i < N; ++i) {
    simplex[i + 1] = start;
    simplex[i + 1][i] += step * std::max(1.0, std::abs(start[i]));
  }
  for (std::size_t i = 0; i <= N; ++i) values[i] = f(simplex[i]);

  auto lerp = [](const Point& from, const Point& to, double t) {
    Point r;
    for (std::size_t d = 0; d < N; ++d) r[d] = from[d] + t * (to[d] - from[d]);
    return r;
  };

  NelderMeadResult<N> result;
  std::array<std::size_t, N + 1> order;
  for (int iter = 0; iter < opt.max_iterations; ++iter) {
    for (std::size_t i = 0; i <= N; ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
    const std::size_t best = order[0];
    const std::size_t worst = order[N];
    const std::size_t second_worst = order[N - 1];
    result.iterations = iter;

    if (values[best] <= opt.target) {
      result.converged = true;
      break;
    }
    double diameter = 0.0;
    double scale = 0.0;
    for (std::size_t i = 0; i <= N; ++i) {
      for (std::size_t d = 0; d < N; ++d) {
        diameter = std::max(diameter, std::abs(simplex[i][d] - simplex[best][d]));
        scale = std::max(scale, std::abs(simplex[best][d]));
      }
    }
    if (values[worst] - values[best] <= opt.f_spread && diameter <= opt.x_spread * std::max(1.0, scale)) {
      result.converged = true;
      break;
    }

    Point centroid{};
    for (std::size_t i = 0; i <= N; ++i) {
      if (i == worst) continue;
      for (std::size_t d = 0; d < N; ++d) centroid[d] += simplex[i][d] / static_cast<double>(N);
    }

    const Point reflected = lerp(centroid, simplex[worst], -1.0);
    const double f_reflected = f(reflected);
    if (f_reflected < values[best]) {
      const Point expanded = lerp(centroid, simplex[worst], -2.0);
      const double f_expanded = f(expanded);
      if (f_expanded < f_reflected) {
        simplex[worst] = expanded;
        values[worst] = f_expanded;
      } else {
        simplex[worst] = reflected;
        values[worst] = f_reflected;
      }
      continue;
    }
    if (f_reflected < values[second_worst]) {
      simplex[worst] = reflected;
      values[worst] = f_reflected;
      continue;
    }
    const bool outside = f_reflected < values[worst];
    const Point contracted = outside ? lerp(centroid, reflected, 0.5) : lerp(centroid, simplex[worst], 0.5);
    const double f_contracted = f(contracted);
    if (f_contracted < (outside ? f_reflected : values[worst])) {
      simplex[worst] = contracted;
      values[worst] = f_contracted;
      continue;
    }
    // Shrink towards the best vertex.
    for (std::size_t i = 0; i <= N; ++i) {
      if (i == best) continue;
      simplex[i] = lerp(simplex[best], simplex[i], 0.5);
      values[i] = f(simplex[i]);
    }
  }

  const auto best_it = std::min_element(values.begin(), values.end());
  result.value = *best_it;
  result.x = simplex[static_cast<std::size_t>(best_it - values.begin())];
  return result;
}

}  // namespace detail

// Derivative-free minimisation with restarts: after each run the simplex is
// rebuilt around the best point with a smaller step, until a restart stops
// improving the objective or the restart budget is spent.
template <std::size_t N, class F>
NelderMeadResult<N> nelder_mead(F&& f, std::array<double, N> start, const NelderMeadOptions& opt = {}) {
  auto objective = [&f](const std::array<double, N>& x) {
    const double v = f(x);
    return std::isnan(v) ? std::numeric_limits<double>::infinity() : v;
  };
  double step = opt.initial_step;
  NelderMeadResult<N> best = detail::nelder_mead_run<N>(objective, start, step, opt);
  int total_iterations = best.iterations;
  for (int r = 0; r < opt.max_restarts && best.value > opt.target; ++r) {
    step *= 0.1;
    auto next = detail::nelder_mead_run<N>(objective, best.x, step, opt);
    total_iterations += next.iterations;
    const bool improved = next.value < best.value;
    if (improved) {
      const double previous = best.value;
      best = next;
      best.restarts = r + 1;
      if (previous - next.value <= opt.f_spread) {
        best.converged = true;
        break;
      }
    } else {
      // A fresh simplex around the best point found nothing lower.
      best.converged = true;
      break;
    }
  }
  best.iterations = total_iterations;
  return best;
}

}  // namespace elicit::fitting
