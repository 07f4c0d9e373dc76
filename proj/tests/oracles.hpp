#pragma once

// Independent reference computations used only by the tests. Nothing here
// calls into include/elicit, so agreement with the library is meaningful.

#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <utility>
#include <vector>

namespace oracle {

// erf by Maclaurin series (|x| < 3) or Laplace continued fraction for erfc,
// both in long double. Good to ~1e-17 absolute.
inline long double erf_series(long double x) {
  long double sum = x;
  long double term = x;
  for (int n = 1; n < 500; ++n) {
    term *= -x * x / n;
    const long double add = term / (2 * n + 1);
    sum += add;
    if (std::fabs(add) < 1e-22L * std::fabs(sum)) break;
  }
  return 2.0L / std::sqrt(std::numbers::pi_v<long double>) * sum;
}

inline long double erfc_fraction(long double x) {
  // erfc(x) = exp(-x²)/√π · 1/(x + 1/2/(x + 1/(x + 3/2/(x + ...)))) evaluated bottom-up.
  long double f = x;
  for (int n = 200; n >= 1; --n) f = x + (n / 2.0L) / f;
  return std::exp(-x * x) / std::sqrt(std::numbers::pi_v<long double>) / f;
}

inline double normal_cdf(double z) {
  const long double x = static_cast<long double>(z) / std::sqrt(2.0L);
  if (std::fabs(x) < 3.0L) return static_cast<double>(0.5L * (1.0L + erf_series(x)));
  if (x > 0) return static_cast<double>(1.0L - 0.5L * erfc_fraction(x));
  return static_cast<double>(0.5L * erfc_fraction(-x));
}

// Plain bisection on a monotone increasing function.
inline double bisect(const std::function<double(double)>& f, double target, double lo, double hi,
                     int iters = 200) {
  for (int i = 0; i < iters; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (f(mid) < target) lo = mid; else hi = mid;
  }
  return 0.5 * (lo + hi);
}

inline double normal_quantile(double alpha) { return bisect(normal_cdf, alpha, -40.0, 40.0); }

// Composite Gauss-Legendre quadrature in long double. Nodes and weights come
// from Newton iteration on P_n (the classic gauleg construction).
struct GaussLegendre {
  std::vector<long double> nodes, weights;

  explicit GaussLegendre(int n) : nodes(n), weights(n) {
    const long double pi = std::numbers::pi_v<long double>;
    for (int i = 0; i < (n + 1) / 2; ++i) {
      long double z = std::cos(pi * (i + 0.75L) / (n + 0.5L));
      long double derivative = 0;
      for (int iter = 0; iter < 100; ++iter) {
        long double p1 = 1, p2 = 0;
        for (int j = 1; j <= n; ++j) {
          const long double p3 = p2;
          p2 = p1;
          p1 = ((2.0L * j - 1.0L) * z * p2 - (j - 1.0L) * p3) / j;
        }
        derivative = n * (z * p1 - p2) / (z * z - 1.0L);
        const long double step = p1 / derivative;
        z -= step;
        if (std::fabs(step) < 1e-19L) break;
      }
      nodes[i] = -z;
      nodes[n - 1 - i] = z;
      weights[i] = weights[n - 1 - i] = 2.0L / ((1.0L - z * z) * derivative * derivative);
    }
  }
};

inline long double integrate_panels(const std::function<long double(long double)>& f, long double a,
                                    long double b, int panels) {
  static const GaussLegendre rule(32);
  long double total = 0;
  const long double h = (b - a) / panels;
  for (int i = 0; i < panels; ++i) {
    const long double lo = a + i * h;
    const long double mid = lo + 0.5L * h;
    for (std::size_t k = 0; k < rule.nodes.size(); ++k) {
      total += rule.weights[k] * f(mid + 0.5L * h * rule.nodes[k]);
    }
  }
  return total * 0.5L * h;
}

// P(a, x) by quadrature. For a < 1 the substitution t = s^{1/a} removes the
// endpoint singularity: P(a, x) = 1/Γ(a+1) ∫_0^{x^a} exp(-s^{1/a}) ds.
inline double gamma_p(double a, double x) {
  const long double la = a;
  if (a < 1.0) {
    const long double upper = std::pow(static_cast<long double>(x), la);
    const long double g = std::exp(std::lgamma(la + 1.0L));
    auto f = [la](long double s) { return std::exp(-std::pow(s, 1.0L / la)); };
    return static_cast<double>(integrate_panels(f, 0.0L, upper, 64) / g);
  }
  const long double lg = std::lgamma(la);
  auto f = [la, lg](long double t) {
    if (t <= 0) return la == 1.0L ? 1.0L : 0.0L;
    return std::exp((la - 1.0L) * std::log(t) - t - lg);
  };
  // Integrate the smaller tail for accuracy.
  if (x <= a) return static_cast<double>(integrate_panels(f, 0.0L, x, 256));
  const long double far = la + 60.0L * std::sqrt(la) + 200.0L;
  if (x >= far) return 1.0;
  return static_cast<double>(1.0L - integrate_panels(f, x, far, 256));
}

// Inverse-gamma CDF by integrating the density b^a/Γ(a) y^{-(a+1)} e^{-b/y}
// from 0 to x directly.
inline double invgamma_cdf(double x, double a, double b) {
  const long double la = a, lb = b;
  const long double lg = std::lgamma(la);
  auto f = [la, lb, lg](long double y) {
    if (y <= 0) return 0.0L;
    return std::exp(la * std::log(lb) - lg - (la + 1.0L) * std::log(y) - lb / y);
  };
  return static_cast<double>(integrate_panels(f, 0.0L, x, 512));
}

// 2D grid search of an objective over a rectangle; returns the best point.
// Regularized incomplete beta by quadrature; shapes >= 1 keep the integrand bounded.
inline double beta_cdf(double x, double a, double b) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  auto density = [a, b](long double t) { return std::pow(t, a - 1.0L) * std::pow(1.0L - t, b - 1.0L); };
  const long double part = integrate_panels(density, 0.0L, x, 12);
  const long double total = std::tgamma(a) * std::tgamma(b) / std::tgamma(a + b);
  return static_cast<double>(part / total);
}

template <class F>
std::pair<double, double> grid_search(F&& f, double x0, double x1, double y0, double y1, int n) {
  double best = std::numeric_limits<double>::infinity();
  std::pair<double, double> arg{x0, y0};
  for (int i = 0; i <= n; ++i) {
    for (int j = 0; j <= n; ++j) {
      const double x = x0 + (x1 - x0) * i / n;
      const double y = y0 + (y1 - y0) * j / n;
      const double v = f(x, y);
      if (v < best) {
        best = v;
        arg = {x, y};
      }
    }
  }
  return arg;
}

}  // namespace oracle
