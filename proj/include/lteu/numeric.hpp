#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "error.hpp"

namespace lteu {

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
inline double linear_to_db(double x) { return 10.0 * std::log10(x); }

inline double log_binomial(int n, int k) {
  return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
}

inline double binomial_pmf(int n, int k, double p) {
  if (k < 0 || k > n) return 0.0;
  if (p <= 0.0) return k == 0 ? 1.0 : 0.0;
  if (p >= 1.0) return k == n ? 1.0 : 0.0;
  return std::exp(log_binomial(n, k) + k * std::log(p) + (n - k) * std::log1p(-p));
}

struct Quadrature {
  double value = 0.0;
  double error = 0.0;
};

// Adaptive 15-point Gauss-Kronrod on a finite interval.
template <class F>
Quadrature integrate(F&& f, double a, double b, double abs_tol = 1e-10, unsigned max_depth = 15) {
  Quadrature q;
  if (!(b > a)) return q;
  double l1 = 0.0;
  const double rel = std::max(abs_tol / std::max(b - a, 1e-300), 1e-13);
  q.value = boost::math::quadrature::gauss_kronrod<double, 15>::integrate(
      f, a, b, max_depth, rel, &q.error, &l1);
  return q;
}

// Exponentially scaled I0: I0(u)·exp(-u).
inline double bessel_i0e(double u) {
  u = std::fabs(u);
  if (u < 600.0) return std::cyl_bessel_i(0.0, u) * std::exp(-u);
  double term = 1.0, sum = 1.0;
  for (int k = 1; k < 30; ++k) {
    term *= (2.0 * k - 1) * (2.0 * k - 1) / (8.0 * k * u);
    sum += term;
    if (term < 1e-17 * sum) break;
  }
  return sum / std::sqrt(2.0 * M_PI * u);
}

// Golden-section maximization on [a, b].
template <class F>
double golden_max(F&& f, double a, double b, double tol) {
  const double g = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - g * (b - a), d = a + g * (b - a);
  double fc = f(c), fd = f(d);
  while (b - a > tol) {
    if (fc >= fd) {
      b = d; d = c; fd = fc;
      c = b - g * (b - a); fc = f(c);
    } else {
      a = c; c = d; fc = fd;
      d = a + g * (b - a); fd = f(d);
    }
  }
  return fc >= fd ? c : d;
}

// Running mean / variance (Welford), mergeable.
struct RunningStat {
  std::int64_t n = 0;
  double mean = 0.0;
  double m2 = 0.0;

  void add(double x) {
    ++n;
    double d = x - mean;
    mean += d / n;
    m2 += d * (x - mean);
  }
  double variance() const { return n > 1 ? m2 / (n - 1) : 0.0; }
  double std_error() const { return n > 1 ? std::sqrt(variance() / n) : 0.0; }
};

}  // namespace lteu
