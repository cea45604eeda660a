// Shared oracle helpers for the test suite: adaptive Simpson quadrature,
// Kolmogorov-Smirnov statistics, Richardson-extrapolated derivatives, and a
// dense finite-difference Jacobian with LU determinant.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <stdexcept>
#include <vector>

namespace testutil {

// --- Adaptive Simpson quadrature (long double) --------------------------

namespace detail {
template <typename F>
long double simpson(F&& f, long double a, long double b, long double fa,
                    long double fm, long double fb) {
  return (b - a) / 6.0L * (fa + 4.0L * fm + fb);
}

template <typename F>
long double adapt(F&& f, long double a, long double b, long double fa,
                  long double fm, long double fb, long double whole,
                  long double tol, int depth) {
  const long double m = 0.5L * (a + b);
  const long double lm = 0.5L * (a + m);
  const long double rm = 0.5L * (m + b);
  const long double flm = f(lm);
  const long double frm = f(rm);
  const long double left = simpson(f, a, m, fa, flm, fm);
  const long double right = simpson(f, m, b, fm, frm, fb);
  const long double delta = left + right - whole;
  if (depth <= 0 || std::fabs(delta) <= 15.0L * tol) {
    return left + right + delta / 15.0L;
  }
  return adapt(f, a, m, fa, flm, fm, left, 0.5L * tol, depth - 1) +
         adapt(f, m, b, fm, frm, fb, right, 0.5L * tol, depth - 1);
}
}  // namespace detail

// Integrates f over [a, b]; `tol` is interpreted relative to the rough
// magnitude of the integral so large-scale integrands terminate.
template <typename F>
long double integrate(F&& f, long double a, long double b,
                      long double tol = 1e-15L, int depth = 40) {
  const long double m = 0.5L * (a + b);
  const long double fa = f(a);
  const long double fm = f(m);
  const long double fb = f(b);
  const long double whole = detail::simpson(f, a, b, fa, fm, fb);
  const long double scale = std::max(1.0L, std::fabs(whole));
  return detail::adapt(f, a, b, fa, fm, fb, whole, tol * scale, depth);
}

// --- Derivative oracles --------------------------------------------------

// Fourth-order Richardson extrapolation of the central difference.
template <typename F>
long double derivative(F&& f, long double x, long double h = 1e-3L) {
  auto central = [&](long double step) {
    return (f(x + step) - f(x - step)) / (2.0L * step);
  };
  const long double d1 = central(h);
  const long double d2 = central(0.5L * h);
  return (4.0L * d2 - d1) / 3.0L;
}

// --- Kolmogorov-Smirnov --------------------------------------------------

// One-sample KS statistic against a cdf. Sorts a copy of the sample.
inline double ks_statistic(std::vector<double> sample,
                           const std::function<double(double)>& cdf) {
  std::sort(sample.begin(), sample.end());
  const double n = static_cast<double>(sample.size());
  double stat = 0.0;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    const double c = cdf(sample[i]);
    stat = std::max(stat, std::fabs(c - static_cast<double>(i) / n));
    stat = std::max(stat, std::fabs(static_cast<double>(i + 1) / n - c));
  }
  return stat;
}

// Two-sample KS statistic.
inline double ks_statistic2(std::vector<double> a, std::vector<double> b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  std::size_t i = 0, j = 0;
  double stat = 0.0;
  while (i < a.size() && j < b.size()) {
    if (a[i] <= b[j]) {
      ++i;
    } else {
      ++j;
    }
    stat = std::max(stat, std::fabs(i / na - j / nb));
  }
  return stat;
}

// --- Finite-difference Jacobian & determinant ----------------------------

// Dense Jacobian of a vector map at x, via Richardson central differences.
inline std::vector<std::vector<double>> fd_jacobian(
    const std::function<std::vector<double>(const std::vector<double>&)>& f,
    const std::vector<double>& x, double h = 1e-5) {
  const std::vector<double> y0 = f(x);
  const std::size_t m = y0.size();
  const std::size_t n = x.size();
  std::vector<std::vector<double>> jac(m, std::vector<double>(n, 0.0));
  for (std::size_t j = 0; j < n; ++j) {
    auto eval = [&](double step) {
      std::vector<double> xp = x;
      std::vector<double> xm = x;
      xp[j] += step;
      xm[j] -= step;
      const std::vector<double> yp = f(xp);
      const std::vector<double> ym = f(xm);
      std::vector<double> col(m);
      for (std::size_t i = 0; i < m; ++i) col[i] = (yp[i] - ym[i]) / (2.0 * step);
      return col;
    };
    const std::vector<double> d1 = eval(h);
    const std::vector<double> d2 = eval(0.5 * h);
    for (std::size_t i = 0; i < m; ++i) jac[i][j] = (4.0 * d2[i] - d1[i]) / 3.0;
  }
  return jac;
}

// abs(det) by partial-pivot LU; returns log|det| to dodge overflow.
inline double log_abs_det(std::vector<std::vector<double>> a) {
  const std::size_t n = a.size();
  double log_det = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t piv = k;
    for (std::size_t i = k + 1; i < n; ++i) {
      if (std::fabs(a[i][k]) > std::fabs(a[piv][k])) piv = i;
    }
    if (a[piv][k] == 0.0) return -std::numeric_limits<double>::infinity();
    if (piv != k) std::swap(a[piv], a[k]);
    log_det += std::log(std::fabs(a[k][k]));
    for (std::size_t i = k + 1; i < n; ++i) {
      const double factor = a[i][k] / a[k][k];
      for (std::size_t j = k; j < n; ++j) a[i][j] -= factor * a[k][j];
    }
  }
  return log_det;
}

// Sample moments.
inline double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

inline double var_of(const std::vector<double>& v) {
  const double m = mean_of(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return s / static_cast<double>(v.size());
}

}  // namespace testutil
