#pragma once

// Reference values computed independently of the library: erfc from its
// Maclaurin series and Laplace continued fraction in long double, closed-form
// Erlang and hypoexponential laws, and the collapsed two-state on-off process.

#include <cmath>
#include <functional>
#include <vector>

namespace oracle {

inline long double erfc(long double x) {
  constexpr long double kPi = 3.141592653589793238462643383279502884L;
  if (x < 0) return 2.0L - erfc(-x);
  if (x < 2.5L) {
    // erf(x) = 2/sqrt(pi) sum (-1)^n x^(2n+1) / (n! (2n+1))
    long double term = x, sum = x;
    for (int n = 1; n < 200; ++n) {
      term *= -x * x / n;
      const long double add = term / (2 * n + 1);
      sum += add;
      if (std::fabs(add) < 1e-21L * std::fabs(sum)) break;
    }
    return 1.0L - 2.0L / std::sqrt(kPi) * sum;
  }
  // erfc(x) = exp(-x^2)/sqrt(pi) * 1/(x + (1/2)/(x + 1/(x + (3/2)/(x + ...))))
  long double f = x;
  for (int k = 400; k >= 1; --k) f = x + (k / 2.0L) / f;
  return std::exp(-x * x) / std::sqrt(kPi) / f;
}

// Root of erfc(x) = 0.5 by plain bisection.
inline long double erfc_inverse_half() {
  long double lo = 0.0L, hi = 1.0L;
  for (int i = 0; i < 200; ++i) {
    const long double mid = 0.5L * (lo + hi);
    (erfc(mid) > 0.5L ? lo : hi) = mid;
  }
  return 0.5L * (lo + hi);
}

inline double levy_pdf(double c, double x) {
  if (x <= 0) return 0.0;
  const long double lc = c, lx = x;
  return static_cast<double>(lc / std::sqrt(2.0L * 3.141592653589793238462643383279502884L) *
                             std::exp(-lc * lc / (2.0L * lx)) * std::pow(lx, -1.5L));
}

inline double levy_cdf(double c, double x) {
  if (x <= 0) return 0.0;
  return static_cast<double>(erfc(static_cast<long double>(c) / std::sqrt(2.0L * x)));
}

inline double erlang_cdf(double rate, int n, double x) {
  if (x <= 0) return 0.0;
  long double term = 1.0L, sum = 0.0L;
  for (int k = 0; k < n; ++k) {
    sum += term;
    term *= rate * x / (k + 1);
  }
  return static_cast<double>(1.0L - std::exp(-static_cast<long double>(rate) * x) * sum);
}

inline double erlang_pdf(double rate, int n, double x) {
  if (x < 0) return 0.0;
  long double v = rate;
  for (int k = 1; k < n; ++k) v *= rate * x / k;
  return static_cast<double>(v * std::exp(-static_cast<long double>(rate) * x));
}

// Exp(a) + Exp(b), a != b.
inline double hypoexponential_cdf(double a, double b, double x) {
  if (x <= 0) return 0.0;
  return 1.0 - (b * std::exp(-a * x) - a * std::exp(-b * x)) / (b - a);
}

inline double hypoexponential_pdf(double a, double b, double x) {
  if (x < 0) return 0.0;
  return a * b / (b - a) * (std::exp(-a * x) - std::exp(-b * x));
}

inline double binomial(int n, int k, double p) {
  return std::exp(std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0)) * std::pow(p, k) *
         std::pow(1.0 - p, n - k);
}

// Pr(X(t) = 0) for the all-Levy process collapsed to on/off with the p1/p2
// mixture off time: X(t) = 0 iff T_{2n} <= t < T_{2n} + U_{n+1} for some n.
inline double levy_on_probability(double cu, double cs, double cl, double p1, double t) {
  double sum = 0.0;
  for (int n = 0; n < 400; ++n) {
    double term = 0.0;
    for (int k = 0; k <= n; ++k) {
      const double off = k * cs + (n - k) * cl;
      const double before = n == 0 ? 1.0 : levy_cdf(n * cu + off, t);
      term += binomial(n, k, p1) * (before - levy_cdf((n + 1) * cu + off, t));
    }
    sum += term;
    if (n > 5 && levy_cdf(n * cu, t) < 1e-16) break;
  }
  return sum;
}

// Adaptive Simpson on [a, b].
inline double simpson(const std::function<double(double)>& f, double a, double b, double tol, int depth = 40) {
  std::function<double(double, double, double, double, double, double, int)> rec =
      [&](double lo, double hi, double flo, double fmid, double fhi, double whole, int d) {
        const double mid = 0.5 * (lo + hi);
        const double lm = 0.5 * (lo + mid), rm = 0.5 * (mid + hi);
        const double flm = f(lm), frm = f(rm);
        const double left = (mid - lo) / 6.0 * (flo + 4.0 * flm + fmid);
        const double right = (hi - mid) / 6.0 * (fmid + 4.0 * frm + fhi);
        if (d <= 0 || std::fabs(left + right - whole) <= 15.0 * tol) return left + right + (left + right - whole) / 15.0;
        return rec(lo, mid, flo, flm, fmid, left, d - 1) + rec(mid, hi, fmid, frm, fhi, right, d - 1);
      };
  const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
  return rec(a, b, fa, fm, fb, (b - a) / 6.0 * (fa + 4.0 * fm + fb), depth);
}

}  // namespace oracle
