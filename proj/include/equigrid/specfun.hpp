#pragma once

// Tail-accurate normal distribution functions. Everything that can underflow
// is available in log space; callers that form ratios of tail probabilities
// should stay in log space and exponentiate the ratio last.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <utility>

namespace equigrid {

/// Natural log of an upper-tail probability. Always <= 0.
class LogTail {
 public:
  constexpr LogTail() = default;
  explicit LogTail(double value) : value_(value) {
    if (std::isnan(value) || value > 0.0)
      throw std::domain_error("LogTail: value must be <= 0");
  }

  double value() const noexcept { return value_; }
  double probability() const noexcept { return std::exp(value_); }

  friend bool operator==(LogTail, LogTail) = default;
  friend auto operator<=>(LogTail a, LogTail b) { return a.value_ <=> b.value_; }

 private:
  double value_ = 0.0;
};

namespace detail {

inline constexpr double kLogSqrt2Pi = 0.91893853320467274178;  // log(sqrt(2 pi))

// Mills ratio Phi(-x)/phi(x) by backward evaluation of the Laplace continued
// fraction. Only used for x >= 37 where 60 terms are far more than enough.
inline double mills_ratio_cf(double x) {
  double tail = x;
  for (int k = 60; k >= 1; --k) tail = x + k / tail;
  return 1.0 / tail;
}

}  // namespace detail

/// Standard normal density.
inline double normal_pdf(double x) {
  return std::exp(-0.5 * x * x - detail::kLogSqrt2Pi);
}

inline double log_normal_pdf(double x) { return -0.5 * x * x - detail::kLogSqrt2Pi; }

/// Upper tail Phi(-x) = P(Z > x) with relative accuracy across the whole
/// representable range. Underflows to zero for x above ~38.5.
inline double normal_tail(double x) {
  if (std::isnan(x)) return x;
  if (x < 37.0) return 0.5 * std::erfc(x * std::numbers::sqrt2 / 2.0);
  return std::exp(log_normal_pdf(x)) * detail::mills_ratio_cf(x);
}

/// log Phi(-x), finite for every finite x.
inline LogTail log_normal_tail(double x) {
  if (std::isnan(x)) throw std::domain_error("log_normal_tail: NaN argument");
  if (x == std::numeric_limits<double>::infinity())
    return LogTail(-std::numeric_limits<double>::infinity());
  if (x < -5.0) {
    // Phi(-x) = 1 - Phi(x) with Phi(x) small.
    return LogTail(std::min(0.0, std::log1p(-normal_tail(-x))));
  }
  if (x < 37.0) return LogTail(std::min(0.0, std::log(normal_tail(x))));
  return LogTail(log_normal_pdf(x) + std::log(detail::mills_ratio_cf(x)));
}

/// Phi(-x)/phi(x), computed without underflow.
inline double mills_ratio(double x) {
  return std::exp(log_normal_tail(x).value() - log_normal_pdf(x));
}

/// Standard normal cdf Phi(x).
inline double normal_cdf(double x) { return normal_tail(-x); }

/// Solves log Phi(-x) = lp for x. Accurate for lp down to a few thousand
/// below zero, where the tail probability itself is far below DBL_MIN.
inline double log_tail_inverse(LogTail lp) {
  const double v = lp.value();
  if (!std::isfinite(v)) {
    if (v == -std::numeric_limits<double>::infinity())
      return std::numeric_limits<double>::infinity();
    throw std::domain_error("log_tail_inverse: non-finite input");
  }
  if (v == 0.0) return -std::numeric_limits<double>::infinity();

  constexpr double kLogHalf = -0.69314718055994530942;
  if (v > kLogHalf) {
    // Tail above one half: the root is negative. Reflect.
    const double q = -std::expm1(v);
    return -log_tail_inverse(LogTail(std::log(q)));
  }

  // Root lies in [0, sqrt(-2v)] because Phi(-x) <= exp(-x^2/2)/2.
  double lo = 0.0;
  double hi = std::sqrt(-2.0 * v);
  double x;
  if (v < -2.0) {
    const double s = -2.0 * v;
    x = std::sqrt(std::max(0.0, s - std::log(s) - 2.0 * detail::kLogSqrt2Pi));
  } else {
    x = 0.5 * (lo + hi);
  }
  x = std::clamp(x, lo, hi);

  for (int iter = 0; iter < 200; ++iter) {
    const double lt = log_normal_tail(x).value();
    const double f = lt - v;
    if (f == 0.0) return x;
    // log Phi(-x) is decreasing in x.
    if (f > 0.0)
      lo = x;
    else
      hi = x;
    // Newton step: d/dx log Phi(-x) = -1/R(x).
    const double ratio = std::exp(lt - log_normal_pdf(x));
    double next = x + f * ratio;
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    const double step = std::abs(next - x);
    x = next;
    if (step <= 4e-16 * std::max(1.0, x) || hi - lo <= 4e-16 * std::max(1.0, x)) break;
  }
  return x;
}

/// Solves Phi(-x) = p for p in (0, 1).
inline double normal_tail_inverse(double p) {
  if (!std::isfinite(p) || p <= 0.0 || p >= 1.0)
    throw std::domain_error("normal_tail_inverse: p must lie in (0, 1)");
  if (p <= 0.5) return log_tail_inverse(LogTail(std::log(p)));
  return -log_tail_inverse(LogTail(std::log1p(-p)));
}

/// log(exp(a) + exp(b)) without overflow or underflow.
inline double log_add_exp(double a, double b) {
  if (a < b) std::swap(a, b);
  if (b == -std::numeric_limits<double>::infinity()) return a;
  return a + std::log1p(std::exp(b - a));
}

/// log(exp(a) - exp(b)) for a >= b.
inline double log_sub_exp(double a, double b) {
  if (b > a) throw std::domain_error("log_sub_exp: a < b");
  if (b == -std::numeric_limits<double>::infinity()) return a;
  if (a == b) return -std::numeric_limits<double>::infinity();
  const double d = b - a;
  // log(1 - e^d): pick the accurate branch.
  return a + (d > -0.69314718055994530942 ? std::log(-std::expm1(d)) : std::log1p(-std::exp(d)));
}

}  // namespace equigrid
