#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <span>
#include <string>

#include "rbb/errors.hpp"

namespace rbb {

inline constexpr double kLogSqrt2Pi = 0.91893853320467274178;  // log(sqrt(2*pi))
inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();

namespace detail {
inline void require_positive_variance(double t, const char* who) {
  if (!(t > 0.0)) {
    throw DomainError(std::string(who) + ": variance must be > 0, got " + std::to_string(t));
  }
}
}  // namespace detail

/// Gaussian density with variance t and mean y, evaluated at x.
inline double gauss_pdf(double t, double x, double y = 0.0) {
  detail::require_positive_variance(t, "gauss_pdf");
  const double d = x - y;
  return std::exp(-0.5 * d * d / t) / std::sqrt(2.0 * std::numbers::pi * t);
}

/// log of gauss_pdf; finite where the linear version underflows.
inline double gauss_logpdf(double t, double x, double y = 0.0) {
  detail::require_positive_variance(t, "gauss_logpdf");
  const double d = x - y;
  return -0.5 * d * d / t - 0.5 * std::log(t) - kLogSqrt2Pi;
}

/// log(exp(a) + exp(b)) without overflow; either argument may be -inf.
inline double log_add_exp(double a, double b) {
  if (a == kNegInf) return b;
  if (b == kNegInf) return a;
  const double m = std::max(a, b);
  return m + std::log1p(std::exp(-std::abs(a - b)));
}

inline double log_sum_exp(std::span<const double> xs) {
  double m = kNegInf;
  for (double x : xs) m = std::max(m, x);
  if (m == kNegInf) return kNegInf;
  if (m == std::numeric_limits<double>::infinity()) return m;
  double s = 0.0;
  for (double x : xs) s += std::exp(x - m);
  return m + std::log(s);
}

/// Standard normal distribution function.
inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

}  // namespace rbb
