#pragma once

#include <cmath>
#include <numbers>

namespace bsfr {

inline constexpr double kLogSqrt2Pi = 0.91893853320467274178;

inline double norm_pdf(double x) { return std::exp(-0.5 * x * x - kLogSqrt2Pi); }

inline double norm_logpdf(double x) { return -0.5 * x * x - kLogSqrt2Pi; }

inline double norm_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

/// Standard normal quantile; p must lie in (0, 1).
double norm_quantile(double p);

}  // namespace bsfr
