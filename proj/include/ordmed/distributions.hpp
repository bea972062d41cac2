#pragma once

#include <boost/math/distributions/normal.hpp>

#include <cmath>
#include <numbers>

#include "ordmed/error.hpp"

namespace ordmed {

inline constexpr double kInvSqrt2 = 0.70710678118654752440;

enum class Link { kNormal, kLogistic };

inline const char* to_string(Link l) { return l == Link::kNormal ? "probit" : "logit"; }

/// Standard error law of the latent model: N(0, 1) or the standard logistic.
struct LinkFunctions {
  Link link = Link::kNormal;

  double cdf(double x) const {
    if (x == -INFINITY) return 0.0;
    if (x == INFINITY) return 1.0;
    if (link == Link::kNormal) return 0.5 * std::erfc(-x * kInvSqrt2);
    return x >= 0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x));
  }

  double upper(double x) const { return cdf(-x); }  // both laws are symmetric

  double pdf(double x) const {
    if (std::isinf(x)) return 0.0;
    if (link == Link::kNormal) return std::exp(-0.5 * x * x) * (std::numbers::inv_sqrtpi * kInvSqrt2);
    const double e = std::exp(-std::abs(x));
    return e / ((1.0 + e) * (1.0 + e));
  }

  double quantile(double p) const {
    require(p > 0.0 && p < 1.0, ErrorCategory::kNumeric, "quantile argument must lie in (0, 1)");
    if (link == Link::kNormal) return boost::math::quantile(boost::math::normal_distribution<double>(), p);
    return std::log(p / (1.0 - p));
  }

  /// P(a0 < U <= a), evaluated on the tail that avoids cancellation.
  double interval(double a0, double a) const {
    if (a0 > 0.0) return upper(a0) - upper(a);
    return cdf(a) - cdf(a0);
  }
};

}  // namespace ordmed
