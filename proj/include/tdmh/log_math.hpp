#ifndef TDMH_LOG_MATH_HPP
#define TDMH_LOG_MATH_HPP

#include <cmath>
#include <limits>
#include <numbers>

namespace tdmh {

inline constexpr double neg_inf = -std::numeric_limits<double>::infinity();

/// log of the univariate Gaussian density N(mean, variance) at x.
inline double log_normal_pdf(double x, double mean, double variance) {
    const double d = x - mean;
    return -0.5 * std::log(2.0 * std::numbers::pi * variance) - 0.5 * d * d / variance;
}

/// Sum of log terms where -inf absorbs everything, including a +inf partner.
///
/// A +inf / -inf clash arises only when a density vanishes in the denominator
/// and the numerator at once; the transition is then treated as impossible.
inline double log_sum_saturating(double a, double b) {
    if (std::isnan(a) || std::isnan(b)) return neg_inf;
    if (a == neg_inf || b == neg_inf) return neg_inf;
    return a + b;
}

/// a - b with the 0/0 and x/0 conventions of the accept/reject step.
inline double log_diff_saturating(double a, double b) {
    if (std::isnan(a) || std::isnan(b)) return neg_inf;
    if (a == neg_inf) return neg_inf;
    if (b == neg_inf) return neg_inf;  // undefined ratio, treated as reject
    return a - b;
}

/// min{1, exp(log_ratio)} with exp(-inf) = 0 and NaN mapped to 0.
inline double accept_prob_from_log_ratio(double log_ratio) {
    if (std::isnan(log_ratio)) return 0.0;
    if (log_ratio >= 0.0) return 1.0;
    return std::exp(log_ratio);
}

/// log(exp(a) + exp(b)) without overflow.
inline double log_add_exp(double a, double b) {
    if (a == neg_inf) return b;
    if (b == neg_inf) return a;
    const double m = a > b ? a : b;
    return m + std::log1p(std::exp(-std::fabs(a - b)));
}

}  // namespace tdmh

#endif  // TDMH_LOG_MATH_HPP
