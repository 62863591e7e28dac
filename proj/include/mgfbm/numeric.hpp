#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>

namespace mgfbm {

/// Working precision for closed-form evaluation. On x86-64 this is the
/// 80-bit extended format; results are rounded to double on return.
using extended = long double;

/// x^(2H) with the zero guard: returns exactly 0 at x == 0.
inline extended pow_2h(extended x, extended hurst) {
  if (x == 0) return 0;
  return std::pow(x, 2 * hurst);
}

/// True when |x - y| <= n_ulps * ulp(scale).
///
/// The closed-form identities in this library compare two algebraically equal
/// expressions whose terms may cancel. Rounding error is then proportional to
/// the magnitude of the largest term rather than to the result, so tolerances
/// are expressed in ulps of that magnitude (`scale`).
inline bool within_ulps(double x, double y, double scale, double n_ulps) {
  const double unit = std::numeric_limits<double>::epsilon() *
                      std::max(std::abs(scale), std::numeric_limits<double>::min());
  return std::abs(x - y) <= n_ulps * unit;
}

/// Distance |x - y| measured in ulps of `scale`.
inline double ulp_distance(double x, double y, double scale) {
  const double unit = std::numeric_limits<double>::epsilon() *
                      std::max(std::abs(scale), std::numeric_limits<double>::min());
  return std::abs(x - y) / unit;
}

namespace detail {

/// Centered second difference (x+1)^a - 2 x^a + (x-1)^a for x >= 1.
///
/// For large x the direct form loses about 2*log10(x) digits, so beyond a
/// small threshold it is evaluated as x^a * 2 * sum_k binom(a, 2k) x^(-2k).
inline extended second_difference(extended x, extended exponent) {
  if (x < 4) {
    const extended below = x - 1 == 0 ? extended{0} : std::pow(x - 1, exponent);
    return std::pow(x + 1, exponent) - 2 * std::pow(x, exponent) + below;
  }
  const extended inv_sq = 1 / (x * x);
  // binom(a, j) built incrementally; only even j contribute.
  extended binom = 1;
  extended power = 1;
  extended sum = 0;
  for (int j = 0; j < 400; j += 2) {
    binom *= (exponent - j) / (j + 1);
    binom *= (exponent - j - 1) / (j + 2);
    power *= inv_sq;
    const extended term = binom * power;
    sum += term;
    if (term == 0 || std::abs(term) <= std::abs(sum) * 1e-22L) break;
  }
  return 2 * std::pow(x, exponent) * sum;
}

}  // namespace detail
}  // namespace mgfbm
