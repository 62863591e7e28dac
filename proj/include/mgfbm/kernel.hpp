#pragma once

// Closed-form moments of the mixed generalized fractional Brownian motion
//
//   M_t = a B_t + b B^H_t + c B^H_{-t},   t >= 0,
//
// with B a Brownian motion and B^H an independent two-sided fBm. Every
// function here is pure; evaluation happens in extended precision and is
// rounded to double on return.

#include <cmath>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "mgfbm/errors.hpp"
#include "mgfbm/numeric.hpp"
#include "mgfbm/params.hpp"

namespace mgfbm {

/// Which of the two coefficient orderings applies in the increment bounds.
/// C: (H > 1/2, bc >= 0) or (H < 1/2, bc <= 0).  D: the opposite signs.
/// bc == 0 belongs to both sets and is reported as C.
enum class Regime { C, D, Boundary };

inline std::string_view to_string(Regime r) {
  switch (r) {
    case Regime::C: return "C";
    case Regime::D: return "D";
    case Regime::Boundary: return "Boundary";
  }
  return "?";
}

struct RegimeCoefficients {
  double gamma;  ///< lower-bound coefficient
  double nu;     ///< upper-bound coefficient
};

struct IncrementBounds {
  double lower;
  double upper;
};

/// R_M(p, p+n) over a list of lags together with its two-term asymptote.
struct AutocovSeries {
  std::int64_t p = 1;
  std::vector<std::int64_t> lags;
  std::vector<double> values;
  std::vector<double> asymptote;
};

namespace kernel {
namespace detail {

inline void require_time(double t, const char* name) {
  mgfbm::detail::require(t >= 0.0 && std::isfinite(t),
                         std::string("time ") + name + " must be finite and >= 0, got " +
                             std::to_string(t));
}

// Four terms of C(t, s) for t >= s >= 0, in the order
// a^2 s,  (b+c)^2/2 (t^2H + s^2H),  bc (t+s)^2H,  (b^2+c^2)/2 (t-s)^2H.
struct CovarianceTerms {
  extended brownian;
  extended marginal;
  extended cross;
  extended difference;
};

inline CovarianceTerms covariance_terms(const ProcessParams& p, extended hi, extended lo) {
  const extended a = p.a(), b = p.b(), c = p.c(), h = p.hurst();
  return {a * a * lo, (b + c) * (b + c) / 2 * (pow_2h(hi, h) + pow_2h(lo, h)),
          b * c * pow_2h(hi + lo, h), (b * b + c * c) / 2 * pow_2h(hi - lo, h)};
}

inline extended covariance_ext(const ProcessParams& p, double t, double s) {
  const double hi = std::max(t, s);
  const double lo = std::min(t, s);
  if (lo == 0.0) return 0;
  const auto terms = covariance_terms(p, hi, lo);
  return terms.brownian + terms.marginal - terms.cross - terms.difference;
}

}  // namespace detail

/// Covariance C(t, s) = a²(t∧s) + (b+c)²/2 (t^2H + s^2H) − bc (t+s)^2H − (b²+c²)/2 |t−s|^2H.
///
/// Arguments are put in canonical order first, so the result is bit-symmetric.
/// C(0, s) is exactly 0.
inline double covariance(const ProcessParams& p, double t, double s) {
  detail::require_time(t, "t");
  detail::require_time(s, "s");
  return static_cast<double>(detail::covariance_ext(p, t, s));
}

/// Sum of the magnitudes of the four covariance terms; the size against which
/// rounding error in C(t, s) is measured.
inline double covariance_scale(const ProcessParams& p, double t, double s) {
  detail::require_time(t, "t");
  detail::require_time(s, "s");
  const auto terms = detail::covariance_terms(p, std::max(t, s), std::min(t, s));
  return static_cast<double>(std::abs(terms.brownian) + std::abs(terms.marginal) +
                             std::abs(terms.cross) + std::abs(terms.difference));
}

namespace detail {

inline extended variance_ext(const ProcessParams& p, extended t) {
  const extended a = p.a(), b = p.b(), c = p.c(), h = p.hurst();
  const extended coeff = b * b + c * c - (std::pow(extended{2}, 2 * h) - 2) * b * c;
  return a * a * t + coeff * pow_2h(t, h);
}

inline extended increment_variance_ext(const ProcessParams& p, extended s, extended t) {
  const extended a = p.a(), b = p.b(), c = p.c(), h = p.hurst();
  const extended lag = t - s;
  return a * a * lag - std::pow(extended{2}, 2 * h) * b * c * (pow_2h(t, h) + pow_2h(s, h)) +
         (b * b + c * c) * pow_2h(lag, h) + 2 * b * c * pow_2h(t + s, h);
}

}  // namespace detail

/// E M_t² = a² t + (b² + c² − (2^2H − 2) bc) t^2H.
inline double variance(const ProcessParams& p, double t) {
  detail::require_time(t, "t");
  return static_cast<double>(detail::variance_ext(p, t));
}

/// E (M_t − M_s)² = a²|t−s| − 2^2H bc (t^2H + s^2H) + (b²+c²)|t−s|^2H + 2bc (t+s)^2H
/// for 0 <= s < t.
inline double increment_variance(const ProcessParams& p, double s, double t) {
  detail::require_time(s, "s");
  detail::require_time(t, "t");
  mgfbm::detail::require(s < t, "increment_variance requires s < t");
  return static_cast<double>(detail::increment_variance_ext(p, s, t));
}

inline Regime classify_regime(double b, double c, double hurst) {
  mgfbm::detail::require(hurst > 0.0 && hurst < 1.0, "Hurst parameter must lie in (0, 1)");
  if (hurst == 0.5) return Regime::Boundary;
  const double bc = b * c;
  if (bc == 0.0) return Regime::C;
  const bool same_sign = bc > 0.0;
  return (hurst > 0.5) == same_sign ? Regime::C : Regime::D;
}

/// (γ, ν) with γ ≤ ν. On C: γ = b²+c² − 2bc(2^(2H−1) − 1), ν = b²+c²; swapped on D.
inline RegimeCoefficients regime_coefficients(double b, double c, double hurst) {
  const Regime regime = classify_regime(b, c, hurst);
  mgfbm::detail::require(regime != Regime::Boundary,
                         "increment-bound coefficients are undefined at H = 1/2");
  const extended bb = b, cc = c;
  const extended sum_sq = bb * bb + cc * cc;
  const extended shifted =
      sum_sq - 2 * bb * cc * (std::pow(extended{2}, 2 * extended{hurst} - 1) - 1);
  if (regime == Regime::C) return {static_cast<double>(shifted), static_cast<double>(sum_sq)};
  return {static_cast<double>(sum_sq), static_cast<double>(shifted)};
}

/// a²(t−s) + γ (t−s)^2H  <=  E (M_t − M_s)²  <=  a²(t−s) + ν (t−s)^2H.
inline IncrementBounds increment_bounds(const ProcessParams& p, double s, double t) {
  detail::require_time(s, "s");
  detail::require_time(t, "t");
  mgfbm::detail::require(s < t, "increment_bounds requires s < t");
  const auto [gamma, nu] = regime_coefficients(p.b(), p.c(), p.hurst());
  const extended lag = extended{t} - extended{s};
  const extended brownian = extended{p.a()} * p.a() * lag;
  const extended power = pow_2h(lag, p.hurst());
  return {static_cast<double>(brownian + gamma * power), static_cast<double>(brownian + nu * power)};
}

/// Increment autocovariance R_M(p, p+n) = E[(M_{p+1} − M_p)(M_{p+n+1} − M_{p+n})]
///   = (b²+c²)/2 Δ²(n) − bc Δ²(2p+n+1),  Δ²(x) = (x+1)^2H − 2x^2H + (x−1)^2H.
///
/// The Brownian part drops out. At H = 1/2 the result is exactly 0.
inline double autocov(const ProcessParams& params, std::int64_t p, std::int64_t n) {
  mgfbm::detail::require(p >= 1, "autocov requires p >= 1");
  mgfbm::detail::require(n >= 1, "autocov requires n >= 1");
  const extended b = params.b(), c = params.c();
  const extended exponent = 2 * extended{params.hurst()};
  const extended near = mgfbm::detail::second_difference(static_cast<extended>(n), exponent);
  const extended far =
      mgfbm::detail::second_difference(static_cast<extended>(2 * p + n + 1), exponent);
  return static_cast<double>((b * b + c * c) / 2 * near - b * c * far);
}

/// Two-term large-n expansion of autocov:
///   H(2H−1)(b−c)² n^(2H−2) − 4H(2H−1)(H−1) bc (2p+1) n^(2H−3).
inline double autocov_asymptote(const ProcessParams& params, std::int64_t p, std::int64_t n) {
  mgfbm::detail::require(p >= 1, "autocov_asymptote requires p >= 1");
  mgfbm::detail::require(n >= 1, "autocov_asymptote requires n >= 1");
  const extended b = params.b(), c = params.c(), h = params.hurst();
  const extended nn = static_cast<extended>(n);
  const extended lead = h * (2 * h - 1) * (b - c) * (b - c) * std::pow(nn, 2 * h - 2);
  const extended next =
      4 * h * (2 * h - 1) * (h - 1) * b * c * (2 * p + 1) * std::pow(nn, 2 * h - 3);
  return static_cast<double>(lead - next);
}

inline AutocovSeries autocov_series(const ProcessParams& params, std::int64_t p,
                                    std::vector<std::int64_t> lags) {
  AutocovSeries out;
  out.p = p;
  out.values.reserve(lags.size());
  out.asymptote.reserve(lags.size());
  for (std::int64_t n : lags) {
    out.values.push_back(autocov(params, p, n));
    out.asymptote.push_back(autocov_asymptote(params, p, n));
  }
  out.lags = std::move(lags);
  return out;
}

/// C(s,u) C(t,t) − C(s,t) C(t,u) for 0 < s < t < u. Identically zero exactly
/// when the centered Gaussian process is Markov.
inline double markov_defect(const ProcessParams& p, double s, double t, double u) {
  mgfbm::detail::require(0.0 < s && s < t && t < u && std::isfinite(u),
                         "markov_defect requires 0 < s < t < u");
  return static_cast<double>(detail::covariance_ext(p, s, u) * detail::covariance_ext(p, t, t) -
                             detail::covariance_ext(p, s, t) * detail::covariance_ext(p, t, u));
}

/// Parameters of t -> M_{ht}: (a√h, b h^H, c h^H, H).
inline ProcessParams rescaled_params(const ProcessParams& p, double h) {
  mgfbm::detail::require(h > 0.0 && std::isfinite(h), "rescaling factor h must be > 0");
  const extended factor = std::pow(extended{h}, extended{p.hurst()});
  return {static_cast<double>(extended{p.a()} * std::sqrt(extended{h})),
          static_cast<double>(p.b() * factor), static_cast<double>(p.c() * factor), p.hurst()};
}

/// a² + ν: bounds E (M_t − M_s)² by C (t−s)^(2(1/2 ∧ H)) for 0 <= s < t <= 1.
inline double holder_constant(const ProcessParams& p) {
  const auto coeffs = regime_coefficients(p.b(), p.c(), p.hurst());
  return p.a() * p.a() + coeffs.nu;
}

}  // namespace kernel
}  // namespace mgfbm
