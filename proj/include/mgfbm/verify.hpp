#pragma once

// Executable checks of the stochastic properties of the mgfBm family:
// Monte-Carlo covariance consistency, long-range-dependence slope
// classification, (mixed) self-similarity and stationarity defects, Markov
// defect scans, path regularity and quadratic-variation diagnostics.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>
#include <boost/math/distributions/binomial.hpp>
#include <json.hpp>

#include "mgfbm/errors.hpp"
#include "mgfbm/grid.hpp"
#include "mgfbm/kernel.hpp"
#include "mgfbm/params.hpp"
#include "mgfbm/sampler.hpp"

namespace mgfbm {

/// A check passes when its statistic is <= threshold (at_most) or > threshold (above).
enum class Direction { at_most, above };

struct CheckReport {
  std::string name;
  bool passed = false;
  double statistic = 0.0;
  double threshold = 0.0;
  Direction direction = Direction::at_most;
  nlohmann::json details = nlohmann::json::object();
};

inline CheckReport make_report(std::string name, double statistic, double threshold,
                               Direction direction, nlohmann::json details = nlohmann::json::object()) {
  const bool passed =
      direction == Direction::at_most ? statistic <= threshold : statistic > threshold;
  return {std::move(name), passed, statistic, threshold, direction, std::move(details)};
}

inline void to_json(nlohmann::json& j, const CheckReport& r) {
  j = nlohmann::json{{"name", r.name},
                     {"passed", r.passed},
                     {"statistic", r.statistic},
                     {"threshold", r.threshold},
                     {"details", r.details}};
  j["details"]["direction"] = r.direction == Direction::at_most ? "at_most" : "above";
}

enum class Dependence { long_range, short_range };

inline std::string_view to_string(Dependence d) {
  return d == Dependence::long_range ? "long_range" : "short_range";
}

struct LrdVerdict {
  Dependence classification = Dependence::short_range;
  double fitted_slope = std::numeric_limits<double>::quiet_NaN();
  /// 2H − 2 when b ≠ c, 2H − 3 when b = c.
  double expected_slope = std::numeric_limits<double>::quiet_NaN();
  std::int64_t p = 1;
  /// R_M vanished identically over the scanned lags (H = 1/2 or b = c = 0).
  bool zero_signal = false;
  /// fitted_slope > −1 exactly when classified long-range.
  bool slope_agrees = true;
  std::vector<std::int64_t> lags;
  std::vector<double> values;
};

namespace detail {

/// Smallest k with P(Binomial(trials, q) > k) <= alpha.
inline std::size_t binomial_allowance(std::size_t trials, double q, double alpha = 1e-3) {
  if (trials == 0 || q <= 0.0) return 0;
  const boost::math::binomial_distribution<double> dist(static_cast<double>(trials), q);
  for (std::size_t k = 0; k < trials; ++k) {
    if (boost::math::cdf(boost::math::complement(dist, static_cast<double>(k))) <= alpha) return k;
  }
  return trials;
}

/// Least-squares slope of y against x.
inline double ls_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  return sxy / sxx;
}

inline Eigen::MatrixXd second_moments(const PathEnsemble& e) {
  return (e.paths.transpose() * e.paths) / static_cast<double>(e.n_paths());
}

struct ZScan {
  std::size_t pairs = 0;
  std::size_t exceedances = 0;
  double max_abs_z = 0.0;
};

// Counts upper-triangle entries with |observed - expected| / se > tol_z.
// Entries with zero standard error count only if they differ at all.
template <class SeFn>
ZScan scan_z(const Eigen::MatrixXd& observed, const Eigen::MatrixXd& expected, SeFn se_of,
             double tol_z) {
  ZScan scan;
  for (Eigen::Index i = 0; i < observed.rows(); ++i) {
    for (Eigen::Index j = i; j < observed.cols(); ++j) {
      ++scan.pairs;
      const double diff = std::abs(observed(i, j) - expected(i, j));
      const double se = se_of(i, j);
      const double z = se > 0.0 ? diff / se
                                : (diff == 0.0 ? 0.0 : std::numeric_limits<double>::infinity());
      scan.max_abs_z = std::max(scan.max_abs_z, z);
      if (z > tol_z) ++scan.exceedances;
    }
  }
  return scan;
}

inline CheckReport exceedance_report(std::string name, const ZScan& scan, double tol_z,
                                     std::size_t n_paths) {
  const double level = std::erfc(tol_z / std::sqrt(2.0));
  const std::size_t allowed = binomial_allowance(scan.pairs, level);
  nlohmann::json details{{"pairs", scan.pairs},
                         {"exceedances", scan.exceedances},
                         {"expected_exceedances", static_cast<double>(scan.pairs) * level},
                         {"max_abs_z", scan.max_abs_z},
                         {"tol_z", tol_z},
                         {"n_paths", n_paths}};
  return make_report(std::move(name), static_cast<double>(scan.exceedances),
                     static_cast<double>(allowed), Direction::at_most, std::move(details));
}

}  // namespace detail

/// Compares the ensemble's second-moment matrix with the analytic covariance
/// of `params` (default: the ensemble's own). Entry (i, j) has standard error
/// sqrt((c_ii c_jj + c_ij²) / n); the check passes when the number of entries
/// with |z| > tol_z is within the upper 0.1% binomial quantile for the
/// two-sided level 2Φ(−tol_z).
inline CheckReport covariance_consistency(const PathEnsemble& ensemble, double tol_z,
                                          const std::optional<ProcessParams>& params = {}) {
  detail::require(ensemble.n_paths() >= 1000, "covariance_consistency needs at least 1000 paths");
  detail::require(tol_z > 0.0, "tol_z must be > 0");
  const ProcessParams& target = params ? *params : ensemble.params;
  const Eigen::MatrixXd expected = covariance_matrix(target, ensemble.grid);
  const Eigen::MatrixXd observed = detail::second_moments(ensemble);
  const double n = static_cast<double>(ensemble.n_paths());
  const auto scan = detail::scan_z(
      observed, expected,
      [&](Eigen::Index i, Eigen::Index j) {
        return std::sqrt((expected(i, i) * expected(j, j) + expected(i, j) * expected(i, j)) / n);
      },
      tol_z);
  return detail::exceedance_report("cov-consistency", scan, tol_z, ensemble.n_paths());
}

/// Two-sample version: second-moment matrices of two ensembles on the same
/// grid, standard errors from the analytic covariance of `params`.
inline CheckReport covariance_agreement(const PathEnsemble& first, const PathEnsemble& second,
                                        double tol_z, const ProcessParams& params) {
  detail::require(first.grid.size() == second.grid.size(),
                  "covariance_agreement needs ensembles on grids of equal size");
  detail::require(tol_z > 0.0, "tol_z must be > 0");
  const Eigen::MatrixXd c = covariance_matrix(params, first.grid);
  const Eigen::MatrixXd m1 = detail::second_moments(first);
  const Eigen::MatrixXd m2 = detail::second_moments(second);
  const double inv_n = 1.0 / static_cast<double>(first.n_paths()) +
                       1.0 / static_cast<double>(second.n_paths());
  const auto scan = detail::scan_z(
      m1, m2,
      [&](Eigen::Index i, Eigen::Index j) {
        return std::sqrt((c(i, i) * c(j, j) + c(i, j) * c(i, j)) * inv_n);
      },
      tol_z);
  return detail::exceedance_report("cov-agreement", scan, tol_z,
                                   std::min(first.n_paths(), second.n_paths()));
}

/// Fits log|R_M(p, p+n)| against log n over n = n_min 2^k <= n_max.
inline LrdVerdict lrd_scan(const ProcessParams& params, std::int64_t p, std::int64_t n_min,
                           std::int64_t n_max) {
  detail::require(p >= 1, "lrd_scan requires p >= 1");
  detail::require(1 <= n_min && n_min < n_max, "lrd_scan requires 1 <= n_min < n_max");
  const double h = params.hurst();
  const bool distinct = params.b() != params.c();

  LrdVerdict v;
  v.p = p;
  v.expected_slope = distinct ? 2 * h - 2 : 2 * h - 3;
  for (std::int64_t n = n_min; n <= n_max; n *= 2) {
    v.lags.push_back(n);
    v.values.push_back(kernel::autocov(params, p, n));
  }

  std::vector<double> x, y;
  for (std::size_t i = 0; i < v.lags.size(); ++i) {
    if (v.values[i] == 0.0) continue;
    x.push_back(std::log(static_cast<double>(v.lags[i])));
    y.push_back(std::log(std::abs(v.values[i])));
  }
  if (h == 0.5 || x.size() < 2) {
    v.zero_signal = true;
    v.classification = Dependence::short_range;
    return v;
  }
  v.fitted_slope = detail::ls_slope(x, y);
  v.classification = (h > 0.5 && distinct) ? Dependence::long_range : Dependence::short_range;
  v.slope_agrees = (v.fitted_slope > -1.0) == (v.classification == Dependence::long_range);
  return v;
}

/// (N, Σ_{n=1..N} R_M(p, p+n)) for each N in the increasing list.
inline std::vector<std::pair<std::int64_t, double>> partial_sum_curve(
    const ProcessParams& params, std::int64_t p, const std::vector<std::int64_t>& n_list) {
  detail::require(std::is_sorted(n_list.begin(), n_list.end()), "N list must be increasing");
  std::vector<std::pair<std::int64_t, double>> out;
  out.reserve(n_list.size());
  extended sum = 0;
  std::int64_t n = 0;
  for (std::int64_t target : n_list) {
    detail::require(target >= 1, "partial sums need N >= 1");
    for (; n < target; ++n) sum += kernel::autocov(params, p, n + 1);
    out.emplace_back(target, static_cast<double>(sum));
  }
  return out;
}

/// Var(M_{t+s} − M_s) − Var(M_t). Zero for all (s, t) exactly when the
/// increments are stationary.
inline double stationarity_gap(const ProcessParams& params, double s, double t) {
  detail::require(s > 0.0 && t > 0.0 && std::isfinite(s) && std::isfinite(t),
                  "stationarity_gap requires s > 0 and t > 0");
  const extended shifted = extended{s} + extended{t};
  return static_cast<double>(kernel::detail::increment_variance_ext(params, s, shifted) -
                             kernel::detail::variance_ext(params, t));
}

/// max over grid pairs of |C(ht, hs) − h^2H C(t, s)|.
inline double self_similarity_defect(const ProcessParams& params, double h, const TimeGrid& grid) {
  detail::require(h > 0.0 && std::isfinite(h), "rescaling factor h must be > 0");
  const double factor = std::pow(h, 2 * params.hurst());
  double worst = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    for (std::size_t j = i; j < grid.size(); ++j) {
      const double scaled = kernel::covariance(params, h * grid[i], h * grid[j]);
      worst = std::max(worst, std::abs(scaled - factor * kernel::covariance(params, grid[i], grid[j])));
    }
  }
  return worst;
}

/// max over grid pairs of |C(ht, hs) − C'(t, s)| with C' the covariance of
/// rescaled_params(params, h).
inline double mixed_self_similarity_defect(const ProcessParams& params, double h,
                                           const TimeGrid& grid) {
  const ProcessParams rescaled = kernel::rescaled_params(params, h);
  double worst = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    for (std::size_t j = i; j < grid.size(); ++j) {
      worst = std::max(worst, std::abs(kernel::covariance(params, h * grid[i], h * grid[j]) -
                                       kernel::covariance(rescaled, grid[i], grid[j])));
    }
  }
  return worst;
}

/// Largest covariance magnitude entering either defect above; the unit for
/// ulp-scale tolerances.
inline double scaling_defect_scale(const ProcessParams& params, double h, const TimeGrid& grid) {
  const double factor = std::pow(h, 2 * params.hurst());
  double scale = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    for (std::size_t j = i; j < grid.size(); ++j) {
      scale = std::max({scale, kernel::covariance_scale(params, h * grid[i], h * grid[j]),
                        factor * kernel::covariance_scale(params, grid[i], grid[j])});
    }
  }
  return scale;
}

/// Path regularity exponent: half the log-log slope of the empirical
/// variogram E|M_{t+δ} − M_t|² over δ = dt 2^k, k = 0..6.
inline double holder_estimate(const PathEnsemble& ensemble) {
  detail::require(ensemble.grid.is_uniform(), "holder_estimate needs a uniform grid");
  detail::require(ensemble.n_times() >= 256, "holder_estimate needs at least 256 grid points");
  detail::require(ensemble.n_paths() >= 100, "holder_estimate needs at least 100 paths");
  std::vector<double> log_lag, log_var;
  const auto cols = static_cast<Eigen::Index>(ensemble.n_times());
  for (int k = 0; k <= 6; ++k) {
    const Eigen::Index lag = Eigen::Index{1} << k;
    const auto diff = ensemble.paths.rightCols(cols - lag) - ensemble.paths.leftCols(cols - lag);
    const double mean_sq = diff.squaredNorm() / static_cast<double>(diff.size());
    log_lag.push_back(std::log(ensemble.grid.dt() * static_cast<double>(lag)));
    log_var.push_back(std::log(mean_sq));
  }
  return detail::ls_slope(log_lag, log_var) / 2.0;
}

/// Realized quadratic variation per path on dyadic sub-grids, coarsest first.
struct QvProfile {
  std::vector<std::size_t> intervals;
  std::vector<double> mesh;
  /// levels x n_paths.
  Eigen::MatrixXd qv;

  double mean(std::size_t level) const { return qv.row(static_cast<Eigen::Index>(level)).mean(); }
  std::size_t levels() const { return intervals.size(); }
};

inline QvProfile quadratic_variation(const PathEnsemble& ensemble) {
  const TimeGrid& grid = ensemble.grid;
  detail::require(grid.size() >= 2 && grid.is_uniform() && grid.zero_anchored(),
                  "quadratic_variation needs a uniform grid starting at 0");
  const std::size_t steps = grid.size() - 1;
  std::vector<std::size_t> strides;
  for (std::size_t stride = 1; stride <= steps && steps % stride == 0; stride *= 2) {
    strides.push_back(stride);
  }
  std::reverse(strides.begin(), strides.end());

  QvProfile out;
  out.qv.resize(static_cast<Eigen::Index>(strides.size()),
                static_cast<Eigen::Index>(ensemble.n_paths()));
  for (std::size_t level = 0; level < strides.size(); ++level) {
    const std::size_t stride = strides[level];
    out.intervals.push_back(steps / stride);
    out.mesh.push_back(grid.dt() * static_cast<double>(stride));
    for (std::size_t path = 0; path < ensemble.n_paths(); ++path) {
      const auto row = static_cast<Eigen::Index>(path);
      double acc = 0.0;
      for (std::size_t i = 0; i + stride <= steps; i += stride) {
        const double d = ensemble.paths(row, static_cast<Eigen::Index>(i + stride)) -
                         ensemble.paths(row, static_cast<Eigen::Index>(i));
        acc += d * d;
      }
      out.qv(static_cast<Eigen::Index>(level), row) = acc;
    }
  }
  return out;
}

/// Expected realized QV on the uniform grid with the given number of intervals.
inline double expected_quadratic_variation(const ProcessParams& params, double horizon,
                                           std::size_t intervals) {
  double sum = 0.0;
  for (std::size_t i = 0; i < intervals; ++i) {
    const double s = horizon * static_cast<double>(i) / static_cast<double>(intervals);
    const double t = horizon * static_cast<double>(i + 1) / static_cast<double>(intervals);
    sum += kernel::increment_variance(params, s, t);
  }
  return sum;
}

// ---------------------------------------------------------------------------
// Suite-level checks. Each turns one property into a CheckReport whose
// verdict is "the observed behaviour matches what theory predicts".

inline constexpr double kUlpTolerance = 8.0;

/// Markov criterion scanned over s = √t, u = t², t ∈ {2, 4, 8, 16}.
/// Predicted Markov iff H = 1/2 or b = c = 0.
inline CheckReport check_markov(const ProcessParams& params) {
  const bool markov = params.hurst() == 0.5 || (params.b() == 0.0 && params.c() == 0.0);
  double worst_ulps = 0.0;
  double worst_relative = 0.0;
  nlohmann::json rows = nlohmann::json::array();
  for (double t : {2.0, 4.0, 8.0, 16.0}) {
    const double s = std::sqrt(t);
    const double u = t * t;
    const double defect = kernel::markov_defect(params, s, t, u);
    const double ctt = kernel::covariance(params, t, t);
    const double scale = std::max(kernel::covariance_scale(params, s, u) * kernel::covariance_scale(params, t, t),
                                  kernel::covariance_scale(params, s, t) * kernel::covariance_scale(params, t, u));
    worst_ulps = std::max(worst_ulps, ulp_distance(defect, 0.0, scale));
    worst_relative = std::max(worst_relative, std::abs(defect) / (ctt * ctt));
    rows.push_back({{"t", t}, {"defect", defect}, {"relative", std::abs(defect) / (ctt * ctt)}});
  }
  nlohmann::json details{{"predicted_markov", markov}, {"scan", rows}};
  if (markov) {
    return make_report("markov", worst_ulps, kUlpTolerance, Direction::at_most, std::move(details));
  }
  return make_report("markov", worst_relative, 1e-9, Direction::above, std::move(details));
}

/// Stationarity gap over (s, t) ∈ {0.25, 0.5, 1, 2, 4}². Predicted stationary
/// iff bc = 0 or H = 1/2.
inline CheckReport check_stationarity(const ProcessParams& params) {
  const bool stationary = params.b() * params.c() == 0.0 || params.hurst() == 0.5;
  const std::vector<double> points{0.25, 0.5, 1.0, 2.0, 4.0};
  double worst_ulps = 0.0;
  double worst_relative = 0.0;
  for (double s : points) {
    for (double t : points) {
      const double gap = stationarity_gap(params, s, t);
      const double scale = kernel::covariance_scale(params, s + t, s + t) +
                           kernel::covariance_scale(params, s, s) +
                           kernel::covariance_scale(params, t, t);
      worst_ulps = std::max(worst_ulps, ulp_distance(gap, 0.0, scale));
      worst_relative = std::max(worst_relative, std::abs(gap) / scale);
    }
  }
  nlohmann::json details{{"predicted_stationary", stationary}, {"max_relative_gap", worst_relative}};
  if (stationary) {
    return make_report("stationarity", worst_ulps, kUlpTolerance, Direction::at_most,
                       std::move(details));
  }
  return make_report("stationarity", worst_relative, 1e-9, Direction::above,
                     std::move(details));
}

inline TimeGrid default_check_grid() { return TimeGrid({0.5, 1.0, 2.0, 4.0}); }

/// Self-similarity defect for h ∈ {0.5, 2, 3}. Predicted self-similar iff
/// a = 0 or H = 1/2; otherwise the defect must exceed 1e-6.
inline CheckReport check_self_similarity(const ProcessParams& params) {
  const bool self_similar = params.a() == 0.0 || params.hurst() == 0.5;
  const TimeGrid grid = default_check_grid();
  double worst = 0.0;
  double worst_ulps = 0.0;
  for (double h : {0.5, 2.0, 3.0}) {
    const double d = self_similarity_defect(params, h, grid);
    worst = std::max(worst, d);
    worst_ulps = std::max(worst_ulps, ulp_distance(d, 0.0, scaling_defect_scale(params, h, grid)));
  }
  nlohmann::json details{{"predicted_self_similar", self_similar}, {"max_defect", worst}};
  if (self_similar) {
    return make_report("self-similarity", worst_ulps, kUlpTolerance, Direction::at_most,
                       std::move(details));
  }
  return make_report("self-similarity", worst, 1e-6, Direction::above, std::move(details));
}

/// Mixed self-similarity defect in ulps for h ∈ {0.5, 2, 3, 10}.
inline CheckReport check_mixed_self_similarity(const ProcessParams& params) {
  const TimeGrid grid = default_check_grid();
  double worst_ulps = 0.0;
  for (double h : {0.5, 2.0, 3.0, 10.0}) {
    worst_ulps = std::max(worst_ulps, ulp_distance(mixed_self_similarity_defect(params, h, grid), 0.0,
                                                   scaling_defect_scale(params, h, grid)));
  }
  return make_report("mixed-self-similarity", worst_ulps, kUlpTolerance, Direction::at_most,
                     {{"max_defect_ulps", worst_ulps}});
}

/// Slope classification over n ∈ [n_min, n_max]: passes when the fitted slope
/// is within 0.05 of the predicted exponent and agrees with the dichotomy.
inline CheckReport check_lrd(const ProcessParams& params, std::int64_t p = 1,
                             std::int64_t n_min = 1000, std::int64_t n_max = 1000000) {
  const LrdVerdict v = lrd_scan(params, p, n_min, n_max);
  nlohmann::json details{{"classification", to_string(v.classification)},
                         {"expected_slope", v.expected_slope},
                         {"zero_signal", v.zero_signal},
                         {"slope_agrees", v.slope_agrees},
                         {"p", v.p}};
  if (v.zero_signal) {
    details["fitted_slope"] = nullptr;
    return make_report("lrd", 0.0, 0.05, Direction::at_most, std::move(details));
  }
  details["fitted_slope"] = v.fitted_slope;
  // A slope on the wrong side of -1 contradicts the classification outright.
  const double error = v.slope_agrees ? std::abs(v.fitted_slope - v.expected_slope)
                                      : std::numeric_limits<double>::infinity();
  return make_report("lrd", error, 0.05, Direction::at_most, std::move(details));
}

/// Exponent governing the small-scale variogram: 1/2 without fractional part,
/// H without Brownian part, 1/2 ∧ H otherwise.
inline double variogram_exponent(const ProcessParams& params) {
  if (params.b() == 0.0 && params.c() == 0.0) return 0.5;
  if (params.a() == 0.0) return params.hurst();
  return std::min(0.5, params.hurst());
}

/// Hölder exponent estimate against variogram_exponent with ±0.05 tolerance.
inline CheckReport check_holder(const PathEnsemble& ensemble) {
  const double expected = variogram_exponent(ensemble.params);
  const double estimate = holder_estimate(ensemble);
  return make_report("holder", std::abs(estimate - expected), 0.05, Direction::at_most,
                     {{"estimate", estimate},
                      {"expected", expected},
                      {"lower_bound", std::min(0.5, ensemble.params.hurst())}});
}

/// Mean realized QV on the finest mesh against its exact expectation, in units
/// of the per-path standard error E[QV] √(2/N).
inline CheckReport check_qv(const PathEnsemble& ensemble) {
  const QvProfile profile = quadratic_variation(ensemble);
  const std::size_t finest = profile.levels() - 1;
  const std::size_t n = profile.intervals[finest];
  const double horizon = ensemble.grid.times().back();
  const double expected = expected_quadratic_variation(ensemble.params, horizon, n);
  const double observed = profile.mean(finest);
  const double se = expected * std::sqrt(2.0 / static_cast<double>(n));
  nlohmann::json levels = nlohmann::json::array();
  for (std::size_t l = 0; l < profile.levels(); ++l) {
    levels.push_back({{"intervals", profile.intervals[l]}, {"mean_qv", profile.mean(l)}});
  }
  return make_report("qv", std::abs(observed - expected) / se, 3.0, Direction::at_most,
                     {{"observed", observed}, {"expected", expected}, {"se", se}, {"levels", levels}});
}

}  // namespace mgfbm
