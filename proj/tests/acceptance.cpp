// Acceptance suite: one PASS/FAIL line per criterion, exit status 0 iff all pass.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_bin_float.hpp>

#include "mgfbm/mgfbm.hpp"

using namespace mgfbm;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool passed;
  std::string detail;
};

struct Criterion {
  int id;
  std::string name;
  double budget_seconds;
  std::function<Outcome()> body;
};

std::string fmt(double v, int digits = 4) {
  std::ostringstream os;
  os.precision(digits);
  os << v;
  return os.str();
}

std::mt19937_64& rng() {
  static std::mt19937_64 gen(20240611);
  return gen;
}

double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng()); }

double hurst_away_from_half(double margin) {
  double h = uniform(0.05, 0.95);
  while (std::abs(h - 0.5) < margin) h = uniform(0.05, 0.95);
  return h;
}

ProcessParams random_params() {
  return {uniform(-2, 2), uniform(-2, 2), uniform(-2, 2), uniform(0.05, 0.95)};
}

// 1 ---------------------------------------------------------------------------

using big = boost::multiprecision::cpp_bin_float_50;

// Four-point combination of covariances at integer times, with x^2H tabulated
// in 50-digit arithmetic.
struct FourPointOracle {
  ProcessParams p;
  std::vector<big> pw;

  FourPointOracle(const ProcessParams& params, std::int64_t max_x) : p(params) {
    pw.resize(static_cast<std::size_t>(max_x + 1));
    const big two_h = 2 * big(params.hurst());
    for (std::int64_t x = 0; x <= max_x; ++x) {
      pw[static_cast<std::size_t>(x)] = x == 0 ? big(0) : boost::multiprecision::pow(big(x), two_h);
    }
  }

  big cov(std::int64_t t, std::int64_t s) const {
    const big a = p.a(), b = p.b(), c = p.c();
    const auto at = [&](std::int64_t x) { return pw[static_cast<std::size_t>(x)]; };
    return a * a * big(std::min(t, s)) + (b + c) * (b + c) / 2 * (at(t) + at(s)) - b * c * at(t + s) -
           (b * b + c * c) / 2 * at(std::abs(t - s));
  }

  double autocov(std::int64_t q, std::int64_t n) const {
    return static_cast<double>(cov(q + 1, q + n + 1) - cov(q + 1, q + n) - cov(q, q + n + 1) + cov(q, q + n));
  }
};

double second_difference_double(double x, double h) {
  return std::pow(x + 1, 2 * h) - 2 * std::pow(x, 2 * h) + std::pow(x - 1, 2 * h);
}

Outcome covariance_identities() {
  double worst_triangle = 0.0;
  for (int i = 0; i < 10000; ++i) {
    const auto p = random_params();
    double s = uniform(0, 20), t = uniform(0, 20);
    if (s > t) std::swap(s, t);
    if (s == t) continue;
    const double lhs = kernel::increment_variance(p, s, t);
    const double rhs = kernel::variance(p, t) + kernel::variance(p, s) - 2 * kernel::covariance(p, t, s);
    const double scale = 2 * kernel::covariance_scale(p, t, s) + kernel::covariance_scale(p, t, t) +
                         kernel::covariance_scale(p, s, s);
    worst_triangle = std::max(worst_triangle, ulp_distance(lhs, rhs, scale));
  }

  double worst_autocov = 0.0;
  std::size_t comparisons = 0;
  for (int k = 0; k < 5; ++k) {
    const ProcessParams p{uniform(-2, 2), uniform(-2, 2), uniform(-2, 2), hurst_away_from_half(0.01)};
    const FourPointOracle oracle(p, 2 * 20 + 1000 + 2);
    for (std::int64_t q = 1; q <= 20; ++q) {
      for (std::int64_t n = 1; n <= 1000; ++n) {
        const double h = p.hurst();
        const double scale =
            std::abs((p.b() * p.b() + p.c() * p.c()) / 2 * second_difference_double(static_cast<double>(n), h)) +
            std::abs(p.b() * p.c() * second_difference_double(static_cast<double>(2 * q + n + 1), h));
        worst_autocov = std::max(worst_autocov, ulp_distance(kernel::autocov(p, q, n), oracle.autocov(q, n), scale));
        ++comparisons;
      }
    }
  }
  return {worst_triangle <= 8 && worst_autocov <= 16,
          "triangle max " + fmt(worst_triangle) + " ulps (<= 8) over 10000 draws; autocov max " +
              fmt(worst_autocov) + " ulps (<= 16) over " + std::to_string(comparisons) + " (params, p, n)"};
}

// 2 ---------------------------------------------------------------------------

Outcome mixed_self_similarity() {
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const auto p = random_params();
    const double h = std::exp(uniform(std::log(0.01), std::log(100.0)));
    const double t = uniform(0, 10), s = uniform(0, 10);
    const double lhs = kernel::covariance(p, h * t, h * s);
    const double rhs = kernel::covariance(kernel::rescaled_params(p, h), t, s);
    worst = std::max(worst, ulp_distance(lhs, rhs, kernel::covariance_scale(p, h * t, h * s)));
  }

  std::string mc;
  bool mc_ok = true;
  std::uint64_t seed = 100;
  for (const auto& [p, h] : {std::pair{ProcessParams{1, 0.8, -0.5, 0.7}, 2.5},
                             std::pair{ProcessParams{0.6, 1.0, 0.4, 0.3}, 0.4}}) {
    const auto scaled_time = fast_sample(p, TimeGrid::uniform(h, 16), 100000, seed++);
    const auto rescaled = fast_sample(kernel::rescaled_params(p, h), TimeGrid::uniform(1, 16), 100000, seed++);
    const auto report = covariance_agreement(rescaled, scaled_time, 3.0, kernel::rescaled_params(p, h));
    mc_ok = mc_ok && report.passed;
    mc += (mc.empty() ? " h=" : "; h=") + fmt(h) + ": " + fmt(report.statistic, 3) + " of " +
          std::to_string(report.details.at("pairs").get<int>()) + " pairs beyond 3 sigma (allowed " +
          fmt(report.threshold, 3) + ")";
  }
  return {worst <= 8 && mc_ok, "analytic max " + fmt(worst) + " ulps (<= 8) over 1000 draws;" + mc};
}

// 3 ---------------------------------------------------------------------------

Outcome non_self_similarity() {
  const TimeGrid grid = default_check_grid();
  const std::vector<double> scales{0.5, 2.0, 3.0};
  int non_ss = 0, non_ss_found = 0, ss = 0, ss_ok = 0;
  double weakest = 1e300, worst_ulps = 0.0;
  for (int i = 0; i < 100; ++i) {
    const int kind = i % 4;
    double a = std::copysign(uniform(0.1, 2.0), uniform(-1, 1));
    double h = hurst_away_from_half(0.05);
    if (kind == 2) a = 0.0;
    if (kind == 3) h = 0.5;
    const ProcessParams p{a, uniform(-2, 2), uniform(-2, 2), h};
    double defect = 0.0, ulps = 0.0;
    for (double k : scales) {
      defect = std::max(defect, self_similarity_defect(p, k, grid));
      ulps = std::max(ulps, ulp_distance(self_similarity_defect(p, k, grid), 0.0, scaling_defect_scale(p, k, grid)));
    }
    if (kind < 2) {
      ++non_ss;
      weakest = std::min(weakest, defect);
      if (defect > 1e-6) ++non_ss_found;
    } else {
      ++ss;
      worst_ulps = std::max(worst_ulps, ulps);
      if (ulps <= 8) ++ss_ok;
    }
  }
  return {non_ss_found == non_ss && ss_ok == ss,
          "a!=0, H!=1/2: " + std::to_string(non_ss_found) + "/" + std::to_string(non_ss) +
              " with defect > 1e-6 (smallest " + fmt(weakest) + "); a=0 or H=1/2: " + std::to_string(ss_ok) + "/" +
              std::to_string(ss) + " within 8 ulps (max " + fmt(worst_ulps) + ")"};
}

// 4 ---------------------------------------------------------------------------

Outcome markov() {
  int found = 0;
  double weakest = 1e300;
  for (int i = 0; i < 50; ++i) {
    double b = uniform(-2, 2), c = uniform(-2, 2);
    while (std::abs(b) + std::abs(c) < 0.1) b = uniform(-2, 2);
    const ProcessParams p{uniform(-2, 2), b, c, hurst_away_from_half(0.05)};
    const auto report = check_markov(p);
    weakest = std::min(weakest, report.statistic);
    if (report.passed) ++found;
  }
  double worst_ulps = 0.0;
  bool exact_ok = true;
  for (const ProcessParams& p : {ProcessParams{1, 0, 0, 0.2}, ProcessParams{1, 0, 0, 0.7},
                                 ProcessParams{1, 0, 0, 0.9}, ProcessParams{0, 1, 0, 0.5}}) {
    const auto report = check_markov(p);
    worst_ulps = std::max(worst_ulps, report.statistic);
    exact_ok = exact_ok && report.passed;
  }
  return {found == 50 && exact_ok,
          std::to_string(found) + "/50 non-Markov configurations with |defect| > 1e-9 C(t,t)^2 (smallest " +
              fmt(weakest) + "); Markov cases max " + fmt(worst_ulps) + " ulps (<= 8)"};
}

// 5 ---------------------------------------------------------------------------

Outcome lrd() {
  int class_ok = 0, slope_ok = 0, slope_checked = 0, zero = 0;
  double worst = 0.0;
  for (int i = 0; i < 200; ++i) {
    const int kind = i % 10;
    double b = uniform(-2, 2), c = uniform(-2, 2);
    if (kind < 3) c = b;
    if (kind == 3) b = c = 0.0;
    while (kind > 3 && std::abs(b - c) < 0.5) c = uniform(-2, 2);
    const double h = hurst_away_from_half(0.05);
    const ProcessParams p{kind == 3 ? 1.0 : uniform(-2, 2), b, c, h};
    const auto v = lrd_scan(p, 1, 1000, 1000000);
    const bool predicted = h > 0.5 && b != c;
    if ((v.classification == Dependence::long_range) == predicted) ++class_ok;
    if (v.zero_signal) {
      ++zero;
      continue;
    }
    ++slope_checked;
    const double err = std::abs(v.fitted_slope - v.expected_slope);
    worst = std::max(worst, err);
    if (err <= 0.05) ++slope_ok;
  }
  return {class_ok == 200 && slope_ok == slope_checked,
          "classification " + std::to_string(class_ok) + "/200; slope within 0.05 for " + std::to_string(slope_ok) +
              "/" + std::to_string(slope_checked) + " (max error " + fmt(worst) + ", " + std::to_string(zero) +
              " zero-signal)"};
}

// 6 ---------------------------------------------------------------------------

Outcome samplers() {
  const TimeGrid grid = TimeGrid::uniform(1, 16);
  const std::size_t n = 200000;
  int ok = 0, total = 0;
  std::string failures;
  double exceed = 0.0;
  std::uint64_t seed = 600;
  for (Preset preset : {Preset::bm, Preset::fbm, Preset::sfbm, Preset::gfbm, Preset::mfbm, Preset::smfbm}) {
    for (double h : {0.25, 0.75}) {
      const PresetWeights w = preset == Preset::gfbm ? PresetWeights{std::nullopt, 0.8, -0.6}
                                                     : PresetWeights{1.0, 1.0, std::nullopt};
      const ProcessParams p = special_case(preset, h, w);
      const auto chol = cholesky_sample(p, grid, n, seed++);
      const auto fast = fast_sample(p, grid, n, seed++);
      const auto reports = {covariance_consistency(chol, 4.0), covariance_consistency(fast, 4.0),
                            covariance_agreement(chol, fast, 4.0, p)};
      for (const auto& r : reports) {
        ++total;
        exceed += r.statistic;
        if (r.passed) {
          ++ok;
        } else {
          failures += " " + std::string(to_string(preset)) + "/H=" + fmt(h) + "/" + r.name;
        }
      }
    }
  }
  return {ok == total, std::to_string(ok) + "/" + std::to_string(total) +
                           " checks (cholesky, circulant, agreement) at tol_z 4, n_paths 2e5; total exceedances " +
                           fmt(exceed) + " over " + std::to_string(total * 153) + " entries" +
                           (failures.empty() ? "" : "; failed:" + failures)};
}

// 7 ---------------------------------------------------------------------------

Outcome holder() {
  const TimeGrid grid = TimeGrid::uniform(1, 4096);
  bool ok = true;
  std::string detail;
  std::uint64_t seed = 700;
  for (const ProcessParams& p : {ProcessParams{0, 1, 0, 0.25}, ProcessParams{0, 1, 0, 0.75},
                                 ProcessParams{1, 1, 1, 0.25}, ProcessParams{1, 1, 1, 0.75}}) {
    const double target = std::min(0.5, p.hurst());
    const double estimate = holder_estimate(fast_sample(p, grid, 100, seed++));
    const bool hit = std::abs(estimate - target) <= 0.05;
    ok = ok && hit;
    std::ostringstream os;
    os << (detail.empty() ? " " : "; ") << p << " " << fmt(estimate, 3) << " vs " << fmt(target, 3)
       << (hit ? "" : " (miss)");
    detail += os.str();
  }
  return {ok, "estimates:" + detail};
}

// 8 ---------------------------------------------------------------------------

Outcome quadratic_variation_diagnostic() {
  const TimeGrid grid = TimeGrid::uniform(1, 4096);
  const auto mixed = quadratic_variation(fast_sample({1, 1, 0, 0.75}, grid, 100, 800));
  const std::size_t finest = mixed.levels() - 1;
  const double se = std::sqrt(2.0 / static_cast<double>(mixed.intervals[finest]));
  const double z = std::abs(mixed.mean(finest) - 1.0) / se;

  const auto rough = quadratic_variation(fast_sample({0, 1, 0, 0.25}, grid, 100, 801));
  const double ratio = rough.mean(finest) / rough.mean(finest - 1);
  const double ratio_err = std::abs(ratio / std::sqrt(2.0) - 1.0);
  return {z <= 3 && ratio_err <= 0.1,
          "(1,1,0,0.75) QV " + fmt(mixed.mean(finest), 5) + " is " + fmt(z, 3) +
              " SE from 1 (<= 3); (0,1,0,0.25) refinement ratio " + fmt(ratio, 5) + " vs 2^0.5 (" +
              fmt(100 * ratio_err, 3) + "% <= 10%)"};
}

// 9 ---------------------------------------------------------------------------

Outcome bound_sandwich() {
  int in_c = 0, in_d = 0;
  double worst = 1e300;
  for (int i = 0; i < 10000; ++i) {
    const ProcessParams p{uniform(-2, 2), uniform(-2, 2), uniform(-2, 2), hurst_away_from_half(0.001)};
    double s = uniform(0, 10), t = uniform(0, 10);
    if (s > t) std::swap(s, t);
    if (s == t) continue;
    (kernel::classify_regime(p.b(), p.c(), p.hurst()) == Regime::C ? in_c : in_d)++;
    const auto bounds = kernel::increment_bounds(p, s, t);
    const double v = kernel::increment_variance(p, s, t);
    worst = std::min({worst, v - bounds.lower, bounds.upper - v});
  }
  return {worst >= -1e-12 && in_c > 0 && in_d > 0,
          "min slack " + fmt(worst) + " (>= -1e-12); regime C " + std::to_string(in_c) + " draws, regime D " +
              std::to_string(in_d)};
}

// 10 --------------------------------------------------------------------------

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

Outcome determinism() {
  const fs::path dir = fs::temp_directory_path() / "mgfbm_acceptance";
  fs::create_directories(dir);
  const std::string cli = MGFBM_CLI_PATH;
  const std::vector<std::string> runs{
      "simulate --preset sfbm -H 0.75 -T 1 -N 256 --paths 1000 --seed 42",
      "simulate --a 0.5 --b 1 --c -0.3 -H 0.3 --grid 0.1,0.25,0.7,1.9 --paths 5000 --seed 7",
      "simulate --preset smfbm --a 1 --b 2 -H 0.6 -T 3 -N 100 --paths 300 --seed 9 --method cholesky",
  };
  int identical = 0;
  for (std::size_t i = 0; i < runs.size(); ++i) {
    std::vector<std::string> bytes;
    for (const char* threads : {"1", "4", "1"}) {
      const fs::path out = dir / ("run" + std::to_string(i) + "_" + threads + ".bin");
      fs::remove(out);
      const std::string cmd = cli + " " + runs[i] + " --threads " + threads + " --format binary --out " +
                              out.string() + " > /dev/null";
      if (std::system(cmd.c_str()) != 0) return {false, "command failed: " + cmd};
      bytes.push_back(slurp(out));
    }
    if (!bytes[0].empty() && bytes[0] == bytes[1] && bytes[1] == bytes[2]) ++identical;
  }
  return {identical == static_cast<int>(runs.size()),
          std::to_string(identical) + "/" + std::to_string(runs.size()) +
              " CLI runs bit-identical across repeats and thread counts"};
}

}  // namespace

int main() {
  std::clog.setstate(std::ios::failbit);
  const std::vector<Criterion> criteria{
      {1, "covariance identities", 5, covariance_identities},
      {2, "mixed self-similarity", 120, mixed_self_similarity},
      {3, "non-self-similarity", 5, non_self_similarity},
      {4, "Markov criterion", 5, markov},
      {5, "LRD dichotomy", 30, lrd},
      {6, "sampler correctness", 600, samplers},
      {7, "Hölder regularity", 120, holder},
      {8, "quadratic variation", 120, quadratic_variation_diagnostic},
      {9, "increment-bound sandwich", 2, bound_sandwich},
      {10, "determinism", 60, determinism},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome outcome;
    try {
      outcome = c.body();
    } catch (const std::exception& e) {
      outcome = {false, std::string("exception: ") + e.what()};
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool in_time = seconds <= c.budget_seconds;
    const bool pass = outcome.passed && in_time;
    if (!pass) ++failed;
    std::printf("%s criterion %d (%s): %s; %.2f s of %.0f s budget%s\n", pass ? "PASS" : "FAIL", c.id,
                c.name.c_str(), outcome.detail.c_str(), seconds, c.budget_seconds, in_time ? "" : " EXCEEDED");
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
