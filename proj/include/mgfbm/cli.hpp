#pragma once

// Command-line front end: cov, simulate, verify, lrd-table.
//
// Exit codes: 0 success / all checks passed, 1 a check failed, 2 usage or
// input error, 3 numerical error.

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "mgfbm/mgfbm.hpp"

namespace mgfbm::cli {

enum ExitCode : int { kSuccess = 0, kCheckFailed = 1, kUsage = 2, kNumerical = 3 };

/// Everything a subcommand needs, as parsed from the command line.
struct RunConfig {
  std::optional<double> a, b, c;
  std::optional<double> hurst;
  std::string preset;
  std::string grid;
  std::optional<double> horizon;
  std::optional<std::size_t> steps;
  std::optional<std::size_t> paths;
  std::optional<std::uint64_t> seed;
  std::string method = "auto";
  std::string out;
  std::string format;
  unsigned threads = 0;

  // verify / lrd-table
  std::vector<std::string> suites;
  std::string input;
  double tol_z = 4.0;
  std::int64_t p = 1;
  std::optional<std::int64_t> n_min, n_max;

  bool has_weights() const { return a || b || c || !preset.empty(); }

  ProcessParams params() const {
    if (!hurst) throw domain_error("-H/--hurst is required");
    if (!preset.empty()) return special_case(parse_preset(preset), *hurst, {a, b, c});
    return {a.value_or(0.0), b.value_or(0.0), c.value_or(0.0), *hurst};
  }

  TimeGrid time_grid(double default_horizon, std::size_t default_steps) const {
    if (!grid.empty()) {
      std::vector<double> times;
      std::stringstream ss(grid);
      std::string item;
      while (std::getline(ss, item, ',')) times.push_back(parse_double(item, "--grid"));
      return TimeGrid(std::move(times));
    }
    return TimeGrid::uniform(horizon.value_or(default_horizon), steps.value_or(default_steps));
  }

  std::uint64_t resolved_seed(std::ostream& err) {
    if (!seed) {
      std::random_device rd;
      seed = (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
      err << "mgfbm: no --seed given, using seed " << *seed << '\n';
    }
    return *seed;
  }
};

namespace detail {

inline void add_process_options(CLI::App& cmd, RunConfig& cfg) {
  cmd.add_option("--a", cfg.a, "Brownian weight a");
  cmd.add_option("--b", cfg.b, "weight b of B^H_t");
  cmd.add_option("--c", cfg.c, "weight c of B^H_{-t}");
  cmd.add_option("-H,--hurst", cfg.hurst, "Hurst parameter in (0, 1)");
  cmd.add_option("--preset", cfg.preset, "bm, fbm, sfbm, gfbm, mfbm or smfbm");
  cmd.add_option("--seed", cfg.seed, "random seed (drawn and logged when absent)");
  cmd.add_option("--out", cfg.out, "output path (default: stdout where applicable)");
  cmd.add_option("--format", cfg.format, "csv, json or binary");
  cmd.add_option("--threads", cfg.threads, "worker threads (0 = all cores)");
}

inline void add_grid_options(CLI::App& cmd, RunConfig& cfg) {
  cmd.add_option("--grid", cfg.grid, "explicit comma-separated sample times");
  cmd.add_option("-T,--horizon", cfg.horizon, "horizon of a uniform grid");
  cmd.add_option("-N,--steps", cfg.steps, "number of steps of a uniform grid");
}

// Writes to --out when given, stdout otherwise.
template <class Writer>
void emit(const std::string& path, std::ostream& stdout_stream, Writer&& writer) {
  if (path.empty() || path == "-") {
    writer(stdout_stream);
    return;
  }
  auto file = mgfbm::detail::open_out(path);
  writer(file);
  if (!file) throw io_error(path + ": write failed");
}

inline int cmd_cov(const RunConfig& cfg, std::ostream& out) {
  const ProcessParams params = cfg.params();
  const TimeGrid grid = cfg.time_grid(1.0, 16);
  const Eigen::MatrixXd cov = covariance_matrix(params, grid);
  const FileFormat format = cfg.format.empty() ? FileFormat::csv : parse_format(cfg.format);
  if (format == FileFormat::binary) throw domain_error("cov writes csv or json");
  const nlohmann::json meta{{"params", params_to_json(params)}, {"times", grid.times()}};
  emit(cfg.out, out, [&](std::ostream& os) {
    if (format == FileFormat::csv) {
      write_matrix_csv(os, cov);
      return;
    }
    nlohmann::json doc = meta;
    nlohmann::json rows = nlohmann::json::array();
    for (Eigen::Index i = 0; i < cov.rows(); ++i) {
      std::vector<double> row(static_cast<std::size_t>(cov.cols()));
      for (Eigen::Index j = 0; j < cov.cols(); ++j) row[static_cast<std::size_t>(j)] = cov(i, j);
      rows.push_back(row);
    }
    doc["covariance"] = rows;
    os << doc.dump(2) << '\n';
  });
  if (format == FileFormat::csv && !cfg.out.empty() && cfg.out != "-") {
    emit(cfg.out + ".json", out, [&](std::ostream& os) { os << meta.dump(2) << '\n'; });
  }
  return kSuccess;
}

inline int cmd_simulate(RunConfig cfg, std::ostream& out, std::ostream& err) {
  const ProcessParams params = cfg.params();
  const TimeGrid grid = cfg.time_grid(1.0, 64);
  const std::uint64_t seed = cfg.resolved_seed(err);
  const FileFormat format = cfg.format.empty() ? FileFormat::binary : parse_format(cfg.format);
  const std::string path =
      !cfg.out.empty() ? cfg.out
                       : (format == FileFormat::binary ? "ensemble.bin"
                                                       : format == FileFormat::csv ? "ensemble.csv"
                                                                                   : "ensemble.json");
  const auto start = std::chrono::steady_clock::now();
  const PathEnsemble ensemble =
      simulate(params, grid, cfg.paths.value_or(1000), seed, parse_method(cfg.method), {cfg.threads});
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  write_ensemble(path, ensemble, format);
  std::ifstream written(path, std::ios::binary | std::ios::ate);
  out << "simulate: method=" << to_string(ensemble.method) << " paths=" << ensemble.n_paths()
      << " times=" << ensemble.n_times() << " seed=" << seed << " wall=" << seconds
      << "s bytes=" << static_cast<long long>(written.tellg()) << " out=" << path << '\n';
  return kSuccess;
}

inline const std::vector<std::string>& known_suites() {
  static const std::vector<std::string> suites{"cov-consistency", "lrd", "holder",
                                               "qv", "self-similarity", "mixed-self-similarity",
                                               "markov", "stationarity"};
  return suites;
}

inline int cmd_verify(RunConfig cfg, std::ostream& out, std::ostream& err) {
  for (const auto& suite : cfg.suites) {
    if (std::find(known_suites().begin(), known_suites().end(), suite) == known_suites().end()) {
      err << "verify: unknown suite '" << suite << "'\n";
      return kUsage;
    }
  }

  std::optional<PathEnsemble> loaded;
  auto ensemble_for = [&](std::size_t default_steps, std::size_t default_paths) -> PathEnsemble {
    if (!cfg.input.empty()) {
      if (!loaded) {
        loaded = read_ensemble(cfg.input, cfg.has_weights() && cfg.hurst
                                              ? std::optional<ProcessParams>(cfg.params())
                                              : std::nullopt);
      }
      return *loaded;
    }
    return simulate(cfg.params(), cfg.time_grid(1.0, default_steps),
                    cfg.paths.value_or(default_paths), cfg.resolved_seed(err),
                    parse_method(cfg.method), {cfg.threads});
  };

  std::vector<CheckReport> reports;
  for (const auto& suite : cfg.suites) {
    if (suite == "cov-consistency") {
      const PathEnsemble e = ensemble_for(16, 10000);
      std::optional<ProcessParams> target;
      if (!cfg.input.empty() && cfg.has_weights() && cfg.hurst) target = cfg.params();
      reports.push_back(covariance_consistency(e, cfg.tol_z, target));
    } else if (suite == "lrd") {
      reports.push_back(check_lrd(cfg.params(), cfg.p, cfg.n_min.value_or(1000),
                                  cfg.n_max.value_or(1000000)));
    } else if (suite == "holder") {
      reports.push_back(check_holder(ensemble_for(4096, 100)));
    } else if (suite == "qv") {
      reports.push_back(check_qv(ensemble_for(4096, 100)));
    } else if (suite == "self-similarity") {
      reports.push_back(check_self_similarity(cfg.params()));
    } else if (suite == "mixed-self-similarity") {
      reports.push_back(check_mixed_self_similarity(cfg.params()));
    } else if (suite == "markov") {
      reports.push_back(check_markov(cfg.params()));
    } else if (suite == "stationarity") {
      reports.push_back(check_stationarity(cfg.params()));
    }
  }

  bool all_passed = true;
  nlohmann::json doc = nlohmann::json::array();
  for (const auto& r : reports) {
    all_passed = all_passed && r.passed;
    doc.push_back(r);
  }
  emit(cfg.out, out, [&](std::ostream& os) { os << doc.dump(2) << '\n'; });
  return all_passed ? kSuccess : kCheckFailed;
}

inline int cmd_lrd_table(const RunConfig& cfg, std::ostream& out) {
  const ProcessParams params = cfg.params();
  const std::int64_t n_min = cfg.n_min.value_or(1);
  const std::int64_t n_max = cfg.n_max.value_or(10000);
  if (n_min < 1 || n_max < n_min) throw domain_error("lrd-table needs 1 <= n-min <= n-max");
  emit(cfg.out, out, [&](std::ostream& os) {
    os << "n,R_M,asymptote\n";
    for (std::int64_t n = n_min; n <= n_max; ++n) {
      os << n << ',' << format_double(kernel::autocov(params, cfg.p, n)) << ','
         << format_double(kernel::autocov_asymptote(params, cfg.p, n)) << '\n';
    }
  });
  return kSuccess;
}

}  // namespace detail

/// Parses argv and runs one subcommand. Output goes to `out`, diagnostics to `err`.
inline int run(int argc, const char* const* argv, std::ostream& out = std::cout,
               std::ostream& err = std::cerr) {
  CLI::App app{"Mixed generalized fractional Brownian motion: kernels, simulation, verification",
               "mgfbm"};
  app.require_subcommand(1);
  RunConfig cfg;

  auto* cov = app.add_subcommand("cov", "tabulate the analytic covariance matrix");
  detail::add_process_options(*cov, cfg);
  detail::add_grid_options(*cov, cfg);

  auto* sim = app.add_subcommand("simulate", "simulate an ensemble of paths");
  detail::add_process_options(*sim, cfg);
  detail::add_grid_options(*sim, cfg);
  sim->add_option("--paths", cfg.paths, "number of paths");
  sim->add_option("--method", cfg.method, "auto, cholesky or circulant");

  auto* ver = app.add_subcommand("verify", "run property checks; JSON report, exit 0 iff all pass");
  detail::add_process_options(*ver, cfg);
  detail::add_grid_options(*ver, cfg);
  ver->add_option("suites", cfg.suites,
                  "cov-consistency, lrd, holder, qv, self-similarity, mixed-self-similarity, "
                  "markov, stationarity")
      ->required();
  ver->add_option("--in", cfg.input, "ensemble file to check instead of simulating");
  ver->add_option("--paths", cfg.paths, "number of simulated paths");
  ver->add_option("--method", cfg.method, "auto, cholesky or circulant");
  ver->add_option("--tol-z", cfg.tol_z, "z threshold for covariance consistency");
  ver->add_option("--p", cfg.p, "base index p for the LRD scan");
  ver->add_option("--n-min", cfg.n_min, "smallest lag of the LRD scan");
  ver->add_option("--n-max", cfg.n_max, "largest lag of the LRD scan");

  auto* lrd = app.add_subcommand("lrd-table", "tabulate R_M(p, p+n) and its asymptote");
  detail::add_process_options(*lrd, cfg);
  lrd->add_option("--p", cfg.p, "base index p");
  lrd->add_option("--n-min", cfg.n_min, "first lag");
  lrd->add_option("--n-max", cfg.n_max, "last lag");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kSuccess : kUsage;
  }

  try {
    if (cov->parsed()) return detail::cmd_cov(cfg, out);
    if (sim->parsed()) return detail::cmd_simulate(cfg, out, err);
    if (ver->parsed()) return detail::cmd_verify(cfg, out, err);
    if (lrd->parsed()) return detail::cmd_lrd_table(cfg, out);
  } catch (const numerical_error& e) {
    err << "mgfbm: numerical error: " << e.what() << '\n';
    return kNumerical;
  } catch (const io_error& e) {
    err << "mgfbm: " << e.what() << '\n';
    return kUsage;
  } catch (const std::domain_error& e) {
    err << "mgfbm: " << e.what() << '\n';
    return kUsage;
  }
  return kUsage;
}

}  // namespace mgfbm::cli
