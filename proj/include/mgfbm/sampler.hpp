#pragma once

// Exact-in-law path simulation of M_t = a B_t + b B^H_t + c B^H_{-t}.
//
// Two routes:
//   cholesky_sample  any grid; factorizes the covariance matrix, O(N^3) setup.
//   fast_sample      uniform grids from 0; circulant embedding of fractional
//                    Gaussian noise on the symmetric window [-T, T], O(N log N)
//                    per path.
//
// Every path i draws from its own substream keyed by (seed, stream, i), so
// output does not depend on the number of worker threads.

#include <algorithm>
#include <bit>
#include <cmath>
#include <complex>
#include <cstdint>
#include <exception>
#include <functional>
#include <iostream>
#include <memory>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Core>
#include <Eigen/Eigenvalues>

#include "mgfbm/errors.hpp"
#include "mgfbm/fft.hpp"
#include "mgfbm/grid.hpp"
#include "mgfbm/kernel.hpp"
#include "mgfbm/numeric.hpp"
#include "mgfbm/params.hpp"
#include "mgfbm/rng.hpp"

namespace mgfbm {

enum class Method : std::uint8_t { cholesky = 0, circulant = 1 };

/// Sampler choice as requested by a caller; `automatic` picks circulant for
/// uniform zero-anchored grids and Cholesky otherwise.
enum class MethodChoice { automatic, cholesky, circulant };

inline std::string_view to_string(Method m) {
  return m == Method::cholesky ? "cholesky" : "circulant";
}

inline MethodChoice parse_method(std::string_view name) {
  if (name == "auto") return MethodChoice::automatic;
  if (name == "cholesky") return MethodChoice::cholesky;
  if (name == "circulant") return MethodChoice::circulant;
  throw domain_error("unknown method '" + std::string(name) +
                     "' (expected auto, cholesky or circulant)");
}

struct SamplerOptions {
  /// Worker threads; 0 means std::thread::hardware_concurrency().
  unsigned threads = 0;
};

/// Simulated paths plus everything needed to reproduce them.
struct PathEnsemble {
  TimeGrid grid;
  ProcessParams params;
  std::uint64_t seed = 0;
  Method method = Method::cholesky;
  GaussianAlgorithm gaussian = GaussianAlgorithm::inverse_cdf;
  /// n_paths x n_times; row i is one path.
  Eigen::MatrixXd paths;

  std::size_t n_paths() const { return static_cast<std::size_t>(paths.rows()); }
  std::size_t n_times() const { return static_cast<std::size_t>(paths.cols()); }
};

namespace detail {

inline unsigned resolve_threads(unsigned requested) {
  if (requested != 0) return requested;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : hw;
}

/// Splits [0, n) into contiguous chunks and runs body(begin, end) on each.
template <class Body>
void parallel_for(std::size_t n, unsigned threads, Body&& body) {
  const std::size_t workers = std::min<std::size_t>(resolve_threads(threads), std::max<std::size_t>(n, 1));
  if (workers <= 1) {
    body(std::size_t{0}, n);
    return;
  }
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(workers);
  const std::size_t chunk = (n + workers - 1) / workers;
  for (std::size_t w = 0; w < workers; ++w) {
    const std::size_t begin = std::min(n, w * chunk);
    const std::size_t end = std::min(n, begin + chunk);
    pool.emplace_back([&, w, begin, end] {
      try {
        body(begin, end);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

inline double smallest_eigenvalue(const Eigen::MatrixXd& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(m, Eigen::EigenvaluesOnly);
  return solver.eigenvalues().minCoeff();
}

/// Lower Cholesky factor of a covariance matrix that is PSD in exact arithmetic.
/// On failure adds 1e-12 * trace / n to the diagonal, escalating x10 up to
/// three times.
inline Eigen::MatrixXd jittered_cholesky(const Eigen::MatrixXd& cov) {
  const auto n = cov.rows();
  if (n == 0) return cov;
  Eigen::LLT<Eigen::MatrixXd> llt(cov);
  if (llt.info() == Eigen::Success) return llt.matrixL();
  double jitter = 1e-12 * cov.trace() / static_cast<double>(n);
  for (int attempt = 0; attempt < 4; ++attempt, jitter *= 10.0) {
    Eigen::MatrixXd shifted = cov;
    shifted.diagonal().array() += jitter;
    llt.compute(shifted);
    if (llt.info() == Eigen::Success) return llt.matrixL();
  }
  std::ostringstream msg;
  msg.precision(17);
  msg << "Cholesky factorization failed after jitter escalation; smallest eigenvalue "
      << smallest_eigenvalue(cov) << " (matrix size " << n << ")";
  throw numerical_error(msg.str());
}

// x = L z with a fixed summation order.
inline void lower_triangular_apply(const Eigen::MatrixXd& lower, const std::vector<double>& z,
                                   std::vector<double>& x) {
  const auto n = lower.rows();
  for (Eigen::Index j = 0; j < n; ++j) {
    double acc = 0.0;
    for (Eigen::Index k = 0; k <= j; ++k) acc += lower(j, k) * z[static_cast<std::size_t>(k)];
    x[static_cast<std::size_t>(j)] = acc;
  }
}

}  // namespace detail

/// [C(t_i, t_j)] over the grid; upper triangle computed, lower mirrored.
inline Eigen::MatrixXd covariance_matrix(const ProcessParams& params, const TimeGrid& grid) {
  const auto n = static_cast<Eigen::Index>(grid.size());
  Eigen::MatrixXd m(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i; j < n; ++j) {
      m(i, j) = kernel::covariance(params, grid[static_cast<std::size_t>(i)],
                                   grid[static_cast<std::size_t>(j)]);
      m(j, i) = m(i, j);
    }
  }
  return m;
}

/// Draws n_paths rows of the centered Gaussian vector with covariance
/// covariance_matrix(params, grid). Columns at t = 0 are exactly zero.
inline PathEnsemble cholesky_sample(const ProcessParams& params, const TimeGrid& grid,
                                    std::size_t n_paths, std::uint64_t seed,
                                    const SamplerOptions& options = {}) {
  detail::require(n_paths >= 1, "n_paths must be >= 1");
  detail::require(grid.size() >= 1, "grid must not be empty");

  std::vector<std::size_t> live;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (grid[i] > 0.0) live.push_back(i);
  }
  const auto n_live = static_cast<Eigen::Index>(live.size());
  Eigen::MatrixXd cov(n_live, n_live);
  for (Eigen::Index i = 0; i < n_live; ++i) {
    for (Eigen::Index j = i; j < n_live; ++j) {
      cov(i, j) = kernel::covariance(params, grid[live[static_cast<std::size_t>(i)]],
                                     grid[live[static_cast<std::size_t>(j)]]);
      cov(j, i) = cov(i, j);
    }
  }
  const Eigen::MatrixXd lower = detail::jittered_cholesky(cov);

  PathEnsemble out{grid, params, seed, Method::cholesky, GaussianAlgorithm::inverse_cdf,
                   Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n_paths),
                                         static_cast<Eigen::Index>(grid.size()))};
  detail::parallel_for(n_paths, options.threads, [&](std::size_t begin, std::size_t end) {
    std::vector<double> z(live.size()), x(live.size());
    for (std::size_t path = begin; path < end; ++path) {
      Substream rng(seed, Stream::cholesky, path);
      for (auto& v : z) v = rng.normal();
      detail::lower_triangular_apply(lower, z, x);
      for (std::size_t j = 0; j < live.size(); ++j) {
        out.paths(static_cast<Eigen::Index>(path), static_cast<Eigen::Index>(live[j])) = x[j];
      }
    }
  });
  return out;
}

/// Autocovariance of fractional Gaussian noise with step dt at integer lag k:
/// (dt^2H / 2)(|k+1|^2H − 2|k|^2H + |k−1|^2H).
inline double fgn_autocovariance(double hurst, double dt, std::size_t lag) {
  const extended h = hurst;
  const extended scale = pow_2h(extended{dt}, h);
  if (lag == 0) return static_cast<double>(scale);
  return static_cast<double>(scale / 2 *
                             detail::second_difference(static_cast<extended>(lag), 2 * h));
}

/// Exact sampler for a stationary Gaussian sequence of length n.
///
/// Uses circulant embedding of size m = 2 * bit_ceil(n - 1) (at least 2). If
/// the embedding has an eigenvalue below -1e-8 * max eigenvalue it falls back
/// to Cholesky of the Toeplitz covariance and logs a warning.
class StationaryGaussian {
public:
  StationaryGaussian(const std::function<double(std::size_t)>& autocovariance, std::size_t n)
      : n_(n) {
    detail::require(n >= 1, "stationary sequence length must be >= 1");
    m_ = std::max<std::size_t>(2, 2 * std::bit_ceil(n - 1 == 0 ? std::size_t{1} : n - 1));

    fft_ = std::make_unique<detail::ForwardFft>(m_);
    detail::FftBuffer row(m_);
    auto values = row.values();
    for (std::size_t j = 0; j < m_; ++j) {
      values[j] = autocovariance(std::min(j, m_ - j));
    }
    (*fft_)(row);
    std::vector<double> eigen(m_);
    double max_eigen = 0.0;
    double min_eigen = 0.0;
    for (std::size_t k = 0; k < m_; ++k) {
      eigen[k] = values[k].real();
      max_eigen = std::max(max_eigen, eigen[k]);
      min_eigen = std::min(min_eigen, eigen[k]);
    }
    min_eigenvalue_ = min_eigen;
    if (min_eigen < -1e-8 * max_eigen) {
      std::clog << "mgfbm: warning: circulant embedding of size " << m_
                << " has eigenvalue " << min_eigen << " (max " << max_eigen
                << "); falling back to Cholesky\n";
      fft_.reset();
      Eigen::MatrixXd toeplitz(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
          toeplitz(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
              autocovariance(i > j ? i - j : j - i);
        }
      }
      lower_ = detail::jittered_cholesky(toeplitz);
      return;
    }
    scale_.resize(m_);
    for (std::size_t k = 0; k < m_; ++k) {
      scale_[k] = std::sqrt(std::max(eigen[k], 0.0) / static_cast<double>(m_));
    }
  }

  bool uses_circulant() const { return fft_ != nullptr; }
  std::size_t size() const { return n_; }
  std::size_t embedding_size() const { return m_; }
  double min_eigenvalue() const { return min_eigenvalue_; }

  /// Per-thread scratch for draw().
  class Workspace {
  public:
    explicit Workspace(const StationaryGaussian& g)
        : buffer_(g.uses_circulant() ? g.m_ : 1), z_(g.uses_circulant() ? 0 : g.n_) {}

  private:
    friend class StationaryGaussian;
    detail::FftBuffer buffer_;
    std::vector<double> z_;
  };

  /// Fills out[0..n) with one realization.
  void draw(Substream& rng, Workspace& ws, std::vector<double>& out) const {
    out.resize(n_);
    if (!uses_circulant()) {
      for (auto& v : ws.z_) v = rng.normal();
      detail::lower_triangular_apply(lower_, ws.z_, out);
      return;
    }
    auto values = ws.buffer_.values();
    for (std::size_t k = 0; k < m_; ++k) {
      const double re = rng.normal();
      const double im = rng.normal();
      values[k] = {scale_[k] * re, scale_[k] * im};
    }
    (*fft_)(ws.buffer_);
    for (std::size_t j = 0; j < n_; ++j) out[j] = values[j].real();
  }

private:
  std::size_t n_;
  std::size_t m_ = 0;
  double min_eigenvalue_ = 0.0;
  std::unique_ptr<detail::ForwardFft> fft_;
  std::vector<double> scale_;
  Eigen::MatrixXd lower_;
};

/// n_paths x n_steps matrix of fractional Gaussian noise increments
/// B^H((j+1)dt) − B^H(j dt).
inline Eigen::MatrixXd fgn_circulant(double hurst, std::size_t n_steps, double dt,
                                     std::size_t n_paths, std::uint64_t seed,
                                     const SamplerOptions& options = {}) {
  detail::require(hurst > 0.0 && hurst < 1.0, "Hurst parameter must lie in (0, 1)");
  detail::require(n_steps >= 1, "n_steps must be >= 1");
  detail::require(dt > 0.0 && std::isfinite(dt), "dt must be > 0");
  detail::require(n_paths >= 1, "n_paths must be >= 1");
  const StationaryGaussian noise(
      [&](std::size_t k) { return fgn_autocovariance(hurst, dt, k); }, n_steps);
  Eigen::MatrixXd out(static_cast<Eigen::Index>(n_paths), static_cast<Eigen::Index>(n_steps));
  detail::parallel_for(n_paths, options.threads, [&](std::size_t begin, std::size_t end) {
    StationaryGaussian::Workspace ws(noise);
    std::vector<double> row;
    for (std::size_t path = begin; path < end; ++path) {
      Substream rng(seed, Stream::fgn, path);
      noise.draw(rng, ws, row);
      for (std::size_t j = 0; j < n_steps; ++j) {
        out(static_cast<Eigen::Index>(path), static_cast<Eigen::Index>(j)) = row[j];
      }
    }
  });
  return out;
}

/// Circulant-embedding sampler for a uniform grid 0 = t_0 < ... < t_N.
///
/// One stationary fGn stream of 2N increments covers the window [−t_N, t_N];
/// cumulative sums anchored at index N give B^H(±t_k). Brownian increments
/// come from an independent substream.
inline PathEnsemble fast_sample(const ProcessParams& params, const TimeGrid& grid,
                                std::size_t n_paths, std::uint64_t seed,
                                const SamplerOptions& options = {}) {
  detail::require(n_paths >= 1, "n_paths must be >= 1");
  detail::require(grid.size() >= 2 && grid.is_uniform() && grid.zero_anchored(),
                  "fast_sample needs a uniform grid starting at 0; use cholesky_sample for "
                  "other grids");
  const std::size_t steps = grid.size() - 1;
  const double dt = grid.dt();
  const double a = params.a(), b = params.b(), c = params.c();
  const bool fractional = b != 0.0 || c != 0.0;
  const bool brownian = a != 0.0;
  const double brownian_step = std::sqrt(dt);

  std::unique_ptr<StationaryGaussian> noise;
  if (fractional) {
    noise = std::make_unique<StationaryGaussian>(
        [&](std::size_t k) { return fgn_autocovariance(params.hurst(), dt, k); }, 2 * steps);
  }

  PathEnsemble out{grid, params, seed, Method::circulant, GaussianAlgorithm::inverse_cdf,
                   Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n_paths),
                                         static_cast<Eigen::Index>(grid.size()))};
  detail::parallel_for(n_paths, options.threads, [&](std::size_t begin, std::size_t end) {
    std::unique_ptr<StationaryGaussian::Workspace> ws;
    if (noise) ws = std::make_unique<StationaryGaussian::Workspace>(*noise);
    std::vector<double> increments;
    for (std::size_t path = begin; path < end; ++path) {
      if (noise) {
        Substream rng(seed, Stream::fgn, path);
        noise->draw(rng, *ws, increments);
      }
      std::optional<Substream> bm;
      if (brownian) bm.emplace(seed, Stream::brownian, path);
      double forward = 0.0;   // B^H(k dt)
      double backward = 0.0;  // B^H(−k dt)
      double w = 0.0;         // B(k dt)
      const auto row = static_cast<Eigen::Index>(path);
      for (std::size_t k = 1; k <= steps; ++k) {
        if (noise) {
          forward += increments[steps + k - 1];
          backward -= increments[steps - k];
        }
        if (bm) w += brownian_step * bm->normal();
        out.paths(row, static_cast<Eigen::Index>(k)) = a * w + b * forward + c * backward;
      }
    }
  });
  return out;
}

/// Dispatches to fast_sample or cholesky_sample.
inline PathEnsemble simulate(const ProcessParams& params, const TimeGrid& grid,
                             std::size_t n_paths, std::uint64_t seed, MethodChoice choice,
                             const SamplerOptions& options = {}) {
  const bool fast_ok = grid.size() >= 2 && grid.is_uniform() && grid.zero_anchored();
  switch (choice) {
    case MethodChoice::cholesky: return cholesky_sample(params, grid, n_paths, seed, options);
    case MethodChoice::circulant: return fast_sample(params, grid, n_paths, seed, options);
    case MethodChoice::automatic:
      return fast_ok ? fast_sample(params, grid, n_paths, seed, options)
                     : cholesky_sample(params, grid, n_paths, seed, options);
  }
  throw domain_error("unknown sampling method");
}

}  // namespace mgfbm
