#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "mgfbm/errors.hpp"

namespace mgfbm {

/// Ordered nonnegative sample times. A grid is flagged uniform when every step
/// agrees with the mean step to within 1e-12 relative.
class TimeGrid {
public:
  /// N + 1 points 0, T/N, ..., T.
  static TimeGrid uniform(double horizon, std::size_t n_steps) {
    detail::require(n_steps >= 1, "uniform grid needs at least one step");
    detail::require(horizon > 0.0 && std::isfinite(horizon), "grid horizon must be > 0");
    std::vector<double> times(n_steps + 1);
    for (std::size_t k = 0; k <= n_steps; ++k) {
      times[k] = horizon * static_cast<double>(k) / static_cast<double>(n_steps);
    }
    return TimeGrid(std::move(times));
  }

  TimeGrid() = default;

  explicit TimeGrid(std::vector<double> times) : times_(std::move(times)) {
    detail::require(!times_.empty(), "time grid must not be empty");
    for (std::size_t i = 0; i < times_.size(); ++i) {
      detail::require(std::isfinite(times_[i]) && times_[i] >= 0.0,
                      "grid times must be finite and >= 0");
      if (i > 0) {
        detail::require(times_[i] > times_[i - 1], "grid times must be strictly increasing");
      }
    }
    if (times_.size() >= 2) {
      const double step = (times_.back() - times_.front()) /
                          static_cast<double>(times_.size() - 1);
      bool uniform = true;
      for (std::size_t i = 0; i + 1 < times_.size() && uniform; ++i) {
        uniform = std::abs(times_[i + 1] - times_[i] - step) <= 1e-12 * step;
      }
      if (uniform) {
        uniform_ = true;
        dt_ = step;
      }
    }
  }

  const std::vector<double>& times() const { return times_; }
  std::size_t size() const { return times_.size(); }
  double operator[](std::size_t i) const { return times_[i]; }
  bool is_uniform() const { return uniform_; }
  /// Step of a uniform grid; 0 otherwise.
  double dt() const { return dt_; }
  bool zero_anchored() const { return !times_.empty() && times_.front() == 0.0; }

  friend bool operator==(const TimeGrid&, const TimeGrid&) = default;

private:
  std::vector<double> times_;
  bool uniform_ = false;
  double dt_ = 0.0;
};

}  // namespace mgfbm
