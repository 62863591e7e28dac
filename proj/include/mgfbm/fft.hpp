#pragma once

#include <complex>
#include <cstddef>
#include <memory>
#include <mutex>
#include <span>

#include <fftw3.h>

#include "mgfbm/errors.hpp"

namespace mgfbm::detail {

// FFTW planning is not thread-safe; execution on distinct buffers is.
inline std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

/// Aligned buffer of complex<double> compatible with fftw_complex.
class FftBuffer {
public:
  explicit FftBuffer(std::size_t n)
      : data_(static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * n))), size_(n) {
    if (!data_) throw numerical_error("fftw_malloc failed");
  }
  FftBuffer(const FftBuffer&) = delete;
  FftBuffer& operator=(const FftBuffer&) = delete;
  FftBuffer(FftBuffer&& o) noexcept : data_(o.data_), size_(o.size_) { o.data_ = nullptr; }
  ~FftBuffer() { fftw_free(data_); }

  fftw_complex* raw() { return data_; }
  std::span<std::complex<double>> values() {
    return {reinterpret_cast<std::complex<double>*>(data_), size_};
  }
  std::size_t size() const { return size_; }

private:
  fftw_complex* data_;
  std::size_t size_;
};

/// Forward in-place complex DFT  X_k = Σ_j x_j e^{−2πijk/n}  of a fixed length.
/// One plan can be executed concurrently on different buffers.
class ForwardFft {
public:
  explicit ForwardFft(std::size_t n) : n_(n) {
    FftBuffer probe(n);
    std::lock_guard lock(fftw_planner_mutex());
    plan_ = fftw_plan_dft_1d(static_cast<int>(n), probe.raw(), probe.raw(), FFTW_FORWARD,
                             FFTW_ESTIMATE);
    if (!plan_) throw numerical_error("FFTW could not create a plan");
  }
  ForwardFft(const ForwardFft&) = delete;
  ForwardFft& operator=(const ForwardFft&) = delete;
  ~ForwardFft() {
    std::lock_guard lock(fftw_planner_mutex());
    fftw_destroy_plan(plan_);
  }

  std::size_t size() const { return n_; }

  void operator()(FftBuffer& buffer) const {
    fftw_execute_dft(plan_, buffer.raw(), buffer.raw());
  }

private:
  std::size_t n_;
  fftw_plan plan_ = nullptr;
};

}  // namespace mgfbm::detail
