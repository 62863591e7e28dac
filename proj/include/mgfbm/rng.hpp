#pragma once

#include <cmath>
#include <cstdint>
#include <random>

#include <boost/math/policies/policy.hpp>
#include <boost/math/special_functions/erf.hpp>

namespace mgfbm {

/// Identifies the Gaussian variate algorithm recorded with every ensemble.
enum class GaussianAlgorithm : std::uint8_t {
  /// Φ⁻¹(u) = −√2 erfc⁻¹(2u) applied to a 53-bit uniform on (0, 1).
  inverse_cdf = 1,
};

/// Independent random streams used by the samplers.
enum class Stream : std::uint64_t {
  fgn = 1,
  brownian = 2,
  cholesky = 3,
};

namespace detail {

inline constexpr boost::math::policies::policy<boost::math::policies::promote_double<false>>
    kNormalPolicy{};


inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace detail

/// Random substream keyed by (seed, stream, path). Draws for a given key do
/// not depend on which thread produces them or in which order paths run.
class Substream {
public:
  Substream(std::uint64_t seed, Stream stream, std::uint64_t path)
      : engine_(key(seed, stream, path)) {}

  static std::uint64_t key(std::uint64_t seed, Stream stream, std::uint64_t path) {
    std::uint64_t k = detail::splitmix64(seed);
    k = detail::splitmix64(k ^ static_cast<std::uint64_t>(stream));
    return detail::splitmix64(k ^ path);
  }

  /// Uniform on the open interval (0, 1) with 53 random bits.
  double uniform() {
    return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
  }

  double normal() {
    return -std::sqrt(2.0) * boost::math::erfc_inv(2.0 * uniform(), detail::kNormalPolicy);
  }

private:
  std::mt19937_64 engine_;
};

}  // namespace mgfbm
