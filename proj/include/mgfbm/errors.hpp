#pragma once

#include <stdexcept>
#include <string>

namespace mgfbm {

/// Precondition violation: bad parameters, times out of range, wrong grid kind.
class domain_error : public std::domain_error {
public:
  using std::domain_error::domain_error;
};

/// A numerical procedure could not complete (e.g. Cholesky failure after jitter).
class numerical_error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

namespace detail {

inline void require(bool condition, const std::string& message) {
  if (!condition) throw domain_error(message);
}

}  // namespace detail
}  // namespace mgfbm
