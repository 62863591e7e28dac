#pragma once

#include <cmath>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>

#include "mgfbm/errors.hpp"

namespace mgfbm {

/// The quadruple (a, b, c, H) of a mixed generalized fractional Brownian
/// motion  M_t = a B_t + b B^H_t + c B^H_{-t}.
///
/// Construction rejects H outside (0, 1) and the all-zero weight triple.
class ProcessParams {
public:
  ProcessParams(double a, double b, double c, double hurst)
      : a_(a), b_(b), c_(c), hurst_(hurst) {
    detail::require(std::isfinite(a) && std::isfinite(b) && std::isfinite(c),
                    "process weights must be finite");
    detail::require(hurst > 0.0 && hurst < 1.0,
                    "Hurst parameter must lie in (0, 1), got " + std::to_string(hurst));
    detail::require(a != 0.0 || b != 0.0 || c != 0.0,
                    "weights (a, b, c) must not all be zero");
  }

  double a() const { return a_; }
  double b() const { return b_; }
  double c() const { return c_; }
  double hurst() const { return hurst_; }

  friend bool operator==(const ProcessParams&, const ProcessParams&) = default;

  friend std::ostream& operator<<(std::ostream& os, const ProcessParams& p) {
    return os << "(a=" << p.a_ << ", b=" << p.b_ << ", c=" << p.c_ << ", H=" << p.hurst_ << ")";
  }

private:
  double a_;
  double b_;
  double c_;
  double hurst_;
};

/// Named special cases of the family.
enum class Preset { bm, fbm, sfbm, gfbm, mfbm, smfbm };

inline std::string_view to_string(Preset preset) {
  switch (preset) {
    case Preset::bm: return "bm";
    case Preset::fbm: return "fbm";
    case Preset::sfbm: return "sfbm";
    case Preset::gfbm: return "gfbm";
    case Preset::mfbm: return "mfbm";
    case Preset::smfbm: return "smfbm";
  }
  return "?";
}

inline Preset parse_preset(std::string_view name) {
  for (Preset p : {Preset::bm, Preset::fbm, Preset::sfbm, Preset::gfbm, Preset::mfbm,
                   Preset::smfbm}) {
    if (to_string(p) == name) return p;
  }
  throw domain_error("unknown preset '" + std::string(name) +
                     "' (expected bm, fbm, sfbm, gfbm, mfbm or smfbm)");
}

/// Extra weights consumed by the presets that take them:
/// gfbm uses b and c, mfbm uses a and b, smfbm uses a and b.
struct PresetWeights {
  std::optional<double> a;
  std::optional<double> b;
  std::optional<double> c;
};

namespace detail {

inline double need(const std::optional<double>& v, Preset preset, const char* name) {
  if (!v) {
    throw domain_error("preset " + std::string(to_string(preset)) + " requires weight " + name);
  }
  return *v;
}

}  // namespace detail

/// Parameters of a named special case at Hurst index `hurst`.
///
///   bm    -> (1, 0, 0)            fbm  -> (0, 1, 0)
///   sfbm  -> (0, 1/√2, 1/√2)      gfbm -> (0, b, c)
///   mfbm  -> (a, b, 0)            smfbm -> (a, b/√2, b/√2)
inline ProcessParams special_case(Preset kind, double hurst, const PresetWeights& w = {}) {
  const double r = 1.0 / std::sqrt(2.0);
  switch (kind) {
    case Preset::bm: return {1.0, 0.0, 0.0, hurst};
    case Preset::fbm: return {0.0, 1.0, 0.0, hurst};
    case Preset::sfbm: return {0.0, r, r, hurst};
    case Preset::gfbm:
      return {0.0, detail::need(w.b, kind, "b"), detail::need(w.c, kind, "c"), hurst};
    case Preset::mfbm:
      return {detail::need(w.a, kind, "a"), detail::need(w.b, kind, "b"), 0.0, hurst};
    case Preset::smfbm: {
      const double b = detail::need(w.b, kind, "b") / std::sqrt(2.0);
      return {detail::need(w.a, kind, "a"), b, b, hurst};
    }
  }
  throw domain_error("unknown preset");
}

}  // namespace mgfbm
