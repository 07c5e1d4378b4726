#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <string>
#include <string_view>

#include "plchaos/error.hpp"

namespace plchaos {

/// Selects one of the six model constants, e.g. as a continuation parameter.
enum class Param { a, b, c, h, r, omega };

inline constexpr std::string_view to_string(Param p) {
  switch (p) {
    case Param::a: return "a";
    case Param::b: return "b";
    case Param::c: return "c";
    case Param::h: return "h";
    case Param::r: return "r";
    case Param::omega: return "omega";
  }
  return "?";
}

inline Param param_from_string(std::string_view s) {
  if (s == "a") return Param::a;
  if (s == "b") return Param::b;
  if (s == "c") return Param::c;
  if (s == "h") return Param::h;
  if (s == "r") return Param::r;
  if (s == "omega" || s == "w") return Param::omega;
  throw Error(ErrorCode::InvalidArgument, "unknown parameter '" + std::string(s) + "'");
}

/// The six positive model constants plus the feedback gain K of the
/// controlled system (ignored by the free vector field).
struct SystemParams {
  double a = 1.0;
  double b = 1.0;
  double c = 1.0;
  double h = 0.25;
  double r = 3.0;
  double omega = 1.0;
  double K = 0.0;

  /// d = min{a, b}
  double d() const { return std::min(a, b); }
  double hopf_threshold() const { return r / std::sqrt(c); }
  double return_time() const { return 2.0 * M_PI / omega; }

  bool valid() const {
    const std::array<double, 6> v{a, b, c, h, r, omega};
    return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x) && x > 0.0; }) &&
           std::isfinite(K) && K >= 0.0;
  }

  void validate() const {
    if (!valid()) {
      throw Error(ErrorCode::InvalidArgument,
                  "parameters must satisfy a,b,c,h,r,omega > 0 and K >= 0");
    }
  }

  double get(Param p) const {
    switch (p) {
      case Param::a: return a;
      case Param::b: return b;
      case Param::c: return c;
      case Param::h: return h;
      case Param::r: return r;
      case Param::omega: return omega;
    }
    return a;
  }

  void set(Param p, double v) {
    switch (p) {
      case Param::a: a = v; break;
      case Param::b: b = v; break;
      case Param::c: c = v; break;
      case Param::h: h = v; break;
      case Param::r: r = v; break;
      case Param::omega: omega = v; break;
    }
  }

  SystemParams with(Param p, double v) const {
    SystemParams q = *this;
    q.set(p, v);
    return q;
  }

  static SystemParams from(double a, double b, double c, double h, double r, double omega,
                           double K = 0.0) {
    return SystemParams{a, b, c, h, r, omega, K};
  }
};

}  // namespace plchaos
