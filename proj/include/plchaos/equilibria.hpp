#pragma once

#include <array>
#include <cmath>
#include <complex>

#include <Eigen/Eigenvalues>

#include "plchaos/error.hpp"
#include "plchaos/params.hpp"
#include "plchaos/pl_core.hpp"

namespace plchaos {

enum class ManifoldKind { PlaneX3Zero, X3AxisSegment, X3AxisPositive, TangentPlaneAtZ };

inline constexpr std::string_view to_string(ManifoldKind m) {
  switch (m) {
    case ManifoldKind::PlaneX3Zero: return "PLANE_X3_0";
    case ManifoldKind::X3AxisSegment: return "X3_AXIS_SEGMENT";
    case ManifoldKind::X3AxisPositive: return "X3_AXIS_POSITIVE";
    case ManifoldKind::TangentPlaneAtZ: return "TANGENT_PLANE_AT_Z";
  }
  return "?";
}

struct ManifoldInfo {
  int dim = 0;
  ManifoldKind kind = ManifoldKind::PlaneX3Zero;
};

struct EquilibriumInfo {
  State location = State::Zero();
  std::array<std::complex<double>, 3> eigenvalues{};
  int stable_dim = 0;
  int unstable_dim = 0;
  ManifoldInfo stable;
  ManifoldInfo unstable;
};

struct EquilibriumPair {
  EquilibriumInfo origin;
  EquilibriumInfo upper;  // Z = (0, 0, r/sqrt(c)); the mirror -Z follows by symmetry
};

namespace detail {
inline void count_dims(EquilibriumInfo& e) {
  e.stable_dim = e.unstable_dim = 0;
  for (const auto& l : e.eigenvalues) {
    if (l.real() < 0.0) ++e.stable_dim;
    else if (l.real() > 0.0) ++e.unstable_dim;
  }
}
}  // namespace detail

inline double hopf_threshold(const SystemParams& p) {
  p.validate();
  return p.hopf_threshold();
}

/// Closed-form data for O and Z (x3 >= 0 half-space).
inline EquilibriumPair analyze_equilibria(const SystemParams& p) {
  p.validate();
  using C = std::complex<double>;
  const double h2 = p.h * p.h, r2 = p.r * p.r;

  EquilibriumPair out;
  out.origin.location = State::Zero();
  out.origin.eigenvalues = {C(-h2, p.omega), C(-h2, -p.omega), C(r2, 0.0)};
  detail::count_dims(out.origin);
  out.origin.stable = {2, ManifoldKind::PlaneX3Zero};
  out.origin.unstable = {1, ManifoldKind::X3AxisSegment};

  const double re = r2 / p.c - h2;
  out.upper.location = State(0.0, 0.0, p.hopf_threshold());
  out.upper.eigenvalues = {C(re, p.omega), C(re, -p.omega), C(-2.0 * r2, 0.0)};
  detail::count_dims(out.upper);
  if (re > 0.0) {
    out.upper.stable = {1, ManifoldKind::X3AxisPositive};
    out.upper.unstable = {2, ManifoldKind::TangentPlaneAtZ};
  } else {
    out.upper.stable = {re < 0.0 ? 3 : 1, ManifoldKind::X3AxisPositive};
    out.upper.unstable = {0, ManifoldKind::TangentPlaneAtZ};
  }
  return out;
}

/// Eigenvalues of the numerical Jacobian, sorted by (imag, real) to line up
/// with the closed-form ordering (+i, -i, real).
inline std::array<std::complex<double>, 3> numeric_eigenvalues(const SystemParams& p,
                                                              const State& x) {
  Eigen::EigenSolver<Matrix3> es(jacobian(p, x), false);
  std::array<std::complex<double>, 3> ev{es.eigenvalues()[0], es.eigenvalues()[1],
                                         es.eigenvalues()[2]};
  std::sort(ev.begin(), ev.end(), [](auto l, auto r) {
    if (l.imag() != r.imag()) return l.imag() > r.imag();
    return l.real() < r.real();
  });
  // (+w, -w, 0) in imaginary part: move the real one to the back.
  if (ev[1].imag() == 0.0 && ev[2].imag() < 0.0) std::swap(ev[1], ev[2]);
  return ev;
}

struct AnalyticOrbit {
  double rho0 = 0.0;
  double period = 0.0;
  double height = 0.0;  // x3 = h along the orbit

  State at(double t, double omega) const {
    return {rho0 * std::cos(omega * t), rho0 * std::sin(omega * t), height};
  }
};

/// Circular periodic orbit rho = rho0, x3 = h that exists when a = b.
inline AnalyticOrbit analytic_orbit(const SystemParams& p) {
  p.validate();
  const double num = p.r * p.r - p.c * p.h * p.h;
  if (p.a != p.b || num < 0.0) {
    throw Error(ErrorCode::NotApplicable, "analytic periodic orbit needs a = b and r^2 - c h^2 >= 0");
  }
  return {std::sqrt(num / p.a), p.return_time(), p.h};
}

}  // namespace plchaos
