#pragma once

// Vector field of the pseudo-linear chaotic system, its nonlinear
// eigenstructure, the Table-style region partition and the boundedness bound.
//
//   x1' = (x3^2 - h^2) x1 - w x2
//   x2' = w x1 + (x3^2 - h^2) x2
//   x3' = (r^2 - a x1^2 - b x2^2 - c x3^2) x3
//
// written as x' = A(x) x with A(x) = diag([[g1, -w], [w, g1]], [g3]).

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <functional>
#include <limits>
#include <vector>

#include <Eigen/Dense>

#include "plchaos/error.hpp"
#include "plchaos/params.hpp"

namespace plchaos {

using State = Eigen::Vector3d;
using Matrix3 = Eigen::Matrix3d;

struct CylState {
  double rho = 0.0;
  double theta = 0.0;  // radians, in [0, 2*pi)
  double x3 = 0.0;
};

inline CylState to_cyl(const State& x) {
  double theta = std::atan2(x[1], x[0]);
  if (theta < 0.0) theta += 2.0 * M_PI;
  return {std::hypot(x[0], x[1]), theta, x[2]};
}

inline State from_cyl(const CylState& c) {
  return {c.rho * std::cos(c.theta), c.rho * std::sin(c.theta), c.x3};
}

inline bool is_finite(const State& x) { return x.allFinite(); }

// g1(x) = x3^2 - h^2, the real part of the complex NEValue pair.
inline double spiral_rate(const SystemParams& p, const State& x) {
  return x[2] * x[2] - p.h * p.h;
}

// g3(x) = r^2 - a x1^2 - b x2^2 - c x3^2, the real NEValue.
inline double axial_rate(const SystemParams& p, const State& x) {
  return p.r * p.r - p.a * x[0] * x[0] - p.b * x[1] * x[1] - p.c * x[2] * x[2];
}

inline State vector_field(const SystemParams& p, const State& x) {
  const double g1 = spiral_rate(p, x);
  const double g3 = axial_rate(p, x);
  return {g1 * x[0] - p.omega * x[1], p.omega * x[0] + g1 * x[1], g3 * x[2]};
}

/// Closed loop with the single-input feedback u = -K r^2 x3 on the axial equation.
inline double feedback_input(const SystemParams& p, const State& x) {
  return -p.K * p.r * p.r * x[2];
}

inline State controlled_field(const SystemParams& p, const State& x) {
  State f = vector_field(p, x);
  f[2] += feedback_input(p, x);
  return f;
}

inline Matrix3 jacobian(const SystemParams& p, const State& x) {
  const double g1 = spiral_rate(p, x);
  const double x1 = x[0], x2 = x[1], x3 = x[2];
  Matrix3 J;
  J << g1, -p.omega, 2.0 * x3 * x1,
      p.omega, g1, 2.0 * x3 * x2,
      -2.0 * p.a * x1 * x3, -2.0 * p.b * x2 * x3,
      p.r * p.r - p.a * x1 * x1 - p.b * x2 * x2 - 3.0 * p.c * x3 * x3;
  return J;
}

/// Partial derivative of the free vector field with respect to one constant.
inline State param_derivative(const SystemParams& p, const State& x, Param which) {
  const double x1 = x[0], x2 = x[1], x3 = x[2];
  switch (which) {
    case Param::a: return {0.0, 0.0, -x1 * x1 * x3};
    case Param::b: return {0.0, 0.0, -x2 * x2 * x3};
    case Param::c: return {0.0, 0.0, -x3 * x3 * x3};
    case Param::h: return {-2.0 * p.h * x1, -2.0 * p.h * x2, 0.0};
    case Param::r: return {0.0, 0.0, 2.0 * p.r * x3};
    case Param::omega: return {-x2, x1, 0.0};
  }
  return State::Zero();
}

struct NEValueSet {
  double lambda12_re = 0.0;
  double lambda12_im = 0.0;
  double lambda3 = 0.0;

  std::array<std::complex<double>, 3> values() const {
    return {std::complex<double>(lambda12_re, lambda12_im),
            std::complex<double>(lambda12_re, -lambda12_im), std::complex<double>(lambda3, 0.0)};
  }
};

inline NEValueSet nevalues(const SystemParams& p, const State& x) {
  return {spiral_rate(p, x), p.omega, axial_rate(p, x)};
}

/// One diagonal block of a block-structured pseudo-linear form: either a real
/// 1x1 block [g] or a rotation-scaling 2x2 block [[g, -w], [w, g]].
struct PLBlock {
  enum class Kind { Real, Complex };
  Kind kind = Kind::Real;
  std::function<double(const State&)> g;
  double omega = 0.0;

  int size() const { return kind == Kind::Real ? 1 : 2; }
};

struct PLForm {
  std::vector<PLBlock> blocks;

  int dimension() const {
    int n = 0;
    for (const auto& b : blocks) n += b.size();
    return n;
  }

  Eigen::MatrixXd matrix(const State& x) const {
    const int n = dimension();
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n, n);
    int k = 0;
    for (const auto& b : blocks) {
      const double g = b.g(x);
      if (b.kind == PLBlock::Kind::Real) {
        A(k, k) = g;
      } else {
        A(k, k) = g;
        A(k, k + 1) = -b.omega;
        A(k + 1, k) = b.omega;
        A(k + 1, k + 1) = g;
      }
      k += b.size();
    }
    return A;
  }

  /// NEValues in block order; complex blocks contribute the conjugate pair.
  std::vector<std::complex<double>> nevalues(const State& x) const {
    std::vector<std::complex<double>> out;
    for (const auto& b : blocks) {
      const double g = b.g(x);
      if (b.kind == PLBlock::Kind::Real) {
        out.emplace_back(g, 0.0);
      } else {
        out.emplace_back(g, b.omega);
        out.emplace_back(g, -b.omega);
      }
    }
    return out;
  }

  PLForm restricted(const std::vector<std::size_t>& keep) const {
    PLForm out;
    for (auto i : keep) out.blocks.push_back(blocks.at(i));
    return out;
  }
};

inline PLForm free_plform(const SystemParams& p) {
  PLForm f;
  f.blocks.push_back({PLBlock::Kind::Complex, [p](const State& x) { return spiral_rate(p, x); },
                      p.omega});
  f.blocks.push_back({PLBlock::Kind::Real, [p](const State& x) { return axial_rate(p, x); }, 0.0});
  return f;
}

/// Closed loop under u = -K r^2 x3: only the real block changes,
/// lambda3_cl(x) = (1 - K) r^2 - a x1^2 - b x2^2 - c x3^2.
inline PLForm controlled_plform(const SystemParams& p) {
  PLForm f = free_plform(p);
  f.blocks[1].g = [p](const State& x) { return axial_rate(p, x) - p.K * p.r * p.r; };
  return f;
}

/// Constant NEVectors of the 3-D form: (1,-j,0), (j,1,0), (0,0,1).
inline std::array<Eigen::Vector3cd, 3> nevectors() {
  using C = std::complex<double>;
  return {Eigen::Vector3cd(C(1, 0), C(0, -1), C(0, 0)), Eigen::Vector3cd(C(0, 1), C(1, 0), C(0, 0)),
          Eigen::Vector3cd(C(0, 0), C(0, 0), C(1, 0))};
}

enum class RegionId { R1, R2, R3, R4, Boundary };

inline constexpr std::string_view to_string(RegionId r) {
  switch (r) {
    case RegionId::R1: return "R1";
    case RegionId::R2: return "R2";
    case RegionId::R3: return "R3";
    case RegionId::R4: return "R4";
    case RegionId::Boundary: return "BOUNDARY";
  }
  return "?";
}

inline constexpr double kDefaultRegionTol = 1e-12;

// Boundary functions: ellipsoid a x1^2 + b x2^2 + c x3^2 - r^2 and plane x3^2 - h^2.
inline double ellipsoid_excess(const SystemParams& p, const State& x) { return -axial_rate(p, x); }
inline double plane_excess(const SystemParams& p, const State& x) { return spiral_rate(p, x); }

inline RegionId region_from_signs(bool outside_ellipsoid, bool above_plane) {
  if (outside_ellipsoid) return above_plane ? RegionId::R1 : RegionId::R2;
  return above_plane ? RegionId::R4 : RegionId::R3;
}

/// Region label of x. `tol` is relative to r^2 (ellipsoid) and h^2 (plane).
inline RegionId classify_region(const SystemParams& p, const State& x,
                                double tol = kDefaultRegionTol) {
  if (tol < 0.0) throw Error(ErrorCode::InvalidArgument, "region tolerance must be >= 0");
  const double e = ellipsoid_excess(p, x);
  const double q = plane_excess(p, x);
  if (std::abs(e) <= tol * p.r * p.r || std::abs(q) <= tol * p.h * p.h) return RegionId::Boundary;
  return region_from_signs(e > 0.0, q > 0.0);
}

struct EscapeBound {
  double rho1 = 0.0;
  double rho0 = 0.0;
  double x30 = 0.0;
};

inline constexpr double kEscapeMargin = 1e-9;

/// Radius reached at most before an orbit in region 1 that starts at radius
/// `rho_start` and height `x30` > h comes down to the plane x3 = h.
/// rho1 is the larger root of d h rho^2 - (x30^2 - h^2) rho - r^2 h = 0,
/// beyond which dx3/drho < -1 on h <= x3 <= x30.
inline EscapeBound escape_bound_from(const SystemParams& p, double rho_start, double x30) {
  const double d = p.d();
  const double h = p.h;
  const double qa = d * h;
  const double qb = -(x30 * x30 - h * h);
  const double qc = -p.r * p.r * h;
  const double disc = qb * qb - 4.0 * qa * qc;  // > 0 since qa > 0 and qc < 0
  const double root = (-qb + std::sqrt(disc)) / (2.0 * qa);
  const double rho1 = std::max({root, p.r / std::sqrt(d), rho_start}) * (1.0 + kEscapeMargin);
  return {rho1, rho1 + x30 - h, x30};
}

inline EscapeBound compute_escape_bound(const SystemParams& p, const State& x0) {
  p.validate();
  if (classify_region(p, x0) != RegionId::R1 || !(x0[2] > p.h)) {
    throw Error(ErrorCode::NotInR1, "escape bound requires an initial point in region 1 with x3 > h");
  }
  return escape_bound_from(p, std::hypot(x0[0], x0[1]), x0[2]);
}

struct GlobalBound {
  double rho_max = 0.0;
  double x3_max = 0.0;
};

/// Forward-time bound for the whole orbit of x0:
///  |x3| never exceeds max(|x3(0)|, r/sqrt(c)), since x3 x3' <= (r^2 - c x3^2) x3^2;
///  rho only grows while |x3| > h, where region 4 keeps rho < r/sqrt(d) and the
///  region-1 escape bound caps every excursion.
inline GlobalBound global_bound(const SystemParams& p, const State& x0) {
  p.validate();
  const double x3_max = std::max(std::abs(x0[2]), p.hopf_threshold());
  const double rho_start = std::max(std::hypot(x0[0], x0[1]), p.r / std::sqrt(p.d()));
  if (x3_max <= p.h) return {rho_start, x3_max};
  return {escape_bound_from(p, rho_start, x3_max).rho0, x3_max};
}

struct Box {
  State lo = State::Constant(-1.0);
  State hi = State::Constant(1.0);
};

struct GasReport {
  bool all_negative = true;
  State worst_point = State::Zero();
  double worst_real_part = -std::numeric_limits<double>::infinity();
  std::size_t n_samples = 0;
  // Structural conditions hold for every block-diagonal form built from
  // 1x1 and rotation-scaling 2x2 blocks.
  bool multiplicities_equal = true;
  bool nevectors_state_independent = true;
};

namespace detail {
inline double radical_inverse(std::size_t i, unsigned base) {
  double inv = 1.0 / base, f = inv, r = 0.0;
  while (i > 0) {
    r += f * static_cast<double>(i % base);
    i /= base;
    f *= inv;
  }
  return r;
}
}  // namespace detail

/// Halton point i (bases 2, 3, 5) mapped into the box.
inline State halton_point(const Box& box, std::size_t i) {
  const State u{detail::radical_inverse(i, 2), detail::radical_inverse(i, 3),
                detail::radical_inverse(i, 5)};
  return box.lo + (box.hi - box.lo).cwiseProduct(u);
}

/// Falsifier for the sign condition of the global-stability test: samples the
/// box and reports whether every NEValue had negative real part.
inline GasReport check_gas_conditions(const PLForm& form, const Box& box, std::size_t n_samples) {
  if (n_samples < 1) throw Error(ErrorCode::InvalidArgument, "n_samples must be >= 1");
  GasReport rep;
  rep.n_samples = n_samples;
  for (std::size_t i = 0; i < n_samples; ++i) {
    // Index 0 of the Halton sequence is the box corner lo; start at 1 and
    // include the box centre as the last sample so the origin is always hit
    // for symmetric boxes.
    const State x = (i + 1 == n_samples) ? State(0.5 * (box.lo + box.hi)) : halton_point(box, i + 1);
    for (const auto& lam : form.nevalues(x)) {
      if (lam.real() > rep.worst_real_part) {
        rep.worst_real_part = lam.real();
        rep.worst_point = x;
      }
    }
  }
  rep.all_negative = rep.worst_real_part < 0.0;
  return rep;
}

}  // namespace plchaos
