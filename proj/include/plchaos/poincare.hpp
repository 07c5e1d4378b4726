#pragma once

// Return map on the half-plane {x2 = 0, x1 > 0, x3 > 0}. Because theta' = w
// exactly, the first return is the time-2pi/w flow, so the map is evaluated as
// a fixed-time flow rather than by event detection.

#include <array>
#include <cmath>
#include <complex>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "plchaos/error.hpp"
#include "plchaos/integrate.hpp"
#include "plchaos/params.hpp"
#include "plchaos/pl_core.hpp"

namespace plchaos {

using Matrix2 = Eigen::Matrix2d;
using Vector2 = Eigen::Vector2d;

struct SectionPoint {
  double x1 = 1.0;
  double x3 = 1.0;

  bool in_section() const { return x1 > 0.0 && x3 > 0.0 && std::isfinite(x1) && std::isfinite(x3); }
  State embed() const { return {x1, 0.0, x3}; }
  Vector2 vec() const { return {x1, x3}; }
  static SectionPoint from(const Vector2& v) { return {v[0], v[1]}; }
};

inline double distance(const SectionPoint& a, const SectionPoint& b) {
  return std::hypot(a.x1 - b.x1, a.x3 - b.x3);
}

using Multipliers = std::array<std::complex<double>, 2>;

enum class Stability { Stable, Saddle, Unstable };

inline constexpr std::string_view to_string(Stability s) {
  switch (s) {
    case Stability::Stable: return "STABLE";
    case Stability::Saddle: return "SADDLE";
    case Stability::Unstable: return "UNSTABLE";
  }
  return "?";
}

/// Eigenvalues of a real 2x2 matrix, larger modulus first.
inline Multipliers eigenvalues2(const Matrix2& M) {
  const double tr = M.trace(), det = M.determinant();
  const double disc = 0.25 * tr * tr - det;
  Multipliers mu;
  if (disc >= 0.0) {
    const double s = std::sqrt(disc);
    // Avoid cancellation: compute the larger-magnitude root first.
    const double big = 0.5 * tr + (tr >= 0.0 ? s : -s);
    const double small = big != 0.0 ? det / big : 0.5 * tr - (tr >= 0.0 ? s : -s);
    mu = {std::complex<double>(big, 0.0), std::complex<double>(small, 0.0)};
  } else {
    const double s = std::sqrt(-disc);
    mu = {std::complex<double>(0.5 * tr, s), std::complex<double>(0.5 * tr, -s)};
  }
  if (std::abs(mu[1]) > std::abs(mu[0])) std::swap(mu[0], mu[1]);
  return mu;
}

inline Stability classify_multipliers(const Multipliers& mu) {
  const bool out0 = std::abs(mu[0]) > 1.0, out1 = std::abs(mu[1]) > 1.0;
  if (!out0 && !out1) {
    return (std::abs(mu[0]) < 1.0 && std::abs(mu[1]) < 1.0) ? Stability::Stable
                                                              : Stability::Unstable;
  }
  if (out0 != out1) return Stability::Saddle;
  return Stability::Unstable;
}

struct PeriodicPoint {
  SectionPoint point;
  int n = 1;
  Multipliers multipliers{};
  Stability stability = Stability::Unstable;
  double residual = 0.0;
};

inline constexpr double kReturnTolerance = 1e-8;
inline constexpr double kSectionDriftTol = 1e-6;

/// Full 3-D image of a section point after one return time.
inline State poincare_map_full(const SystemParams& p, const SectionPoint& s,
                               const IntegratorConfig& cfg = {}) {
  return flow(p, s.embed(), p.return_time(), cfg);
}

namespace detail {
inline SectionPoint project_to_section(const State& y, double rho_scale) {
  if (std::abs(y[1]) > kReturnTolerance * (1.0 + rho_scale) * 1e2) {
    throw Error(ErrorCode::SectionDrift,
                "return point is off the section plane (x2 = " + std::to_string(y[1]) + ")");
  }
  SectionPoint out{y[0], y[2]};
  if (!out.in_section()) {
    throw Error(ErrorCode::LeftSection, "image left the section: x1 = " + std::to_string(y[0]) +
                                            ", x3 = " + std::to_string(y[2]));
  }
  return out;
}
}  // namespace detail

inline SectionPoint poincare_map(const SystemParams& p, const SectionPoint& s,
                                 const IntegratorConfig& cfg = {}) {
  if (!s.in_section()) throw Error(ErrorCode::InvalidArgument, "seed is not on the section");
  const State y = poincare_map_full(p, s, cfg);
  return detail::project_to_section(y, std::abs(y[0]));
}

/// Iterates the map `count` times and returns all images (seed excluded).
inline std::vector<SectionPoint> iterate_map(const SystemParams& p, SectionPoint s,
                                             std::size_t count, const IntegratorConfig& cfg = {}) {
  std::vector<SectionPoint> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    s = poincare_map(p, s, cfg);
    out.push_back(s);
  }
  return out;
}

struct MapDerivatives {
  SectionPoint image;
  Matrix2 jacobian;
  Vector2 dparam;             // derivative of the image w.r.t. the chosen constant
  double x2_row_residual = 0.0;
};

/// One return with its 2x2 derivative (the (x1, x3) block of the monodromy)
/// and the parameter derivative. The off-section row is checked, not assumed.
inline MapDerivatives poincare_derivatives(const SystemParams& p, const SectionPoint& s,
                                           Param which, const IntegratorConfig& cfg = {}) {
  const double T = p.return_time();
  const SensitivityResult r = flow_with_sensitivity(p, s.embed(), T, which, cfg);
  MapDerivatives out;
  out.image = SectionPoint{r.x[0], r.x[2]};
  out.jacobian << r.monodromy(0, 0), r.monodromy(0, 2), r.monodromy(2, 0), r.monodromy(2, 2);
  State dp = r.dparam;
  if (which == Param::omega) {
    // The return time 2pi/w also moves with w.
    dp += vector_field(p, r.x) * (-T / p.omega);
  }
  out.dparam = Vector2(dp[0], dp[2]);
  out.x2_row_residual = std::max(std::abs(r.monodromy(1, 0)), std::abs(r.monodromy(1, 2)));
  const double scale = 1.0 + r.monodromy.cwiseAbs().maxCoeff();
  if (out.x2_row_residual > kSectionDriftTol * scale) {
    throw Error(ErrorCode::SectionDrift, "variational flow leaves the section tangent plane");
  }
  (void)detail::project_to_section(r.x, std::abs(r.x[0]));
  return out;
}

inline Matrix2 poincare_jacobian(const SystemParams& p, const SectionPoint& s,
                                 const IntegratorConfig& cfg = {}) {
  if (!s.in_section()) throw Error(ErrorCode::InvalidArgument, "seed is not on the section");
  const VariationalResult r = flow_with_variational(p, s.embed(), p.return_time(), cfg);
  const double residual = std::max(std::abs(r.monodromy(1, 0)), std::abs(r.monodromy(1, 2)));
  if (residual > kSectionDriftTol * (1.0 + r.monodromy.cwiseAbs().maxCoeff())) {
    throw Error(ErrorCode::SectionDrift, "variational flow leaves the section tangent plane");
  }
  (void)detail::project_to_section(r.x, std::abs(r.x[0]));
  Matrix2 D;
  D << r.monodromy(0, 0), r.monodromy(0, 2), r.monodromy(2, 0), r.monodromy(2, 2);
  return D;
}

/// n-fold composition: image, chained Jacobian and parameter derivative.
/// Intermediate points may lie outside the section (e.g. during Newton).
inline MapDerivatives iterate_derivatives(const SystemParams& p, const SectionPoint& s, int n,
                                          Param which, const IntegratorConfig& cfg = {}) {
  MapDerivatives acc;
  acc.image = s;
  acc.jacobian = Matrix2::Identity();
  acc.dparam = Vector2::Zero();
  const double T = p.return_time();
  for (int k = 0; k < n; ++k) {
    const SensitivityResult r = flow_with_sensitivity(p, acc.image.embed(), T, which, cfg);
    Matrix2 D;
    D << r.monodromy(0, 0), r.monodromy(0, 2), r.monodromy(2, 0), r.monodromy(2, 2);
    State dp = r.dparam;
    if (which == Param::omega) dp += vector_field(p, r.x) * (-T / p.omega);
    acc.dparam = D * acc.dparam + Vector2(dp[0], dp[2]);
    acc.jacobian = D * acc.jacobian;
    acc.x2_row_residual =
        std::max({acc.x2_row_residual, std::abs(r.monodromy(1, 0)), std::abs(r.monodromy(1, 2))});
    if (!r.x.allFinite()) throw Error(ErrorCode::NonFinite, "map iterate is not finite");
    acc.image = SectionPoint{r.x[0], r.x[2]};
  }
  return acc;
}

struct NewtonOptions {
  double tol = 1e-10;
  int max_iter = 30;
  int max_halvings = 8;
};

struct NewtonReport {
  PeriodicPoint result;
  std::vector<double> residuals;  // ||P^n(s) - s|| per iterate, last one converged
  int iterations = 0;
};

inline PeriodicPoint make_periodic_point(const SectionPoint& s, int n, const Matrix2& DPn,
                                         double residual) {
  PeriodicPoint pp;
  pp.point = s;
  pp.n = n;
  pp.multipliers = eigenvalues2(DPn);
  pp.stability = classify_multipliers(pp.multipliers);
  pp.residual = residual;
  return pp;
}

/// Damped Newton on G(s) = P^n(s) - s with the chained variational Jacobian.
inline NewtonReport newton_periodic_traced(const SystemParams& p, const SectionPoint& guess, int n,
                                           const IntegratorConfig& cfg = {},
                                           const NewtonOptions& opt = {}) {
  if (n < 1) throw Error(ErrorCode::InvalidArgument, "period must be >= 1");
  if (!guess.in_section()) throw Error(ErrorCode::InvalidArgument, "guess is not on the section");
  p.validate();

  NewtonReport rep;
  SectionPoint s = guess;
  MapDerivatives d = iterate_derivatives(p, s, n, Param::a, cfg);
  Vector2 G = d.image.vec() - s.vec();
  double norm = G.norm();
  rep.residuals.push_back(norm);

  for (int it = 0; it <= opt.max_iter; ++it) {
    if (norm < opt.tol && s.in_section()) {
      rep.iterations = it;
      rep.result = make_periodic_point(s, n, d.jacobian, norm);
      return rep;
    }
    if (it == opt.max_iter) break;
    const Matrix2 M = d.jacobian - Matrix2::Identity();
    if (std::abs(M.determinant()) < 1e-14) {
      throw Error(ErrorCode::SingularJacobian, "DP^n - I is singular; perturb the parameter");
    }
    const Vector2 step = -M.partialPivLu().solve(G);
    double lambda = 1.0;
    bool accepted = false;
    SectionPoint best_s = s;
    MapDerivatives best_d = d;
    double best_norm = std::numeric_limits<double>::infinity();
    for (int k = 0; k <= opt.max_halvings; ++k, lambda *= 0.5) {
      const SectionPoint trial = SectionPoint::from(s.vec() + lambda * step);
      if (!trial.in_section()) continue;
      MapDerivatives dt;
      try {
        dt = iterate_derivatives(p, trial, n, Param::a, cfg);
      } catch (const Error&) {
        continue;
      }
      const double nt = (dt.image.vec() - trial.vec()).norm();
      if (nt < best_norm) {
        best_norm = nt;
        best_s = trial;
        best_d = dt;
      }
      if (nt < norm) {
        accepted = true;
        break;
      }
    }
    if (!std::isfinite(best_norm)) break;
    (void)accepted;
    s = best_s;
    d = best_d;
    G = d.image.vec() - s.vec();
    norm = G.norm();
    rep.residuals.push_back(norm);
  }
  throw Error(ErrorCode::NoConvergence,
              "Newton did not converge for period " + std::to_string(n) + " (residual " +
                  std::to_string(norm) + ")");
}

inline PeriodicPoint newton_periodic(const SystemParams& p, const SectionPoint& guess, int n,
                                     const IntegratorConfig& cfg = {},
                                     const NewtonOptions& opt = {}) {
  return newton_periodic_traced(p, guess, n, cfg, opt).result;
}

}  // namespace plchaos
