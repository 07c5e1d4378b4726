#pragma once

// Unstable manifolds: 1-D curves of saddle points of the return map grown from
// a fundamental domain, and orbits on the 2-D unstable manifold of Z.

#include <cmath>
#include <complex>
#include <cstddef>
#include <vector>

#include "plchaos/error.hpp"
#include "plchaos/integrate.hpp"
#include "plchaos/parallel.hpp"
#include "plchaos/params.hpp"
#include "plchaos/pl_core.hpp"
#include "plchaos/poincare.hpp"

namespace plchaos {

struct ManifoldOptions {
  double eps = 0.0;  // <= 0 selects 1e-4 * max(x1, x3) of the saddle
  double gap_max = 1e-3;
  std::size_t n0 = 64;
  int n_iters = 6;
  std::size_t max_points = 200000;  // refinement budget for the whole curve
  IntegratorConfig integrator;
};

struct ManifoldCurve {
  std::vector<SectionPoint> points;
  std::vector<double> sigma;         // fundamental-domain parameter of each point
  std::vector<std::size_t> level_start;  // index of the first point of each iterate
  PeriodicPoint source;
  int side = +1;
  int map_power = 1;  // iterates of P per growth step (2n for a flip saddle)
  double multiplier = 0.0;
  Vector2 direction = Vector2::Zero();
  double eps = 0.0;
  bool truncated = false;  // point budget hit before gap_max was reached

  double arclength() const {
    double L = 0.0;
    for (std::size_t i = 1; i < points.size(); ++i) L += distance(points[i - 1], points[i]);
    return L;
  }
};

namespace detail {

inline SectionPoint map_power(const SystemParams& p, SectionPoint s, int k, const IntegratorConfig& cfg) {
  for (int i = 0; i < k; ++i) s = poincare_map(p, s, cfg);
  return s;
}

}  // namespace detail

/// Unstable direction and multiplier of a saddle period-n point.
inline std::pair<double, Vector2> unstable_eigen(const SystemParams& p, const PeriodicPoint& saddle,
                                                 const IntegratorConfig& cfg = {}) {
  const Matrix2 J = iterate_derivatives(p, saddle.point, saddle.n, Param::a, cfg).jacobian;
  const Multipliers mu = eigenvalues2(J);
  const bool out0 = std::abs(mu[0]) > 1.0, out1 = std::abs(mu[1]) > 1.0;
  if (out0 == out1) throw Error(ErrorCode::NotASaddle, "point is not a saddle of the return map");
  const auto m = out0 ? mu[0] : mu[1];
  if (m.imag() != 0.0) {
    throw Error(ErrorCode::ComplexUnstableMultiplier, "unstable multiplier is not real");
  }
  const Matrix2 K = J - m.real() * Matrix2::Identity();
  Vector2 v = K.row(0).norm() >= K.row(1).norm() ? Vector2(-K(0, 1), K(0, 0))
                                                  : Vector2(-K(1, 1), K(1, 0));
  if (v.norm() == 0.0) v = Vector2(1.0, 0.0);
  return {m.real(), v.normalized()};
}

/// One branch (side = +1 or -1 along the eigenvector) of the unstable manifold
/// of a saddle period-n point. With a negative multiplier the growth map is
/// P^{2n}, so the two sides are traced separately and swap under P^n.
inline ManifoldCurve unstable_manifold_map(const SystemParams& p, const PeriodicPoint& saddle,
                                           int side, const ManifoldOptions& opt = {}) {
  p.validate();
  if (side != 1 && side != -1) throw Error(ErrorCode::InvalidArgument, "side must be +1 or -1");
  if (opt.n0 < 2 || !(opt.gap_max > 0.0) || opt.n_iters < 0) {
    throw Error(ErrorCode::InvalidArgument, "manifold needs n0 >= 2, gap_max > 0, n_iters >= 0");
  }
  const auto [mu, v] = unstable_eigen(p, saddle, opt.integrator);

  ManifoldCurve c;
  c.source = saddle;
  c.side = side;
  c.multiplier = mu;
  c.direction = v;
  c.map_power = mu > 0.0 ? saddle.n : 2 * saddle.n;
  c.eps = opt.eps > 0.0 ? opt.eps : 1e-4 * std::max(saddle.point.x1, saddle.point.x3);
  const int k = c.map_power;
  const auto& cfg = opt.integrator;

  const Vector2 q0 = saddle.point.vec() + side * c.eps * v;
  const Vector2 q1 = detail::map_power(p, SectionPoint::from(q0), k, cfg).vec();
  auto domain = [&](double s) { return SectionPoint::from(q0 + s * (q1 - q0)); };

  struct Node {
    double s;
    SectionPoint y;
  };
  std::vector<Node> nodes(opt.n0);
  for (std::size_t i = 0; i < opt.n0; ++i) {
    const double s = static_cast<double>(i) / static_cast<double>(opt.n0 - 1);
    nodes[i] = {s, domain(s)};
  }
  nodes.back().y = SectionPoint::from(q1);

  auto emit = [&](const std::vector<Node>& level) {
    c.level_start.push_back(c.points.size());
    for (const auto& nd : level) {
      c.points.push_back(nd.y);
      c.sigma.push_back(nd.s);
    }
  };
  emit(nodes);

  for (int it = 1; it <= opt.n_iters; ++it) {
    parallel_for(nodes.size(), [&](std::size_t i) {
      nodes[i].y = detail::map_power(p, nodes[i].y, k, cfg);
    });
    // Refine by inserting preimages of gap midpoints in the fundamental domain.
    std::vector<Node> refined;
    refined.reserve(nodes.size());
    refined.push_back(nodes.front());
    for (std::size_t i = 1; i < nodes.size(); ++i) {
      std::vector<Node> stack{nodes[i]};
      while (!stack.empty()) {
        const Node& last = refined.back();
        const Node& next = stack.back();
        const bool over_budget = c.points.size() + refined.size() + stack.size() >= opt.max_points;
        if (distance(last.y, next.y) <= opt.gap_max || over_budget ||
            next.s - last.s < 1e-14) {
          if (over_budget && distance(last.y, next.y) > opt.gap_max) c.truncated = true;
          refined.push_back(next);
          stack.pop_back();
          continue;
        }
        const double sm = 0.5 * (last.s + next.s);
        stack.push_back({sm, detail::map_power(p, domain(sm), k * it, cfg)});
      }
    }
    nodes = std::move(refined);
    emit(nodes);
    if (c.truncated) break;
  }
  return c;
}

/// Both sides of the unstable manifold as separate polylines.
inline std::vector<ManifoldCurve> unstable_manifold_both(const SystemParams& p,
                                                         const PeriodicPoint& saddle,
                                                         const ManifoldOptions& opt = {}) {
  return {unstable_manifold_map(p, saddle, +1, opt), unstable_manifold_map(p, saddle, -1, opt)};
}

struct SurfaceFan {
  State equilibrium = State::Zero();
  double eps = 0.0;
  std::vector<State> seeds;
  std::vector<Trajectory> orbits;
};

/// Orbits on W^u(Z) seeded on a circle of radius eps about Z in the plane x3 = r/sqrt(c).
inline SurfaceFan unstable_manifold_equilibrium(const SystemParams& p, double eps,
                                                std::size_t n_seeds, double T,
                                                const IntegratorConfig& cfg = {},
                                                SampleSpec sampling = {}) {
  p.validate();
  if (!(p.r * p.r / p.c - p.h * p.h > 0.0)) {
    throw Error(ErrorCode::ZStable, "Z has no two-dimensional unstable manifold (r^2/c <= h^2)");
  }
  if (!(eps >= 0.0) || n_seeds == 0 || !(T >= 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "need eps >= 0, n_seeds >= 1, T >= 0");
  }
  SurfaceFan fan;
  fan.equilibrium = State(0.0, 0.0, p.hopf_threshold());
  fan.eps = eps;
  for (std::size_t i = 0; i < n_seeds; ++i) {
    const double phi = 2.0 * M_PI * static_cast<double>(i) / static_cast<double>(n_seeds);
    fan.seeds.push_back(fan.equilibrium + State(eps * std::cos(phi), eps * std::sin(phi), 0.0));
  }
  fan.orbits.resize(n_seeds);
  parallel_for(n_seeds, [&](std::size_t i) { fan.orbits[i] = simulate(p, fan.seeds[i], T, cfg, sampling); });
  return fan;
}

}  // namespace plchaos
