#pragma once

// Largest Lyapunov exponent of the flow from tangent-vector growth.

#include <cmath>
#include <vector>

#include "plchaos/error.hpp"
#include "plchaos/integrate.hpp"
#include "plchaos/params.hpp"
#include "plchaos/pl_core.hpp"

namespace plchaos {

struct LyapunovResult {
  double exponent = 0.0;
  std::size_t intervals = 0;        // intervals entering the average
  std::vector<double> running;      // estimate after each interval
};

/// The tangent vector is renormalized every `renorm_interval` and its component
/// along the flow direction is removed, so the estimate is the largest
/// exponent transverse to the orbit (negative on a stable cycle). The first
/// interval only aligns the vector and is not averaged.
inline LyapunovResult lyapunov(const SystemParams& p, const State& x0, double T,
                               double renorm_interval = 1.0, const IntegratorConfig& cfg = {}) {
  p.validate();
  cfg.validate();
  if (!(renorm_interval > 0.0) || !(T >= 2.0 * renorm_interval)) {
    throw Error(ErrorCode::InvalidArgument, "lyapunov needs renorm_interval > 0 and T >= 2 intervals");
  }
  auto rhs = [&p](const Vec<6>& z) {
    Vec<6> dz;
    const State x = z.head<3>();
    dz.head<3>() = vector_field(p, x);
    dz.tail<3>() = jacobian(p, x) * z.tail<3>();
    return dz;
  };
  auto transverse = [&p](const Vec<6>& z) {
    State v = z.tail<3>();
    const State f = vector_field(p, z.head<3>());
    const double fn = f.norm();
    if (fn > 0.0) v -= v.dot(f / fn) * (f / fn);
    return v;
  };

  Vec<6> y;
  y.head<3>() = x0;
  y.tail<3>() = State(1.0, 1.0, 1.0).normalized();
  y.tail<3>() = transverse(y);
  if (y.tail<3>().norm() == 0.0) y.tail<3>() = State(0.0, 0.0, 1.0);
  y.tail<3>().normalize();

  const auto n = static_cast<std::size_t>(std::floor(T / renorm_interval));
  LyapunovResult res;
  double sum = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double t0 = static_cast<double>(k) * renorm_interval;
    y = integrate_adaptive<6>(rhs, y, t0, t0 + renorm_interval, cfg);
    State v = transverse(y);
    const double g = v.norm();
    if (!(g > 0.0) || !std::isfinite(g)) {
      throw Error(ErrorCode::NonFinite, "tangent vector collapsed or overflowed");
    }
    y.tail<3>() = v / g;
    if (k == 0) continue;
    sum += std::log(g);
    ++res.intervals;
    res.running.push_back(sum / (static_cast<double>(res.intervals) * renorm_interval));
  }
  res.exponent = res.running.empty() ? 0.0 : res.running.back();
  return res;
}

}  // namespace plchaos
