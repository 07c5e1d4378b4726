#pragma once

// Stabilization of the origin by u = -K r^2 x3 and master-slave synchronization.

#include <cmath>
#include <vector>

#include "plchaos/integrate.hpp"
#include "plchaos/params.hpp"
#include "plchaos/pl_core.hpp"

namespace plchaos {

/// (1 - K) r^2 - a x1^2 - b x2^2 - c x3^2
inline double closed_loop_ne3(const SystemParams& p, const State& x) {
  return (1.0 - p.K) * p.r * p.r - p.a * x[0] * x[0] - p.b * x[1] * x[1] - p.c * x[2] * x[2];
}

/// Axial NEValue of the synchronization error; the instantaneous slave x1, x2
/// stand in for their synchronized values.
inline double sync_error_ne3(const SystemParams& p, const State& xs, const State& xm) {
  return -(p.a * xs[0] * xs[0] + p.b * xs[1] * xs[1] +
           p.c * (xs[2] * xs[2] + xs[2] * xm[2] + xm[2] * xm[2]));
}

struct ControlledRun {
  double K = 0.0;
  Trajectory trajectory;
  std::vector<double> u;
  std::vector<double> lambda3cl;
};

inline ControlledRun run_controlled(const SystemParams& p, const State& x0, double T,
                                    const IntegratorConfig& cfg = {}, SampleSpec sampling = {}) {
  p.validate();
  cfg.validate();
  ControlledRun run;
  run.K = p.K;
  auto record = [&](double t, const State& x) {
    run.trajectory.push(t, x);
    run.u.push_back(feedback_input(p, x));
    run.lambda3cl.push_back(closed_loop_ne3(p, x));
  };
  record(0.0, x0);
  detail::Sampler<3> sampler{sampling, 0.0, 1};
  integrate_adaptive<3>([&p](const State& x) { return controlled_field(p, x); }, x0, 0.0, T, cfg,
                        [&](const DenseStep<3>& s) { sampler(s, record); });
  return run;
}

/// Synchronizing inputs applied to the slave.
inline State sync_controller(const SystemParams& p, const State& xs, const State& xm) {
  return {-xs[2] * xs[2] * xs[0] + xm[2] * xm[2] * xm[0],
          -xs[2] * xs[2] * xs[1] + xm[2] * xm[2] * xm[1],
          -p.r * p.r * (xs[2] - xm[2])};
}

/// Error dynamics with the controller substituted:
///   e1' = -h^2 e1 - w e2,  e2' = w e1 - h^2 e2,
///   e3' = g3(xs) xs3 - g3(xm) xm3 - r^2 e3,  xs = xm + e.
inline State sync_error_field(const SystemParams& p, const State& xm, const State& e) {
  const State xs = xm + e;
  const double h2 = p.h * p.h;
  return {-h2 * e[0] - p.omega * e[1], p.omega * e[0] - h2 * e[1],
          axial_rate(p, xs) * xs[2] - axial_rate(p, xm) * xm[2] - p.r * p.r * e[2]};
}

struct SyncRun {
  std::vector<double> t;
  std::vector<State> master;
  std::vector<State> slave;
  std::vector<State> error;
  std::vector<State> u;
};

namespace detail {
inline void push_sync(SyncRun& run, const SystemParams& p, double t, const State& xm, const State& e) {
  const State xs = xm + e;
  run.t.push_back(t);
  run.master.push_back(xm);
  run.slave.push_back(xs);
  run.error.push_back(e);
  run.u.push_back(sync_controller(p, xs, xm));
}
}  // namespace detail

/// Integrates the master together with the error e = xs - xm.
inline SyncRun run_sync(const SystemParams& p, const State& xm0, const State& xs0, double T,
                        const IntegratorConfig& cfg = {}, SampleSpec sampling = {}) {
  p.validate();
  cfg.validate();
  Vec<6> y;
  y.head<3>() = xm0;
  y.tail<3>() = xs0 - xm0;
  SyncRun run;
  detail::push_sync(run, p, 0.0, xm0, y.tail<3>());
  detail::Sampler<6> sampler{sampling, 0.0, 1};
  auto rhs = [&p](const Vec<6>& z) {
    Vec<6> dz;
    const State xm = z.head<3>(), e = z.tail<3>();
    dz.head<3>() = vector_field(p, xm);
    dz.tail<3>() = sync_error_field(p, xm, e);
    return dz;
  };
  integrate_adaptive<6>(rhs, y, 0.0, T, cfg, [&](const DenseStep<6>& s) {
    sampler(s, [&](double t, const Vec<6>& z) { detail::push_sync(run, p, t, z.head<3>(), z.tail<3>()); });
  });
  return run;
}

/// Same experiment integrated in master/slave coordinates.
inline SyncRun run_sync_coupled(const SystemParams& p, const State& xm0, const State& xs0, double T,
                                const IntegratorConfig& cfg = {}, SampleSpec sampling = {}) {
  p.validate();
  cfg.validate();
  Vec<6> y;
  y.head<3>() = xm0;
  y.tail<3>() = xs0;
  SyncRun run;
  detail::push_sync(run, p, 0.0, xm0, xs0 - xm0);
  detail::Sampler<6> sampler{sampling, 0.0, 1};
  auto rhs = [&p](const Vec<6>& z) {
    Vec<6> dz;
    const State xm = z.head<3>(), xs = z.tail<3>();
    dz.head<3>() = vector_field(p, xm);
    dz.tail<3>() = vector_field(p, xs) + sync_controller(p, xs, xm);
    return dz;
  };
  integrate_adaptive<6>(rhs, y, 0.0, T, cfg, [&](const DenseStep<6>& s) {
    sampler(s, [&](double t, const Vec<6>& z) {
      detail::push_sync(run, p, t, z.head<3>(), State(z.tail<3>() - z.head<3>()));
    });
  });
  return run;
}

}  // namespace plchaos
