#pragma once

// Adaptive Dormand-Prince 5(4) integration with cubic Hermite dense output,
// plus the model-specific flows built on it: plain flow, variational flow
// (monodromy), parameter sensitivity and region-transition logging.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "plchaos/error.hpp"
#include "plchaos/params.hpp"
#include "plchaos/pl_core.hpp"

namespace plchaos {

template <int N>
using Vec = Eigen::Matrix<double, N, 1>;

struct IntegratorConfig {
  double rel_tol = 1e-10;
  double abs_tol = 1e-12;
  double max_step = std::numeric_limits<double>::infinity();
  std::size_t max_steps = 20'000'000;

  void validate() const {
    auto ok = [](double v) { return v > 0.0 && v <= 1e-2; };
    if (!ok(rel_tol) || !ok(abs_tol) || !(max_step > 0.0) || max_steps == 0) {
      throw Error(ErrorCode::InvalidArgument,
                  "integrator tolerances must lie in (0, 1e-2] and step limits must be positive");
    }
  }
};

/// One accepted step; evaluates the cubic Hermite interpolant on [t0, t1].
template <int N>
struct DenseStep {
  double t0 = 0.0, t1 = 0.0;
  Vec<N> y0, y1, f0, f1;

  Vec<N> operator()(double t) const {
    const double h = t1 - t0;
    if (h == 0.0) return y0;
    const double s = (t - t0) / h;
    const double s2 = s * s, s3 = s2 * s;
    const double h00 = 2 * s3 - 3 * s2 + 1;
    const double h10 = s3 - 2 * s2 + s;
    const double h01 = -2 * s3 + 3 * s2;
    const double h11 = s3 - s2;
    return h00 * y0 + (h10 * h) * f0 + h01 * y1 + (h11 * h) * f1;
  }
};

namespace detail {

template <int N>
double error_norm(const Vec<N>& err, const Vec<N>& ya, const Vec<N>& yb,
                  const IntegratorConfig& cfg) {
  double acc = 0.0;
  for (int i = 0; i < err.size(); ++i) {
    const double sc = cfg.abs_tol + cfg.rel_tol * std::max(std::abs(ya[i]), std::abs(yb[i]));
    const double q = err[i] / sc;
    acc += q * q;
  }
  return std::sqrt(acc / static_cast<double>(err.size()));
}

template <int N, class Rhs>
double initial_step(Rhs& rhs, const Vec<N>& y0, const Vec<N>& f0, double span,
                    const IntegratorConfig& cfg) {
  const double d0 = error_norm<N>(y0, y0, y0, cfg);
  const double d1 = error_norm<N>(f0, y0, y0, cfg);
  double h0 = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
  h0 = std::min(h0, span);
  const Vec<N> y1 = y0 + h0 * f0;
  const Vec<N> f1 = rhs(y1);
  const double d2 = error_norm<N>(Vec<N>(f1 - f0), y0, y0, cfg) / h0;
  const double dm = std::max(d1, d2);
  const double h1 = dm <= 1e-15 ? std::max(1e-6, h0 * 1e-3) : std::pow(0.01 / dm, 0.2);
  return std::min({100.0 * h0, h1, span, cfg.max_step});
}

}  // namespace detail

/// Integrates y' = rhs(y) from t0 to t1 (either direction). `on_step` receives
/// every accepted DenseStep in order. Deterministic for fixed inputs.
template <int N, class Rhs, class OnStep>
Vec<N> integrate_adaptive(Rhs&& rhs, Vec<N> y, double t0, double t1, const IntegratorConfig& cfg,
                          OnStep&& on_step) {
  static constexpr double a21 = 1.0 / 5;
  static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
  static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                          a54 = -212.0 / 729;
  static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                          a64 = 49.0 / 176, a65 = -5103.0 / 18656;
  static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                          b5 = -2187.0 / 6784, b6 = 11.0 / 84;
  static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                          e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

  if (!std::isfinite(t0) || !std::isfinite(t1)) {
    throw Error(ErrorCode::InvalidArgument, "integration interval must be finite");
  }
  if (!y.allFinite()) throw Error(ErrorCode::NonFinite, "initial state is not finite");
  if (t1 == t0) return y;

  const double dir = t1 > t0 ? 1.0 : -1.0;
  const double span = std::abs(t1 - t0);
  Vec<N> f = rhs(y);
  double h = detail::initial_step<N>(rhs, y, f, span, cfg);
  double t = t0;
  bool last_rejected = false;
  std::size_t steps = 0;

  while (dir * (t1 - t) > 0.0) {
    if (++steps > cfg.max_steps) {
      throw Error(ErrorCode::StepLimit, "maximum number of integration steps exceeded");
    }
    h = std::min(h, cfg.max_step);
    bool final_step = false;
    if (h >= std::abs(t1 - t) * (1.0 - 1e-12)) {
      h = std::abs(t1 - t);
      final_step = true;
    }
    const double hs = dir * h;
    const Vec<N> k1 = f;
    const Vec<N> k2 = rhs(Vec<N>(y + hs * (a21 * k1)));
    const Vec<N> k3 = rhs(Vec<N>(y + hs * (a31 * k1 + a32 * k2)));
    const Vec<N> k4 = rhs(Vec<N>(y + hs * (a41 * k1 + a42 * k2 + a43 * k3)));
    const Vec<N> k5 = rhs(Vec<N>(y + hs * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4)));
    const Vec<N> k6 = rhs(Vec<N>(y + hs * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5)));
    const Vec<N> y_new = y + hs * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
    const Vec<N> k7 = rhs(y_new);
    const Vec<N> err = hs * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
    const double en = detail::error_norm<N>(err, y, y_new, cfg);

    if (!std::isfinite(en) || !y_new.allFinite()) {
      h *= 0.2;
      last_rejected = true;
      if (h < 1e-14 * std::max(1.0, std::abs(t))) {
        throw Error(ErrorCode::NonFinite, "state left the finite range during integration");
      }
      continue;
    }

    if (en <= 1.0) {
      const double t_new = final_step ? t1 : t + hs;
      on_step(DenseStep<N>{t, t_new, y, y_new, f, k7});
      t = t_new;
      y = y_new;
      f = k7;
      double fac = en == 0.0 ? 10.0 : std::clamp(0.9 * std::pow(en, -0.2), 0.2, 10.0);
      if (last_rejected) fac = std::min(fac, 1.0);
      h *= fac;
      last_rejected = false;
    } else {
      h *= std::clamp(0.9 * std::pow(en, -0.2), 0.2, 1.0);
      last_rejected = true;
      if (h < 1e-14 * std::max(1.0, std::abs(t))) {
        throw Error(ErrorCode::StepLimit, "step size underflow during integration");
      }
    }
  }
  return y;
}

template <int N, class Rhs>
Vec<N> integrate_adaptive(Rhs&& rhs, const Vec<N>& y, double t0, double t1,
                          const IntegratorConfig& cfg) {
  return integrate_adaptive<N>(std::forward<Rhs>(rhs), y, t0, t1, cfg,
                               [](const DenseStep<N>&) {});
}

struct Trajectory {
  std::vector<double> t;
  std::vector<State> x;

  std::size_t size() const { return t.size(); }
  bool empty() const { return t.empty(); }
  void push(double tt, const State& xx) {
    t.push_back(tt);
    x.push_back(xx);
  }
};

/// Output sampling: every accepted step (stride <= 0) or a fixed time stride
/// evaluated on the dense output.
struct SampleSpec {
  double stride = 0.0;
};

namespace detail {

template <int N>
struct Sampler {
  SampleSpec spec;
  double t_start = 0.0;
  std::size_t next = 1;

  template <class Emit>
  void operator()(const DenseStep<N>& s, Emit&& emit) {
    if (spec.stride <= 0.0) {
      emit(s.t1, s.y1);
      return;
    }
    const double dir = s.t1 >= s.t0 ? 1.0 : -1.0;
    for (;;) {
      const double tn = t_start + dir * spec.stride * static_cast<double>(next);
      if (dir * (tn - s.t1) > 1e-12 * std::max(1.0, std::abs(tn))) break;
      emit(tn, s(tn));
      ++next;
    }
  }
};

}  // namespace detail

/// State of the free system at time T.
inline State flow(const SystemParams& p, const State& x0, double T,
                  const IntegratorConfig& cfg = {}) {
  cfg.validate();
  return integrate_adaptive<3>([&p](const State& x) { return vector_field(p, x); }, x0, 0.0, T,
                               cfg);
}

/// Dense trajectory of the free system (initial point included).
inline Trajectory simulate(const SystemParams& p, const State& x0, double T,
                           const IntegratorConfig& cfg = {}, SampleSpec sampling = {}) {
  cfg.validate();
  Trajectory traj;
  traj.push(0.0, x0);
  detail::Sampler<3> sampler{sampling, 0.0, 1};
  integrate_adaptive<3>(
      [&p](const State& x) { return vector_field(p, x); }, x0, 0.0, T, cfg,
      [&](const DenseStep<3>& s) {
        sampler(s, [&](double tt, const State& xx) { traj.push(tt, xx); });
      });
  return traj;
}

struct VariationalResult {
  State x;
  Matrix3 monodromy;
};

/// Integrates the state together with D(flow), D(flow)(0) = I.
inline VariationalResult flow_with_variational(const SystemParams& p, const State& x0, double T,
                                               const IntegratorConfig& cfg = {}) {
  cfg.validate();
  Vec<12> y;
  y.head<3>() = x0;
  Eigen::Map<Matrix3>(y.data() + 3) = Matrix3::Identity();
  auto rhs = [&p](const Vec<12>& z) {
    Vec<12> dz;
    const State x = z.head<3>();
    dz.head<3>() = vector_field(p, x);
    Eigen::Map<Matrix3>(dz.data() + 3) = jacobian(p, x) * Eigen::Map<const Matrix3>(z.data() + 3);
    return dz;
  };
  const Vec<12> yT = integrate_adaptive<12>(rhs, y, 0.0, T, cfg);
  return {yT.head<3>(), Eigen::Map<const Matrix3>(yT.data() + 3)};
}

struct SensitivityResult {
  State x;
  Matrix3 monodromy;
  State dparam;  // d x(T) / d parameter at fixed T
};

/// Variational flow plus sensitivity with respect to one model constant.
inline SensitivityResult flow_with_sensitivity(const SystemParams& p, const State& x0, double T,
                                               Param which, const IntegratorConfig& cfg = {}) {
  cfg.validate();
  Vec<15> y = Vec<15>::Zero();
  y.head<3>() = x0;
  Eigen::Map<Matrix3>(y.data() + 3) = Matrix3::Identity();
  auto rhs = [&p, which](const Vec<15>& z) {
    Vec<15> dz;
    const State x = z.head<3>();
    const Matrix3 J = jacobian(p, x);
    dz.head<3>() = vector_field(p, x);
    Eigen::Map<Matrix3>(dz.data() + 3) = J * Eigen::Map<const Matrix3>(z.data() + 3);
    dz.tail<3>() = J * z.tail<3>() + param_derivative(p, x, which);
    return dz;
  };
  const Vec<15> yT = integrate_adaptive<15>(rhs, y, 0.0, T, cfg);
  return {yT.head<3>(), Eigen::Map<const Matrix3>(yT.data() + 3), yT.tail<3>()};
}

struct Transition {
  double t = 0.0;
  RegionId from = RegionId::Boundary;
  RegionId to = RegionId::Boundary;
};

using TransitionLog = std::vector<Transition>;

struct LoggedRun {
  Trajectory trajectory;
  TransitionLog transitions;
};

namespace detail {

// Region from the signs of the two boundary functions; zero values count as
// the side the orbit is heading into, resolved by the caller.
inline RegionId region_of(const SystemParams& p, const State& x) {
  return region_from_signs(ellipsoid_excess(p, x) > 0.0, plane_excess(p, x) > 0.0);
}

template <class G>
double bisect_crossing(const DenseStep<3>& s, G&& g, double time_tol) {
  double lo = s.t0, hi = s.t1;
  double glo = g(s.y0);
  while (std::abs(hi - lo) > time_tol) {
    const double mid = 0.5 * (lo + hi);
    const double gm = g(s(mid));
    if ((gm > 0.0) == (glo > 0.0)) {
      lo = mid;
      glo = gm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace detail

inline constexpr double kEventTimeTol = 1e-9;

/// Trajectory plus the ordered region transitions, each located by bisection
/// on the dense output. Events never stop the integration.
inline LoggedRun integrate_logged(const SystemParams& p, const State& x0, double T,
                                  const IntegratorConfig& cfg = {}, SampleSpec sampling = {}) {
  cfg.validate();
  LoggedRun run;
  run.trajectory.push(0.0, x0);
  detail::Sampler<3> sampler{sampling, 0.0, 1};
  bool outside = ellipsoid_excess(p, x0) > 0.0;
  bool above = plane_excess(p, x0) > 0.0;

  auto on_step = [&](const DenseStep<3>& s) {
    sampler(s, [&](double tt, const State& xx) { run.trajectory.push(tt, xx); });
    const bool outside_new = ellipsoid_excess(p, s.y1) > 0.0;
    const bool above_new = plane_excess(p, s.y1) > 0.0;
    struct Crossing {
      double t;
      bool ellipsoid;
    };
    std::vector<Crossing> found;
    if (outside_new != outside) {
      found.push_back({detail::bisect_crossing(
                           s, [&](const State& x) { return ellipsoid_excess(p, x); },
                           kEventTimeTol),
                       true});
    }
    if (above_new != above) {
      found.push_back({detail::bisect_crossing(
                           s, [&](const State& x) { return plane_excess(p, x); }, kEventTimeTol),
                       false});
    }
    std::sort(found.begin(), found.end(),
              [](const Crossing& l, const Crossing& r) { return l.t < r.t; });
    for (const auto& c : found) {
      const RegionId from = region_from_signs(outside, above);
      if (c.ellipsoid) outside = !outside;
      else above = !above;
      const RegionId to = region_from_signs(outside, above);
      run.transitions.push_back({c.t, from, to});
    }
  };
  integrate_adaptive<3>([&p](const State& x) { return vector_field(p, x); }, x0, 0.0, T, cfg,
                        on_step);
  return run;
}

}  // namespace plchaos
