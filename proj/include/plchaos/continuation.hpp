#pragma once

// Pseudo-arclength continuation of period-n points of the return map in one
// model constant, with multiplier-based bifurcation detection, branch
// switching, brute-force sweeps and attractor sampling.

#include <array>
#include <cmath>
#include <complex>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "plchaos/error.hpp"
#include "plchaos/geometry.hpp"
#include "plchaos/integrate.hpp"
#include "plchaos/parallel.hpp"
#include "plchaos/params.hpp"
#include "plchaos/poincare.hpp"

namespace plchaos {

using Vector3 = Eigen::Vector3d;

struct BranchPoint {
  double param = 0.0;
  SectionPoint point;
  Multipliers multipliers{};
  Stability stability = Stability::Unstable;
  double residual = 0.0;
};

struct Branch {
  int n = 1;
  Param param = Param::a;
  std::vector<BranchPoint> points;
};

enum class BifurcationKind { Fold, BranchPoint, PeriodDoubling, Unknown };

inline constexpr std::string_view to_string(BifurcationKind k) {
  switch (k) {
    case BifurcationKind::Fold: return "FOLD";
    case BifurcationKind::BranchPoint: return "BRANCH_POINT";
    case BifurcationKind::PeriodDoubling: return "PERIOD_DOUBLING";
    case BifurcationKind::Unknown: return "UNKNOWN";
  }
  return "?";
}

struct BifurcationEvent {
  BifurcationKind kind = BifurcationKind::Unknown;
  double param = 0.0;
  SectionPoint point;
  int n = 1;
  Multipliers multipliers{};
  double bracket_lo = 0.0;  // parameter values at the bracket ends
  double bracket_hi = 0.0;
  double test_lo = 0.0;     // test function at the bracket ends (opposite signs)
  double test_hi = 0.0;
  std::size_t after_index = 0;  // event lies between branch points [i, i+1]
};

struct StepControl {
  double h0 = 5e-3;
  double h_min = 1e-7;
  double h_max = 2e-2;
};

struct ContinuationSettings {
  Param param = Param::a;
  double p_min = 1.0;
  double p_max = 1.3;
  StepControl step;
  int direction = +1;  // initial sign of the parameter component of the tangent
  std::size_t max_points = 5000;
  double event_tol = 1e-5;  // bisection width in arclength (bounds the parameter width)
  NewtonOptions corrector{1e-10, 8, 0};
  IntegratorConfig integrator;
  int stop_after_period_doublings = 0;  // 0 = run to the end of the range
  bool stop_on_period_collapse = true;  // stop where a period-n branch turns into a lower-period one
};

struct ContinuationResult {
  Branch branch;
  std::vector<BifurcationEvent> events;
  std::optional<ErrorCode> status;  // StepUnderflow: branch is partial
};

namespace detail {

struct ContSample {
  Vector3 u;  // (x1, x3, parameter)
  Eigen::Matrix<double, 2, 3> Gu;
  Vector2 G;
  Matrix2 DPn;
  Vector3 tangent;  // oriented by continuity
  int sigma = 1;    // sign of det([Gu; tangent])
};

class Continuer {
 public:
  Continuer(const SystemParams& p0, int n, const ContinuationSettings& s)
      : p0_(p0), n_(n), s_(s) {}

  ContSample evaluate(const Vector3& u) const {
    const SystemParams p = p0_.with(s_.param, u[2]);
    const MapDerivatives d =
        iterate_derivatives(p, SectionPoint{u[0], u[1]}, n_, s_.param, s_.integrator);
    ContSample c;
    c.u = u;
    c.DPn = d.jacobian;
    c.G = d.image.vec() - u.head<2>();
    c.Gu.leftCols<2>() = d.jacobian - Matrix2::Identity();
    c.Gu.col(2) = d.dparam;
    return c;
  }

  static Vector3 raw_tangent(const ContSample& c) {
    const Vector3 r0 = c.Gu.row(0).transpose(), r1 = c.Gu.row(1).transpose();
    return r0.cross(r1);
  }

  static void orient(ContSample& c, const Vector3& previous) {
    const Vector3 raw = raw_tangent(c);
    const double nrm = raw.norm();
    c.tangent = nrm > 0.0 ? Vector3(raw / nrm) : previous;
    c.sigma = 1;
    if (c.tangent.dot(previous) < 0.0) {
      c.tangent = -c.tangent;
      c.sigma = -1;
    }
  }

  /// Newton on [G(v); (v - u0).t - ds] = 0.
  std::optional<ContSample> correct(const Vector3& u0, const Vector3& t, double ds) const {
    Vector3 v = u0 + ds * t;
    for (int it = 0; it <= s_.corrector.max_iter; ++it) {
      ContSample c;
      try {
        c = evaluate(v);
      } catch (const Error&) {
        return std::nullopt;
      }
      const double arc = (v - u0).dot(t) - ds;
      if (c.G.norm() < s_.corrector.tol && std::abs(arc) < 1e-12 * (1.0 + std::abs(ds))) {
        if (!SectionPoint{v[0], v[1]}.in_section()) return std::nullopt;
        if ((v - u0).norm() > 3.0 * std::abs(ds) + 1e-12) return std::nullopt;
        return c;
      }
      if (it == s_.corrector.max_iter) break;
      Eigen::Matrix3d A;
      A.topRows<2>() = c.Gu;
      A.row(2) = t.transpose();
      Vector3 rhs;
      rhs << c.G, arc;
      const Eigen::FullPivLU<Eigen::Matrix3d> lu(A);
      if (!lu.isInvertible()) return std::nullopt;
      v -= lu.solve(rhs);
      if (!v.allFinite()) return std::nullopt;
    }
    return std::nullopt;
  }

  int n() const { return n_; }
  const SystemParams& params() const { return p0_; }
  const ContinuationSettings& settings() const { return s_; }

 private:
  SystemParams p0_;
  int n_;
  ContinuationSettings s_;
};

inline double test_plus(const ContSample& c) { return (c.DPn - Matrix2::Identity()).determinant(); }
inline double test_minus(const ContSample& c) { return (c.DPn + Matrix2::Identity()).determinant(); }
inline bool complex_pair(const ContSample& c) {
  const double tr = c.DPn.trace();
  return 0.25 * tr * tr - c.DPn.determinant() < 0.0;
}
inline double test_torus(const ContSample& c) { return c.DPn.determinant() - 1.0; }

inline BranchPoint to_branch_point(const ContSample& c) {
  BranchPoint bp;
  bp.param = c.u[2];
  bp.point = SectionPoint{c.u[0], c.u[1]};
  bp.multipliers = eigenvalues2(c.DPn);
  bp.stability = classify_multipliers(bp.multipliers);
  bp.residual = c.G.norm();
  return bp;
}

// True when the point also has a proper divisor of n as a period.
inline bool collapsed_period(const SystemParams& p0, const ContSample& c, int n,
                             const ContinuationSettings& s) {
  if (n < 2) return false;
  const SystemParams p = p0.with(s.param, c.u[2]);
  const SectionPoint x{c.u[0], c.u[1]};
  SectionPoint y = x;
  for (int k = 1; k < n; ++k) {
    y = poincare_map(p, y, s.integrator);
    if (n % k == 0 && distance(x, y) < 1e-6 * (1.0 + x.vec().norm())) return true;
  }
  return false;
}

template <class Test>
BifurcationEvent locate(const Continuer& cont, const ContSample& left, const ContSample& right,
                        const Vector3& t_pred, double ds, BifurcationKind kind, Test&& test) {
  double lo = 0.0, hi = ds;
  ContSample s_lo = left, s_hi = right;
  double f_lo = test(left), f_hi = test(right);
  while (hi - lo > cont.settings().event_tol) {
    const double mid = 0.5 * (lo + hi);
    const auto c = cont.correct(left.u, t_pred, mid);
    if (!c) break;
    const double fm = test(*c);
    if ((fm > 0.0) == (f_lo > 0.0)) {
      lo = mid;
      s_lo = *c;
      f_lo = fm;
    } else {
      hi = mid;
      s_hi = *c;
      f_hi = fm;
    }
  }
  // Close to a branch point the bordered corrector may slide along the branch,
  // so the parameter bracket can stay wide. Where the parameter is monotone
  // across the event, finish by bisection in the parameter itself.
  const auto& st = cont.settings();
  if (kind != BifurcationKind::Fold) {
    const NewtonOptions nopt{st.corrector.tol, 30, 8};
    for (int it = 0; it < 60 && std::abs(s_hi.u[2] - s_lo.u[2]) > st.event_tol; ++it) {
      const double am = 0.5 * (s_lo.u[2] + s_hi.u[2]);
      const double w = (am - s_lo.u[2]) / (s_hi.u[2] - s_lo.u[2]);
      const SectionPoint guess = SectionPoint::from((1.0 - w) * s_lo.u.head<2>() + w * s_hi.u.head<2>());
      ContSample c;
      try {
        const PeriodicPoint pp =
            newton_periodic(cont.params().with(st.param, am), guess, cont.n(), st.integrator, nopt);
        c = cont.evaluate(Vector3(pp.point.x1, pp.point.x3, am));
      } catch (const Error&) {
        break;
      }
      const double fm = test(c);
      if ((fm > 0.0) == (f_lo > 0.0)) {
        s_lo = c;
        f_lo = fm;
      } else {
        s_hi = c;
        f_hi = fm;
      }
    }
  }
  const ContSample& best = std::abs(f_lo) <= std::abs(f_hi) ? s_lo : s_hi;
  BifurcationEvent ev;
  ev.kind = kind;
  ev.param = 0.5 * (s_lo.u[2] + s_hi.u[2]);
  ev.point = SectionPoint{best.u[0], best.u[1]};
  ev.n = cont.n();
  ev.multipliers = eigenvalues2(best.DPn);
  ev.bracket_lo = std::min(s_lo.u[2], s_hi.u[2]);
  ev.bracket_hi = std::max(s_lo.u[2], s_hi.u[2]);
  ev.test_lo = f_lo;
  ev.test_hi = f_hi;
  return ev;
}

}  // namespace detail

/// Continues the period-n point `start` (converged at p0) in settings.param.
inline ContinuationResult continue_branch(const SystemParams& p0, const PeriodicPoint& start,
                                          const ContinuationSettings& settings) {
  p0.validate();
  const detail::Continuer cont(p0, start.n, settings);
  ContinuationResult res;
  res.branch.n = start.n;
  res.branch.param = settings.param;

  const Vector3 u0(start.point.x1, start.point.x3, p0.get(settings.param));
  detail::ContSample cur;
  try {
    cur = cont.evaluate(u0);
  } catch (const Error& e) {
    throw Error(ErrorCode::StartNotConverged, e.what());
  }
  if (!(cur.G.norm() < 10.0 * settings.corrector.tol)) {
    throw Error(ErrorCode::StartNotConverged,
                "start point residual " + std::to_string(cur.G.norm()) + " exceeds tolerance");
  }
  {
    Vector3 raw = detail::Continuer::raw_tangent(cur);
    if (raw.norm() == 0.0) throw Error(ErrorCode::StartNotConverged, "degenerate start tangent");
    raw.normalize();
    const double sgn = raw[2] != 0.0 ? raw[2] : raw[0];
    cur.tangent = (sgn * settings.direction >= 0.0) ? raw : Vector3(-raw);
    cur.sigma = cur.tangent.dot(detail::Continuer::raw_tangent(cur)) >= 0.0 ? 1 : -1;
  }
  res.branch.points.push_back(detail::to_branch_point(cur));

  double ds = settings.step.h0;
  int successes = 0;
  int pd_count = 0;
  std::optional<Vector3> prev_u;

  while (res.branch.points.size() < settings.max_points) {
    const Vector3 t_pred =
        prev_u ? Vector3((cur.u - *prev_u).normalized()) : cur.tangent;
    auto next = cont.correct(cur.u, t_pred, ds);
    if (!next) {
      ds *= 0.5;
      successes = 0;
      if (ds < settings.step.h_min) {
        res.status = ErrorCode::StepUnderflow;
        break;
      }
      continue;
    }
    detail::Continuer::orient(*next, cur.tangent);
    if (settings.stop_on_period_collapse && detail::collapsed_period(p0, *next, start.n, settings)) break;

    // Bifurcation tests between cur and next.
    const std::size_t idx = res.branch.points.size() - 1;
    std::vector<BifurcationEvent> found;
    if ((detail::test_plus(cur) > 0.0) != (detail::test_plus(*next) > 0.0)) {
      BifurcationKind kind = BifurcationKind::Unknown;
      if ((cur.tangent[2] > 0.0) != (next->tangent[2] > 0.0)) kind = BifurcationKind::Fold;
      else if (cur.sigma != next->sigma) kind = BifurcationKind::BranchPoint;
      found.push_back(detail::locate(cont, cur, *next, t_pred, ds, kind, detail::test_plus));
    }
    if ((detail::test_minus(cur) > 0.0) != (detail::test_minus(*next) > 0.0)) {
      found.push_back(detail::locate(cont, cur, *next, t_pred, ds, BifurcationKind::PeriodDoubling,
                                     detail::test_minus));
    }
    if (detail::complex_pair(cur) && detail::complex_pair(*next) &&
        (detail::test_torus(cur) > 0.0) != (detail::test_torus(*next) > 0.0)) {
      found.push_back(detail::locate(cont, cur, *next, t_pred, ds, BifurcationKind::Unknown,
                                     detail::test_torus));
    }
    for (auto& ev : found) {
      ev.after_index = idx;
      if (ev.kind == BifurcationKind::PeriodDoubling) ++pd_count;
      res.events.push_back(ev);
    }

    prev_u = cur.u;
    cur = *next;
    res.branch.points.push_back(detail::to_branch_point(cur));
    if (++successes >= 3) ds = std::min(ds * 1.3, settings.step.h_max);

    if (cur.u[2] < settings.p_min || cur.u[2] > settings.p_max) break;
    if (settings.stop_after_period_doublings > 0 && pd_count >= settings.stop_after_period_doublings)
      break;
  }
  return res;
}

struct BranchSeed {
  double param = 0.0;
  PeriodicPoint point;
};

struct SwitchOptions {
  double delta = 1e-3;
  std::vector<double> amplitudes{1e-2, 2e-2, 4e-2, 8e-2};
  double kernel_tol = 5e-2;
  double distinct_tol = 1e-4;
};

/// New seeds emanating from a branch point (two symmetric partners) or a
/// period doubling (one period-2n point).
inline std::vector<BranchSeed> switch_branch(const BifurcationEvent& event, const SystemParams& p0,
                                             const ContinuationSettings& settings,
                                             const SwitchOptions& opt = {}) {
  if (event.kind != BifurcationKind::BranchPoint && event.kind != BifurcationKind::PeriodDoubling) {
    throw Error(ErrorCode::InvalidArgument, "branch switching needs a BRANCH_POINT or PERIOD_DOUBLING event");
  }
  const bool doubling = event.kind == BifurcationKind::PeriodDoubling;
  const double target = doubling ? -1.0 : 1.0;
  const SystemParams pe = p0.with(settings.param, event.param);
  const Matrix2 J =
      iterate_derivatives(pe, event.point, event.n, settings.param, settings.integrator).jacobian;
  const Multipliers mu = eigenvalues2(J);
  int critical = 0;
  double mu_c = 0.0;
  for (const auto& m : mu) {
    if (std::abs(m.imag()) < 1e-12 && std::abs(m.real() - target) < opt.kernel_tol) {
      ++critical;
      mu_c = m.real();
    }
  }
  if (critical != 1) {
    throw Error(ErrorCode::NoConvergence,
                "critical eigenspace has dimension " + std::to_string(critical) + ", expected 1");
  }
  const Matrix2 K = J - mu_c * Matrix2::Identity();
  Vector2 v = K.row(0).norm() >= K.row(1).norm() ? Vector2(-K(0, 1), K(0, 0))
                                                  : Vector2(-K(1, 1), K(1, 0));
  v.normalize();

  const int new_n = doubling ? 2 * event.n : event.n;
  const NewtonOptions nopt{settings.corrector.tol, 30, 8};
  for (double side : {+1.0, -1.0}) {
    const double pv = event.param + side * opt.delta;
    const SystemParams pt = p0.with(settings.param, pv);
    SectionPoint parent = event.point;
    try {
      parent = newton_periodic(pt, event.point, event.n, settings.integrator, nopt).point;
    } catch (const Error&) {
    }
    std::vector<BranchSeed> found;
    for (double sign : {+1.0, -1.0}) {
      for (double amp : opt.amplitudes) {
        const SectionPoint guess = SectionPoint::from(event.point.vec() + sign * amp * v);
        if (!guess.in_section()) continue;
        PeriodicPoint pp;
        try {
          pp = newton_periodic(pt, guess, new_n, settings.integrator, nopt);
        } catch (const Error&) {
          continue;
        }
        if (distance(pp.point, parent) < opt.distinct_tol) continue;
        bool duplicate = false;
        for (const auto& f : found) {
          if (distance(f.point.point, pp.point) < opt.distinct_tol) duplicate = true;
          if (doubling) {
            // The other iterate of an already found period-2n orbit.
            SectionPoint img = f.point.point;
            for (int k = 0; k < event.n; ++k) img = poincare_map(pt, img, settings.integrator);
            if (distance(img, pp.point) < opt.distinct_tol) duplicate = true;
          }
        }
        if (doubling) {
          SectionPoint img = pp.point;
          for (int k = 0; k < event.n; ++k) img = poincare_map(pt, img, settings.integrator);
          if (distance(img, pp.point) < opt.distinct_tol) continue;  // collapsed onto period n
        }
        if (!duplicate) found.push_back({pv, pp});
        break;
      }
    }
    if (!found.empty()) return found;
  }
  throw Error(ErrorCode::NoConvergence, "no emanating branch found near parameter " +
                                            std::to_string(event.param));
}

struct CascadeOptions {
  int max_levels = 4;           // period doublings to follow after the first one
  double delta_fraction = 0.1;  // parameter offset for switching, relative to the last PD gap
  double window = 2.0;          // continuation window, relative to the last PD gap
};

/// Follows a period-doubling cascade: switches onto the doubled branch at each
/// PD event and continues it until its own PD. Returns the PD events in order,
/// starting with `first`.
inline std::vector<BifurcationEvent> follow_cascade(const SystemParams& p0,
                                                    const BifurcationEvent& first,
                                                    const ContinuationSettings& settings,
                                                    const CascadeOptions& opt = {}) {
  if (first.kind != BifurcationKind::PeriodDoubling) {
    throw Error(ErrorCode::InvalidArgument, "cascade must start at a PERIOD_DOUBLING event");
  }
  std::vector<BifurcationEvent> events{first};
  double gap = 0.0;
  for (int level = 0; level < opt.max_levels; ++level) {
    const BifurcationEvent& pd = events.back();
    SwitchOptions sw;
    if (gap > 0.0) sw.delta = std::min(sw.delta, opt.delta_fraction * gap);
    std::vector<BranchSeed> seeds;
    try {
      seeds = switch_branch(pd, p0, settings, sw);
    } catch (const Error&) {
      break;
    }
    const BranchSeed& seed = seeds.front();
    ContinuationSettings s = settings;
    s.direction = seed.param > pd.param ? +1 : -1;
    s.stop_after_period_doublings = 1;
    if (gap > 0.0) {
      const double w = opt.window * gap;
      s.p_min = std::max(settings.p_min, pd.param - w);
      s.p_max = std::min(settings.p_max, pd.param + w);
      s.step.h0 = std::min(s.step.h0, 0.25 * gap);
      s.step.h_max = std::min(s.step.h_max, 0.5 * gap);
    }
    const ContinuationResult r = continue_branch(p0.with(settings.param, seed.param), seed.point, s);
    const BifurcationEvent* next = nullptr;
    for (const auto& e : r.events) {
      if (e.kind == BifurcationKind::PeriodDoubling) {
        next = &e;
        break;
      }
    }
    if (next == nullptr) break;
    gap = std::abs(next->param - pd.param);
    events.push_back(*next);
  }
  return events;
}

struct DiagramBranch {
  ContinuationResult result;
  int parent_event = -1;  // index into Diagram::events that spawned it (-1: start branch)
  int direction = +1;
};

struct Diagram {
  std::vector<DiagramBranch> branches;
  std::vector<BifurcationEvent> events;
  std::vector<int> event_branch;  // branch index on which each event was found
};

namespace detail {
inline bool same_event(const BifurcationEvent& x, const BifurcationEvent& y) {
  return x.kind == y.kind && x.n == y.n && std::abs(x.param - y.param) < 1e-4 &&
         distance(x.point, y.point) < 1e-3;
}
}  // namespace detail

/// Bifurcation diagram: continues `start` in both directions, then switches at
/// every new branch point and period doubling up to `max_switches` levels deep
/// and continues each emanating branch in both directions.
inline Diagram compute_diagram(const SystemParams& p0, const PeriodicPoint& start,
                               const ContinuationSettings& settings, int max_switches = 2) {
  Diagram d;
  struct Job {
    SystemParams p;
    PeriodicPoint seed;
    int parent;
    int depth;
  };
  std::vector<Job> jobs{{p0, start, -1, 0}};
  for (std::size_t j = 0; j < jobs.size(); ++j) {
    const Job job = jobs[j];
    for (int dir : {+1, -1}) {
      ContinuationSettings s = settings;
      s.direction = dir;
      DiagramBranch b{continue_branch(job.p, job.seed, s), job.parent, dir};
      const int bi = static_cast<int>(d.branches.size());
      for (const auto& ev : b.result.events) {
        bool known = false;
        for (const auto& e : d.events) known = known || detail::same_event(e, ev);
        if (known) continue;
        d.events.push_back(ev);
        d.event_branch.push_back(bi);
        if (job.depth >= max_switches) continue;
        if (ev.kind != BifurcationKind::BranchPoint && ev.kind != BifurcationKind::PeriodDoubling) continue;
        try {
          const auto seeds = switch_branch(ev, p0, settings);
          jobs.push_back({p0.with(settings.param, seeds.front().param), seeds.front().point,
                          static_cast<int>(d.events.size()) - 1, job.depth + 1});
        } catch (const Error&) {
        }
      }
      d.branches.push_back(std::move(b));
    }
  }
  return d;
}

/// All distinct period-n points on the diagram's branches at one parameter
/// value: brackets along each branch are interpolated and Newton-refined.
inline std::vector<PeriodicPoint> points_at(const Diagram& d, int n, double value,
                                            const SystemParams& p0,
                                            const ContinuationSettings& settings) {
  const SystemParams p = p0.with(settings.param, value);
  std::vector<PeriodicPoint> out;
  for (const auto& b : d.branches) {
    if (b.result.branch.n != n) continue;
    const auto& pts = b.result.branch.points;
    for (std::size_t i = 1; i < pts.size(); ++i) {
      const double p_lo = pts[i - 1].param, p_hi = pts[i].param;
      if ((p_lo - value) * (p_hi - value) > 0.0 || p_lo == p_hi) continue;
      const double w = (value - p_lo) / (p_hi - p_lo);
      const SectionPoint guess =
          SectionPoint::from((1.0 - w) * pts[i - 1].point.vec() + w * pts[i].point.vec());
      try {
        const PeriodicPoint pp = newton_periodic(p, guess, n, settings.integrator);
        bool dup = false;
        for (const auto& q : out) dup = dup || distance(q.point, pp.point) < 1e-6;
        if (!dup) out.push_back(pp);
      } catch (const Error&) {
      }
    }
  }
  return out;
}

struct SweepGrid {
  double lo = 1.197;
  double hi = 1.205;
  std::size_t steps = 1000;

  double at(std::size_t i) const {
    return lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(steps);
  }
  std::size_t size() const { return steps + 1; }
};

struct SweepDiagram {
  SectionPoint seed;
  std::vector<double> params;
  std::vector<std::vector<double>> x1;  // retained x1-coordinates per grid value
  SectionPoint final_point;
};

struct SweepOptions {
  std::size_t iterates = 600;
  std::size_t retained = 100;
  Param param = Param::a;
  IntegratorConfig integrator;
};

/// Brute-force bifurcation diagram: for each grid value iterate N times from
/// the last point of the previous grid value and keep the last m x1-values.
inline SweepDiagram sweep_one(const SystemParams& p_template, const SectionPoint& seed,
                              const SweepGrid& grid, const SweepOptions& opt = {}) {
  if (!seed.in_section()) throw Error(ErrorCode::InvalidArgument, "sweep seed is not on the section");
  if (opt.retained > opt.iterates) throw Error(ErrorCode::InvalidArgument, "retained > iterates");
  SweepDiagram out;
  out.seed = seed;
  SectionPoint s = seed;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double pv = grid.at(i);
    const SystemParams p = p_template.with(opt.param, pv);
    std::vector<double> kept;
    kept.reserve(opt.retained);
    try {
      for (std::size_t k = 0; k < opt.iterates; ++k) {
        s = poincare_map(p, s, opt.integrator);
        if (k + opt.retained >= opt.iterates) kept.push_back(s.x1);
      }
    } catch (const Error& e) {
      throw Error(e.code(), std::string(e.what()) + " at " + std::string(to_string(opt.param)) +
                                "=" + std::to_string(pv));
    }
    out.params.push_back(pv);
    out.x1.push_back(std::move(kept));
  }
  out.final_point = s;
  return out;
}

inline std::vector<SweepDiagram> sweep(const SystemParams& p_template,
                                       const std::vector<SectionPoint>& seeds,
                                       const SweepGrid& grid, const SweepOptions& opt = {}) {
  p_template.validate();
  std::vector<SweepDiagram> out(seeds.size());
  parallel_for(seeds.size(), [&](std::size_t i) { out[i] = sweep_one(p_template, seeds[i], grid, opt); });
  return out;
}

/// Successive ratios (a_k - a_{k-1}) / (a_{k+1} - a_k) of period-doubling abscissas.
inline std::vector<double> estimate_feigenbaum(const std::vector<double>& pd_params) {
  if (pd_params.size() < 3) {
    throw Error(ErrorCode::TooFewEvents, "need at least three period-doubling values");
  }
  std::vector<double> ratios;
  for (std::size_t k = 1; k + 1 < pd_params.size(); ++k) {
    ratios.push_back((pd_params[k] - pd_params[k - 1]) / (pd_params[k + 1] - pd_params[k]));
  }
  return ratios;
}

struct AttractorSample {
  double param = 0.0;
  std::size_t transient = 0;
  std::vector<SectionPoint> points;
};

inline AttractorSample capture_attractor(const SystemParams& p, const SectionPoint& seed,
                                         std::size_t transient = 500, std::size_t keep = 5000,
                                         const IntegratorConfig& cfg = {},
                                         Param param = Param::a) {
  p.validate();
  AttractorSample out;
  out.param = p.get(param);
  out.transient = transient;
  SectionPoint s = seed;
  for (std::size_t i = 0; i < transient; ++i) s = poincare_map(p, s, cfg);
  out.points = iterate_map(p, s, keep, cfg);
  return out;
}

}  // namespace plchaos
