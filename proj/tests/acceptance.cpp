// Acceptance checks: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include <chrono>
#include <cmath>
#include <complex>
#include <cstdio>
#include <functional>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "plchaos/plchaos.hpp"

using namespace plchaos;

namespace {

const SystemParams kFig = SystemParams::from(1, 1, 1, 0.25, 3, 1);
const std::vector<SectionPoint> kSeeds{{2.633, 0.00129}, {3.203, 0.03657}};

struct Outcome {
  bool pass = false;
  std::string detail;
};

int failures = 0;

void report(int id, const std::string& name, double budget_s, const std::function<Outcome()>& body) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (secs > budget_s) {
    o.pass = false;
    o.detail += " [over budget " + std::to_string(budget_s) + " s]";
  }
  if (!o.pass) ++failures;
  std::printf("[%s] %2d %s: %s (%.2f s)\n", o.pass ? "PASS" : "FAIL", id, name.c_str(), o.detail.c_str(), secs);
  std::fflush(stdout);
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

double nearest_mismatch(const std::array<std::complex<double>, 3>& a,
                        const std::array<std::complex<double>, 3>& b) {
  double worst = 0.0;
  for (const auto& x : a) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& y : b) best = std::min(best, std::abs(x - y));
    worst = std::max(worst, best);
  }
  return worst;
}

// Shared between criteria 3, 6 and 12.
Diagram g_diagram;
bool g_have_diagram = false;
std::vector<AttractorSample> g_attractors;

ContinuationSettings fig_settings() {
  ContinuationSettings s;
  s.p_min = 1.0;
  s.p_max = 1.3;
  return s;
}

const BifurcationEvent* find_event(const Diagram& d, BifurcationKind kind, int n, double value) {
  const BifurcationEvent* best = nullptr;
  for (const auto& e : d.events) {
    if (e.kind != kind || e.n != n) continue;
    if (best == nullptr || std::abs(e.param - value) < std::abs(best->param - value)) best = &e;
  }
  return best;
}

Outcome eigenvalues() {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> U(0.1, 5.0);
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    const SystemParams p = SystemParams::from(U(rng), U(rng), U(rng), U(rng), U(rng), U(rng));
    const auto eq = analyze_equilibria(p);
    using C = std::complex<double>;
    const double h2 = p.h * p.h, r2 = p.r * p.r;
    const std::array<C, 3> o{C(-h2, p.omega), C(-h2, -p.omega), C(r2, 0)};
    const std::array<C, 3> z{C(r2 / p.c - h2, p.omega), C(r2 / p.c - h2, -p.omega), C(-2 * r2, 0)};
    worst = std::max({worst, nearest_mismatch(o, eq.origin.eigenvalues),
                      nearest_mismatch(z, eq.upper.eigenvalues),
                      nearest_mismatch(o, numeric_eigenvalues(p, State::Zero())),
                      nearest_mismatch(z, numeric_eigenvalues(p, eq.upper.location))});
  }
  return {worst < 1e-10, "max eigenvalue mismatch " + fmt("%.3g", worst)};
}

Outcome analytic() {
  const State x0(std::sqrt(8.9375), 0.0, 0.25);
  const double err = (flow(kFig, x0, 2.0 * M_PI) - x0).norm();
  return {err < 1e-7, "return error " + fmt("%.3g", err)};
}

Outcome bifurcations() {
  const PeriodicPoint start = newton_periodic(kFig, {2.99, 0.25}, 1);
  g_diagram = compute_diagram(kFig, start, fig_settings(), 2);
  g_have_diagram = true;
  struct Want {
    BifurcationKind kind;
    int n;
    double value;
  };
  const std::vector<Want> wants{{BifurcationKind::BranchPoint, 1, 1.196},
                                {BifurcationKind::Fold, 1, 1.233},
                                {BifurcationKind::Fold, 1, 1.086},
                                {BifurcationKind::PeriodDoubling, 1, 1.175},
                                {BifurcationKind::PeriodDoubling, 2, 1.197}};
  bool ok = true;
  std::string detail;
  for (const auto& w : wants) {
    const BifurcationEvent* e = find_event(g_diagram, w.kind, w.n, w.value);
    const bool hit = e != nullptr && std::abs(e->param - w.value) <= 0.005;
    ok = ok && hit;
    detail += std::string(to_string(w.kind)) + "(n=" + std::to_string(w.n) + ")=" +
              (e ? fmt("%.6f", e->param) : std::string("missing")) + " ";
  }
  return {ok, detail};
}

Outcome sweep_check() {
  const auto diagrams = sweep(kFig, kSeeds, SweepGrid{1.197, 1.205, 1000});
  bool ok = true;
  std::string detail;
  for (std::size_t s = 0; s < diagrams.size(); ++s) {
    const auto& d = diagrams[s];
    const std::size_t left = distinct_count(d.x1.front());
    const std::size_t right = distinct_count(d.x1.back());
    double doubling_at = std::numeric_limits<double>::quiet_NaN();
    // The two members of a period-2 orbit split at slightly different a, so a single
    // grid point with 3 clusters may sit between the 2 and the 4.
    std::size_t prev = 0;
    for (std::size_t i = 0; i < d.x1.size(); ++i) {
      const std::size_t c = distinct_count(d.x1[i]);
      if (c == 4 && (prev == 2 || prev == 3)) {
        doubling_at = d.params[i];
        break;
      }
      if (c == 2 || (c == 3 && prev >= 2)) {
        prev = c;
      } else {
        prev = 0;
      }
    }
    ok = ok && left == 2 && right > 50 && !std::isnan(doubling_at);
    detail += "seed" + std::to_string(s) + ": left=" + std::to_string(left) + " right=" + std::to_string(right) +
              " 2->4 at a=" + fmt("%.6f", doubling_at) + "; ";
  }
  return {ok, detail};
}

Outcome coexistence() {
  const SystemParams p = kFig.with(Param::a, 1.205);
  g_attractors.clear();
  for (const auto& s : kSeeds) g_attractors.push_back(capture_attractor(p, s));
  const double d = hausdorff(g_attractors[0].points, g_attractors[1].points);
  return {d > 0.05, "Hausdorff(A, B) = " + fmt("%.4f", d)};
}

Outcome manifolds() {
  if (!g_have_diagram || g_attractors.size() != 2) return {false, "needs criteria 3 and 5"};
  const SystemParams p = kFig.with(Param::a, 1.205);
  const auto fixed = points_at(g_diagram, 1, 1.205, kFig, fig_settings());
  bool ok = true;
  std::string detail;
  for (std::size_t k = 0; k < g_attractors.size(); ++k) {
    const PeriodicPoint* best = nullptr;
    double best_d = std::numeric_limits<double>::infinity();
    for (const auto& fp : fixed) {
      if (fp.stability != Stability::Saddle) continue;
      const double dist = directed_hausdorff({fp.point}, g_attractors[k].points);
      if (dist < best_d) best_d = dist, best = &fp;
    }
    if (best == nullptr) return {false, "no saddle fixed point on the diagram at a=1.205"};
    const auto sides = unstable_manifold_both(p, *best);
    // Both sides joined through the saddle.
    std::vector<SectionPoint> line(sides[0].points.rbegin(), sides[0].points.rend());
    line.push_back(best->point);
    line.insert(line.end(), sides[1].points.begin(), sides[1].points.end());
    const double d = directed_hausdorff_to_polyline(g_attractors[k].points, line);
    ok = ok && d < 0.02;
    detail += "attractor" + std::to_string(k) + " saddle (" + fmt("%.5f", best->point.x1) + ", " +
              fmt("%.5f", best->point.x3) + ") d=" + fmt("%.4f", d) + "; ";
  }
  return {ok, detail};
}

Outcome boundedness() {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> U(-5.0, 5.0);
  std::size_t entries = 0;
  double worst_ratio = 0.0, worst_entry = 0.0;
  for (int i = 0; i < 100; ++i) {
    const State x0(U(rng), U(rng), U(rng));
    const GlobalBound gb = global_bound(kFig, x0);
    const LoggedRun run = integrate_logged(kFig, x0, 200.0);
    for (const auto& x : run.trajectory.x) {
      worst_ratio = std::max({worst_ratio, std::hypot(x[0], x[1]) / gb.rho_max, std::abs(x[2]) / gb.x3_max});
    }
    const auto& tr = run.transitions;
    for (std::size_t k = 0; k < tr.size(); ++k) {
      if (tr[k].to != RegionId::R1) continue;
      const State xe = flow(kFig, x0, tr[k].t);
      if (!(xe[2] > kFig.h * (1.0 + 1e-6))) continue;
      // Follow region 1 until it is left; check the plane crossing.
      const std::size_t next = k + 1;
      if (next >= tr.size() || tr[next].to != RegionId::R2) continue;
      const EscapeBound eb = escape_bound_from(kFig, std::hypot(xe[0], xe[1]), xe[2]);
      const State xc = flow(kFig, x0, tr[next].t);
      worst_entry = std::max(worst_entry, std::hypot(xc[0], xc[1]) / eb.rho0);
      ++entries;
    }
  }
  const bool ok = worst_ratio <= 1.0 + 1e-9 && worst_entry <= 1.0 + 1e-9 && entries > 0;
  return {ok, "max state/bound " + fmt("%.4f", worst_ratio) + ", max crossing rho/rho0 " + fmt("%.4f", worst_entry) +
                  " over " + std::to_string(entries) + " region-1 passages"};
}

Outcome invariants() {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> U(-4.0, 4.0), P(0.2, 3.0);
  std::vector<std::string> broken;
  auto check = [&](bool cond, const char* what) {
    if (!cond) broken.emplace_back(what);
  };

  check(vector_field(kFig, State::Zero()) == State::Zero(), "f(0)=0");

  bool pl = true, flip = true, rot = true;
  for (int i = 0; i < 10000; ++i) {
    const SystemParams p = SystemParams::from(P(rng), P(rng), P(rng), P(rng), P(rng), P(rng));
    const State x(U(rng), U(rng), U(rng));
    const State f = vector_field(p, x);
    pl = pl && (free_plform(p).matrix(x) * x - f).norm() <= 1e-12 * std::max(1.0, f.norm());
    const State fs = vector_field(p, State(x[0], x[1], -x[2]));
    flip = flip && fs == State(f[0], f[1], -f[2]);
    const State fr = vector_field(p, State(-x[0], -x[1], x[2]));
    rot = rot && fr == State(-f[0], -f[1], f[2]);
  }
  check(pl, "PL reconstruction");
  check(flip, "x3-flip equivariance");
  check(rot, "pi-rotation equivariance");

  const IntegratorConfig cfg;
  bool plane = true, axis = true, theta = true;
  for (int i = 0; i < 10; ++i) {
    for (const auto& x : simulate(kFig, State(U(rng), U(rng), 0.0), 50.0).x)
      plane = plane && std::abs(x[2]) < 10.0 * cfg.abs_tol;
    for (const auto& x : simulate(kFig, State(0.0, 0.0, U(rng)), 50.0).x)
      axis = axis && std::abs(x[0]) < 10.0 * cfg.abs_tol && std::abs(x[1]) < 10.0 * cfg.abs_tol;
    const State x0(U(rng), U(rng), U(rng));
    const Trajectory tr = simulate(kFig, x0, 30.0);
    double prev = std::atan2(x0[1], x0[0]), unwrapped = prev;
    for (std::size_t k = 1; k < tr.size(); ++k) {
      const double th = std::atan2(tr.x[k][1], tr.x[k][0]);
      unwrapped += std::remainder(th - prev, 2.0 * M_PI);
      prev = th;
      theta = theta && std::abs(unwrapped - std::atan2(x0[1], x0[0]) - kFig.omega * tr.t[k]) < 1e-7;
    }
  }
  check(plane, "plane x3=0 invariance");
  check(axis, "x3-axis invariance");
  check(theta, "theta linearity");

  bool inside = true;
  std::uniform_real_distribution<double> A(1.0, 1.25), X1(0.05, 4.0), X3(1e-3, 3.5);
  for (int i = 0; i < 1000; ++i) {
    inside = inside && poincare_map(kFig.with(Param::a, A(rng)), {X1(rng), X3(rng)}).in_section();
  }
  check(inside, "P(Sigma) in Sigma");

  double worst_fd = 0.0;
  const SystemParams pc = kFig.with(Param::a, 1.205);
  std::uniform_real_distribution<double> S1(0.5, 3.5), S3(0.05, 3.0);
  for (int i = 0; i < 20; ++i) {
    const SectionPoint s{S1(rng), S3(rng)};
    const Matrix2 J = poincare_jacobian(pc, s);
    Matrix2 F;
    const double h = 1e-6;
    F.col(0) = (poincare_map(pc, {s.x1 + h, s.x3}).vec() - poincare_map(pc, {s.x1 - h, s.x3}).vec()) / (2 * h);
    F.col(1) = (poincare_map(pc, {s.x1, s.x3 + h}).vec() - poincare_map(pc, {s.x1, s.x3 - h}).vec()) / (2 * h);
    worst_fd = std::max(worst_fd, (J - F).norm() / J.norm());
  }
  check(worst_fd < 1e-4, "variational vs finite-difference Jacobian");

  std::string detail = broken.empty() ? "all hold" : "broken:";
  for (const auto& b : broken) detail += " " + b + ";";
  detail += " (Jacobian rel. error " + fmt("%.2g", worst_fd) + ")";
  return {broken.empty(), detail};
}

Outcome control() {
  const SystemParams p = SystemParams::from(5, 1, 0.1, 1.5, 10, 5, 1.1);
  SystemParams free = p;
  free.K = 0.0;
  const Trajectory warm = simulate(free, State(1.0, 1.0, 1.0), 200.0);
  State x0 = warm.x.back();
  double best = -1.0;
  for (std::size_t i = 0; i < warm.size(); ++i)
    if (warm.t[i] >= 100.0 && std::abs(warm.x[i][2]) > best) best = std::abs(warm.x[i][2]), x0 = warm.x[i];
  const ControlledRun run = run_controlled(p, x0, 50.0);
  double lmax = -std::numeric_limits<double>::infinity();
  for (double l : run.lambda3cl) lmax = std::max(lmax, l);
  const double end = run.trajectory.x.back().norm();
  return {end < 1e-3 && lmax <= -10.0,
          "|x0|=" + fmt("%.3f", x0.norm()) + " |x(50)|=" + fmt("%.3g", end) + " max lambda3cl=" + fmt("%.4f", lmax)};
}

Outcome synchronization() {
  const SystemParams p = SystemParams::from(5, 1, 0.1, 4, 10, 50);
  std::mt19937_64 rng(10);
  std::uniform_real_distribution<double> U(-5.0, 5.0);
  const State xm0 = flow(p, State(U(rng), U(rng), U(rng)), 10.0);
  const State xs0 = xm0 + State(U(rng), U(rng), U(rng));
  const SyncRun run = run_sync(p, xm0, xs0, 5.0, {}, {0.01});
  const double r0 = std::hypot(run.error[0][0], run.error[0][1]);
  double worst = 0.0;
  for (std::size_t i = 0; i < run.t.size(); ++i) {
    const double expected = r0 * std::exp(-p.h * p.h * run.t[i]);
    worst = std::max(worst, std::abs(std::hypot(run.error[i][0], run.error[i][1]) - expected) / expected);
  }
  const double end = run.error.back().norm();
  return {end < 1e-4 && worst < 1e-5, "|e(5)|=" + fmt("%.3g", end) + " envelope rel. error " + fmt("%.3g", worst)};
}

Outcome chaos() {
  const SystemParams pc = kFig.with(Param::a, 1.205);
  const SectionPoint s = iterate_map(pc, kSeeds[0], 200).back();
  const double chaotic = lyapunov(pc, s.embed(), 2000.0).exponent;
  const SystemParams ps = kFig.with(Param::a, 1.1);
  const PeriodicPoint stable = newton_periodic(ps, {2.99, 0.25}, 1);
  const double regular = lyapunov(ps, stable.point.embed(), 2000.0).exponent;
  return {chaotic > 0.0 && regular < 0.0 && stable.stability == Stability::Stable,
          "a=1.205: " + fmt("%.4f", chaotic) + ", a=1.1: " + fmt("%.4f", regular)};
}

Outcome feigenbaum() {
  if (!g_have_diagram) return {false, "needs criterion 3"};
  const BifurcationEvent* pd = find_event(g_diagram, BifurcationKind::PeriodDoubling, 1, 1.175);
  if (pd == nullptr) return {false, "no period doubling on the diagram"};
  const auto cascade = follow_cascade(kFig, *pd, fig_settings());
  std::vector<double> a;
  std::string detail = "PDs";
  for (const auto& e : cascade) {
    a.push_back(e.param);
    detail += " " + fmt("%.8f", e.param);
  }
  if (a.size() < 3) return {false, detail + " (fewer than three)"};
  const auto ratios = estimate_feigenbaum(a);
  detail += "; ratios";
  for (double r : ratios) detail += " " + fmt("%.3f", r);
  const double rel = std::abs(ratios.back() - 4.669) / 4.669;
  return {rel < 0.35, detail + "; last off by " + fmt("%.1f", 100.0 * rel) + "%"};
}

}  // namespace

int main() {
  std::printf("plchaos %s acceptance\n", kVersion);
  report(1, "closed-form eigenvalues", 1.0, eigenvalues);
  report(2, "analytic periodic orbit", 1.0, analytic);
  const auto t3 = std::chrono::steady_clock::now();
  report(3, "bifurcation abscissas", 120.0, bifurcations);
  const double spent3 = std::chrono::duration<double>(std::chrono::steady_clock::now() - t3).count();
  report(4, "sweep reproduction", 300.0, sweep_check);
  report(5, "coexisting attractors", 60.0, coexistence);
  report(6, "manifold-attractor resemblance", 120.0, manifolds);
  report(7, "boundedness", 60.0, boundedness);
  report(8, "structural invariants", 30.0, invariants);
  report(9, "control", 5.0, control);
  report(10, "synchronization", 5.0, synchronization);
  report(11, "chaos indicator", 60.0, chaos);
  // Shares the budget of criterion 3.
  report(12, "Feigenbaum ratio", std::max(0.0, 120.0 - spent3), feigenbaum);
  std::printf("%s: %d of 12 criteria failed\n", failures == 0 ? "OK" : "FAILED", failures);
  return failures == 0 ? 0 : 1;
}
