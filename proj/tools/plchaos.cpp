// plchaos: command-line front end for the PL chaotic system toolkit.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "plchaos/plchaos.hpp"

using namespace plchaos;
using json = nlohmann::ordered_json;

namespace {

constexpr int kExitDomain = 1;
constexpr int kExitUsage = 2;

struct Common {
  std::vector<double> params{1.0, 1.0, 1.0, 0.25, 3.0, 1.0};
  double K = 0.0;
  double rtol = 1e-10;
  double atol = 1e-12;
  std::string out;
};

SystemParams make_params(const Common& c) {
  if (c.params.size() != 6) throw Error(ErrorCode::InvalidArgument, "--params needs six values a,b,c,h,r,omega");
  SystemParams p = SystemParams::from(c.params[0], c.params[1], c.params[2], c.params[3], c.params[4],
                                      c.params[5], c.K);
  p.validate();
  return p;
}

IntegratorConfig make_cfg(const Common& c) {
  IntegratorConfig cfg;
  cfg.rel_tol = c.rtol;
  cfg.abs_tol = c.atol;
  cfg.validate();
  return cfg;
}

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::vector<double> parse_list(const std::string& s, char sep) {
  std::vector<double> v;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) {
    try {
      std::size_t used = 0;
      v.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw Error(ErrorCode::InvalidArgument, "cannot parse number '" + item + "' in '" + s + "'");
    }
  }
  return v;
}

State parse_state(const std::string& s) {
  const auto v = parse_list(s, ',');
  if (v.size() != 3) throw Error(ErrorCode::InvalidArgument, "expected x1,x2,x3 but got '" + s + "'");
  return {v[0], v[1], v[2]};
}

SectionPoint parse_section(const std::string& s) {
  const auto v = parse_list(s, ',');
  if (v.size() != 2) throw Error(ErrorCode::InvalidArgument, "expected x1,x3 but got '" + s + "'");
  const SectionPoint sp{v[0], v[1]};
  if (!sp.in_section()) throw Error(ErrorCode::InvalidArgument, "section point needs x1 > 0 and x3 > 0");
  return sp;
}

std::vector<SectionPoint> parse_sections(const std::string& s) {
  std::vector<SectionPoint> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ';')) out.push_back(parse_section(item));
  return out;
}

// Output file (binary, so line endings stay LF) or stdout.
class Sink {
 public:
  explicit Sink(const std::string& path) {
    if (!path.empty() && path != "-") {
      file_ = std::make_unique<std::ofstream>(path, std::ios::binary);
      if (!*file_) throw Error(ErrorCode::InvalidArgument, "cannot open output file '" + path + "'");
    }
  }
  std::ostream& os() { return file_ ? *file_ : std::cout; }

 private:
  std::unique_ptr<std::ofstream> file_;
};

template <class... T>
void row(std::ostream& os, const T&... cols) {
  bool first = true;
  auto put = [&](const auto& v) {
    if (!first) os << ',';
    first = false;
    if constexpr (std::is_floating_point_v<std::decay_t<decltype(v)>>) os << num(v);
    else os << v;
  };
  (put(cols), ...);
  os << '\n';
}

json complex_json(const std::complex<double>& z) { return json::array({z.real(), z.imag()}); }

json periodic_json(const PeriodicPoint& pp) {
  return {{"point", json::array({pp.point.x1, pp.point.x3})},
          {"n", pp.n},
          {"multipliers", json::array({complex_json(pp.multipliers[0]), complex_json(pp.multipliers[1])})},
          {"stability", std::string(to_string(pp.stability))},
          {"residual", pp.residual}};
}

json event_json(const BifurcationEvent& e) {
  return {{"kind", std::string(to_string(e.kind))},
          {"param", e.param},
          {"n", e.n},
          {"point", json::array({e.point.x1, e.point.x3})},
          {"bracket", json::array({e.bracket_lo, e.bracket_hi})},
          {"multipliers", json::array({complex_json(e.multipliers[0]), complex_json(e.multipliers[1])})}};
}

json equilibrium_json(const EquilibriumInfo& e) {
  json ev = json::array();
  for (const auto& l : e.eigenvalues) ev.push_back(complex_json(l));
  return {{"location", json::array({e.location[0], e.location[1], e.location[2]})},
          {"eigenvalues", ev},
          {"stable_dim", e.stable_dim},
          {"unstable_dim", e.unstable_dim},
          {"stable_manifold", {{"dim", e.stable.dim}, {"kind", std::string(to_string(e.stable.kind))}}},
          {"unstable_manifold", {{"dim", e.unstable.dim}, {"kind", std::string(to_string(e.unstable.kind))}}}};
}

void write_branch_header(std::ostream& os, Param param, bool with_branch) {
  if (with_branch) os << "branch,n,";
  os << to_string(param) << ",x1,x3,mult1_re,mult1_im,mult2_re,mult2_im,stability\n";
}

void write_branch_rows(std::ostream& os, const Branch& b, int branch_id) {
  for (const auto& pt : b.points) {
    if (branch_id >= 0) os << branch_id << ',' << b.n << ',';
    row(os, pt.param, pt.point.x1, pt.point.x3, pt.multipliers[0].real(), pt.multipliers[0].imag(),
        pt.multipliers[1].real(), pt.multipliers[1].imag(), std::string(to_string(pt.stability)));
  }
}

void write_trajectory(std::ostream& os, const Trajectory& tr) {
  os << "t,x1,x2,x3\n";
  for (std::size_t i = 0; i < tr.size(); ++i) row(os, tr.t[i], tr.x[i][0], tr.x[i][1], tr.x[i][2]);
}

struct Range {
  double lo, hi;
  std::size_t steps;
};

Range parse_range(const std::string& s, bool need_steps) {
  const auto v = parse_list(s, ':');
  if (v.size() == 3 && v[2] >= 1.0 && v[2] == std::floor(v[2])) return {v[0], v[1], static_cast<std::size_t>(v[2])};
  if (v.size() == 2 && !need_steps) return {v[0], v[1], 0};
  throw Error(ErrorCode::InvalidArgument, "expected lo:hi" + std::string(need_steps ? ":steps" : "") + " but got '" + s + "'");
}

// ---------------------------------------------------------------- reproduce

std::string meta_line(const SystemParams& p, unsigned long seed) {
  std::ostringstream os;
  os << "params=" << num(p.a) << ',' << num(p.b) << ',' << num(p.c) << ',' << num(p.h) << ','
     << num(p.r) << ',' << num(p.omega);
  if (p.K != 0.0) os << ",K=" << num(p.K);
  os << ", seed=" << seed << ", version=" << kVersion;
  return os.str();
}

std::ofstream open_out(const std::filesystem::path& dir, const std::string& name) {
  std::ofstream f(dir / name, std::ios::binary);
  if (!f) throw Error(ErrorCode::InvalidArgument, "cannot write " + (dir / name).string());
  return f;
}

const SystemParams kBifurcation = SystemParams::from(1.0, 1.0, 1.0, 0.25, 3.0, 1.0);
const std::vector<SectionPoint> kPeriodTwoSeeds{{2.633, 0.00129}, {3.203, 0.03657}};

ContinuationSettings figure_settings(const IntegratorConfig& cfg) {
  ContinuationSettings s;
  s.p_min = 1.0;
  s.p_max = 1.3;
  s.integrator = cfg;
  return s;
}

Diagram figure_diagram(const IntegratorConfig& cfg) {
  const AnalyticOrbit orbit = analytic_orbit(kBifurcation);
  const PeriodicPoint start = newton_periodic(kBifurcation, {orbit.rho0, orbit.height}, 1, cfg);
  return compute_diagram(kBifurcation, start, figure_settings(cfg), 2);
}

void reproduce(const std::string& what, const std::filesystem::path& dir, const IntegratorConfig& cfg,
               unsigned long seed) {
  std::filesystem::create_directories(dir);
  if (what == "table1") {
    const SystemParams p = kBifurcation;
    auto f = open_out(dir, "table1_regions.csv");
    f << "# " << meta_line(p, seed) << '\n' << "region,x1,x2,x3,re_lambda12,lambda3\n";
    const Box box{State(-4, -4, -4), State(4, 4, 4)};
    for (std::size_t i = 1; i <= 2000; ++i) {
      const State x = halton_point(box, i + seed);
      const auto ne = nevalues(p, x);
      row(f, std::string(to_string(classify_region(p, x))), x[0], x[1], x[2], ne.lambda12_re, ne.lambda3);
    }
  } else if (what == "fig3") {
    const SystemParams p = SystemParams::from(1, 1, 1, 0.25, 1, 1);
    const SurfaceFan fan = unstable_manifold_equilibrium(p, 1e-3, 5, 60.0, cfg, {0.02});
    auto f = open_out(dir, "fig3_wu_z.csv");
    f << "# " << meta_line(p, seed) << '\n' << "seed,t,x1,x2,x3\n";
    for (std::size_t k = 0; k < fan.orbits.size(); ++k)
      for (std::size_t i = 0; i < fan.orbits[k].size(); ++i)
        row(f, k, fan.orbits[k].t[i], fan.orbits[k].x[i][0], fan.orbits[k].x[i][1], fan.orbits[k].x[i][2]);
    const AnalyticOrbit orbit = analytic_orbit(p);
    auto g = open_out(dir, "fig3_periodic_orbit.csv");
    g << "# " << meta_line(p, seed) << '\n' << "t,x1,x2,x3\n";
    for (int i = 0; i <= 200; ++i) {
      const double t = orbit.period * i / 200.0;
      const State x = orbit.at(t, p.omega);
      row(g, t, x[0], x[1], x[2]);
    }
  } else if (what == "fig4") {
    const Diagram d = figure_diagram(cfg);
    auto f = open_out(dir, "fig4_branches.csv");
    f << "# " << meta_line(kBifurcation, seed) << '\n';
    write_branch_header(f, Param::a, true);
    for (std::size_t i = 0; i < d.branches.size(); ++i)
      write_branch_rows(f, d.branches[i].result.branch, static_cast<int>(i));
    json ev = json::array();
    for (std::size_t i = 0; i < d.events.size(); ++i) {
      json e = event_json(d.events[i]);
      e["branch"] = d.event_branch[i];
      ev.push_back(e);
    }
    auto g = open_out(dir, "fig4_events.json");
    g << json{{"meta", meta_line(kBifurcation, seed)}, {"events", ev}}.dump(2) << '\n';
  } else if (what == "fig5") {
    const SweepGrid grid{1.197, 1.205, 1000};
    SweepOptions opt;
    opt.integrator = cfg;
    const auto diagrams = sweep(kBifurcation, kPeriodTwoSeeds, grid, opt);
    auto f = open_out(dir, "fig5_sweep.csv");
    f << "# " << meta_line(kBifurcation, seed) << '\n' << "a,x1,seed\n";
    for (std::size_t s = 0; s < diagrams.size(); ++s)
      for (std::size_t i = 0; i < diagrams[s].params.size(); ++i)
        for (double x : diagrams[s].x1[i]) row(f, diagrams[s].params[i], x, s);
  } else if (what == "fig6" || what == "fig7" || what == "fig8") {
    const SystemParams p = kBifurcation.with(Param::a, 1.205);
    std::vector<AttractorSample> att;
    for (const auto& s : kPeriodTwoSeeds) att.push_back(capture_attractor(p, s, 500, 5000, cfg));
    if (what == "fig6") {
      auto f = open_out(dir, "fig6_attractors.csv");
      f << "# " << meta_line(p, seed) << '\n' << "attractor,x1,x3\n";
      for (std::size_t k = 0; k < att.size(); ++k)
        for (const auto& q : att[k].points) row(f, k, q.x1, q.x3);
    } else if (what == "fig8") {
      auto f = open_out(dir, "fig8_flow_attractors.csv");
      f << "# " << meta_line(p, seed) << '\n' << "attractor,t,x1,x2,x3\n";
      for (std::size_t k = 0; k < att.size(); ++k) {
        const Trajectory tr = simulate(p, att[k].points.back().embed(), 100.0 * p.return_time(), cfg, {0.02});
        for (std::size_t i = 0; i < tr.size(); ++i) row(f, k, tr.t[i], tr.x[i][0], tr.x[i][1], tr.x[i][2]);
      }
    } else {
      const Diagram d = figure_diagram(cfg);
      const auto fixed = points_at(d, 1, 1.205, kBifurcation, figure_settings(cfg));
      auto f = open_out(dir, "fig7_manifolds.csv");
      f << "# " << meta_line(p, seed) << '\n' << "saddle,side,arc_index,x1,x3\n";
      for (std::size_t k = 0; k < att.size(); ++k) {
        const PeriodicPoint* best = nullptr;
        double best_d = std::numeric_limits<double>::infinity();
        for (const auto& fp : fixed) {
          if (fp.stability != Stability::Saddle) continue;
          const double dist = directed_hausdorff({fp.point}, att[k].points);
          if (dist < best_d) best_d = dist, best = &fp;
        }
        if (best == nullptr) throw Error(ErrorCode::NoConvergence, "no saddle fixed point found at a=1.205");
        ManifoldOptions mo;
        mo.integrator = cfg;
        for (const auto& c : unstable_manifold_both(p, *best, mo))
          for (std::size_t i = 0; i < c.points.size(); ++i) row(f, k, c.side, i, c.points[i].x1, c.points[i].x3);
      }
    }
  } else if (what == "fig9") {
    const SystemParams p = SystemParams::from(5, 1, 0.1, 1.5, 10, 5, 1.1);
    SystemParams free = p;
    free.K = 0.0;
    // Start from the largest |x3| of the free attractor after a transient.
    const Trajectory warm = simulate(free, State(1.0, 1.0, 1.0), 200.0, cfg);
    State start = warm.x.back();
    double best = -1.0;
    for (std::size_t i = 0; i < warm.size(); ++i)
      if (warm.t[i] >= 100.0 && std::abs(warm.x[i][2]) > best) best = std::abs(warm.x[i][2]), start = warm.x[i];
    const ControlledRun run = run_controlled(p, start, 50.0, cfg, {0.01});
    auto f = open_out(dir, "fig9_control.csv");
    f << "# " << meta_line(p, seed) << '\n' << "t,x1,x2,x3,u,lambda3cl\n";
    for (std::size_t i = 0; i < run.trajectory.size(); ++i)
      row(f, run.trajectory.t[i], run.trajectory.x[i][0], run.trajectory.x[i][1], run.trajectory.x[i][2], run.u[i],
          run.lambda3cl[i]);
  } else if (what == "fig10") {
    const SystemParams p = SystemParams::from(5, 1, 0.1, 4, 10, 50);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> U(-5.0, 5.0);
    const State xm0 = flow(p, State(U(rng), U(rng), U(rng)), 10.0, cfg);
    const State xs0 = xm0 + State(U(rng), U(rng), U(rng));
    const SyncRun run = run_sync(p, xm0, xs0, 5.0, cfg, {0.001});
    auto f = open_out(dir, "fig10_sync.csv");
    f << "# " << meta_line(p, seed) << '\n' << "t,e1,e2,e3,u1,u2,u3\n";
    for (std::size_t i = 0; i < run.t.size(); ++i)
      row(f, run.t[i], run.error[i][0], run.error[i][1], run.error[i][2], run.u[i][0], run.u[i][1], run.u[i][2]);
  } else {
    throw Error(ErrorCode::InvalidArgument, "unknown figure '" + what + "'");
  }
}

// Expands `--config FILE` into flags placed right after the subcommand name.
// Keys the subcommand does not know are skipped so one file can serve several commands.
std::vector<std::string> with_config(CLI::App& app, const std::vector<std::string>& args) {
  std::string path;
  for (std::size_t i = 2; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) path = args[i + 1];
    if (args[i].rfind("--config=", 0) == 0) path = args[i].substr(9);
  }
  if (path.empty() || args.size() < 2) return args;
  const CLI::App* sub = app.get_subcommand_no_throw(args[1]);
  if (sub == nullptr) return args;
  std::vector<std::string> out(args.begin(), args.begin() + 2);
  for (const auto& item : CLI::ConfigINI().from_file(path)) {
    if (item.name.empty() || sub->get_option_no_throw("--" + item.name) == nullptr) continue;
    std::string value;
    for (const auto& v : item.inputs) value += (value.empty() ? "" : ",") + v;
    out.push_back("--" + item.name);
    out.push_back(value);
  }
  out.insert(out.end(), args.begin() + 2, args.end());
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Numerical laboratory for a pseudo-linear chaotic system"};
  app.require_subcommand(1);

  // Repeated options keep the last value, so flags placed after the config entries win.
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);

  Common common;
  std::string config_path;
  auto add_common = [&](CLI::App* sub, bool with_K = false) {
    sub->add_option("--config", config_path, "flat key=value file; flags given on the command line win");
    sub->add_option("--params", common.params, "a,b,c,h,r,omega")->delimiter(',')->expected(6);
    if (with_K) sub->add_option("--K", common.K, "feedback gain");
    sub->add_option("--rtol", common.rtol, "relative tolerance");
    sub->add_option("--atol", common.atol, "absolute tolerance");
    sub->add_option("-o,--out", common.out, "output file (default stdout)");
  };

  std::string x0s = "0.1,0,0.5", xm0s = "1,0.5,2", xs0s = "-1,1,1", guess = "2.99,0.25", seeds_s;
  double T = 10.0, stride = 0.0, renorm = 1.0, eps = 1e-3, gap = 1e-3;
  std::size_t iters = 100, n_seeds = 5, N = 600, m = 100, n0 = 64;
  int period = 1, direction = 1, manifold_iters = 6, side = 0;
  std::string param_name = "a", range_s = "1.0:1.3", grid_s = "1.197:1.205:1000", events_path, kind = "map";
  double h0 = 5e-3, hmin = 1e-7, hmax = 2e-2;
  std::string figure, out_dir = ".";
  unsigned long seed = 0;

  auto* simulate_cmd = app.add_subcommand("simulate", "integrate a trajectory");
  add_common(simulate_cmd);
  simulate_cmd->add_option("--x0", x0s, "initial state x1,x2,x3");
  simulate_cmd->add_option("--T", T, "final time");
  simulate_cmd->add_option("--stride", stride, "output stride (0: every accepted step)");

  auto* regions_cmd = app.add_subcommand("regions", "region transitions along a trajectory");
  add_common(regions_cmd);
  regions_cmd->add_option("--x0", x0s, "initial state x1,x2,x3");
  regions_cmd->add_option("--T", T, "final time");

  auto* equilibria_cmd = app.add_subcommand("equilibria", "equilibria, eigenvalues and the analytic orbit (JSON)");
  add_common(equilibria_cmd);

  auto* poincare_cmd = app.add_subcommand("poincare", "iterate the return map");
  add_common(poincare_cmd);
  poincare_cmd->add_option("--seed", guess, "section point x1,x3");
  poincare_cmd->add_option("--iters", iters, "number of iterates");

  auto* newton_cmd = app.add_subcommand("newton", "refine a period-n point (JSON)");
  add_common(newton_cmd);
  newton_cmd->add_option("--guess", guess, "section point x1,x3");
  newton_cmd->add_option("--n", period, "period");

  auto* continue_cmd = app.add_subcommand("continue", "continue a period-n point in one parameter");
  add_common(continue_cmd);
  continue_cmd->add_option("--guess", guess, "section point x1,x3 (refined by Newton first)");
  continue_cmd->add_option("--n", period, "period");
  continue_cmd->add_option("--param", param_name, "continuation parameter (a,b,c,h,r,omega)");
  continue_cmd->add_option("--range", range_s, "lo:hi");
  continue_cmd->add_option("--direction", direction, "+1 or -1");
  continue_cmd->add_option("--h0", h0);
  continue_cmd->add_option("--hmin", hmin);
  continue_cmd->add_option("--hmax", hmax);
  continue_cmd->add_option("--events", events_path, "events JSON output file");

  auto* sweep_cmd = app.add_subcommand("sweep", "brute-force bifurcation diagram");
  add_common(sweep_cmd);
  sweep_cmd->add_option("--a", grid_s, "lo:hi:steps");
  sweep_cmd->add_option("--param", param_name, "swept parameter");
  sweep_cmd->add_option("--seeds", seeds_s, "x1,x3;x1,x3;... (default: the two period-2 seeds)");
  sweep_cmd->add_option("--N", N, "iterates per grid value");
  sweep_cmd->add_option("--m", m, "retained iterates");

  auto* manifold_cmd = app.add_subcommand("manifold", "unstable manifolds");
  add_common(manifold_cmd);
  manifold_cmd->add_option("--kind", kind, "map (saddle of P) or equilibrium (W^u(Z))");
  manifold_cmd->add_option("--guess", guess, "saddle guess x1,x3 (map)");
  manifold_cmd->add_option("--n", period, "saddle period (map)");
  manifold_cmd->add_option("--side", side, "+1, -1 or 0 for both (map)");
  manifold_cmd->add_option("--eps", eps, "initial offset (map: <=0 for automatic)");
  manifold_cmd->add_option("--gap", gap, "maximal point gap (map)");
  manifold_cmd->add_option("--n0", n0, "points in the fundamental domain (map)");
  manifold_cmd->add_option("--iters", manifold_iters, "growth steps (map)");
  manifold_cmd->add_option("--seeds", n_seeds, "number of orbits (equilibrium)");
  manifold_cmd->add_option("--T", T, "integration time (equilibrium)");
  manifold_cmd->add_option("--stride", stride, "output stride (equilibrium)");

  auto* control_cmd = app.add_subcommand("control", "closed loop with u = -K r^2 x3");
  add_common(control_cmd, true);
  control_cmd->add_option("--x0", x0s, "initial state x1,x2,x3");
  control_cmd->add_option("--T", T, "final time");
  control_cmd->add_option("--stride", stride, "output stride");

  auto* sync_cmd = app.add_subcommand("sync", "master-slave synchronization");
  add_common(sync_cmd);
  sync_cmd->add_option("--xm0", xm0s, "master initial state");
  sync_cmd->add_option("--xs0", xs0s, "slave initial state");
  sync_cmd->add_option("--T", T, "final time");
  sync_cmd->add_option("--stride", stride, "output stride");

  auto* lyap_cmd = app.add_subcommand("lyapunov", "largest Lyapunov exponent of the flow (JSON)");
  add_common(lyap_cmd);
  lyap_cmd->add_option("--x0", x0s, "initial state x1,x2,x3");
  lyap_cmd->add_option("--T", T, "averaging time");
  lyap_cmd->add_option("--renorm", renorm, "renormalization interval");

  auto* repro_cmd = app.add_subcommand("reproduce", "regenerate figure/table data with built-in parameters");
  repro_cmd->add_option("figure", figure, "table1, fig3 ... fig10")->required();
  repro_cmd->add_option("--out-dir", out_dir, "output directory");
  repro_cmd->add_option("--seed", seed, "random seed");
  repro_cmd->add_option("--rtol", common.rtol, "relative tolerance");
  repro_cmd->add_option("--atol", common.atol, "absolute tolerance");

  try {
    std::vector<std::string> args(argv, argv + argc);
    args = with_config(app, args);
    std::vector<char*> ptrs;
    for (auto& a : args) ptrs.push_back(a.data());
    app.parse(static_cast<int>(ptrs.size()), ptrs.data());
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    const IntegratorConfig cfg = make_cfg(common);
    if (*repro_cmd) {
      reproduce(figure, out_dir, cfg, seed);
      return 0;
    }
    const SystemParams p = make_params(common);
    Sink sink(common.out);
    std::ostream& os = sink.os();

    if (*simulate_cmd) {
      write_trajectory(os, simulate(p, parse_state(x0s), T, cfg, {stride}));
    } else if (*regions_cmd) {
      const LoggedRun run = integrate_logged(p, parse_state(x0s), T, cfg);
      os << "t,from,to\n";
      for (const auto& tr : run.transitions)
        row(os, tr.t, std::string(to_string(tr.from)), std::string(to_string(tr.to)));
    } else if (*equilibria_cmd) {
      const EquilibriumPair eq = analyze_equilibria(p);
      json doc{{"params", json::array({p.a, p.b, p.c, p.h, p.r, p.omega})},
               {"origin", equilibrium_json(eq.origin)},
               {"upper", equilibrium_json(eq.upper)},
               {"hopf_threshold", hopf_threshold(p)}};
      try {
        const AnalyticOrbit o = analytic_orbit(p);
        doc["analytic_orbit"] = {{"rho0", o.rho0}, {"height", o.height}, {"period", o.period}};
      } catch (const Error&) {
        doc["analytic_orbit"] = nullptr;
      }
      os << doc.dump(2) << '\n';
    } else if (*poincare_cmd) {
      const SectionPoint s0 = parse_section(guess);
      os << "iter,x1,x3\n";
      row(os, 0, s0.x1, s0.x3);
      const auto pts = iterate_map(p, s0, iters, cfg);
      for (std::size_t i = 0; i < pts.size(); ++i) row(os, i + 1, pts[i].x1, pts[i].x3);
    } else if (*newton_cmd) {
      os << periodic_json(newton_periodic(p, parse_section(guess), period, cfg)).dump(2) << '\n';
    } else if (*continue_cmd) {
      ContinuationSettings s;
      s.param = param_from_string(param_name);
      const Range r = parse_range(range_s, false);
      s.p_min = r.lo;
      s.p_max = r.hi;
      s.direction = direction >= 0 ? 1 : -1;
      s.step = {h0, hmin, hmax};
      s.integrator = cfg;
      const PeriodicPoint start = newton_periodic(p, parse_section(guess), period, cfg);
      const ContinuationResult res = continue_branch(p, start, s);
      write_branch_header(os, s.param, false);
      write_branch_rows(os, res.branch, -1);
      if (!events_path.empty()) {
        json ev = json::array();
        for (const auto& e : res.events) ev.push_back(event_json(e));
        json doc{{"events", ev}};
        doc["status"] = res.status ? json(std::string(to_string(*res.status))) : json(nullptr);
        Sink es(events_path);
        es.os() << doc.dump(2) << '\n';
      }
    } else if (*sweep_cmd) {
      const Range r = parse_range(grid_s, true);
      SweepOptions opt;
      opt.param = param_from_string(param_name);
      opt.iterates = N;
      opt.retained = m;
      opt.integrator = cfg;
      const auto seeds = seeds_s.empty() ? kPeriodTwoSeeds : parse_sections(seeds_s);
      const auto diagrams = sweep(p, seeds, SweepGrid{r.lo, r.hi, r.steps}, opt);
      os << to_string(opt.param) << ",x1,seed\n";
      for (std::size_t k = 0; k < diagrams.size(); ++k)
        for (std::size_t i = 0; i < diagrams[k].params.size(); ++i)
          for (double x : diagrams[k].x1[i]) row(os, diagrams[k].params[i], x, k);
    } else if (*manifold_cmd) {
      if (kind == "map") {
        const PeriodicPoint saddle = newton_periodic(p, parse_section(guess), period, cfg);
        ManifoldOptions mo;
        mo.eps = eps;
        mo.gap_max = gap;
        mo.n0 = n0;
        mo.n_iters = manifold_iters;
        mo.integrator = cfg;
        std::vector<int> sides = side == 0 ? std::vector<int>{1, -1} : std::vector<int>{side};
        os << "arc_index,x1,x3,side\n";
        for (int sd : sides) {
          const ManifoldCurve c = unstable_manifold_map(p, saddle, sd, mo);
          for (std::size_t i = 0; i < c.points.size(); ++i) row(os, i, c.points[i].x1, c.points[i].x3, sd);
        }
      } else if (kind == "equilibrium") {
        const SurfaceFan fan = unstable_manifold_equilibrium(p, eps, n_seeds, T, cfg, {stride});
        os << "seed,t,x1,x2,x3\n";
        for (std::size_t k = 0; k < fan.orbits.size(); ++k)
          for (std::size_t i = 0; i < fan.orbits[k].size(); ++i)
            row(os, k, fan.orbits[k].t[i], fan.orbits[k].x[i][0], fan.orbits[k].x[i][1], fan.orbits[k].x[i][2]);
      } else {
        throw Error(ErrorCode::InvalidArgument, "--kind must be map or equilibrium");
      }
    } else if (*control_cmd) {
      const ControlledRun run = run_controlled(p, parse_state(x0s), T, cfg, {stride});
      os << "t,x1,x2,x3,u,lambda3cl\n";
      for (std::size_t i = 0; i < run.trajectory.size(); ++i)
        row(os, run.trajectory.t[i], run.trajectory.x[i][0], run.trajectory.x[i][1], run.trajectory.x[i][2],
            run.u[i], run.lambda3cl[i]);
    } else if (*sync_cmd) {
      const SyncRun run = run_sync(p, parse_state(xm0s), parse_state(xs0s), T, cfg, {stride});
      os << "t,e1,e2,e3,u1,u2,u3\n";
      for (std::size_t i = 0; i < run.t.size(); ++i)
        row(os, run.t[i], run.error[i][0], run.error[i][1], run.error[i][2], run.u[i][0], run.u[i][1], run.u[i][2]);
    } else if (*lyap_cmd) {
      const LyapunovResult L = lyapunov(p, parse_state(x0s), T, renorm, cfg);
      os << json{{"exponent", L.exponent}, {"intervals", L.intervals}, {"T", T}, {"renorm_interval", renorm}}.dump(2)
         << '\n';
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return e.code() == ErrorCode::InvalidArgument ? kExitUsage : kExitDomain;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitDomain;
  }
  return 0;
}
