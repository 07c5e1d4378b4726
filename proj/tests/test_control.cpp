#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "plchaos/control.hpp"
#include "plchaos/lyapunov.hpp"
#include "plchaos/poincare.hpp"

using namespace plchaos;

namespace {

const SystemParams kCtrl = SystemParams::from(5, 1, 0.1, 1.5, 10, 5, 1.1);
const SystemParams kSync = SystemParams::from(5, 1, 0.1, 4, 10, 50);

}  // namespace

TEST(ClosedLoop, NEValueExamples) {
  EXPECT_NEAR(closed_loop_ne3(kCtrl, State::Zero()), -10.0, 1e-12);
  EXPECT_NEAR(closed_loop_ne3(kCtrl, State(1, 2, 3)), -10.0 - 5.0 - 4.0 - 0.9, 1e-12);
  const double z = 2.0;
  EXPECT_DOUBLE_EQ(sync_error_ne3(kSync, State(0, 0, z), State(0, 0, z)), -3.0 * kSync.c * z * z);
}

TEST(ClosedLoop, SyncNEValueIsNonPositive) {
  std::mt19937_64 rng(51);
  std::uniform_real_distribution<double> U(-20.0, 20.0);
  for (int i = 0; i < 100000; ++i) {
    const State xs(U(rng), U(rng), U(rng)), xm(U(rng), U(rng), U(rng));
    ASSERT_LE(sync_error_ne3(kSync, xs, xm), 0.0);
  }
}

TEST(Controlled, ZeroGainIsTheFreeFlow) {
  const SystemParams p = kCtrl.with(Param::a, 5.0);
  SystemParams free = p;
  free.K = 0.0;
  const State x0(1, 1, 1);
  const ControlledRun run = run_controlled(free, x0, 3.0);
  EXPECT_LE((run.trajectory.x.back() - flow(free, x0, 3.0)).norm(), 1e-9);
  for (double u : run.u) EXPECT_EQ(u, 0.0);
}

TEST(Controlled, StabilizesTheOrigin) {
  const State x0(1, 1, 1);
  const ControlledRun run = run_controlled(kCtrl, x0, 50.0);
  EXPECT_DOUBLE_EQ(run.K, 1.1);
  EXPECT_LT(run.trajectory.x.back().norm(), 1e-3);
  ASSERT_EQ(run.lambda3cl.size(), run.trajectory.size());
  for (double l : run.lambda3cl) EXPECT_LE(l, -10.0);
  for (std::size_t i = 0; i < run.u.size(); ++i) {
    EXPECT_DOUBLE_EQ(run.u[i], -kCtrl.K * kCtrl.r * kCtrl.r * run.trajectory.x[i][2]);
  }
}

TEST(Controlled, AxialDecayIsMonotone) {
  const ControlledRun run = run_controlled(kCtrl, State(-2, 3, 4), 5.0);
  for (std::size_t i = 1; i < run.trajectory.size(); ++i) {
    ASSERT_LE(std::abs(run.trajectory.x[i][2]), std::abs(run.trajectory.x[i - 1][2]) * (1.0 + 1e-9));
  }
}

TEST(Sync, ControllerFormulas) {
  const State xs(1, 2, 3), xm(-1, 0.5, 2);
  const State u = sync_controller(kSync, xs, xm);
  EXPECT_DOUBLE_EQ(u[0], -9.0 * 1.0 + 4.0 * -1.0);
  EXPECT_DOUBLE_EQ(u[1], -9.0 * 2.0 + 4.0 * 0.5);
  EXPECT_DOUBLE_EQ(u[2], -100.0 * 1.0);
  // The error field equals the difference of the closed-loop slave and the master.
  const State e = xs - xm;
  const State direct = vector_field(kSync, xs) + u - vector_field(kSync, xm);
  EXPECT_LT((sync_error_field(kSync, xm, e) - direct).norm(), 1e-12 * direct.norm());
}

TEST(Sync, ErrorVanishes) {
  const State xm0(1, -1, 2), xs0(-3, 2, 0.5);
  const SyncRun run = run_sync(kSync, xm0, xs0, 5.0, {}, {0.01});
  EXPECT_LT(run.error.back().norm(), 1e-4);
  EXPECT_EQ(run.t.size(), 501u);
  for (std::size_t i = 0; i < run.t.size(); ++i) {
    EXPECT_LT((run.slave[i] - run.master[i] - run.error[i]).norm(), 1e-12 * (1.0 + run.slave[i].norm()));
  }
}

TEST(Sync, SpiralEnvelope) {
  const State xm0(1, -1, 2), xs0(-3, 2, 0.5);
  const SyncRun run = run_sync(kSync, xm0, xs0, 5.0, {}, {0.01});
  const double r0 = std::hypot(run.error[0][0], run.error[0][1]);
  const double h2 = kSync.h * kSync.h;
  for (std::size_t i = 0; i < run.t.size(); ++i) {
    const double expected = r0 * std::exp(-h2 * run.t[i]);
    const double got = std::hypot(run.error[i][0], run.error[i][1]);
    ASSERT_LE(std::abs(got - expected), 1e-5 * expected) << "t=" << run.t[i];
  }
}

TEST(Sync, CoupledFormAgrees) {
  const State xm0(0.5, 0.2, 1.0), xs0(-0.4, 0.6, 1.3);
  const SyncRun a = run_sync(kSync, xm0, xs0, 0.5, {}, {0.05});
  const SyncRun b = run_sync_coupled(kSync, xm0, xs0, 0.5, {}, {0.05});
  ASSERT_EQ(a.t.size(), b.t.size());
  for (std::size_t i = 0; i < a.t.size(); ++i) {
    const double scale = 1.0 + a.master[i].norm();
    EXPECT_LE((a.error[i] - b.error[i]).norm(), 1e-8 * scale) << "t=" << a.t[i];
    // The two runs share only the master equation; their step sequences differ.
    EXPECT_LE((a.master[i] - b.master[i]).norm(), 1e-6 * scale);
  }
}

TEST(Sync, AlreadySynchronized) {
  const State x0(0.7, -0.3, 1.1);
  const SyncRun run = run_sync(kSync, x0, x0, 2.0);
  for (std::size_t i = 0; i < run.t.size(); ++i) {
    EXPECT_EQ(run.error[i], State::Zero());
    EXPECT_EQ(run.u[i][2], 0.0);
  }
}

TEST(Lyapunov, OriginGivesAxialRate) {
  const SystemParams p = SystemParams::from(1, 1, 1, 0.25, 3, 1);
  const LyapunovResult r = lyapunov(p, State::Zero(), 20.0);
  EXPECT_NEAR(r.exponent, 9.0, 1e-6);
  EXPECT_EQ(r.intervals, 19u);
  EXPECT_EQ(r.running.size(), 19u);
}

TEST(Lyapunov, StableCycleIsNegative) {
  const SystemParams p = SystemParams::from(1.1, 1, 1, 0.25, 3, 1);
  const PeriodicPoint pp = newton_periodic(p, {2.99, 0.25}, 1);
  ASSERT_EQ(pp.stability, Stability::Stable);
  const LyapunovResult r = lyapunov(p, pp.point.embed(), 1000.0);
  EXPECT_LT(r.exponent, 0.0);
  // The transverse exponent is the log of the leading multiplier per turn.
  EXPECT_NEAR(r.exponent, std::log(std::abs(pp.multipliers[0])) / p.return_time(), 5e-3);
}

TEST(Lyapunov, ChaoticAttractorIsPositive) {
  const SystemParams p = SystemParams::from(1.205, 1, 1, 0.25, 3, 1);
  const SectionPoint s = iterate_map(p, {2.633, 0.00129}, 200).back();
  const LyapunovResult r = lyapunov(p, s.embed(), 2000.0);
  EXPECT_GT(r.exponent, 0.005);
}

TEST(Lyapunov, ArgumentChecks) {
  const SystemParams p = SystemParams::from(1, 1, 1, 0.25, 3, 1);
  EXPECT_THROW(lyapunov(p, State(1, 0, 1), 1.5, 1.0), Error);
  EXPECT_THROW(lyapunov(p, State(1, 0, 1), 10.0, 0.0), Error);
}
