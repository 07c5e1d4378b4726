#include <cmath>
#include <complex>
#include <random>

#include <gtest/gtest.h>

#include "plchaos/equilibria.hpp"
#include "plchaos/integrate.hpp"

using namespace plchaos;

namespace {

// Largest distance from a closed-form eigenvalue to its nearest numeric one.
double eigen_mismatch(const std::array<std::complex<double>, 3>& exact,
                      const std::array<std::complex<double>, 3>& numeric) {
  double worst = 0.0;
  for (const auto& e : exact) {
    double best = 1e300;
    for (const auto& n : numeric) best = std::min(best, std::abs(e - n));
    worst = std::max(worst, best);
  }
  return worst;
}

}  // namespace

TEST(Equilibria, QuotedParameters) {
  const auto eq = analyze_equilibria(SystemParams::from(1, 1, 1, 0.25, 3, 1));
  using C = std::complex<double>;
  EXPECT_EQ(eq.origin.eigenvalues[0], C(-0.0625, 1.0));
  EXPECT_EQ(eq.origin.eigenvalues[1], C(-0.0625, -1.0));
  EXPECT_EQ(eq.origin.eigenvalues[2], C(9.0, 0.0));
  EXPECT_EQ(eq.upper.location, State(0, 0, 3));
  EXPECT_EQ(eq.upper.eigenvalues[0], C(8.9375, 1.0));
  EXPECT_EQ(eq.upper.eigenvalues[2], C(-18.0, 0.0));
  EXPECT_EQ(eq.origin.stable_dim, 2);
  EXPECT_EQ(eq.origin.unstable_dim, 1);
  EXPECT_EQ(eq.origin.stable.kind, ManifoldKind::PlaneX3Zero);
  EXPECT_EQ(eq.upper.unstable_dim, 2);
  EXPECT_EQ(eq.upper.unstable.kind, ManifoldKind::TangentPlaneAtZ);
}

TEST(Equilibria, HopfLocus) {
  const SystemParams p = SystemParams::from(1, 1, 4, 0.5, 1, 1);
  EXPECT_DOUBLE_EQ(hopf_threshold(p), 0.5);
  const auto eq = analyze_equilibria(p);
  EXPECT_EQ(eq.upper.location, State(0, 0, 0.5));
  EXPECT_EQ(eq.upper.eigenvalues[0].real(), 0.0);
  EXPECT_EQ(eq.upper.unstable_dim, 0);
  EXPECT_DOUBLE_EQ(hopf_threshold(SystemParams::from(1, 1, 1, 0.25, 3, 1)), 3.0);
}

TEST(Equilibria, UnstableDimensionFollowsSign) {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> U(0.1, 4.0);
  for (int i = 0; i < 200; ++i) {
    const SystemParams p = SystemParams::from(U(rng), U(rng), U(rng), U(rng), U(rng), U(rng));
    const auto eq = analyze_equilibria(p);
    EXPECT_EQ(eq.upper.unstable_dim == 2, p.r * p.r / p.c > p.h * p.h);
  }
}

TEST(Equilibria, ClosedFormMatchesNumericEigenvalues) {
  std::mt19937_64 rng(32);
  std::uniform_real_distribution<double> U(0.1, 5.0);
  for (int i = 0; i < 100; ++i) {
    const SystemParams p = SystemParams::from(U(rng), U(rng), U(rng), U(rng), U(rng), U(rng));
    const auto eq = analyze_equilibria(p);
    const double scale = 1.0 + p.r * p.r + p.omega + p.r * p.r / p.c;
    EXPECT_LT(eigen_mismatch(eq.origin.eigenvalues, numeric_eigenvalues(p, State::Zero())), 1e-10 * scale);
    EXPECT_LT(eigen_mismatch(eq.upper.eigenvalues, numeric_eigenvalues(p, eq.upper.location)), 1e-10 * scale);
  }
}

TEST(Equilibria, VectorFieldVanishes) {
  const SystemParams p = SystemParams::from(1.3, 0.7, 2.0, 0.4, 2.5, 1.1);
  const auto eq = analyze_equilibria(p);
  EXPECT_EQ(vector_field(p, eq.origin.location), State::Zero());
  EXPECT_LT(vector_field(p, eq.upper.location).norm(), 1e-14);
}

TEST(AnalyticOrbit, Radii) {
  const auto o = analytic_orbit(SystemParams::from(1, 1, 1, 0.25, 3, 1));
  EXPECT_NEAR(o.rho0, 2.98956, 1e-5);
  EXPECT_DOUBLE_EQ(o.period, 2.0 * M_PI);
  EXPECT_NEAR(analytic_orbit(SystemParams::from(1, 1, 1, 0.25, 1, 1)).rho0, 0.96825, 1e-5);
  // Coalescence with Z at h = r / sqrt(c).
  EXPECT_EQ(analytic_orbit(SystemParams::from(1, 1, 4, 0.5, 1, 1)).rho0, 0.0);
}

TEST(AnalyticOrbit, NotApplicable) {
  try {
    analytic_orbit(SystemParams::from(1.1, 1, 1, 0.25, 3, 1));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NotApplicable);
  }
  EXPECT_THROW(analytic_orbit(SystemParams::from(1, 1, 4, 0.6, 1, 1)), Error);
}

TEST(AnalyticOrbit, SolvesTheVectorField) {
  const SystemParams p = SystemParams::from(2, 2, 1.5, 0.5, 2, 1.7);
  const auto o = analytic_orbit(p);
  for (int k = 0; k < 50; ++k) {
    const double t = o.period * k / 50.0;
    const State x = o.at(t, p.omega);
    const State dx(-p.omega * o.rho0 * std::sin(p.omega * t), p.omega * o.rho0 * std::cos(p.omega * t), 0.0);
    EXPECT_LT((vector_field(p, x) - dx).norm(), 1e-12);
  }
  const State x0 = o.at(0.0, p.omega);
  EXPECT_LT((flow(p, x0, o.period) - x0).norm(), 1e-7);
}

TEST(AnalyticOrbit, SmallOrbitNearHopf) {
  // h just below r / sqrt(c): a small circle around Z that the flow keeps.
  const SystemParams p = SystemParams::from(1, 1, 1, 2.95, 3, 1);
  const auto o = analytic_orbit(p);
  EXPECT_GT(o.rho0, 0.0);
  EXPECT_LT(o.rho0, 0.6);
  const State x0 = o.at(0.0, p.omega);
  EXPECT_LT((flow(p, x0, o.period) - x0).norm(), 1e-7);
  // Nearby starts approach the circle.
  const State y = flow(p, State(o.rho0 * 1.2, 0.0, p.h * 1.01), 40.0 * o.period);
  EXPECT_NEAR(std::hypot(y[0], y[1]), o.rho0, 1e-3);
  EXPECT_NEAR(y[2], p.h, 1e-3);
}

TEST(Manifolds, PlaneConvergesToOrigin) {
  const SystemParams p = SystemParams::from(1, 1, 1, 0.25, 3, 1);
  const double T = 200.0 / (p.h * p.h);
  for (const State& x0 : {State(1, 0, 0), State(-2, 3, 0), State(0.1, -0.1, 0)}) {
    EXPECT_LT(flow(p, x0, T).norm(), 1e-4);
  }
}

TEST(Manifolds, AxisConvergesToZ) {
  const SystemParams p = SystemParams::from(1, 1, 1, 0.25, 3, 1);
  const State x = flow(p, State(0, 0, 1e-3), 10.0);
  EXPECT_EQ(x[0], 0.0);
  EXPECT_EQ(x[1], 0.0);
  EXPECT_NEAR(x[2], 3.0, 1e-6);
}
