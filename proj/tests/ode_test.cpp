#include <gtest/gtest.h>

#include <cmath>

#include "seis/ode.hpp"
#include "seis/thresholds.hpp"

using namespace seis;

TEST(OdeRhs, DiseaseFreeEquilibrium) {
  const ModelParams p;
  const OdeRates k = ode_rhs({0.0, p.dfe_level(), 0.0, 0.0}, p);
  EXPECT_EQ(k.dS, 0.0);
  EXPECT_EQ(k.dE, 0.0);
  EXPECT_EQ(k.dI, 0.0);
}

TEST(OdeRhs, HandExample) {
  // A = 1, alpha = 1, all rates 1, p = 0.5 at (1, 1, 1):
  //   dS = 1 - 1 - 1 + 1 + 1 = 1, dE = 0.5 - 3 = -2.5, dI = 0.5 + 1 - 2 = -0.5.
  ModelParams p;
  p.A = p.alpha = p.mu1 = p.mu2 = p.mu3 = p.r1 = p.r2 = p.beta1 = 1.0;
  p.p = 0.5;
  const OdeRates k = ode_rhs({0.0, 1.0, 1.0, 1.0}, p);
  EXPECT_DOUBLE_EQ(k.dS, 1.0);
  EXPECT_DOUBLE_EQ(k.dE, -2.5);
  EXPECT_DOUBLE_EQ(k.dI, -0.5);
  // Cure of I exactly offsets the infection loss when alpha S = r2.
  const OdeRates z = ode_rhs({0.0, 1.0, 0.0, 0.3}, p);
  EXPECT_DOUBLE_EQ(z.dS, 1.0 - 0.3 - 1.0 + 0.3);
}

TEST(OdeRhs, TotalPopulationIdentity) {
  // With equal death rates, N' = A - mu N.
  ModelParams p;
  p.mu1 = p.mu2 = p.mu3 = 0.4;
  p.A = 1.3;
  const OdeState x{0.0, 0.7, 0.2, 0.9};
  const OdeRates k = ode_rhs(x, p);
  EXPECT_NEAR(k.dS + k.dE + k.dI, p.A - 0.4 * (x.S + x.E + x.I), 1e-14);
}

TEST(OdeRun, TotalFollowsClosedForm) {
  ModelParams p;
  p.mu1 = p.mu2 = p.mu3 = 0.4;
  p.A = 1.3;
  const OdeState x0{0.0, 0.7, 0.2, 0.9};
  const auto path = ode_run(x0, p, 0.01, 5.0);
  const double n0 = x0.S + x0.E + x0.I, level = p.A / 0.4;
  for (const OdeState& x : path) {
    const double exact = level + (n0 - level) * std::exp(-0.4 * x.t);
    ASSERT_NEAR(x.S + x.E + x.I, exact, 1e-9) << x.t;
  }
  EXPECT_EQ(path.back().t, 5.0);
}

TEST(OdeRun, FourthOrderConvergence) {
  const ModelParams p;
  const OdeState x0{0.0, 0.5, 0.3, 1.0};
  const OdeState ref = ode_run(x0, p, 0.0025, 4.0).back();
  const auto err = [&](double dt) {
    const OdeState x = ode_run(x0, p, dt, 4.0).back();
    return std::abs(x.S - ref.S) + std::abs(x.E - ref.E) + std::abs(x.I - ref.I);
  };
  const double ratio = err(0.2) / err(0.1);
  EXPECT_GT(ratio, 12.0);
  EXPECT_LT(ratio, 20.0);
}

TEST(OdeRun, ShortLastStepLandsOnEnd) {
  const ModelParams p;
  const auto path = ode_run({0.0, 1.0, 0.0, 0.5}, p, 0.3, 1.0);
  EXPECT_EQ(path.size(), 5u);
  EXPECT_EQ(path.back().t, 1.0);
  EXPECT_EQ(ode_run({0.0, 1.0, 0.0, 0.5}, p, 0.3, 0.0).size(), 1u);
}

TEST(OdeRun, SubthresholdInfectionDiesOut) {
  const ModelParams p;
  ASSERT_LT(r0_max(p), 1.0);
  const OdeState end = ode_run({0.0, 2.0, 0.5, 1.5}, p, 0.01, 60.0).back();
  EXPECT_LT(end.E + end.I, 1e-6);
  EXPECT_NEAR(end.S, p.dfe_level(), 1e-6);
}

TEST(OdeRun, InvalidInputs) {
  const ModelParams p;
  EXPECT_THROW(ode_run({}, p, 0.0, 1.0), DomainError);
  EXPECT_THROW(ode_run({2.0, 1.0, 0.0, 0.0}, p, 0.1, 1.0), DomainError);
}

TEST(OdeRun, NonFiniteStateRaisesBlowup) {
  ModelParams p;
  p.alpha = 1e300;
  p.p = 1.0;
  EXPECT_THROW(ode_run({0.0, 1e10, 0.0, 1e10}, p, 0.1, 1.0), BlowupError);
}
