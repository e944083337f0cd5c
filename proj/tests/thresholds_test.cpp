#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "seis/thresholds.hpp"

using namespace seis;

namespace {

ModelParams spreading_params() {
  ModelParams p;
  p.A = 4.0;
  p.alpha = 1.0;
  p.mu1 = p.mu2 = p.mu3 = 0.5;
  p.r1 = p.r2 = 0.2;
  p.beta1 = 1.0;
  p.p = 0.8;
  return p;
}

ModelParams random_params(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  ModelParams p;
  p.A = 0.5 + 3.5 * u(rng);
  p.alpha = 0.1 + 1.9 * u(rng);
  p.mu1 = 0.2 + 1.3 * u(rng);
  p.mu2 = 0.2 + 1.3 * u(rng);
  p.mu3 = 0.2 + 1.3 * u(rng);
  p.r1 = 0.05 + 0.95 * u(rng);
  p.r2 = 0.05 + 0.95 * u(rng);
  p.beta1 = 0.1 + 1.4 * u(rng);
  p.p = u(rng);
  return p;
}

Trajectory synthetic(std::size_t n, double h_start, double h_end, double i_start, double i_end) {
  Trajectory t;
  for (std::size_t k = 0; k < n; ++k) {
    const double f = static_cast<double>(k) / static_cast<double>(n - 1);
    t.times.push_back(10.0 * f);
    t.h_series.push_back(h_start + (h_end - h_start) * f);
    t.sup_I.push_back(i_start * std::pow(i_end / i_start, f));
    t.sup_E.push_back(0.0);
  }
  return t;
}

}  // namespace

TEST(R0, Examples) {
  EXPECT_DOUBLE_EQ(r0_max(ModelParams{}), 0.25);
  EXPECT_NEAR(r0_max(spreading_params()), 80.0 / 7.0, 1e-12);
  EXPECT_NEAR(r0_min(spreading_params()), 80.0 / 7.0, 1e-12);
  // All-compartment variant uses the smallest death rate.
  ModelParams p;
  p.mu2 = 0.5;
  EXPECT_NEAR(r0_max(p, R0MaxVariant::AllCompartments), 0.5 / (0.5 * 1.5), 1e-15);
  EXPECT_NEAR(r0_max(p), 0.5 / 1.5, 1e-15);
}

TEST(R0, MinNeverExceedsMax) {
  std::mt19937_64 rng(21);
  for (int k = 0; k < 500; ++k) {
    ModelParams p = random_params(rng);
    EXPECT_LE(r0_min(p), r0_max(p, R0MaxVariant::AllCompartments) * (1 + 1e-14));
    p.mu1 = p.min_death_rate();
    EXPECT_LE(r0_min(p), r0_max(p) * (1 + 1e-14));
  }
}

TEST(Lambda1, ClosedForms) {
  const double pi = std::numbers::pi;
  EXPECT_NEAR(lambda1_ball(1.0, 1), pi * pi / 4.0, 1e-15);
  EXPECT_NEAR(lambda1_ball(1.0, 3), pi * pi, 1e-14);
  EXPECT_NEAR(lambda1_ball(1.0, 2), 5.783185962946784, 1e-12);
  for (int n : {1, 2, 3, 4})
    EXPECT_NEAR(lambda1_ball(2.5, n), lambda1_ball(1.0, n) / 6.25, 1e-6 * lambda1_ball(1.0, n));
  EXPECT_THROW(lambda1_ball(0.0, 1), DomainError);
}

TEST(Lambda1, DiscreteMatchesClosedForm) {
  for (int n : {1, 3}) {
    const double exact = lambda1_ball(1.0, n);
    EXPECT_LT(std::abs(lambda1_ball_discrete(1.0, n, 2000) - exact) / exact, 1e-6) << n;
  }
  const double j01 = 2.404825557695772768621631879;
  EXPECT_LT(std::abs(lambda1_ball_discrete(1.0, 2, 2000) - j01 * j01) / (j01 * j01), 1e-6);
}

TEST(Lambda1, DiscreteIsSecondOrder) {
  const double exact = lambda1_ball(1.0, 3);
  const double e1 = std::abs(lambda1_ball_discrete(1.0, 3, 101) - exact);
  const double e2 = std::abs(lambda1_ball_discrete(1.0, 3, 201) - exact);
  EXPECT_NEAR(e1 / e2, 4.0, 0.4);
}

TEST(Lambda1, SturmBisectionOnKnownMatrix) {
  // tridiag(-1, 2, -1) of size 10: smallest eigenvalue 2 - 2 cos(pi / 11).
  const std::vector<double> diag(10, 2.0), off(9, -1.0);
  EXPECT_NEAR(smallest_tridiagonal_eigenvalue(diag, off), 2.0 - 2.0 * std::cos(std::numbers::pi / 11.0),
              1e-13);
}

TEST(CriticalRadius, Examples) {
  // g = 0.8 * 8 - 0.7 = 5.7, n = 1: R* = (pi / 2) / sqrt(5.7).
  EXPECT_NEAR(critical_radius(spreading_params()), std::numbers::pi / 2.0 / std::sqrt(5.7), 1e-12);
  EXPECT_NEAR(critical_radius(spreading_params()), 0.658, 5e-4);
  EXPECT_TRUE(std::isinf(critical_radius(ModelParams{})));
  // g = A - mu3 = (pi / 2)^2 with p = alpha = mu1 = d3 = 1 and r2 = 0 gives R* = 1.
  ModelParams p;
  p.p = 1.0;
  p.alpha = 1.0;
  p.mu1 = 1.0;
  p.r2 = 0.0;
  p.mu3 = 0.5;
  p.A = std::pow(std::numbers::pi / 2.0, 2) + 0.5;
  EXPECT_NEAR(critical_radius(p), 1.0, 1e-12);
  // Scales with sqrt(d3).
  p.d3 = 4.0;
  EXPECT_NEAR(critical_radius(p), 2.0, 1e-12);
}

TEST(ThresholdReport, PredictedRegimes) {
  const ThresholdReport v = threshold_report(ModelParams{}, 1.0);
  EXPECT_EQ(v.predicted_regime, Regime::Vanishing);
  EXPECT_FALSE(v.spreading_radius_ok);
  const ThresholdReport s = threshold_report(spreading_params(), 1.0);
  EXPECT_EQ(s.predicted_regime, Regime::Spreading);
  EXPECT_TRUE(s.spreading_radius_ok);
  const ThresholdReport small = threshold_report(spreading_params(), 0.5);
  EXPECT_EQ(small.predicted_regime, Regime::Indeterminate);
  EXPECT_NEAR(small.lambda1_h0, lambda1_ball(0.5, 1), 1e-15);
}

TEST(ThresholdReport, Dichotomy) {
  // The two sufficient conditions are mutually exclusive.
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> h(0.2, 5.0);
  for (int k = 0; k < 1000; ++k) {
    const ModelParams p = random_params(rng);
    const ThresholdReport rep = threshold_report(p, h(rng));
    EXPECT_FALSE(rep.r0_max < 1.0 && rep.r0_min > 1.0);
    if (rep.predicted_regime == Regime::Spreading) {
      EXPECT_GT(rep.r0_min, 1.0);
    }
    if (rep.predicted_regime == Regime::Vanishing) {
      EXPECT_LT(rep.r0_max, 1.0);
    }
  }
}

TEST(ContestedRegion, RequiresSmallDataAndSupercriticalR0) {
  ModelParams p = spreading_params();
  EXPECT_FALSE(contested_region(ModelParams{}, 0.01, 1.0, 0.0, 1e-3));
  p.d1 = p.d2 = p.d3 = 10.0;
  EXPECT_TRUE(contested_region(p, 0.05, 8.0, 0.0, 1e-3));
  EXPECT_FALSE(contested_region(p, 5.0, 8.0, 0.0, 1e-3));
  EXPECT_FALSE(contested_region(p, 0.05, 8.0, 0.0, 0.0));
}

TEST(Classify, SyntheticCases) {
  EXPECT_EQ(classify(synthetic(101, 1.0, 1.001, 1.0, 1e-6)), Regime::Vanishing);
  EXPECT_EQ(classify(synthetic(101, 1.0, 10.0, 1.0, 2.0)), Regime::Spreading);
  // Infection gone but front still moving.
  EXPECT_EQ(classify(synthetic(101, 1.0, 1.5, 1.0, 1e-6)), Regime::Indeterminate);
  // Large front but infection below the persistence floor.
  EXPECT_EQ(classify(synthetic(101, 1.0, 10.0, 1.0, 1e-5)), Regime::Indeterminate);
  EXPECT_EQ(classify(Trajectory{}), Regime::Indeterminate);
  // Explicit tolerances override the defaults.
  ClassifyTolerances tol;
  tol.eps_extinct = 1e-8;
  EXPECT_EQ(classify(synthetic(101, 1.0, 1.001, 1.0, 1e-6), tol), Regime::Indeterminate);
}

TEST(Regime, Names) {
  EXPECT_STREQ(regime_name(Regime::Vanishing), "vanishing");
  EXPECT_STREQ(regime_name(Regime::Spreading), "spreading");
  EXPECT_STREQ(regime_name(Regime::Indeterminate), "indeterminate");
}
