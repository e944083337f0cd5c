#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "seis/model.hpp"

using namespace seis;

namespace {

ModelParams all_ones() {
  ModelParams p;
  p.A = p.alpha = p.mu1 = p.mu2 = p.mu3 = p.r1 = p.r2 = p.beta1 = 1.0;
  p.d1 = p.d2 = p.d3 = p.beta_front = p.mu_front = 1.0;
  p.p = 0.5;
  return p;
}

}  // namespace

TEST(ValidateParams, AcceptsAllOnes) {
  const CheckedParams c = validate_params(all_ones());
  EXPECT_EQ(c.params, all_ones());
  EXPECT_TRUE(c.warnings.empty());
}

TEST(ValidateParams, ZeroAlphaNamesTheField) {
  ModelParams p = all_ones();
  p.alpha = 0.0;
  try {
    validate_params(p);
    FAIL() << "expected ParamDomainError";
  } catch (const ParamDomainError& e) {
    EXPECT_EQ(e.field(), "alpha");
  }
}

TEST(ValidateParams, RejectsOutOfRangeFields) {
  const auto field_of = [](ModelParams p) {
    try {
      validate_params(p);
    } catch (const ParamDomainError& e) {
      return e.field();
    }
    return std::string("accepted");
  };
  ModelParams p = all_ones();
  p.p = 1.5;
  EXPECT_EQ(field_of(p), "p");
  p = all_ones();
  p.mu3 = -1.0;
  EXPECT_EQ(field_of(p), "mu3");
  p = all_ones();
  p.d2 = NAN;
  EXPECT_EQ(field_of(p), "d2");
  p = all_ones();
  p.dim_n = 0;
  EXPECT_EQ(field_of(p), "dim_n");
  p = all_ones();
  p.p = 0.0;
  EXPECT_EQ(field_of(p), "accepted");
  p.p = 1.0;
  EXPECT_EQ(field_of(p), "accepted");
}

TEST(ValidateParams, UnequalDiffusionIsAWarning) {
  ModelParams p = all_ones();
  p.d3 = 2.0;
  const CheckedParams c = validate_params(p);
  EXPECT_TRUE(c.has_warning(ParamWarning::UnequalDiffusion));
  EXPECT_FALSE(p.equal_diffusion());
  p.d3 = 1.0 + 1e-14;
  EXPECT_TRUE(p.equal_diffusion());
}

TEST(Grid, LayoutAndValidation) {
  const Grid g = make_grid(2.0, 17, 8.0, 5);
  EXPECT_DOUBLE_EQ(g.ds(), 0.125);
  EXPECT_EQ(g.composite_size(), 21u);
  const auto r = g.composite_r(3.0);
  ASSERT_EQ(r.size(), 21u);
  EXPECT_DOUBLE_EQ(r[16], 3.0);
  EXPECT_DOUBLE_EQ(r.back(), 8.0);
  EXPECT_DOUBLE_EQ(r[18], 5.5);
  for (std::size_t i = 1; i < r.size(); ++i) EXPECT_GT(r[i], r[i - 1]);
  EXPECT_THROW(make_grid(1.0, 15, 8.0, 8), DomainError);
  EXPECT_THROW(make_grid(1.0, 16, 3.9, 8), DomainError);
  EXPECT_THROW(make_grid(0.0, 16, 8.0, 8), DomainError);
  EXPECT_THROW(make_grid(1.0, 16, 8.0, 1), DomainError);
}

TEST(DefaultProfiles, CosineSquaredValues) {
  const ModelParams p;
  EXPECT_DOUBLE_EQ(cos2_bump(1.0, 1.0, 0.0), 1.0);
  EXPECT_DOUBLE_EQ(cos2_bump(1.0, 1.0, 1.0), 0.0);
  EXPECT_NEAR(cos2_bump(1.0, 1.0, 0.5), 0.5, 1e-15);

  const Grid g = make_grid(1.0, 17, 4.0, 9);
  const InitialData init = default_initial_profiles(p, 1.0, g, 0.0, 1.0);
  EXPECT_DOUBLE_EQ(init.I0.front(), 1.0);
  EXPECT_EQ(init.I0.back(), 0.0);
  EXPECT_NEAR(init.I0[8], 0.5, 1e-15);  // r = 0.5
  for (double s : init.S0) EXPECT_DOUBLE_EQ(s, p.A / p.mu1);
  for (double e : init.E0) EXPECT_EQ(e, 0.0);
  EXPECT_NO_THROW(validate_initial_data(init, g));
}

TEST(DefaultProfiles, AmplitudeChecks) {
  const ModelParams p;
  const Grid g = make_grid(1.0, 17, 4.0, 9);
  EXPECT_THROW(default_initial_profiles(p, 1.0, g, 0.0, 0.0), AmplitudeError);
  EXPECT_THROW(default_initial_profiles(p, 1.0, g, 0.0, -1.0), AmplitudeError);
  EXPECT_THROW(default_initial_profiles(p, 1.0, g, -0.1, 1.0), AmplitudeError);
}

TEST(InitialData, RejectsInadmissibleProfiles) {
  const ModelParams p;
  const Grid g = make_grid(1.0, 17, 4.0, 9);
  InitialData init = default_initial_profiles(p, 1.0, g, 0.2, 1.0);
  InitialData bad = init;
  bad.I0.back() = 0.1;
  EXPECT_THROW(validate_initial_data(bad, g), DomainError);
  bad = init;
  bad.I0[3] = 0.0;
  EXPECT_THROW(validate_initial_data(bad, g), DomainError);
  bad = init;
  bad.S0[2] = -1e-3;
  EXPECT_THROW(validate_initial_data(bad, g), DomainError);
  bad = init;
  bad.E0.pop_back();
  EXPECT_THROW(validate_initial_data(bad, g), DomainError);
  // The infection-free case is admissible.
  bad = init;
  std::fill(bad.E0.begin(), bad.E0.end(), 0.0);
  std::fill(bad.I0.begin(), bad.I0.end(), 0.0);
  EXPECT_NO_THROW(validate_initial_data(bad, g));
}

TEST(DefaultProfiles, RandomAmplitudesSatisfyInvariants) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> amp(0.0, 3.0), rad(0.1, 5.0);
  const ModelParams p;
  for (int k = 0; k < 100; ++k) {
    const double h0 = rad(rng);
    const Grid g = make_grid(h0, 33, 4.0 * h0, 9);
    const InitialData init = default_initial_profiles(p, h0, g, amp(rng), amp(rng) + 1e-3);
    EXPECT_NO_THROW(validate_initial_data(init, g));
  }
}

TEST(DefaultProfiles, ZeroSlopeAtOrigin) {
  // One-sided difference (I1 - I0) / ds shrinks like ds (second-order flat).
  const ModelParams p;
  double prev = 0.0;
  for (std::size_t m : {33u, 65u, 129u}) {
    const Grid g = make_grid(1.0, m, 4.0, 9);
    const InitialData init = default_initial_profiles(p, 1.0, g);
    const double slope = std::abs(init.I0[1] - init.I0[0]) / g.ds();
    EXPECT_LT(slope, 3.0 * g.ds());
    if (prev > 0.0) {
      EXPECT_NEAR(prev / slope, 2.0, 0.1);
    }
    prev = slope;
  }
}
