#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "seis/transform.hpp"

using namespace seis;

TEST(XiCutoff, PlateauAndSupport) {
  for (double h : {0.5, 1.0, 3.0}) {
    const CutoffValue at_ref = xi_cutoff(h, h);
    EXPECT_EQ(at_ref.value, 1.0);
    EXPECT_EQ(at_ref.d1, 0.0);
    EXPECT_EQ(at_ref.d2, 0.0);
    const CutoffValue far = xi_cutoff(2.0 * h, h);
    EXPECT_EQ(far.value, 0.0);
    EXPECT_EQ(far.d1, 0.0);
    EXPECT_EQ(far.d2, 0.0);
    EXPECT_EQ(xi_cutoff(0.0, h).value, 0.0);
  }
  EXPECT_THROW(xi_cutoff(1.0, 0.0), DomainError);
}

TEST(XiCutoff, DenseSamplingMeetsConstraints) {
  const double h = 1.7;
  double max_slope = 0.0;
  const int n = 200000;
  double prev = xi_cutoff(0.0, h).value;
  for (int i = 1; i <= n; ++i) {
    const double s = 2.0 * h * i / n;
    const CutoffValue c = xi_cutoff(s, h);
    const double dist = std::abs(s - h);
    if (dist < h / 8.0) {
      ASSERT_EQ(c.value, 1.0) << s;
    }
    if (dist > h / 2.0) {
      ASSERT_EQ(c.value, 0.0) << s;
    }
    ASSERT_GE(c.value, 0.0);
    ASSERT_LE(c.value, 1.0);
    // Monotone on each transition band.
    if (s < h) ASSERT_GE(c.value, prev - 1e-15);
    else ASSERT_LE(c.value, prev + 1e-15);
    prev = c.value;
    max_slope = std::max(max_slope, std::abs(c.d1));
  }
  EXPECT_LT(max_slope * h, 5.0);
  EXPECT_NEAR(max_slope * h, 32.0 / 9.0, 1e-3);
}

TEST(XiCutoff, DerivativesMatchFiniteDifferences) {
  const double h = 1.0, e = 1e-6;
  for (double s : {0.55, 0.6, 0.7, 0.8, 0.86, 1.14, 1.2, 1.3, 1.45}) {
    const CutoffValue c = xi_cutoff(s, h);
    const CutoffValue p = xi_cutoff(s + e, h), m = xi_cutoff(s - e, h);
    EXPECT_NEAR((p.value - m.value) / (2 * e), c.d1, 1e-8) << s;
    EXPECT_NEAR((p.d1 - m.d1) / (2 * e), c.d2, 1e-6) << s;
    EXPECT_NEAR((p.d2 - m.d2) / (2 * e), c.d3, 1e-4) << s;
  }
}

TEST(XiCutoff, ThirdDerivativeContinuousAtBandEnds) {
  // C^3: value and the first three derivatives approach their plateau values
  // at the band endpoints and at the shoulder joints.
  const double h = 1.0;
  for (double edge : {h / 2.0, 7.0 * h / 8.0, 9.0 * h / 8.0, 3.0 * h / 2.0}) {
    for (double eps : {1e-3, 1e-4}) {
      const CutoffValue a = xi_cutoff(edge - eps, h), b = xi_cutoff(edge + eps, h);
      EXPECT_NEAR(a.value, b.value, 10 * eps);
      EXPECT_NEAR(a.d1, b.d1, 1e3 * eps * eps);
      EXPECT_NEAR(a.d2, b.d2, 1e4 * eps);
      EXPECT_NEAR(a.d3, b.d3, 1e6 * eps);
    }
  }
  // Shoulder joints of the ramp slope (a quarter of the band in from each end).
  const double width = 3.0 * h / 8.0, inner = h / 8.0;
  for (double x : {0.25, 0.75}) {
    const double s = h + inner + x * width;
    const CutoffValue a = xi_cutoff(s - 1e-7, h), b = xi_cutoff(s + 1e-7, h);
    EXPECT_NEAR(a.d2, b.d2, 1e-3);
    EXPECT_NEAR(a.d3, b.d3, 1e-1);
  }
}

TEST(StraighteningCoeffs, IdentityCases) {
  const double h = 2.0;
  for (double s : {0.1, 1.0, 1.5, 2.0, 2.3, 5.0}) {
    const StraighteningCoeffs c = straightening_coeffs(h, h, s, 3);
    EXPECT_EQ(c.X, 1.0);
    EXPECT_EQ(c.Y, 0.0);
    EXPECT_EQ(c.W, 0.0);
    EXPECT_EQ(c.Z, xi_cutoff(s, h).value);
  }
  // Outside the support the map is the identity for any admissible h.
  for (double s : {0.2, 0.9, 3.1, 4.0}) {
    const StraighteningCoeffs c = straightening_coeffs(h * 1.1, h, s, 2);
    EXPECT_EQ(c.X, 1.0);
    EXPECT_EQ(c.Y, 0.0);
    EXPECT_EQ(c.Z, 0.0);
    EXPECT_EQ(c.W, 0.0);
  }
}

TEST(StraighteningCoeffs, PlateauValues) {
  const double h_ref = 1.0;
  const StraighteningCoeffs c = straightening_coeffs(h_ref * (1.0 + 1.0 / 16.0), h_ref, h_ref, 1);
  EXPECT_EQ(c.X, 1.0);
  EXPECT_EQ(c.Z, 1.0);
  EXPECT_EQ(c.Y, 0.0);
}

TEST(StraighteningCoeffs, WindowEnforced) {
  EXPECT_NO_THROW(straightening_coeffs(1.125, 1.0, 0.9, 1));
  EXPECT_THROW(straightening_coeffs(1.13, 1.0, 0.9, 1), DiffeomorphismError);
  EXPECT_THROW(straightening_coeffs(0.87, 1.0, 0.9, 1), DiffeomorphismError);
}

TEST(StraighteningCoeffs, ChainRuleOnCubic) {
  // S(r) = r^3 and u(s) = S(r(s)) with r = s + xi(s) (h - h_ref). Then
  //   Delta_r S = X (u_ss + (n-1)/s u_s) + (Y + W) u_s,
  // and with the analytic derivatives of u the identity holds to rounding.
  const double h_ref = 1.3;
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> unif(0.05, 2.0 * h_ref);
  for (int dim : {1, 2, 3}) {
    for (double shift : {-0.999 * h_ref / 8.0, -h_ref / 20.0, h_ref / 16.0, 0.999 * h_ref / 8.0}) {
      const double h = h_ref + shift;
      for (int k = 0; k < 400; ++k) {
        const double s = unif(rng);
        const CutoffValue xi = xi_cutoff(s, h_ref);
        const double r = s + xi.value * shift;
        const double J = 1.0 + xi.d1 * shift;
        const double f1 = 3.0 * r * r, f2 = 6.0 * r;
        const double u_s = f1 * J;
        const double u_ss = f2 * J * J + f1 * xi.d2 * shift;
        const StraighteningCoeffs c = straightening_coeffs(h, h_ref, s, dim);
        const double lhs = c.X * (u_ss + (dim - 1) / s * u_s) + (c.Y + c.W) * u_s;
        const double rhs = f2 + (dim - 1) / r * f1;
        ASSERT_NEAR(lhs, rhs, 1e-12 * std::max(1.0, std::abs(rhs))) << dim << ' ' << shift << ' ' << s;
        // Time derivative at fixed r: s_t = -h' xi / J, so S_t = u_t - h' Z u_s.
        EXPECT_NEAR(c.Z, xi.value / J, 1e-15);
      }
    }
  }
}

TEST(FrontFixing, Examples) {
  FrontFixing f = front_fixing_map(1.0, 1.0, 0.3);
  EXPECT_DOUBLE_EQ(f.r, 0.3);
  EXPECT_DOUBLE_EQ(f.ds_dr, 1.0);
  EXPECT_DOUBLE_EQ(f.ds_dt_over_hprime, -0.3);
  EXPECT_DOUBLE_EQ(front_fixing_map(2.0, 1.0, 1.0).r, 2.0);
  f = front_fixing_map(2.0, 1.0, 0.5);
  EXPECT_DOUBLE_EQ(f.r, 1.0);
  EXPECT_DOUBLE_EQ(f.ds_dr, 0.5);
  EXPECT_THROW(front_fixing_map(0.0, 1.0, 0.5), DomainError);
  EXPECT_THROW(front_fixing_map(-1.0, 1.0, 0.5), DomainError);
}

TEST(FrontFixing, RoundTrip) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> hs(0.01, 100.0), ss(0.0, 1.0);
  for (int k = 0; k < 10000; ++k) {
    const double h_ref = hs(rng), h = hs(rng), s = ss(rng) * h_ref;
    const double back = front_fixing_inverse(h, h_ref, front_fixing_map(h, h_ref, s).r);
    ASSERT_NEAR(back, s, 1e-14 * std::max(1.0, h_ref));
  }
}
