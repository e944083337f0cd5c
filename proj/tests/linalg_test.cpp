#include <gtest/gtest.h>

#include <random>
#include <vector>

#include "seis/linalg.hpp"

using namespace seis;

TEST(Thomas, SolvesDiagonallyDominantSystem) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const std::size_t n = 50;
  Tridiagonal m(n);
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) {
    m.sub[i] = u(rng);
    m.super[i] = u(rng);
    m.diag[i] = 3.0 + u(rng);
    x[i] = u(rng);
  }
  const std::vector<double> b = m.apply(x);
  const std::vector<double> y = solve_tridiagonal(m, b);
  for (std::size_t i = 0; i < n; ++i) EXPECT_NEAR(y[i], x[i], 1e-13);
}

TEST(Thomas, ZeroPivotIsRejected) {
  Tridiagonal m(2);
  m.diag = {0.0, 1.0};
  const std::vector<double> b{1.0, 1.0};
  EXPECT_THROW(solve_tridiagonal(m, b), StepRejectedError);
}

TEST(BandLU, MatchesDenseSolveWithPivoting) {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const std::size_t n = 40;
  BandMatrix a(n, 2, 2);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = (i >= 2 ? i - 2 : 0); j <= std::min(n - 1, i + 2); ++j)
      a.set(i, j, u(rng) + (i == j ? 0.01 : 0.0));  // weak diagonal forces row swaps
  std::vector<double> x(n);
  for (double& v : x) v = u(rng);
  const std::vector<double> b = a.apply(x);
  const std::vector<double> y = BandLU(a).solve(b);
  for (std::size_t i = 0; i < n; ++i) EXPECT_NEAR(y[i], x[i], 1e-9);
}

TEST(BandLU, SingularMatrixThrows) {
  BandMatrix a(3, 1, 1);
  a.set(0, 0, 1.0);
  a.set(0, 1, 2.0);
  a.set(1, 0, 2.0);
  a.set(1, 1, 4.0);
  a.set(2, 2, 1.0);
  EXPECT_THROW(BandLU{a}, SingularShiftError);
}

TEST(BandMatrix, OutOfBandWriteIsAnError) {
  BandMatrix a(5, 1, 1);
  EXPECT_THROW(a.set(0, 3, 1.0), DomainError);
  EXPECT_EQ(a.get(0, 3), 0.0);
}
