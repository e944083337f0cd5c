#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <vector>

#include "seis/errors.hpp"
#include "seis/model.hpp"
#include "seis/solver.hpp"
#include "seis/stencil.hpp"

namespace seis {

enum class Regime { Vanishing, Spreading, Indeterminate };

inline const char* regime_name(Regime r) {
  switch (r) {
    case Regime::Vanishing: return "vanishing";
    case Regime::Spreading: return "spreading";
    default: return "indeterminate";
  }
}

/// Which death rate enters the upper reproductive number: mu1 alone (the
/// proven form) or the smallest of mu1..mu3.
enum class R0MaxVariant { Susceptible, AllCompartments };

inline double r0_max(const ModelParams& prm, R0MaxVariant variant = R0MaxVariant::Susceptible) {
  const double death = variant == R0MaxVariant::Susceptible ? prm.mu1 : prm.min_death_rate();
  return prm.alpha * prm.A / (death * std::min(prm.r1 + prm.mu2, prm.r2 + prm.mu3));
}

inline double r0_min(const ModelParams& prm) {
  return prm.alpha * prm.A /
         (prm.max_death_rate() * (std::max(prm.r1, prm.r2) + std::max(prm.mu2, prm.mu3)));
}

/// Smallest eigenvalue of a symmetric tridiagonal matrix by Sturm-sequence bisection.
inline double smallest_tridiagonal_eigenvalue(const std::vector<double>& diag,
                                              const std::vector<double>& off) {
  const std::size_t n = diag.size();
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (std::size_t i = 0; i < n; ++i) {
    const double radius = (i > 0 ? std::abs(off[i - 1]) : 0.0) + (i + 1 < n ? std::abs(off[i]) : 0.0);
    lo = std::min(lo, diag[i] - radius);
    hi = std::max(hi, diag[i] + radius);
  }
  // Number of eigenvalues strictly below x.
  const auto count_below = [&](double x) {
    std::size_t count = 0;
    double q = 1.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double b2 = i > 0 ? off[i - 1] * off[i - 1] : 0.0;
      q = diag[i] - x - (i > 0 ? b2 / q : 0.0);
      if (q == 0.0) q = -1e-300;
      if (q < 0.0) ++count;
    }
    return count;
  };
  for (int it = 0; it < 200 && hi - lo > 4.0 * std::numeric_limits<double>::epsilon() * std::max(std::abs(lo), std::abs(hi)); ++it) {
    const double mid = 0.5 * (lo + hi);
    if (count_below(mid) >= 1) hi = mid;
    else lo = mid;
  }
  return 0.5 * (lo + hi);
}

/// Principal eigenvalue of -Delta_r on [0, R) with w_r(0) = 0, w(R) = 0,
/// from the finite-volume radial operator on `nodes` uniform nodes.
inline double lambda1_ball_discrete(double R, int dim_n, std::size_t nodes = 2000) {
  if (!(R > 0.0)) throw DomainError("lambda1_ball: R must be > 0");
  if (dim_n < 1) throw DomainError("lambda1_ball: dim_n must be >= 1");
  if (nodes < 4) throw DomainError("lambda1_ball: too few nodes");
  const double dr = R / static_cast<double>(nodes - 1);
  const std::size_t n = nodes - 1;  // unknowns; the last node is Dirichlet
  std::vector<double> r(nodes);
  for (std::size_t i = 0; i < nodes; ++i) r[i] = static_cast<double>(i) * dr;
  r.back() = R;
  // Symmetric stiffness K and lumped mass V; eigenvalues of V^{-1/2} K V^{-1/2}.
  std::vector<double> vol(n), diag(n, 0.0), off(n > 0 ? n - 1 : 0, 0.0);
  for (std::size_t i = 0; i < n; ++i) vol[i] = control_volume(r, i, dim_n);
  for (std::size_t i = 0; i < n; ++i) {
    const double face = 0.5 * (r[i] + r[i + 1]);
    const double k = std::pow(face, dim_n - 1) / (r[i + 1] - r[i]);
    diag[i] += k;
    if (i + 1 < n) {
      diag[i + 1] += k;
      off[i] = -k / std::sqrt(vol[i] * vol[i + 1]);
    }
  }
  for (std::size_t i = 0; i < n; ++i) diag[i] /= vol[i];
  return smallest_tridiagonal_eigenvalue(diag, off);
}

/// Principal Dirichlet eigenvalue of -Delta on the ball of radius R in
/// dimension dim_n: closed form for dim_n = 1, 2, 3, discrete otherwise.
inline double lambda1_ball(double R, int dim_n) {
  if (!(R > 0.0)) throw DomainError("lambda1_ball: R must be > 0");
  constexpr double j01 = 2.404825557695772768621631879;  // first zero of J0
  switch (dim_n) {
    case 1: return std::pow(std::numbers::pi / (2.0 * R), 2);
    case 2: return std::pow(j01 / R, 2);
    case 3: return std::pow(std::numbers::pi / R, 2);
    default: return lambda1_ball_discrete(R, dim_n);
  }
}

/// Net growth rate of I near the disease-free state, p alpha A / mu1 - r2 - mu3.
inline double infection_growth_rate(const ModelParams& prm) {
  return prm.p * prm.alpha * prm.A / prm.mu1 - prm.r2 - prm.mu3;
}

/// Radius above which the infected region is large enough for I to grow:
/// the R solving g = d lambda1(R); +inf when g <= 0.
inline double critical_radius(const ModelParams& prm) {
  const double g = infection_growth_rate(prm);
  if (!(g > 0.0)) return std::numeric_limits<double>::infinity();
  return std::sqrt(prm.d3 * lambda1_ball(1.0, prm.dim_n) / g);
}

/// True when the hypotheses of the small-data vanishing result hold although
/// r0_min > 1: h0 <= sqrt(d / (16 k0)) and max(beta_front, mu_front) <= 3d / (4M).
/// Such runs contradict the large-radius spreading result when h0 also exceeds
/// the critical radius; the classifier logs them instead of trusting either side.
inline bool contested_region(const ModelParams& prm, double h0, double sup_S0, double sup_E0,
                             double sup_I0) {
  if (!(r0_min(prm) > 1.0)) return false;
  const double C = std::max(sup_S0 + sup_E0 + sup_I0, prm.A / prm.max_death_rate());
  const double k0 = prm.alpha * C - std::max(prm.r1, prm.r2) - std::max(prm.mu2, prm.mu3);
  const double M = 2.0 / 3.0 * (sup_E0 + sup_I0);
  if (!(k0 > 0.0) || !(M > 0.0)) return false;
  const double d = prm.d3;
  return h0 <= std::sqrt(d / (16.0 * k0)) && std::max(prm.beta_front, prm.mu_front) <= 3.0 * d / (4.0 * M);
}

struct ThresholdReport {
  double r0_max = 0.0;
  double r0_min = 0.0;
  double lambda1_h0 = 0.0;
  double critical_radius = 0.0;
  bool spreading_radius_ok = false;
  bool contested = false;
  Regime predicted_regime = Regime::Indeterminate;
};

inline ThresholdReport threshold_report(const ModelParams& prm, double h0, double sup_S0 = 0.0,
                                        double sup_E0 = 0.0, double sup_I0 = 0.0) {
  ThresholdReport rep;
  rep.r0_max = r0_max(prm);
  rep.r0_min = r0_min(prm);
  rep.lambda1_h0 = lambda1_ball(h0, prm.dim_n);
  rep.critical_radius = critical_radius(prm);
  rep.spreading_radius_ok = h0 > rep.critical_radius;
  rep.contested = contested_region(prm, h0, sup_S0, sup_E0, sup_I0) && rep.spreading_radius_ok;
  if (rep.r0_max < 1.0) rep.predicted_regime = Regime::Vanishing;
  else if (rep.r0_min > 1.0 && rep.spreading_radius_ok) rep.predicted_regime = Regime::Spreading;
  return rep;
}

/// Decision thresholds for `classify`. Non-positive or NaN entries fall back to
/// the scale-free defaults relative to the initial sup of I.
struct ClassifyTolerances {
  double eps_extinct = std::numeric_limits<double>::quiet_NaN();
  double eps_front = 0.02;
  double eps_persist = std::numeric_limits<double>::quiet_NaN();
};

inline Regime classify(const Trajectory& traj, const ClassifyTolerances& tol = {}) {
  const std::size_t n = traj.size();
  if (n == 0) return Regime::Indeterminate;
  const double h0 = traj.h_series.front();
  const double i0 = traj.sup_I.front();
  const double eps_extinct = tol.eps_extinct > 0.0 ? tol.eps_extinct : 1e-4 * i0;
  const double eps_persist = tol.eps_persist > 0.0 ? tol.eps_persist : 1e-3 * i0;
  const double t0 = traj.times.front(), t1 = traj.times.back();
  const auto first_at = [&](double t) {
    return static_cast<std::size_t>(
        std::lower_bound(traj.times.begin(), traj.times.end(), t) - traj.times.begin());
  };

  const std::size_t half = std::min(first_at(t0 + 0.5 * (t1 - t0)), n - 1);
  const double growth = traj.h_series.back() - traj.h_series[half];
  const double infected = traj.sup_E.back() + traj.sup_I.back();
  if (infected < eps_extinct && growth < tol.eps_front * h0) return Regime::Vanishing;

  const std::size_t quarter = std::min(first_at(t0 + 0.75 * (t1 - t0)), n - 1);
  double floor_I = std::numeric_limits<double>::infinity();
  for (std::size_t i = quarter; i < n; ++i) floor_I = std::min(floor_I, traj.sup_I[i]);
  if (traj.h_series.back() > 4.0 * h0 && floor_I > eps_persist) return Regime::Spreading;
  return Regime::Indeterminate;
}

}  // namespace seis
