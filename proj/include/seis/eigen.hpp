#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <random>
#include <span>
#include <vector>

#include "seis/errors.hpp"
#include "seis/linalg.hpp"
#include "seis/model.hpp"
#include "seis/solver.hpp"
#include "seis/stencil.hpp"

namespace seis {

/// Coefficients of the linearization about the disease-free state:
///   phi_t = d2 Lap phi + a11 phi + a12 psi      (E)
///   psi_t = d3 Lap psi + a22 phi + a21 psi      (I)
struct LinearizationMatrix {
  double a11 = 0.0, a12 = 0.0, a21 = 0.0, a22 = 0.0;
};

inline LinearizationMatrix linearization_matrix(const ModelParams& prm) {
  const double s0 = prm.A / prm.mu1;
  return {-(prm.beta1 + prm.r1 + prm.mu2), (1.0 - prm.p) * prm.alpha * s0,
          prm.p * prm.alpha * s0 - (prm.r2 + prm.mu3), prm.beta1};
}

/// a11 a21 - a12 a22; nonnegative exactly when the weighted linear operator
/// is negative semi-definite for every domain.
inline double semidefinite_margin(const ModelParams& prm) {
  const LinearizationMatrix a = linearization_matrix(prm);
  return a.a11 * a.a21 - a.a12 * a.a22;
}

/// Eigenvalues of the 2x2 reaction matrix [[a11, a12], [a22, a21]], ascending.
inline std::array<double, 2> reaction_eigenvalues(const LinearizationMatrix& a) {
  const double tr = a.a11 + a.a21, det = a.a11 * a.a21 - a.a12 * a.a22;
  const double disc = std::sqrt(std::max(0.0, tr * tr / 4.0 - det));
  return {tr / 2.0 - disc, tr / 2.0 + disc};
}

/// Uniform radial mesh on [0, h_inf] with `nodes` nodes; the last node is Dirichlet.
struct EigenMesh {
  std::vector<double> r;
  std::vector<double> volume;     // control volumes of the unknown nodes
  std::vector<double> face_coef;  // face weight r_f^{n-1} / dr between unknowns i, i+1 (last: to the boundary)

  std::size_t unknowns() const { return volume.size(); }
};

inline EigenMesh make_eigen_mesh(double h_inf, std::size_t nodes, int dim_n) {
  if (!(h_inf > 0.0) || !std::isfinite(h_inf)) throw DomainError("eigen: h_inf must be > 0");
  if (nodes < 8) throw DomainError("eigen: need at least 8 nodes");
  EigenMesh m;
  m.r.resize(nodes);
  const double dr = h_inf / static_cast<double>(nodes - 1);
  for (std::size_t i = 0; i < nodes; ++i) m.r[i] = static_cast<double>(i) * dr;
  m.r.back() = h_inf;
  for (std::size_t i = 0; i + 1 < nodes; ++i) {
    m.volume.push_back(control_volume(m.r, i, dim_n));
    const double face = 0.5 * (m.r[i] + m.r[i + 1]);
    m.face_coef.push_back(std::pow(face, dim_n - 1) / (m.r[i + 1] - m.r[i]));
  }
  return m;
}

/// Coefficients of a two-field quadratic form
///   sum_faces w_f (gphi (dphi)^2 + gpsi (dpsi)^2) + sum_i V_i (pp phi^2 + pq phi psi + qq psi^2).
struct QuadraticCoeffs {
  double gphi = 0.0, gpsi = 0.0, pp = 0.0, pq = 0.0, qq = 0.0;
};

namespace detail {

inline void check_weights(const LinearizationMatrix& a) {
  if (!(a.a12 > 0.0)) throw WeightSignError("energy weight a12 must be > 0");
  if (!(a.a22 > 0.0)) throw WeightSignError("energy weight a22 must be > 0");
}

// Accept fields on all mesh nodes (last value must vanish) or on the unknowns only.
inline std::span<const double> unknown_part(std::span<const double> f, const EigenMesh& mesh) {
  const std::size_t n = mesh.unknowns();
  if (f.size() == n) return f;
  if (f.size() == n + 1) {
    if (std::abs(f[n]) > 1e-12 * (1.0 + std::abs(f[0])))
      throw DomainError("eigen: fields must vanish at h_inf");
    return f.first(n);
  }
  throw DomainError("eigen: field length does not match the mesh");
}

}  // namespace detail

inline double quadratic_energy(std::span<const double> phi, std::span<const double> psi,
                               const EigenMesh& mesh, const QuadraticCoeffs& c) {
  const auto p = detail::unknown_part(phi, mesh), q = detail::unknown_part(psi, mesh);
  const std::size_t n = mesh.unknowns();
  double grad = 0.0, zeroth = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dp = (i + 1 < n ? p[i + 1] : 0.0) - p[i];
    const double dq = (i + 1 < n ? q[i + 1] : 0.0) - q[i];
    grad += mesh.face_coef[i] * (c.gphi * dp * dp + c.gpsi * dq * dq);
    zeroth += mesh.volume[i] * (c.pp * p[i] * p[i] + c.pq * p[i] * q[i] + c.qq * q[i] * q[i]);
  }
  return grad + zeroth;
}

/// The energy functional with its stated sign convention:
///   int d2 a22 |grad phi|^2 + d3 a12 |grad psi|^2 + a11 a22 phi^2 + 2 a12 a22 phi psi + a12 a21 psi^2
/// (radial measure r^{n-1} dr, gradients on cell faces).
inline double energy_value(std::span<const double> phi, std::span<const double> psi,
                           const ModelParams& prm, double h_inf, std::size_t nodes) {
  const LinearizationMatrix a = linearization_matrix(prm);
  detail::check_weights(a);
  const EigenMesh mesh = make_eigen_mesh(h_inf, nodes, prm.dim_n);
  return quadratic_energy(phi, psi, mesh,
                          {prm.d2 * a.a22, prm.d3 * a.a12, a.a11 * a.a22, 2.0 * a.a12 * a.a22,
                           a.a12 * a.a21});
}

/// Energy of the weighted decay operator (zeroth-order signs opposite to
/// `energy_value`). Its Rayleigh quotient is what the minimizer works on.
inline QuadraticCoeffs decay_energy_coeffs(const ModelParams& prm, bool cross_coupling = true) {
  const LinearizationMatrix a = linearization_matrix(prm);
  return {prm.d2 * a.a22, prm.d3 * a.a12, -a.a11 * a.a22,
          cross_coupling ? -2.0 * a.a12 * a.a22 : 0.0, -a.a12 * a.a21};
}

struct EigenOptions {
  bool cross_coupling = true;  // false zeroes the phi-psi coupling
  std::size_t max_iterations = 2000;
  double tolerance = 1e-10;  // relative residual target
};

/// Symmetrized two-field operator on the interleaved unknowns (phi_0, psi_0, phi_1, ...):
///   [[a22 (d2 K0 - a11 B), -a12 a22 B], [-a12 a22 B, a12 (d3 K0 - a21 B)]]
/// with K0 the radial stiffness and B the lumped mass. `weights` replaces (a22, a12).
inline BandMatrix assemble_operator(const ModelParams& prm, const EigenMesh& mesh, double w_phi,
                                    double w_psi, double cross) {
  const LinearizationMatrix a = linearization_matrix(prm);
  const std::size_t n = mesh.unknowns();
  BandMatrix K(2 * n, 2, 2);
  for (std::size_t i = 0; i < n; ++i) {
    const double left = i > 0 ? mesh.face_coef[i - 1] : 0.0;
    const double stiff = left + mesh.face_coef[i];
    const std::size_t ip = 2 * i, iq = 2 * i + 1;
    K.set(ip, ip, w_phi * (prm.d2 * stiff - a.a11 * mesh.volume[i]));
    K.set(iq, iq, w_psi * (prm.d3 * stiff - a.a21 * mesh.volume[i]));
    K.set(ip, iq, -cross * mesh.volume[i]);
    K.set(iq, ip, -cross * mesh.volume[i]);
    if (i + 1 < n) {
      const double k = mesh.face_coef[i];
      K.set(ip, ip + 2, -w_phi * prm.d2 * k);
      K.set(ip + 2, ip, -w_phi * prm.d2 * k);
      K.set(iq, iq + 2, -w_psi * prm.d3 * k);
      K.set(iq + 2, iq, -w_psi * prm.d3 * k);
    }
  }
  return K;
}

inline BandMatrix symmetrized_operator(const ModelParams& prm, const EigenMesh& mesh,
                                       bool cross_coupling = true) {
  const LinearizationMatrix a = linearization_matrix(prm);
  return assemble_operator(prm, mesh, a.a22, a.a12, cross_coupling ? a.a12 * a.a22 : 0.0);
}

/// Unsymmetrized decay operator -J (mass-lumped, interleaved unknowns):
///   [[d2 B^-1 K0 - a11, -a12], [-a22, d3 B^-1 K0 - a21]].
inline BandMatrix decay_operator(const ModelParams& prm, const EigenMesh& mesh) {
  const LinearizationMatrix a = linearization_matrix(prm);
  const std::size_t n = mesh.unknowns();
  BandMatrix L(2 * n, 2, 2);
  for (std::size_t i = 0; i < n; ++i) {
    const double left = i > 0 ? mesh.face_coef[i - 1] : 0.0;
    const double v = mesh.volume[i];
    const std::size_t ip = 2 * i, iq = 2 * i + 1;
    L.set(ip, ip, prm.d2 * (left + mesh.face_coef[i]) / v - a.a11);
    L.set(iq, iq, prm.d3 * (left + mesh.face_coef[i]) / v - a.a21);
    L.set(ip, iq, -a.a12);
    L.set(iq, ip, -a.a22);
    if (i > 0) {
      L.set(ip, ip - 2, -prm.d2 * left / v);
      L.set(iq, iq - 2, -prm.d3 * left / v);
    }
    if (i + 1 < n) {
      L.set(ip, ip + 2, -prm.d2 * mesh.face_coef[i] / v);
      L.set(iq, iq + 2, -prm.d3 * mesh.face_coef[i] / v);
    }
  }
  return L;
}

struct EigenResult {
  std::vector<double> r;  // mesh nodes, h_inf last
  double lambda1 = 0.0, lambda2 = 0.0;
  std::vector<double> phi1, psi1;  // on all nodes, zero at h_inf, int (phi^2 + psi^2) = 1
  double rayleigh_value = 0.0;     // minimum of E / (2 int (phi^2 + psi^2))
  double residual = 0.0;           // relative Euler-Lagrange residual of the principal pair
  std::size_t iterations = 0;
  // Decay rates of the unsymmetrized linearization (filled by direct_eigensolve).
  double decay_lambda1 = std::numeric_limits<double>::quiet_NaN();
  double decay_lambda2 = std::numeric_limits<double>::quiet_NaN();
  std::vector<double> decay_phi1, decay_psi1;
  double decay_residual = std::numeric_limits<double>::quiet_NaN();
};

namespace detail {

using Vec = std::vector<double>;

inline double mdot(const Vec& x, const Vec& y, const Vec& mass) {
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) s += x[i] * mass[i] * y[i];
  return s;
}

inline void axpy(double a, const Vec& x, Vec& y) {
  for (std::size_t i = 0; i < y.size(); ++i) y[i] += a * x[i];
}

inline void project_out(Vec& x, const std::vector<Vec>& locked, const Vec& mass) {
  for (const Vec& q : locked) axpy(-mdot(q, x, mass), q, x);
}

inline double normalize(Vec& x, const Vec& mass) {
  const double nrm = std::sqrt(mdot(x, x, mass));
  if (nrm > 0.0)
    for (double& v : x) v /= nrm;
  return nrm;
}

// ||M^{-1}(K q - mu M q)||_M for M-normalized q.
inline double pencil_residual(const BandMatrix& K, const Vec& mass, const Vec& q, double mu) {
  const Vec kq = K.apply(q);
  double s = 0.0;
  for (std::size_t i = 0; i < q.size(); ++i) {
    const double ri = kq[i] - mu * mass[i] * q[i];
    s += ri * ri / mass[i];
  }
  return std::sqrt(s);
}

// Cyclic Jacobi for a small symmetric matrix; returns (eigenvalues, eigenvectors as columns).
inline void jacobi_eigen(std::vector<std::vector<double>> a, std::vector<double>& evals,
                         std::vector<std::vector<double>>& evecs) {
  const std::size_t n = a.size();
  evecs.assign(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i) evecs[i][i] = 1.0;
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) off += a[i][j] * a[i][j];
    if (off < 1e-300) break;
    for (std::size_t p = 0; p < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) {
        if (a[p][q] == 0.0) continue;
        const double theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
        const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0), s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = a[k][p], akq = a[k][q];
          a[k][p] = c * akp - s * akq;
          a[k][q] = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = a[p][k], aqk = a[q][k];
          a[p][k] = c * apk - s * aqk;
          a[q][k] = s * apk + c * aqk;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double vkp = evecs[k][p], vkq = evecs[k][q];
          evecs[k][p] = c * vkp - s * vkq;
          evecs[k][q] = s * vkp + c * vkq;
        }
      }
  }
  evals.resize(n);
  for (std::size_t i = 0; i < n; ++i) evals[i] = a[i][i];
}

// Lower bound on the spectrum of (K, M) where K = (PSD stiffness) + Z (x) B and
// M = W (x) B: the smallest eigenvalue of the 2x2 pencil (Z, W).
inline double pencil_lower_bound(double z11, double z12, double z22, double w1, double w2) {
  // det(Z - t W) = 0
  const double qa = w1 * w2, qb = -(z11 * w2 + z22 * w1), qc = z11 * z22 - z12 * z12;
  const double disc = std::sqrt(std::max(0.0, qb * qb - 4.0 * qa * qc));
  return (-qb - disc) / (2.0 * qa);
}

struct Pair {
  double value;
  Vec vec;
  double residual;
  std::size_t iterations;
};

// Lowest `count` eigenpairs of the symmetric-definite pencil (K, diag(mass)) by
// shifted inverse iteration from a strict lower bound, deflated against the
// pairs already found, then polished with Rayleigh-quotient shifts.
inline std::vector<Pair> lowest_pairs(const BandMatrix& K, const Vec& mass, double lower_bound,
                                      std::size_t count, double tol, std::size_t max_it) {
  const std::size_t n = mass.size();
  std::vector<Pair> out;
  std::vector<Vec> locked;
  std::mt19937_64 rng(20240611);
  std::uniform_real_distribution<double> unif(0.5, 1.5);

  const auto factor = [&](double sigma) {
    for (int attempt = 0; attempt < 8; ++attempt) {
      BandMatrix S = K;
      for (std::size_t i = 0; i < n; ++i) S.add(i, i, -sigma * mass[i]);
      try {
        return BandLU(std::move(S));
      } catch (const SingularShiftError&) {
        sigma -= 1e-9 * std::max(1.0, std::abs(sigma)) * (attempt + 1);
      }
    }
    throw SingularShiftError("inverse iteration: shift stays singular");
  };

  for (std::size_t k = 0; k < count; ++k) {
    Vec q(n);
    for (double& v : q) v = unif(rng);
    project_out(q, locked, mass);
    normalize(q, mass);

    double sigma = lower_bound - std::max(1.0, 0.1 * std::abs(lower_bound));
    BandLU lu = factor(sigma);
    const auto rayleigh = [&](const Vec& x) {
      const Vec kx = K.apply(x);
      return std::inner_product(x.begin(), x.end(), kx.begin(), 0.0);
    };
    double mu = rayleigh(q);
    double res = pencil_residual(K, mass, q, mu);
    const double scale = std::max(1.0, std::abs(mu));
    std::size_t it = 0;
    bool polishing = false;
    double prev_mu = mu;
    for (; it < max_it && res > tol * std::max(1.0, std::abs(mu)); ++it) {
      Vec mq(n);
      for (std::size_t i = 0; i < n; ++i) mq[i] = mass[i] * q[i];
      q = lu.solve(mq);
      project_out(q, locked, mass);
      if (!(normalize(q, mass) > 0.0)) throw NonConvergenceError("inverse iteration collapsed", res);
      mu = rayleigh(q);
      res = pencil_residual(K, mass, q, mu);
      // Switch to Rayleigh-quotient shifts once the estimate has settled.
      if (!polishing && std::abs(mu - prev_mu) < 1e-7 * std::max(1.0, std::abs(mu)) && res < 1e-3 * scale)
        polishing = true;
      if (polishing) lu = factor(mu - 1e-13 * std::max(1.0, std::abs(mu)));
      prev_mu = mu;
    }
    if (res > tol * std::max(1.0, std::abs(mu)))
      throw NonConvergenceError("inverse iteration did not converge", res);
    locked.push_back(q);
    out.push_back({mu, q, res / std::max(1.0, std::abs(mu)), it});
  }
  return out;
}

inline void split_fields(const Vec& q, std::vector<double>& phi, std::vector<double>& psi) {
  const std::size_t n = q.size() / 2;
  phi.assign(n + 1, 0.0);
  psi.assign(n + 1, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    phi[i] = q[2 * i];
    psi[i] = q[2 * i + 1];
  }
}

inline void fix_sign(Vec& q) {
  const double s = std::accumulate(q.begin(), q.end(), 0.0);
  if (s < 0.0)
    for (double& v : q) v = -v;
}

inline Vec interleaved_mass(const EigenMesh& mesh, double w_phi, double w_psi) {
  Vec m(2 * mesh.unknowns());
  for (std::size_t i = 0; i < mesh.unknowns(); ++i) {
    m[2 * i] = w_phi * mesh.volume[i];
    m[2 * i + 1] = w_psi * mesh.volume[i];
  }
  return m;
}

}  // namespace detail

/// Minimizes the Rayleigh quotient E_decay[phi, psi] / (2 int (phi^2 + psi^2))
/// over fields with phi = psi = 0 at h_inf, by preconditioned steepest descent
/// with exact line search in span{q, g, previous direction}. The second pair is
/// found the same way in the orthogonal complement of the first. lambda1 and
/// lambda2 are twice the quotient minima.
inline EigenResult rayleigh_minimize(const ModelParams& prm, std::size_t nodes, double h_inf,
                                     std::span<const double> seed_phi = {},
                                     std::span<const double> seed_psi = {},
                                     const EigenOptions& opt = {}) {
  using detail::Vec;
  const LinearizationMatrix a = linearization_matrix(prm);
  detail::check_weights(a);
  const EigenMesh mesh = make_eigen_mesh(h_inf, nodes, prm.dim_n);
  const std::size_t n = mesh.unknowns(), N = 2 * n;
  const BandMatrix K = symmetrized_operator(prm, mesh, opt.cross_coupling);
  const Vec mass = detail::interleaved_mass(mesh, 1.0, 1.0);

  // Preconditioner: decoupled stiffness blocks plus a positive mass shift.
  const double zmin = detail::pencil_lower_bound(-a.a11 * a.a22, opt.cross_coupling ? -a.a12 * a.a22 : 0.0,
                                                 -a.a12 * a.a21, 1.0, 1.0);
  const double tau = 1.0 + std::abs(zmin);
  Tridiagonal Tphi(n), Tpsi(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double left = i > 0 ? mesh.face_coef[i - 1] : 0.0;
    const double stiff = left + mesh.face_coef[i];
    Tphi.diag[i] = a.a22 * prm.d2 * stiff + tau * mesh.volume[i];
    Tpsi.diag[i] = a.a12 * prm.d3 * stiff + tau * mesh.volume[i];
    if (i > 0) {
      Tphi.sub[i] = -a.a22 * prm.d2 * left;
      Tpsi.sub[i] = -a.a12 * prm.d3 * left;
    }
    if (i + 1 < n) {
      Tphi.super[i] = -a.a22 * prm.d2 * mesh.face_coef[i];
      Tpsi.super[i] = -a.a12 * prm.d3 * mesh.face_coef[i];
    }
  }
  const auto precondition = [&](const Vec& r) {
    Vec rp(n), rq(n), out(N);
    for (std::size_t i = 0; i < n; ++i) {
      rp[i] = r[2 * i];
      rq[i] = r[2 * i + 1];
    }
    const Vec zp = solve_tridiagonal(Tphi, rp), zq = solve_tridiagonal(Tpsi, rq);
    for (std::size_t i = 0; i < n; ++i) {
      out[2 * i] = zp[i];
      out[2 * i + 1] = zq[i];
    }
    return out;
  };
  const auto quotient = [&](const Vec& x) {
    const Vec kx = K.apply(x);
    return std::inner_product(x.begin(), x.end(), kx.begin(), 0.0) / detail::mdot(x, x, mass);
  };

  Vec seed(N, 1.0);
  if (!seed_phi.empty() || !seed_psi.empty()) {
    const auto sp = detail::unknown_part(seed_phi, mesh), sq = detail::unknown_part(seed_psi, mesh);
    for (std::size_t i = 0; i < n; ++i) {
      seed[2 * i] = sp[i];
      seed[2 * i + 1] = sq[i];
    }
  }

  std::vector<Vec> locked;
  std::vector<double> values;
  double principal_residual = 0.0;
  std::size_t total_it = 0;
  for (int k = 0; k < 2; ++k) {
    Vec q = seed;
    detail::project_out(q, locked, mass);
    if (!(detail::normalize(q, mass) > 1e-300)) {
      q.assign(N, 0.0);
      for (std::size_t i = 0; i < N; ++i) q[i] = std::sin(0.7 * static_cast<double>(i) + 0.3);
      detail::project_out(q, locked, mass);
      detail::normalize(q, mass);
    }
    double mu = quotient(q);
    Vec dir;
    double res = std::numeric_limits<double>::infinity();
    std::size_t it = 0;
    for (; it < opt.max_iterations; ++it) {
      Vec r = K.apply(q);
      for (std::size_t i = 0; i < N; ++i) r[i] -= mu * mass[i] * q[i];
      double s = 0.0;
      for (std::size_t i = 0; i < N; ++i) s += r[i] * r[i] / mass[i];
      res = std::sqrt(s) / std::max(1.0, std::abs(mu));
      if (res < opt.tolerance) break;

      Vec g = precondition(r);
      detail::project_out(g, locked, mass);
      // B-orthonormal basis of span{q, g, dir}.
      std::vector<Vec> basis{q};
      for (Vec cand : {g, dir}) {
        if (cand.empty()) continue;
        for (int pass = 0; pass < 2; ++pass) {
          detail::project_out(cand, basis, mass);
          detail::project_out(cand, locked, mass);
        }
        const double nrm = std::sqrt(detail::mdot(cand, cand, mass));
        if (!(nrm > 1e-14)) continue;
        for (double& v : cand) v /= nrm;
        basis.push_back(std::move(cand));
      }
      const std::size_t dim = basis.size();
      std::vector<std::vector<double>> H(dim, std::vector<double>(dim));
      std::vector<Vec> kb;
      for (const Vec& b : basis) kb.push_back(K.apply(b));
      for (std::size_t i = 0; i < dim; ++i)
        for (std::size_t j = 0; j < dim; ++j)
          H[i][j] = 0.5 * (std::inner_product(basis[i].begin(), basis[i].end(), kb[j].begin(), 0.0) +
                           std::inner_product(basis[j].begin(), basis[j].end(), kb[i].begin(), 0.0));
      std::vector<double> evals;
      std::vector<std::vector<double>> evecs;
      detail::jacobi_eigen(H, evals, evecs);
      const std::size_t best = static_cast<std::size_t>(
          std::min_element(evals.begin(), evals.end()) - evals.begin());
      Vec next(N, 0.0), step(N, 0.0);
      for (std::size_t j = 0; j < dim; ++j) {
        detail::axpy(evecs[j][best], basis[j], next);
        if (j > 0) detail::axpy(evecs[j][best], basis[j], step);
      }
      detail::project_out(next, locked, mass);
      detail::normalize(next, mass);
      dir = std::move(step);
      q = std::move(next);
      mu = quotient(q);
    }
    total_it += it;
    if (!(res < opt.tolerance))
      throw NonConvergenceError("rayleigh_minimize: no convergence", res);
    if (k == 0) {
      detail::fix_sign(q);
      principal_residual = res;
    }
    locked.push_back(q);
    values.push_back(mu);
  }

  EigenResult out;
  out.r = mesh.r;
  out.rayleigh_value = values[0] / 2.0;
  out.lambda1 = values[0];
  out.lambda2 = values[1];
  detail::split_fields(locked[0], out.phi1, out.psi1);
  out.residual = principal_residual;
  out.iterations = total_it;
  return out;
}

inline EigenResult rayleigh_minimize(const ModelParams& prm, std::size_t nodes, double h_inf,
                                     const EigenOptions& opt) {
  return rayleigh_minimize(prm, nodes, h_inf, {}, {}, opt);
}

/// Direct banded eigensolve of the linearization on [0, h_inf]:
///  - lambda1, lambda2: lowest eigenvalues of the symmetrized pencil
///    (symmetrized operator, int (phi^2 + psi^2)), the quantity the Rayleigh
///    minimizer targets;
///  - decay_lambda1, decay_lambda2: lowest eigenvalues of the unsymmetrized
///    decay operator, i.e. the predicted decay rates of E and I.
inline EigenResult direct_eigensolve(const ModelParams& prm, std::size_t nodes, double h_inf,
                                     const EigenOptions& opt = {}) {
  using detail::Vec;
  const LinearizationMatrix a = linearization_matrix(prm);
  const EigenMesh mesh = make_eigen_mesh(h_inf, nodes, prm.dim_n);
  const std::size_t max_it = std::max<std::size_t>(opt.max_iterations, 2000);
  const double cross = opt.cross_coupling ? a.a12 * a.a22 : 0.0;
  EigenResult out;
  out.r = mesh.r;

  // Symmetrized pencil.
  {
    const BandMatrix K = assemble_operator(prm, mesh, a.a22, a.a12, cross);
    const Vec mass = detail::interleaved_mass(mesh, 1.0, 1.0);
    const double lb = detail::pencil_lower_bound(-a.a11 * a.a22, -cross, -a.a12 * a.a21, 1.0, 1.0);
    std::vector<detail::Pair> pairs = detail::lowest_pairs(K, mass, lb, 2, opt.tolerance, max_it);
    detail::fix_sign(pairs[0].vec);
    out.lambda1 = pairs[0].value;
    out.lambda2 = pairs[1].value;
    out.rayleigh_value = pairs[0].value / 2.0;
    out.residual = pairs[0].residual;
    out.iterations = pairs[0].iterations + pairs[1].iterations;
    detail::split_fields(pairs[0].vec, out.phi1, out.psi1);
  }

  // Decay operator: self-adjoint in the (a22 B, a12 B) inner product when both
  // weights are positive; otherwise the blocks are triangular and decouple.
  {
    const bool weighted = a.a12 > 0.0 && a.a22 > 0.0 && opt.cross_coupling;
    const double wp = weighted ? a.a22 : 1.0, wq = weighted ? a.a12 : 1.0;
    const double c = weighted ? a.a12 * a.a22 : 0.0;
    const BandMatrix K = assemble_operator(prm, mesh, wp, wq, c);
    const Vec mass = detail::interleaved_mass(mesh, wp, wq);
    const double lb = detail::pencil_lower_bound(-a.a11 * wp, -c, -a.a21 * wq, wp, wq);
    std::vector<detail::Pair> pairs = detail::lowest_pairs(K, mass, lb, 2, opt.tolerance, max_it);
    Vec q = pairs[0].vec;
    if (!weighted && opt.cross_coupling && (a.a12 != 0.0 || a.a22 != 0.0)) {
      // Triangular coupling: rebuild the eigenvector of the full operator
      // from the block that owns the eigenvalue.
      const BandMatrix L = decay_operator(prm, mesh);
      BandMatrix S = L;
      for (std::size_t i = 0; i < q.size(); ++i) S.add(i, i, -pairs[0].value * (1.0 + 1e-12));
      Vec rhs(q.size(), 0.0);
      const Vec lq = L.apply(q);
      for (std::size_t i = 0; i < q.size(); ++i) rhs[i] = pairs[0].value * q[i] - lq[i];
      try {
        const Vec corr = BandLU(S).solve(rhs);
        for (std::size_t i = 0; i < q.size(); ++i) q[i] += corr[i];
      } catch (const SingularShiftError&) {
      }
      detail::normalize(q, detail::interleaved_mass(mesh, 1.0, 1.0));
    }
    detail::fix_sign(q);
    out.decay_lambda1 = pairs[0].value;
    out.decay_lambda2 = pairs[1].value;
    detail::split_fields(q, out.decay_phi1, out.decay_psi1);
    if (opt.cross_coupling) {
      const BandMatrix L = decay_operator(prm, mesh);
      const Vec lq = L.apply(q);
      double s = 0.0, nq = 0.0;
      for (std::size_t i = 0; i < q.size(); ++i) {
        const double d = lq[i] - pairs[0].value * q[i];
        s += d * d * mesh.volume[i / 2];
        nq += q[i] * q[i] * mesh.volume[i / 2];
      }
      out.decay_residual = std::sqrt(s / nq) / std::max(1.0, std::abs(pairs[0].value));
    } else {
      out.decay_residual = pairs[0].residual;
    }
  }
  return out;
}

/// Euler-Lagrange residual ||B^-1 (K q) - lambda q|| / ||q|| of a field pair
/// for the symmetrized pencil (L2 norms on the mesh).
inline double euler_lagrange_residual(const ModelParams& prm, std::size_t nodes, double h_inf,
                                      std::span<const double> phi, std::span<const double> psi,
                                      double lambda, bool cross_coupling = true) {
  const EigenMesh mesh = make_eigen_mesh(h_inf, nodes, prm.dim_n);
  const auto p = detail::unknown_part(phi, mesh), q = detail::unknown_part(psi, mesh);
  const std::size_t n = mesh.unknowns();
  std::vector<double> x(2 * n);
  for (std::size_t i = 0; i < n; ++i) {
    x[2 * i] = p[i];
    x[2 * i + 1] = q[i];
  }
  const BandMatrix K = symmetrized_operator(prm, mesh, cross_coupling);
  const std::vector<double> kx = K.apply(x);
  double s = 0.0, nx = 0.0;
  for (std::size_t i = 0; i < 2 * n; ++i) {
    const double v = mesh.volume[i / 2];
    const double d = kx[i] / v - lambda * x[i];
    s += d * d * v;
    nx += x[i] * x[i] * v;
  }
  return std::sqrt(s / nx);
}

struct RateFit {
  double rate = 0.0;  // least-squares slope of -log(sup_E + sup_I)
  double intercept = 0.0;
  double log_rms = 0.0;  // RMS residual of the log-linear fit
  double rate_two_mode = std::numeric_limits<double>::quiet_NaN();
  double gap = std::numeric_limits<double>::quiet_NaN();  // lambda2 - lambda1 from the two-mode fit
  std::size_t points = 0;
};

namespace detail {

// Minimizes f over R^2 by Nelder-Mead.
template <class F>
std::array<double, 2> nelder_mead(F f, std::array<double, 2> x0, std::array<double, 2> step,
                                  int max_eval = 4000) {
  using P = std::array<double, 2>;
  std::array<P, 3> s{x0, P{x0[0] + step[0], x0[1]}, P{x0[0], x0[1] + step[1]}};
  std::array<double, 3> fv{f(s[0]), f(s[1]), f(s[2])};
  int evals = 3;
  while (evals < max_eval) {
    std::array<int, 3> idx{0, 1, 2};
    std::sort(idx.begin(), idx.end(), [&](int i, int j) { return fv[i] < fv[j]; });
    const P best = s[idx[0]], mid = s[idx[1]], worst = s[idx[2]];
    const double fb = fv[idx[0]], fm = fv[idx[1]], fw = fv[idx[2]];
    if (std::abs(fw - fb) <= 1e-15 * (std::abs(fb) + 1e-300) &&
        std::hypot(worst[0] - best[0], worst[1] - best[1]) < 1e-12)
      break;
    const P c{(best[0] + mid[0]) / 2.0, (best[1] + mid[1]) / 2.0};
    const auto along = [&](double t) { return P{c[0] + t * (worst[0] - c[0]), c[1] + t * (worst[1] - c[1])}; };
    P xr = along(-1.0);
    const double fr = f(xr);
    ++evals;
    P nw = worst;
    double fn = fw;
    if (fr < fb) {
      const P xe = along(-2.0);
      const double fe = f(xe);
      ++evals;
      if (fe < fr) nw = xe, fn = fe;
      else nw = xr, fn = fr;
    } else if (fr < fm) {
      nw = xr, fn = fr;
    } else {
      const P xc = fr < fw ? along(-0.5) : along(0.5);
      const double fc = f(xc);
      ++evals;
      if (fc < std::min(fr, fw)) {
        nw = xc, fn = fc;
      } else {
        for (int k : {idx[1], idx[2]}) {
          s[k] = P{(s[k][0] + best[0]) / 2.0, (s[k][1] + best[1]) / 2.0};
          fv[k] = f(s[k]);
          ++evals;
        }
        continue;
      }
    }
    s[idx[2]] = nw;
    fv[idx[2]] = fn;
  }
  const int b = static_cast<int>(std::min_element(fv.begin(), fv.end()) - fv.begin());
  return s[b];
}

}  // namespace detail

/// Fits the decay of y = sup_E + sup_I over t in [t_start, t_stop]:
/// a log-linear least-squares slope, then (when the data are not a single
/// exponential) a two-exponential fit y ~ a1 e^{-l1 t} + a2 e^{-l2 t} by
/// variable projection, whose l2 - l1 is the reported gap.
inline RateFit decay_rate_fit(std::span<const double> times, std::span<const double> values,
                              double t_start, double t_stop) {
  std::vector<double> t, y;
  for (std::size_t i = 0; i < times.size(); ++i)
    if (times[i] >= t_start - 1e-12 && times[i] <= t_stop + 1e-12) {
      t.push_back(times[i]);
      y.push_back(values[i]);
    }
  if (t.size() < 3) throw WindowTooShortError("decay_rate_fit: fewer than 3 samples in the window");
  for (double v : y)
    if (!(v > 0.0) || !std::isfinite(v)) throw NonDecayError("decay_rate_fit: non-positive norm in window");
  if (!(y.back() < y.front())) throw NonDecayError("decay_rate_fit: norm is not decreasing");

  const std::size_t n = t.size();
  const double tm = std::accumulate(t.begin(), t.end(), 0.0) / n;
  double lm = 0.0;
  for (double v : y) lm += std::log(v);
  lm /= n;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxy += (t[i] - tm) * (std::log(y[i]) - lm);
    sxx += (t[i] - tm) * (t[i] - tm);
  }
  const double slope = sxy / sxx;
  if (!(slope < 0.0)) throw NonDecayError("decay_rate_fit: fitted slope is not negative");
  RateFit fit;
  fit.rate = -slope;
  fit.intercept = lm - slope * tm;
  fit.points = n;
  double ss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double e = std::log(y[i]) - (fit.intercept + slope * t[i]);
    ss += e * e;
  }
  fit.log_rms = std::sqrt(ss / n);
  if (fit.log_rms < 1e-10 || n < 5) return fit;

  // Variable projection: for fixed rates the amplitudes solve a 2x2 weighted
  // least-squares problem (relative residuals).
  const auto misfit = [&](const std::array<double, 2>& l) {
    double s11 = 0, s12 = 0, s22 = 0, b1 = 0, b2 = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const double w = 1.0 / y[i];
      const double e1 = std::exp(-l[0] * (t[i] - t.front())) * w;
      const double e2 = std::exp(-l[1] * (t[i] - t.front())) * w;
      s11 += e1 * e1, s12 += e1 * e2, s22 += e2 * e2, b1 += e1, b2 += e2;
    }
    const double det = s11 * s22 - s12 * s12;
    if (!(std::abs(det) > 1e-300)) return std::numeric_limits<double>::infinity();
    const double c1 = (b1 * s22 - b2 * s12) / det, c2 = (s11 * b2 - s12 * b1) / det;
    double r = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double model = c1 * std::exp(-l[0] * (t[i] - t.front())) + c2 * std::exp(-l[1] * (t[i] - t.front()));
      const double e = model / y[i] - 1.0;
      r += e * e;
    }
    return r;
  };
  double best = std::numeric_limits<double>::infinity();
  std::array<double, 2> arg{fit.rate, fit.rate};
  for (double g : {0.25, 0.5, 1.0, 2.0, 4.0}) {
    const auto x = detail::nelder_mead(misfit, {fit.rate, fit.rate * (1.0 + g)},
                                       {0.05 * fit.rate, 0.1 * fit.rate * g});
    const double v = misfit(x);
    if (v < best) best = v, arg = x;
  }
  const double l1 = std::min(arg[0], arg[1]), l2 = std::max(arg[0], arg[1]);
  if (l1 > 0.0 && l2 > l1 && std::isfinite(best)) {
    fit.rate_two_mode = l1;
    fit.gap = l2 - l1;
  }
  return fit;
}

inline RateFit decay_rate_fit(const Trajectory& traj, double t_start, double t_stop) {
  std::vector<double> y(traj.size());
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = traj.sup_E[i] + traj.sup_I[i];
  return decay_rate_fit(traj.times, y, t_start, t_stop);
}

}  // namespace seis
