#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "seis/errors.hpp"

namespace seis {

/// Tridiagonal system: sub[i] x[i-1] + diag[i] x[i] + super[i] x[i+1] = rhs[i].
/// sub[0] and super[n-1] are ignored.
struct Tridiagonal {
  std::vector<double> sub, diag, super;

  explicit Tridiagonal(std::size_t n = 0) : sub(n, 0.0), diag(n, 0.0), super(n, 0.0) {}
  std::size_t size() const { return diag.size(); }

  std::vector<double> apply(std::span<const double> x) const {
    const std::size_t n = size();
    std::vector<double> y(n);
    for (std::size_t i = 0; i < n; ++i) {
      double acc = diag[i] * x[i];
      if (i > 0) acc += sub[i] * x[i - 1];
      if (i + 1 < n) acc += super[i] * x[i + 1];
      y[i] = acc;
    }
    return y;
  }
};

/// Thomas algorithm. Intended for the diagonally dominant systems of the
/// implicit diffusion step; no pivoting.
inline std::vector<double> solve_tridiagonal(const Tridiagonal& m, std::span<const double> rhs) {
  const std::size_t n = m.size();
  std::vector<double> c(n), x(rhs.begin(), rhs.end());
  double denom = m.diag[0];
  if (denom == 0.0) throw StepRejectedError("tridiagonal solve: zero pivot");
  c[0] = n > 1 ? m.super[0] / denom : 0.0;
  x[0] /= denom;
  for (std::size_t i = 1; i < n; ++i) {
    denom = m.diag[i] - m.sub[i] * c[i - 1];
    if (denom == 0.0) throw StepRejectedError("tridiagonal solve: zero pivot");
    c[i] = i + 1 < n ? m.super[i] / denom : 0.0;
    x[i] = (x[i] - m.sub[i] * x[i - 1]) / denom;
  }
  for (std::size_t i = n - 1; i-- > 0;) x[i] -= c[i] * x[i + 1];
  return x;
}

/// Square band matrix with `lower` sub- and `upper` super-diagonals, stored
/// row-wise over the band. Supports LU with partial pivoting (fill grows the
/// upper bandwidth to lower + upper).
class BandMatrix {
 public:
  BandMatrix(std::size_t n, std::size_t lower, std::size_t upper)
      : n_(n), kl_(lower), ku_(upper), width_(2 * lower + upper + 1), data_(n * width_, 0.0) {}

  std::size_t size() const { return n_; }
  std::size_t lower() const { return kl_; }
  std::size_t upper() const { return ku_; }

  bool in_band(std::size_t i, std::size_t j) const {
    return j + kl_ >= i && j <= i + ku_;
  }

  double get(std::size_t i, std::size_t j) const {
    if (!in_band(i, j)) return 0.0;
    return data_[i * width_ + (j + kl_ - i)];
  }
  void set(std::size_t i, std::size_t j, double v) {
    if (!in_band(i, j)) throw DomainError("BandMatrix: entry outside band");
    data_[i * width_ + (j + kl_ - i)] = v;
  }
  void add(std::size_t i, std::size_t j, double v) { set(i, j, get(i, j) + v); }

  std::vector<double> apply(std::span<const double> x) const {
    std::vector<double> y(n_, 0.0);
    for (std::size_t i = 0; i < n_; ++i) {
      const std::size_t j0 = i >= kl_ ? i - kl_ : 0;
      const std::size_t j1 = std::min(n_ - 1, i + ku_);
      double acc = 0.0;
      for (std::size_t j = j0; j <= j1; ++j) acc += get(i, j) * x[j];
      y[i] = acc;
    }
    return y;
  }

  friend class BandLU;

 private:
  // Raw access inside the widened band used during factorization.
  double& at(std::size_t i, std::size_t j) { return data_[i * width_ + (j + kl_ - i)]; }
  double at(std::size_t i, std::size_t j) const { return data_[i * width_ + (j + kl_ - i)]; }

  std::size_t n_, kl_, ku_, width_;
  std::vector<double> data_;
};

/// LU factorization with partial (row) pivoting of a band matrix.
class BandLU {
 public:
  /// Throws SingularShiftError when a pivot is exactly zero or below
  /// `pivot_floor` times the largest entry magnitude.
  explicit BandLU(BandMatrix m, double pivot_floor = 1e-300) : lu_(std::move(m)), piv_(lu_.n_) {
    const std::size_t n = lu_.n_, kl = lu_.kl_, ku_fill = lu_.kl_ + lu_.ku_;
    double scale = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = (i >= kl ? i - kl : 0); j <= std::min(n - 1, i + lu_.ku_); ++j)
        scale = std::max(scale, std::abs(lu_.at(i, j)));
    const double floor = pivot_floor * std::max(scale, 1e-300);
    for (std::size_t k = 0; k < n; ++k) {
      const std::size_t last_row = std::min(n - 1, k + kl);
      std::size_t p = k;
      for (std::size_t i = k + 1; i <= last_row; ++i)
        if (std::abs(lu_.at(i, k)) > std::abs(lu_.at(p, k))) p = i;
      piv_[k] = p;
      if (!(std::abs(lu_.at(p, k)) > floor)) throw SingularShiftError("BandLU: singular pivot");
      const std::size_t last_col = std::min(n - 1, k + ku_fill);
      if (p != k)
        for (std::size_t j = k; j <= last_col; ++j) std::swap(lu_.at(k, j), lu_.at(p, j));
      const double pivot = lu_.at(k, k);
      for (std::size_t i = k + 1; i <= last_row; ++i) {
        const double factor = lu_.at(i, k) / pivot;
        lu_.at(i, k) = factor;
        if (factor == 0.0) continue;
        for (std::size_t j = k + 1; j <= last_col; ++j) lu_.at(i, j) -= factor * lu_.at(k, j);
      }
    }
  }

  std::vector<double> solve(std::span<const double> rhs) const {
    const std::size_t n = lu_.n_, kl = lu_.kl_, ku_fill = lu_.kl_ + lu_.ku_;
    std::vector<double> x(rhs.begin(), rhs.end());
    for (std::size_t k = 0; k < n; ++k) {
      if (piv_[k] != k) std::swap(x[k], x[piv_[k]]);
      const std::size_t last_row = std::min(n - 1, k + kl);
      for (std::size_t i = k + 1; i <= last_row; ++i) x[i] -= lu_.at(i, k) * x[k];
    }
    for (std::size_t k = n; k-- > 0;) {
      const std::size_t last_col = std::min(n - 1, k + ku_fill);
      double acc = x[k];
      for (std::size_t j = k + 1; j <= last_col; ++j) acc -= lu_.at(k, j) * x[j];
      x[k] = acc / lu_.at(k, k);
    }
    return x;
  }

 private:
  BandMatrix lu_;
  std::vector<std::size_t> piv_;
};

}  // namespace seis
