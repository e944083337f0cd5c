#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <numbers>
#include <string>
#include <vector>

#include "seis/errors.hpp"

namespace seis {

/// Epidemiological and diffusion constants of the free-boundary SEIS system.
///
/// `beta_front` and `mu_front` weight the E and I fluxes in the Stefan
/// condition h' = -beta_front E_r(h) - mu_front I_r(h). They are kept apart
/// from the death rates mu1..mu3, with which they would otherwise share a symbol.
struct ModelParams {
  double A = 1.0;      // recruitment
  double alpha = 0.5;  // incidence of meeting
  double mu1 = 1.0, mu2 = 1.0, mu3 = 1.0;
  double r1 = 1.0, r2 = 1.0;  // treatment cure rates (latent, active)
  double beta1 = 0.5;         // latent -> active breakdown
  double p = 0.5;             // fraction degenerating instantly into I
  double d1 = 1.0, d2 = 1.0, d3 = 1.0;
  double beta_front = 0.5;
  double mu_front = 0.5;
  int dim_n = 1;

  double dfe_level() const { return A / mu1; }
  double min_death_rate() const { return std::min({mu1, mu2, mu3}); }
  double max_death_rate() const { return std::max({mu1, mu2, mu3}); }

  bool equal_diffusion() const {
    const double scale = std::max({std::abs(d1), std::abs(d2), std::abs(d3)});
    const double tol = 1e-12 * scale;
    return std::abs(d1 - d2) <= tol && std::abs(d1 - d3) <= tol && std::abs(d2 - d3) <= tol;
  }

  bool operator==(const ModelParams&) const = default;
};

enum class ParamWarning { UnequalDiffusion };

/// Outcome of `validate_params`: the unchanged parameters plus non-fatal findings.
struct CheckedParams {
  ModelParams params;
  std::vector<ParamWarning> warnings;

  bool has_warning(ParamWarning w) const {
    return std::find(warnings.begin(), warnings.end(), w) != warnings.end();
  }
};

/// Throws ParamDomainError naming the first offending field. Unequal
/// diffusivities are reported as a warning; short-time simulation stays legal
/// but the long-time threshold and eigen analyses assume d1 = d2 = d3.
inline CheckedParams validate_params(const ModelParams& prm) {
  const auto positive = [](const char* name, double v) {
    if (!std::isfinite(v) || !(v > 0.0)) throw ParamDomainError(name, "must be finite and > 0");
  };
  positive("A", prm.A);
  positive("alpha", prm.alpha);
  positive("mu1", prm.mu1);
  positive("mu2", prm.mu2);
  positive("mu3", prm.mu3);
  positive("r1", prm.r1);
  positive("r2", prm.r2);
  positive("beta1", prm.beta1);
  if (!std::isfinite(prm.p) || prm.p < 0.0 || prm.p > 1.0)
    throw ParamDomainError("p", "must lie in [0, 1]");
  positive("d1", prm.d1);
  positive("d2", prm.d2);
  positive("d3", prm.d3);
  positive("beta_front", prm.beta_front);
  positive("mu_front", prm.mu_front);
  if (prm.dim_n < 1) throw ParamDomainError("dim_n", "must be an integer >= 1");

  CheckedParams out{prm, {}};
  if (!prm.equal_diffusion()) out.warnings.push_back(ParamWarning::UnequalDiffusion);
  return out;
}

/// Mesh layout. The inner interval [0, h_ref] carries E, I and the inner part
/// of S in the front-fixed coordinate s = h_ref r / h(t). The outer region
/// [h(t), r_max] carries S only; it is stretched proportionally between the
/// front and r_max, so the interface node always sits on r = h(t).
struct Grid {
  double h_ref = 1.0;
  std::size_t m_inner = 256;  // nodes on [0, h_ref], both ends included
  double r_max = 8.0;
  std::size_t m_outer = 256;  // nodes on [h, r_max], interface node included

  double ds() const { return h_ref / static_cast<double>(m_inner - 1); }
  double dr_outer(double h) const { return (r_max - h) / static_cast<double>(m_outer - 1); }
  std::size_t front_index() const { return m_inner - 1; }
  std::size_t composite_size() const { return m_inner + m_outer - 1; }

  double s_node(std::size_t i) const { return static_cast<double>(i) * ds(); }

  std::vector<double> inner_s() const {
    std::vector<double> s(m_inner);
    for (std::size_t i = 0; i < m_inner; ++i) s[i] = s_node(i);
    s.back() = h_ref;
    return s;
  }

  /// Physical radii of the inner nodes for front position h.
  std::vector<double> inner_r(double h) const {
    std::vector<double> r = inner_s();
    const double scale = h / h_ref;
    for (double& x : r) x *= scale;
    r.back() = h;
    return r;
  }

  /// Physical radii of the full S mesh (inner nodes, then outer nodes) for front position h.
  std::vector<double> composite_r(double h) const {
    std::vector<double> r = inner_r(h);
    r.reserve(composite_size());
    for (std::size_t k = 1; k < m_outer; ++k) {
      const double sigma = static_cast<double>(k) / static_cast<double>(m_outer - 1);
      r.push_back(h + sigma * (r_max - h));
    }
    r.back() = r_max;
    return r;
  }

  bool operator==(const Grid&) const = default;
};

inline Grid make_grid(double h0, std::size_t m_inner, double r_max, std::size_t m_outer) {
  if (!(h0 > 0.0) || !std::isfinite(h0)) throw DomainError("grid: h0 must be > 0");
  if (m_inner < 16) throw DomainError("grid: m_inner must be >= 16");
  if (m_outer < 2) throw DomainError("grid: m_outer must be >= 2");
  if (!(r_max >= 4.0 * h0)) throw DomainError("grid: r_max must be >= 4*h0");
  return Grid{h0, m_inner, r_max, m_outer};
}

/// Initial data sampled on the mesh at t = 0 (h = h0, so s = r on the inner nodes).
struct InitialData {
  double h0 = 1.0;
  std::vector<double> S0;  // composite mesh
  std::vector<double> E0;  // inner mesh, E0.back() == 0
  std::vector<double> I0;  // inner mesh, I0.back() == 0
};

/// Checks the admissibility conditions on initial data: E0 = I0 = 0 at and
/// beyond the front, I0 > 0 inside it (unless E0 and I0 both vanish
/// identically), S0 >= 0, everything finite.
inline void validate_initial_data(const InitialData& init, const Grid& grid) {
  if (!(init.h0 > 0.0)) throw DomainError("initial data: h0 must be > 0");
  if (std::abs(init.h0 - grid.h_ref) > 1e-12 * grid.h_ref)
    throw DomainError("initial data: h0 does not match grid.h_ref");
  if (init.S0.size() != grid.composite_size() || init.E0.size() != grid.m_inner ||
      init.I0.size() != grid.m_inner)
    throw DomainError("initial data: profile sizes do not match the grid");
  for (double v : init.S0)
    if (!std::isfinite(v) || v < 0.0) throw DomainError("initial data: S0 must be finite and >= 0");
  for (std::size_t i = 0; i < grid.m_inner; ++i) {
    if (!std::isfinite(init.E0[i]) || init.E0[i] < 0.0)
      throw DomainError("initial data: E0 must be finite and >= 0");
    if (!std::isfinite(init.I0[i]) || init.I0[i] < 0.0)
      throw DomainError("initial data: I0 must be finite and >= 0");
  }
  if (init.E0.back() != 0.0 || init.I0.back() != 0.0)
    throw DomainError("initial data: E0 and I0 must vanish at the front");
  // E0 = I0 = 0 everywhere is the degenerate, infection-free case and is accepted.
  const auto zero = [](double v) { return v == 0.0; };
  if (std::all_of(init.E0.begin(), init.E0.end(), zero) &&
      std::all_of(init.I0.begin(), init.I0.end(), zero))
    return;
  for (std::size_t i = 0; i + 1 < grid.m_inner; ++i)
    if (!(init.I0[i] > 0.0)) throw DomainError("initial data: I0 must be > 0 inside the front");
}

/// Samples arbitrary profiles (functions of physical r) onto the mesh.
/// E and I are forced to zero at the front node.
inline InitialData sample_initial(const Grid& grid, const std::function<double(double)>& S0,
                                  const std::function<double(double)>& E0,
                                  const std::function<double(double)>& I0) {
  InitialData init;
  init.h0 = grid.h_ref;
  for (double r : grid.composite_r(grid.h_ref)) init.S0.push_back(S0(r));
  for (double r : grid.inner_r(grid.h_ref)) {
    init.E0.push_back(E0(r));
    init.I0.push_back(I0(r));
  }
  init.E0.back() = 0.0;
  init.I0.back() = 0.0;
  return init;
}

/// cos^2 bump c cos^2(pi r / (2 h0)) on [0, h0), zero beyond.
inline double cos2_bump(double amplitude, double h0, double r) {
  if (r >= h0) return 0.0;
  const double c = std::cos(std::numbers::pi * r / (2.0 * h0));
  return amplitude * c * c;
}

/// S0 at the disease-free level A/mu1; E0, I0 are cos^2 bumps with amplitudes
/// c_E >= 0 and c_I > 0. The bumps have zero slope at r = 0 and vanish at h0.
inline InitialData default_initial_profiles(const ModelParams& prm, double h0, const Grid& grid,
                                            double c_E = 0.0, double c_I = 1.0) {
  if (!(h0 > 0.0)) throw DomainError("default_initial_profiles: h0 must be > 0");
  if (!(c_I > 0.0) || !std::isfinite(c_I)) throw AmplitudeError("c_I must be > 0");
  if (!(c_E >= 0.0) || !std::isfinite(c_E)) throw AmplitudeError("c_E must be >= 0");
  if (std::abs(h0 - grid.h_ref) > 1e-12 * h0)
    throw DomainError("default_initial_profiles: h0 does not match grid.h_ref");
  const double level = prm.dfe_level();
  return sample_initial(
      grid, [level](double) { return level; },
      [=](double r) { return cos2_bump(c_E, h0, r); },
      [=](double r) { return cos2_bump(c_I, h0, r); });
}

/// Solver state. `u` (S) lives on the composite mesh, `v` (E) and `w` (I) on
/// the inner mesh; v and w vanish at the front node.
struct SimState {
  double t = 0.0;
  double h = 1.0;
  double h_prime = 0.0;
  std::vector<double> u, v, w;
};

inline SimState initial_state(const InitialData& init) {
  return SimState{0.0, init.h0, 0.0, init.S0, init.E0, init.I0};
}

}  // namespace seis
