#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "seis/errors.hpp"
#include "seis/linalg.hpp"
#include "seis/model.hpp"
#include "seis/stencil.hpp"

namespace seis {

/// Discretization of the mesh-advection term. Hybrid uses central differences
/// wherever the cell Peclet number allows it without losing positivity and
/// falls back to first-order upwinding elsewhere.
enum class AdvectionScheme { Hybrid, Upwind };

struct SolverConfig {
  double dt = 0.01;
  double t_end = 10.0;
  std::size_t snapshot_every = 0;  // 0: no field snapshots
  double theta = 1.0;              // implicitness of the linear part, in [0.5, 1]
  bool positivity_clip = false;
  double monitor_tolerance = 0.05;  // relative slack on the uniform bound
  bool predictor_corrector = false;
  double positivity_tolerance = 1e-10;  // monitor threshold for negative values
  double speed_tolerance = 1e-10;       // monitor threshold for h' < 0
  double negativity_abort = 1e-6;       // step fails below -negativity_abort (without clipping)
  AdvectionScheme advection = AdvectionScheme::Hybrid;
};

inline void validate_config(const SolverConfig& cfg) {
  if (!(cfg.dt > 0.0) || !std::isfinite(cfg.dt)) throw DomainError("solver: dt must be > 0");
  if (!(cfg.t_end >= 0.0) || !std::isfinite(cfg.t_end))
    throw DomainError("solver: t_end must be >= 0");
  if (!(cfg.theta >= 0.5 && cfg.theta <= 1.0))
    throw DomainError("solver: theta must lie in [0.5, 1]");
  if (!(cfg.monitor_tolerance >= 0.0)) throw DomainError("solver: monitor_tolerance must be >= 0");
}

/// One-sided second-order derivative of a field vanishing at the last node,
/// with respect to the straightened coordinate.
inline double front_slope_s(std::span<const double> q, double ds) {
  const std::size_t m = q.size() - 1;
  return (3.0 * q[m] - 4.0 * q[m - 1] + q[m - 2]) / (2.0 * ds);
}

/// h' = -beta_front E_r(h) - mu_front I_r(h), with E_r = (h_ref / h) v_s.
inline double stefan_speed(const SimState& st, const Grid& grid, const ModelParams& prm) {
  const double to_r = grid.h_ref / st.h;
  const double e_r = front_slope_s(st.v, grid.ds()) * to_r;
  const double i_r = front_slope_s(st.w, grid.ds()) * to_r;
  return -prm.beta_front * e_r - prm.mu_front * i_r;
}

/// Crude Lipschitz bound of the reaction terms from sup-norms.
inline double reaction_lipschitz_estimate(const SimState& st, const ModelParams& prm) {
  const auto sup = [](const std::vector<double>& x) {
    double m = 0.0;
    for (double v : x) m = std::max(m, std::abs(v));
    return m;
  };
  const double su = sup(st.u), sw = sup(st.w);
  return prm.alpha * (su + sw) + prm.mu1 + prm.r1 + prm.r2 + prm.beta1 + prm.mu2 + prm.mu3;
}

struct StepReport {
  double clipped_mass = 0.0;
  double front_speed_used = 0.0;
};

namespace detail {

struct Sources {
  std::vector<double> fu, ku, fv, fw;
};

// Explicit sources and per-node S decay. The mass-action loss alpha I S is
// linearized as (alpha I^n) S and treated like the other linear losses.
inline Sources reaction_sources(const SimState& st, const ModelParams& prm, std::size_t inner) {
  const std::size_t total = st.u.size();
  Sources s;
  s.fu.assign(total, prm.A);
  s.ku.assign(total, prm.mu1);
  s.fv.assign(inner, 0.0);
  s.fw.assign(inner, 0.0);
  for (std::size_t j = 0; j < inner; ++j) {
    const double u = st.u[j], v = st.v[j], w = st.w[j];
    s.fu[j] += prm.r2 * w + prm.r1 * v;
    s.ku[j] += prm.alpha * w;
    s.fv[j] = (1.0 - prm.p) * prm.alpha * u * w;
    s.fw[j] = prm.p * prm.alpha * u * w + prm.beta1 * v;
  }
  return s;
}

inline Sources average(const Sources& a, const Sources& b) {
  Sources s = a;
  const auto avg = [](std::vector<double>& x, const std::vector<double>& y) {
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = 0.5 * (x[i] + y[i]);
  };
  avg(s.fu, b.fu);
  avg(s.ku, b.ku);
  avg(s.fv, b.fv);
  avg(s.fw, b.fw);
  return s;
}

// Node velocities of the moving mesh (dr/dt at fixed computational coordinate),
// for unit front speed. Inner nodes: s / h_ref; outer nodes: (1 - sigma).
inline std::vector<double> mesh_velocity(const Grid& grid) {
  std::vector<double> c(grid.composite_size(), 0.0);
  for (std::size_t j = 0; j < grid.m_inner; ++j) c[j] = grid.s_node(j) / grid.h_ref;
  c[grid.m_inner - 1] = 1.0;
  for (std::size_t k = 1; k < grid.m_outer; ++k)
    c[grid.m_inner - 1 + k] = 1.0 - static_cast<double>(k) / static_cast<double>(grid.m_outer - 1);
  return c;
}

// Linear operator A q = D Lap q + (h' c_j) q_r - k_j q_j on
// the first `unknowns` nodes of `nodes`. When unknowns < nodes.size(), the next
// node is a homogeneous Dirichlet node. q_r is central where that keeps the
// off-diagonals nonnegative (Hybrid), one-sided upwind otherwise.
inline Tridiagonal linear_operator(std::span<const double> nodes, std::size_t unknowns, int dim_n,
                                   double diffusion, std::span<const double> velocity,
                                   double front_speed, std::span<const double> decay,
                                   AdvectionScheme scheme) {
  Tridiagonal op(unknowns);
  for (std::size_t j = 0; j < unknowns; ++j) {
    const StencilRow row = radial_laplacian_row(nodes, j, dim_n, diffusion);
    double sub = row.sub, diag = row.diag - decay[j], super = row.super;
    const double a = front_speed * velocity[j];
    const bool interior = j > 0 && j + 1 < nodes.size();
    const double central = interior ? a / (nodes[j + 1] - nodes[j - 1]) : 0.0;
    if (scheme == AdvectionScheme::Hybrid && interior && sub - central >= 0.0 &&
        super + central >= 0.0) {
      sub -= central;
      super += central;
    } else if (a > 0.0 && j + 1 < nodes.size()) {
      const double f = a / (nodes[j + 1] - nodes[j]);
      diag -= f;
      super += f;
    } else if (a < 0.0 && j > 0) {
      const double b = a / (nodes[j] - nodes[j - 1]);
      diag += b;
      sub -= b;
    }
    op.sub[j] = sub;
    op.diag[j] = diag;
    op.super[j] = j + 1 < unknowns ? super : 0.0;
  }
  return op;
}

inline std::vector<double> theta_solve(std::span<const double> q_old, const Tridiagonal& op_old,
                                       const Tridiagonal& op_new, std::span<const double> source,
                                       double dt, double theta) {
  const std::size_t n = q_old.size();
  std::vector<double> rhs(q_old.begin(), q_old.end());
  if (theta < 1.0) {
    const std::vector<double> aq = op_old.apply(q_old);
    for (std::size_t i = 0; i < n; ++i) rhs[i] += (1.0 - theta) * dt * aq[i];
  }
  for (std::size_t i = 0; i < n; ++i) rhs[i] += dt * source[i];
  Tridiagonal sys(n);
  for (std::size_t i = 0; i < n; ++i) {
    sys.sub[i] = -theta * dt * op_new.sub[i];
    sys.diag[i] = 1.0 - theta * dt * op_new.diag[i];
    sys.super[i] = -theta * dt * op_new.super[i];
  }
  return solve_tridiagonal(sys, rhs);
}

inline SimState advance(const SimState& st, const ModelParams& prm, const Grid& grid,
                        const SolverConfig& cfg, double dt, double front_speed,
                        const Sources& src) {
  const std::size_t inner = grid.m_inner, front = grid.front_index();
  const double h_new = st.h + dt * front_speed;
  if (!(h_new > 0.0) || !std::isfinite(h_new)) throw StepRejectedError("front position invalid");
  if (h_new >= grid.r_max) throw DomainError("front reached r_max; enlarge the outer domain");

  const std::vector<double> vel = mesh_velocity(grid);
  const std::vector<double> r_old = grid.composite_r(st.h);
  const std::vector<double> r_new = grid.composite_r(h_new);

  SimState out;
  out.t = st.t + dt;
  out.h = h_new;

  // S on the composite mesh, zero flux at r_max.
  {
    const std::size_t n = r_new.size();
    const Tridiagonal op_old = linear_operator(r_old, n, prm.dim_n, prm.d1, vel, front_speed, src.ku, cfg.advection);
    const Tridiagonal op_new = linear_operator(r_new, n, prm.dim_n, prm.d1, vel, front_speed, src.ku, cfg.advection);
    out.u = theta_solve(st.u, op_old, op_new, src.fu, dt, cfg.theta);
  }
  // E and I on the inner mesh, homogeneous Dirichlet at the front node.
  const auto inner_field = [&](const std::vector<double>& q, double diffusion, double decay,
                               const std::vector<double>& source) {
    const std::span<const double> ro(r_old.data(), inner), rn(r_new.data(), inner);
    const std::vector<double> k(front, decay);
    const Tridiagonal op_old = linear_operator(ro, front, prm.dim_n, diffusion, vel, front_speed, k, cfg.advection);
    const Tridiagonal op_new = linear_operator(rn, front, prm.dim_n, diffusion, vel, front_speed, k, cfg.advection);
    std::vector<double> sol = theta_solve(std::span<const double>(q.data(), front), op_old, op_new,
                                          std::span<const double>(source.data(), front), dt, cfg.theta);
    sol.push_back(0.0);
    return sol;
  };
  out.v = inner_field(st.v, prm.d2, prm.beta1 + prm.r1 + prm.mu2, src.fv);
  out.w = inner_field(st.w, prm.d3, prm.r2 + prm.mu3, src.fw);
  return out;
}

inline double sanitize(SimState& st, const Grid& grid, const ModelParams& prm,
                       const SolverConfig& cfg) {
  const auto finite = [](const std::vector<double>& x) {
    for (double v : x)
      if (!std::isfinite(v)) return false;
    return true;
  };
  if (!finite(st.u) || !finite(st.v) || !finite(st.w))
    throw StepRejectedError("non-finite field value at t = " + std::to_string(st.t));

  const std::vector<double> r = grid.composite_r(st.h);
  double clipped = 0.0;
  const auto treat = [&](std::vector<double>& x, const char* name) {
    for (std::size_t j = 0; j < x.size(); ++j) {
      if (x[j] >= 0.0) continue;
      if (cfg.positivity_clip) {
        clipped += -x[j] * control_volume(r, j, prm.dim_n);
        x[j] = 0.0;
      } else if (x[j] < -cfg.negativity_abort) {
        throw PositivityError(std::string("field ") + name + " went negative (" +
                              std::to_string(x[j]) + ") at t = " + std::to_string(st.t));
      }
    }
  };
  treat(st.u, "S");
  treat(st.v, "E");
  treat(st.w, "I");
  return clipped;
}

}  // namespace detail

/// One theta-IMEX step in front-fixed coordinates:
///  (a) h' from the current state, (b) h advanced explicitly,
///  (c) diffusion + mesh advection + linear losses theta-implicit,
///  (d) remaining reaction terms explicit at the old state,
///  (e) S on the composite mesh (continuous value and flux at the front, zero flux at r_max),
///  (f) E = I = 0 at the front node, symmetry at r = 0.
/// With `predictor_corrector`, the step is repeated with h' and the explicit
/// terms averaged between the old state and the predictor (Heun).
inline SimState step(const SimState& st, const ModelParams& prm, const Grid& grid,
                     const SolverConfig& cfg, double dt, StepReport* report = nullptr) {
  const std::size_t inner = grid.m_inner;
  const double speed = stefan_speed(st, grid, prm);
  const detail::Sources src = detail::reaction_sources(st, prm, inner);
  SimState next = detail::advance(st, prm, grid, cfg, dt, speed, src);
  double used = speed;
  if (cfg.predictor_corrector) {
    SolverConfig clip = cfg;
    clip.positivity_clip = true;
    detail::sanitize(next, grid, prm, clip);
    const double speed_pred = stefan_speed(next, grid, prm);
    used = 0.5 * (speed + speed_pred);
    const detail::Sources avg = detail::average(src, detail::reaction_sources(next, prm, inner));
    next = detail::advance(st, prm, grid, cfg, dt, used, avg);
  }
  const double clipped = detail::sanitize(next, grid, prm, cfg);
  next.h_prime = stefan_speed(next, grid, prm);
  if (report) {
    report->clipped_mass += clipped;
    report->front_speed_used = used;
  }
  return next;
}

inline SimState step(const SimState& st, const ModelParams& prm, const Grid& grid,
                     const SolverConfig& cfg) {
  return step(st, prm, grid, cfg, cfg.dt);
}

struct MonitorEvent {
  double t = 0.0;
  std::string kind;  // "uniform_bound" | "front_speed" | "positivity" | "reaction_stiffness" | "far_field"
  double value = 0.0;
  double bound = 0.0;
};

struct Snapshot {
  double t = 0.0;
  double h = 0.0;
  std::vector<double> r;  // composite mesh radii
  std::vector<double> S, E, I;  // E and I padded with zeros beyond the front
};

struct Trajectory {
  std::vector<double> times, h_series, hprime_series, sup_S, sup_E, sup_I, total_EI_weighted;
  std::vector<Snapshot> snapshots;
  std::vector<MonitorEvent> monitor_events;
  double clipped_mass = 0.0;
  SimState final_state;

  std::size_t size() const { return times.size(); }
};

inline bool series_equal(const Trajectory& a, const Trajectory& b) {
  return a.times == b.times && a.h_series == b.h_series && a.hprime_series == b.hprime_series &&
         a.sup_S == b.sup_S && a.sup_E == b.sup_E && a.sup_I == b.sup_I &&
         a.total_EI_weighted == b.total_EI_weighted;
}

inline double weighted_infection_mass(const SimState& st, const Grid& grid, int dim_n) {
  const std::vector<double> r = grid.inner_r(st.h);
  double total = 0.0;
  for (std::size_t j = 0; j < r.size(); ++j)
    total += control_volume(r, j, dim_n) * (st.v[j] + st.w[j]);
  return total;
}

inline Snapshot make_snapshot(const SimState& st, const Grid& grid) {
  Snapshot s{st.t, st.h, grid.composite_r(st.h), st.u, st.v, st.w};
  s.E.resize(s.r.size(), 0.0);
  s.I.resize(s.r.size(), 0.0);
  return s;
}

/// Iterates `step` to t_end, recording norms every step and snapshots every
/// `snapshot_every` steps. A-priori bounds are monitored and recorded as
/// events; they never abort the run.
inline Trajectory run(const ModelParams& prm, const InitialData& init, const Grid& grid,
                      const SolverConfig& cfg) {
  validate_params(prm);
  validate_config(cfg);
  validate_initial_data(init, grid);

  Trajectory traj;
  SimState st = initial_state(init);
  st.h_prime = stefan_speed(st, grid, prm);

  double initial_sum = 0.0;
  for (std::size_t j = 0; j < st.u.size(); ++j) {
    const double e = j < grid.m_inner ? st.v[j] + st.w[j] : 0.0;
    initial_sum = std::max(initial_sum, st.u[j] + e);
  }
  const double sum_bound =
      std::max(initial_sum, prm.A / prm.min_death_rate()) * (1.0 + cfg.monitor_tolerance);

  const auto sup = [](const std::vector<double>& x) {
    double m = 0.0;
    for (double v : x) m = std::max(m, v);
    return m;
  };
  const auto record = [&](const SimState& s, std::size_t index) {
    traj.times.push_back(s.t);
    traj.h_series.push_back(s.h);
    traj.hprime_series.push_back(s.h_prime);
    traj.sup_S.push_back(sup(s.u));
    traj.sup_E.push_back(sup(s.v));
    traj.sup_I.push_back(sup(s.w));
    traj.total_EI_weighted.push_back(weighted_infection_mass(s, grid, prm.dim_n));
    if (cfg.snapshot_every > 0 && index % cfg.snapshot_every == 0)
      traj.snapshots.push_back(make_snapshot(s, grid));

    double top = 0.0, low = 0.0;
    for (std::size_t j = 0; j < s.u.size(); ++j) {
      const double e = j < grid.m_inner ? s.v[j] + s.w[j] : 0.0;
      top = std::max(top, s.u[j] + e);
      low = std::min(low, s.u[j]);
    }
    for (std::size_t j = 0; j < grid.m_inner; ++j) low = std::min({low, s.v[j], s.w[j]});
    if (top > sum_bound) traj.monitor_events.push_back({s.t, "uniform_bound", top, sum_bound});
    if (index > 0 && s.h_prime < -cfg.speed_tolerance)
      traj.monitor_events.push_back({s.t, "front_speed", s.h_prime, -cfg.speed_tolerance});
    if (low < -cfg.positivity_tolerance)
      traj.monitor_events.push_back({s.t, "positivity", low, -cfg.positivity_tolerance});
  };

  record(st, 0);
  const double t_end = cfg.t_end;
  std::size_t index = 0;
  bool stiffness_logged = false;
  StepReport report;
  while (st.t < t_end - 1e-12 * std::max(1.0, t_end)) {
    const double dt = std::min(cfg.dt, t_end - st.t);
    if (!stiffness_logged && dt * reaction_lipschitz_estimate(st, prm) >= 1.0) {
      traj.monitor_events.push_back(
          {st.t, "reaction_stiffness", dt * reaction_lipschitz_estimate(st, prm), 1.0});
      stiffness_logged = true;
    }
    st = step(st, prm, grid, cfg, dt, &report);
    if (t_end - st.t < 1e-12 * std::max(1.0, t_end)) st.t = t_end;
    record(st, ++index);
  }
  if (grid.r_max < 4.0 * st.h)
    traj.monitor_events.push_back({st.t, "far_field", grid.r_max, 4.0 * st.h});
  traj.clipped_mass = report.clipped_mass;
  traj.final_state = std::move(st);
  return traj;
}

}  // namespace seis
