#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <ostream>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "seis/eigen.hpp"
#include "seis/io.hpp"
#include "seis/ode.hpp"
#include "seis/scenario.hpp"
#include "seis/thresholds.hpp"

namespace seis {

namespace fs = std::filesystem;

namespace detail {

inline std::ofstream open_output(const fs::path& dir, const std::string& file) {
  fs::create_directories(dir);
  std::ofstream os(dir / file, std::ios::binary);
  if (!os) throw Error("cannot write " + (dir / file).string());
  return os;
}

inline std::size_t violation_count(const Trajectory& traj) {
  return static_cast<std::size_t>(std::count_if(
      traj.monitor_events.begin(), traj.monitor_events.end(), [](const MonitorEvent& e) {
        return e.kind == "uniform_bound" || e.kind == "front_speed" || e.kind == "positivity";
      }));
}

inline void log_monitors(const Trajectory& traj, std::ostream& log) {
  if (traj.monitor_events.empty()) return;
  log << traj.monitor_events.size() << " monitor event(s); first: " << traj.monitor_events[0].kind
      << " at t = " << traj.monitor_events[0].t << '\n';
}

inline Regime predicted(const Scenario& s) {
  return threshold_report(s.params, s.initial.h0).predicted_regime;
}

}  // namespace detail

/// Runs the scenario; writes trajectory.csv, fields.csv (when snapshots are
/// enabled), monitors.csv and front.svg.
inline int cmd_simulate(const Scenario& s, const fs::path& out, std::ostream& log) {
  const Trajectory traj = run_scenario(s);
  if (s.wants("trajectory")) {
    auto os = detail::open_output(out, "trajectory.csv");
    write_trajectory_csv(os, traj);
  }
  if (s.wants("fields") && s.solver.snapshot_every > 0) {
    auto os = detail::open_output(out, "fields.csv");
    write_fields_csv(os, traj);
  }
  if (s.wants("monitors")) {
    auto os = detail::open_output(out, "monitors.csv");
    write_monitors_csv(os, traj);
  }
  if (s.wants("front")) {
    auto os = detail::open_output(out, "front.svg");
    os << svg_plot(s.name + ": front position", "t", "h(t)", {{"h", traj.times, traj.h_series}});
  }
  detail::log_monitors(traj, log);
  log << s.name << ": t_end = " << traj.times.back() << ", h = " << traj.h_series.back()
      << ", sup I = " << traj.sup_I.back() << '\n';
  return 0;
}

/// Threshold quantities plus the regime observed in a run; writes report.json.
inline int cmd_classify(const Scenario& s, const fs::path& out, std::ostream& log) {
  const Grid grid = scenario_grid(s);
  const InitialData init = scenario_initial(s, grid);
  const auto sup = [](const std::vector<double>& x) { return *std::max_element(x.begin(), x.end()); };
  const ThresholdReport rep =
      threshold_report(s.params, s.initial.h0, sup(init.S0), sup(init.E0), sup(init.I0));
  const Trajectory traj = run(s.params, init, grid, s.solver);
  const Regime observed = classify(traj, s.classify);

  std::string agreement = "undetermined";
  if (rep.predicted_regime != Regime::Indeterminate && observed != Regime::Indeterminate)
    agreement = rep.predicted_regime == observed ? "agree" : "disagree";

  nlohmann::ordered_json j;
  j["name"] = s.name;
  j["r0_max"] = rep.r0_max;
  j["r0_max_all_compartments"] = r0_max(s.params, R0MaxVariant::AllCompartments);
  j["r0_min"] = rep.r0_min;
  j["lambda1_h0"] = rep.lambda1_h0;
  j["critical_radius"] = std::isfinite(rep.critical_radius) ? nlohmann::ordered_json(rep.critical_radius)
                                                            : nlohmann::ordered_json("inf");
  j["spreading_radius_ok"] = rep.spreading_radius_ok;
  j["contested_region"] = rep.contested;
  j["equal_diffusion"] = s.params.equal_diffusion();
  j["predicted_regime"] = regime_name(rep.predicted_regime);
  j["observed_regime"] = regime_name(observed);
  j["agreement"] = agreement;
  j["t_end"] = traj.times.back();
  j["h_final"] = traj.h_series.back();
  j["sup_E_final"] = traj.sup_E.back();
  j["sup_I_final"] = traj.sup_I.back();
  j["monitor_violations"] = detail::violation_count(traj);
  if (s.wants("report")) {
    auto os = detail::open_output(out, "report.json");
    os << j.dump(2) << '\n';
  }
  if (rep.contested) log << s.name << ": parameters fall in the contested small-data region\n";
  if (!s.params.equal_diffusion())
    log << s.name << ": unequal diffusivities; threshold predictions assume d1 = d2 = d3\n";
  detail::log_monitors(traj, log);
  log << s.name << ": predicted " << regime_name(rep.predicted_regime) << ", observed "
      << regime_name(observed) << '\n';
  return 0;
}

/// One sweep axis "key=start:stop:count".
struct SweepAxis {
  std::string key;
  double start = 0.0, stop = 0.0;
  std::size_t count = 1;

  std::vector<double> values() const {
    std::vector<double> v(count);
    for (std::size_t i = 0; i < count; ++i)
      v[i] = count == 1 ? start : start + (stop - start) * static_cast<double>(i) / static_cast<double>(count - 1);
    return v;
  }
};

inline SweepAxis parse_axis(const std::string& text) {
  const std::size_t eq = text.find('=');
  if (eq == std::string::npos) throw ParseError(0, "axis '" + text + "': expected key=start:stop:count");
  SweepAxis ax;
  ax.key = detail::trim(text.substr(0, eq));
  const std::string range = text.substr(eq + 1);
  const std::size_t c1 = range.find(':'), c2 = range.find(':', c1 == std::string::npos ? c1 : c1 + 1);
  if (c1 == std::string::npos || c2 == std::string::npos)
    throw ParseError(0, "axis '" + text + "': expected key=start:stop:count");
  ax.start = detail::parse_real(ax.key, detail::trim(range.substr(0, c1)));
  ax.stop = detail::parse_real(ax.key, detail::trim(range.substr(c1 + 1, c2 - c1 - 1)));
  ax.count = detail::parse_count(ax.key, detail::trim(range.substr(c2 + 1)));
  if (ax.count < 1) throw ValidationError(ax.key, "axis count must be >= 1");
  Scenario probe;
  apply_setting(probe, ax.key, "1");
  return ax;
}

struct SweepRow {
  std::vector<double> axis_values;
  std::string status = "ok";
  double r0_max = NAN, r0_min = NAN, critical_radius = NAN;
  Regime predicted = Regime::Indeterminate, observed = Regime::Indeterminate;
  double h_final = NAN, sup_E_final = NAN, sup_I_final = NAN;
  std::size_t violations = 0;
};

/// Runs every cell of the 1-2 axis grid on `threads` workers. Rows are sorted
/// by axis values, so the file does not depend on completion order.
inline std::vector<SweepRow> run_sweep(const Scenario& base, const std::vector<SweepAxis>& axes,
                                       std::size_t threads) {
  if (axes.empty() || axes.size() > 2) throw ValidationError("axis", "sweep needs one or two axes");
  std::vector<std::vector<double>> cells{{}};
  for (const SweepAxis& ax : axes) {
    std::vector<std::vector<double>> next;
    for (const auto& c : cells)
      for (double v : ax.values()) {
        auto e = c;
        e.push_back(v);
        next.push_back(std::move(e));
      }
    cells = std::move(next);
  }
  std::vector<SweepRow> rows(cells.size());
  std::atomic<std::size_t> next{0};
  const auto worker = [&] {
    for (std::size_t i = next++; i < cells.size(); i = next++) {
      SweepRow& row = rows[i];
      row.axis_values = cells[i];
      try {
        Scenario s = base;
        for (std::size_t k = 0; k < axes.size(); ++k) apply_setting(s, axes[k].key, format_real(cells[i][k]));
        validate_scenario(s);
        const ThresholdReport rep = threshold_report(s.params, s.initial.h0);
        row.r0_max = rep.r0_max;
        row.r0_min = rep.r0_min;
        row.critical_radius = rep.critical_radius;
        row.predicted = rep.predicted_regime;
        const Trajectory traj = run_scenario(s);
        row.observed = classify(traj, s.classify);
        row.h_final = traj.h_series.back();
        row.sup_E_final = traj.sup_E.back();
        row.sup_I_final = traj.sup_I.back();
        row.violations = detail::violation_count(traj);
      } catch (const std::exception& e) {
        row.status = e.what();
        std::replace(row.status.begin(), row.status.end(), ',', ';');
        std::replace(row.status.begin(), row.status.end(), '\n', ' ');
      }
    }
  };
  const std::size_t n = std::max<std::size_t>(1, std::min(threads, cells.size()));
  std::vector<std::thread> pool;
  for (std::size_t t = 1; t < n; ++t) pool.emplace_back(worker);
  worker();
  for (std::thread& t : pool) t.join();
  std::sort(rows.begin(), rows.end(),
            [](const SweepRow& a, const SweepRow& b) { return a.axis_values < b.axis_values; });
  return rows;
}

inline void write_sweep_csv(std::ostream& os, const std::vector<SweepAxis>& axes,
                            const std::vector<SweepRow>& rows) {
  for (const SweepAxis& ax : axes) os << ax.key << ',';
  os << "r0_max,r0_min,critical_radius,predicted_regime,observed_regime,h_final,sup_E_final,"
        "sup_I_final,monitor_violations,status\n";
  for (const SweepRow& r : rows) {
    for (double v : r.axis_values) os << format_real(v) << ',';
    os << format_real(r.r0_max) << ',' << format_real(r.r0_min) << ',' << format_real(r.critical_radius)
       << ',' << regime_name(r.predicted) << ',' << regime_name(r.observed) << ','
       << format_real(r.h_final) << ',' << format_real(r.sup_E_final) << ','
       << format_real(r.sup_I_final) << ',' << r.violations << ',' << r.status << '\n';
  }
}

inline int cmd_sweep(const Scenario& s, const std::vector<SweepAxis>& axes, std::size_t threads,
                     const fs::path& out, std::ostream& log) {
  const std::vector<SweepRow> rows = run_sweep(s, axes, threads);
  auto os = detail::open_output(out, "sweep.csv");
  write_sweep_csv(os, axes, rows);
  const auto failed = std::count_if(rows.begin(), rows.end(), [](const SweepRow& r) { return r.status != "ok"; });
  log << s.name << ": " << rows.size() << " cells, " << failed << " failed\n";
  return 0;
}

/// Leading eigenpairs of the linearization at the scenario's final front,
/// from both solvers, plus the decay rate fitted on the simulated tail.
inline int cmd_eigen(const Scenario& s, const fs::path& out, std::ostream& log) {
  const std::size_t nodes = s.eigen.nodes ? s.eigen.nodes : s.grid.m_inner;
  double h_inf = s.eigen.h_inf;
  Trajectory traj;
  const bool simulate = !(h_inf > 0.0);
  if (simulate) {
    traj = run_scenario(s);
    h_inf = traj.h_series.back();
  }
  const EigenResult direct = direct_eigensolve(s.params, nodes, h_inf);
  EigenResult ray;
  bool have_ray = true;
  try {
    ray = rayleigh_minimize(s.params, nodes, h_inf);
  } catch (const Error& e) {
    have_ray = false;
    log << s.name << ": rayleigh minimization skipped: " << e.what() << '\n';
  }
  RateFit fit;
  bool have_fit = false;
  if (simulate) {
    const double t1 = std::isnan(s.eigen.fit_stop) ? s.solver.t_end : s.eigen.fit_stop;
    const double t0 = std::isnan(s.eigen.fit_start) ? 0.6 * s.solver.t_end : s.eigen.fit_start;
    try {
      fit = decay_rate_fit(traj, t0, t1);
      have_fit = true;
    } catch (const Error& e) {
      log << s.name << ": decay fit skipped: " << e.what() << '\n';
    }
  }
  const double nan = std::numeric_limits<double>::quiet_NaN();
  if (s.wants("eigen")) {
    auto os = detail::open_output(out, "eigen.csv");
    os << "quantity,value\n";
    const auto row = [&](const char* k, double v) { os << k << ',' << format_real(v) << '\n'; };
    row("h_inf", h_inf);
    row("nodes", static_cast<double>(nodes));
    row("symmetric_lambda1_direct", direct.lambda1);
    row("symmetric_lambda2_direct", direct.lambda2);
    row("symmetric_lambda1_rayleigh", have_ray ? ray.lambda1 : nan);
    row("symmetric_lambda2_rayleigh", have_ray ? ray.lambda2 : nan);
    row("rayleigh_value", have_ray ? ray.rayleigh_value : nan);
    row("rayleigh_residual", have_ray ? ray.residual : nan);
    row("direct_residual", direct.residual);
    row("decay_lambda1", direct.decay_lambda1);
    row("decay_lambda2", direct.decay_lambda2);
    row("decay_residual", direct.decay_residual);
    row("fitted_rate", have_fit ? fit.rate : nan);
    row("fitted_rate_two_mode", have_fit ? fit.rate_two_mode : nan);
    row("fitted_gap", have_fit ? fit.gap : nan);
    row("fitted_rate_relative_error",
        have_fit ? std::abs(fit.rate - direct.decay_lambda1) / direct.decay_lambda1 : nan);
  }
  if (s.wants("modes")) {
    auto os = detail::open_output(out, "modes.svg");
    os << svg_plot(s.name + ": principal modes", "r", "amplitude",
                   {{"phi (symmetric)", direct.r, direct.phi1},
                    {"psi (symmetric)", direct.r, direct.psi1},
                    {"E (decay)", direct.r, direct.decay_phi1},
                    {"I (decay)", direct.r, direct.decay_psi1}});
  }
  log << s.name << ": decay lambda1 = " << direct.decay_lambda1 << " at h_inf = " << h_inf;
  if (have_fit) log << ", fitted " << fit.rate;
  log << '\n';
  return 0;
}

/// Space-free baseline from (A/mu1, c_E, c_I); writes ode.csv.
inline int cmd_ode(const Scenario& s, const fs::path& out, std::ostream& log) {
  const OdeState start{0.0, s.params.dfe_level(), s.initial.c_E, s.initial.c_I};
  const std::vector<OdeState> series = ode_run(start, s.params, s.solver.dt, s.solver.t_end);
  if (s.wants("ode")) {
    auto os = detail::open_output(out, "ode.csv");
    write_ode_csv(os, series);
  }
  const OdeState& last = series.back();
  log << s.name << ": S = " << last.S << ", E = " << last.E << ", I = " << last.I << " at t = " << last.t
      << '\n';
  return 0;
}

}  // namespace seis
