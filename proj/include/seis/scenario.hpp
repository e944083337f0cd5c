#pragma once

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "seis/errors.hpp"
#include "seis/model.hpp"
#include "seis/solver.hpp"
#include "seis/thresholds.hpp"

namespace seis {

struct InitialSpec {
  double h0 = 1.0;
  double c_E = 0.0;
  double c_I = 1.0;
};

struct GridSpec {
  std::size_t m_inner = 256;
  std::size_t m_outer = 256;
  double r_max = 0.0;  // 0: 8 * h0
};

struct EigenSpec {
  double h_inf = 0.0;     // 0: final front of a simulation of the scenario
  std::size_t nodes = 0;  // 0: grid.m_inner
  double fit_start = std::numeric_limits<double>::quiet_NaN();  // NaN: 0.6 * t_end
  double fit_stop = std::numeric_limits<double>::quiet_NaN();   // NaN: t_end
};

struct Scenario {
  std::string name = "scenario";
  ModelParams params;
  InitialSpec initial;
  GridSpec grid;
  SolverConfig solver;
  EigenSpec eigen;
  ClassifyTolerances classify;
  std::vector<std::string> outputs;  // empty: everything the command produces

  bool wants(std::string_view artifact) const {
    return outputs.empty() || std::find(outputs.begin(), outputs.end(), artifact) != outputs.end();
  }
  double r_max() const { return grid.r_max > 0.0 ? grid.r_max : 8.0 * initial.h0; }
};

namespace detail {

inline std::string trim(std::string_view s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return std::string(s.substr(a, b - a));
}

inline double parse_real(const std::string& key, const std::string& text) {
  double v = 0.0;
  const char* first = text.data();
  const char* last = first + text.size();
  if (!text.empty() && *first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last || !std::isfinite(v))
    throw ValidationError(key, key + ": '" + text + "' is not a finite number");
  return v;
}

inline std::size_t parse_count(const std::string& key, const std::string& text) {
  std::size_t v = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size())
    throw ValidationError(key, key + ": '" + text + "' is not a nonnegative integer");
  return v;
}

inline bool parse_flag(const std::string& key, const std::string& text) {
  std::string t = text;
  std::transform(t.begin(), t.end(), t.begin(), [](unsigned char c) { return std::tolower(c); });
  if (t == "true" || t == "yes" || t == "on" || t == "1") return true;
  if (t == "false" || t == "no" || t == "off" || t == "0") return false;
  throw ValidationError(key, key + ": '" + text + "' is not a boolean");
}

using Setter = std::function<void(Scenario&, const std::string&, const std::string&)>;

inline const std::map<std::string, Setter>& scenario_setters() {
  static const std::map<std::string, Setter> table = [] {
    std::map<std::string, Setter> m;
    const auto num = [&m](const std::string& key, std::function<double&(Scenario&)> field) {
      m[key] = [field](Scenario& s, const std::string& k, const std::string& v) {
        field(s) = parse_real(k, v);
      };
    };
    const auto count = [&m](const std::string& key, std::function<std::size_t&(Scenario&)> field) {
      m[key] = [field](Scenario& s, const std::string& k, const std::string& v) {
        field(s) = parse_count(k, v);
      };
    };
    const auto flag = [&m](const std::string& key, std::function<bool&(Scenario&)> field) {
      m[key] = [field](Scenario& s, const std::string& k, const std::string& v) {
        field(s) = parse_flag(k, v);
      };
    };
    num("params.A", [](Scenario& s) -> double& { return s.params.A; });
    num("params.alpha", [](Scenario& s) -> double& { return s.params.alpha; });
    num("params.mu1", [](Scenario& s) -> double& { return s.params.mu1; });
    num("params.mu2", [](Scenario& s) -> double& { return s.params.mu2; });
    num("params.mu3", [](Scenario& s) -> double& { return s.params.mu3; });
    num("params.r1", [](Scenario& s) -> double& { return s.params.r1; });
    num("params.r2", [](Scenario& s) -> double& { return s.params.r2; });
    num("params.beta1", [](Scenario& s) -> double& { return s.params.beta1; });
    num("params.p", [](Scenario& s) -> double& { return s.params.p; });
    num("params.d1", [](Scenario& s) -> double& { return s.params.d1; });
    num("params.d2", [](Scenario& s) -> double& { return s.params.d2; });
    num("params.d3", [](Scenario& s) -> double& { return s.params.d3; });
    num("params.beta_front", [](Scenario& s) -> double& { return s.params.beta_front; });
    num("params.mu_front", [](Scenario& s) -> double& { return s.params.mu_front; });
    m["params.d"] = [](Scenario& s, const std::string& k, const std::string& v) {
      s.params.d1 = s.params.d2 = s.params.d3 = parse_real(k, v);
    };
    m["params.mu"] = [](Scenario& s, const std::string& k, const std::string& v) {
      s.params.mu1 = s.params.mu2 = s.params.mu3 = parse_real(k, v);
    };
    m["params.dim_n"] = [](Scenario& s, const std::string& k, const std::string& v) {
      const std::size_t n = parse_count(k, v);
      if (n > 64) throw ValidationError(k, k + ": dimension too large");
      s.params.dim_n = static_cast<int>(n);
    };
    num("initial.h0", [](Scenario& s) -> double& { return s.initial.h0; });
    num("initial.c_E", [](Scenario& s) -> double& { return s.initial.c_E; });
    num("initial.c_I", [](Scenario& s) -> double& { return s.initial.c_I; });
    count("grid.m_inner", [](Scenario& s) -> std::size_t& { return s.grid.m_inner; });
    count("grid.m_outer", [](Scenario& s) -> std::size_t& { return s.grid.m_outer; });
    num("grid.r_max", [](Scenario& s) -> double& { return s.grid.r_max; });
    num("solver.dt", [](Scenario& s) -> double& { return s.solver.dt; });
    num("solver.t_end", [](Scenario& s) -> double& { return s.solver.t_end; });
    num("solver.theta", [](Scenario& s) -> double& { return s.solver.theta; });
    num("solver.monitor_tolerance", [](Scenario& s) -> double& { return s.solver.monitor_tolerance; });
    count("solver.snapshot_every", [](Scenario& s) -> std::size_t& { return s.solver.snapshot_every; });
    flag("solver.positivity_clip", [](Scenario& s) -> bool& { return s.solver.positivity_clip; });
    flag("solver.predictor_corrector", [](Scenario& s) -> bool& { return s.solver.predictor_corrector; });
    m["solver.advection"] = [](Scenario& s, const std::string& k, const std::string& v) {
      if (v == "hybrid") s.solver.advection = AdvectionScheme::Hybrid;
      else if (v == "upwind") s.solver.advection = AdvectionScheme::Upwind;
      else throw ValidationError(k, k + ": expected 'hybrid' or 'upwind'");
    };
    num("eigen.h_inf", [](Scenario& s) -> double& { return s.eigen.h_inf; });
    count("eigen.nodes", [](Scenario& s) -> std::size_t& { return s.eigen.nodes; });
    num("eigen.fit_start", [](Scenario& s) -> double& { return s.eigen.fit_start; });
    num("eigen.fit_stop", [](Scenario& s) -> double& { return s.eigen.fit_stop; });
    num("classify.eps_extinct", [](Scenario& s) -> double& { return s.classify.eps_extinct; });
    num("classify.eps_front", [](Scenario& s) -> double& { return s.classify.eps_front; });
    num("classify.eps_persist", [](Scenario& s) -> double& { return s.classify.eps_persist; });
    m["name"] = [](Scenario& s, const std::string&, const std::string& v) { s.name = v; };
    m["outputs"] = [](Scenario& s, const std::string&, const std::string& v) {
      s.outputs.clear();
      std::stringstream ss(v);
      std::string item;
      while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) s.outputs.push_back(item);
      }
    };
    return m;
  }();
  return table;
}

}  // namespace detail

inline std::vector<std::string> scenario_keys() {
  std::vector<std::string> keys;
  for (const auto& [k, _] : detail::scenario_setters()) keys.push_back(k);
  return keys;
}

/// Sets one dotted key; throws UnknownKeyError (line 0) or ValidationError.
inline void apply_setting(Scenario& s, const std::string& key, const std::string& value,
                          std::size_t line = 0) {
  const auto& table = detail::scenario_setters();
  const auto it = table.find(key);
  if (it == table.end()) throw UnknownKeyError(line, key);
  it->second(s, key, value);
}

/// Checks every nested section; throws ValidationError naming the offending field.
inline void validate_scenario(const Scenario& s) {
  if (s.name.empty()) throw ValidationError("name", "name must not be empty");
  for (char c : s.name)
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '.'))
      throw ValidationError("name", "name may only contain letters, digits, '_', '-', '.'");
  try {
    validate_params(s.params);
  } catch (const ParamDomainError& e) {
    throw ValidationError(e.field(), e.what());
  }
  if (!(s.initial.h0 > 0.0)) throw ValidationError("initial.h0", "initial.h0 must be > 0");
  if (!(s.initial.c_I > 0.0)) throw ValidationError("initial.c_I", "initial.c_I must be > 0");
  if (!(s.initial.c_E >= 0.0)) throw ValidationError("initial.c_E", "initial.c_E must be >= 0");
  try {
    make_grid(s.initial.h0, s.grid.m_inner, s.r_max(), s.grid.m_outer);
  } catch (const DomainError& e) {
    throw ValidationError("grid", e.what());
  }
  try {
    validate_config(s.solver);
  } catch (const DomainError& e) {
    throw ValidationError("solver", e.what());
  }
  if (s.eigen.h_inf < 0.0) throw ValidationError("eigen.h_inf", "eigen.h_inf must be >= 0");
  if (s.eigen.nodes != 0 && s.eigen.nodes < 8)
    throw ValidationError("eigen.nodes", "eigen.nodes must be >= 8");
  for (const std::string& o : s.outputs) {
    static const std::set<std::string> known{"trajectory", "fields", "front", "monitors", "report",
                                             "sweep", "eigen", "modes", "ode"};
    if (!known.count(o)) throw ValidationError("outputs", "unknown output '" + o + "'");
  }
}

/// Parses the flat "key = value" scenario format: '#' starts a comment, blank
/// lines are ignored, keys carry dotted section prefixes, missing keys keep
/// their defaults, unknown and repeated keys are errors.
inline Scenario parse_scenario(std::string_view text) {
  Scenario s;
  std::set<std::string> seen;
  std::size_t line_no = 0, pos = 0;
  while (pos <= text.size()) {
    const std::size_t end = std::min(text.find('\n', pos), text.size());
    std::string line(text.substr(pos, end - pos));
    pos = end + 1;
    ++line_no;
    if (const std::size_t hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = detail::trim(line);
    if (line.empty()) {
      if (end == text.size()) break;
      continue;
    }
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos) throw ParseError(line_no, "expected 'key = value'");
    const std::string key = detail::trim(std::string_view(line).substr(0, eq));
    const std::string value = detail::trim(std::string_view(line).substr(eq + 1));
    if (key.empty()) throw ParseError(line_no, "missing key");
    if (value.empty()) throw ParseError(line_no, "missing value for '" + key + "'");
    if (!seen.insert(key).second) throw ParseError(line_no, "duplicate key '" + key + "'");
    apply_setting(s, key, value, line_no);
    if (end == text.size()) break;
  }
  validate_scenario(s);
  return s;
}

inline Grid scenario_grid(const Scenario& s) {
  return make_grid(s.initial.h0, s.grid.m_inner, s.r_max(), s.grid.m_outer);
}

inline InitialData scenario_initial(const Scenario& s, const Grid& grid) {
  return default_initial_profiles(s.params, s.initial.h0, grid, s.initial.c_E, s.initial.c_I);
}

inline Trajectory run_scenario(const Scenario& s) {
  const Grid grid = scenario_grid(s);
  return run(s.params, scenario_initial(s, grid), grid, s.solver);
}

}  // namespace seis
