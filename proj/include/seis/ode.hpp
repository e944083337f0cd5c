#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "seis/errors.hpp"
#include "seis/model.hpp"

namespace seis {

/// Space-free SEIS compartments.
struct OdeState {
  double t = 0.0;
  double S = 0.0, E = 0.0, I = 0.0;
};

struct OdeRates {
  double dS = 0.0, dE = 0.0, dI = 0.0;
};

inline OdeRates ode_rhs(const OdeState& x, const ModelParams& prm) {
  const double infection = prm.alpha * x.I * x.S;
  return {prm.A - infection - prm.mu1 * x.S + prm.r2 * x.I + prm.r1 * x.E,
          (1.0 - prm.p) * infection - (prm.beta1 + prm.r1 + prm.mu2) * x.E,
          prm.p * infection + prm.beta1 * x.E - (prm.r2 + prm.mu3) * x.I};
}

/// Classic fixed-step RK4. The last step is shortened to land on t_end.
inline std::vector<OdeState> ode_run(const OdeState& start, const ModelParams& prm, double dt,
                                     double t_end) {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw DomainError("ode_run: dt must be > 0");
  if (!(t_end >= start.t)) throw DomainError("ode_run: t_end precedes the start time");
  std::vector<OdeState> out{start};
  OdeState x = start;
  const auto shift = [](const OdeState& a, const OdeRates& k, double f) {
    return OdeState{a.t, a.S + f * k.dS, a.E + f * k.dE, a.I + f * k.dI};
  };
  const double eps = 1e-12 * std::max(1.0, std::abs(t_end));
  while (x.t < t_end - eps) {
    const double h = std::min(dt, t_end - x.t);
    const OdeRates k1 = ode_rhs(x, prm);
    const OdeRates k2 = ode_rhs(shift(x, k1, 0.5 * h), prm);
    const OdeRates k3 = ode_rhs(shift(x, k2, 0.5 * h), prm);
    const OdeRates k4 = ode_rhs(shift(x, k3, h), prm);
    x.S += h / 6.0 * (k1.dS + 2.0 * k2.dS + 2.0 * k3.dS + k4.dS);
    x.E += h / 6.0 * (k1.dE + 2.0 * k2.dE + 2.0 * k3.dE + k4.dE);
    x.I += h / 6.0 * (k1.dI + 2.0 * k2.dI + 2.0 * k3.dI + k4.dI);
    x.t = t_end - (x.t + h) < eps ? t_end : x.t + h;
    if (!std::isfinite(x.S) || !std::isfinite(x.E) || !std::isfinite(x.I))
      throw BlowupError("ode_run: non-finite state at t = " + std::to_string(x.t));
    out.push_back(x);
  }
  return out;
}

}  // namespace seis
