#pragma once

#include <cmath>

#include "seis/errors.hpp"

namespace seis {

struct CutoffValue {
  double value = 0.0;
  double d1 = 0.0;  // first derivative in s
  double d2 = 0.0;
  double d3 = 0.0;
};

namespace detail {

// Normalized monotone C^3 ramp f: [0,1] -> [0,1]. Its slope g = f' is a
// trapezoid whose shoulders (width kRampShoulder) are quintic smoothsteps, so
// f', f'', f''' all vanish at both ends. Peak slope is 1/(1 - kRampShoulder).
inline constexpr double kRampShoulder = 0.25;

struct RampValue {
  double f, g, dg, ddg;
};

inline RampValue ramp_left(double x) {
  const double a = kRampShoulder;
  const double c = 1.0 / (1.0 - a);
  if (x <= 0.0) return {0.0, 0.0, 0.0, 0.0};
  if (x < a) {
    const double y = x / a;
    const double y2 = y * y, y3 = y2 * y, y4 = y3 * y;
    const double prim = y4 * y2 - 3.0 * y4 * y + 2.5 * y4;  // int_0^y of the quintic smoothstep
    const double step = 6.0 * y4 * y - 15.0 * y4 + 10.0 * y3;
    const double dstep = 30.0 * y4 - 60.0 * y3 + 30.0 * y2;
    const double ddstep = 120.0 * y3 - 180.0 * y2 + 60.0 * y;
    return {c * a * prim, c * step, c * dstep / a, c * ddstep / (a * a)};
  }
  return {c * (0.5 * a + (x - a)), c, 0.0, 0.0};
}

inline RampValue ramp(double x) {
  if (x <= 0.5) return ramp_left(x);
  if (x >= 1.0) return {1.0, 0.0, 0.0, 0.0};
  const RampValue m = ramp_left(1.0 - x);
  return {1.0 - m.f, m.g, -m.dg, m.ddg};
}

}  // namespace detail

/// Cutoff xi for the straightening map: exactly 1 on |s - h_ref| < h_ref/8,
/// exactly 0 on |s - h_ref| > h_ref/2, monotone C^3 transitions in between,
/// with max |xi'| = (4/3) / (3 h_ref / 8) = 32/(9 h_ref) < 5/h_ref.
inline CutoffValue xi_cutoff(double s, double h_ref) {
  if (!(h_ref > 0.0)) throw DomainError("xi_cutoff: h_ref must be > 0");
  const double inner = h_ref / 8.0;
  const double width = 3.0 * h_ref / 8.0;
  const double offset = s - h_ref;
  const double dist = std::abs(offset);
  if (dist <= inner) return {1.0, 0.0, 0.0, 0.0};
  if (dist >= inner + width) return {0.0, 0.0, 0.0, 0.0};
  const double sign = offset > 0.0 ? 1.0 : -1.0;
  const detail::RampValue f = detail::ramp((dist - inner) / width);
  return {1.0 - f.f, -sign * f.g / width, -f.dg / (width * width),
          -sign * f.ddg / (width * width * width)};
}

/// Chain-rule coefficients of r = s + xi(s) (h - h_ref):
///   Delta_r S = X Delta_s u + (Y + W) u_s,   S_t = u_t - h' Z u_s.
struct StraighteningCoeffs {
  double X = 1.0;
  double Y = 0.0;
  double Z = 0.0;
  double W = 0.0;
};

inline StraighteningCoeffs straightening_coeffs(double h, double h_ref, double s, int dim_n) {
  if (!(h_ref > 0.0)) throw DomainError("straightening_coeffs: h_ref must be > 0");
  const double shift = h - h_ref;
  if (std::abs(shift) > h_ref / 8.0)
    throw DiffeomorphismError("straightening_coeffs: |h - h_ref| exceeds h_ref/8");
  const CutoffValue xi = xi_cutoff(s, h_ref);
  const double jac = 1.0 + xi.d1 * shift;
  StraighteningCoeffs c;
  c.X = 1.0 / (jac * jac);
  c.Y = -xi.d2 * shift / (jac * jac * jac);
  c.Z = xi.value / jac;
  // W = (n - 1) X (s xi' - xi)(h - h_ref) / (s r): the curvature term of the radial Laplacian.
  const double numer = (s * xi.d1 - xi.value) * shift;
  c.W = numer == 0.0 ? 0.0
                     : (dim_n - 1) * c.X * numer / (s * (s + xi.value * shift));
  return c;
}

/// r(s) for the cutoff straightening map.
inline double straightened_radius(double h, double h_ref, double s) {
  return s + xi_cutoff(s, h_ref).value * (h - h_ref);
}

/// Proportional front-fixing map s = h_ref r / h.
struct FrontFixing {
  double r = 0.0;
  double ds_dr = 1.0;
  double ds_dt_over_hprime = 0.0;  // (ds/dt) / h'
};

inline FrontFixing front_fixing_map(double h, double h_ref, double s) {
  if (!(h > 0.0)) throw DomainError("front_fixing_map: h must be > 0");
  if (!(h_ref > 0.0)) throw DomainError("front_fixing_map: h_ref must be > 0");
  return {s * h / h_ref, h_ref / h, -s / h};
}

inline double front_fixing_inverse(double h, double h_ref, double r) {
  if (!(h > 0.0)) throw DomainError("front_fixing_inverse: h must be > 0");
  return r * h_ref / h;
}

}  // namespace seis
