#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "seis/errors.hpp"
#include "seis/ode.hpp"
#include "seis/solver.hpp"

namespace seis {

/// Shortest-round-trip-safe text for a double (17 significant digits).
inline std::string format_real(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline double parse_real_field(const std::string& s) {
  if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  if (s == "inf") return std::numeric_limits<double>::infinity();
  if (s == "-inf") return -std::numeric_limits<double>::infinity();
  // strtod rather than stod: subnormal values must read back, not throw.
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size()) throw ParseError(0, "bad number '" + s + "'");
  return v;
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::stringstream ss(line);
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

inline const char* trajectory_header() { return "t,h,h_prime,sup_S,sup_E,sup_I,total_EI_weighted"; }

inline void write_trajectory_csv(std::ostream& os, const Trajectory& traj) {
  os << trajectory_header() << '\n';
  for (std::size_t i = 0; i < traj.size(); ++i) {
    os << format_real(traj.times[i]) << ',' << format_real(traj.h_series[i]) << ','
       << format_real(traj.hprime_series[i]) << ',' << format_real(traj.sup_S[i]) << ','
       << format_real(traj.sup_E[i]) << ',' << format_real(traj.sup_I[i]) << ','
       << format_real(traj.total_EI_weighted[i]) << '\n';
  }
}

/// Reads the per-step series written by `write_trajectory_csv`.
inline Trajectory read_trajectory_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line != trajectory_header())
    throw ParseError(1, "trajectory csv: unexpected header");
  Trajectory traj;
  std::size_t line_no = 1;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto cells = split_csv_line(line);
    if (cells.size() != 7) throw ParseError(line_no, "trajectory csv: expected 7 columns");
    try {
      traj.times.push_back(parse_real_field(cells[0]));
      traj.h_series.push_back(parse_real_field(cells[1]));
      traj.hprime_series.push_back(parse_real_field(cells[2]));
      traj.sup_S.push_back(parse_real_field(cells[3]));
      traj.sup_E.push_back(parse_real_field(cells[4]));
      traj.sup_I.push_back(parse_real_field(cells[5]));
      traj.total_EI_weighted.push_back(parse_real_field(cells[6]));
    } catch (const ParseError& e) {
      throw ParseError(line_no, std::string("trajectory csv: ") + e.what());
    }
  }
  return traj;
}

inline void write_fields_csv(std::ostream& os, const Trajectory& traj) {
  os << "t,h,r,S,E,I\n";
  for (const Snapshot& s : traj.snapshots)
    for (std::size_t j = 0; j < s.r.size(); ++j)
      os << format_real(s.t) << ',' << format_real(s.h) << ',' << format_real(s.r[j]) << ','
         << format_real(s.S[j]) << ',' << format_real(s.E[j]) << ',' << format_real(s.I[j]) << '\n';
}

inline void write_monitors_csv(std::ostream& os, const Trajectory& traj) {
  os << "t,kind,value,bound\n";
  for (const MonitorEvent& e : traj.monitor_events)
    os << format_real(e.t) << ',' << e.kind << ',' << format_real(e.value) << ','
       << format_real(e.bound) << '\n';
}

inline void write_ode_csv(std::ostream& os, const std::vector<OdeState>& series) {
  os << "t,S,E,I\n";
  for (const OdeState& x : series)
    os << format_real(x.t) << ',' << format_real(x.S) << ',' << format_real(x.E) << ','
       << format_real(x.I) << '\n';
}

struct PlotSeries {
  std::string label;
  std::vector<double> x, y;
};

inline std::string xml_escape(const std::string& text) {
  std::string out;
  for (char c : text) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

/// Minimal line chart: one polyline per series, axes with min/max labels.
inline std::string svg_plot(const std::string& title, const std::string& xlabel,
                            const std::string& ylabel, const std::vector<PlotSeries>& series) {
  const double W = 640, H = 400, L = 70, R = 20, T = 40, B = 50;
  double x0 = INFINITY, x1 = -INFINITY, y0 = INFINITY, y1 = -INFINITY;
  for (const PlotSeries& s : series)
    for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
      x0 = std::min(x0, s.x[i]), x1 = std::max(x1, s.x[i]);
      y0 = std::min(y0, s.y[i]), y1 = std::max(y1, s.y[i]);
    }
  if (!(x1 > x0)) x0 = std::isfinite(x0) ? x0 - 0.5 : 0.0, x1 = x0 + 1.0;
  if (!(y1 > y0)) y0 = std::isfinite(y0) ? y0 - 0.5 : 0.0, y1 = y0 + 1.0;
  const auto px = [&](double x) { return L + (x - x0) / (x1 - x0) * (W - L - R); };
  const auto py = [&](double y) { return H - B - (y - y0) / (y1 - y0) * (H - T - B); };
  static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};

  std::ostringstream os;
  char buf[64];
  const auto num = [&](double v) {
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return std::string(buf);
  };
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
     << "\" viewBox=\"0 0 " << W << ' ' << H << "\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << W / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"16\">" << xml_escape(title) << "</text>\n";
  os << "<polyline fill=\"none\" stroke=\"black\" points=\"" << L << ',' << T << ' ' << L << ','
     << H - B << ' ' << W - R << ',' << H - B << "\"/>\n";
  os << "<text x=\"" << L << "\" y=\"" << H - B + 18 << "\" font-size=\"11\">" << num(x0) << "</text>\n";
  os << "<text x=\"" << W - R << "\" y=\"" << H - B + 18 << "\" font-size=\"11\" text-anchor=\"end\">"
     << num(x1) << "</text>\n";
  os << "<text x=\"" << L - 6 << "\" y=\"" << H - B << "\" font-size=\"11\" text-anchor=\"end\">"
     << num(y0) << "</text>\n";
  os << "<text x=\"" << L - 6 << "\" y=\"" << T + 10 << "\" font-size=\"11\" text-anchor=\"end\">"
     << num(y1) << "</text>\n";
  os << "<text x=\"" << (L + W - R) / 2 << "\" y=\"" << H - 12 << "\" text-anchor=\"middle\" font-size=\"12\">"
     << xml_escape(xlabel) << "</text>\n";
  os << "<text x=\"16\" y=\"" << (T + H - B) / 2 << "\" font-size=\"12\" transform=\"rotate(-90 16 "
     << (T + H - B) / 2 << ")\" text-anchor=\"middle\">" << xml_escape(ylabel) << "</text>\n";
  for (std::size_t k = 0; k < series.size(); ++k) {
    const PlotSeries& s = series[k];
    const char* color = colors[k % 6];
    os << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
      os << num(px(s.x[i])) << ',' << num(py(s.y[i])) << ' ';
    }
    os << "\"/>\n";
    os << "<text x=\"" << W - R - 4 << "\" y=\"" << T + 14 * (k + 1) << "\" font-size=\"11\" fill=\""
       << color << "\" text-anchor=\"end\">" << xml_escape(s.label) << "</text>\n";
  }
  os << "</svg>\n";
  return os.str();
}

}  // namespace seis
