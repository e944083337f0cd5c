#pragma once

#include <cmath>
#include <cstddef>
#include <span>

namespace seis {

struct StencilRow {
  double sub = 0.0;
  double diag = 0.0;
  double super = 0.0;
};

/// int_{a}^{b} r^{n-1} dr
inline double shell_volume(double a, double b, int dim_n) {
  return (std::pow(b, dim_n) - std::pow(a, dim_n)) / static_cast<double>(dim_n);
}

/// Radial control volume of node i: the shell between the neighbouring
/// midpoints (the first node's shell starts at nodes[0], the last ends at nodes[last]).
inline double control_volume(std::span<const double> nodes, std::size_t i, int dim_n) {
  const std::size_t last = nodes.size() - 1;
  const double lo = i == 0 ? nodes[0] : 0.5 * (nodes[i - 1] + nodes[i]);
  const double hi = i == last ? nodes[last] : 0.5 * (nodes[i] + nodes[i + 1]);
  return shell_volume(lo, hi, dim_n);
}

/// Finite-volume row for scale * (w_rr + (n-1)/r w_r) at node i of a radial mesh
/// whose first node is r = 0:
///
///   scale * [ r_{i+1/2}^{n-1} (w_{i+1} - w_i) / dr_+  -  r_{i-1/2}^{n-1} (w_i - w_{i-1}) / dr_- ] / V_i
///
/// At r = 0 there is no inner face, which is the ghost-node reflection
/// w_r(0) = 0 (the row reduces to 2n (w_1 - w_0) / dr^2). At the last node the
/// outer face carries no flux (zero Neumann); callers with a Dirichlet end
/// simply do not assemble that row. Reproduces Delta(r^2) = 2n exactly on any
/// mesh, and the 1D central stencil on uniform meshes.
inline StencilRow radial_laplacian_row(std::span<const double> nodes, std::size_t i, int dim_n,
                                       double scale) {
  const std::size_t last = nodes.size() - 1;
  const double vol = control_volume(nodes, i, dim_n);
  StencilRow row;
  if (i > 0) {
    const double face = 0.5 * (nodes[i - 1] + nodes[i]);
    const double k = std::pow(face, dim_n - 1) / (nodes[i] - nodes[i - 1]);
    row.sub += scale * k / vol;
    row.diag -= scale * k / vol;
  }
  if (i < last) {
    const double face = 0.5 * (nodes[i] + nodes[i + 1]);
    const double k = std::pow(face, dim_n - 1) / (nodes[i + 1] - nodes[i]);
    row.super += scale * k / vol;
    row.diag -= scale * k / vol;
  }
  return row;
}

/// Uniform-mesh convenience overload: node i at r = i * dr on a mesh of `count` nodes.
inline StencilRow radial_laplacian_row(std::size_t i, std::size_t count, double dr, int dim_n,
                                       double scale) {
  const double nodes[3] = {i == 0 ? 0.0 : (i - 1) * dr, i * dr, (i + 1) * dr};
  // Re-express on a local 3-node window so the general routine handles the faces.
  if (i == 0) return radial_laplacian_row(std::span<const double>(nodes + 1, 2), 0, dim_n, scale);
  if (i + 1 == count)
    return radial_laplacian_row(std::span<const double>(nodes, 2), 1, dim_n, scale);
  return radial_laplacian_row(std::span<const double>(nodes, 3), 1, dim_n, scale);
}

}  // namespace seis
