#pragma once

#include <Eigen/Dense>
#include <cmath>

#include "varplap/grid.hpp"

namespace varplap {

/// Per-cell gradient: each component is the mean of the two parallel edge
/// differences of the cell, divided by the mesh width. Exact for affine
/// fields, linear in u, and annihilates constants.
template <typename Scalar>
CellVectorField<Scalar> gradient(const GridFunction<Scalar>& u) {
  const Eigen::Index ncx = u.nx - 1, ncy = u.ny - 1;
  ConstArrayMap<Scalar> U(u.values.data(), u.nx, u.ny);
  auto LL = U.block(0, 0, ncx, ncy);
  auto LR = U.block(1, 0, ncx, ncy);
  auto UL = U.block(0, 1, ncx, ncy);
  auto UR = U.block(1, 1, ncx, ncy);
  ArrayX<Scalar> gx(ncx * ncy), gy(ncx * ncy);
  ArrayMap<Scalar>(gx.data(), ncx, ncy) = ((LR - LL) + (UR - UL)) / (Scalar(2) * u.hx);
  ArrayMap<Scalar>(gy.data(), ncx, ncy) = ((UL - LL) + (UR - LR)) / (Scalar(2) * u.hy);
  return CellVectorField<Scalar>(ncx, ncy, u.hx, u.hy, std::move(gx), std::move(gy));
}

template <typename Scalar>
CellVectorField<Scalar> gradient(const GridFunction<Scalar>& u, const Grid<Scalar>& grid) {
  if (!matches(grid, u)) throw DimensionError("gradient: function does not live on the given grid");
  return gradient(u);
}

/// Indices of the non-boundary nodes, in node order.
template <typename Scalar>
Eigen::Array<Eigen::Index, Eigen::Dynamic, 1> interior_indices(const GridFunction<Scalar>& u) {
  Eigen::Array<Eigen::Index, Eigen::Dynamic, 1> idx(u.interior_count());
  Eigen::Index n = 0;
  for (Eigen::Index k = 0; k < u.size(); ++k)
    if (!u.boundary_mask[k]) idx[n++] = k;
  return idx;
}

/// u = phi on the boundary layer, u = phi + w on interior nodes; w is indexed
/// over the non-boundary nodes in node order. u - phi then vanishes on the
/// boundary by construction.
template <typename Scalar, typename DW>
GridFunction<Scalar> lift_boundary(const GridFunction<Scalar>& phi,
                                   const Eigen::ArrayBase<DW>& w_interior) {
  const auto idx = interior_indices(phi);
  if (w_interior.size() != idx.size())
    throw DimensionError("lift_boundary: interior value count mismatch");
  ArrayX<Scalar> v = phi.values;
  for (Eigen::Index n = 0; n < idx.size(); ++n) v[idx[n]] += w_interior[n];
  return phi.with_values(std::move(v));
}

/// Values of u at the non-boundary nodes, in node order (the inverse of the
/// lift against a zero datum).
template <typename Scalar>
ArrayX<Scalar> extract_interior(const GridFunction<Scalar>& u) {
  const auto idx = interior_indices(u);
  ArrayX<Scalar> w(idx.size());
  for (Eigen::Index n = 0; n < idx.size(); ++n) w[n] = u.values[idx[n]];
  return w;
}

/// Replace the interior values of phi by the given ones (boundary kept).
template <typename Scalar, typename DW>
GridFunction<Scalar> scatter_interior(const GridFunction<Scalar>& phi,
                                      const Eigen::ArrayBase<DW>& interior) {
  const auto idx = interior_indices(phi);
  if (interior.size() != idx.size()) throw DimensionError("scatter_interior: size mismatch");
  ArrayX<Scalar> v = phi.values;
  for (Eigen::Index n = 0; n < idx.size(); ++n) v[idx[n]] = interior[n];
  return phi.with_values(std::move(v));
}

/// Nodal quadrature weights of the cell-corner rule: each cell spreads area/4
/// onto its four corners (area for interior nodes, less along the boundary).
template <typename Scalar>
ArrayX<Scalar> node_weights(const GridFunction<Scalar>& u) {
  const Eigen::Index ncx = u.nx - 1, ncy = u.ny - 1;
  ArrayX<Scalar> w = ArrayX<Scalar>::Zero(u.size());
  ArrayMap<Scalar> W(w.data(), u.nx, u.ny);
  const Scalar quarter = u.hx * u.hy / Scalar(4);
  W.block(0, 0, ncx, ncy) += quarter;
  W.block(1, 0, ncx, ncy) += quarter;
  W.block(0, 1, ncx, ncy) += quarter;
  W.block(1, 1, ncx, ncy) += quarter;
  return w;
}

/// Load functional f(u) = integral of f*u, by the cell-corner quadrature rule
/// (equivalently sum_k w_k f_k u_k with the node_weights above).
template <typename Scalar>
Scalar functional_f(const GridFunction<Scalar>& f_density, const GridFunction<Scalar>& u) {
  if (!same_geometry(f_density, u)) throw DimensionError("functional_f: grid mismatch");
  return (f_density.values * u.values * node_weights(u)).sum();
}

/// The discrete Dirichlet problem  -div(|grad u|^{p-2} grad u) + q|u|^{p-2}u = f,
/// u = phi on the masked boundary nodes. The boundary layout is taken from phi.
template <typename Scalar>
struct DirichletProblem {
  Grid<Scalar> grid;
  ExponentField<Scalar> p;
  GridFunction<Scalar> q;
  GridFunction<Scalar> f;
  GridFunction<Scalar> phi;

  DirichletProblem(Grid<Scalar> grid_, ExponentField<Scalar> p_, GridFunction<Scalar> q_,
                   GridFunction<Scalar> f_, GridFunction<Scalar> phi_)
      : grid(std::move(grid_)), p(std::move(p_)), q(std::move(q_)), f(std::move(f_)),
        phi(std::move(phi_)) {
    if (!matches(grid, phi) || !matches(grid, q) || !matches(grid, f))
      throw DimensionError("DirichletProblem: all nodal fields must live on the grid");
    if (p.ncx != grid.ncx() || p.ncy != grid.ncy())
      throw DimensionError("DirichletProblem: exponent field must live on the grid cells");
    if ((q.values < Scalar(0)).any())
      throw DomainError("DirichletProblem: q must be nonnegative everywhere");
  }

  const ArrayXb& boundary_mask() const { return phi.boundary_mask; }
};

}  // namespace varplap
