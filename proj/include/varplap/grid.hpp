#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <string>

#include "varplap/errors.hpp"

namespace varplap {

template <typename Scalar>
using ArrayX = Eigen::Array<Scalar, Eigen::Dynamic, 1>;

using ArrayXb = Eigen::Array<bool, Eigen::Dynamic, 1>;

template <typename Scalar>
using ArrayMap = Eigen::Map<Eigen::Array<Scalar, Eigen::Dynamic, Eigen::Dynamic>>;

template <typename Scalar>
using ConstArrayMap = Eigen::Map<const Eigen::Array<Scalar, Eigen::Dynamic, Eigen::Dynamic>>;

/// Which node layer carries Dirichlet data.
///
/// AllSides is the usual rectangle boundary. XSidesOnly pins only the two
/// x-extremal columns; with ny == 2 and y-independent data this recovers the
/// one-dimensional problem through the same two-dimensional machinery.
enum class BoundaryKind { AllSides, XSidesOnly };

/// Nodal scalar field on a uniform rectangular grid.
///
/// Nodes are stored in node order k = j*nx + i (x fastest). boundary_mask is
/// true on the nodes that carry Dirichlet data.
template <typename Scalar>
struct GridFunction {
  Eigen::Index nx{0}, ny{0};
  Scalar hx{0}, hy{0};
  ArrayX<Scalar> values;
  ArrayXb boundary_mask;

  GridFunction() = default;

  GridFunction(Eigen::Index nx_, Eigen::Index ny_, Scalar hx_, Scalar hy_,
               ArrayX<Scalar> values_, ArrayXb mask_)
      : nx(nx_), ny(ny_), hx(hx_), hy(hy_), values(std::move(values_)), boundary_mask(std::move(mask_)) {
    if (nx < 2 || ny < 2) throw DomainError("GridFunction: need at least 2 nodes per axis");
    if (!(hx > Scalar(0)) || !(hy > Scalar(0))) throw DomainError("GridFunction: mesh widths must be positive");
    if (values.size() != nx * ny) throw DimensionError("GridFunction: values length must equal nx*ny");
    if (boundary_mask.size() != nx * ny) throw DimensionError("GridFunction: mask length must equal nx*ny");
  }

  Eigen::Index size() const { return nx * ny; }
  Eigen::Index node(Eigen::Index i, Eigen::Index j) const { return j * nx + i; }
  Scalar x(Eigen::Index i) const { return Scalar(i) * hx; }
  Scalar y(Eigen::Index j) const { return Scalar(j) * hy; }

  Scalar& operator()(Eigen::Index i, Eigen::Index j) { return values[node(i, j)]; }
  Scalar operator()(Eigen::Index i, Eigen::Index j) const { return values[node(i, j)]; }

  /// View of the nodal values as an (nx, ny) array.
  ConstArrayMap<Scalar> as_matrix() const { return ConstArrayMap<Scalar>(values.data(), nx, ny); }

  /// Same grid geometry and boundary layout, different values.
  GridFunction with_values(ArrayX<Scalar> v) const {
    return GridFunction(nx, ny, hx, hy, std::move(v), boundary_mask);
  }

  Eigen::Index interior_count() const {
    Eigen::Index n = 0;
    for (Eigen::Index k = 0; k < size(); ++k)
      if (!boundary_mask[k]) ++n;
    return n;
  }
};

template <typename Scalar>
bool same_geometry(const GridFunction<Scalar>& a, const GridFunction<Scalar>& b) {
  return a.nx == b.nx && a.ny == b.ny && a.hx == b.hx && a.hy == b.hy;
}

/// Per-cell vector field in R^2 (one vector per grid cell, d = 2).
///
/// The norm used throughout is the Euclidean one, |v| = sqrt(vx^2 + vy^2).
template <typename Scalar>
struct CellVectorField {
  Eigen::Index ncx{0}, ncy{0};
  Scalar hx{0}, hy{0};
  ArrayX<Scalar> vx, vy;

  CellVectorField() = default;

  CellVectorField(Eigen::Index ncx_, Eigen::Index ncy_, Scalar hx_, Scalar hy_,
                  ArrayX<Scalar> vx_, ArrayX<Scalar> vy_)
      : ncx(ncx_), ncy(ncy_), hx(hx_), hy(hy_), vx(std::move(vx_)), vy(std::move(vy_)) {
    if (ncx < 1 || ncy < 1) throw DomainError("CellVectorField: need at least one cell per axis");
    if (vx.size() != ncx * ncy || vy.size() != ncx * ncy)
      throw DimensionError("CellVectorField: component length must equal ncx*ncy");
  }

  Eigen::Index size() const { return ncx * ncy; }
  Eigen::Index cell(Eigen::Index i, Eigen::Index j) const { return j * ncx + i; }
  Scalar cell_area() const { return hx * hy; }

  /// Euclidean magnitude per cell.
  ArrayX<Scalar> magnitude() const { return (vx.square() + vy.square()).sqrt(); }
};

/// Samples of a variable exponent p(x) at cell centers, with cached extremes.
///
/// Every sample must satisfy 1 < p < infinity; p == 1 and unbounded samples
/// are rejected on construction.
template <typename Scalar>
struct ExponentField {
  Eigen::Index ncx{0}, ncy{0};
  ArrayX<Scalar> values;
  Scalar p_minus{0}, p_plus{0};

  ExponentField() = default;

  ExponentField(Eigen::Index ncx_, Eigen::Index ncy_, ArrayX<Scalar> values_)
      : ncx(ncx_), ncy(ncy_), values(std::move(values_)) {
    if (ncx < 1 || ncy < 1) throw DomainError("ExponentField: need at least one cell per axis");
    if (values.size() != ncx * ncy) throw DimensionError("ExponentField: values length must equal ncx*ncy");
    p_minus = values.minCoeff();
    p_plus = values.maxCoeff();
    if (!(p_minus > Scalar(1)))
      throw DomainError("ExponentField: every sample must satisfy p > 1 (got p_minus = " +
                        std::to_string(double(p_minus)) + ")");
    if (!std::isfinite(double(p_plus)))
      throw DomainError("ExponentField: exponent samples must be finite");
  }

  Eigen::Index size() const { return ncx * ncy; }

  bool is_constant(Scalar value) const { return (values == value).all(); }

  ConstArrayMap<Scalar> as_matrix() const { return ConstArrayMap<Scalar>(values.data(), ncx, ncy); }
};

/// Uniform axis-aligned rectangular grid on [0,Lx] x [0,Ly].
///
/// Node spacing is hx = Lx/(nx-1), hy = Ly/(ny-1); cells are the (nx-1)(ny-1)
/// squares between nodes, with quantities like p(x) sampled at cell centers.
template <typename Scalar>
struct Grid {
  Eigen::Index nx{2}, ny{2};
  Scalar Lx{1}, Ly{1};

  Grid(Eigen::Index nx_, Eigen::Index ny_, Scalar Lx_ = Scalar(1), Scalar Ly_ = Scalar(1))
      : nx(nx_), ny(ny_), Lx(Lx_), Ly(Ly_) {
    if (nx < 2 || ny < 2) throw DomainError("Grid: need at least 2 nodes per axis");
    if (!(Lx > Scalar(0)) || !(Ly > Scalar(0))) throw DomainError("Grid: extent must be positive");
  }

  Scalar hx() const { return Lx / Scalar(nx - 1); }
  Scalar hy() const { return Ly / Scalar(ny - 1); }
  Eigen::Index ncx() const { return nx - 1; }
  Eigen::Index ncy() const { return ny - 1; }
  Eigen::Index node_count() const { return nx * ny; }
  Eigen::Index cell_count() const { return ncx() * ncy(); }
  Scalar cell_area() const { return hx() * hy(); }

  Scalar x(Eigen::Index i) const { return Scalar(i) * hx(); }
  Scalar y(Eigen::Index j) const { return Scalar(j) * hy(); }
  Scalar xc(Eigen::Index i) const { return (Scalar(i) + Scalar(0.5)) * hx(); }
  Scalar yc(Eigen::Index j) const { return (Scalar(j) + Scalar(0.5)) * hy(); }

  ArrayXb boundary_mask(BoundaryKind kind = BoundaryKind::AllSides) const {
    ArrayXb mask = ArrayXb::Constant(node_count(), false);
    for (Eigen::Index j = 0; j < ny; ++j)
      for (Eigen::Index i = 0; i < nx; ++i) {
        const bool on_x = (i == 0 || i == nx - 1);
        const bool on_y = (j == 0 || j == ny - 1);
        mask[j * nx + i] = (kind == BoundaryKind::AllSides) ? (on_x || on_y) : on_x;
      }
    return mask;
  }

  /// Sample fn(x, y) at nodes.
  template <typename Fn>
  GridFunction<Scalar> sample_nodes(Fn&& fn, BoundaryKind kind = BoundaryKind::AllSides) const {
    ArrayX<Scalar> v(node_count());
    for (Eigen::Index j = 0; j < ny; ++j)
      for (Eigen::Index i = 0; i < nx; ++i) v[j * nx + i] = fn(x(i), y(j));
    return GridFunction<Scalar>(nx, ny, hx(), hy(), std::move(v), boundary_mask(kind));
  }

  GridFunction<Scalar> constant_nodes(Scalar c, BoundaryKind kind = BoundaryKind::AllSides) const {
    return GridFunction<Scalar>(nx, ny, hx(), hy(), ArrayX<Scalar>::Constant(node_count(), c),
                                boundary_mask(kind));
  }

  GridFunction<Scalar> zeros(BoundaryKind kind = BoundaryKind::AllSides) const {
    return constant_nodes(Scalar(0), kind);
  }

  /// Sample fn(x, y) at cell centers into an exponent field.
  template <typename Fn>
  ExponentField<Scalar> sample_exponent(Fn&& fn) const {
    ArrayX<Scalar> v(cell_count());
    for (Eigen::Index j = 0; j < ncy(); ++j)
      for (Eigen::Index i = 0; i < ncx(); ++i) v[j * ncx() + i] = fn(xc(i), yc(j));
    return ExponentField<Scalar>(ncx(), ncy(), std::move(v));
  }

  ExponentField<Scalar> constant_exponent(Scalar p) const {
    return ExponentField<Scalar>(ncx(), ncy(), ArrayX<Scalar>::Constant(cell_count(), p));
  }

  CellVectorField<Scalar> constant_cell_vectors(Scalar vx, Scalar vy) const {
    return CellVectorField<Scalar>(ncx(), ncy(), hx(), hy(),
                                   ArrayX<Scalar>::Constant(cell_count(), vx),
                                   ArrayX<Scalar>::Constant(cell_count(), vy));
  }
};

template <typename Scalar>
bool matches(const Grid<Scalar>& g, const GridFunction<Scalar>& u) {
  return u.nx == g.nx && u.ny == g.ny && u.hx == g.hx() && u.hy == g.hy();
}

template <typename Scalar>
bool matches_cells(const GridFunction<Scalar>& u, const ExponentField<Scalar>& p) {
  return p.ncx == u.nx - 1 && p.ncy == u.ny - 1;
}

template <typename Scalar>
bool matches_cells(const CellVectorField<Scalar>& g, const ExponentField<Scalar>& p) {
  return p.ncx == g.ncx && p.ncy == g.ncy;
}

}  // namespace varplap
