#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <optional>
#include <random>
#include <sstream>
#include <vector>

#include "varplap/grid.hpp"

namespace varplap {

namespace detail {

/// Per-cell quadrature of |u|^p (optionally weighted by 1/p) over the nodes:
/// midpoint rule with the exponent taken at the cell center and the integrand
/// |u|^p averaged over the four cell corners. The averaging keeps the sum
/// strictly positive whenever any nodal value is nonzero, so the modular
/// vanishes exactly iff u == 0.
template <typename Scalar>
Scalar nodal_power_integral(const GridFunction<Scalar>& u, const ExponentField<Scalar>& p,
                            bool weighted) {
  if (!matches_cells(u, p))
    throw DimensionError("modular: exponent field does not match the function's cell layout");
  const Eigen::Index ncx = p.ncx, ncy = p.ncy;
  ConstArrayMap<Scalar> U(u.values.data(), u.nx, u.ny);
  ConstArrayMap<Scalar> P(p.values.data(), ncx, ncy);
  auto corner = [&](Eigen::Index di, Eigen::Index dj) {
    return U.block(di, dj, ncx, ncy).abs().pow(P);
  };
  Eigen::Array<Scalar, Eigen::Dynamic, Eigen::Dynamic> cellwise =
      (corner(0, 0) + corner(1, 0) + corner(0, 1) + corner(1, 1)) * Scalar(0.25);
  if (weighted) cellwise /= P;
  return cellwise.sum() * u.hx * u.hy;
}

}  // namespace detail

/// Modular of a nodal field without the 1/p weight: integral of |u|^{p(x)}.
template <typename Scalar>
Scalar modular_raw(const GridFunction<Scalar>& u, const ExponentField<Scalar>& p) {
  return detail::nodal_power_integral(u, p, false);
}

/// Modular of a nodal field with the 1/p weight: integral of |u|^{p(x)}/p(x).
template <typename Scalar>
Scalar modular_weighted(const GridFunction<Scalar>& u, const ExponentField<Scalar>& p) {
  return detail::nodal_power_integral(u, p, true);
}

/// Modular of a cell vector field: integral of |g|^{p(x)}/p(x) (weighted) or
/// |g|^{p(x)} (unweighted), both with the Euclidean cell magnitude.
template <typename Scalar>
Scalar modular_grad(const CellVectorField<Scalar>& g, const ExponentField<Scalar>& p,
                    bool weighted = true) {
  if (!matches_cells(g, p))
    throw DimensionError("modular_grad: exponent field does not match the cell layout");
  ArrayX<Scalar> terms = g.magnitude().pow(p.values);
  if (weighted) terms /= p.values;
  return terms.sum() * g.cell_area();
}

/// Same, restricted to the cells selected by `cells`.
template <typename Scalar>
Scalar modular_grad(const CellVectorField<Scalar>& g, const ExponentField<Scalar>& p,
                    const ArrayXb& cells, bool weighted = true) {
  if (!matches_cells(g, p))
    throw DimensionError("modular_grad: exponent field does not match the cell layout");
  if (cells.size() != g.size())
    throw DimensionError("modular_grad: cell selector length must equal the cell count");
  ArrayX<Scalar> terms = g.magnitude().pow(p.values);
  if (weighted) terms /= p.values;
  return cells.select(terms, Scalar(0)).sum() * g.cell_area();
}

namespace detail {

/// Luxemburg norm by bisection given an evaluator lambda -> modular(u/lambda).
/// The map lambda -> modular(u/lambda) is strictly decreasing for u != 0, so
/// the crossing of 1 is unique. The initial bracket follows from the scaling
/// bounds lambda^{-p_plus} rho(u) <= rho(u/lambda) <= lambda^{-p_minus} rho(u)
/// for lambda >= 1 (reversed exponents below 1).
template <typename Scalar, typename ModularAt>
Scalar luxemburg_bisect(Scalar rho_at_1, ModularAt&& rho_at, Scalar p_minus, Scalar p_plus,
                        Scalar tol, int max_iters) {
  if (!(tol > Scalar(0))) throw DomainError("luxemburg_norm: tol must be positive");
  if (rho_at_1 == Scalar(0)) return Scalar(0);
  if (std::abs(double(rho_at_1 - Scalar(1))) <= double(tol)) return Scalar(1);

  Scalar lo, hi;
  if (rho_at_1 > Scalar(1)) {
    lo = std::pow(rho_at_1, Scalar(1) / p_plus);
    hi = std::pow(rho_at_1, Scalar(1) / p_minus);
  } else {
    lo = std::pow(rho_at_1, Scalar(1) / p_minus);
    hi = std::pow(rho_at_1, Scalar(1) / p_plus);
  }
  lo = std::min(lo, Scalar(1));
  hi = std::max(hi, Scalar(1));
  // Guard against rounding at the bracket edges.
  int expand = 0;
  while (rho_at(lo) < Scalar(1) && expand++ < 8) lo *= Scalar(0.5);
  expand = 0;
  while (rho_at(hi) > Scalar(1) && expand++ < 8) hi *= Scalar(2);

  for (int it = 0; it < max_iters; ++it) {
    const Scalar mid = (lo + hi) / Scalar(2);
    const Scalar r = rho_at(mid);
    if (std::abs(double(r - Scalar(1))) <= double(tol)) return mid;
    if (r > Scalar(1))
      lo = mid;
    else
      hi = mid;
  }
  std::ostringstream oss;
  oss << "luxemburg_norm: no convergence within " << max_iters << " iterations, bracket ["
      << double(lo) << ", " << double(hi) << "]";
  throw IterationLimitError(oss.str());
}

}  // namespace detail

/// Luxemburg norm inf{a > 0 : modular(u/a) <= 1} of a nodal field, for the
/// weighted or unweighted modular. Returns 0 for u == 0; otherwise a value
/// lambda with |modular(u/lambda) - 1| <= tol.
template <typename Scalar>
Scalar luxemburg_norm(const GridFunction<Scalar>& u, const ExponentField<Scalar>& p,
                      bool weighted = false, Scalar tol = Scalar(1e-12), int max_iters = 200) {
  const Scalar rho1 = detail::nodal_power_integral(u, p, weighted);
  auto rho_at = [&](Scalar lambda) {
    return detail::nodal_power_integral(u.with_values((u.values / lambda).eval()), p, weighted);
  };
  return detail::luxemburg_bisect(rho1, rho_at, p.p_minus, p.p_plus, tol, max_iters);
}

/// Luxemburg norm of the Euclidean magnitude of a cell vector field.
template <typename Scalar>
Scalar luxemburg_norm(const CellVectorField<Scalar>& g, const ExponentField<Scalar>& p,
                      bool weighted = true, Scalar tol = Scalar(1e-12), int max_iters = 200) {
  const Scalar rho1 = modular_grad(g, p, weighted);
  auto rho_at = [&](Scalar lambda) {
    CellVectorField<Scalar> scaled(g.ncx, g.ncy, g.hx, g.hy, (g.vx / lambda).eval(),
                                   (g.vy / lambda).eval());
    return modular_grad(scaled, p, weighted);
  };
  return detail::luxemburg_bisect(rho1, rho_at, p.p_minus, p.p_plus, tol, max_iters);
}

/// Result of sampling the convex-modular axioms on a set of fields.
template <typename Scalar>
struct ModularAxiomReport {
  bool zero_axiom_ok{true};          // modular(u) == 0 exactly iff u == 0
  Scalar worst_symmetry_diff{0};     // max |modular(-u) - modular(u)|
  Scalar worst_convexity_margin{0};  // min of a*rho(u)+(1-a)*rho(v)-rho(au+(1-a)v)
  Scalar scale{1};                   // largest modular value seen
  bool convexity_ok(Scalar rel_tol = Scalar(1e-12)) const {
    return worst_convexity_margin >= -rel_tol * std::max(scale, Scalar(1));
  }
  bool all_ok(Scalar rel_tol = Scalar(1e-12)) const {
    return zero_axiom_ok && worst_symmetry_diff == Scalar(0) && convexity_ok(rel_tol);
  }
};

/// Check the convex-modular axioms (vanishing exactly at zero, symmetry,
/// convexity) on the given sample fields, with `alpha_samples` random convex
/// weights per pair. Report-only; never throws on a violation.
template <typename Scalar>
ModularAxiomReport<Scalar> check_modular_axioms(const std::vector<GridFunction<Scalar>>& samples,
                                                const ExponentField<Scalar>& p,
                                                bool weighted = false, int alpha_samples = 8,
                                                unsigned long seed = 12345) {
  if (samples.empty()) throw DomainError("check_modular_axioms: need at least one sample field");
  ModularAxiomReport<Scalar> rep;
  rep.worst_convexity_margin = std::numeric_limits<Scalar>::infinity();
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  for (const auto& u : samples) {
    const Scalar r = detail::nodal_power_integral(u, p, weighted);
    rep.scale = std::max(rep.scale, r);
    const bool is_zero = (u.values == Scalar(0)).all();
    if ((r == Scalar(0)) != is_zero) rep.zero_axiom_ok = false;
    const Scalar r_neg = detail::nodal_power_integral(u.with_values((-u.values).eval()), p, weighted);
    rep.worst_symmetry_diff = std::max(rep.worst_symmetry_diff, std::abs(r_neg - r));
  }
  for (std::size_t a = 0; a < samples.size(); ++a)
    for (std::size_t b = a; b < samples.size(); ++b) {
      const auto& u = samples[a];
      const auto& v = samples[b];
      if (!same_geometry(u, v)) throw DimensionError("check_modular_axioms: mixed grids");
      const Scalar ru = detail::nodal_power_integral(u, p, weighted);
      const Scalar rv = detail::nodal_power_integral(v, p, weighted);
      for (int t = 0; t < alpha_samples; ++t) {
        const Scalar alpha = (t == 0) ? Scalar(0.5) : Scalar(unit(rng));
        auto mix = u.with_values((alpha * u.values + (Scalar(1) - alpha) * v.values).eval());
        const Scalar rm = detail::nodal_power_integral(mix, p, weighted);
        rep.worst_convexity_margin =
            std::min(rep.worst_convexity_margin, alpha * ru + (Scalar(1) - alpha) * rv - rm);
      }
    }
  if (!std::isfinite(double(rep.worst_convexity_margin))) rep.worst_convexity_margin = Scalar(0);
  return rep;
}

/// Margin of the norm-modular inequality ||u||^{p_minus} <= modular(u), which
/// holds whenever ||u|| >= 1. Returns modular(u) - ||u||^{p_minus}, or nullopt
/// when ||u|| < 1 (inequality not applicable).
template <typename Scalar>
std::optional<Scalar> check_norm_modular_inequality(const GridFunction<Scalar>& u,
                                                    const ExponentField<Scalar>& p,
                                                    bool weighted = true) {
  const Scalar norm = luxemburg_norm(u, p, weighted);
  if (norm < Scalar(1)) return std::nullopt;
  const Scalar rho = detail::nodal_power_integral(u, p, weighted);
  return rho - std::pow(norm, p.p_minus);
}

}  // namespace varplap
