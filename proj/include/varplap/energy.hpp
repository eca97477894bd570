#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include "varplap/discretization.hpp"
#include "varplap/modular.hpp"

namespace varplap {

namespace detail {

template <typename Scalar>
void require_boundary_values(const GridFunction<Scalar>& u, const GridFunction<Scalar>& phi) {
  if (!same_geometry(u, phi)) throw DimensionError("energy: grid mismatch");
  for (Eigen::Index k = 0; k < u.size(); ++k)
    if (phi.boundary_mask[k] && u.values[k] != phi.values[k])
      throw ContractError("energy: u must equal phi on the boundary nodes");
}

/// Guarded sum of area * (|g|^2 + eps^2)^{p/2} / p over cells. If the plain
/// evaluation overflows, each term is recomputed through exp/log in extended
/// precision, which keeps the sum finite whenever the mathematical value fits
/// in double even though an intermediate power would not.
template <typename Scalar>
Scalar regularized_gradient_term(const CellVectorField<Scalar>& g, const ExponentField<Scalar>& p,
                                 Scalar eps_reg) {
  const Scalar area = g.cell_area();
  const ArrayX<Scalar> mag2 = g.vx.square() + g.vy.square() + eps_reg * eps_reg;
  const Scalar fast = (mag2.pow(p.values / Scalar(2)) / p.values).sum() * area;
  if (std::isfinite(double(fast))) return fast;
  long double acc = 0.0L;
  for (Eigen::Index c = 0; c < g.size(); ++c) {
    const long double m2 = static_cast<long double>(mag2[c]);
    if (m2 == 0.0L) continue;
    const long double t = static_cast<long double>(p.values[c]) * 0.5L * std::log(m2) +
                          std::log(static_cast<long double>(area) / static_cast<long double>(p.values[c]));
    acc += std::exp(t);
  }
  if (acc > static_cast<long double>(std::numeric_limits<Scalar>::max()))
    return std::numeric_limits<Scalar>::infinity();
  return static_cast<Scalar>(acc);
}

template <typename Scalar>
Scalar mass_term(const GridFunction<Scalar>& u, const GridFunction<Scalar>& q,
                 const ExponentField<Scalar>& p) {
  const Eigen::Index ncx = p.ncx, ncy = p.ncy;
  ConstArrayMap<Scalar> U(u.values.data(), u.nx, u.ny);
  ConstArrayMap<Scalar> Q(q.values.data(), q.nx, q.ny);
  ConstArrayMap<Scalar> P(p.values.data(), ncx, ncy);
  auto corner = [&](Eigen::Index di, Eigen::Index dj) {
    return Q.block(di, dj, ncx, ncy) * U.block(di, dj, ncx, ncy).abs().pow(P);
  };
  return ((corner(0, 0) + corner(1, 0) + corner(0, 1) + corner(1, 1)) / P).sum() * u.hx * u.hy /
         Scalar(4);
}

}  // namespace detail

/// Discrete Dirichlet energy
///   J(u) = int (|grad u|^2 + eps^2)^{p/2} / p + int (q/p)|u|^p - f(u)
/// over fields with u = phi on the boundary. eps_reg = 0 gives the plain
/// energy; a positive eps_reg matches the regularized first variation used by
/// the descent loop for p < 2. Returns +infinity if the value exceeds the
/// floating range.
template <typename Scalar>
Scalar energy(const GridFunction<Scalar>& u, const DirichletProblem<Scalar>& prob,
              Scalar eps_reg = Scalar(0)) {
  detail::require_boundary_values(u, prob.phi);
  const CellVectorField<Scalar> g = gradient(u);
  const Scalar grad_term = detail::regularized_gradient_term(g, prob.p, eps_reg);
  const Scalar mass = detail::mass_term(u, prob.q, prob.p);
  return grad_term + mass - functional_f(prob.f, u);
}

/// Exact gradient of the (regularized) discrete energy with respect to the
/// interior nodal values, in interior node order. Assembled from the cell
/// fluxes s_eps(|g|) g with s_eps(t) = (t^2 + eps^2)^{(p-2)/2}, the nodal mass
/// weights q|u|^{p-2}u, and the load weights.
template <typename Scalar>
ArrayX<Scalar> energy_first_variation(const GridFunction<Scalar>& u,
                                      const DirichletProblem<Scalar>& prob,
                                      Scalar eps_reg = Scalar(0)) {
  detail::require_boundary_values(u, prob.phi);
  const Eigen::Index ncx = prob.grid.ncx(), ncy = prob.grid.ncy();
  const Scalar area = prob.grid.cell_area();
  const CellVectorField<Scalar> g = gradient(u);

  const ArrayX<Scalar> mag2 = g.vx.square() + g.vy.square() + eps_reg * eps_reg;
  const ArrayX<Scalar> weight = mag2.pow((prob.p.values - Scalar(2)) / Scalar(2));
  if (!weight.allFinite()) {
    for (Eigen::Index c = 0; c < weight.size(); ++c)
      if (!std::isfinite(double(weight[c]))) {
        std::ostringstream oss;
        oss << "energy_first_variation: non-finite flux weight at cell (" << (c % ncx) << ", "
            << (c / ncx) << ")";
        throw NumericError(oss.str());
      }
  }

  ArrayX<Scalar> out = ArrayX<Scalar>::Zero(u.size());
  ArrayMap<Scalar> Out(out.data(), u.nx, u.ny);
  {
    // Gradient part: each cell adds area * s * (±gx/(2hx) ± gy/(2hy)) to its
    // corners, signs following the corner position.
    ArrayX<Scalar> px = area * weight * g.vx / (Scalar(2) * u.hx);
    ArrayX<Scalar> py = area * weight * g.vy / (Scalar(2) * u.hy);
    ConstArrayMap<Scalar> Px(px.data(), ncx, ncy), Py(py.data(), ncx, ncy);
    Out.block(0, 0, ncx, ncy) -= Px + Py;
    Out.block(1, 0, ncx, ncy) += Px - Py;
    Out.block(0, 1, ncx, ncy) -= Px - Py;
    Out.block(1, 1, ncx, ncy) += Px + Py;
  }
  {
    // Mass and load parts: each cell contributes (area/4) q_k |u_k|^{p_c-1}
    // sign(u_k) and -(area/4) f_k at each of its corners.
    ConstArrayMap<Scalar> U(u.values.data(), u.nx, u.ny);
    ConstArrayMap<Scalar> Q(prob.q.values.data(), u.nx, u.ny);
    ConstArrayMap<Scalar> F(prob.f.values.data(), u.nx, u.ny);
    ConstArrayMap<Scalar> P(prob.p.values.data(), ncx, ncy);
    const Scalar quarter = area / Scalar(4);
    auto add_corner = [&](Eigen::Index di, Eigen::Index dj) {
      auto Ub = U.block(di, dj, ncx, ncy);
      Out.block(di, dj, ncx, ncy) +=
          quarter * (Q.block(di, dj, ncx, ncy) * Ub.abs().pow(P - Scalar(1)) * Ub.sign() -
                     F.block(di, dj, ncx, ncy));
    };
    add_corner(0, 0);
    add_corner(1, 0);
    add_corner(0, 1);
    add_corner(1, 1);
  }
  if (!out.allFinite()) throw NumericError("energy_first_variation: non-finite assembly");

  const auto idx = interior_indices(u);
  ArrayX<Scalar> interior(idx.size());
  for (Eigen::Index n = 0; n < idx.size(); ++n) interior[n] = out[idx[n]];
  return interior;
}

/// F(u) = rho_grad(phi - u) - f(u), the functional whose boundedness from
/// below certifies that the energy minimization is well posed.
template <typename Scalar>
Scalar functional_F(const GridFunction<Scalar>& u, const DirichletProblem<Scalar>& prob) {
  auto diff = u.with_values((prob.phi.values - u.values).eval());
  return modular_grad(gradient(diff), prob.p, true) - functional_f(prob.f, u);
}

template <typename Scalar>
struct LowerBoundReport {
  Scalar bound{0};
  Scalar fstar{0};          // estimated dual norm of the load functional
  Scalar grad_phi_norm{0};  // Luxemburg norm of |grad phi|
};

namespace detail {

/// Estimate of the discrete dual norm sup f(h) / ||grad h|| over interior
/// supported fields, the norm being the Luxemburg norm of the weighted
/// gradient modular. Evaluated on a candidate set (smooth bumps, random
/// fields, the lifted load itself) refined by a short normalized ascent; a
/// sampled maximum, hence a lower surrogate of the true supremum.
template <typename Scalar>
Scalar dual_norm_estimate(const DirichletProblem<Scalar>& prob, unsigned long seed = 99) {
  if ((prob.f.values == Scalar(0)).all()) return Scalar(0);
  const GridFunction<Scalar> zero = prob.phi.with_values(ArrayX<Scalar>::Zero(prob.phi.size()));
  const auto idx = interior_indices(prob.phi);
  const ArrayX<Scalar> w = node_weights(prob.phi);

  auto value = [&](const GridFunction<Scalar>& h) -> Scalar {
    const Scalar norm = luxemburg_norm(gradient(h), prob.p, true);
    if (norm == Scalar(0)) return Scalar(0);
    return std::abs(functional_f(prob.f, h)) / norm;
  };

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  Scalar best = Scalar(0);

  ArrayX<Scalar> fw(idx.size());
  for (Eigen::Index n = 0; n < idx.size(); ++n) fw[n] = prob.f.values[idx[n]] * w[idx[n]];

  std::vector<ArrayX<Scalar>> candidates;
  candidates.push_back(fw);
  for (int r = 0; r < 4; ++r) {
    ArrayX<Scalar> h(idx.size());
    for (Eigen::Index n = 0; n < idx.size(); ++n) h[n] = Scalar(unit(rng));
    candidates.push_back(std::move(h));
  }
  for (auto& h0 : candidates) {
    if ((h0 == Scalar(0)).all()) continue;
    ArrayX<Scalar> h = h0;
    for (int it = 0; it < 200; ++it) {
      GridFunction<Scalar> hf = lift_boundary(zero, h);
      const Scalar norm = luxemburg_norm(gradient(hf), prob.p, true);
      if (norm == Scalar(0)) break;
      h /= norm;
      hf = lift_boundary(zero, h);
      const Scalar val = std::abs(functional_f(prob.f, hf));
      best = std::max(best, val);
      const Scalar sgn = functional_f(prob.f, hf) >= Scalar(0) ? Scalar(1) : Scalar(-1);
      const Scalar eta = Scalar(0.5) / Scalar(1 + it);
      h += eta * sgn * fw / std::max(fw.abs().maxCoeff(), Scalar(1e-30));
    }
  }
  for (const auto& h0 : candidates) {
    if ((h0 == Scalar(0)).all()) continue;
    best = std::max(best, value(lift_boundary(zero, h0)));
  }
  return best;
}

}  // namespace detail

/// Lower bound for F over the admissible set, from the two-branch estimate
///   F(u) >= min( inf_{x>=0} [x - fstar x^{1/p_minus} - B],  -fstar (1 + B) )
/// with B the Luxemburg norm of |grad phi|. Every F(u_k) evaluated during a
/// run must sit above the returned value.
template <typename Scalar>
LowerBoundReport<Scalar> lower_bound_report(const DirichletProblem<Scalar>& prob) {
  LowerBoundReport<Scalar> rep;
  rep.fstar = detail::dual_norm_estimate(prob);
  rep.grad_phi_norm = luxemburg_norm(gradient(prob.phi), prob.p, true);
  const Scalar A = rep.fstar, B = rep.grad_phi_norm, pm = prob.p.p_minus;
  Scalar inf_h;
  if (A == Scalar(0)) {
    inf_h = -B;  // h(x) = x - B is increasing on x >= 0
  } else {
    const Scalar xstar = std::pow(A / pm, pm / (pm - Scalar(1)));
    inf_h = xstar - A * std::pow(xstar, Scalar(1) / pm) - B;
  }
  rep.bound = std::min(inf_h, -A * (Scalar(1) + B));
  return rep;
}

template <typename Scalar>
Scalar lower_bound_F(const DirichletProblem<Scalar>& prob) {
  return lower_bound_report(prob).bound;
}

}  // namespace varplap
