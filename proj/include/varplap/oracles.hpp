#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "varplap/energy.hpp"

namespace varplap {

/// Direct solution of the p == 2 problem by independent assembly of the local
/// cell stiffness (the linear stencil of the corner-averaged gradient) plus
/// the lumped mass term, solved with plain conjugate gradients. Shares no
/// energy or variation code with the descent solver, so agreement between the
/// two is evidence rather than tautology.
template <typename Scalar>
GridFunction<Scalar> poisson_oracle(const DirichletProblem<Scalar>& prob,
                                    Scalar rel_residual = Scalar(1e-12)) {
  if (!prob.p.is_constant(Scalar(2)))
    throw DomainError("poisson_oracle: requires p == 2 everywhere");
  using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  using Mat4 = Eigen::Matrix<Scalar, 4, 4>;
  using Vec4 = Eigen::Matrix<Scalar, 4, 1>;

  const Eigen::Index nx = prob.grid.nx, ny = prob.grid.ny;
  const Scalar hx = prob.grid.hx(), hy = prob.grid.hy();
  const Scalar area = hx * hy;
  const auto& mask = prob.boundary_mask();

  std::vector<Eigen::Index> pos(nx * ny, -1);
  Eigen::Index n_int = 0;
  for (Eigen::Index k = 0; k < nx * ny; ++k)
    if (!mask[k]) pos[k] = n_int++;

  Vec4 vx, vy;
  vx << -1, 1, -1, 1;
  vy << -1, -1, 1, 1;
  vx /= Scalar(2) * hx;
  vy /= Scalar(2) * hy;
  const Mat4 K = area * (vx * vx.transpose() + vy * vy.transpose());

  std::vector<Eigen::Triplet<Scalar>> trip;
  trip.reserve(std::size_t(16 * (nx - 1) * (ny - 1)));
  Vec b = Vec::Zero(n_int);
  for (Eigen::Index cj = 0; cj < ny - 1; ++cj)
    for (Eigen::Index ci = 0; ci < nx - 1; ++ci) {
      const Eigen::Index corners[4] = {cj * nx + ci, cj * nx + ci + 1, (cj + 1) * nx + ci,
                                       (cj + 1) * nx + ci + 1};
      for (int a = 0; a < 4; ++a) {
        const Eigen::Index ka = corners[a];
        if (mask[ka]) continue;
        const Eigen::Index ia = pos[ka];
        b[ia] += area / Scalar(4) * prob.f.values[ka];
        trip.emplace_back(ia, ia, area / Scalar(4) * prob.q.values[ka]);
        for (int c = 0; c < 4; ++c) {
          const Eigen::Index kc = corners[c];
          if (mask[kc])
            b[ia] -= K(a, c) * prob.phi.values[kc];
          else
            trip.emplace_back(ia, pos[kc], K(a, c));
        }
      }
    }
  Eigen::SparseMatrix<Scalar> A(n_int, n_int);
  A.setFromTriplets(trip.begin(), trip.end());

  // Plain conjugate gradients; A is symmetric positive definite.
  Vec x = Vec::Zero(n_int);
  Vec r = b;
  Vec d = r;
  Scalar rr = r.squaredNorm();
  const Scalar target = rel_residual * std::max(std::sqrt(b.squaredNorm()), Scalar(1e-300));
  const long max_iters = 50 * std::max<long>(n_int, 100);
  long it = 0;
  while (std::sqrt(rr) > target) {
    if (it++ > max_iters) throw IterationLimitError("poisson_oracle: CG did not converge");
    const Vec Ad = A * d;
    const Scalar alpha = rr / d.dot(Ad);
    x += alpha * d;
    r -= alpha * Ad;
    const Scalar rr_new = r.squaredNorm();
    d = r + (rr_new / rr) * d;
    rr = rr_new;
  }

  ArrayX<Scalar> interior(n_int);
  for (Eigen::Index k = 0; k < nx * ny; ++k)
    if (!mask[k]) interior[pos[k]] = x[pos[k]] - prob.phi.values[k];
  return lift_boundary(prob.phi, interior);
}

/// Load density that makes u_target the exact discrete solution: the first
/// variation of the gradient and mass terms at u_target divided by the nodal
/// quadrature weights (zero on boundary nodes, where no equation is imposed).
template <typename Scalar>
GridFunction<Scalar> manufacture_rhs(const GridFunction<Scalar>& u_target,
                                     const ExponentField<Scalar>& p, const GridFunction<Scalar>& q,
                                     Scalar eps_reg = Scalar(0)) {
  if (!matches_cells(u_target, p))
    throw DimensionError("manufacture_rhs: exponent field does not match the grid");
  if (eps_reg == Scalar(0) && p.p_minus < Scalar(2)) {
    const ArrayX<Scalar> mag = gradient(u_target).magnitude();
    for (Eigen::Index c = 0; c < mag.size(); ++c)
      if (mag[c] == Scalar(0) && p.values[c] < Scalar(2))
        throw DegenerateInputError(
            "manufacture_rhs: zero-gradient cell with p < 2 requires eps_reg > 0");
  }
  Grid<Scalar> grid(u_target.nx, u_target.ny, u_target.hx * Scalar(u_target.nx - 1),
                    u_target.hy * Scalar(u_target.ny - 1));
  const GridFunction<Scalar> zero_f = u_target.with_values(ArrayX<Scalar>::Zero(u_target.size()));
  DirichletProblem<Scalar> prob(grid, p, q, zero_f, u_target);
  const ArrayX<Scalar> var = energy_first_variation(u_target, prob, eps_reg);
  const ArrayX<Scalar> w = node_weights(u_target);
  const auto idx = interior_indices(u_target);
  ArrayX<Scalar> f = ArrayX<Scalar>::Zero(u_target.size());
  for (Eigen::Index n = 0; n < idx.size(); ++n) f[idx[n]] = var[n] / w[idx[n]];
  return u_target.with_values(std::move(f));
}

/// Full problem with manufactured load and phi = u_target.
template <typename Scalar>
DirichletProblem<Scalar> manufactured_problem(const Grid<Scalar>& grid,
                                              const GridFunction<Scalar>& u_target,
                                              const ExponentField<Scalar>& p,
                                              const GridFunction<Scalar>& q,
                                              Scalar eps_reg = Scalar(0)) {
  return DirichletProblem<Scalar>(grid, p, q, manufacture_rhs(u_target, p, q, eps_reg), u_target);
}

/// Constant-exponent 1-D reference solution of -( |u'|^{p-2} u' )' = 1 on
/// (0,1) with u(0) = u(1) = 0. Integrating the flux gives |u'|^{p-2} u' =
/// 1/2 - x, hence u(x) = (p-1)/p * ((1/2)^{p'} - |x - 1/2|^{p'}) with
/// p' = p/(p-1); the flux relation is retained for independent verification.
template <typename Scalar>
struct ClosedForm1D {
  Scalar p{2};
  Scalar load{1};
  std::function<Scalar(Scalar)> u;
  std::function<Scalar(Scalar)> du;    // derivative of u
  std::function<Scalar(Scalar)> flux;  // |u'|^{p-2} u' = 1/2 - x
};

template <typename Scalar>
ClosedForm1D<Scalar> closed_form_1d(Scalar p_const, const std::string& case_id = "unit_load") {
  if (!(p_const > Scalar(1))) throw DomainError("closed_form_1d: requires p > 1");
  if (case_id != "unit_load") throw DomainError("closed_form_1d: unknown case '" + case_id + "'");
  const Scalar pc = p_const / (p_const - Scalar(1));  // conjugate exponent
  ClosedForm1D<Scalar> cf;
  cf.p = p_const;
  cf.load = Scalar(1);
  cf.u = [p_const, pc](Scalar x) {
    return (p_const - Scalar(1)) / p_const *
           (std::pow(Scalar(0.5), pc) - std::pow(std::abs(x - Scalar(0.5)), pc));
  };
  cf.du = [pc](Scalar x) {
    const Scalar F = Scalar(0.5) - x;
    return (F >= Scalar(0) ? Scalar(1) : Scalar(-1)) * std::pow(std::abs(F), pc - Scalar(1));
  };
  cf.flux = [](Scalar x) { return Scalar(0.5) - x; };
  return cf;
}

/// A manufactured verification case: problem builder, exact solution sampler,
/// and the mesh-convergence order expected of the nodal error.
template <typename Scalar>
struct ManufacturedCase {
  std::string name;
  Scalar expected_order{2};
  std::function<DirichletProblem<Scalar>(const Grid<Scalar>&)> problem;
  std::function<GridFunction<Scalar>(const Grid<Scalar>&)> exact;
};

/// Smooth p = 2 cases with the analytic solution sin(pi x) sin(pi y); the
/// exact sampler copies phi on the boundary layer so the two agree there
/// exactly.
template <typename Scalar>
std::vector<ManufacturedCase<Scalar>> standard_manufactured_cases() {
  auto sinsin = [](Scalar x, Scalar y) {
    return std::sin(M_PI * double(x)) * std::sin(M_PI * double(y));
  };
  auto exact_fn = [sinsin](const Grid<Scalar>& g) {
    auto u = g.sample_nodes(sinsin);
    for (Eigen::Index k = 0; k < u.size(); ++k)
      if (u.boundary_mask[k]) u.values[k] = Scalar(0);
    return u;
  };
  std::vector<ManufacturedCase<Scalar>> cases;
  cases.push_back(
      {"poisson_sine", Scalar(2),
       [sinsin](const Grid<Scalar>& g) {
         return DirichletProblem<Scalar>(
             g, g.constant_exponent(Scalar(2)), g.zeros(),
             g.sample_nodes([sinsin](Scalar x, Scalar y) {
               return Scalar(2) * Scalar(M_PI * M_PI) * sinsin(x, y);
             }),
             g.zeros());
       },
       exact_fn});
  cases.push_back(
      {"helmholtz_sine", Scalar(2),
       [sinsin](const Grid<Scalar>& g) {
         return DirichletProblem<Scalar>(
             g, g.constant_exponent(Scalar(2)),
             g.sample_nodes([](Scalar x, Scalar) { return Scalar(1) + x; }),
             g.sample_nodes([sinsin](Scalar x, Scalar y) {
               return (Scalar(2) * Scalar(M_PI * M_PI) + Scalar(1) + x) * sinsin(x, y);
             }),
             g.zeros());
       },
       exact_fn});
  return cases;
}

/// Weighted discrete L2 norm of a nodal field (cell-corner quadrature).
template <typename Scalar>
Scalar l2_norm(const GridFunction<Scalar>& u) {
  return std::sqrt((u.values.square() * node_weights(u)).sum());
}

template <typename Scalar>
Scalar max_norm(const GridFunction<Scalar>& u) {
  return u.values.abs().maxCoeff();
}

}  // namespace varplap
