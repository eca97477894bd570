#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <deque>
#include <limits>
#include <random>
#include <vector>

#include "varplap/energy.hpp"

namespace varplap {

enum class StepRule { Fixed, Backtracking, SpectralBacktracking };

template <typename Scalar>
struct SolverConfig {
  Scalar tol_energy{Scalar(1e-12)};  // relative energy-decrease stop threshold
  Scalar tol_grad{Scalar(-1)};       // <= 0 resolves to 1e-8 * cell area
  long max_iters{50000};
  Scalar eps_reg{Scalar(-1)};        // < 0 resolves to 1e-8 when p_minus < 2, else 0
  StepRule step_rule{StepRule::SpectralBacktracking};
  Scalar fixed_step{Scalar(1)};
  Scalar armijo_c{Scalar(1e-4)};
  Scalar backtrack_factor{Scalar(0.5)};
  int max_backtracks{60};
  int cauchy_window{10};
  int residual_trials{8};
  unsigned long seed{0};

  void validate() const {
    if (!(tol_energy > Scalar(0))) throw DomainError("SolverConfig: tol_energy must be positive");
    if (max_iters < 1) throw DomainError("SolverConfig: max_iters must be at least 1");
  }
  Scalar resolved_tol_grad(const Grid<Scalar>& grid) const {
    return tol_grad > Scalar(0) ? tol_grad : Scalar(1e-8) * grid.cell_area();
  }
  Scalar resolved_eps_reg(const ExponentField<Scalar>& p) const {
    if (eps_reg >= Scalar(0)) return eps_reg;
    return p.p_minus < Scalar(2) ? Scalar(1e-8) : Scalar(0);
  }
};

template <typename Scalar>
struct CauchyEntry {
  long j{0}, k{0};
  Scalar value{0};
};

template <typename Scalar>
struct SolveReport {
  GridFunction<Scalar> u_final;
  std::vector<Scalar> energies;    // line-search objective at each iterate, non-increasing
  std::vector<Scalar> grad_norms;  // max-norm of the first variation at each iterate
  std::vector<Scalar> f_values;    // F(u_k) = rho_grad(phi - u_k) - f(u_k) per iterate
  std::vector<CauchyEntry<Scalar>> cauchy_diag;
  Scalar residual_max{std::numeric_limits<Scalar>::infinity()};
  Scalar residual_unregularized{0};
  Scalar final_energy{0};  // unregularized energy at u_final
  long iterations{0};
  bool converged{false};
  Scalar eps_reg_used{0};
  Scalar tol_grad_used{0};
};

/// rho_grad((u_a - u_b)/2) for consecutive iterate pairs plus the (first,
/// last) pair. Small tail values certify that the minimizing sequence is
/// Cauchy in the gradient modular.
template <typename Scalar>
std::vector<Scalar> cauchy_diagnostic(const std::vector<GridFunction<Scalar>>& iterates,
                                      const DirichletProblem<Scalar>& prob) {
  if (iterates.size() < 2) throw DomainError("cauchy_diagnostic: need at least two iterates");
  auto value = [&](const GridFunction<Scalar>& a, const GridFunction<Scalar>& b) {
    auto half = a.with_values(((a.values - b.values) / Scalar(2)).eval());
    return modular_grad(gradient(half), prob.p, true);
  };
  std::vector<Scalar> out;
  for (std::size_t i = 0; i + 1 < iterates.size(); ++i) out.push_back(value(iterates[i], iterates[i + 1]));
  out.push_back(value(iterates.front(), iterates.back()));
  return out;
}

namespace detail {

template <typename Scalar>
ArrayX<Scalar> random_unit_bump(const GridFunction<Scalar>& phi, std::mt19937_64& rng) {
  const auto idx = interior_indices(phi);
  const Eigen::Index nx = phi.nx, ny = phi.ny;
  std::uniform_int_distribution<Eigen::Index> pick_i(1, nx - 2), pick_j(1, ny - 2);
  std::uniform_real_distribution<double> radius(2.0, std::max(3.0, double(std::min(nx, ny)) / 3.0));
  const Eigen::Index ci = pick_i(rng), cj = pick_j(rng);
  const double r = radius(rng);
  ArrayX<Scalar> b(idx.size());
  for (Eigen::Index n = 0; n < idx.size(); ++n) {
    const Eigen::Index k = idx[n];
    const double di = double(k % nx) - double(ci), dj = double(k / nx) - double(cj);
    const double d = std::sqrt(di * di + dj * dj);
    const double c = d < r ? std::cos(0.5 * M_PI * d / r) : 0.0;
    b[n] = Scalar(c * c);
  }
  const Scalar l1 = b.abs().sum();
  if (l1 > Scalar(0)) b /= l1;
  return b;
}

/// Max-norm of the unregularized variation assembled from the cells whose
/// gradient magnitude exceeds the given threshold (the well-conditioned cells
/// when a positive regularization was used during the solve).
template <typename Scalar>
Scalar residual_excluding_small_cells(const GridFunction<Scalar>& u,
                                      const DirichletProblem<Scalar>& prob, Scalar threshold) {
  const Eigen::Index ncx = prob.grid.ncx(), ncy = prob.grid.ncy();
  const Scalar area = prob.grid.cell_area();
  const CellVectorField<Scalar> g = gradient(u);
  const ArrayX<Scalar> mag = g.magnitude();
  ArrayX<Scalar> weight(mag.size());
  for (Eigen::Index c = 0; c < mag.size(); ++c)
    weight[c] = mag[c] > threshold ? std::pow(mag[c], prob.p.values[c] - Scalar(2)) : Scalar(0);

  ArrayX<Scalar> out = ArrayX<Scalar>::Zero(u.size());
  ArrayMap<Scalar> Out(out.data(), u.nx, u.ny);
  ArrayX<Scalar> px = area * weight * g.vx / (Scalar(2) * u.hx);
  ArrayX<Scalar> py = area * weight * g.vy / (Scalar(2) * u.hy);
  ConstArrayMap<Scalar> Px(px.data(), ncx, ncy), Py(py.data(), ncx, ncy);
  Out.block(0, 0, ncx, ncy) -= Px + Py;
  Out.block(1, 0, ncx, ncy) += Px - Py;
  Out.block(0, 1, ncx, ncy) -= Px - Py;
  Out.block(1, 1, ncx, ncy) += Px + Py;

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

  Scalar res = Scalar(0);
  for (Eigen::Index k = 0; k < u.size(); ++k)
    if (!u.boundary_mask[k]) res = std::max(res, std::abs(out[k]));
  return res;
}

}  // namespace detail

/// Residual certificate: the largest weak-form value |<dJ(u), h>| over the
/// interior hat functions (equivalently the max-norm of the first variation)
/// and `trials` random interior bump functions normalized to unit l1 mass.
template <typename Scalar>
Scalar weak_residual(const GridFunction<Scalar>& u, const DirichletProblem<Scalar>& prob,
                     int trials = 8, unsigned long seed = 0, Scalar eps_reg = Scalar(0)) {
  const ArrayX<Scalar> g = energy_first_variation(u, prob, eps_reg);
  Scalar res = g.size() > 0 ? g.abs().maxCoeff() : Scalar(0);
  std::mt19937_64 rng(seed);
  for (int t = 0; t < trials; ++t) {
    const ArrayX<Scalar> h = detail::random_unit_bump(prob.phi, rng);
    res = std::max(res, std::abs((g * h).sum()));
  }
  return res;
}

/// Minimize the discrete Dirichlet energy over the affine space
/// {u : u = phi on the boundary} by monotone descent on the interior values.
///
/// The default step rule is a Barzilai-Borwein spectral step safeguarded by
/// Armijo backtracking, so every accepted step strictly decreases the
/// objective. The run stops when both the relative energy decrease of the
/// last accepted step and the max-norm of the first variation fall below
/// their thresholds, or at max_iters (converged = false, no exception).
template <typename Scalar>
SolveReport<Scalar> minimize(const DirichletProblem<Scalar>& prob, const SolverConfig<Scalar>& cfg,
                             const GridFunction<Scalar>* u0 = nullptr) {
  cfg.validate();
  const Scalar tol_grad = cfg.resolved_tol_grad(prob.grid);
  const Scalar eps = cfg.resolved_eps_reg(prob.p);

  GridFunction<Scalar> u = u0 ? *u0 : lift_boundary(prob.phi, ArrayX<Scalar>::Zero(prob.phi.interior_count()));
  detail::require_boundary_values(u, prob.phi);

  SolveReport<Scalar> report;
  report.eps_reg_used = eps;
  report.tol_grad_used = tol_grad;

  Scalar E = energy(u, prob, eps);
  if (!std::isfinite(double(E))) throw NumericError("minimize: initial energy is not finite");
  ArrayX<Scalar> uint_ = extract_interior(u);
  ArrayX<Scalar> g = energy_first_variation(u, prob, eps);
  Scalar gn = g.size() > 0 ? g.abs().maxCoeff() : Scalar(0);

  std::deque<std::pair<long, ArrayX<Scalar>>> window;  // (iteration, interior values)
  auto push_window = [&](long k) {
    window.emplace_back(k, uint_);
    while (window.size() > std::size_t(cfg.cauchy_window)) window.pop_front();
  };

  Scalar last_rel_dec = std::numeric_limits<Scalar>::infinity();
  Scalar t_prev = Scalar(1);
  ArrayX<Scalar> s_prev, y_prev;
  bool have_bb = false;

  long k = 0;
  for (;; ++k) {
    report.energies.push_back(E);
    report.grad_norms.push_back(gn);
    report.f_values.push_back(functional_F(u, prob));
    push_window(k);

    if (gn < tol_grad && (k == 0 || last_rel_dec < cfg.tol_energy)) {
      report.converged = true;
      break;
    }
    if (k >= cfg.max_iters) break;

    // Step length proposal.
    Scalar t;
    switch (cfg.step_rule) {
      case StepRule::Fixed:
        t = cfg.fixed_step;
        break;
      case StepRule::Backtracking:
        t = std::min(t_prev * Scalar(2), Scalar(1e6));
        break;
      case StepRule::SpectralBacktracking:
      default: {
        if (have_bb) {
          const Scalar sy = (s_prev * y_prev).sum();
          const Scalar ss = s_prev.matrix().squaredNorm();
          t = (sy > Scalar(0)) ? ss / sy : t_prev;
        } else {
          t = Scalar(1) / std::max(gn, Scalar(1));
        }
        t = std::min(std::max(t, Scalar(1e-14)), Scalar(1e14));
        break;
      }
    }

    const Scalar gg = g.matrix().squaredNorm();
    ArrayX<Scalar> trial_int;
    GridFunction<Scalar> trial = u;
    Scalar E_trial = std::numeric_limits<Scalar>::infinity();
    bool accepted = false;
    int halvings = 0;
    for (;;) {
      trial_int = uint_ - t * g;
      trial = scatter_interior(u, trial_int);
      E_trial = energy(trial, prob, eps);
      const bool ok = (cfg.step_rule == StepRule::Fixed)
                          ? (std::isfinite(double(E_trial)) && E_trial <= E)
                          : (std::isfinite(double(E_trial)) && E_trial <= E - cfg.armijo_c * t * gg);
      if (ok) {
        accepted = true;
        break;
      }
      if (cfg.step_rule == StepRule::Fixed || ++halvings > cfg.max_backtracks) break;
      t *= cfg.backtrack_factor;
    }
    if (!accepted)
      throw StepFailureError("minimize: line search failed after " +
                             std::to_string(cfg.max_backtracks) + " halvings");

    s_prev = trial_int - uint_;
    const ArrayX<Scalar> g_new = energy_first_variation(trial, prob, eps);
    y_prev = g_new - g;
    have_bb = true;
    t_prev = t;

    last_rel_dec = (E - E_trial) / std::max(Scalar(1), std::abs(E_trial));
    u = std::move(trial);
    uint_ = std::move(trial_int);
    E = E_trial;
    g = g_new;
    gn = g.size() > 0 ? g.abs().maxCoeff() : Scalar(0);
  }

  report.iterations = k;
  report.u_final = u;
  report.final_energy = energy(u, prob, Scalar(0));
  report.residual_max = weak_residual(u, prob, cfg.residual_trials, cfg.seed, eps);
  report.residual_unregularized =
      detail::residual_excluding_small_cells(u, prob, Scalar(10) * eps);

  if (window.size() >= 2) {
    auto zero_based = prob.phi.with_values(ArrayX<Scalar>::Zero(prob.phi.size()));
    auto at = [&](std::size_t i) { return lift_boundary(zero_based, window[i].second); };
    auto value = [&](std::size_t a, std::size_t b) {
      auto ga = at(a), gb = at(b);
      auto half = ga.with_values(((ga.values - gb.values) / Scalar(2)).eval());
      return modular_grad(gradient(half), prob.p, true);
    };
    for (std::size_t i = 0; i + 1 < window.size(); ++i)
      report.cauchy_diag.push_back({window[i].first, window[i + 1].first, value(i, i + 1)});
    report.cauchy_diag.push_back(
        {window.front().first, window.back().first, value(0, window.size() - 1)});
  }
  return report;
}

}  // namespace varplap
