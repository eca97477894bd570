#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "reference.hpp"
#include "varplap/discretization.hpp"
#include "varplap/modular.hpp"

using namespace varplap;

namespace {

GridFunction<double> random_field(const Grid<double>& grid, std::mt19937_64& rng, double amp = 1.0) {
  std::uniform_real_distribution<double> box(-amp, amp);
  auto u = grid.zeros();
  for (Eigen::Index k = 0; k < u.size(); ++k) u.values[k] = box(rng);
  return u;
}

}  // namespace

TEST_CASE("field types enforce their invariants") {
  Grid<double> grid(5, 4, 1.0, 1.0);
  CHECK(grid.hx() == doctest::Approx(0.25));
  CHECK(grid.cell_count() == 12);

  CHECK_THROWS_AS(Grid<double>(1, 4), DomainError);
  CHECK_THROWS_AS(grid.constant_exponent(1.0), DomainError);
  CHECK_THROWS_AS(grid.constant_exponent(0.5), DomainError);
  CHECK_THROWS_AS(grid.sample_exponent([](double x, double) { return x < 0.5 ? 2.0 : 1.0; }),
                  DomainError);
  CHECK_THROWS_AS(
      grid.sample_exponent([](double, double) { return std::numeric_limits<double>::infinity(); }),
      DomainError);

  auto p = grid.sample_exponent([](double x, double y) { return 2.0 + x + y; });
  CHECK(p.p_minus == doctest::Approx(2.0 + grid.xc(0) + grid.yc(0)));
  CHECK(p.p_plus == doctest::Approx(2.0 + grid.xc(3) + grid.yc(2)));

  // The default mask is exactly the outermost node layer.
  auto u = grid.zeros();
  for (Eigen::Index j = 0; j < grid.ny; ++j)
    for (Eigen::Index i = 0; i < grid.nx; ++i) {
      const bool outer = i == 0 || i == grid.nx - 1 || j == 0 || j == grid.ny - 1;
      CHECK(u.boundary_mask[u.node(i, j)] == outer);
    }
  CHECK_THROWS_AS(GridFunction<double>(5, 4, 0.25, 1.0 / 3.0, ArrayX<double>::Zero(7), u.boundary_mask),
                  DimensionError);
}

TEST_CASE("modular_raw basic values") {
  Grid<double> grid(17, 17, 1.0, 1.0);
  auto p2 = grid.constant_exponent(2.0);

  CHECK(modular_raw(grid.zeros(), p2) == 0.0);
  CHECK(modular_raw(grid.constant_nodes(2.0), p2) == doctest::Approx(4.0).epsilon(1e-14));

  // Grid mismatch is rejected.
  Grid<double> other(9, 9, 1.0, 1.0);
  CHECK_THROWS_AS(modular_raw(other.zeros(), p2), DimensionError);

  // Positive whenever any nodal value is nonzero, including sign-alternating
  // fields whose cell averages vanish.
  auto checker = grid.sample_nodes([&](double x, double y) {
    const int i = int(std::lround(x / grid.hx())), j = int(std::lround(y / grid.hy()));
    return ((i + j) % 2 == 0) ? 1.0 : -1.0;
  });
  CHECK(modular_raw(checker, p2) > 0.5);
}

TEST_CASE("modular_raw converges to the continuous integral of x^2") {
  // Quadrature refinement oracle for u(x,y) = x, p = 2: the continuous value
  // is 1/3; errors must shrink at second order.
  double prev_err = 0;
  for (int level = 0; level < 3; ++level) {
    const Eigen::Index n = 17 << level;
    Grid<double> grid(n, n, 1.0, 1.0);
    auto u = grid.sample_nodes([](double x, double) { return x; });
    const double err = std::abs(modular_raw(u, grid.constant_exponent(2.0)) - 1.0 / 3.0);
    if (level > 0) CHECK(prev_err / err == doctest::Approx(4.0).epsilon(0.2));
    prev_err = err;
  }
  CHECK(prev_err < 5e-5);
}

TEST_CASE("modular_weighted values and refined-quadrature oracle") {
  Grid<double> grid(17, 17, 1.0, 1.0);
  auto p2 = grid.constant_exponent(2.0);
  CHECK(modular_weighted(grid.zeros(), p2) == 0.0);
  CHECK(modular_weighted(grid.constant_nodes(2.0), p2) == doctest::Approx(2.0).epsilon(1e-14));

  // Variable exponent p(x) = 2 + sin(pi x), u = 1: compare against a
  // 10x-refined midpoint quadrature of the analytic integrand.
  Grid<double> fine(1025, 2, 1.0, 1.0);
  auto p_var = fine.sample_exponent([](double x, double) { return 2.0 + std::sin(M_PI * x); });
  const double val = modular_weighted(fine.constant_nodes(1.0), p_var);
  const double oracle = double(refcalc::quadrature_2d(
      [](long double x, long double) { return 1.0L / (2.0L + std::sin((long double)M_PI * x)); },
      1.0L, 1.0L, 10240, 2));
  CHECK(val == doctest::Approx(oracle).epsilon(1e-6));
}

TEST_CASE("modular agrees with an independent plain-loop evaluation") {
  Grid<double> grid(21, 13, 1.5, 0.75);
  auto p = grid.sample_exponent([](double x, double y) { return 1.4 + x * x + 0.5 * y; });
  std::mt19937_64 rng(7);
  for (int rep = 0; rep < 5; ++rep) {
    auto u = random_field(grid, rng, 3.0);
    const double a = modular_raw(u, p);
    const double b = double(refcalc::modular_nodal(u, p, false));
    CHECK(a == doctest::Approx(b).epsilon(1e-13));
    const double aw = modular_weighted(u, p);
    const double bw = double(refcalc::modular_nodal(u, p, true));
    CHECK(aw == doctest::Approx(bw).epsilon(1e-13));
  }
}

TEST_CASE("modular_grad values, subsets and additivity") {
  Grid<double> grid(9, 9, 1.0, 1.0);
  auto p2 = grid.constant_exponent(2.0);
  CHECK(modular_grad(grid.constant_cell_vectors(0.0, 0.0), p2) == 0.0);
  CHECK(modular_grad(grid.constant_cell_vectors(1.0, 0.0), p2) == doctest::Approx(0.5).epsilon(1e-14));

  auto p3 = grid.constant_exponent(3.0);
  CHECK(modular_grad(grid.constant_cell_vectors(3.0, 4.0), p3) ==
        doctest::Approx(125.0 / 3.0).epsilon(1e-14));

  // Additivity over disjoint cell subsets, up to floating rounding.
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> box(-2.0, 2.0);
  ArrayX<double> vx(grid.cell_count()), vy(grid.cell_count());
  for (Eigen::Index c = 0; c < grid.cell_count(); ++c) {
    vx[c] = box(rng);
    vy[c] = box(rng);
  }
  CellVectorField<double> g(grid.ncx(), grid.ncy(), grid.hx(), grid.hy(), vx, vy);
  ArrayXb setA = ArrayXb::Constant(grid.cell_count(), false);
  ArrayXb setB = ArrayXb::Constant(grid.cell_count(), false);
  for (Eigen::Index c = 0; c < grid.cell_count(); ++c) (c % 3 == 0 ? setA : setB)[c] = true;
  ArrayXb all = setA || setB;
  const double split = modular_grad(g, p3, setA) + modular_grad(g, p3, setB);
  const double whole = modular_grad(g, p3, all);
  CHECK(split == doctest::Approx(whole).epsilon(1e-13));
  CHECK(whole == doctest::Approx(modular_grad(g, p3)).epsilon(1e-13));
}

TEST_CASE("luxemburg norm: zero, constant-exponent closed forms, bisection contract") {
  Grid<double> grid(33, 33, 1.0, 1.0);
  auto p2 = grid.constant_exponent(2.0);
  CHECK(luxemburg_norm(grid.zeros(), p2, false) == 0.0);
  CHECK(luxemburg_norm(grid.constant_nodes(1.0), p2, false) == doctest::Approx(1.0).epsilon(1e-12));

  // For constant exponent the unweighted Luxemburg norm is the classical
  // L^p norm of the same quadrature.
  std::mt19937_64 rng(3);
  for (double pval : {1.5, 2.0, 3.0, 4.5}) {
    auto pf = grid.constant_exponent(pval);
    auto u = random_field(grid, rng, 2.5);
    const double lux = luxemburg_norm(u, pf, false);
    const double classical = std::pow(modular_raw(u, pf), 1.0 / pval);
    CHECK(lux == doctest::Approx(classical).epsilon(1e-10));
  }

  // u(x,y) = x with p = 3: the continuous closed form is (1/4)^{1/3}.
  Grid<double> fine(513, 2, 1.0, 1.0);
  auto u = fine.sample_nodes([](double x, double) { return x; });
  CHECK(luxemburg_norm(u, fine.constant_exponent(3.0), false) ==
        doctest::Approx(std::pow(0.25, 1.0 / 3.0)).epsilon(1e-5));

  // The defining residual |rho(u/lambda) - 1| <= tol holds at the returned value.
  auto p_var = grid.sample_exponent([](double x, double y) { return 1.7 + x + 0.3 * y; });
  auto w = random_field(grid, rng, 4.0);
  const double lam = luxemburg_norm(w, p_var, true, 1e-12);
  const double rho_at = modular_weighted(w.with_values((w.values / lam).eval()), p_var);
  CHECK(std::abs(rho_at - 1.0) <= 1e-12);

  // Unreachable tolerance within a tiny iteration budget.
  CHECK_THROWS_AS(luxemburg_norm(w, p_var, true, 1e-30, 8), IterationLimitError);
}

TEST_CASE("map lambda -> modular(u/lambda) is strictly decreasing") {
  Grid<double> grid(17, 17, 1.0, 1.0);
  auto p = grid.sample_exponent([](double x, double y) { return 2.0 + 0.5 * std::sin(3 * x + y); });
  std::mt19937_64 rng(5);
  auto u = random_field(grid, rng, 2.0);
  double lam = 0.25;
  double prev = modular_weighted(u.with_values((u.values / lam).eval()), p);
  for (int s = 0; s < 12; ++s) {
    lam *= 1.6;
    const double cur = modular_weighted(u.with_values((u.values / lam).eval()), p);
    CHECK(cur < prev);
    prev = cur;
  }
}

TEST_CASE("scaling bounds lambda^{p_minus} and lambda^{p_plus}") {
  Grid<double> grid(17, 17, 1.0, 1.0);
  auto p = grid.sample_exponent([](double x, double y) { return 1.6 + x + y; });
  std::mt19937_64 rng(17);
  auto u = random_field(grid, rng, 1.5);
  const double r1 = modular_raw(u, p);
  for (double lam : {1.0, 1.3, 2.0, 5.0, 20.0}) {
    const double r = modular_raw(u.with_values((lam * u.values).eval()), p);
    CHECK(r >= std::pow(lam, p.p_minus) * r1 * (1 - 1e-12));
    CHECK(r <= std::pow(lam, p.p_plus) * r1 * (1 + 1e-12));
  }
}

TEST_CASE("modular axioms on sample sets") {
  Grid<double> grid(9, 9, 1.0, 1.0);
  auto p = grid.sample_exponent([](double x, double y) { return 2.0 + 0.7 * std::cos(x - y); });

  // The zero field alone: every margin is exactly zero.
  auto rep0 = check_modular_axioms<double>({grid.zeros()}, p);
  CHECK(rep0.zero_axiom_ok);
  CHECK(rep0.worst_symmetry_diff == 0.0);
  CHECK(rep0.worst_convexity_margin == 0.0);

  std::mt19937_64 rng(23);
  std::vector<GridFunction<double>> samples;
  for (int s = 0; s < 20; ++s) samples.push_back(random_field(grid, rng, 2.0));
  samples.push_back(samples.front().with_values((-samples.front().values).eval()));
  auto rep = check_modular_axioms(samples, p, false, 10, 99);
  CHECK(rep.zero_axiom_ok);
  CHECK(rep.worst_symmetry_diff == 0.0);
  CHECK(rep.all_ok());
}

TEST_CASE("norm-modular inequality margins") {
  Grid<double> grid(17, 17, 1.0, 1.0);
  auto p2 = grid.constant_exponent(2.0);

  // u = 2, p = 2, unweighted: modular 4, norm 2, margin 0.
  auto m = check_norm_modular_inequality(grid.constant_nodes(2.0), p2, false);
  REQUIRE(m.has_value());
  CHECK(*m == doctest::Approx(0.0).scale(1).epsilon(1e-9));

  // Unit-norm field at constant exponent: equality as well.
  auto m1 = check_norm_modular_inequality(grid.constant_nodes(1.0), p2, false);
  REQUIRE(m1.has_value());
  CHECK(*m1 == doctest::Approx(0.0).scale(1).epsilon(1e-9));

  // Not applicable below the unit sphere.
  CHECK_FALSE(check_norm_modular_inequality(grid.constant_nodes(0.5), p2, false).has_value());

  // Random fields rescaled above the unit sphere, variable exponent.
  auto p = grid.sample_exponent([](double x, double y) { return 1.8 + 0.9 * x + 0.4 * y; });
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> radius(1.0, 4.0);
  for (int s = 0; s < 200; ++s) {
    auto u = random_field(grid, rng, 2.0);
    const double norm = luxemburg_norm(u, p, true);
    if (norm == 0.0) continue;
    u.values *= radius(rng) / norm;
    auto margin = check_norm_modular_inequality(u, p, true);
    REQUIRE(margin.has_value());
    CHECK(*margin >= -1e-10);
  }
}
