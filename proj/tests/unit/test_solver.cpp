#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include <hhomog/errors.hpp>
#include <hhomog/solver.hpp>

#include "dense_oracle.hpp"

using namespace hhomog;

namespace {

Integrand constant_power(double a, double alpha) {
  return power_integrand(CoefficientField::constant(a), alpha, 1);
}

Integrand checkerboard(double alpha = 2.0) {
  return power_integrand(CoefficientField::checkerboard(1, 1.0, 4.0), alpha, 1);
}

double max_norm_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace

TEST_CASE("discrete energy examples") {
  const AnisoGrid g = build_grid(1.0, 2, 1);
  const Integrand f = constant_power(1.0, 2.0);
  CHECK(discrete_energy(h_affine_field(g, HorizontalVector{1, 0}), f) == doctest::Approx(8.0).epsilon(1e-15));
  CHECK(discrete_energy(ScalarField(g), f) == 0.0);
  CHECK(discrete_energy(h_affine_field(g, HorizontalVector{1, 0}), checkerboard()) ==
        doctest::Approx(2.5 * 8.0).epsilon(1e-14));
}

TEST_CASE("energy gradient matches finite differences") {
  const AnisoGrid g = build_grid(1.0, 2, 1);
  for (double alpha : {2.0, 3.0}) {
    const Integrand f = checkerboard(alpha);
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    ScalarField v(g);
    for (double& x : v.values) x = u(rng);
    const std::vector<double> grad = discrete_energy_gradient(v, f);
    for (std::size_t node = 0; node < g.num_nodes(); node += 7) {
      const double h = 1e-6;
      ScalarField p = v, m = v;
      p.values[node] += h;
      m.values[node] -= h;
      const double fd = (discrete_energy(p, f) - discrete_energy(m, f)) / (2 * h);
      REQUIRE(grad[node] == doctest::Approx(fd).epsilon(1e-6));
    }
  }
}

TEST_CASE("discrete objective is convex in the nodal values") {
  const AnisoGrid g = build_grid(1.0, 2, 1);
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  for (double alpha : {2.0, 3.0, 1.5}) {
    const Integrand f = checkerboard(alpha);
    for (int s = 0; s < 50; ++s) {
      ScalarField a(g), b(g), mid(g);
      for (std::size_t i = 0; i < g.num_nodes(); ++i) {
        a.values[i] = u(rng);
        b.values[i] = u(rng);
        mid.values[i] = 0.5 * (a.values[i] + b.values[i]);
      }
      const double chord = 0.5 * (discrete_energy(a, f) + discrete_energy(b, f));
      REQUIRE(discrete_energy(mid, f) <= chord * (1 + 1e-12));
    }
  }
}

TEST_CASE("constant integrand: the minimiser is l_q") {
  const Integrand f = constant_power(1.0, 2.0);
  for (const HorizontalVector& q : {HorizontalVector{1, 0}, HorizontalVector{0, 1}, HorizontalVector{2, -1}}) {
    for (double t : {1.0, 2.0}) {
      const CellSolution s = mu_q(f, q, t, 4, 1);
      CHECK(s.converged);
      const double expected = q.dot(q) * std::pow(t, 4) * 8.0;
      CHECK(std::abs(s.energy - expected) <= 1e-8 * expected);
      const ScalarField lq = h_affine_field(s.u.grid, q);
      CHECK(max_norm_diff(s.u.values, lq.values) <= 1e-6);
    }
  }
  const CellSolution s = mu_q(f, HorizontalVector{1, 0}, 2.0, 2, 1);
  CHECK(s.energy == doctest::Approx(128.0).epsilon(1e-8));
}

TEST_CASE("zero datum gives zero energy") {
  for (double alpha : {2.0, 3.0}) {
    const CellSolution s = mu_q(checkerboard(alpha), HorizontalVector{0, 0}, 1.0, 2, 1);
    CHECK(s.energy == 0.0);
    for (double v : s.u.values) CHECK(v == 0.0);
  }
}

TEST_CASE("checkerboard bounds at t = 1") {
  const CellSolution s = mu_q(checkerboard(), HorizontalVector{1, 0}, 1.0, 4, 1);
  CHECK(s.converged);
  CHECK(s.energy >= 8.0);
  CHECK(s.energy <= 2.5 * 8.0);
  const double affine = discrete_energy(h_affine_field(s.u.grid, HorizontalVector{1, 0}), checkerboard());
  CHECK(s.energy < affine);
}

TEST_CASE("dense oracle agrees with the iterative solver") {
  SUBCASE("3x3x3 grid") {
    const AnisoGrid g = build_grid(1.0, 1, 1);
    REQUIRE(g.num_nodes() == 27);
    const BoundaryData bd = BoundaryData::h_affine(HorizontalVector{1, 0});
    const testing::DenseSolution dense = testing::dense_quadratic_solve(g, checkerboard(), bd);
    const CellSolution it = solve_cell(CellProblem{g, checkerboard(), bd});
    CHECK(std::abs(it.energy - dense.energy) <= 1e-10 * dense.energy);
  }
  SUBCASE("343 unknowns, several data") {
    const AnisoGrid g = build_grid(1.0, 4, 1);
    REQUIRE(g.num_interior_nodes() == 343);
    SolverConfig cfg;
    cfg.tol_grad = 1e-12;
    for (const HorizontalVector& q : {HorizontalVector{1, 0}, HorizontalVector{-0.5, 2}}) {
      const BoundaryData bd = BoundaryData::h_affine(q, 0.25);
      const testing::DenseSolution dense = testing::dense_quadratic_solve(g, checkerboard(), bd);
      CHECK(dense.min_eigenvalue > 0.0);
      const CellSolution it = solve_cell(CellProblem{g, checkerboard(), bd, cfg});
      CHECK(std::abs(it.energy - dense.energy) <= 1e-10 * dense.energy);
      CHECK(max_norm_diff(it.u.values, dense.u) <= 1e-8);
    }
  }
  SUBCASE("matrix p = 2 integrand") {
    SmallMatrix a(2, 2);
    a(0, 0) = 2.0;
    a(0, 1) = a(1, 0) = 0.5;
    a(1, 1) = 1.0;
    const Integrand f = matrix_p_integrand(
        MatrixField::scaled(CoefficientField::checkerboard(1, 1.0, 3.0), a), 2.0, 1);
    const AnisoGrid g = build_grid(1.0, 2, 1);
    const BoundaryData bd = BoundaryData::h_affine(HorizontalVector{1, 1});
    const testing::DenseSolution dense = testing::dense_quadratic_solve(g, f, bd);
    const CellSolution it = solve_cell(CellProblem{g, f, bd});
    CHECK(it.method == SolverMethod::CG);
    CHECK(std::abs(it.energy - dense.energy) <= 1e-10 * dense.energy);
  }
}

TEST_CASE("descent methods on a non-quadratic integrand") {
  const AnisoGrid g = build_grid(1.0, 2, 1);
  const HorizontalVector q{1, 0.5};
  const double target = std::pow(q.norm(), 3.0) * 8.0;
  for (SolverMethod m : {SolverMethod::LBFGS, SolverMethod::FirstOrder}) {
    SolverConfig cfg;
    cfg.method = m;
    cfg.record_history = true;
    // start away from the affine minimiser
    std::vector<double> start = h_affine_field(g, q).values;
    for (std::size_t i = 0; i < start.size(); ++i) start[i] += 0.3 * std::sin(1.7 * i);
    CellProblem p{g, constant_power(1.0, 3.0), BoundaryData::h_affine(q), cfg, start};
    const CellSolution s = solve_cell(p);
    CHECK(s.converged);
    CHECK(s.method == m);
    CHECK(s.energy == doctest::Approx(target).epsilon(1e-7));
    REQUIRE(s.energy_history.size() >= 2);
    for (std::size_t i = 1; i < s.energy_history.size(); ++i) {
      REQUIRE(s.energy_history[i] <= s.energy_history[i - 1] * (1 + 1e-14));
    }
  }
}

TEST_CASE("descent and CG agree on a quadratic problem") {
  const AnisoGrid g = build_grid(1.0, 2, 1);
  const BoundaryData bd = BoundaryData::h_affine(HorizontalVector{1, 0});
  SolverConfig lb;
  lb.method = SolverMethod::LBFGS;
  lb.tol_grad = 1e-10;
  const CellSolution a = solve_cell(CellProblem{g, checkerboard(), bd, lb});
  const CellSolution b = solve_cell(CellProblem{g, checkerboard(), bd});
  CHECK(a.converged);
  CHECK(a.energy == doctest::Approx(b.energy).epsilon(1e-9));
}

TEST_CASE("CG history is non-increasing") {
  SolverConfig cfg;
  cfg.record_history = true;
  const CellSolution s = mu_q(checkerboard(), HorizontalVector{1, 0}, 1.0, 4, 1, cfg);
  REQUIRE(s.energy_history.size() >= 2);
  for (std::size_t i = 1; i < s.energy_history.size(); ++i) {
    REQUIRE(s.energy_history[i] <= s.energy_history[i - 1] + 1e-12 * std::abs(s.energy_history[0]));
  }
}

TEST_CASE("solver configuration errors and non-convergence") {
  SolverConfig cg;
  cg.method = SolverMethod::CG;
  CHECK_THROWS_AS(mu_q(checkerboard(3.0), HorizontalVector{1, 0}, 1.0, 2, 1, cg), ConfigError);
  SolverConfig bad;
  bad.tol_grad = 0.0;
  CHECK_THROWS_AS(mu_q(checkerboard(), HorizontalVector{1, 0}, 1.0, 2, 1, bad), ConfigError);
  const Integrand nonconvex(1, [](const GroupPoint&, const HorizontalVector& p) { return p.dot(p); }, {},
                            GrowthConstants{}, IntegrandFlags{false, false, true, false}, "nc");
  CHECK_THROWS_AS(mu_q(nonconvex, HorizontalVector{1, 0}, 1.0, 2, 1), ConfigError);

  SolverConfig few;
  few.max_iter = 2;
  const CellSolution s = mu_q(checkerboard(), HorizontalVector{1, 0}, 1.0, 4, 1, few);
  CHECK_FALSE(s.converged);
  CHECK(s.iterations <= 2);
  CHECK(s.energy == doctest::Approx(discrete_energy(s.u, checkerboard())).epsilon(1e-12));
}

TEST_CASE("kernel probe") {
  SolverConfig cfg;
  cfg.kernel_probe = true;
  const CellSolution s = mu_q(checkerboard(), HorizontalVector{1, 0}, 1.0, 2, 1, cfg);
  CHECK_FALSE(s.kernel_warning);
  CHECK(s.kernel_probe_gap <= 1e-8);
}

TEST_CASE("energy bounds and admissibility of l_q") {
  const Integrand f = checkerboard();
  for (const HorizontalVector& q : {HorizontalVector{1, 0}, HorizontalVector{0.5, -2}, HorizontalVector{3, 1}}) {
    const CellSolution s = mu_q(f, q, 1.5, 2, 1);
    const double vol = s.u.grid.volume();
    CHECK(s.energy >= f.lower_bound(q) * vol * (1 - 1e-12));
    CHECK(s.energy <= f.upper_bound(q) * vol);
    CHECK(s.energy <= discrete_energy(h_affine_field(s.u.grid, q), f));
  }
}

TEST_CASE("minimum energy is convex in q") {
  const Integrand f = checkerboard();
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  for (int s = 0; s < 10; ++s) {
    const HorizontalVector a{u(rng), u(rng)};
    const HorizontalVector b{u(rng), u(rng)};
    const double ea = mu_q(f, a, 1.0, 2, 1).energy;
    const double eb = mu_q(f, b, 1.0, 2, 1).energy;
    const double em = mu_q(f, 0.5 * (a + b), 1.0, 2, 1).energy;
    REQUIRE(em <= 0.5 * (ea + eb) + 1e-9 * (ea + eb));
  }
}

TEST_CASE("translation invariance of the cell problem") {
  const Integrand f = checkerboard();
  for (const LatticeIndex& z : {LatticeIndex(1), LatticeIndex(1, 0, 0), LatticeIndex(0, 1, 0),
                                LatticeIndex(0, 0, 1), LatticeIndex(1, 1, 1)}) {
    const TranslationReport r = check_translation_invariance(f, HorizontalVector{1, 0}, z, 1.0, 4, 1);
    CHECK(r.coefficients_identical);
    CHECK(r.relative_difference <= 1e-10);
    CHECK(r.passed);
  }
  // negative control: a non-periodic coefficient falsely flagged periodic
  const CoefficientField ramp = CoefficientField::custom(
      [](const GroupPoint& x) { return std::clamp(2.0 + x[0], 1.0, 3.0); }, 1.0, 3.0, true,
      CoefficientField::Kind::Custom, "clamp(2+x1)");
  const TranslationReport bad = check_translation_invariance(power_integrand(ramp, 2.0, 1),
                                                             HorizontalVector{1, 0}, LatticeIndex(1, 0, 0),
                                                             1.0, 2, 1);
  CHECK_FALSE(bad.coefficients_identical);
  CHECK(bad.witness_cell.has_value());
  CHECK(bad.relative_difference > 1e-6);
  CHECK_FALSE(bad.passed);

  const CoefficientField smooth = CoefficientField::smooth(
      [](const GroupPoint& x) { return 2.0 + std::sin(x[0]); }, 1.0, 3.0, "2+sin(x1)");
  CHECK_THROWS_AS(check_translation_invariance(power_integrand(smooth, 2.0, 1), HorizontalVector{1, 0},
                                               LatticeIndex(1), 1.0, 2, 1),
                  ConfigError);
}

TEST_CASE("method names") {
  CHECK(solver_method_from_string(to_string(SolverMethod::LBFGS)) == SolverMethod::LBFGS);
  CHECK(solver_method_from_string("cg") == SolverMethod::CG);
  CHECK_THROWS_AS(solver_method_from_string("newton"), ConfigError);
}
