#include <doctest.h>

#include <cmath>

#include <hhomog/errors.hpp>
#include <hhomog/expression.hpp>
#include <hhomog/homog.hpp>

using namespace hhomog;

namespace {

Integrand unit_power(double alpha) {
  return power_integrand(CoefficientField::constant(1.0), alpha, 1);
}

Integrand checkerboard() {
  return power_integrand(CoefficientField::checkerboard(1, 1.0, 4.0), 2.0, 1);
}

Integrand smooth_sin() {
  return power_integrand(
      CoefficientField::smooth(compile_expression("2 + sin(pi*x1)*sin(pi*x2)", 1), 1.0, 3.0,
                               "2+sin(pi x1)sin(pi x2)"),
      2.0, 1);
}

HomogConfig small_ladder(std::vector<int> ks = {1, 2}, int M = 2) {
  HomogConfig cfg;
  cfg.k_list = std::move(ks);
  cfg.M = M;
  return cfg;
}

}  // namespace

TEST_CASE("x-independent integrand: every e_k equals f(q)") {
  const HomogReport r = energy_density_sequence(unit_power(2.0), HorizontalVector{1, 0},
                                                small_ladder({1, 2, 3}));
  REQUIRE(r.per_k.size() == 3);
  for (const ScaleResult& s : r.per_k) CHECK(std::abs(s.e - 1.0) <= 1e-8);
  CHECK(std::abs(r.f0_estimate - 1.0) <= 1e-8);
  CHECK(r.verdicts.bounds_ok);
  CHECK(r.verdicts.monotone_trend_ok);
  CHECK(r.all_converged);
  CHECK(r.failures.empty());
}

TEST_CASE("zero datum: every e_k is zero") {
  const HomogReport r = energy_density_sequence(checkerboard(), HorizontalVector{0, 0}, small_ladder());
  for (const ScaleResult& s : r.per_k) CHECK(s.e == 0.0);
  CHECK(r.f0_estimate == 0.0);
}

TEST_CASE("checkerboard ladder") {
  HomogConfig cfg;  // k = 1..4, M = 4
  const HorizontalVector q{1, 0};
  const HomogReport r = energy_density_sequence(checkerboard(), q, cfg);
  REQUIRE(r.all_converged);
  REQUIRE(r.per_k.size() == 4);
  double mn = r.per_k[0].e;
  for (const ScaleResult& s : r.per_k) {
    CHECK(s.e >= 1.0);
    CHECK(s.e <= 2.5);
    CHECK(s.e <= s.affine_density);
    CHECK(s.affine_density == doctest::Approx(2.5).epsilon(1e-12));
    mn = std::min(mn, s.e);
  }
  CHECK(r.f0_estimate == mn);
  CHECK(r.inf_over_k == mn);
  CHECK(r.e_last == r.per_k.back().e);
  for (const ScaleResult& s : r.per_k) CHECK(s.e >= r.f0_estimate);
  CHECK(r.f0_estimate < 2.5);
  REQUIRE(r.deltas.size() == 3);
  CHECK(r.deltas[2] < r.deltas[0]);
  // doubling never increases the density
  CHECK(r.per_k[1].e <= r.per_k[0].e + 1e-6);
  CHECK(r.per_k[3].e <= r.per_k[1].e + 1e-6);
  CHECK(r.verdicts.bounds_ok);
  CHECK(r.verdicts.monotone_trend_ok);
}

TEST_CASE("effective integrand of a power law") {
  HomogConfig cfg = small_ladder();
  cfg.solver.tol_grad = 1e-10;
  for (double alpha : {2.0, 3.0}) {
    for (const HorizontalVector& q : {HorizontalVector{1, 0}, HorizontalVector{0.5, -1.5}}) {
      const double f0 = effective_integrand(unit_power(alpha), q, cfg);
      CHECK(std::abs(f0 - std::pow(q.norm(), alpha)) <= 1e-6);
    }
  }
}

TEST_CASE("effective integrand bounds") {
  const Integrand f = checkerboard();
  for (const HorizontalVector& q : {HorizontalVector{1, 0}, HorizontalVector{-1, 2}, HorizontalVector{0.25, 0.5}}) {
    const double f0 = effective_integrand(f, q, small_ladder());
    CHECK(f0 >= f.lower_bound(q));
    CHECK(f0 <= f.upper_bound(q));
  }
}

TEST_CASE("ladder validation") {
  CHECK_THROWS_AS(energy_density_sequence(checkerboard(), HorizontalVector{1, 0}, small_ladder({2, 1})),
                  ConfigError);
  CHECK_THROWS_AS(energy_density_sequence(checkerboard(), HorizontalVector{1, 0}, small_ladder({0, 1})),
                  ConfigError);
  CHECK_THROWS_AS(energy_density_sequence(checkerboard(), HorizontalVector{1, 0, 0, 0}, small_ladder()),
                  ConfigError);
}

TEST_CASE("non-converged solves are reported") {
  HomogConfig cfg = small_ladder({1, 2}, 4);
  cfg.solver.max_iter = 1;
  const HomogReport r = energy_density_sequence(checkerboard(), HorizontalVector{1, 0}, cfg);
  CHECK_FALSE(r.all_converged);
  CHECK_FALSE(r.failures.empty());
  CHECK_THROWS_AS(effective_integrand(checkerboard(), HorizontalVector{1, 0}, cfg), SolverError);
}

TEST_CASE("exact rescaling identity") {
  const HorizontalVector q{1, 0};
  const UltimoReport same = ultimo_check(checkerboard(), q, 1.0, 1.0, 4, 1);
  CHECK(same.energy_dilated == same.energy_rescaled);
  CHECK(same.passed);

  for (double t : {2.0, 3.0}) {
    const UltimoReport r = ultimo_check(unit_power(2.0), HorizontalVector{2, -1}, t, 1.0, 2, 1);
    const double volume = std::pow(t, 4) * 8.0;
    CHECK(r.energy_dilated == doctest::Approx(5.0 * volume).epsilon(1e-8));
    CHECK(r.scaled_rescaled == doctest::Approx(5.0 * volume).epsilon(1e-8));
    CHECK(r.passed);
  }

  for (double t : {1.0, 2.0, 3.0}) {
    for (const Integrand& f : {checkerboard(), smooth_sin()}) {
      const UltimoReport r = ultimo_check(f, q, t, 1.0, 2, 1);
      CHECK(r.relative_difference <= 1e-10);
      CHECK(r.passed);
    }
  }
  const UltimoReport r2 = ultimo_check(checkerboard(), q, 2.0, 1.0, 4, 1);
  CHECK(r2.relative_difference <= 1e-10);

  SolverConfig lb;
  lb.method = SolverMethod::LBFGS;
  const Integrand cubic = power_integrand(CoefficientField::checkerboard(1, 1.0, 4.0), 3.0, 1);
  const UltimoReport r3 = ultimo_check(cubic, q, 2.0, 0.5, 2, 1, lb, 1e-8);
  CHECK(r3.converged);
  CHECK(r3.passed);

  CHECK_THROWS_AS(ultimo_check(checkerboard(), q, 1.3, 1.0, 4, 1), ConfigError);
}

TEST_CASE("pointwise recovery") {
  const HorizontalVector q{1, 0};
  const RecoveryReport flat = recover_integrand_pointwise(unit_power(2.0), GroupPoint(0.3, -0.2, 0.1), q,
                                                          {0.5, 0.25, 0.125}, 4, 1);
  for (double e : flat.error) CHECK(e <= 1e-8);
  CHECK(flat.errors_decreasing);

  const RecoveryReport r = recover_integrand_pointwise(smooth_sin(), GroupPoint(1), q,
                                                       {0.5, 0.25, 0.125}, 4, 1);
  CHECK(r.target == 2.0);
  REQUIRE(r.error.size() == 3);
  CHECK(r.error[1] < r.error[0]);
  CHECK(r.error[2] < r.error[1]);
  CHECK(r.errors_decreasing);
  CHECK(r.all_converged);

  const RecoveryReport zero = recover_integrand_pointwise(smooth_sin(), GroupPoint(1), HorizontalVector{0, 0},
                                                          {0.5, 0.25}, 2, 1);
  for (double d : zero.density) CHECK(d == 0.0);

  CHECK_THROWS_AS(recover_integrand_pointwise(smooth_sin(), GroupPoint(1), q, {0.25, 0.5}, 2, 1),
                  ConfigError);
}

TEST_CASE("non-integer scales") {
  const HorizontalVector q{1, 0};
  const NonIntegerScaleReport flat = noninteger_scale_check(unit_power(2.0), q, {1.5, 2.5}, 2, 1);
  for (const auto& e : flat.entries) CHECK(std::abs(e.e_t - 1.0) <= 1e-8);
  CHECK(flat.passed);

  const NonIntegerScaleReport integer = noninteger_scale_check(checkerboard(), q, {2.0}, 2, 1);
  CHECK(integer.entries[0].e_t == integer.entries[0].e_floor);

  const NonIntegerScaleReport r = noninteger_scale_check(checkerboard(), q, {2.5}, 4, 1);
  const double bound = 4.0 * 2.0 * (1.0 - std::pow(2.0 / 2.5, 4)) + 1e-6;
  CHECK(r.entries[0].bound == doctest::Approx(bound).epsilon(1e-14));
  CHECK(std::abs(r.entries[0].e_t - r.entries[0].e_floor) <= bound);
  CHECK(r.passed);
}

TEST_CASE("q grids") {
  const auto g = tensor_q_grid(2, -2.0, 2.0, 5);
  REQUIRE(g.size() == 25);
  CHECK(g.front() == HorizontalVector{-2, -2});
  CHECK(g[1] == HorizontalVector{-2, -1});
  CHECK(g.back() == HorizontalVector{2, 2});
  CHECK(tensor_q_grid(4, 0.0, 1.0, 2).size() == 16);
  CHECK_THROWS_AS(tensor_q_grid(2, 1.0, 0.0, 3), ConfigError);
}

TEST_CASE("sweep of an x-independent integrand") {
  const auto grid = tensor_q_grid(2, -2.0, 2.0, 5);
  const EffectiveIntegrandTable t = q_sweep(unit_power(2.0), grid, small_ladder());
  REQUIRE(t.f0.size() == 25);
  for (std::size_t i = 0; i < grid.size(); ++i) CHECK(std::abs(t.f0[i] - grid[i].dot(grid[i])) <= 1e-6);
  CHECK(t.convexity_ok);
  CHECK(t.worst_convexity_violation <= 0.0);
  CHECK(t.triples_checked > 0);
  CHECK(t.growth_ok);
  CHECK(t.symmetry_ok);
}

TEST_CASE("sweep of the checkerboard") {
  HomogConfig cfg = small_ladder();
  cfg.threads = 2;
  const auto grid = tensor_q_grid(2, -1.0, 1.0, 3);
  const EffectiveIntegrandTable t = q_sweep(checkerboard(), grid, cfg);
  CHECK(t.growth_ok);
  CHECK(t.convexity_ok);
  CHECK(t.symmetry_ok);
  CHECK(t.worst_symmetry_gap <= 2 * cfg.solver.tol_grad);
  // sequential and threaded sweeps agree bitwise
  cfg.threads = 1;
  const EffectiveIntegrandTable s = q_sweep(checkerboard(), grid, cfg);
  CHECK(s.f0 == t.f0);
}
