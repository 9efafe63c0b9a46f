#include <doctest.h>

#include <cmath>

#include <hhomog/errors.hpp>
#include <hhomog/stochastic.hpp>

using namespace hhomog;

namespace {

MonteCarloConfig small_mc(int samples, std::vector<int> ks = {1, 2}) {
  MonteCarloConfig cfg;
  cfg.k_list = std::move(ks);
  cfg.n_samples = samples;
  cfg.M = 2;
  return cfg;
}

}  // namespace

TEST_CASE("value laws") {
  const ValueLaw u = ValueLaw::uniform(1.0, 3.0);
  CHECK(u.quantile(0.0) == 1.0);
  CHECK(u.quantile(0.5) == 2.0);
  CHECK(u.support_min() == 1.0);
  CHECK(u.support_max() == 3.0);
  const ValueLaw tp = ValueLaw::two_point(1.0, 4.0, 0.25);
  CHECK(tp.quantile(0.1) == 1.0);
  CHECK(tp.quantile(0.3) == 4.0);
  CHECK_THROWS_AS(ValueLaw::uniform(3.0, 1.0), ConfigError);
  CHECK_THROWS_AS(ValueLaw::uniform(0.0, 1.0), ConfigError);
  CHECK_THROWS_AS(ValueLaw::two_point(1.0, 2.0, 1.5), ConfigError);
}

TEST_CASE("tile uniforms are pure and in range") {
  const LatticeIndex k(3, -2, 7);
  CHECK(tile_uniform(5, k) == tile_uniform(5, k));
  CHECK(tile_uniform(5, k) != tile_uniform(6, k));
  CHECK(tile_uniform(5, k) != tile_uniform(5, LatticeIndex(3, -2, 8)));
  double lo = 1.0, hi = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const double v = tile_uniform(1, LatticeIndex(i, -i, i * i));
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  CHECK(lo >= 0.0);
  CHECK(hi < 1.0);
  CHECK(lo < 0.01);
  CHECK(hi > 0.99);
}

TEST_CASE("degenerate two-point law gives a deterministic field") {
  const RandomTileField field(42, ValueLaw::two_point(1.0, 1.0, 0.5), 1);
  const AnisoGrid g = build_grid(2.0, 2, 1);
  for (double a : field.cell_coefficients(g)) CHECK(a == 1.0);
}

TEST_CASE("same seed reproduces the realisation bitwise") {
  const ValueLaw law = ValueLaw::uniform(1.0, 4.0);
  const AnisoGrid g = build_grid(3.0, 2, 1);
  const RandomTileField a(12345, law, 1);
  const RandomTileField b(12345, law, 1);
  const auto ra = a.realize(g);
  CHECK(ra == b.realize(g));
  CHECK(a.cell_coefficients(g) == b.cell_coefficients(g));
  CHECK(ra != RandomTileField(12346, law, 1).realize(g));
  // every cell reads the value of its own tile
  const std::vector<double> cells = a.cell_coefficients(g);
  for (std::size_t c = 0; c < g.num_cells(); ++c) {
    REQUIRE(cells[c] == ra.at(tile_index(g.cell_center(c))));
  }
}

TEST_CASE("distinct tiles are uncorrelated") {
  const ValueLaw law = ValueLaw::uniform(0.0001, 1.0);
  const LatticeIndex k1(0, 0, 0), k2(1, 0, 0), k3(0, 1, 5);
  constexpr int N = 10000;
  for (const LatticeIndex& other : {k2, k3}) {
    double s1 = 0, s2 = 0, s11 = 0, s22 = 0, s12 = 0;
    for (int seed = 0; seed < N; ++seed) {
      const RandomTileField f(derive_seed(7, seed), law, 1);
      const double x = f.value(k1), y = f.value(other);
      s1 += x;
      s2 += y;
      s11 += x * x;
      s22 += y * y;
      s12 += x * y;
    }
    const double cov = s12 / N - (s1 / N) * (s2 / N);
    const double v1 = s11 / N - (s1 / N) * (s1 / N);
    const double v2 = s22 / N - (s2 / N) * (s2 / N);
    CHECK(std::abs(cov / std::sqrt(v1 * v2)) <= 3.0 / std::sqrt(double(N)));
  }
}

TEST_CASE("stationarity under integer translations") {
  // a_omega(tau_z x) has the law of a_omega(x): compare empirical means and
  // variances at x and at a translate over many seeds.
  const ValueLaw law = ValueLaw::uniform(1.0, 3.0);
  const GroupPoint x(0.3, -0.7, 0.2);
  const GroupPoint y = translate_tau(LatticeIndex(2, -1, 3), x);
  constexpr int N = 1000;
  double mx = 0, my = 0, vx = 0, vy = 0;
  for (int seed = 0; seed < N; ++seed) {
    const RandomTileField f(derive_seed(99, seed), law, 1);
    const double a = f(x), b = f(y);
    mx += a;
    my += b;
    vx += a * a;
    vy += b * b;
  }
  mx /= N;
  my /= N;
  vx = vx / N - mx * mx;
  vy = vy / N - my * my;
  // uniform(1, 3): variance 1/3
  const double se = std::sqrt((vx + vy) / N);
  CHECK(std::abs(mx - my) <= 4 * se);
  CHECK(std::abs(mx - 2.0) <= 4 * std::sqrt(1.0 / 3.0 / N));
  CHECK(std::abs(vx - 1.0 / 3.0) <= 0.06);
  CHECK(std::abs(vy - 1.0 / 3.0) <= 0.06);
}

TEST_CASE("random integrand data") {
  const Integrand f = sample_random_integrand(3, ValueLaw::two_point(1.0, 4.0, 0.5), 2.0);
  CHECK(f.growth().c1 == 1.0);
  CHECK(f.growth().c2 == 4.0);
  CHECK(f.flags().random);
  CHECK_FALSE(f.flags().h_periodic);
  CHECK(f.flags().convex_in_q);
  CHECK_THROWS_AS(sample_random_integrand(3, ValueLaw::uniform(1.0, 2.0), 1.0), ConfigError);
}

TEST_CASE("seed derivation") {
  CHECK(derive_seed(1, 0) == derive_seed(1, 0));
  CHECK(derive_seed(1, 0) != derive_seed(1, 1));
  CHECK(derive_seed(1, 0) != derive_seed(2, 0));
}

TEST_CASE("deterministic law: zero variance, periodic value") {
  const MonteCarloReport r =
      monte_carlo_effective(ValueLaw::two_point(2.0, 2.0, 0.5), 2.0, HorizontalVector{1, 0}, small_mc(4));
  REQUIRE(r.per_k.size() == 2);
  for (const MonteCarloScale& s : r.per_k) {
    CHECK(s.count == 4);
    CHECK(s.failures == 0);
    CHECK(s.variance <= 1e-20);
    CHECK(std::abs(s.mean - 2.0) <= 1e-8);
  }
  CHECK(r.bounds_ok);
  CHECK(r.samples.size() == 8);
}

TEST_CASE("Monte Carlo layout and reproducibility") {
  MonteCarloConfig cfg = small_mc(3);
  const ValueLaw law = ValueLaw::two_point(1.0, 4.0, 0.5);
  const HorizontalVector q{1, 0};
  const MonteCarloReport a = monte_carlo_effective(law, 2.0, q, cfg);
  cfg.threads = 2;
  const MonteCarloReport b = monte_carlo_effective(law, 2.0, q, cfg);
  REQUIRE(a.samples.size() == 6);
  for (std::size_t i = 0; i < a.samples.size(); ++i) {
    CHECK(a.samples[i].seed == b.samples[i].seed);
    CHECK(a.samples[i].k == b.samples[i].k);
    CHECK(a.samples[i].e == b.samples[i].e);
  }
  CHECK(a.samples[0].seed == derive_seed(cfg.base_seed, 0));
  CHECK(a.samples[0].k == 1);
  CHECK(a.samples[1].k == 2);
  CHECK(a.samples[2].seed == derive_seed(cfg.base_seed, 1));
  for (const MonteCarloSample& s : a.samples) {
    CHECK(s.e >= 1.0 - 1e-9);
    CHECK(s.e <= 4.0 + 1e-9);
  }
  CHECK(a.bounds_ok);

  double mean1 = 0;
  for (const MonteCarloSample& s : a.samples)
    if (s.k == 1) mean1 += s.e / 3.0;
  CHECK(a.per_k[0].mean == doctest::Approx(mean1).epsilon(1e-14));
}

TEST_CASE("concentration report") {
  const MonteCarloReport few =
      monte_carlo_effective(ValueLaw::two_point(1.0, 4.0, 0.5), 2.0, HorizontalVector{1, 0}, small_mc(4));
  CHECK_THROWS_AS(concentration_report(few, 0.1), ConfigError);

  const MonteCarloReport single =
      monte_carlo_effective(ValueLaw::two_point(1.0, 4.0, 0.5), 2.0, HorizontalVector{1, 0}, small_mc(8, {1}));
  CHECK_THROWS_AS(concentration_report(single, 0.1), ConfigError);

  const MonteCarloReport mc =
      monte_carlo_effective(ValueLaw::two_point(1.0, 4.0, 0.5), 2.0, HorizontalVector{1, 0}, small_mc(8));
  const ConcentrationReport huge = concentration_report(mc, 100.0);
  CHECK(huge.pooled == mc.per_k.back().mean);
  for (double a : huge.above) CHECK(a == 0.0);
  for (double b : huge.below) CHECK(b == 0.0);
  CHECK(huge.passed);
  CHECK_THROWS_AS(concentration_report(mc, -1.0), ConfigError);
}
