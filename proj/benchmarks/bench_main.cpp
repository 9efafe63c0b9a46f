#include <random>

#include <benchmark/benchmark.h>

#include <hhomog/homog.hpp>

using namespace hhomog;

namespace {

std::vector<GroupPoint> random_points(std::size_t count) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-10.0, 10.0);
  std::vector<GroupPoint> pts;
  pts.reserve(count);
  for (std::size_t i = 0; i < count; ++i) pts.emplace_back(u(rng), u(rng), u(rng));
  return pts;
}

Integrand checkerboard() {
  return power_integrand(CoefficientField::checkerboard(1, 1.0, 4.0), 2.0, 1);
}

void BM_GroupMul(benchmark::State& state) {
  const auto pts = random_points(1024);
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(group_mul(pts[i & 1023], pts[(i + 1) & 1023]));
    ++i;
  }
}
BENCHMARK(BM_GroupMul);

void BM_TileIndex(benchmark::State& state) {
  const auto pts = random_points(1024);
  std::size_t i = 0;
  for (auto _ : state) benchmark::DoNotOptimize(tile_index(pts[i++ & 1023]));
}
BENCHMARK(BM_TileIndex);

void BM_HGradient(benchmark::State& state) {
  const AnisoGrid g = build_grid(static_cast<double>(state.range(0)), 4, 1);
  const ScalarField u = h_affine_field(g, HorizontalVector{1.0, -0.5});
  for (auto _ : state) benchmark::DoNotOptimize(discrete_h_gradient(u));
  state.SetItemsProcessed(state.iterations() * static_cast<long>(g.num_cells()));
}
BENCHMARK(BM_HGradient)->Arg(1)->Arg(2)->Arg(3);

void BM_DiscreteEnergy(benchmark::State& state) {
  const AnisoGrid g = build_grid(static_cast<double>(state.range(0)), 4, 1);
  const ScalarField u = h_affine_field(g, HorizontalVector{1.0, -0.5});
  const Integrand f = checkerboard();
  for (auto _ : state) benchmark::DoNotOptimize(discrete_energy(u, f));
  state.SetItemsProcessed(state.iterations() * static_cast<long>(g.num_cells()));
}
BENCHMARK(BM_DiscreteEnergy)->Arg(1)->Arg(2)->Arg(3);

void BM_CellSolveCG(benchmark::State& state) {
  const Integrand f = checkerboard();
  const double t = static_cast<double>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(mu_q(f, HorizontalVector{1, 0}, t, 4, 1).energy);
}
BENCHMARK(BM_CellSolveCG)->Arg(1)->Arg(2)->Unit(benchmark::kMillisecond);

void BM_CellSolveLBFGS(benchmark::State& state) {
  const Integrand f = power_integrand(CoefficientField::checkerboard(1, 1.0, 4.0), 3.0, 1);
  SolverConfig cfg;
  cfg.method = SolverMethod::LBFGS;
  for (auto _ : state) benchmark::DoNotOptimize(mu_q(f, HorizontalVector{1, 0}, 1.0, 4, 1, cfg).energy);
}
BENCHMARK(BM_CellSolveLBFGS)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
