#include <benchmark/benchmark.h>

#include <vector>

#include "polaron/fock.hpp"
#include "polaron/grid.hpp"
#include "polaron/renorm.hpp"
#include "polaron/solver.hpp"

namespace {

using namespace polaron;

ModelParams params() { return ModelParams(1.0, 1.0, 0.2, 0.1, 2.0); }

Grid cube(int n) {
  GridSpec spec;
  spec.kind = GridKind::cartesian;
  spec.n = n;
  spec.kmax = 2.0;
  return build_grid(spec, params());
}

void BM_BasisEnumeration(benchmark::State& state) {
  const Grid grid = cube(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    FockBasis basis(grid.size(), 2);
    benchmark::DoNotOptimize(basis.size());
  }
}
BENCHMARK(BM_BasisEnumeration)->Arg(4)->Arg(6)->Unit(benchmark::kMillisecond);

void BM_Assemble(benchmark::State& state) {
  const Grid grid = cube(static_cast<int>(state.range(0)));
  const FockBasis basis(grid.size(), 2);
  for (auto _ : state) benchmark::DoNotOptimize(assemble(grid, basis, params()));
}
BENCHMARK(BM_Assemble)->Arg(4)->Arg(6)->Unit(benchmark::kMillisecond);

void BM_Matvec(benchmark::State& state) {
  const Grid grid = cube(static_cast<int>(state.range(0)));
  const FockBasis basis(grid.size(), 2);
  const auto h = assemble(grid, basis, params());
  std::vector<double> x(basis.size(), 1.0), y(basis.size());
  for (auto _ : state) {
    h.matvec(x, y);
    benchmark::DoNotOptimize(y.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(basis.size()));
}
BENCHMARK(BM_Matvec)->Arg(4)->Arg(6)->Unit(benchmark::kMicrosecond);

void BM_LanczosGround(benchmark::State& state) {
  const Grid grid = cube(static_cast<int>(state.range(0)));
  const FockBasis basis(grid.size(), 2);
  const auto h = assemble(grid, basis, params());
  for (auto _ : state) benchmark::DoNotOptimize(lanczos_ground(h).energy);
}
BENCHMARK(BM_LanczosGround)->Arg(4)->Arg(5)->Unit(benchmark::kMillisecond);

void BM_Sigma1(benchmark::State& state) {
  const ModelParams p(1.0, 1.0, 1.0, 0.0);
  const double L = static_cast<double>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(sigma1(p, L).value);
}
BENCHMARK(BM_Sigma1)->Arg(200)->Arg(1600);

}  // namespace

BENCHMARK_MAIN();
