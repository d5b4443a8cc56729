#include <benchmark/benchmark.h>

#include <random>

#include "quasi/io.hpp"
#include "quasi/phantom.hpp"
#include "quasi/quantile.hpp"
#include "quasi/solver.hpp"

using namespace quasi;

namespace {

Volume random_volume(Dims dims, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(0.0, 1.0);
  Volume v(dims);
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = dist(rng);
  return v;
}

void BM_QuantileFilter2D(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const Volume v = random_volume(Dims{n, n, 1}, 1);
  const KernelSpec k{3, 0.5};
  for (auto _ : state) {
    benchmark::DoNotOptimize(quantile_filter(v, k));
  }
  state.SetItemsProcessed(state.iterations() * v.size());
}
BENCHMARK(BM_QuantileFilter2D)->Arg(128)->Arg(256)->Arg(512);

void BM_QuantileFilter3D(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const Volume v = random_volume(Dims{n, n, n}, 2);
  const KernelSpec k{3, 0.5};
  for (auto _ : state) {
    benchmark::DoNotOptimize(quantile_filter(v, k));
  }
  state.SetItemsProcessed(state.iterations() * v.size());
}
BENCHMARK(BM_QuantileFilter3D)->Arg(32)->Arg(64);

void BM_MapApply(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const Volume v = random_volume(Dims{n, n, 1}, 3);
  const QuantileMap map = QuantileMap::build(v, KernelSpec{3, 0.5});
  for (auto _ : state) {
    benchmark::DoNotOptimize(map.apply(v));
  }
  state.SetItemsProcessed(state.iterations() * v.size());
}
BENCHMARK(BM_MapApply)->Arg(256)->Arg(512);

void BM_MisoApplyA(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const Dims d{n, n, 1};
  const Volume f = random_volume(d, 4);
  SolverConfig cfg = preset_config("bscan", 5);
  MisoState s;
  s.f = f;
  s.map = QuantileMap::build(f, cfg.kernel);
  const std::vector<Axis> axes = spatial_axes_for(d);
  s.v = GradientField::zeros(d, axes);
  s.b_v = GradientField::zeros(d, axes);
  s.u = Volume(d, 0.0);
  s.b_u = Volume(d, 0.0);
  for (int t = 0; t < 5; ++t) {
    s.weights.frames.emplace_back(d, 1.0);
    s.weights.epsilons.push_back(0.1);
  }
  const Volume x = random_volume(d, 5);
  for (auto _ : state) {
    benchmark::DoNotOptimize(miso_apply_A(s, cfg, x));
  }
  state.SetItemsProcessed(state.iterations() * d.count());
}
BENCHMARK(BM_MisoApplyA)->Arg(128)->Arg(256);

void BM_MisoSolveBscanPreset(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  PhantomSpec p;
  p.kind = PhantomKind::layered_slab;
  p.dims = Dims{n, n, 1};
  const Volume truth = make_phantom(p);
  NoiseSpec ns;
  ns.sigma = 0.1;
  ns.seed = 6;
  const VolumeSequence frames = make_sequence(truth, 5, ns);
  const SolverConfig cfg = preset_config("bscan", 5);
  for (auto _ : state) {
    benchmark::DoNotOptimize(miso_solve(frames, cfg));
  }
}
BENCHMARK(BM_MisoSolveBscanPreset)->Arg(64)->Arg(128)
    ->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
