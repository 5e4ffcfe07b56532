#include <benchmark/benchmark.h>

#include "stablesde/levy_noise.hpp"
#include "stablesde/rng.hpp"
#include "stablesde/sde_engine.hpp"

using namespace stablesde;

static void BM_StableIncrement(benchmark::State& state) {
  StableNoise noise(1.5, static_cast<int>(state.range(0)));
  RngStream rng(42, 0);
  std::vector<double> z(noise.dim);
  for (auto _ : state) {
    sample_stable_increment_into(noise, 1e-2, rng, z.data());
    benchmark::DoNotOptimize(z.data());
  }
}
BENCHMARK(BM_StableIncrement)->Arg(1)->Arg(3);

static void BM_TamedEulerPath(benchmark::State& state) {
  StableNoise noise(1.5, 1);
  DriftModel model = DriftModel::power(static_cast<double>(state.range(0)) / 10.0);
  SimConfig cfg;
  cfg.x0 = {0.0};
  cfg.dt = 1e-2;
  cfg.horizon = 10.0;
  std::uint64_t replica = 0;
  for (auto _ : state) {
    RngStream rng(42, replica++);
    auto x = integrate_path(model, noise, cfg, rng);
    benchmark::DoNotOptimize(x.data());
  }
  state.SetItemsProcessed(state.iterations() * 1000);
}
BENCHMARK(BM_TamedEulerPath)->Arg(0)->Arg(6);

static void BM_SemiImplicitPath(benchmark::State& state) {
  StableNoise noise(1.5, 1);
  DriftModel model = DriftModel::power(0.6);
  SimConfig cfg;
  cfg.x0 = {0.0};
  cfg.dt = 1e-2;
  cfg.horizon = 10.0;
  cfg.scheme = Scheme::semi_implicit;
  std::uint64_t replica = 0;
  for (auto _ : state) {
    RngStream rng(42, replica++);
    auto x = integrate_path(model, noise, cfg, rng);
    benchmark::DoNotOptimize(x.data());
  }
  state.SetItemsProcessed(state.iterations() * 1000);
}
BENCHMARK(BM_SemiImplicitPath);

BENCHMARK_MAIN();
