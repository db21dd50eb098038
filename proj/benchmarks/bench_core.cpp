#include "chitf/likelihoods.hpp"
#include "chitf/model.hpp"
#include "chitf/synth.hpp"
#include "chitf/tensor.hpp"

#include <benchmark/benchmark.h>

#include <random>

using namespace chitf;

namespace {

std::vector<FactorMatrix> random_factors(std::size_t patients, std::size_t items, std::size_t rank,
                                         std::size_t modalities) {
  std::mt19937_64 rng(1);
  std::vector<FactorMatrix> out{plant_factor(patients, rank, 1.0, 1.0, rng)};
  for (std::size_t k = 0; k < modalities; ++k) out.push_back(plant_factor(items, rank, 1.0, 1.0, rng));
  return out;
}

void BM_ReconstructMarginal(benchmark::State& state) {
  const auto rank = static_cast<std::size_t>(state.range(0));
  const auto all = random_factors(1000, 200, rank, 3);
  const std::vector<FactorMatrix> mods(all.begin() + 1, all.end());
  for (auto _ : state) benchmark::DoNotOptimize(reconstruct_marginal(all[0], mods, 0));
}
BENCHMARK(BM_ReconstructMarginal)->Arg(5)->Arg(20)->Arg(50);

FittedModel synthetic_model(std::size_t rank) {
  ModelSpec spec;
  spec.rank = rank;
  spec.seed = 1;
  spec.tensors.push_back({"Dx-Rx", {"Dx", "Rx"}, Distribution::Poisson, 1e-9});
  spec.tensors.push_back({"Dx-Lab", {"Dx", "Lab"}, Distribution::Gaussian, 1.0});
  SynthConfig sc;
  sc.spec = spec;
  sc.patients = 1000;
  sc.items = {{"Dx", 100}, {"Rx", 150}, {"Lab", 50}};
  sc.datatypes = {{"Dx", DataType::Binary}, {"Rx", DataType::Integer}, {"Lab", DataType::Real}};
  return FittedModel::build(spec, synth_generate(sc, 2).first);
}

void BM_Objective(benchmark::State& state) {
  const FittedModel model = synthetic_model(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(model.objective());
}
BENCHMARK(BM_Objective)->Arg(10)->Arg(50);

void BM_GradientShared(benchmark::State& state) {
  const FittedModel model = synthetic_model(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(model.gradient_block(BlockId::shared()));
}
BENCHMARK(BM_GradientShared)->Arg(10)->Arg(50);

void BM_ErfSeries(benchmark::State& state) {
  double x = -4.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(erf_series(x));
    x = x > 4.0 ? -4.0 : x + 0.01;
  }
}
BENCHMARK(BM_ErfSeries);

}  // namespace

BENCHMARK_MAIN();
