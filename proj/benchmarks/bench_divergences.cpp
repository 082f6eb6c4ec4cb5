#include <benchmark/benchmark.h>

#include <random>

#include "divkit/energy.hpp"
#include "divkit/fourier.hpp"
#include "divkit/probe.hpp"
#include "divkit/transport.hpp"
#include "divkit/whitening.hpp"

using namespace divkit;

namespace {

WeightedSampleSet cloud(std::uint64_t seed, std::size_t n, std::size_t dim, double shift = 0.0) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> z(shift, 1.0);
  std::vector<double> c(n * dim);
  for (auto& v : c) v = z(rng);
  return WeightedSampleSet(dim, c);
}

void BM_EnergyPairwise(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto a = cloud(1, n, 3), b = cloud(2, n, 3, 0.5);
  for (auto _ : state) benchmark::DoNotOptimize(energy::energy_sq(a, b, {1.0}).value);
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_EnergyPairwise)->RangeMultiplier(2)->Range(64, 1024)->Complexity(benchmark::oNSquared);

void BM_FourierMetric(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto a = cloud(3, n, 1), b = cloud(4, n, 1, 0.3);
  for (auto _ : state) benchmark::DoNotOptimize(fourier::fourier_metric(a, b, {2.0, 1}).value);
}
BENCHMARK(BM_FourierMetric)->Arg(32)->Arg(128)->Unit(benchmark::kMillisecond);

void BM_WassersteinLp(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto a = cloud(5, n, 2), b = cloud(6, n, 2, 0.4);
  for (auto _ : state) benchmark::DoNotOptimize(transport::wasserstein_lp(a, b, 1.0).first.value);
}
BENCHMARK(BM_WassersteinLp)->Arg(16)->Arg(64)->Arg(128)->Unit(benchmark::kMillisecond);

void BM_Wasserstein1d(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto a = cloud(7, n, 1), b = cloud(8, n, 1, 0.4);
  for (auto _ : state) benchmark::DoNotOptimize(transport::wasserstein_1d(a, b, 2.0).value);
}
BENCHMARK(BM_Wasserstein1d)->Arg(1000)->Arg(100000);

void BM_WhitenedEnergy(benchmark::State& state) {
  const auto a = cloud(9, 256, 4), b = cloud(10, 256, 4, 0.2);
  const auto probe = parse_probe("energy:1");
  for (auto _ : state) benchmark::DoNotOptimize(whitening::whitened_divergence(probe, a, b, whitening::Method::ZCAcor).value);
}
BENCHMARK(BM_WhitenedEnergy);

}  // namespace
