#include <benchmark/benchmark.h>

#include "divkit/infodiv.hpp"
#include "divkit/kinetics.hpp"

using namespace divkit;

namespace {

void BM_TradeStep(benchmark::State& state) {
  auto st = kinetics::make_ensemble(kinetics::TradeParams{}, 10000, 1);
  for (auto _ : state) kinetics::step(st, 10000);
  state.SetItemsProcessed(state.iterations() * 10000);
}
BENCHMARK(BM_TradeStep);

void BM_FisherGrid3d(benchmark::State& state) {
  const auto g = GridDensity::sample_box(ReferenceDensity::maxwellian(3, 1.0), 6.0, static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(info::fisher(g));
}
BENCHMARK(BM_FisherGrid3d)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);

}  // namespace
