#include <benchmark/benchmark.h>

#include "eclat/bounds.hpp"
#include "eclat/mean_field.hpp"

namespace {

void BM_MeanBoundExp(benchmark::State& state) {
  const int k = static_cast<int>(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(eclat::mean_latency_bound_exp(k, 0.9).value);
  }
}
BENCHMARK(BM_MeanBoundExp)->Arg(4)->Arg(64);

void BM_MkBound(benchmark::State& state) {
  const int k = static_cast<int>(state.range(0));
  const auto weibull = eclat::chunk_dist(eclat::DistFamily::weibull(1.5), k);
  for (auto _ : state) {
    benchmark::DoNotOptimize(eclat::m_k_bound(weibull, k).value);
  }
}
BENCHMARK(BM_MkBound)->Arg(4)->Arg(8)->Unit(benchmark::kMillisecond);

void BM_OrderStats(benchmark::State& state) {
  const auto dist = eclat::batch_sampling_pmf(0.9, 1.4);
  const int n = static_cast<int>(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(eclat::sum_order_stats(dist.pmf, n));
  }
}
BENCHMARK(BM_OrderStats)->Arg(10)->Arg(100);

void BM_BoundII(benchmark::State& state) {
  for (auto _ : state) {
    benchmark::DoNotOptimize(eclat::bound_II(0.9, 1.4, 10).value);
  }
}
BENCHMARK(BM_BoundII);

void BM_TheoreticalGain(benchmark::State& state) {
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        eclat::theoretical_gain(2, 4, 0.7, eclat::DistFamily::exponential(), 1, 20000).value);
  }
}
BENCHMARK(BM_TheoreticalGain)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
