#include <benchmark/benchmark.h>

#include "eclat/simulator.hpp"

namespace {

eclat::ClusterConfig config(eclat::Policy policy, double lambda, std::int64_t jobs) {
  eclat::ClusterConfig c;
  c.policy = policy;
  c.lambda = lambda;
  c.servers = 2000;
  c.warmup_jobs = 0;
  c.measured_jobs = jobs;
  return c;
}

void run_policy(benchmark::State& state, eclat::Policy policy) {
  const double lambda = static_cast<double>(state.range(0)) / 100.0;
  const std::int64_t jobs = 50000;
  for (auto _ : state) {
    auto stats = eclat::run(config(policy, lambda, jobs));
    benchmark::DoNotOptimize(stats.mean);
  }
  state.SetItemsProcessed(state.iterations() * jobs * eclat::tasks_per_job(policy));
}

void BM_Naive(benchmark::State& s) { run_policy(s, eclat::NaiveReplication{2}); }
void BM_KSplit(benchmark::State& s) { run_policy(s, eclat::KSplit{4, 2}); }
void BM_LeastKOfN(benchmark::State& s) { run_policy(s, eclat::LeastKOfN{8, 4}); }
void BM_Batch(benchmark::State& s) { run_policy(s, eclat::BatchSampling{14, 10}); }
void BM_Redundant(benchmark::State& s) { run_policy(s, eclat::RedundantRequest{4, 2}); }

BENCHMARK(BM_Naive)->Arg(50)->Arg(90)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_KSplit)->Arg(50)->Arg(90)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_LeastKOfN)->Arg(50)->Arg(90)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Batch)->Arg(80)->Arg(90)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Redundant)->Arg(10)->Arg(50)->Unit(benchmark::kMillisecond);

}  // namespace
