#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "eclat/service_dist.hpp"

namespace eclat {

/// Join the shortest of d random queues; whole-file service (mean 1).
struct NaiveReplication {
  int d;
};

/// k disjoint batches of d random servers; the shortest queue of each batch
/// gets one chunk (mean 1/k).
struct KSplit {
  int k;
  int d;
};

/// k least-loaded of n random servers; chunk service mean 1/k.
struct LeastKOfN {
  int n;
  int k;
};

/// k least-loaded of n random servers with 1 < n/k < 2; task service mean 1
/// and batch arrival rate lambda L / k.
struct BatchSampling {
  int n;
  int k;
};

/// k + delta random servers; the job completes at the k-th task completion
/// and the remaining tasks are cancelled at no cost.
struct RedundantRequest {
  int k;
  int delta;
};

using Policy =
    std::variant<NaiveReplication, KSplit, LeastKOfN, BatchSampling, RedundantRequest>;

std::string describe(const Policy& policy);
/// Servers probed per job.
int probed_servers(const Policy& policy);
/// Tasks created per job.
int tasks_per_job(const Policy& policy);
/// Number of chunks a file is split into (service mean 1/k), or 1 when each
/// task carries unit-mean work.
int chunk_divisor(const Policy& policy);

struct ClusterConfig {
  int servers = 2000;
  double lambda = 0.5;
  Policy policy = NaiveReplication{2};
  DistFamily service = DistFamily::exponential();
  std::uint64_t seed = 1;
  std::int64_t warmup_jobs = 40000;
  std::int64_t measured_jobs = 100000;
  /// Verify work conservation and per-job latency >= max task demand at
  /// every event. Violations are counted in LatencyStats.
  bool check_invariants = false;

  /// Throws std::invalid_argument on an unstable or inconsistent config.
  void validate() const;
};

/// max(2000, 200 k)
int default_server_count(int k);

struct LatencyStats {
  double mean = 0.0;
  /// Batch-means standard error of the mean.
  double std_err = 0.0;
  double min = 0.0;
  double max = 0.0;
  std::map<double, double> quantiles;
  /// (t, P(W > t)) on an even grid over [0, max].
  std::vector<std::pair<double, double>> ccdf;
  /// (r, P(Q >= r)) for a uniformly chosen server seen at measured arrivals.
  std::vector<std::pair<int, double>> queue_ccdf;
  std::int64_t job_count = 0;

  /// Sorted measured latencies.
  std::vector<double> samples;

  std::int64_t arrivals = 0;
  std::int64_t completions = 0;
  std::int64_t in_flight = 0;
  std::int64_t invariant_violations = 0;
  double simulated_time = 0.0;

  /// Empirical P(W > t) from the stored samples.
  double ccdf_at(double t) const;
  /// Empirical P(Q >= r) from the queue probe.
  double queue_ccdf_at(int r) const;
};

/// Standard error of the mean by non-overlapping batch means.
double batch_means_std_err(const std::vector<double>& values, int batches = 32);

/// Run one simulation to completion of every measured job. Deterministic
/// given the config.
LatencyStats run(const ClusterConfig& config);

struct GainResult {
  double gain;
  double std_err;
  LatencyStats naive;
  LatencyStats coded;
};

struct GainSizes {
  int servers = 0;  // 0: default_server_count(k)
  std::int64_t warmup_jobs = -1;  // -1: 20 * servers
  std::int64_t measured_jobs = 100000;
};

/// NaiveReplication(d) against LeastKOfN(dk, k) on matched seeds.
GainResult gain_experiment(int k, int d, double lambda, const DistFamily& family,
                           std::uint64_t seed, const GainSizes& sizes = {});

struct ResidualConfig {
  double arrival_rate;
  ServiceDistribution service;
  std::uint64_t seed = 1;
  std::int64_t warmup_jobs = 10000;
  std::int64_t measured_jobs = 1000000;
};

struct ResidualResult {
  /// Time-average remaining service of the job in service, over busy time.
  double mean_residual;
  double std_err;
  double busy_fraction;
};

/// Single FCFS M/G/1 queue. Requires arrival_rate * E[X] < 1.
ResidualResult empirical_residual(const ResidualConfig& config);

}  // namespace eclat
