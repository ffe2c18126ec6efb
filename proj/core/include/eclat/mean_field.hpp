#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "eclat/rng.hpp"

namespace eclat {

/// Queue-length tail of a power-of-d subsystem: P(Q >= r) <= c_u * load^(d^r).
struct DoubleExpTailModel {
  double lambda;
  int d;
  double per_queue_load;
  double c_u = 1.0;

  void validate() const;
};

/// min(1, c_u * load^(d^r)). Underflows cleanly to 0 for large r.
double double_exp_ccdf(const DoubleExpTailModel& model, int r);

/// Inverse-CCDF draw with P(Q >= 0) = 1 and P(Q >= r) = double_exp_ccdf(r)
/// for r >= 1.
int sample_queue_length(const DoubleExpTailModel& model, Rng& rng);

/// Probability mass function on {0, 1, ..., q_max}.
class QueuePmf {
 public:
  QueuePmf() = default;
  /// Throws std::invalid_argument on negative entries or a total off 1 by
  /// more than tol.
  explicit QueuePmf(std::vector<double> probs, double tol = 1e-9);

  static QueuePmf point_mass(int q);

  int q_max() const noexcept { return static_cast<int>(probs_.size()) - 1; }
  std::span<const double> probs() const noexcept { return probs_; }
  double operator[](int i) const noexcept {
    return (i < 0 || i > q_max()) ? 0.0 : probs_[static_cast<std::size_t>(i)];
  }
  /// P(Q <= i)
  double cdf(int i) const noexcept;
  /// P(Q >= i)
  double ccdf(int i) const noexcept;
  double mean() const noexcept;
  double second_moment() const noexcept;
  int sample(Rng& rng) const noexcept;

 private:
  std::vector<double> probs_;
  std::vector<double> cdf_;
};

/// Stationary queue-length law under batch sampling with probe ratio d.
struct BatchSamplingDist {
  double lambda;
  double d;
  int q_max;
  QueuePmf pmf;
};

/// ceil(log((d-1)/(d(1-lambda))) / log(lambda d)) computed in long double.
int batch_sampling_q_max(double lambda, double d);

/// Geometric body (1-lambda)(lambda d)^i for i < q_max; the atom at q_max
/// carries the residual mass. Requires 0 < lambda < 1, 1 < d < 2,
/// lambda d != 1.
BatchSamplingDist batch_sampling_pmf(double lambda, double d);

/// E[Q_(rank)], the rank-th smallest of sample_count i.i.d. draws from pmf.
double order_stat_expectation(const QueuePmf& pmf, int sample_count, int rank);

/// Sum over all ranks of E[Q_(l)]; equals sample_count * E[Q].
double sum_order_stats(const QueuePmf& pmf, int sample_count);

/// State-dependent arrival rate seen by a queue of length m when arrivals
/// join the shortest of d sampled queues with lengths distributed as pmf.
double effective_arrival_rate(double lambda, double d, int m, const QueuePmf& pmf);

}  // namespace eclat
