#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <string>

#include "eclat/mean_field.hpp"
#include "eclat/service_dist.hpp"

namespace eclat {

/// Result of one bound evaluation.
///
/// `inputs` echoes the arguments (k, lambda, tau, b, d, delta, epsilon as
/// applicable) and `aux` records intermediate quantities (r, the tail
/// probability delta, M(k), mu2, sigma2, the minimizing s or z). Both maps
/// are ordered so serialization is stable.
struct BoundReport {
  double value = 0.0;
  std::string branch;
  std::map<std::string, double> inputs;
  std::map<std::string, double> aux;
};

/// Monte Carlo estimate with its standard error (0 for closed forms).
struct Estimate {
  double value = 0.0;
  double std_err = 0.0;
};

/// Logarithm conventions. Terms of the maximal inequality use the natural
/// log; terms derived from the queue-length cutoff r use base 2.
inline double ln(double x) { return std::log(x); }
inline double lg(double x) { return std::log2(x); }

double harmonic(int k);

/// max(tau sqrt(2 ln N) + mean, 2 b ln N + mean): an upper bound on the
/// expected maximum of N i.i.d. (tau^2, b) sub-exponential variables.
double maximal_subexp_bound(int n, const SubExpParams& params, double mean);

/// Minimizer and value of the M(k) bound
///   min_{0 < s < s_max} (1/s) ln(k^2 (E[e^{sX}] - 1) / s)
/// for a chunk law with mean 1/k. Throws DomainError when the MGF is
/// infinite for all s > 0.
struct MkBound {
  double value;
  double s_min;
};
MkBound m_k_bound(const ServiceDistribution& dist, int k);

/// E[X^(n+1)] / ((n+1) E[X]): n-th moment of the residual service time seen
/// while the server is busy.
double residual_moment(const ServiceDistribution& dist, int n);

/// Cutoff r + 1 = lg(4 lg k) - lg lg(k / lambda), the queue-length level
/// beyond which the double-exponential tail is below 1/k^3.
double queue_cutoff(int k, double lambda);

/// Mean latency bound for (tau^2, b) sub-exponential chunks with d = 2
/// (Phi1 or Phi2, plus M(k)). When m_k is not supplied the caller gets the
/// Phi part only and aux["M_k"] = 0. Requires k >= 2 and 1/k < lambda < 1.
BoundReport mean_latency_bound_general(int k, double lambda,
                                       const SubExpParams& params,
                                       std::optional<double> m_k = std::nullopt);

/// Mean latency bound for exponential chunks of mean 1/k (Phi3 or Phi4).
/// Requires k >= 2 and 1/k < lambda < 1.
BoundReport mean_latency_bound_exp(int k, double lambda);

/// Applicable mean latency bound for a chunk family: Phi3/Phi4 for
/// exponential, Phi1/Phi2 + M(k) otherwise. Loads at or below 1/k are
/// evaluated at lambda = 1/k, which still bounds the latency because it is
/// nondecreasing in the load; the report then carries aux["lambda_eval"].
BoundReport mean_latency_bound(const DistFamily& family, int k, double lambda);

/// Tail bound on P(W > t) for exponential chunks; clamped to [0, 1].
/// aux: r and the branch taken.
BoundReport tail_latency_bound(int k, double lambda, double epsilon, double t);

/// r = lg(lg(epsilon / k) / lg(lambda / k)).
double tail_cutoff(int k, double lambda, double epsilon);

/// E[max of k chunk service times] when every queue is empty.
/// Exact for the exponential and shifted-exponential families; Monte Carlo
/// with `samples` draws otherwise.
Estimate zero_load_latency(const DistFamily& family, int k, std::uint64_t seed = 1,
                           std::size_t samples = 400000);

/// E[whole-file service] - zero_load_latency; the same conventions apply.
Estimate zero_load_gain(const DistFamily& family, int k, std::uint64_t seed = 1,
                        std::size_t samples = 400000);

/// (H(k + delta) - H(delta)) / k: mean time to the k-th of k + delta
/// exponential chunk completions, mean 1/k each.
double redundant_request_latency(int k, int delta);

enum class BoundIVariant { Tight, Loose };

/// H(k) + sum_l E[Q_(l)] / (k - l + 1) (tight) or H(k) + N E[Q] (loose)
/// under batch sampling. sample_count defaults to k and must be >= k.
BoundReport bound_I(double lambda, double d, int k, BoundIVariant variant,
                    std::optional<int> sample_count = std::nullopt);
BoundReport bound_I(const BatchSamplingDist& dist, int k, BoundIVariant variant,
                    std::optional<int> sample_count = std::nullopt);

/// Mean and variance of the density obtained by linear interpolation of the
/// pmf atoms at 0..q_max, renormalized to unit mass.
struct InterpolatedMoments {
  double mass;
  double mean;
  double variance;
};
InterpolatedMoments interpolated_moments(const QueuePmf& pmf);

/// min over z in [z_lo, z_hi] of z + (mu - z + sqrt((mu - z)^2 + variance)) / 2.
struct InnerMinimum {
  double value;
  double z;
};
InnerMinimum order_stat_mean_variance_min(double mu, double variance, double z_lo,
                                          double z_hi);

/// H(k) + k min_z (z + (mu2 - z + sqrt((mu2 - z)^2 + sigma2)) / 2) over the
/// interpolated density, z searched on [-q_max, q_max]. q_max = 0 gives H(k).
BoundReport bound_II(double lambda, double d, int k);
BoundReport bound_II(const QueuePmf& pmf, int k);

/// Lower bound on the gain of an (dk, k) code over d-way replication:
/// Monte Carlo E[sum_{j <= Q} X_r^j] with Q from the double-exponential tail
/// model (per-queue load lambda, d choices) minus the applicable upper bound
/// on the coded latency.
struct GainBound {
  double value;
  double std_err;
  double baseline;
  BoundReport bound;
};
GainBound theoretical_gain(int d, int k, double lambda, const DistFamily& family,
                           std::uint64_t seed = 1, std::size_t samples = 200000);

/// Flat CSV rendering of a BoundReport.
std::string bound_csv_header();
std::string bound_csv_row(const BoundReport& report);

}  // namespace eclat
