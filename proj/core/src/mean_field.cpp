#include "eclat/mean_field.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "eclat/numeric.hpp"
#include "eclat/service_dist.hpp"

namespace eclat {

void DoubleExpTailModel::validate() const {
  if (!(per_queue_load > 0.0 && per_queue_load < 1.0)) {
    throw std::invalid_argument("per-queue load must lie in (0, 1)");
  }
  if (d < 2) throw std::invalid_argument("choice count d must be >= 2");
  if (!(c_u > 0.0)) throw std::invalid_argument("c_u must be positive");
}

double double_exp_ccdf(const DoubleExpTailModel& model, int r) {
  if (r < 0) throw std::invalid_argument("queue length must be non-negative");
  // c_u * load^(d^r) = exp(log c_u + d^r log load)
  const double exponent =
      std::log(model.c_u) + std::pow(static_cast<double>(model.d), r) *
                                std::log(model.per_queue_load);
  if (exponent < -745.0) return 0.0;
  return std::min(1.0, std::exp(exponent));
}

int sample_queue_length(const DoubleExpTailModel& model, Rng& rng) {
  const double u = rng.uniform();
  int q = 0;
  // P(Q >= q+1) > u  <=>  Q >= q+1
  while (u < double_exp_ccdf(model, q + 1)) ++q;
  return q;
}

QueuePmf::QueuePmf(std::vector<double> probs, double tol) : probs_(std::move(probs)) {
  if (probs_.empty()) throw std::invalid_argument("pmf must have at least one atom");
  double total = 0.0;
  cdf_.reserve(probs_.size());
  for (double p : probs_) {
    if (!(p >= 0.0)) throw std::invalid_argument("pmf entries must be non-negative");
    total += p;
    cdf_.push_back(total);
  }
  if (std::abs(total - 1.0) > tol) {
    throw std::invalid_argument("pmf sums to " + std::to_string(total) + ", not 1");
  }
}

QueuePmf QueuePmf::point_mass(int q) {
  if (q < 0) throw std::invalid_argument("point mass location must be >= 0");
  std::vector<double> p(static_cast<std::size_t>(q) + 1, 0.0);
  p.back() = 1.0;
  return QueuePmf(std::move(p));
}

double QueuePmf::cdf(int i) const noexcept {
  if (i < 0) return 0.0;
  if (i >= q_max()) return 1.0;
  return std::min(1.0, cdf_[static_cast<std::size_t>(i)]);
}

double QueuePmf::ccdf(int i) const noexcept {
  if (i <= 0) return 1.0;
  if (i > q_max()) return 0.0;
  // Summing the upper tail directly avoids cancellation in 1 - cdf.
  double tail = 0.0;
  for (int j = q_max(); j >= i; --j) tail += probs_[static_cast<std::size_t>(j)];
  return tail;
}

double QueuePmf::mean() const noexcept {
  double m = 0.0;
  for (int i = 1; i <= q_max(); ++i) m += i * probs_[static_cast<std::size_t>(i)];
  return m;
}

double QueuePmf::second_moment() const noexcept {
  double m = 0.0;
  for (int i = 1; i <= q_max(); ++i) {
    m += static_cast<double>(i) * i * probs_[static_cast<std::size_t>(i)];
  }
  return m;
}

int QueuePmf::sample(Rng& rng) const noexcept {
  const double u = rng.uniform() * cdf_.back();
  const auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
  return static_cast<int>(std::min<std::ptrdiff_t>(it - cdf_.begin(), q_max()));
}

int batch_sampling_q_max(double lambda, double d) {
  const long double l = lambda;
  const long double dd = d;
  const long double num = std::log((dd - 1.0L) / (dd * (1.0L - l)));
  const long double den = std::log(l * dd);
  return static_cast<int>(std::ceil(num / den));
}

BatchSamplingDist batch_sampling_pmf(double lambda, double d) {
  if (!(lambda > 0.0 && lambda < 1.0)) {
    throw std::invalid_argument("batch sampling requires 0 < lambda < 1");
  }
  if (!(d > 1.0 && d < 2.0)) {
    throw std::invalid_argument("batch sampling requires probe ratio 1 < d < 2");
  }
  if (lambda * d == 1.0) {
    throw std::invalid_argument("lambda * d == 1 is degenerate");
  }
  const int q_max = batch_sampling_q_max(lambda, d);
  if (q_max <= 0) {
    throw std::domain_error("batch sampling q_max = " + std::to_string(q_max) +
                            " is not positive");
  }
  std::vector<double> probs(static_cast<std::size_t>(q_max) + 1);
  double body = 0.0;
  const double ratio = lambda * d;
  for (int i = 0; i < q_max; ++i) {
    probs[static_cast<std::size_t>(i)] = (1.0 - lambda) * std::pow(ratio, i);
    body += probs[static_cast<std::size_t>(i)];
  }
  const double residual = 1.0 - body;
  if (residual < -1e-9) {
    throw std::domain_error("batch sampling residual mass " + std::to_string(residual) +
                            " is negative");
  }
  probs.back() = std::max(residual, 0.0);
  return {lambda, d, q_max, QueuePmf(std::move(probs), 1e-12)};
}

double order_stat_expectation(const QueuePmf& pmf, int sample_count, int rank) {
  if (sample_count < 1) throw std::invalid_argument("sample count must be >= 1");
  if (rank < 1 || rank > sample_count) {
    throw std::out_of_range("rank " + std::to_string(rank) + " outside 1.." +
                            std::to_string(sample_count));
  }
  // E[Q_(l)] = sum_{m >= 1} P(Q_(l) >= m); Q_(l) >= m iff fewer than l draws
  // fall below m.
  double expectation = 0.0;
  for (int m = 1; m <= pmf.q_max(); ++m) {
    const double below = pmf.cdf(m - 1);
    const double above = 1.0 - below;
    double tail = 0.0;
    for (int j = 0; j < rank; ++j) {
      tail += numeric::binomial(sample_count, j) * std::pow(below, j) *
              std::pow(above, sample_count - j);
    }
    expectation += std::clamp(tail, 0.0, 1.0);
  }
  return expectation;
}

double sum_order_stats(const QueuePmf& pmf, int sample_count) {
  if (sample_count < 1) throw std::invalid_argument("sample count must be >= 1");
  return sample_count * pmf.mean();
}

double effective_arrival_rate(double lambda, double d, int m, const QueuePmf& pmf) {
  if (m < 0) throw std::invalid_argument("queue length must be non-negative");
  const double p_m = pmf[m];
  if (!(p_m > 0.0)) {
    throw DomainError("P(Y = " + std::to_string(m) + ") is zero");
  }
  return lambda * (std::pow(pmf.ccdf(m), d) - std::pow(pmf.ccdf(m + 1), d)) / p_m;
}

}  // namespace eclat
