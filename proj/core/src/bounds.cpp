#include "eclat/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include "eclat/numeric.hpp"

namespace eclat {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_split_load(int k, double lambda) {
  if (k < 2) throw std::invalid_argument("mean latency bounds require k >= 2");
  if (!(lambda < 1.0)) throw std::invalid_argument("lambda must be < 1");
  if (!(lambda > 1.0 / k)) {
    throw std::invalid_argument("lambda must exceed 1/k; use the zero-load results below it");
  }
}

// Term left over from the levels beyond the cutoff: (2 / k^4) lg(k/lambda) / (4 lg k).
double overflow_term(int k, double lambda) {
  const double kd = k;
  return 2.0 / std::pow(kd, 4) * lg(kd / lambda) / (4.0 * lg(kd));
}

void record_log_bases(BoundReport& report) {
  report.aux["log_base_maximal"] = std::numbers::e;
  report.aux["log_base_cutoff"] = 2.0;
}

BoundReport general_unchecked(int k, double lambda, const SubExpParams& params,
                              double m_k) {
  const double kd = k;
  const double cutoff = queue_cutoff(k, lambda);
  const double r = cutoff - 1.0;
  const double tau = params.tau();
  const double b = params.b;
  const double tail = overflow_term(k, lambda);

  BoundReport report;
  double phi = 0.0;
  if (2.0 * b * b * ln(kd) >= params.tau_sq * r) {
    report.branch = "Phi1";
    phi = 2.0 * b * ln(kd) + r / kd + tail;
  } else {
    report.branch = "Phi2";
    phi = tau * std::sqrt(2.0 * ln(kd)) * std::sqrt(std::max(r, 0.0)) + r / kd + tail;
  }
  report.value = phi + m_k;
  report.inputs = {{"k", kd}, {"lambda", lambda}, {"tau", tau}, {"b", b}, {"d", 2.0}};
  report.aux = {{"r", r},
                {"delta", 1.0 / (kd * kd * kd)},
                {"M_k", m_k},
                {"phi", phi},
                {"overflow", tail}};
  record_log_bases(report);
  return report;
}

BoundReport exp_unchecked(int k, double lambda) {
  const double kd = k;
  const double r = queue_cutoff(k, lambda);
  const double tail = overflow_term(k, lambda);
  BoundReport report;
  if (2.0 * ln(kd) >= r) {
    report.branch = "Phi3";
    report.value = 2.0 * ln(kd) / kd + r / kd + tail;
  } else {
    report.branch = "Phi4";
    report.value = std::sqrt(2.0 * ln(kd)) / kd * std::sqrt(r) + r / kd + tail;
  }
  report.inputs = {{"k", kd},
                   {"lambda", lambda},
                   {"tau", 1.0 / kd},
                   {"b", 1.0 / kd},
                   {"d", 2.0}};
  report.aux = {{"r", r}, {"delta", 1.0 / (kd * kd * kd)}, {"overflow", tail}};
  record_log_bases(report);
  return report;
}

}  // namespace

double harmonic(int k) {
  if (k < 0) throw std::invalid_argument("harmonic number of negative index");
  double h = 0.0;
  // Smallest terms first.
  for (int i = k; i >= 1; --i) h += 1.0 / i;
  return h;
}

double maximal_subexp_bound(int n, const SubExpParams& params, double mean) {
  if (n < 1) throw std::invalid_argument("maximal inequality needs N >= 1");
  const double log_n = ln(static_cast<double>(n));
  return std::max(params.tau() * std::sqrt(2.0 * log_n) + mean,
                  2.0 * params.b * log_n + mean);
}

MkBound m_k_bound(const ServiceDistribution& dist, int k) {
  if (k < 1) throw std::invalid_argument("k must be >= 1");
  const double abscissa = dist.mgf_abscissa();
  if (!(abscissa > 0.0)) {
    throw DomainError("M(k) bound needs a finite MGF for some s > 0; " + dist.describe() +
                      " has none");
  }
  const double mean = dist.mean();
  const double kd = k;
  if (std::abs(mean * kd - 1.0) > 1e-9) {
    throw std::invalid_argument("M(k) bound expects chunk mean 1/k");
  }
  auto objective = [&](double s) {
    double mgf = 0.0;
    try {
      mgf = dist.mgf(s);
    } catch (const DomainError&) {
      return kInf;
    }
    const double excess = mgf - 1.0;
    if (!(excess > 0.0) || !std::isfinite(excess)) return kInf;
    return std::log(kd * kd * excess / s) / s;
  };

  const double scale = 1.0 / mean;
  const double lo = 1e-4 * std::min(scale, abscissa);
  double hi = 0.0;
  if (std::isfinite(abscissa)) {
    hi = abscissa * (1.0 - 1e-6);
  } else {
    // Objective grows without bound; double until it turns upward.
    double s = scale;
    double f = objective(s);
    for (int i = 0; i < 60; ++i) {
      const double f2 = objective(2.0 * s);
      if (!(f2 < f)) break;
      s *= 2.0;
      f = f2;
    }
    hi = 2.0 * s;
  }
  const auto best = numeric::golden_section(objective, lo, hi, 1e-6);
  return {best.value, best.x};
}

double residual_moment(const ServiceDistribution& dist, int n) {
  if (n < 1) throw std::invalid_argument("residual moment order must be >= 1");
  return dist.raw_moment(n + 1) / ((n + 1) * dist.mean());
}

double queue_cutoff(int k, double lambda) {
  const double kd = k;
  const double inner = lg(kd / lambda);
  if (!(kd > 1.0) || !(inner > 0.0)) {
    throw std::invalid_argument("queue cutoff needs k > 1 and k/lambda > 1");
  }
  return lg(4.0 * lg(kd)) - lg(inner);
}

BoundReport mean_latency_bound_general(int k, double lambda, const SubExpParams& params,
                                       std::optional<double> m_k) {
  check_split_load(k, lambda);
  if (!(params.tau_sq >= 0.0) || !(params.b >= 0.0) || !std::isfinite(params.tau_sq) ||
      !std::isfinite(params.b)) {
    throw std::invalid_argument("sub-exponential parameters must be finite and >= 0");
  }
  return general_unchecked(k, lambda, params, m_k.value_or(0.0));
}

BoundReport mean_latency_bound_exp(int k, double lambda) {
  check_split_load(k, lambda);
  return exp_unchecked(k, lambda);
}

BoundReport mean_latency_bound(const DistFamily& family, int k, double lambda) {
  if (k < 2) throw std::invalid_argument("mean latency bounds require k >= 2");
  if (!(lambda > 0.0 && lambda < 1.0)) {
    throw std::invalid_argument("lambda must lie in (0, 1)");
  }
  const double lambda_eval = std::max(lambda, 1.0 / k);
  BoundReport report;
  if (family.kind == DistFamily::Kind::Exponential) {
    report = exp_unchecked(k, lambda_eval);
  } else {
    const ServiceDistribution chunk = chunk_dist(family, k);
    const SubExpParams params = subexp_params(chunk);
    const MkBound mk = m_k_bound(chunk, k);
    report = general_unchecked(k, lambda_eval, params, mk.value);
    report.aux["s_min"] = mk.s_min;
  }
  report.inputs["lambda"] = lambda;
  report.aux["lambda_eval"] = lambda_eval;
  return report;
}

double tail_cutoff(int k, double lambda, double epsilon) {
  const double kd = k;
  const double ratio = lg(epsilon / kd) / lg(lambda / kd);
  if (!(ratio > 1.0)) {
    throw std::invalid_argument("tail cutoff needs lg(eps/k) / lg(lambda/k) > 1");
  }
  return lg(ratio);
}

BoundReport tail_latency_bound(int k, double lambda, double epsilon, double t) {
  if (!(epsilon > 0.0 && epsilon < 1.0)) {
    throw std::invalid_argument("epsilon must lie in (0, 1)");
  }
  if (!(lambda > 0.0 && lambda < 1.0)) throw std::invalid_argument("lambda must lie in (0, 1)");
  if (k < 1) throw std::invalid_argument("k must be >= 1");
  if (!(t >= 0.0)) throw std::invalid_argument("t must be non-negative");
  const double kd = k;
  const double r = tail_cutoff(k, lambda, epsilon);
  const double start = r / kd;

  BoundReport report;
  double bound = 1.0;
  if (t < start) {
    report.branch = "below-cutoff";
  } else if (t <= 2.0 * start) {
    report.branch = "gaussian";
    const double x = t - start;
    bound = kd * std::exp(-(kd * kd) / (2.0 * r) * x * x) + epsilon;
  } else {
    report.branch = "exponential";
    bound = kd * std::exp(-(kd / 2.0) * (t - start)) + epsilon;
  }
  report.value = std::min(1.0, bound);
  report.inputs = {{"k", kd}, {"lambda", lambda}, {"epsilon", epsilon}, {"t", t},
                   {"tau", 1.0 / kd}, {"b", 1.0 / kd}};
  report.aux = {{"r", r}, {"unclamped", bound}};
  return report;
}

Estimate zero_load_latency(const DistFamily& family, int k, std::uint64_t seed,
                           std::size_t samples) {
  if (k < 1) throw std::invalid_argument("k must be >= 1");
  const double kd = k;
  switch (family.kind) {
    case DistFamily::Kind::Exponential:
      return {harmonic(k) / kd, 0.0};
    case DistFamily::Kind::ShiftedExponential: {
      const double c = family.shift;
      const double spread = family.unit_mean ? (1.0 - c) : 1.0;
      return {c / kd + harmonic(k) * spread / kd, 0.0};
    }
    default:
      break;
  }
  const ServiceDistribution chunk = chunk_dist(family, k);
  if (k == 1) return {chunk.mean(), 0.0};
  if (samples < 2) throw std::invalid_argument("need at least 2 Monte Carlo samples");
  Rng rng(seed);
  double sum = 0.0;
  double sum_sq = 0.0;
  for (std::size_t i = 0; i < samples; ++i) {
    double m = 0.0;
    for (int j = 0; j < k; ++j) m = std::max(m, chunk.sample(rng));
    sum += m;
    sum_sq += m * m;
  }
  const double n = static_cast<double>(samples);
  const double mean = sum / n;
  const double var = std::max(0.0, (sum_sq - n * mean * mean) / (n - 1.0));
  return {mean, std::sqrt(var / n)};
}

Estimate zero_load_gain(const DistFamily& family, int k, std::uint64_t seed,
                        std::size_t samples) {
  if (k == 1) return {0.0, 0.0};
  const double whole = chunk_dist(family, 1).mean();
  const Estimate coded = zero_load_latency(family, k, seed, samples);
  return {whole - coded.value, coded.std_err};
}

double redundant_request_latency(int k, int delta) {
  if (k < 1) throw std::invalid_argument("k must be >= 1");
  if (delta < 0) throw std::invalid_argument("redundancy delta must be >= 0");
  // H(k + delta) - H(delta) = sum_{i = delta+1}^{k+delta} 1/i
  double sum = 0.0;
  for (int i = k + delta; i > delta; --i) sum += 1.0 / i;
  return sum / k;
}

BoundReport bound_I(double lambda, double d, int k, BoundIVariant variant,
                    std::optional<int> sample_count) {
  return bound_I(batch_sampling_pmf(lambda, d), k, variant, sample_count);
}

BoundReport bound_I(const BatchSamplingDist& dist, int k, BoundIVariant variant,
                    std::optional<int> sample_count) {
  if (k < 1) throw std::invalid_argument("k must be >= 1");
  const int n = sample_count.value_or(k);
  if (n < k) throw std::invalid_argument("sample count must be >= k");
  const double h = harmonic(k);
  BoundReport report;
  report.inputs = {{"k", static_cast<double>(k)},
                   {"lambda", dist.lambda},
                   {"d", dist.d},
                   {"N", static_cast<double>(n)}};
  report.aux = {{"q_max", static_cast<double>(dist.q_max)}, {"E_Q", dist.pmf.mean()}};
  if (variant == BoundIVariant::Tight) {
    double weighted = 0.0;
    for (int l = 1; l <= k; ++l) {
      weighted += order_stat_expectation(dist.pmf, n, l) / static_cast<double>(k - l + 1);
    }
    report.branch = "BoundI-tight";
    report.value = h + weighted;
    report.aux["weighted_order_stats"] = weighted;
  } else {
    const double total = sum_order_stats(dist.pmf, n);
    report.branch = "BoundI-loose";
    report.value = h + total;
    report.aux["sum_order_stats"] = total;
  }
  return report;
}

InterpolatedMoments interpolated_moments(const QueuePmf& pmf) {
  double mass = 0.0;
  double first = 0.0;
  double second = 0.0;
  for (int i = 0; i < pmf.q_max(); ++i) {
    // Linear piece from (i, a) to (i + 1, b); x = i + u for u in [0, 1].
    const double a = pmf[i];
    const double b = pmf[i + 1];
    const double id = i;
    const double m0 = (a + b) / 2.0;               // integral of f
    const double m1 = a / 2.0 + (b - a) / 3.0;     // integral of u f
    const double m2 = a / 3.0 + (b - a) / 4.0;     // integral of u^2 f
    mass += m0;
    first += id * m0 + m1;
    second += id * id * m0 + 2.0 * id * m1 + m2;
  }
  if (!(mass > 0.0)) return {0.0, 0.0, 0.0};
  const double mean = first / mass;
  const double variance = std::max(0.0, second / mass - mean * mean);
  return {mass, mean, variance};
}

InnerMinimum order_stat_mean_variance_min(double mu, double variance, double z_lo,
                                          double z_hi) {
  if (!(z_lo <= z_hi)) throw std::invalid_argument("empty z interval");
  auto g = [&](double z) {
    const double gap = mu - z;
    return z + 0.5 * (gap + std::sqrt(gap * gap + variance));
  };
  if (z_lo == z_hi) return {g(z_lo), z_lo};
  const auto best = numeric::golden_section(g, z_lo, z_hi, 1e-6, 1.0);
  // The objective is nondecreasing in z, so compare against the left end too.
  if (g(z_lo) <= best.value) return {g(z_lo), z_lo};
  return {best.value, best.x};
}

BoundReport bound_II(double lambda, double d, int k) {
  const BatchSamplingDist dist = batch_sampling_pmf(lambda, d);
  BoundReport report = bound_II(dist.pmf, k);
  report.inputs["lambda"] = lambda;
  report.inputs["d"] = d;
  return report;
}

BoundReport bound_II(const QueuePmf& pmf, int k) {
  if (k < 1) throw std::invalid_argument("k must be >= 1");
  const double h = harmonic(k);
  BoundReport report;
  report.branch = "BoundII";
  report.inputs = {{"k", static_cast<double>(k)}};
  const InterpolatedMoments moments = interpolated_moments(pmf);
  report.aux = {{"q_max", static_cast<double>(pmf.q_max())},
                {"mu2", moments.mean},
                {"sigma2", moments.variance},
                {"mass", moments.mass}};
  if (pmf.q_max() == 0) {
    report.value = h;
    report.aux["z_min"] = 0.0;
    return report;
  }
  const double q = pmf.q_max();
  const InnerMinimum inner =
      order_stat_mean_variance_min(moments.mean, moments.variance, -q, q);
  report.value = h + k * inner.value;
  report.aux["z_min"] = inner.z;
  return report;
}

GainBound theoretical_gain(int d, int k, double lambda, const DistFamily& family,
                           std::uint64_t seed, std::size_t samples) {
  if (samples < 2) throw std::invalid_argument("need at least 2 Monte Carlo samples");
  const DoubleExpTailModel model{lambda, d, lambda, 1.0};
  model.validate();
  const ServiceDistribution whole = chunk_dist(family, 1);
  BoundReport bound = mean_latency_bound(family, k, lambda);

  Rng rng(seed);
  double sum = 0.0;
  double sum_sq = 0.0;
  for (std::size_t i = 0; i < samples; ++i) {
    const int q = sample_queue_length(model, rng);
    double work = 0.0;
    for (int j = 0; j < q; ++j) work += whole.sample(rng);
    sum += work;
    sum_sq += work * work;
  }
  const double n = static_cast<double>(samples);
  const double baseline = sum / n;
  const double var = std::max(0.0, (sum_sq - n * baseline * baseline) / (n - 1.0));
  const double se = std::sqrt(var / n);
  return {baseline - bound.value, se, baseline, std::move(bound)};
}

std::string bound_csv_header() {
  return "branch,value,k,lambda,d,tau,b,epsilon,t,r,delta,M_k,mu2,sigma2,s_min,z_min";
}

std::string bound_csv_row(const BoundReport& report) {
  static const std::vector<std::string> keys = {"k",     "lambda", "d",   "tau",
                                                "b",     "epsilon", "t",  "r",
                                                "delta", "M_k",    "mu2", "sigma2",
                                                "s_min", "z_min"};
  char buf[64];
  std::string row = report.branch;
  std::snprintf(buf, sizeof buf, ",%.9g", report.value);
  row += buf;
  for (const auto& key : keys) {
    row += ',';
    const double* v = nullptr;
    if (auto it = report.inputs.find(key); it != report.inputs.end()) {
      v = &it->second;
    } else if (auto jt = report.aux.find(key); jt != report.aux.end()) {
      v = &jt->second;
    }
    if (v) {
      std::snprintf(buf, sizeof buf, "%.9g", *v);
      row += buf;
    }
  }
  return row;
}

}  // namespace eclat
