#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "eclat/rng.hpp"
#include "eclat/simulator.hpp"

namespace eclat {

ResidualResult empirical_residual(const ResidualConfig& config) {
  if (!(config.arrival_rate > 0.0)) throw std::invalid_argument("arrival rate must be positive");
  if (!(config.arrival_rate * config.service.mean() < 1.0)) {
    throw std::invalid_argument("unstable queue: arrival_rate * E[X] must be < 1");
  }
  if (config.measured_jobs < 2 || config.warmup_jobs < 0) {
    throw std::invalid_argument("residual run needs measured_jobs >= 2 and warmup_jobs >= 0");
  }
  Rng arrivals(derive_seed(config.seed, 1));
  Rng service(derive_seed(config.seed, 3));

  constexpr std::int64_t kBatches = 32;
  const std::int64_t total = config.warmup_jobs + config.measured_jobs;
  const std::int64_t batch_size = std::max<std::int64_t>(1, config.measured_jobs / kBatches);

  // Observation window runs from the first measured arrival to the last one.
  double t = 0.0;
  double free_at = 0.0;
  double window_start = 0.0;
  double integral = 0.0;
  double busy = 0.0;
  std::vector<double> batch_integral(kBatches, 0.0);
  std::vector<double> batch_busy(kBatches, 0.0);

  struct Interval {
    double start;
    double length;
  };
  std::vector<Interval> pending;

  for (std::int64_t i = 0; i < total; ++i) {
    t += arrivals.exponential(config.arrival_rate);
    const double x = config.service.sample(service);
    if (i == config.warmup_jobs) window_start = t;
    const double start = std::max(t, free_at);
    free_at = start + x;
    if (i >= config.warmup_jobs) pending.push_back({start, x});
  }
  const double window_end = t;

  for (std::size_t j = 0; j < pending.size(); ++j) {
    const double end = pending[j].start + pending[j].length;
    const double a = std::max(pending[j].start, window_start);
    const double b = std::min(end, window_end);
    if (!(b > a)) continue;
    // integral of (end - s) ds over [a, b]
    const double piece = 0.5 * ((end - a) * (end - a) - (end - b) * (end - b));
    integral += piece;
    busy += b - a;
    const auto batch =
        std::min<std::int64_t>(kBatches - 1, static_cast<std::int64_t>(j) / batch_size);
    batch_integral[static_cast<std::size_t>(batch)] += piece;
    batch_busy[static_cast<std::size_t>(batch)] += b - a;
  }
  if (!(busy > 0.0)) throw std::runtime_error("server never busy inside the window");

  ResidualResult result{integral / busy, 0.0, busy / (window_end - window_start)};
  std::vector<double> ratios;
  for (std::int64_t b = 0; b < kBatches; ++b) {
    if (batch_busy[static_cast<std::size_t>(b)] > 0.0) {
      ratios.push_back(batch_integral[static_cast<std::size_t>(b)] /
                       batch_busy[static_cast<std::size_t>(b)]);
    }
  }
  if (ratios.size() >= 2) {
    double mean = 0.0;
    for (double r : ratios) mean += r;
    mean /= static_cast<double>(ratios.size());
    double ss = 0.0;
    for (double r : ratios) ss += (r - mean) * (r - mean);
    result.std_err = std::sqrt(ss / static_cast<double>(ratios.size() - 1) /
                               static_cast<double>(ratios.size()));
  }
  return result;
}

}  // namespace eclat
