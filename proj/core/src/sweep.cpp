#include <algorithm>
#include <atomic>
#include <bit>
#include <cmath>
#include <cstdio>
#include <exception>
#include <map>
#include <set>
#include <tuple>
#include <thread>

#include "eclat/bounds.hpp"
#include "eclat/harness.hpp"
#include "eclat/simulator.hpp"

namespace eclat::harness {
namespace {

constexpr double kTailEpsilon = 0.01;
constexpr int kTailGridPoints = 11;

struct WorkItem {
  CodePoint code;
  double lambda;
};

std::uint64_t point_seed(std::uint64_t base, const WorkItem& w) {
  std::uint64_t s = derive_seed(base, static_cast<std::uint64_t>(w.code.n));
  s = derive_seed(s, static_cast<std::uint64_t>(w.code.k));
  return derive_seed(s, std::bit_cast<std::uint64_t>(w.lambda));
}

ComparisonRow base_row(const SweepSpec& spec, const WorkItem& w) {
  ComparisonRow row;
  row.experiment = std::string(to_string(spec.experiment));
  row.family = std::string(family_name(spec.family.kind));
  row.shape = spec.family.shape;
  row.shift = spec.family.shift;
  row.n = w.code.n;
  row.k = w.code.k;
  row.d = w.code.d;
  row.lambda = w.lambda;
  row.t = NAN;
  return row;
}

ClusterConfig cluster(const SweepSpec& spec, const WorkItem& w, const Policy& policy,
                      std::uint64_t seed) {
  ClusterConfig c;
  c.servers = spec.servers_for(w.code.k);
  c.lambda = w.lambda;
  c.policy = policy;
  c.service = spec.family;
  c.seed = seed;
  c.warmup_jobs = spec.warmup_for(c.servers);
  c.measured_jobs = spec.measured_jobs;
  return c;
}

std::vector<ComparisonRow> evaluate_point(const SweepSpec& spec, const WorkItem& w) {
  const std::uint64_t seed = point_seed(spec.seed, w);
  const int k = w.code.k;
  const int d_int = static_cast<int>(std::lround(w.code.d));
  std::vector<ComparisonRow> rows;
  auto push = [&](ComparisonRow row) {
    row.pass = evaluate(row);
    rows.push_back(std::move(row));
  };

  switch (spec.experiment) {
    case Experiment::GainSweep: {
      const int l = spec.servers_for(k);
      const GainSizes sizes{l, spec.warmup_for(l), spec.measured_jobs};
      const GainResult sim = gain_experiment(k, d_int, w.lambda, spec.family, seed, sizes);
      const GainBound theory =
          theoretical_gain(d_int, k, w.lambda, spec.family, derive_seed(seed, 99));
      ComparisonRow row = base_row(spec, w);
      row.sim_value = sim.gain;
      row.sim_std_err = sim.std_err;
      row.theory_value = theory.value;
      row.branch = theory.bound.branch;
      row.criterion = Criterion::Ge;
      push(std::move(row));
      break;
    }
    case Experiment::BoundCheck: {
      const LatencyStats stats = run(cluster(spec, w, KSplit{k, d_int}, seed));
      const BoundReport bound = mean_latency_bound(spec.family, k, w.lambda);
      ComparisonRow row = base_row(spec, w);
      row.sim_value = stats.mean;
      row.sim_std_err = stats.std_err;
      row.theory_value = bound.value;
      row.branch = bound.branch;
      row.criterion = Criterion::Le;
      push(std::move(row));
      break;
    }
    case Experiment::TailCheck: {
      const LatencyStats stats = run(cluster(spec, w, KSplit{k, d_int}, seed));
      const double r = tail_cutoff(k, w.lambda, kTailEpsilon);
      const double n = static_cast<double>(stats.samples.size());
      for (int j = 0; j < kTailGridPoints; ++j) {
        // Even grid over [r/k, 6r/k].
        const double t = r / k * (1.0 + 5.0 * j / (kTailGridPoints - 1));
        const BoundReport bound = tail_latency_bound(k, w.lambda, kTailEpsilon, t);
        const double p = stats.ccdf_at(t);
        ComparisonRow row = base_row(spec, w);
        row.t = t;
        row.sim_value = p;
        row.sim_std_err = std::sqrt(p * (1.0 - p) / n);
        row.theory_value = bound.value;
        row.branch = bound.branch;
        row.criterion = Criterion::Le;
        push(std::move(row));
      }
      break;
    }
    case Experiment::BatchSampling: {
      const LatencyStats stats = run(cluster(spec, w, BatchSampling{w.code.n, k}, seed));
      const BatchSamplingDist dist = batch_sampling_pmf(w.lambda, w.code.d);
      for (const BoundReport& bound : {bound_I(dist, k, BoundIVariant::Tight),
                                       bound_I(dist, k, BoundIVariant::Loose),
                                       bound_II(dist.pmf, k)}) {
        ComparisonRow row = base_row(spec, w);
        row.sim_value = stats.mean;
        row.sim_std_err = stats.std_err;
        row.theory_value = bound.value;
        row.branch = bound.branch;
        row.criterion = Criterion::Le;
        push(std::move(row));
      }
      break;
    }
    case Experiment::ResidualCheck: {
      const ServiceDistribution service = chunk_dist(spec.family, k);
      ResidualConfig config{w.lambda / service.mean(), service, seed,
                            spec.warmup_for(spec.servers_for(k)), spec.measured_jobs};
      const ResidualResult sim = empirical_residual(config);
      ComparisonRow row = base_row(spec, w);
      row.sim_value = sim.mean_residual;
      row.sim_std_err = sim.std_err;
      row.theory_value = residual_moment(service, 1);
      row.branch = "residual";
      row.criterion = Criterion::Rel2pct;
      push(std::move(row));
      break;
    }
  }
  return rows;
}

}  // namespace

std::vector<ComparisonRow> run_sweep(const SweepSpec& spec, const RunOptions& options) {
  validate(spec);
  std::vector<WorkItem> items;
  for (const auto& code : spec.codes) {
    for (const double lambda : spec.lambdas) items.push_back({code, lambda});
  }
  std::vector<std::vector<ComparisonRow>> results(items.size());
  std::vector<std::exception_ptr> errors(items.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < items.size(); i = next++) {
      try {
        results[i] = evaluate_point(spec, items[i]);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  unsigned threads = options.threads ? options.threads : std::thread::hardware_concurrency();
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(items.size())));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned i = 0; i < threads; ++i) pool.emplace_back(worker);
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  std::vector<ComparisonRow> rows;
  for (auto& r : results) {
    for (auto& row : r) rows.push_back(std::move(row));
  }
  std::stable_sort(rows.begin(), rows.end(), coordinate_less);
  return rows;
}

bool all_pass(const std::vector<ComparisonRow>& rows) {
  return std::all_of(rows.begin(), rows.end(), [](const ComparisonRow& r) { return r.pass; });
}

const std::vector<std::string>& preset_names() {
  static const std::vector<std::string> names = {"fig3a", "fig3b", "fig4", "fig5"};
  return names;
}

std::string preset_config(std::string_view name) {
  const std::string gain =
      "experiment = gain-sweep\n"
      "lambda.grid = 0.1:0.9:0.1\n"
      "code.n = 4,6,8,9\n"
      "code.k = 2,3,4,3\n";
  if (name == "fig3a") return gain + "dist.family = exponential\n";
  if (name == "fig3b") return gain + "dist.family = shifted-exponential\ndist.shift = 0.1\n";
  if (name == "fig4") return gain + "dist.family = weibull\ndist.shape = 1.5\n";
  if (name == "fig5") {
    return "experiment = batch-sampling\n"
           "lambda.grid = 0.8,0.85,0.9\n"
           "code.n = 14\n"
           "code.k = 10\n"
           "dist.family = exponential\n";
  }
  throw std::invalid_argument("unknown preset '" + std::string(name) + "'");
}

SweepSpec preset(std::string_view name) { return parse_config(preset_config(name)); }

std::string render_plot_data(const std::vector<ComparisonRow>& rows) {
  using Column = std::tuple<int, int, std::string>;
  std::set<Column> columns;
  std::map<double, std::map<Column, const ComparisonRow*>> table;
  for (const auto& r : rows) {
    // Bound branches are separate curves only for batch sampling; elsewhere
    // the branch can change along the lambda axis.
    const Column c{r.n, r.k, r.experiment == "batch-sampling" ? r.branch : std::string()};
    columns.insert(c);
    const double x = std::isnan(r.t) ? r.lambda : r.t;
    table[x][c] = &r;
  }
  const bool tail = !rows.empty() && !std::isnan(rows.front().t);
  std::string out = tail ? "# t" : "# lambda";
  for (const auto& [n, k, branch] : columns) {
    const std::string tag = "(" + std::to_string(n) + "," + std::to_string(k) + ")" + branch;
    out += " sim" + tag + " se" + tag + " theory" + tag;
  }
  out += '\n';
  for (const auto& [x, cells] : table) {
    out += format_number(x);
    for (const auto& c : columns) {
      const auto it = cells.find(c);
      if (it == cells.end()) {
        out += " NaN NaN NaN";
        continue;
      }
      out += ' ' + format_number(it->second->sim_value) + ' ' +
             format_number(it->second->sim_std_err) + ' ' +
             format_number(it->second->theory_value);
    }
    out += '\n';
  }
  return out;
}

}  // namespace eclat::harness
