#include "eclat/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>

#include "eclat/bounds.hpp"
#include "eclat/harness.hpp"
#include "eclat/simulator.hpp"

namespace eclat::cli {
namespace {

namespace fs = std::filesystem;
using harness::ConfigError;
using harness::Setting;

std::string fmt(double x) { return harness::format_number(x); }

struct DistFlags {
  std::string family = "exponential";
  std::optional<double> shape;
  std::optional<double> shift;

  void add(CLI::App& app) {
    app.add_option("--dist", family, "Service family: exponential, shifted-exponential, weibull, pareto");
    app.add_option("--shape", shape, "Weibull shape or Pareto tail index");
    app.add_option("--shift", shift, "Shift as a fraction of the whole-file service time");
  }

  DistFamily resolve() const {
    DistFamily f;
    try {
      f.kind = parse_family(family);
    } catch (const std::invalid_argument& e) {
      throw ConfigError("dist", e.what());
    }
    using Kind = DistFamily::Kind;
    if (f.kind == Kind::Weibull) f.shape = shape.value_or(1.5);
    if (f.kind == Kind::Pareto) {
      if (!shape) throw ConfigError("shape", "required for pareto");
      f.shape = *shape;
    }
    if (f.kind == Kind::ShiftedExponential) {
      if (!shift) throw ConfigError("shift", "required for shifted-exponential");
      f.shift = *shift;
    }
    return f;
  }
};

fs::path default_output(const std::string& explicit_path, const std::string& file_name) {
  if (!explicit_path.empty()) return explicit_path;
  if (const char* dir = std::getenv("ECLAT_OUT_DIR"); dir && *dir) return fs::path(dir) / file_name;
  return {};
}

void print_report(std::ostream& out, const BoundReport& r) {
  out << "branch: " << r.branch << '\n' << "value: " << fmt(r.value) << '\n';
  for (const auto& [k, v] : r.inputs) out << "input." << k << ": " << fmt(v) << '\n';
  for (const auto& [k, v] : r.aux) out << "aux." << k << ": " << fmt(v) << '\n';
}

void print_stats(std::ostream& out, const ClusterConfig& c, const LatencyStats& s) {
  out << "policy: " << describe(c.policy) << '\n'
      << "task_service: " << chunk_dist(c.service, chunk_divisor(c.policy)).describe() << '\n'
      << "servers: " << c.servers << '\n'
      << "lambda: " << fmt(c.lambda) << '\n'
      << "jobs: " << s.job_count << '\n'
      << "mean: " << fmt(s.mean) << '\n'
      << "std_err: " << fmt(s.std_err) << '\n'
      << "min: " << fmt(s.min) << '\n'
      << "max: " << fmt(s.max) << '\n';
  for (const auto& [p, q] : s.quantiles) out << "quantile." << fmt(p) << ": " << fmt(q) << '\n';
  for (const auto& [r, p] : s.queue_ccdf) {
    if (r > 10) break;
    out << "queue_ccdf." << r << ": " << fmt(p) << '\n';
  }
  out << "arrivals: " << s.arrivals << '\n'
      << "completions: " << s.completions << '\n'
      << "in_flight: " << s.in_flight << '\n'
      << "invariant_violations: " << s.invariant_violations << '\n'
      << "simulated_time: " << fmt(s.simulated_time) << '\n';
}

struct SimulateFlags {
  std::string policy = "least-k";
  int k = 2;
  int d = 2;
  int n = 0;
  int delta = 1;
  double lambda = 0.5;
  DistFlags dist;
  std::uint64_t seed = 1;
  int servers = 0;
  std::int64_t warmup = -1;
  std::int64_t jobs = 100000;
  bool check = false;
};

int do_simulate(const SimulateFlags& f, std::ostream& out) {
  if (!(f.lambda > 0.0 && f.lambda < 1.0)) throw ConfigError("lambda", "must lie in (0, 1)");
  const int n = f.n > 0 ? f.n : f.d * f.k;
  Policy policy;
  if (f.policy == "naive") {
    policy = NaiveReplication{f.d};
  } else if (f.policy == "ksplit") {
    policy = KSplit{f.k, f.d};
  } else if (f.policy == "least-k") {
    policy = LeastKOfN{n, f.k};
  } else if (f.policy == "batch") {
    policy = BatchSampling{n, f.k};
  } else if (f.policy == "redundant") {
    policy = RedundantRequest{f.k, f.delta};
  } else {
    throw ConfigError("policy", "unknown policy '" + f.policy + "'");
  }
  ClusterConfig c;
  c.policy = policy;
  c.lambda = f.lambda;
  c.service = f.dist.resolve();
  c.seed = f.seed;
  c.servers = f.servers > 0 ? f.servers : default_server_count(f.k);
  c.warmup_jobs = f.warmup >= 0 ? f.warmup : 20LL * c.servers;
  c.measured_jobs = f.jobs;
  c.check_invariants = f.check;
  try {
    c.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError("policy", e.what());
  }
  print_stats(out, c, run(c));
  return kOk;
}

struct BoundFlags {
  std::string kind = "mean";
  int k = 8;
  double lambda = 0.9;
  double d = 2.0;
  double epsilon = 0.01;
  double t = 0.0;
  DistFlags dist;
  std::uint64_t seed = 1;
};

int do_bound(const BoundFlags& f, std::ostream& out) {
  try {
    const DistFamily family = f.dist.resolve();
    if (f.kind == "mean") {
      print_report(out, mean_latency_bound(family, f.k, f.lambda));
    } else if (f.kind == "tail") {
      print_report(out, tail_latency_bound(f.k, f.lambda, f.epsilon, f.t));
    } else if (f.kind == "bound-i-tight") {
      print_report(out, bound_I(f.lambda, f.d, f.k, BoundIVariant::Tight));
    } else if (f.kind == "bound-i-loose") {
      print_report(out, bound_I(f.lambda, f.d, f.k, BoundIVariant::Loose));
    } else if (f.kind == "bound-ii") {
      print_report(out, bound_II(f.lambda, f.d, f.k));
    } else if (f.kind == "m-k") {
      const MkBound m = m_k_bound(chunk_dist(family, f.k), f.k);
      out << "branch: M_k\nvalue: " << fmt(m.value) << "\naux.s_min: " << fmt(m.s_min) << '\n';
    } else if (f.kind == "gain") {
      const GainBound g =
          theoretical_gain(static_cast<int>(std::lround(f.d)), f.k, f.lambda, family, f.seed);
      out << "value: " << fmt(g.value) << "\nstd_err: " << fmt(g.std_err)
          << "\nbaseline: " << fmt(g.baseline) << '\n';
      print_report(out, g.bound);
    } else if (f.kind == "zero-load") {
      const Estimate e = zero_load_gain(family, f.k, f.seed);
      out << "branch: zero-load\nvalue: " << fmt(e.value) << "\nstd_err: " << fmt(e.std_err)
          << '\n';
    } else {
      throw ConfigError("kind", "unknown bound kind '" + f.kind + "'");
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const std::invalid_argument& e) {
    throw ConfigError(f.kind, e.what());
  } catch (const std::domain_error& e) {
    throw ConfigError(f.kind, e.what());
  }
  return kOk;
}

// Flags that mirror config keys; unset flags leave the config untouched.
struct SweepFlags {
  std::string config;
  std::string preset;
  std::map<std::string, std::string> overrides;
  unsigned threads = 0;

  void add(CLI::App& app) {
    app.add_option("--config", config, "key=value config file");
    app.add_option("--preset", preset, "Named preset: fig3a, fig3b, fig4, fig5");
    app.add_option("--threads", threads, "Worker threads (0: hardware concurrency)");
    const std::pair<const char*, const char*> mirrored[] = {
        {"--experiment", "experiment"}, {"--lambda", "lambda.grid"}, {"--n", "code.n"},
        {"--k", "code.k"},              {"--d", "code.d"},           {"--dist", "dist.family"},
        {"--shape", "dist.shape"},      {"--shift", "dist.shift"},   {"--L", "sim.L"},
        {"--seed", "sim.seed"},         {"--warmup", "sim.warmup_jobs"},
        {"--jobs", "sim.measured_jobs"}, {"--out", "out.path"}};
    for (const auto& [flag, key] : mirrored) {
      const std::string k = key;
      app.add_option_function<std::string>(
          flag, [this, k](const std::string& v) { overrides[k] = v; }, "Sets " + k);
    }
  }

  harness::SweepSpec resolve() const {
    if (!config.empty() && !preset.empty()) {
      throw ConfigError("preset", "--preset and --config are exclusive");
    }
    std::vector<Setting> settings;
    if (!config.empty()) {
      std::ifstream in(config, std::ios::binary);
      if (!in) throw ConfigError("config", "cannot open " + config);
      settings = harness::parse_settings(std::string(std::istreambuf_iterator<char>(in), {}));
    } else if (!preset.empty()) {
      try {
        settings = harness::parse_settings(harness::preset_config(preset));
      } catch (const std::invalid_argument& e) {
        throw ConfigError("preset", e.what());
      }
    }
    for (const auto& [key, value] : overrides) {
      const auto it = std::find_if(settings.begin(), settings.end(),
                                   [&](const Setting& s) { return s.key == key; });
      if (it != settings.end()) {
        it->value = value;
        it->line = 0;
      } else {
        settings.push_back({key, value, 0});
      }
    }
    return harness::build_spec(settings);
  }
};

int do_sweep(const SweepFlags& f, bool compare, std::ostream& out, std::ostream& err) {
  const harness::SweepSpec spec = f.resolve();
  const auto rows = harness::run_sweep(spec, {f.threads});
  const std::string name =
      (f.preset.empty() ? std::string(harness::to_string(spec.experiment)) : f.preset) + ".csv";
  const fs::path path = default_output(spec.out_path, name);
  if (path.empty()) {
    out << harness::render_csv(rows);
  } else {
    harness::write_csv(rows, path);
    out << "wrote " << rows.size() << " rows to " << path.string() << '\n';
  }
  if (!compare) return kOk;
  std::size_t failed = 0;
  for (const auto& r : rows) {
    if (r.pass) continue;
    ++failed;
    err << "FAIL " << harness::csv_line(r) << '\n';
  }
  err << rows.size() - failed << "/" << rows.size() << " comparisons passed\n";
  return failed == 0 ? kOk : kComparisonFailed;
}

int do_figures(const SweepFlags& f, std::vector<std::string> presets, std::string dir,
               std::ostream& out) {
  if (presets.empty()) presets = harness::preset_names();
  if (dir.empty()) {
    const char* env = std::getenv("ECLAT_OUT_DIR");
    dir = env && *env ? env : "figures";
  }
  fs::create_directories(dir);
  for (const auto& name : presets) {
    SweepFlags one = f;
    one.preset = name;
    const auto rows = harness::run_sweep(one.resolve(), {f.threads});
    const fs::path csv = fs::path(dir) / (name + ".csv");
    const fs::path dat = fs::path(dir) / (name + ".dat");
    harness::write_csv(rows, csv);
    std::ofstream plot(dat, std::ios::binary | std::ios::trunc);
    if (!plot) throw std::runtime_error("cannot write " + dat.string());
    plot << harness::render_plot_data(rows);
    out << name << ": " << csv.string() << ' ' << dat.string() << '\n';
  }
  return kOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Simulator and latency bounds for erasure-coded storage clusters", "eclat"};
  app.require_subcommand(1);

  SimulateFlags sim;
  auto* simulate = app.add_subcommand("simulate", "Run one simulation and print latency statistics");
  simulate->add_option("--policy", sim.policy, "naive, ksplit, least-k, batch, redundant");
  simulate->add_option("--k", sim.k, "Chunks per file");
  simulate->add_option("--d", sim.d, "Replication factor / choices");
  simulate->add_option("--n", sim.n, "Probed servers (default d k)");
  simulate->add_option("--delta", sim.delta, "Extra servers for redundant requests");
  simulate->add_option("--lambda", sim.lambda, "Per-server arrival intensity");
  sim.dist.add(*simulate);
  simulate->add_option("--seed", sim.seed);
  simulate->add_option("--L", sim.servers, "Server count (default max(2000, 200 k))");
  simulate->add_option("--warmup", sim.warmup, "Discarded jobs (default 20 L)");
  simulate->add_option("--jobs", sim.jobs, "Measured jobs");
  simulate->add_flag("--check-invariants", sim.check);

  BoundFlags bnd;
  auto* bound = app.add_subcommand("bound", "Evaluate one bound and print the report");
  bound->add_option("--kind", bnd.kind,
                    "mean, tail, bound-i-tight, bound-i-loose, bound-ii, m-k, gain, zero-load");
  bound->add_option("--k", bnd.k);
  bound->add_option("--lambda", bnd.lambda);
  bound->add_option("--d", bnd.d);
  bound->add_option("--epsilon", bnd.epsilon);
  bound->add_option("--t", bnd.t);
  bnd.dist.add(*bound);
  bound->add_option("--seed", bnd.seed);

  SweepFlags sweep_flags;
  auto* sweep = app.add_subcommand("sweep", "Run a sweep and write comparison CSV");
  sweep_flags.add(*sweep);

  SweepFlags compare_flags;
  auto* compare = app.add_subcommand("compare", "Run a sweep; exit 1 if any comparison fails");
  compare_flags.add(*compare);

  SweepFlags figure_flags;
  std::vector<std::string> figure_presets;
  std::string figure_dir;
  auto* figures = app.add_subcommand("figures", "Write CSV and plot data for the presets");
  figures->add_option("--preset", figure_presets, "Presets to emit (default all)");
  figures->add_option("--out", figure_dir, "Output directory (default $ECLAT_OUT_DIR or ./figures)");
  figures->add_option("--threads", figure_flags.threads);
  for (const auto& [flag, key] : {std::pair{"--seed", "sim.seed"}, std::pair{"--jobs", "sim.measured_jobs"},
                                  std::pair{"--L", "sim.L"}, std::pair{"--warmup", "sim.warmup_jobs"}}) {
    const std::string k = key;
    figures->add_option_function<std::string>(
        flag, [&figure_flags, k](const std::string& v) { figure_flags.overrides[k] = v; });
  }

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  if (!reversed.empty()) reversed.pop_back();  // program name
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kConfigError;
  }

  try {
    if (simulate->parsed()) return do_simulate(sim, out);
    if (bound->parsed()) return do_bound(bnd, out);
    if (sweep->parsed()) return do_sweep(sweep_flags, false, out, err);
    if (compare->parsed()) return do_sweep(compare_flags, true, out, err);
    if (figures->parsed()) return do_figures(figure_flags, figure_presets, figure_dir, out);
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return kConfigError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kRuntimeError;
  }
  return kOk;
}

}  // namespace eclat::cli
