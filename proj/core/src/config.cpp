#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "eclat/bounds.hpp"
#include "eclat/harness.hpp"
#include "eclat/simulator.hpp"

namespace eclat::harness {
namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    parts.push_back(trim(s.substr(start, pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return parts;
}

template <class T>
std::optional<T> parse_number(std::string_view text) {
  T value{};
  const char* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc{} || ptr != end) return std::nullopt;
  return value;
}

template <class T>
T number_or_throw(const Setting& s, std::string_view text) {
  const auto v = parse_number<T>(text);
  if (!v) {
    throw ConfigError(s.key, "not a number: '" + std::string(text) + "'", s.line);
  }
  if constexpr (std::is_floating_point_v<T>) {
    if (!std::isfinite(*v)) throw ConfigError(s.key, "value must be finite", s.line);
  }
  return *v;
}

template <class T>
std::vector<T> number_list(const Setting& s) {
  std::vector<T> out;
  for (const auto part : split(s.value, ',')) out.push_back(number_or_throw<T>(s, part));
  return out;
}

// Rounds grid points so that "0.1:0.9:0.1" and "0.1,0.2,..." agree bitwise.
double snap(double x) { return std::round(x * 1e12) / 1e12; }

bool is_integer(double x) { return std::abs(x - std::round(x)) < 1e-9; }

}  // namespace

ConfigError::ConfigError(std::string key, std::string detail, int line)
    : std::runtime_error((line > 0 ? "line " + std::to_string(line) + ": " : std::string()) +
                         key + ": " + detail),
      key_(std::move(key)),
      detail_(std::move(detail)),
      line_(line) {}

std::string_view to_string(Experiment e) {
  switch (e) {
    case Experiment::GainSweep: return "gain-sweep";
    case Experiment::BoundCheck: return "bound-check";
    case Experiment::TailCheck: return "tail-check";
    case Experiment::BatchSampling: return "batch-sampling";
    case Experiment::ResidualCheck: return "residual-check";
  }
  return "?";
}

Experiment parse_experiment(std::string_view name) {
  for (const auto e : {Experiment::GainSweep, Experiment::BoundCheck, Experiment::TailCheck,
                       Experiment::BatchSampling, Experiment::ResidualCheck}) {
    if (to_string(e) == name) return e;
  }
  throw std::invalid_argument("unknown experiment '" + std::string(name) + "'");
}

int SweepSpec::servers_for(int k) const { return servers ? *servers : default_server_count(k); }

std::int64_t SweepSpec::warmup_for(int l) const {
  return warmup_jobs ? *warmup_jobs : 20LL * l;
}

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys = {
      "experiment", "lambda.grid", "code.n",          "code.k",
      "code.d",     "dist.family", "dist.shape",      "dist.shift",
      "sim.L",      "sim.seed",    "sim.warmup_jobs", "sim.measured_jobs",
      "out.path"};
  return keys;
}

std::vector<Setting> parse_settings(std::string_view text) {
  std::vector<Setting> settings;
  std::map<std::string, int, std::less<>> seen;
  const auto& keys = config_keys();
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    std::string_view line = text.substr(pos, nl == std::string_view::npos ? nl : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) {
      line = line.substr(0, hash);
    }
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError(std::string(line), "expected key=value", line_no);
    }
    std::string key(trim(line.substr(0, eq)));
    const std::string value(trim(line.substr(eq + 1)));
    if (std::find(keys.begin(), keys.end(), key) == keys.end()) {
      throw ConfigError(key, "unknown key", line_no);
    }
    if (const auto it = seen.find(key); it != seen.end()) {
      throw ConfigError(key, "duplicate key (first set on line " + std::to_string(it->second) + ")",
                        line_no);
    }
    if (value.empty()) throw ConfigError(key, "empty value", line_no);
    seen.emplace(key, line_no);
    settings.push_back({std::move(key), value, line_no});
  }
  return settings;
}

std::vector<double> parse_lambda_grid(std::string_view text) {
  const Setting s{"lambda.grid", std::string(text), 0};
  std::vector<double> grid;
  if (trim(text).empty()) return grid;
  if (text.find(':') != std::string_view::npos) {
    const auto parts = split(text, ':');
    if (parts.size() != 3) throw ConfigError(s.key, "range must be lo:hi:step");
    const double lo = number_or_throw<double>(s, parts[0]);
    const double hi = number_or_throw<double>(s, parts[1]);
    const double step = number_or_throw<double>(s, parts[2]);
    if (!(step > 0.0)) throw ConfigError(s.key, "range step must be positive");
    if (hi < lo) return grid;
    const auto count = static_cast<long>(std::floor((hi - lo) / step + 1e-9)) + 1;
    for (long i = 0; i < count; ++i) grid.push_back(snap(lo + i * step));
    return grid;
  }
  for (const double v : number_list<double>(s)) grid.push_back(snap(v));
  return grid;
}

SweepSpec build_spec(const std::vector<Setting>& settings) {
  SweepSpec spec;
  bool have_experiment = false;
  bool have_grid = false;
  bool have_shape = false;
  bool have_shift = false;
  std::optional<Setting> code_n;
  std::optional<Setting> code_k;
  std::optional<Setting> code_d;
  for (const auto& s : settings) {
    if (s.key == "experiment") {
      try {
        spec.experiment = parse_experiment(s.value);
      } catch (const std::invalid_argument& e) {
        throw ConfigError(s.key, e.what(), s.line);
      }
      have_experiment = true;
    } else if (s.key == "lambda.grid") {
      try {
        spec.lambdas = parse_lambda_grid(s.value);
      } catch (const ConfigError& e) {
        throw ConfigError(s.key, e.detail(), s.line);
      }
      have_grid = true;
    } else if (s.key == "code.n") {
      code_n = s;
    } else if (s.key == "code.k") {
      code_k = s;
    } else if (s.key == "code.d") {
      code_d = s;
    } else if (s.key == "dist.family") {
      try {
        spec.family.kind = parse_family(s.value);
      } catch (const std::invalid_argument& e) {
        throw ConfigError(s.key, e.what(), s.line);
      }
    } else if (s.key == "dist.shape") {
      spec.family.shape = number_or_throw<double>(s, s.value);
      have_shape = true;
    } else if (s.key == "dist.shift") {
      spec.family.shift = number_or_throw<double>(s, s.value);
      have_shift = true;
    } else if (s.key == "sim.L") {
      spec.servers = number_or_throw<int>(s, s.value);
    } else if (s.key == "sim.seed") {
      spec.seed = number_or_throw<std::uint64_t>(s, s.value);
    } else if (s.key == "sim.warmup_jobs") {
      spec.warmup_jobs = number_or_throw<std::int64_t>(s, s.value);
    } else if (s.key == "sim.measured_jobs") {
      spec.measured_jobs = number_or_throw<std::int64_t>(s, s.value);
    } else if (s.key == "out.path") {
      spec.out_path = s.value;
    }
  }
  if (!have_experiment) throw ConfigError("experiment", "missing");
  if (!have_grid) throw ConfigError("lambda.grid", "lambda grid empty");

  using Kind = DistFamily::Kind;
  if (spec.family.kind == Kind::Weibull && !have_shape) spec.family.shape = 1.5;
  if (spec.family.kind == Kind::Pareto && !have_shape) {
    throw ConfigError("dist.shape", "required for pareto");
  }
  if (spec.family.kind == Kind::ShiftedExponential && !have_shift) {
    throw ConfigError("dist.shift", "required for shifted-exponential");
  }
  if (spec.family.kind == Kind::Exponential) spec.family.shape = 1.0;

  if (!code_k) throw ConfigError("code.k", "missing");
  if (!code_n && !code_d) throw ConfigError("code.n", "one of code.n or code.d is required");
  const auto ks = number_list<int>(*code_k);
  const auto ns = code_n ? number_list<int>(*code_n) : std::vector<int>{};
  const auto ds = code_d ? number_list<double>(*code_d) : std::vector<double>{};
  if (code_n && ns.size() != ks.size()) {
    throw ConfigError("code.n", "list length differs from code.k", code_n->line);
  }
  if (code_d && ds.size() != ks.size()) {
    throw ConfigError("code.d", "list length differs from code.k", code_d->line);
  }
  for (std::size_t i = 0; i < ks.size(); ++i) {
    const int k = ks[i];
    if (k < 1) throw ConfigError("code.k", "k must be >= 1", code_k->line);
    CodePoint c{0, k, 0.0};
    if (code_n) {
      c.n = ns[i];
      c.d = static_cast<double>(c.n) / k;
      if (code_d && std::abs(ds[i] - c.d) > 1e-9) {
        throw ConfigError("code.d", "d must equal n/k", code_d->line);
      }
    } else {
      c.d = ds[i];
      const double n = c.d * k;
      if (!is_integer(n)) throw ConfigError("code.d", "d * k must be an integer", code_d->line);
      c.n = static_cast<int>(std::lround(n));
    }
    spec.codes.push_back(c);
  }
  validate(spec);
  return spec;
}

SweepSpec parse_config(std::string_view text) { return build_spec(parse_settings(text)); }

SweepSpec load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open config file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

void validate(const SweepSpec& spec) {
  if (spec.lambdas.empty()) throw ConfigError("lambda.grid", "lambda grid empty");
  for (const double l : spec.lambdas) {
    if (!(l > 0.0 && l < 1.0)) throw ConfigError("lambda.grid", "lambda must lie in (0, 1)");
  }
  if (spec.codes.empty()) throw ConfigError("code.k", "no code pairs");
  if (spec.measured_jobs < 2) throw ConfigError("sim.measured_jobs", "must be >= 2");
  if (spec.warmup_jobs && *spec.warmup_jobs < 0) {
    throw ConfigError("sim.warmup_jobs", "must be >= 0");
  }
  using Kind = DistFamily::Kind;
  const Kind kind = spec.family.kind;
  if (kind == Kind::ShiftedExponential &&
      !(spec.family.shift >= 0.0 && spec.family.shift < 1.0)) {
    throw ConfigError("dist.shift", "shift must lie in [0, 1)");
  }
  const bool exponential_only =
      spec.experiment == Experiment::TailCheck || spec.experiment == Experiment::BatchSampling;
  if (exponential_only && kind != Kind::Exponential) {
    throw ConfigError("dist.family", std::string(to_string(spec.experiment)) +
                                         " requires exponential service");
  }
  if (spec.experiment == Experiment::BoundCheck || spec.experiment == Experiment::GainSweep) {
    if (kind == Kind::Pareto) {
      throw ConfigError("dist.family", "no latency bound exists for pareto service");
    }
    if (kind == Kind::Weibull && spec.family.shape < 1.0) {
      throw ConfigError("dist.shape", "bounds require weibull shape >= 1");
    }
  }
  for (const auto& c : spec.codes) {
    try {
      (void)chunk_dist(spec.family, c.k);
    } catch (const std::exception& e) {
      throw ConfigError(kind == Kind::ShiftedExponential ? "dist.shift" : "dist.shape", e.what());
    }
    const int l = spec.servers_for(c.k);
    if (l < c.n) throw ConfigError("sim.L", "L must be >= n = " + std::to_string(c.n));
    switch (spec.experiment) {
      case Experiment::GainSweep:
      case Experiment::BoundCheck:
      case Experiment::TailCheck:
        if (!is_integer(c.d) || c.d < 2.0) {
          throw ConfigError("code.d", "this experiment needs an integer d = n/k >= 2");
        }
        if (spec.experiment != Experiment::GainSweep && c.k < 2) {
          throw ConfigError("code.k", "bounds need k >= 2");
        }
        break;
      case Experiment::BatchSampling:
        if (!(c.d > 1.0 && c.d < 2.0)) throw ConfigError("code.d", "batch sampling needs 1 < d < 2");
        for (const double lam : spec.lambdas) {
          try {
            (void)batch_sampling_pmf(lam, c.d);
          } catch (const std::exception& e) {
            throw ConfigError("lambda.grid", e.what());
          }
        }
        break;
      case Experiment::ResidualCheck:
        try {
          (void)residual_moment(chunk_dist(spec.family, c.k), 1);
        } catch (const std::exception& e) {
          throw ConfigError("dist.shape", e.what());
        }
        break;
    }
  }
}

}  // namespace eclat::harness
