#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "eclat/service_dist.hpp"

namespace eclat::harness {

/// Configuration problem tied to a key (and a line for file input, 0 for
/// flags). what() is "<key>: <detail>", prefixed by "line N: " when known.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string key, std::string detail, int line = 0);
  const std::string& key() const noexcept { return key_; }
  const std::string& detail() const noexcept { return detail_; }
  int line() const noexcept { return line_; }

 private:
  std::string key_;
  std::string detail_;
  int line_;
};

enum class Experiment { GainSweep, BoundCheck, TailCheck, BatchSampling, ResidualCheck };

std::string_view to_string(Experiment e);
/// gain-sweep | bound-check | tail-check | batch-sampling | residual-check
Experiment parse_experiment(std::string_view name);

/// Code pair (n, k) with probe ratio d = n / k.
struct CodePoint {
  int n;
  int k;
  double d;
};

struct SweepSpec {
  Experiment experiment = Experiment::GainSweep;
  std::vector<double> lambdas;
  std::vector<CodePoint> codes;
  DistFamily family;
  /// Unset: max(2000, 200 k) per code point.
  std::optional<int> servers;
  std::uint64_t seed = 1;
  /// Unset: 20 L.
  std::optional<std::int64_t> warmup_jobs;
  std::int64_t measured_jobs = 100000;
  std::string out_path;

  int servers_for(int k) const;
  std::int64_t warmup_for(int servers) const;
};

/// One key=value setting with its source line (0 for command-line flags).
struct Setting {
  std::string key;
  std::string value;
  int line = 0;
};

/// Keys accepted in config files, in documentation order.
const std::vector<std::string>& config_keys();

/// Splits key=value lines; '#' starts a comment. Rejects unknown and
/// duplicate keys and malformed lines with the offending line number.
std::vector<Setting> parse_settings(std::string_view text);

/// Applies settings over defaults and validates the result.
SweepSpec build_spec(const std::vector<Setting>& settings);

SweepSpec parse_config(std::string_view text);
SweepSpec load_config(const std::filesystem::path& path);

/// "0.1,0.2" or "lo:hi:step" (inclusive of hi up to rounding).
std::vector<double> parse_lambda_grid(std::string_view text);

/// Throws ConfigError naming the key of the first violated constraint.
void validate(const SweepSpec& spec);

/// Comparison criterion of a row. Le: sim <= theory + 3 se. Ge: sim >=
/// theory - 3 se. Rel2pct: |sim - theory| <= 0.02 |theory|.
enum class Criterion { Le, Ge, Rel2pct };
std::string_view to_string(Criterion c);

struct ComparisonRow {
  std::string experiment;
  std::string family;
  double shape = 0.0;
  double shift = 0.0;
  int n = 0;
  int k = 0;
  double d = 0.0;
  double lambda = 0.0;
  /// Time point for tail rows; NaN otherwise (rendered empty).
  double t = 0.0;
  double sim_value = 0.0;
  double sim_std_err = 0.0;
  double theory_value = 0.0;
  std::string branch;
  Criterion criterion = Criterion::Le;
  bool pass = false;
};

inline constexpr double kStdErrTolerance = 3.0;
inline constexpr double kRelativeTolerance = 0.02;

/// Pass flag implied by the row's numbers and criterion.
bool evaluate(const ComparisonRow& row);
/// Coordinate order used for output: experiment, family, shape, shift, n, k,
/// d, lambda, t, branch.
bool coordinate_less(const ComparisonRow& a, const ComparisonRow& b);

std::string csv_header();
/// %.9g numbers; empty field for NaN.
std::string format_number(double x);
std::string csv_line(const ComparisonRow& row);
/// Header plus rows in the given order.
std::string render_csv(const std::vector<ComparisonRow>& rows);
/// Throws std::runtime_error when the file cannot be written.
void write_csv(const std::vector<ComparisonRow>& rows, const std::filesystem::path& path);

struct RunOptions {
  /// 0: std::thread::hardware_concurrency().
  unsigned threads = 0;
};

/// Executes every sweep point (concurrently when threads > 1) and returns
/// the rows sorted by coordinates. The result does not depend on the thread
/// count.
std::vector<ComparisonRow> run_sweep(const SweepSpec& spec, const RunOptions& options = {});

bool all_pass(const std::vector<ComparisonRow>& rows);

/// fig3a (exponential), fig3b (shift 0.1), fig4 (Weibull 1.5) gain sweeps
/// over (4,2), (6,3), (8,4), (9,3) and lambda 0.1..0.9; fig5 batch sampling
/// with (14,10), lambda 0.8, 0.85, 0.9.
const std::vector<std::string>& preset_names();
/// Preset as config-file text, so it can be overlaid with other settings.
std::string preset_config(std::string_view name);
SweepSpec preset(std::string_view name);

/// Plot-ready whitespace-separated table: one line per lambda and one
/// column group (sim, s.e., theory) per code pair or bound branch.
std::string render_plot_data(const std::vector<ComparisonRow>& rows);

}  // namespace eclat::harness
