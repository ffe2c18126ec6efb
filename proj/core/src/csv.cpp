#include <cmath>
#include <cstdio>
#include <fstream>
#include <tuple>

#include "eclat/harness.hpp"

namespace eclat::harness {

std::string_view to_string(Criterion c) {
  switch (c) {
    case Criterion::Le: return "le";
    case Criterion::Ge: return "ge";
    case Criterion::Rel2pct: return "rel2pct";
  }
  return "?";
}

bool evaluate(const ComparisonRow& row) {
  switch (row.criterion) {
    case Criterion::Le:
      return row.sim_value <= row.theory_value + kStdErrTolerance * row.sim_std_err;
    case Criterion::Ge:
      return row.sim_value >= row.theory_value - kStdErrTolerance * row.sim_std_err;
    case Criterion::Rel2pct:
      return std::abs(row.sim_value - row.theory_value) <=
             kRelativeTolerance * std::abs(row.theory_value);
  }
  return false;
}

bool coordinate_less(const ComparisonRow& a, const ComparisonRow& b) {
  // NaN t (non-tail rows) compares as -inf so ordering stays strict-weak.
  const auto t = [](double x) { return std::isnan(x) ? -INFINITY : x; };
  return std::forward_as_tuple(a.experiment, a.family, a.shape, a.shift, a.n, a.k, a.d,
                               a.lambda, t(a.t), a.branch) <
         std::forward_as_tuple(b.experiment, b.family, b.shape, b.shift, b.n, b.k, b.d,
                               b.lambda, t(b.t), b.branch);
}

std::string csv_header() {
  return "experiment,family,shape,shift,n,k,d,lambda,t,sim_value,sim_std_err,theory_value,"
         "branch,criterion,pass";
}

std::string format_number(double x) {
  if (std::isnan(x)) return {};
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", x);
  return buf;
}

std::string csv_line(const ComparisonRow& r) {
  std::string line;
  const auto field = [&](const std::string& s) {
    if (!line.empty()) line += ',';
    line += s;
  };
  field(r.experiment);
  field(r.family);
  field(format_number(r.shape));
  field(format_number(r.shift));
  field(std::to_string(r.n));
  field(std::to_string(r.k));
  field(format_number(r.d));
  field(format_number(r.lambda));
  field(format_number(r.t));
  field(format_number(r.sim_value));
  field(format_number(r.sim_std_err));
  field(format_number(r.theory_value));
  field(r.branch);
  field(std::string(to_string(r.criterion)));
  field(r.pass ? "true" : "false");
  return line;
}

std::string render_csv(const std::vector<ComparisonRow>& rows) {
  std::string out = csv_header() + '\n';
  for (const auto& r : rows) out += csv_line(r) + '\n';
  return out;
}

void write_csv(const std::vector<ComparisonRow>& rows, const std::filesystem::path& path) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << render_csv(rows);
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

}  // namespace eclat::harness
