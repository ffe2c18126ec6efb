#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>

#include "eclat/rng.hpp"

namespace eclat {

/// Raised when a requested moment or transform does not exist.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

struct Exponential {
  double rate;
};

/// shift + Exponential(rate)
struct ShiftedExponential {
  double shift;
  double rate;
};

/// Density (m/scale)(x/scale)^(m-1) exp(-(x/scale)^m) on x >= 0.
struct Weibull {
  double shape;
  double scale;
};

/// P(X > x) = (x_min / x)^tail_index for x >= x_min.
struct Pareto {
  double tail_index;
  double x_min;
};

/// Service-time law of one server. Values are immutable once validated.
class ServiceDistribution {
 public:
  using Variant = std::variant<Exponential, ShiftedExponential, Weibull, Pareto>;

  // Implicit on purpose: ServiceDistribution d = Exponential{2.0};
  ServiceDistribution(Exponential e);
  ServiceDistribution(ShiftedExponential e);
  ServiceDistribution(Weibull w);
  ServiceDistribution(Pareto p);

  const Variant& law() const noexcept { return law_; }

  template <class T>
  const T* get_if() const noexcept {
    return std::get_if<T>(&law_);
  }

  double sample(Rng& rng) const noexcept;

  /// E[X^order] for integer order >= 1. Throws DomainError if infinite.
  double raw_moment(int order) const;
  double mean() const { return raw_moment(1); }
  double second_moment() const { return raw_moment(2); }

  /// Supremum of s with a finite MGF (may be +inf). Equal to 0 when the MGF
  /// diverges for every s > 0.
  double mgf_abscissa() const noexcept;

  /// E[exp(s X)]. Closed form where one exists, quadrature for Weibull and
  /// Pareto. Throws DomainError outside the region of finiteness.
  double mgf(double s) const;

  /// E[exp(s X)] by quadrature for every family; used to cross-check the
  /// closed forms.
  double mgf_quadrature(double s) const;

  std::string describe() const;

 private:
  Variant law_;
};

/// Family selector for chunk construction: a family plus its shape
/// parameters, independent of the mean.
struct DistFamily {
  enum class Kind { Exponential, ShiftedExponential, Weibull, Pareto };
  Kind kind = Kind::Exponential;
  /// Weibull shape m, or Pareto tail index.
  double shape = 1.0;
  /// Shift c as a fraction of the whole-file service time.
  double shift = 0.0;
  /// true: whole file is c + Exp(1/(1-c)) so its mean is 1.
  /// false: whole file is c + Exp(1) and chunk k is c/k + Exp(k).
  bool unit_mean = true;

  static DistFamily exponential() { return {}; }
  static DistFamily shifted(double c, bool unit_mean = true) {
    return {Kind::ShiftedExponential, 1.0, c, unit_mean};
  }
  static DistFamily weibull(double m) { return {Kind::Weibull, m, 0.0, true}; }
  static DistFamily pareto(double tail) {
    return {Kind::Pareto, tail, 0.0, true};
  }
};

std::string_view family_name(DistFamily::Kind kind);
/// Accepts exponential|exp, shifted-exponential|shift|shift-exp, weibull,
/// pareto. Throws std::invalid_argument otherwise.
DistFamily::Kind parse_family(std::string_view name);

/// Member of the family whose service time for a 1/k chunk of a file has
/// mean 1/k (or the unnormalized shift construction when !unit_mean).
ServiceDistribution chunk_dist(const DistFamily& family, int k);

struct SubExpParams {
  double tau_sq;
  double b;

  double tau() const;
};

/// (tau^2, b) sub-exponential parameters. Exponential and shifted
/// exponential use the rate of the law (k enters only through it); Weibull
/// uses the Orlicz-norm scaling with multiplier 6. Pareto and Weibull with
/// shape < 1 throw DomainError.
SubExpParams subexp_params(const ServiceDistribution& dist);

/// Coefficient of the Weibull Orlicz-norm bound.
inline constexpr double kWeibullOrliczMultiplier = 6.0;

enum class TailClass { ClassI, ClassII, Unclassified };

std::string_view to_string(TailClass c);

/// ClassI: finite MGF for some s > 0. ClassII: polynomial tail with exponent
/// above d/(d-1). Requires d >= 2.
TailClass classify(const ServiceDistribution& dist, int d);

}  // namespace eclat
