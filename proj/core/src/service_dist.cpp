#include "eclat/service_dist.hpp"

#include <cmath>
#include <cstdio>
#include <limits>

#include "eclat/numeric.hpp"

namespace eclat {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

void require(bool ok, const char* what) {
  if (!ok) throw std::invalid_argument(what);
}

double factorial(int n) { return std::tgamma(n + 1.0); }

// Integral of exp(a t^(1/m) - t) over t >= 0, which is E[exp(s X)] for a
// Weibull with a = s * scale. Splits at the interior peak when a > 0.
double weibull_mgf_integral(double a, double m) {
  const double inv_m = 1.0 / m;
  auto log_integrand = [=](double t) { return a * std::pow(t, inv_m) - t; };
  auto integrand = [=](double t) { return std::exp(a * std::pow(t, inv_m) - t); };

  if (a <= 0.0) {
    // exp(-t) envelope: below 1e-16 past t = 37.
    return numeric::integrate(integrand, 0.0, 8.0) +
           numeric::integrate(integrand, 8.0, 40.0);
  }
  if (m == 1.0) {
    const double decay = 1.0 - a;
    const double upper = 40.0 / decay;
    return numeric::integrate(integrand, 0.0, upper / 8.0) +
           numeric::integrate(integrand, upper / 8.0, upper);
  }
  // m > 1: log-integrand is concave with its maximum at t*.
  const double peak_t = std::pow(a / m, m / (m - 1.0));
  const double peak = log_integrand(peak_t);
  const double floor = std::max(peak, 0.0) - 40.0;
  double upper = std::max(2.0 * peak_t, 1.0);
  while (log_integrand(upper) > floor) upper *= 2.0;
  // Integrate the scaled integrand to stay in range, then restore.
  const double shift = std::max(peak, 0.0);
  auto scaled = [=](double t) { return std::exp(log_integrand(t) - shift); };
  double total = 0.0;
  if (peak_t > 0.0) total += numeric::integrate(scaled, 0.0, peak_t);
  total += numeric::integrate(scaled, peak_t, upper);
  return total * std::exp(shift);
}

}  // namespace

ServiceDistribution::ServiceDistribution(Exponential e) : law_(e) {
  require(e.rate > 0.0 && std::isfinite(e.rate), "exponential rate must be positive");
}

ServiceDistribution::ServiceDistribution(ShiftedExponential e) : law_(e) {
  require(e.shift >= 0.0 && std::isfinite(e.shift), "shift must be non-negative");
  require(e.rate > 0.0 && std::isfinite(e.rate), "exponential rate must be positive");
}

ServiceDistribution::ServiceDistribution(Weibull w) : law_(w) {
  require(w.shape > 0.0 && std::isfinite(w.shape), "weibull shape must be positive");
  require(w.scale > 0.0 && std::isfinite(w.scale), "weibull scale must be positive");
}

ServiceDistribution::ServiceDistribution(Pareto p) : law_(p) {
  require(p.tail_index > 0.0 && std::isfinite(p.tail_index),
          "pareto tail index must be positive");
  require(p.x_min > 0.0 && std::isfinite(p.x_min), "pareto x_min must be positive");
}

double ServiceDistribution::sample(Rng& rng) const noexcept {
  const double e = -std::log(rng.uniform_open_zero());  // Exp(1)
  return std::visit(
      overloaded{
          [&](const Exponential& d) { return e / d.rate; },
          [&](const ShiftedExponential& d) { return d.shift + e / d.rate; },
          [&](const Weibull& d) { return d.scale * std::pow(e, 1.0 / d.shape); },
          [&](const Pareto& d) { return d.x_min * std::exp(e / d.tail_index); },
      },
      law_);
}

double ServiceDistribution::raw_moment(int order) const {
  require(order >= 1, "moment order must be >= 1");
  return std::visit(
      overloaded{
          [&](const Exponential& d) {
            return factorial(order) / std::pow(d.rate, order);
          },
          [&](const ShiftedExponential& d) {
            // E[(c + Y)^n] = sum_j C(n, j) c^(n-j) j! / rate^j
            double sum = 0.0;
            for (int j = 0; j <= order; ++j) {
              sum += numeric::binomial(order, j) * std::pow(d.shift, order - j) *
                     factorial(j) / std::pow(d.rate, j);
            }
            return sum;
          },
          [&](const Weibull& d) {
            return std::pow(d.scale, order) * std::tgamma(1.0 + order / d.shape);
          },
          [&](const Pareto& d) -> double {
            if (d.tail_index <= order) {
              throw DomainError("pareto moment of order " + std::to_string(order) +
                                " is infinite");
            }
            return d.tail_index * std::pow(d.x_min, order) / (d.tail_index - order);
          },
      },
      law_);
}

double ServiceDistribution::mgf_abscissa() const noexcept {
  return std::visit(
      overloaded{
          [](const Exponential& d) { return d.rate; },
          [](const ShiftedExponential& d) { return d.rate; },
          [](const Weibull& d) {
            if (d.shape > 1.0) return kInf;
            if (d.shape == 1.0) return 1.0 / d.scale;
            return 0.0;
          },
          [](const Pareto&) { return 0.0; },
      },
      law_);
}

double ServiceDistribution::mgf(double s) const {
  const double abscissa = mgf_abscissa();
  const bool finite = (s <= 0.0) || (s < abscissa);
  if (!finite) {
    throw DomainError("mgf undefined at s = " + std::to_string(s) + " for " + describe());
  }
  return std::visit(
      overloaded{
          [&](const Exponential& d) { return d.rate / (d.rate - s); },
          [&](const ShiftedExponential& d) {
            return std::exp(s * d.shift) * d.rate / (d.rate - s);
          },
          [&](const Weibull& d) { return weibull_mgf_integral(s * d.scale, d.shape); },
          [&](const Pareto&) { return mgf_quadrature(s); },
      },
      law_);
}

double ServiceDistribution::mgf_quadrature(double s) const {
  const double abscissa = mgf_abscissa();
  if (!((s <= 0.0) || (s < abscissa))) {
    throw DomainError("mgf undefined at s = " + std::to_string(s) + " for " + describe());
  }
  return std::visit(
      overloaded{
          [&](const Exponential& d) {
            // t = rate * x: integral of exp((s/rate - 1) t) over t >= 0.
            return weibull_mgf_integral(s / d.rate, 1.0);
          },
          [&](const ShiftedExponential& d) {
            return std::exp(s * d.shift) * weibull_mgf_integral(s / d.rate, 1.0);
          },
          [&](const Weibull& d) { return weibull_mgf_integral(s * d.scale, d.shape); },
          [&](const Pareto& d) {
            // x = x_min * u^(-1/alpha), u uniform on (0, 1].
            const double inv = -1.0 / d.tail_index;
            auto f = [&](double u) {
              if (u <= 0.0) return 0.0;
              return std::exp(s * d.x_min * std::pow(u, inv));
            };
            if (s == 0.0) return 1.0;
            return numeric::integrate(f, 0.0, 1.0);
          },
      },
      law_);
}

std::string ServiceDistribution::describe() const {
  char buf[128];
  std::visit(overloaded{
                 [&](const Exponential& d) {
                   std::snprintf(buf, sizeof buf, "Exponential{rate=%g}", d.rate);
                 },
                 [&](const ShiftedExponential& d) {
                   std::snprintf(buf, sizeof buf, "ShiftedExponential{shift=%g, rate=%g}",
                                 d.shift, d.rate);
                 },
                 [&](const Weibull& d) {
                   std::snprintf(buf, sizeof buf, "Weibull{shape=%g, scale=%g}", d.shape,
                                 d.scale);
                 },
                 [&](const Pareto& d) {
                   std::snprintf(buf, sizeof buf, "Pareto{tail=%g, x_min=%g}",
                                 d.tail_index, d.x_min);
                 },
             },
             law_);
  return buf;
}

std::string_view family_name(DistFamily::Kind kind) {
  switch (kind) {
    case DistFamily::Kind::Exponential: return "exponential";
    case DistFamily::Kind::ShiftedExponential: return "shifted-exponential";
    case DistFamily::Kind::Weibull: return "weibull";
    case DistFamily::Kind::Pareto: return "pareto";
  }
  return "unknown";
}

DistFamily::Kind parse_family(std::string_view name) {
  if (name == "exponential" || name == "exp") return DistFamily::Kind::Exponential;
  if (name == "shifted-exponential" || name == "shift" || name == "shift-exp" ||
      name == "shift+exp")
    return DistFamily::Kind::ShiftedExponential;
  if (name == "weibull") return DistFamily::Kind::Weibull;
  if (name == "pareto") return DistFamily::Kind::Pareto;
  throw std::invalid_argument("unknown distribution family '" + std::string(name) + "'");
}

ServiceDistribution chunk_dist(const DistFamily& family, int k) {
  require(k >= 1, "chunk count k must be >= 1");
  const double kd = static_cast<double>(k);
  switch (family.kind) {
    case DistFamily::Kind::Exponential:
      return Exponential{kd};
    case DistFamily::Kind::ShiftedExponential: {
      const double c = family.shift;
      if (family.unit_mean) {
        require(c >= 0.0 && c < 1.0, "shift c must satisfy 0 <= c < 1");
        return ShiftedExponential{c / kd, kd / (1.0 - c)};
      }
      require(c >= 0.0, "shift c must be non-negative");
      return ShiftedExponential{c / kd, kd};
    }
    case DistFamily::Kind::Weibull: {
      const double m = family.shape;
      require(m > 0.0, "weibull shape must be positive");
      return Weibull{m, 1.0 / (kd * std::tgamma(1.0 + 1.0 / m))};
    }
    case DistFamily::Kind::Pareto: {
      const double a = family.shape;
      require(a > 1.0, "pareto tail index must exceed 1 for a finite mean");
      return Pareto{a, (a - 1.0) / (a * kd)};
    }
  }
  throw std::invalid_argument("unknown family");
}

double SubExpParams::tau() const { return std::sqrt(tau_sq); }

SubExpParams subexp_params(const ServiceDistribution& dist) {
  return std::visit(
      overloaded{
          [](const Exponential& d) {
            const double b = 1.0 / d.rate;
            return SubExpParams{b * b, b};
          },
          [](const ShiftedExponential& d) {
            const double b = 1.0 / d.rate;
            // The constant part contributes (1, 0); a zero shift has none.
            const double constant_part = d.shift > 0.0 ? 1.0 : 0.0;
            return SubExpParams{constant_part + b * b, b};
          },
          [](const Weibull& d) -> SubExpParams {
            if (d.shape < 1.0) {
              throw DomainError("weibull with shape < 1 has no finite (tau^2, b)");
            }
            const double orlicz =
                std::sqrt(std::tgamma(2.0 / d.shape) / (2.0 * d.shape));
            const double t = kWeibullOrliczMultiplier * d.scale * orlicz;
            return SubExpParams{t * t, t};
          },
          [](const Pareto&) -> SubExpParams {
            throw DomainError("pareto has no finite (tau^2, b)");
          },
      },
      dist.law());
}

std::string_view to_string(TailClass c) {
  switch (c) {
    case TailClass::ClassI: return "ClassI";
    case TailClass::ClassII: return "ClassII";
    case TailClass::Unclassified: return "Unclassified";
  }
  return "Unclassified";
}

TailClass classify(const ServiceDistribution& dist, int d) {
  require(d >= 2, "choice count d must be >= 2");
  if (dist.mgf_abscissa() > 0.0) return TailClass::ClassI;
  if (const auto* p = dist.get_if<Pareto>()) {
    const double threshold = static_cast<double>(d) / (d - 1.0);
    if (p->tail_index > threshold) return TailClass::ClassII;
  }
  return TailClass::Unclassified;
}

}  // namespace eclat
