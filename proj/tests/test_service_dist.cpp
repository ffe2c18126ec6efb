#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "eclat/rng.hpp"
#include "eclat/service_dist.hpp"
#include "oracles.hpp"

using namespace eclat;

namespace {

std::vector<double> draw(const ServiceDistribution& d, std::uint64_t seed, int n) {
  Rng rng(seed);
  std::vector<double> xs(static_cast<std::size_t>(n));
  for (auto& x : xs) x = d.sample(rng);
  return xs;
}

// E[f(X)] for a Weibull law from its density, by Simpson on a truncated range.
double weibull_expectation(double shape, double scale, const std::function<double(double)>& g) {
  auto density = [=](double x) {
    if (x <= 0.0) return shape < 1.0 ? 0.0 : (shape == 1.0 ? 1.0 / scale : 0.0);
    const double z = x / scale;
    return shape / scale * std::pow(z, shape - 1.0) * std::exp(-std::pow(z, shape));
  };
  return oracle::simpson_pieces([&](double x) { return g(x) * density(x); }, 0.0, 40.0 * scale,
                                400);
}

// E[exp(s (X - E X))] minus the sub-exponential envelope exp(s^2 tau^2 / 2).
double envelope_gap(const ServiceDistribution& d, const SubExpParams& p, double s) {
  return d.mgf(s) * std::exp(-s * d.mean()) - std::exp(s * s * p.tau_sq / 2.0);
}

}  // namespace

TEST_CASE("chunk laws have mean 1/k for every family") {
  for (const DistFamily family : {DistFamily::exponential(), DistFamily::shifted(0.1),
                                  DistFamily::shifted(0.5), DistFamily::weibull(1.5),
                                  DistFamily::weibull(0.7), DistFamily::pareto(2.5)}) {
    for (int k : {1, 2, 4, 8}) {
      CAPTURE(family_name(family.kind));
      CAPTURE(k);
      CHECK(chunk_dist(family, k).mean() == doctest::Approx(1.0 / k).epsilon(1e-12));
    }
  }
}

TEST_CASE("unnormalized shift construction keeps c/k + Exp(k)") {
  const auto chunk = chunk_dist(DistFamily::shifted(0.2, false), 2);
  const auto* law = chunk.get_if<ShiftedExponential>();
  REQUIRE(law != nullptr);
  CHECK(law->shift == doctest::Approx(0.1));
  CHECK(law->rate == doctest::Approx(2.0));
  CHECK(chunk_dist(DistFamily::shifted(0.2, false), 1).mean() == doctest::Approx(1.2));
}

TEST_CASE("raw moments match independent integrals") {
  const ServiceDistribution e = Exponential{3.0};
  CHECK(e.raw_moment(1) == doctest::Approx(1.0 / 3.0));
  CHECK(e.raw_moment(2) == doctest::Approx(2.0 / 9.0));
  CHECK(e.raw_moment(3) == doctest::Approx(6.0 / 27.0));

  const ServiceDistribution s = ShiftedExponential{0.1, 2.0};
  // Var = 1/4, mean = 0.6
  CHECK(s.mean() == doctest::Approx(0.6));
  CHECK(s.second_moment() == doctest::Approx(0.25 + 0.36));

  for (double m : {0.8, 1.0, 1.5, 3.0}) {
    const double scale = 0.37;
    const ServiceDistribution w = Weibull{m, scale};
    CAPTURE(m);
    CHECK(w.raw_moment(1) ==
          doctest::Approx(weibull_expectation(m, scale, [](double x) { return x; }))
              .epsilon(1e-6));
    CHECK(w.raw_moment(2) ==
          doctest::Approx(weibull_expectation(m, scale, [](double x) { return x * x; }))
              .epsilon(1e-6));
  }

  const ServiceDistribution p = Pareto{2.5, 1.0};
  CHECK(p.raw_moment(1) == doctest::Approx(2.5 / 1.5));
  CHECK(p.raw_moment(2) == doctest::Approx(2.5 / 0.5));
  CHECK_THROWS_AS(p.raw_moment(3), DomainError);
}

TEST_CASE("closed-form MGFs agree with quadrature") {
  const ServiceDistribution e = Exponential{4.0};
  const ServiceDistribution s = ShiftedExponential{0.05, 4.0 / 0.9};
  for (double t : {-5.0, -1.0, 0.0, 1.0, 2.0, 3.5}) {
    CAPTURE(t);
    CHECK(e.mgf(t) == doctest::Approx(e.mgf_quadrature(t)).epsilon(1e-9));
    CHECK(s.mgf(t) == doctest::Approx(s.mgf_quadrature(t)).epsilon(1e-9));
  }
  CHECK(e.mgf(0.0) == doctest::Approx(1.0));
  CHECK(e.mgf(2.0) == doctest::Approx(2.0));
}

TEST_CASE("Weibull MGF agrees with a direct density integral") {
  const double m = 1.5;
  const auto chunk = chunk_dist(DistFamily::weibull(m), 8);
  const double scale = chunk.get_if<Weibull>()->scale;
  for (double t : {-4.0, 1.0, 6.0, 12.0}) {
    CAPTURE(t);
    const double expected =
        weibull_expectation(m, scale, [t](double x) { return std::exp(t * x); });
    CHECK(chunk.mgf(t) == doctest::Approx(expected).epsilon(1e-7));
  }
  // Exponential special case of the Weibull integral.
  const ServiceDistribution w1 = Weibull{1.0, 0.5};
  CHECK(w1.mgf(1.0) == doctest::Approx(2.0 / (2.0 - 1.0)).epsilon(1e-9));
}

TEST_CASE("MGF outside its region of finiteness throws") {
  const ServiceDistribution e = Exponential{2.0};
  CHECK(e.mgf_abscissa() == 2.0);
  CHECK_THROWS_AS(e.mgf(2.0), DomainError);
  CHECK_THROWS_AS(e.mgf(3.0), DomainError);
  const ServiceDistribution p = Pareto{3.0, 1.0};
  CHECK(p.mgf_abscissa() == 0.0);
  CHECK_THROWS_AS(p.mgf(0.1), DomainError);
  // Pareto MGF for s < 0 by quadrature against a Simpson integral in x.
  const double expected = oracle::simpson_pieces(
      [](double x) { return std::exp(-0.5 * x) * 3.0 / std::pow(x, 4.0); }, 1.0, 200.0, 200);
  CHECK(p.mgf(-0.5) == doctest::Approx(expected).epsilon(1e-6));
  const ServiceDistribution heavy = Weibull{0.5, 1.0};
  CHECK(heavy.mgf_abscissa() == 0.0);
  CHECK(ServiceDistribution(Weibull{2.0, 1.0}).mgf_abscissa() == INFINITY);
}

TEST_CASE("samplers match independent reference samplers (two-sample KS)") {
  constexpr int n = 20000;
  std::mt19937_64 gen(2024);
  auto reference = [&](auto&& one) {
    std::vector<double> xs(n);
    for (auto& x : xs) x = one();
    return xs;
  };
  const double crit = oracle::ks_critical(n, n, 1e-3);

  std::exponential_distribution<double> exp4(4.0);
  CHECK(oracle::ks_statistic(draw(Exponential{4.0}, 1, n), reference([&] { return exp4(gen); })) <
        crit);

  std::exponential_distribution<double> exp2(2.0);
  CHECK(oracle::ks_statistic(draw(ShiftedExponential{0.3, 2.0}, 2, n),
                             reference([&] { return 0.3 + exp2(gen); })) < crit);

  CHECK(oracle::ks_statistic(draw(Weibull{1.5, 0.2}, 3, n),
                             reference([&] { return oracle::weibull_draw(gen, 1.5, 0.2); })) <
        crit);

  // Pareto by its survival function: x = x_min U^(-1/a).
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  CHECK(oracle::ks_statistic(draw(Pareto{2.5, 0.6}, 4, n), reference([&] {
                               return 0.6 * std::pow(1.0 - unif(gen), -1.0 / 2.5);
                             })) < crit);
}

TEST_CASE("sub-exponential parameters") {
  const auto e = subexp_params(Exponential{8.0});
  CHECK(e.tau_sq == doctest::Approx(1.0 / 64.0));
  CHECK(e.b == doctest::Approx(1.0 / 8.0));
  CHECK(e.tau() == doctest::Approx(1.0 / 8.0));

  const auto s = subexp_params(ShiftedExponential{0.1, 2.0});
  CHECK(s.tau_sq == doctest::Approx(1.0 + 0.25));
  CHECK(s.b == doctest::Approx(0.5));
  // A zero shift collapses to the exponential parameters.
  const auto s0 = subexp_params(ShiftedExponential{0.0, 2.0});
  CHECK(s0.tau_sq == doctest::Approx(0.25));
  CHECK(s0.b == doctest::Approx(0.5));

  const double m = 1.5;
  const double scale = 0.3;
  const auto w = subexp_params(Weibull{m, scale});
  const double expected = 6.0 * scale * std::sqrt(std::tgamma(2.0 / m) / (2.0 * m));
  CHECK(w.b == doctest::Approx(expected));
  CHECK(w.tau_sq == doctest::Approx(expected * expected));

  CHECK_THROWS_AS(subexp_params(Pareto{3.0, 1.0}), DomainError);
  CHECK_THROWS_AS(subexp_params(Weibull{0.5, 1.0}), DomainError);
}

TEST_CASE("sub-exponential envelope: where the stated parameters hold") {
  // Left side of the envelope holds for the exponential and shifted laws.
  const ServiceDistribution e = Exponential{8.0};
  const ServiceDistribution s = chunk_dist(DistFamily::shifted(0.1), 8);
  for (const auto* d : {&e, &s}) {
    const auto p = subexp_params(*d);
    for (double frac : {-0.99, -0.5, -0.1, -0.01}) {
      CAPTURE(frac);
      CHECK(envelope_gap(*d, p, frac / p.b) <= 1e-12);
    }
  }
  // On the right the exponential's (1/r^2, 1/r) pair is violated for every
  // s > 0: e^{-u}/(1-u) exceeds e^{u^2/2}. Doubling both parameters restores
  // the envelope on |s| < r/2.
  const auto p = subexp_params(e);
  for (double frac : {0.05, 0.3, 0.6}) {
    CAPTURE(frac);
    CHECK(envelope_gap(e, p, frac / p.b) > 0.0);
  }
  const SubExpParams doubled{4.0 * p.tau_sq, 2.0 * p.b};
  for (double frac : {-0.99, -0.5, 0.05, 0.5, 0.99}) {
    CAPTURE(frac);
    CHECK(envelope_gap(e, doubled, frac / doubled.b) <= 1e-12);
  }
  // The Weibull Orlicz scaling holds on both sides.
  const ServiceDistribution w = chunk_dist(DistFamily::weibull(1.5), 8);
  const auto pw = subexp_params(w);
  for (double frac : {-0.99, -0.5, 0.1, 0.5, 0.99}) {
    CAPTURE(frac);
    CHECK(envelope_gap(w, pw, frac / pw.b) <= 1e-12);
  }
}

TEST_CASE("tail classification") {
  CHECK(classify(Exponential{1.0}, 2) == TailClass::ClassI);
  CHECK(classify(Weibull{1.5, 1.0}, 2) == TailClass::ClassI);
  CHECK(classify(Pareto{2.5, 1.0}, 2) == TailClass::ClassII);
  CHECK(classify(Pareto{1.8, 1.0}, 2) == TailClass::Unclassified);
  CHECK(classify(Pareto{1.8, 1.0}, 3) == TailClass::ClassII);
  CHECK(classify(Weibull{0.5, 1.0}, 2) == TailClass::Unclassified);
  CHECK_THROWS_AS(classify(Exponential{1.0}, 1), std::invalid_argument);
  CHECK(to_string(TailClass::ClassII) == "ClassII");
}

TEST_CASE("family names round-trip and bad parameters are rejected") {
  for (auto kind : {DistFamily::Kind::Exponential, DistFamily::Kind::ShiftedExponential,
                    DistFamily::Kind::Weibull, DistFamily::Kind::Pareto}) {
    CHECK(parse_family(family_name(kind)) == kind);
  }
  CHECK(parse_family("exp") == DistFamily::Kind::Exponential);
  CHECK_THROWS_AS(parse_family("gamma"), std::invalid_argument);
  CHECK_THROWS_AS(ServiceDistribution(Exponential{0.0}), std::invalid_argument);
  CHECK_THROWS_AS(ServiceDistribution(ShiftedExponential{-1.0, 1.0}), std::invalid_argument);
  CHECK_THROWS_AS(ServiceDistribution(Weibull{1.0, -1.0}), std::invalid_argument);
  CHECK_THROWS_AS(ServiceDistribution(Pareto{0.0, 1.0}), std::invalid_argument);
  CHECK_THROWS_AS(chunk_dist(DistFamily::shifted(1.0), 2), std::invalid_argument);
  CHECK_THROWS_AS(chunk_dist(DistFamily::pareto(1.0), 2), std::invalid_argument);
  CHECK_THROWS_AS(chunk_dist(DistFamily::exponential(), 0), std::invalid_argument);
  CHECK(ServiceDistribution(Exponential{2.0}).describe() == "Exponential{rate=2}");
}
