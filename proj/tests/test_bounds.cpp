#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>
#include <vector>

#include "eclat/bounds.hpp"
#include "oracles.hpp"

using namespace eclat;

TEST_CASE("harmonic numbers") {
  CHECK(harmonic(0) == 0.0);
  CHECK(harmonic(1) == 1.0);
  CHECK(harmonic(4) == doctest::Approx(25.0 / 12.0));
  CHECK(harmonic(1000) == doctest::Approx(static_cast<double>(oracle::harmonic(1000))).epsilon(1e-14));
}

TEST_CASE("exponential mean bound at k=8, lambda=0.9") {
  const auto report = mean_latency_bound_exp(8, 0.9);
  CHECK(report.branch == "Phi3");
  CHECK(report.value == doctest::Approx(0.761).epsilon(1e-3));
  CHECK(report.value == doctest::Approx(oracle::exp_mean_bound(8, 0.9)).epsilon(1e-12));
  CHECK(report.aux.at("delta") == doctest::Approx(1.0 / 512.0));
  CHECK(report.inputs.at("tau") == doctest::Approx(0.125));
}

TEST_CASE("exponential mean bound matches the closed form on a grid") {
  for (int k : {2, 3, 4, 8, 16}) {
    for (double lambda : {0.55, 0.7, 0.9, 0.99}) {
      if (lambda <= 1.0 / k) continue;
      CAPTURE(k);
      CAPTURE(lambda);
      CHECK(mean_latency_bound_exp(k, lambda).value ==
            doctest::Approx(oracle::exp_mean_bound(k, lambda)).epsilon(1e-12));
    }
  }
  // k=2 at lambda=0.99 sits on the square-root branch.
  CHECK(mean_latency_bound_exp(2, 0.99).branch == "Phi4");
}

TEST_CASE("general bound with exponential parameters is Phi3 minus 1/k") {
  for (int k : {4, 8}) {
    for (double lambda : {0.5, 0.7, 0.9}) {
      const SubExpParams p{1.0 / (k * k), 1.0 / k};
      const auto general = mean_latency_bound_general(k, lambda, p);
      const auto exp = mean_latency_bound_exp(k, lambda);
      CAPTURE(k);
      CAPTURE(lambda);
      CHECK(general.branch == "Phi1");
      CHECK(general.value + 1.0 / k == doctest::Approx(exp.value).epsilon(1e-12));
      CHECK(general.aux.at("M_k") == 0.0);
    }
  }
  const auto with_mk = mean_latency_bound_general(8, 0.9, {1.0 / 64, 1.0 / 8}, 0.5);
  CHECK(with_mk.value == doctest::Approx(mean_latency_bound_general(8, 0.9, {1.0 / 64, 1.0 / 8}).value + 0.5));
}

TEST_CASE("general bound switches to the square-root branch for large tau") {
  const SubExpParams p{1.0, 0.01};
  const auto report = mean_latency_bound_general(8, 0.9, p);
  CHECK(report.branch == "Phi2");
  const double a = std::log2(4.0 * std::log2(8.0)) - std::log2(std::log2(8.0 / 0.9));
  const double r = a - 1.0;
  const double tail = 2.0 / 4096.0 * std::log2(8.0 / 0.9) / (4.0 * 3.0);
  CHECK(report.value ==
        doctest::Approx(std::sqrt(2.0 * std::log(8.0)) * std::sqrt(r) + r / 8.0 + tail));
}

TEST_CASE("mean bounds reject invalid loads; the family wrapper clamps low loads") {
  CHECK_THROWS_AS(mean_latency_bound_exp(4, 0.2), std::invalid_argument);
  CHECK_THROWS_AS(mean_latency_bound_exp(4, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(mean_latency_bound_exp(1, 0.9), std::invalid_argument);
  CHECK_THROWS_AS(mean_latency_bound_general(4, 0.1, {1, 1}), std::invalid_argument);
  const auto clamped = mean_latency_bound(DistFamily::exponential(), 4, 0.1);
  CHECK(clamped.aux.at("lambda_eval") == doctest::Approx(0.25));
  CHECK(clamped.inputs.at("lambda") == doctest::Approx(0.1));
  CHECK(clamped.value == doctest::Approx(oracle::exp_mean_bound(4, 0.25 + 1e-15)).epsilon(1e-9));
  CHECK_THROWS_AS(mean_latency_bound(DistFamily::pareto(3.0), 4, 0.5), DomainError);
}

TEST_CASE("family bound adds M(k) to the general form") {
  const auto family = DistFamily::shifted(0.1);
  const auto report = mean_latency_bound(family, 8, 0.9);
  const auto chunk = chunk_dist(family, 8);
  const auto mk = m_k_bound(chunk, 8);
  const auto general = mean_latency_bound_general(8, 0.9, subexp_params(chunk), mk.value);
  CHECK(report.value == doctest::Approx(general.value));
  CHECK(report.aux.at("s_min") == doctest::Approx(mk.s_min));
  CHECK(mean_latency_bound(DistFamily::weibull(1.5), 4, 0.7).value > 0.0);
}

TEST_CASE("M(k) agrees with an independent grid search") {
  const int k = 8;
  const auto mk = m_k_bound(Exponential{8.0}, k);
  auto objective = [&](double s) { return std::log(k * k * (8.0 / (8.0 - s) - 1.0) / s) / s; };
  const auto ref = oracle::grid_minimize(objective, 1e-3, 8.0 - 1e-9);
  CHECK(mk.value == doctest::Approx(0.5759).epsilon(2e-3));
  CHECK(std::abs(mk.value - ref.value) < 1e-6);
  CHECK(mk.s_min == doctest::Approx(ref.x).epsilon(1e-2));

  // Weibull: objective through an independently integrated MGF.
  const auto w = chunk_dist(DistFamily::weibull(1.5), 4);
  const double scale = w.get_if<Weibull>()->scale;
  // x = u^2 removes the square-root kink of the density at the origin.
  auto wmgf = [&](double s) {
    return oracle::simpson_fixed(
        [&](double u) {
          const double x = u * u;
          const double z = x / scale;
          return 2.0 * u * std::exp(s * x) * 1.5 / scale * std::sqrt(z) *
                 std::exp(-std::pow(z, 1.5));
        },
        0.0, std::sqrt(60.0 * scale), 4000);
  };
  auto wobj = [&](double s) { return std::log(16.0 * (wmgf(s) - 1.0) / s) / s; };
  const auto wmk = m_k_bound(w, 4);
  const auto wref = oracle::grid_minimize(wobj, 0.05, 40.0, 200, 5);
  CHECK(std::abs(wmk.value - wref.value) < 1e-5);

  CHECK_THROWS_AS(m_k_bound(Pareto{3.0, 2.0 / 12.0}, 4), DomainError);
  CHECK_THROWS_AS(m_k_bound(Exponential{2.0}, 4), std::invalid_argument);
}

TEST_CASE("residual moments") {
  CHECK(residual_moment(Exponential{2.0}, 1) == doctest::Approx(0.5));
  const ServiceDistribution s = ShiftedExponential{0.1, 2.0};
  CHECK(residual_moment(s, 1) == doctest::Approx(0.61 / 1.2));
  // E[X^3] / (3 E[X]) for Exp(1): 6 / 3.
  CHECK(residual_moment(Exponential{1.0}, 2) == doctest::Approx(2.0));
  CHECK_THROWS_AS(residual_moment(Pareto{1.5, 1.0}, 1), DomainError);
}

TEST_CASE("maximal inequality dominates Monte Carlo maxima") {
  std::mt19937_64 gen(7);
  for (double rate : {1.0, 4.0}) {
    std::exponential_distribution<double> e(rate);
    const auto params = subexp_params(Exponential{rate});
    for (int n : {10, 100}) {
      const auto mc = oracle::mc_expected_max([&](auto& g) { return e(g); }, n, 4000, gen);
      CHECK(mc.mean <= maximal_subexp_bound(n, params, 1.0 / rate));
    }
  }
  const SubExpParams p{4.0, 0.5};
  CHECK(maximal_subexp_bound(1, p, 0.3) == doctest::Approx(0.3));
  CHECK(maximal_subexp_bound(100, p, 0.0) ==
        doctest::Approx(std::max(2.0 * std::sqrt(2.0 * std::log(100.0)), std::log(100.0))));
  CHECK_THROWS_AS(maximal_subexp_bound(0, p, 0.0), std::invalid_argument);
}

TEST_CASE("tail bound branches and cutoff") {
  const double r = tail_cutoff(4, 0.5, 0.01);
  CHECK(r == doctest::Approx(1.5268).epsilon(1e-4));
  CHECK(r == doctest::Approx(std::log2(std::log2(0.01 / 4) / std::log2(0.5 / 4))));

  const auto below = tail_latency_bound(4, 0.5, 0.01, 0.9 * r / 4);
  CHECK(below.branch == "below-cutoff");
  CHECK(below.value == 1.0);

  const double tg = 1.5 * r / 4;
  const auto gauss = tail_latency_bound(4, 0.5, 0.01, tg);
  CHECK(gauss.branch == "gaussian");
  const double x = tg - r / 4;
  CHECK(gauss.aux.at("unclamped") == doctest::Approx(4 * std::exp(-16 * x * x / (2 * r)) + 0.01));
  CHECK(gauss.value == doctest::Approx(std::min(1.0, gauss.aux.at("unclamped"))));

  const double te = 5.0 * r / 4;
  const auto expo = tail_latency_bound(4, 0.5, 0.01, te);
  CHECK(expo.branch == "exponential");
  CHECK(expo.value == doctest::Approx(4 * std::exp(-2.0 * (te - r / 4)) + 0.01));

  // Continuous at the branch boundary, nonincreasing, never below epsilon.
  const double edge = 2.0 * r / 4;
  CHECK(tail_latency_bound(4, 0.5, 0.01, edge).aux.at("unclamped") ==
        doctest::Approx(tail_latency_bound(4, 0.5, 0.01, edge * (1 + 1e-12)).aux.at("unclamped")));
  double prev = 1.0;
  for (int i = 0; i <= 200; ++i) {
    const double v = tail_latency_bound(4, 0.5, 0.01, i * 0.02).value;
    CHECK(v <= prev + 1e-15);
    CHECK(v >= 0.01);
    prev = v;
  }
  CHECK_THROWS_AS(tail_latency_bound(4, 0.5, 0.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(tail_latency_bound(4, 0.5, 0.01, -1.0), std::invalid_argument);
}

TEST_CASE("zero-load latency and gain") {
  CHECK(zero_load_gain(DistFamily::exponential(), 2).value == doctest::Approx(0.25).epsilon(1e-14));
  CHECK(zero_load_gain(DistFamily::shifted(0.2, false), 2).value ==
        doctest::Approx(0.35).epsilon(1e-14));
  CHECK(zero_load_gain(DistFamily::exponential(), 1).value == 0.0);
  for (int k : {2, 3, 4}) {
    CHECK(zero_load_latency(DistFamily::exponential(), k).value ==
          doctest::Approx(static_cast<double>(oracle::harmonic(k) / k)));
  }
  // Shifted: c/k + (1-c) H(k) / k.
  CHECK(zero_load_latency(DistFamily::shifted(0.1), 4).value ==
        doctest::Approx(0.1 / 4 + 0.9 * 25.0 / 12.0 / 4));

  // Weibull goes through Monte Carlo; compare with a std::weibull oracle.
  const auto est = zero_load_latency(DistFamily::weibull(1.5), 4, 3, 200000);
  const double scale = chunk_dist(DistFamily::weibull(1.5), 4).get_if<Weibull>()->scale;
  std::mt19937_64 gen(99);
  const auto ref = oracle::mc_expected_max(
      [&](auto& g) { return oracle::weibull_draw(g, 1.5, scale); }, 4, 200000, gen);
  CHECK(std::abs(est.value - ref.mean) < 4.0 * std::hypot(est.std_err, ref.std_err));
}

TEST_CASE("redundant-request closed form matches Monte Carlo order statistics") {
  std::mt19937_64 gen(5);
  for (int delta : {0, 1, 2, 4}) {
    std::exponential_distribution<double> e(4.0);
    const auto mc = oracle::mc_order_stat([&](auto& g) { return e(g); }, 4 + delta, 4, 200000, gen);
    CAPTURE(delta);
    CHECK(std::abs(redundant_request_latency(4, delta) - mc.mean) < 4.0 * mc.std_err);
  }
  CHECK(redundant_request_latency(4, 0) == doctest::Approx(25.0 / 48.0));
  CHECK_THROWS_AS(redundant_request_latency(4, -1), std::invalid_argument);
}

TEST_CASE("Bound I at the batch-sampling reference point") {
  const auto ref = oracle::batch_pmf(0.9L, 1.4L);
  long double mean = 0.0L;
  for (std::size_t i = 0; i < ref.size(); ++i) mean += static_cast<long double>(i) * ref[i];
  const double expected = static_cast<double>(oracle::harmonic(10) + 10.0L * mean);

  const auto loose = bound_I(0.9, 1.4, 10, BoundIVariant::Loose);
  CHECK(loose.branch == "BoundI-loose");
  CHECK(std::abs(loose.value - expected) < 1e-9);
  CHECK(loose.value == doctest::Approx(31.60).epsilon(1e-3));

  const auto tight = bound_I(0.9, 1.4, 10, BoundIVariant::Tight);
  CHECK(tight.branch == "BoundI-tight");
  CHECK(tight.value <= loose.value);
  CHECK(tight.value >= harmonic(10));
  // The k smallest of more samples are stochastically smaller.
  CHECK(bound_I(0.9, 1.4, 10, BoundIVariant::Tight, 14).value < tight.value);
  CHECK_THROWS_AS(bound_I(0.9, 1.4, 10, BoundIVariant::Tight, 9), std::invalid_argument);
}

TEST_CASE("interpolated moments match direct integration") {
  const QueuePmf pmf({0.4, 0.3, 0.2, 0.1});
  auto density = [&](double x) {
    const int i = std::min(static_cast<int>(x), 2);
    const double u = x - i;
    return pmf[i] * (1 - u) + pmf[i + 1] * u;
  };
  const double mass = oracle::simpson_pieces(density, 0, 3, 3);
  const double m1 = oracle::simpson_pieces([&](double x) { return x * density(x); }, 0, 3, 3) / mass;
  const double m2 = oracle::simpson_pieces([&](double x) { return x * x * density(x); }, 0, 3, 3) / mass;
  const auto moments = interpolated_moments(pmf);
  CHECK(moments.mass == doctest::Approx(mass));
  CHECK(moments.mean == doctest::Approx(m1));
  CHECK(moments.variance == doctest::Approx(m2 - m1 * m1));
}

TEST_CASE("inner minimization for Bound II") {
  // Zero variance: the objective is max(z, mu), minimized anywhere left of mu.
  const auto flat = order_stat_mean_variance_min(2.0, 0.0, -3.0, 3.0);
  CHECK(flat.value == doctest::Approx(2.0));
  CHECK(flat.z <= 2.0 + 1e-9);
  // Positive variance: nondecreasing in z, so the left end wins.
  auto g = [](double z) { return z + 0.5 * (1.5 - z + std::sqrt((1.5 - z) * (1.5 - z) + 2.0)); };
  const auto inner = order_stat_mean_variance_min(1.5, 2.0, -5.0, 5.0);
  const auto ref = oracle::grid_minimize(g, -5.0, 5.0);
  CHECK(inner.value == doctest::Approx(ref.value).epsilon(1e-9));
  CHECK(inner.z == doctest::Approx(-5.0));
  CHECK_THROWS_AS(order_stat_mean_variance_min(0, 1, 1, -1), std::invalid_argument);
}

TEST_CASE("Bound II") {
  CHECK(bound_II(QueuePmf::point_mass(0), 10).value == doctest::Approx(harmonic(10)));
  const auto report = bound_II(0.9, 1.4, 10);
  const auto pmf = batch_sampling_pmf(0.9, 1.4).pmf;
  const auto m = interpolated_moments(pmf);
  const double q = pmf.q_max();
  const double at_left = -q + 0.5 * (m.mean + q + std::sqrt((m.mean + q) * (m.mean + q) + m.variance));
  CHECK(report.value == doctest::Approx(harmonic(10) + 10 * at_left).epsilon(1e-9));
  CHECK(report.aux.at("mu2") == doctest::Approx(m.mean));
  CHECK(report.aux.at("sigma2") == doctest::Approx(m.variance));
  CHECK(report.value >= harmonic(10));
}

TEST_CASE("theoretical gain baseline equals the expected queued work") {
  // With unit-mean whole-file service the baseline is E[Q] = sum_r P(Q >= r).
  const DoubleExpTailModel model{0.7, 2, 0.7};
  double expected_q = 0.0;
  for (int r = 1; r < 30; ++r) expected_q += double_exp_ccdf(model, r);
  const auto g = theoretical_gain(2, 4, 0.7, DistFamily::exponential(), 3, 400000);
  CHECK(std::abs(g.baseline - expected_q) < 4.0 * g.std_err);
  CHECK(g.value == doctest::Approx(g.baseline - g.bound.value));
  CHECK(g.bound.branch == "Phi3");
}

TEST_CASE("bound CSV rows line up with the header") {
  auto columns = [](const std::string& s) { return std::count(s.begin(), s.end(), ',') + 1; };
  const std::string header = bound_csv_header();
  for (const auto& report : {mean_latency_bound_exp(8, 0.9), tail_latency_bound(4, 0.5, 0.01, 1.0),
                             bound_II(0.9, 1.4, 10)}) {
    const std::string row = bound_csv_row(report);
    CHECK(columns(row) == columns(header));
    CHECK(row.rfind(report.branch + ",", 0) == 0);
  }
  CHECK(bound_csv_row(mean_latency_bound_exp(8, 0.9)).find("Phi3,0.761075335,8,0.9,2") == 0);
}
