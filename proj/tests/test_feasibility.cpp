#include <doctest.h>

#include <cmath>
#include <random>

#include "helpers.hpp"
#include "triplewin/feasibility.hpp"

using namespace triplewin;
using testing::make_e1;
using testing::make_e2;

TEST_SUITE("feasibility") {

TEST_CASE("E1 margin envelope against kappa_d scaling") {
  const MarketInstance e1 = make_e1();
  const double grid[] = {1.0, 2.0};
  const auto curve = envelope_alpha_delta_vs_alpha_kd(e1, 1.0, grid);
  REQUIRE(curve.size() == 2);
  // ((100 - 2 - 60) / 0.2 - 1) / 0.1 = 1890
  CHECK(curve[0].y_max == doctest::Approx(1890.0).epsilon(1e-12));
  CHECK(curve[0].feasible_any);
  CHECK(curve[0].binding_model == "M1");
  CHECK(curve[0].binding_buyer == "B1");
  // ((38 / 0.4) - 1) / 0.1 = 940: decreasing in alpha_kd
  CHECK(curve[1].y_max == doctest::Approx(940.0).epsilon(1e-12));
}

TEST_CASE("nonpositive slack marks the point infeasible for any margin") {
  const MarketInstance e1 = make_e1();
  const double grid[] = {1.0};
  const auto curve = envelope_alpha_delta_vs_alpha_kd(e1, 50.0, grid);  // 100 < 50*2 + 60
  REQUIRE(curve.size() == 1);
  CHECK_FALSE(curve[0].feasible_any);
}

TEST_CASE("zero-margin models do not restrict alpha_delta") {
  const MarketInstance e2 = make_e2();  // delta = 0
  const double grid[] = {1.0};
  const auto curve = envelope_alpha_delta_vs_alpha_kd(e2, 1.0, grid);
  CHECK(std::isinf(curve[0].y_max));
  CHECK(curve[0].feasible_any);
}

TEST_CASE("E1 offset envelopes at fixed margin scaling") {
  const MarketInstance e1 = make_e1();
  const double ones[] = {1.0};
  // (100 - 1.1 * 0.2 - 60) / 2 = 19.89
  CHECK(envelope_alpha_km_vs_alpha_kd(e1, 1.0, ones)[0].y_max ==
        doctest::Approx(19.89).epsilon(1e-12));
  // (100 - 2 - 60) / (1.1 * 0.2) = 172.7272...
  CHECK(envelope_alpha_kd_vs_alpha_km(e1, 1.0, ones)[0].y_max ==
        doctest::Approx(38.0 / 0.22).epsilon(1e-12));

  // As alpha_kd -> 0 the data term drops: (100 - 60) / 2 = 20.
  const double tiny[] = {1e-9};
  CHECK(envelope_alpha_km_vs_alpha_kd(e1, 1.0, tiny)[0].y_max == doctest::Approx(20.0).epsilon(1e-6));
}

TEST_CASE("margin envelope against kappa_m scaling") {
  const MarketInstance e1 = make_e1();
  const double grid[] = {1.0, 10.0};
  const auto curve = envelope_alpha_delta_vs_alpha_km(e1, 1.0, grid);
  CHECK(curve[0].y_max == doctest::Approx(1890.0).epsilon(1e-12));
  // ((100 - 20 - 60) / 0.2 - 1) / 0.1 = 990
  CHECK(curve[1].y_max == doctest::Approx(990.0).epsilon(1e-12));
}

TEST_CASE("global feasibility on E1") {
  const MarketInstance e1 = make_e1();
  CHECK(global_feasibility(e1, 1.0, 1.0, 1.0));      // 0.22 <= 38
  CHECK(global_feasibility(e1, 1.0, 1.0, 1890.0));   // boundary holds inclusively
  CHECK_FALSE(global_feasibility(e1, 1.0, 1.0, 1891.0));

  MarketInstance easy = make_e1();
  easy.models[0].buyers[0].omega = 0.0;
  easy.datasets[0].kappa_d = 1e-6;
  easy.models[0].kappa_m = 1e-6;
  CHECK(global_feasibility(easy, 1.0, 1.0, 1.0));
}

TEST_CASE("envelope on a single grid point agrees with global feasibility") {
  const MarketInstance e1 = make_e1();
  const double grid[] = {1.3};
  const auto curve = envelope_alpha_delta_vs_alpha_kd(e1, 1.0, grid);
  const double bound = curve[0].y_max;
  CHECK(global_feasibility(e1, 1.3, 1.0, bound * 0.999));
  CHECK_FALSE(global_feasibility(e1, 1.3, 1.0, bound * 1.001));
}

TEST_CASE("feasible set is downward closed") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> unit(0.05, 1.0);
  std::uniform_real_distribution<double> scaling(0.1, 4.0);
  int feasible_seen = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const MarketInstance instance = testing::random_instance(trial % 20, 0.3);
    const double kd = scaling(rng), km = scaling(rng), ad = scaling(rng);
    if (!global_feasibility(instance, kd, km, ad)) continue;
    ++feasible_seen;
    const double f = unit(rng), g = unit(rng), h = unit(rng);
    CHECK(global_feasibility(instance, kd * f, km * g, ad * h));
  }
  CHECK(feasible_seen > 20);
}

TEST_CASE("triples strictly inside the envelope give buyer-feasible fixed points") {
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> frac(0.1, 0.95);
  for (int trial = 0; trial < 15; ++trial) {
    const MarketInstance instance = testing::random_instance(trial, 0.3);
    const double kd = frac(rng), km = frac(rng);
    const double grid[] = {kd};
    const auto curve = envelope_alpha_delta_vs_alpha_kd(instance, km, grid);
    if (!curve[0].feasible_any) continue;
    double ad = std::isinf(curve[0].y_max) ? 3.0 : curve[0].y_max * frac(rng);
    if (ad < 0.0) continue;
    QuotationParams params;
    params.alpha_kappa_d = kd;
    params.alpha_kappa_m = km;
    params.alpha_delta = ad;
    const EquilibriumReport report = solve(instance, params);
    REQUIRE(report.converged);
    CHECK(report.acceptance.buyer_side_ok());
  }
}

TEST_CASE("numerical frontier is tight on the single-buyer market") {
  const MarketInstance e1 = make_e1();
  const double grid[] = {1.0};
  const auto curve = numerical_frontier(e1, EnvelopePanel::kd_delta, 1.0, grid);
  REQUIRE(curve.size() == 1);
  REQUIRE(curve[0].resolved);
  CHECK(std::abs(curve[0].numeric_max - 1890.0) / 1890.0 <= 1e-3);
}

TEST_CASE("numerical frontier dominates the analytic envelope") {
  GeneratorConfig multi;
  multi.n_models = 3;
  multi.n_datasets = 5;
  multi.rho = 0.3;
  const MarketInstance instance = generate(multi, 7);
  const double grid[] = {0.5, 1.0, 1.5};
  for (EnvelopePanel panel :
       {EnvelopePanel::kd_delta, EnvelopePanel::km_delta, EnvelopePanel::kd_km}) {
    const auto curve = numerical_frontier(instance, panel, 1.0, grid);
    for (const auto& point : curve) {
      if (!point.resolved) continue;
      CHECK(point.numeric_max >= point.analytic_max - 1e-5 * std::max(1.0, point.analytic_max));
    }
  }
}

TEST_CASE("offset increase lifts the whole equilibrium") {
  const MarketInstance e1 = make_e1();
  const MonotonicityVerdict verdict = offset_monotonicity_check(e1, {}, {{"M1", 1.0}});
  CHECK(verdict.pass);
  CHECK(verdict.shifted.buyer[0] == doctest::Approx(8.05).epsilon(1e-10));
  CHECK(verdict.shifted.data[0] == doctest::Approx(0.2 + 0.6 * 8.05 / 1.1).epsilon(1e-10));
}

TEST_CASE("zero increments leave the equilibrium unchanged") {
  const MonotonicityVerdict verdict = offset_monotonicity_check(make_e2(), {}, {});
  CHECK(verdict.pass);
  CHECK(verdict.base.buyer == verdict.shifted.buyer);
  CHECK(verdict.base.data == verdict.shifted.data);
}

TEST_CASE("raising one dataset offset in E2") {
  const MonotonicityVerdict verdict = offset_monotonicity_check(make_e2(), {{"D1", 0.5}}, {});
  CHECK(verdict.pass);
  // All edges weakly rise; the closed form confirms D1 strictly.
  MarketInstance shifted = make_e2();
  shifted.datasets[0].kappa_d += 0.5;
  const PriceVector star = closed_form_equilibrium(shifted);
  CHECK(verdict.shifted.data[0] == doctest::Approx(star.data[0]).epsilon(1e-10));
  CHECK(verdict.shifted.data[0] > verdict.base.data[0] + 0.4);
}

TEST_CASE("negative increments are rejected") {
  CHECK_THROWS_AS(offset_monotonicity_check(make_e1(), {{"D1", -0.1}}, {}), std::invalid_argument);
}

TEST_CASE("maximal uniform fee on E1") {
  const FeeResult fee = max_uniform_fee(make_e1());
  CHECK(fee.alpha_star == doctest::Approx(40.0 / 2.22).epsilon(1e-12));  // 18.018018...
  CHECK(fee.tau_star == doctest::Approx(0.9445).epsilon(1e-10));
  CHECK(fee.binding_model == "M1");
}

TEST_CASE("fee clamps to zero when even tau = 0 is infeasible") {
  MarketInstance tight = make_e1();
  tight.models[0].buyers[0].reserve = 2.0;  // alpha* = 0.8 / 2.22 < 1
  const FeeResult fee = max_uniform_fee(tight);
  CHECK(fee.alpha_star < 1.0);
  CHECK(fee.tau_star == 0.0);
}

TEST_CASE("at the maximal fee the binding model touches its minimum reserve") {
  const MarketInstance e1 = make_e1();
  const FeeResult fee = max_uniform_fee(e1);
  QuotationParams params = QuotationParams::from_fee(fee.tau_star);
  SolverConfig config;
  config.epsilon = 1e-12;
  const EquilibriumReport report = solve(e1, params, config);
  REQUIRE(report.converged);
  CHECK(std::abs(report.prices.buyer[0] - 100.0) <= 1e-8);

  // A nudge past tau* breaks buyer feasibility.
  const EquilibriumReport pushed = solve(e1, QuotationParams::from_fee(fee.tau_star + 1e-6), config);
  CHECK_FALSE(pushed.acceptance.buyer_side_ok());
}

TEST_CASE("bisection oracle confirms the closed-form fee") {
  const MarketInstance e1 = make_e1();
  const FeeResult fee = max_uniform_fee(e1);

  auto feasible_at = [&](double tau) {
    SolverConfig config;
    config.epsilon = 1e-12;
    // Near tau = 1 the price scale blows up and the normalized residual
    // plateaus above epsilon; prices are long converged by then.
    config.max_iterations = 2000;
    return solve(e1, QuotationParams::from_fee(tau), config).acceptance.buyer_side_ok();
  };
  double lo = 0.0, hi = 1.0 - 1e-9;
  REQUIRE(feasible_at(lo));
  REQUIRE_FALSE(feasible_at(hi));
  while (hi - lo > 1e-7) {
    const double mid = 0.5 * (lo + hi);
    (feasible_at(mid) ? lo : hi) = mid;
  }
  CHECK(std::abs(lo - fee.tau_star) <= 1e-6);
}

TEST_CASE("buyer price is affine increasing in the grossing factor") {
  const MarketInstance e2 = make_e2();
  SolverConfig config;
  config.epsilon = 1e-12;
  QuotationParams a;
  a.fee_alpha = 1.0;
  QuotationParams b;
  b.fee_alpha = 2.5;
  const double p1 = solve(e2, a, config).prices.buyer[0];
  const double p2 = solve(e2, b, config).prices.buyer[0];
  const double slope = (p2 - p1) / 1.5;
  // (kappa_m + (1 + delta) S) / (1 - rho) = 1.4 / 0.4
  CHECK(slope == doctest::Approx(3.5).epsilon(1e-8));
  CHECK(p2 > p1);
}

}  // TEST_SUITE
