#include <doctest.h>

#include <cmath>

#include "helpers.hpp"
#include "triplewin/baselines.hpp"
#include "triplewin/experiments.hpp"

using namespace triplewin;
using testing::make_e1;
using testing::make_e2;

TEST_SUITE("baselines") {

TEST_CASE("supply first posts caps and one downstream pass") {
  const MarketInstance e1 = make_e1();
  const PriceVector p = supply_first(e1);
  CHECK(p.data[0] == 3.0);
  CHECK(p.buyer[0] == doctest::Approx(2.0 + 1.1 * 3.0).epsilon(1e-14));  // 5.3
}

TEST_CASE("supply first at floor caps") {
  MarketInstance e2 = make_e2();
  e2.caps[{"D1", "M1"}] = 0.1;
  e2.caps[{"D2", "M1"}] = 0.3;
  const PriceVector p = supply_first(e2);
  CHECK(p.buyer[0] == doctest::Approx(1.0 + 1.0 * 0.4).epsilon(1e-14));  // kappa_m + (1+d) sum kappa_d
}

TEST_CASE("supply first without caps is a configuration error") {
  MarketInstance e1 = make_e1();
  e1.caps.clear();
  CHECK_THROWS_AS(supply_first(e1), std::invalid_argument);
}

TEST_CASE("supply first always clears the data side on generated markets") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const MarketInstance instance = testing::random_instance(seed);
    const AcceptanceReport report = acceptance_check(instance, supply_first(instance));
    for (bool ok : report.data_ok) CHECK(ok);
  }
}

TEST_CASE("demand first anchors buyers and runs one upstream pass") {
  const MarketInstance e1 = make_e1();
  const PriceVector p = demand_first(e1);
  CHECK(p.buyer[0] == 2.0);
  CHECK(p.data[0] == doctest::Approx(0.2 + 1.2 / 1.1).epsilon(1e-14));  // 1.290909...
}

TEST_CASE("demand first with zero buyer weights stays at the floors") {
  MarketInstance e1 = make_e1();
  e1.models[0].buyers[0].omega = 0.0;
  const PriceVector p = demand_first(e1);
  CHECK(p.data[0] == 0.2);
}

TEST_CASE("demand first always clears the data side") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const MarketInstance instance = testing::random_instance(seed);
    const AcceptanceReport report = acceptance_check(instance, demand_first(instance));
    for (bool ok : report.data_ok) CHECK(ok);
  }
}

TEST_CASE("neither one-sided baseline clears both sides under pressure") {
  int sf_failures = 0, df_failures = 0;
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    // Shrink reserves so the missing feedback loop shows.
    const MarketInstance squeezed =
        scale_instance(testing::random_instance(seed), 1.0, 1.0, 1.0, 0.12);
    if (!acceptance_check(squeezed, supply_first(squeezed)).all_accepted()) ++sf_failures;
    if (!acceptance_check(squeezed, demand_first(squeezed)).all_accepted()) ++df_failures;
  }
  CHECK(sf_failures > 0);
  CHECK(df_failures > 0);
}

TEST_CASE("broker centric on the single-buyer market") {
  const MarketInstance e1 = make_e1();
  const PriceVector p = broker_centric(e1, 0.5);
  CHECK(p.buyer[0] == 100.0);
  // markup = (100 - 2) / 0.2 - 1 = 489, then one upstream pass
  CHECK(p.data[0] == doctest::Approx(0.2 + 0.6 * 100.0 / 490.0).epsilon(1e-12));  // 0.322448...
}

TEST_CASE("broker centric clamps the markup at the cost floor") {
  MarketInstance e1 = make_e1();
  e1.models[0].buyers[0].reserve = 1.5;  // below kappa_m + sum kappa_d = 2.2
  const PriceVector p = broker_centric(e1, 0.5);
  CHECK(p.buyer[0] == doctest::Approx(2.2).epsilon(1e-14));
  // Upstream pass with markup 0.
  CHECK(p.data[0] == doctest::Approx(0.2 + 0.6 * 2.2).epsilon(1e-14));
}

TEST_CASE("broker centric interpolates the reserve quantile") {
  MarketInstance e2 = make_e2();
  e2.models[0].buyers[0].reserve = 25.0;
  e2.models[0].buyers[1].reserve = 100.0;
  const PriceVector p = broker_centric(e2, 0.5);
  CHECK(p.buyer[0] == doctest::Approx(62.5).epsilon(1e-14));
  CHECK(p.buyer[1] == doctest::Approx(62.5).epsilon(1e-14));

  CHECK(reserve_quantile({25.0, 100.0}, 0.0) == 25.0);
  CHECK(reserve_quantile({25.0, 100.0}, 1.0) == 100.0);
  CHECK(reserve_quantile({10.0, 20.0, 40.0}, 0.25) == doctest::Approx(15.0));
}

TEST_CASE("broker centric buyer price never exceeds the unclamped target") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const MarketInstance instance = testing::random_instance(seed);
    const PriceVector p = broker_centric(instance, 0.5);
    std::size_t be = 0;
    for (const auto& m : instance.models) {
      std::vector<double> reserves;
      for (const auto& b : m.buyers) reserves.push_back(b.reserve);
      const double target = reserve_quantile(reserves, 0.5);
      double floor = m.kappa_m;
      for (const auto& id : m.dataset_ids) floor += instance.dataset_offset(id);
      for (std::size_t k = 0; k < m.buyers.size(); ++k)
        CHECK(p.buyer[be++] <= std::max(target, floor) + 1e-12);
    }
  }
}

TEST_CASE("baselines are deterministic") {
  const MarketInstance instance = testing::random_instance(9);
  CHECK(supply_first(instance).buyer == supply_first(instance).buyer);
  CHECK(demand_first(instance).data == demand_first(instance).data);
  CHECK(broker_centric(instance).data == broker_centric(instance).data);
}

TEST_CASE("staged propagation of the coupled update") {
  const MarketInstance e1 = make_e1();
  const PropagationTrace trace = staged_propagation(e1, Method::triplewin, 5);
  REQUIRE(trace.stages.size() == 6);

  // Round 0 is the untouched initialization.
  CHECK(trace.stages[0].buyer[0] == 2.0);
  CHECK(trace.stages[0].data[0] == 3.0);

  // One sweep from the initialization, by hand.
  CHECK(trace.stages[1].buyer[0] == doctest::Approx(5.3).epsilon(1e-14));
  CHECK(trace.stages[1].data[0] == doctest::Approx(0.2 + 0.6 * 2.0 / 1.1).epsilon(1e-14));

  // The appended converged state matches solve().
  CHECK(trace.converged.buyer[0] == doctest::Approx(5.55).epsilon(1e-9));
  CHECK(residual(e1, trace.converged) <= 1e-10);
}

TEST_CASE("baseline passes are stationary under re-application") {
  const MarketInstance instance = testing::random_instance(3);
  for (Method method : {Method::supply_first, Method::demand_first, Method::broker_centric}) {
    const PropagationTrace trace = staged_propagation(instance, method, 5);
    REQUIRE(trace.stages.size() == 6);
    CHECK(trace.stages[1].buyer == trace.stages[5].buyer);
    CHECK(trace.stages[1].data == trace.stages[5].data);
    CHECK(trace.converged.buyer == trace.stages[1].buyer);
  }
}

TEST_CASE("method names round-trip") {
  for (Method method : {Method::triplewin, Method::supply_first, Method::demand_first,
                        Method::broker_centric})
    CHECK(method_from_name(method_name(method)) == method);
  CHECK_FALSE(method_from_name("nope").has_value());
}

}  // TEST_SUITE
