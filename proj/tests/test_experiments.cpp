#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "helpers.hpp"
#include "triplewin/experiments.hpp"

using namespace triplewin;

namespace {

std::string first_line(const std::string& path) {
  std::ifstream in(path);
  std::string line;
  std::getline(in, line);
  return line;
}

}  // namespace

TEST_SUITE("experiments") {

TEST_CASE("spearman basics") {
  const double x[] = {1.0, 2.0, 3.0, 4.0};
  const double inc[] = {0.1, 0.5, 0.7, 0.9};
  const double dec[] = {4.0, 3.0, 2.0, 1.0};
  CHECK(spearman(x, inc) == doctest::Approx(1.0));
  CHECK(spearman(x, dec) == doctest::Approx(-1.0));

  const double tied_x[] = {0.5, 0.5};
  const double tied_y[] = {0.3, 0.3};
  CHECK(spearman(tied_x, tied_y) == 1.0);  // both sides fully tied

  const double vary[] = {0.1, 0.9};
  CHECK(spearman(tied_x, vary) == 0.0);

  const double single[] = {1.0};
  CHECK(std::isnan(spearman(single, single)));
}

TEST_CASE("spearman uses average ranks on ties") {
  const double x[] = {1.0, 2.0, 2.0, 3.0};
  const double y[] = {10.0, 20.0, 20.0, 30.0};
  CHECK(spearman(x, y) == doctest::Approx(1.0));
}

TEST_CASE("surplus and profit metrics") {
  const MarketInstance e1 = testing::make_e1();
  const EquilibriumReport report = solve(e1);
  const std::vector<double> surplus = buyer_surplus(e1, report.prices);
  const std::vector<double> profit = seller_profit(e1, report.prices);
  CHECK(surplus[0] == doctest::Approx(100.0 - 5.55).epsilon(1e-9));
  CHECK(profit[0] == doctest::Approx(0.6 * 5.55 / 1.1).epsilon(1e-9));
}

TEST_CASE("scale_instance rescales offsets, margins and reserves") {
  const MarketInstance e1 = testing::make_e1();
  const MarketInstance scaled = scale_instance(e1, 2.0, 3.0, 4.0, 0.5);
  CHECK(scaled.datasets[0].kappa_d == doctest::Approx(0.4));
  CHECK(scaled.models[0].kappa_m == doctest::Approx(6.0));
  CHECK(scaled.models[0].delta == doctest::Approx(0.4));
  CHECK(scaled.models[0].buyers[0].reserve == doctest::Approx(50.0));
  CHECK(scaled.caps == e1.caps);
}

TEST_CASE("revenue shares follow kappa_d plus a model constant times SV") {
  // At the fixed point every data price is kappa_d + c_j * SV with
  // c_j = W_j / (1 + delta_j); this is what lines the shares up with the
  // Shapley column as rho grows.
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const MarketInstance instance = testing::random_instance(seed);
    const EquilibriumReport report = solve(instance);
    REQUIRE(report.converged);
    const std::vector<double> w = effective_revenue(instance, report.prices);

    std::size_t de = 0;
    for (std::size_t j = 0; j < instance.models.size(); ++j) {
      const ModelSpec& m = instance.models[j];
      const double c = w[j] / (1.0 + m.delta);
      for (const auto& id : m.dataset_ids) {
        const double predicted = instance.dataset_offset(id) + instance.shapley_share(m.id, id) * c;
        CHECK(std::abs(report.prices.data[de] - predicted) <= 1e-9);
        ++de;
      }
    }
  }
}

TEST_CASE("fairness experiment aligns with shapley as rho grows") {
  ExperimentConfig config;
  config.seeds = 4;
  const double rho_grid[] = {0.4, 0.99};
  const Method methods[] = {Method::triplewin, Method::supply_first};
  const auto records = fairness_experiment(config, rho_grid, methods);
  REQUIRE_FALSE(records.empty());

  auto mean_spearman = [&](double rho, Method method) {
    double sum = 0.0;
    int count = 0;
    std::string last_model;
    for (const auto& r : records) {
      if (r.rho != rho || r.method != method || r.model == last_model) continue;
      if (std::isnan(r.spearman)) continue;
      last_model = r.model;
      sum += r.spearman;
      ++count;
    }
    REQUIRE(count > 0);
    return sum / count;
  };

  const double tw_low = mean_spearman(0.4, Method::triplewin);
  const double tw_high = mean_spearman(0.99, Method::triplewin);
  CHECK(tw_high >= 0.95);
  CHECK(tw_high >= tw_low - 1e-12);

  // Shares and the shapley column are simplex points: both columns of the
  // scatter live in (0, 1).
  for (const auto& r : records) {
    CHECK(r.sv > 0.0);
    CHECK(r.sv < 1.0);
    CHECK(r.share > 0.0);
    CHECK(r.share < 1.0);
  }
}

TEST_CASE("fairness experiment is reproducible") {
  ExperimentConfig config;
  config.seeds = 2;
  const double rho_grid[] = {0.6};
  const Method methods[] = {Method::triplewin};
  const auto a = fairness_experiment(config, rho_grid, methods);
  const auto b = fairness_experiment(config, rho_grid, methods);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].model == b[i].model);
    CHECK(a[i].spearman == b[i].spearman);
    CHECK(a[i].share == b[i].share);
  }
}

TEST_CASE("stress experiment monotone trends") {
  ExperimentConfig config;
  config.seeds = 5;
  const double alpha_r[] = {0.25, 0.5, 1.0, 10.0};
  const double alpha_delta[] = {1.0, 20.0, 200.0};
  const Method methods[] = {Method::triplewin};
  const auto records = stress_experiment(config, alpha_r, alpha_delta, methods);

  auto rate = [&](const std::string& axis, double value) {
    for (const auto& r : records)
      if (r.axis == axis && r.value == value) return r.success_rate;
    FAIL("missing record");
    return 0.0;
  };

  CHECK(rate("alpha_r", 0.25) <= rate("alpha_r", 0.5) + 1e-12);
  CHECK(rate("alpha_r", 0.5) <= rate("alpha_r", 1.0) + 1e-12);
  CHECK(rate("alpha_r", 10.0) == 1.0);  // every reserve clears the closed-form price

  CHECK(rate("alpha_delta", 1.0) >= rate("alpha_delta", 20.0) - 1e-12);
  CHECK(rate("alpha_delta", 20.0) >= rate("alpha_delta", 200.0) - 1e-12);
}

TEST_CASE("propagation stages") {
  ExperimentConfig config;
  config.seeds = 3;
  const Method methods[] = {Method::triplewin, Method::demand_first};
  const auto records = propagation_experiment(config, methods);
  REQUIRE_FALSE(records.empty());
  for (const auto& r : records) {
    CHECK(std::isfinite(r.value));
    CHECK(std::abs(r.value) <= 1.0 + 1e-12);  // normalized by the per-instance max
  }

  // Seller profit at the coupled fixed point sits on or above the floor.
  for (const auto& r : records)
    if (r.method == Method::triplewin && r.stage == "converged" && r.side == "seller_profit")
      CHECK(r.value >= -1e-9);
}

TEST_CASE("converged stage is stationary") {
  const MarketInstance instance = testing::random_instance(2);
  const PropagationTrace trace = staged_propagation(instance, Method::triplewin, 5);
  const PriceVector next = joint_operator(instance, trace.converged);
  for (std::size_t e = 0; e < next.buyer.size(); ++e)
    CHECK(std::abs(next.buyer[e] - trace.converged.buyer[e]) <= 10 * 1e-10);
  for (std::size_t e = 0; e < next.data.size(); ++e)
    CHECK(std::abs(next.data[e] - trace.converged.data[e]) <= 10 * 1e-10);
}

TEST_CASE("envelope experiment output") {
  const MarketInstance e1 = testing::make_e1();
  const double grid[] = {1.0, 2.0};
  const auto records = envelope_experiment(e1, grid);
  REQUIRE(records.size() == 6);  // three panels, two points each
  for (const auto& r : records) {
    if (std::isnan(r.numeric_y) || std::isinf(r.analytic_y)) continue;
    CHECK(r.numeric_y >= r.analytic_y - 1e-5 * std::max(1.0, r.analytic_y));
  }
}

TEST_CASE("csv files carry the documented headers") {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "triplewin_csv_test";
  fs::create_directories(dir);

  write_fairness_csv((dir / "fairness.csv").string(),
                     std::vector<FairnessRecord>{{0.4, Method::triplewin, "s1/M1", 1.0, 0.5, 0.5}});
  CHECK(first_line((dir / "fairness.csv").string()) == "rho,method,model,spearman,sv,share");

  write_stress_csv((dir / "stress.csv").string(),
                   std::vector<StressRecord>{{"alpha_r", 1.0, Method::supply_first, 0.75}});
  CHECK(first_line((dir / "stress.csv").string()) == "axis,value,method,success_rate");

  write_propagation_csv(
      (dir / "propagation.csv").string(),
      std::vector<PropagationRecord>{{"0", Method::triplewin, "buyer_surplus", 0.5}});
  CHECK(first_line((dir / "propagation.csv").string()) == "stage,method,side,value");

  write_envelope_csv((dir / "envelope.csv").string(),
                     std::vector<EnvelopeRecord>{{"kd_delta", 1.0, 2.0, 2.0}});
  CHECK(first_line((dir / "envelope.csv").string()) == "panel,x,analytic_y,numeric_y");

  std::vector<FrontierPoint> frontier(1);
  frontier[0].x = 1.0;
  frontier[0].analytic_max = 1890.0;
  frontier[0].numeric_max = 1890.0;
  frontier[0].resolved = true;
  frontier[0].binding_model = "M1";
  frontier[0].binding_buyer = "B1";
  write_frontier_csv((dir / "frontier.csv").string(), frontier);
  CHECK(first_line((dir / "frontier.csv").string()) ==
        "axis1,axis2_analytic_max,axis2_numeric_max,binding_model,binding_buyer");

  const EquilibriumReport report = solve(testing::make_e1());
  write_trace_csv((dir / "trace.csv").string(), "e1", report);
  CHECK(first_line((dir / "trace.csv").string()) == "instance_id,schedule,iteration,residual");

  fs::remove_all(dir);
}

TEST_CASE("format_double is shortest round trip") {
  CHECK(format_double(0.1) == "0.1");
  CHECK(format_double(1890.0) == "1890");
  CHECK(format_double(std::numeric_limits<double>::infinity()) == "inf");
  CHECK(format_double(-std::numeric_limits<double>::infinity()) == "-inf");
  CHECK(format_double(std::numeric_limits<double>::quiet_NaN()) == "nan");
  const double v = 0.2 + 0.6 * 5.55 / 1.1;
  double back = 0.0;
  const std::string s = format_double(v);
  CHECK(std::stod(s) == v);
}

}  // TEST_SUITE
