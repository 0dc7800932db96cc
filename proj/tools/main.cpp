// Command-line entry point: generation, solving, analysis, experiments.
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "triplewin/baselines.hpp"
#include "triplewin/experiments.hpp"
#include "triplewin/feasibility.hpp"
#include "triplewin/generator.hpp"
#include "triplewin/market.hpp"
#include "triplewin/shapley.hpp"
#include "triplewin/solver.hpp"

namespace {

using nlohmann::json;
using namespace triplewin;

constexpr int kExitFailure = 1;
constexpr int kExitNoConvergence = 3;

std::string fixed6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

json prices_to_json(const MarketInstance& instance, const PriceVector& prices) {
  json buyer = json::array();
  json data = json::array();
  std::size_t be = 0, de = 0;
  for (const auto& m : instance.models) {
    for (const auto& b : m.buyers)
      buyer.push_back({{"buyer", b.buyer_id}, {"model", m.id}, {"price", prices.buyer[be++]}});
    for (const auto& id : m.dataset_ids)
      data.push_back({{"dataset", id}, {"model", m.id}, {"price", prices.data[de++]}});
  }
  return {{"buyer", std::move(buyer)}, {"data", std::move(data)}};
}

void print_prices(const MarketInstance& instance, const PriceVector& prices) {
  std::size_t be = 0, de = 0;
  for (const auto& m : instance.models) {
    for (const auto& b : m.buyers)
      std::cout << "p[" << b.buyer_id << "->" << m.id << "] = " << fixed6(prices.buyer[be++]) << "\n";
    for (const auto& id : m.dataset_ids)
      std::cout << "p[" << id << "->" << m.id << "] = " << fixed6(prices.data[de++]) << "\n";
  }
}

MarketInstance load_validated(const std::string& path) {
  MarketInstance instance = load_instance(path);
  const ValidationReport report = validate(instance);
  if (!report.pass()) {
    std::string msg = "invalid instance " + path + ": " + report.violations[0].field + ": " +
                      report.violations[0].invariant + " (got " + report.violations[0].value + ")";
    if (report.violations.size() > 1)
      msg += " and " + std::to_string(report.violations.size() - 1) + " more violation(s)";
    throw std::runtime_error(msg);
  }
  return instance;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write file: " + path);
  out << text;
}

struct SolveFlags {
  std::string instance_path;
  std::string out_path;
  std::string trace_path;
  SolverConfig config;
  double alpha_kd = 1.0, alpha_km = 1.0, alpha_delta = 1.0, tau = 0.0;
  std::string schedule = "sync";

  QuotationParams params() const {
    QuotationParams p = QuotationParams::from_fee(tau);
    p.alpha_kappa_d = alpha_kd;
    p.alpha_kappa_m = alpha_km;
    p.alpha_delta = alpha_delta;
    return p;
  }

  SolverConfig solver() const {
    SolverConfig c = config;
    if (schedule == "sync")
      c.schedule = Schedule::synchronous;
    else if (schedule == "block")
      c.schedule = Schedule::block_alternating;
    else
      c.schedule = Schedule::async_random_fair;
    return c;
  }
};

int run_solve(const SolveFlags& flags) {
  const MarketInstance instance = load_validated(flags.instance_path);
  const EquilibriumReport report = solve(instance, flags.params(), flags.solver());

  print_prices(instance, report.prices);
  std::cout << "iterations = " << report.iterations << "\n"
            << "residual = " << format_double(report.final_residual()) << "\n"
            << "converged = " << (report.converged ? "yes" : "no") << "\n"
            << "success_rate = " << fixed6(report.acceptance.success_rate) << "\n"
            << "feasible = " << (report.acceptance.all_accepted() ? "yes" : "no") << "\n";

  if (!flags.out_path.empty()) {
    json doc;
    doc["converged"] = report.converged;
    doc["iterations"] = report.iterations;
    doc["schedule"] = schedule_name(report.schedule);
    doc["epsilon"] = flags.config.epsilon;
    doc["residual"] = report.final_residual();
    doc["residual_trace"] = report.residual_trace;
    doc["prices"] = prices_to_json(instance, report.prices);
    doc["acceptance"] = {{"success_rate", report.acceptance.success_rate},
                         {"feasible", report.acceptance.all_accepted()}};
    double surplus_sum = 0.0, profit_sum = 0.0;
    for (double v : buyer_surplus(instance, report.prices)) surplus_sum += v;
    for (double v : seller_profit(instance, report.prices)) profit_sum += v;
    doc["metrics"] = {{"total_buyer_surplus", surplus_sum}, {"total_seller_profit", profit_sum}};
    write_text(flags.out_path, doc.dump(2) + "\n");
  }
  if (!flags.trace_path.empty())
    write_trace_csv(flags.trace_path, flags.instance_path, report);

  if (!report.converged) {
    std::cerr << "error: no convergence within " << flags.config.max_iterations
              << " iterations (residual " << format_double(report.final_residual()) << ")\n";
    return kExitNoConvergence;
  }
  return 0;
}

std::vector<double> linspace(double lo, double hi, int points) {
  std::vector<double> grid;
  if (points == 1) {
    grid.push_back(lo);
    return grid;
  }
  for (int i = 0; i < points; ++i)
    grid.push_back(lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(points - 1));
  return grid;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"TripleWin market equilibrium engine"};
  app.require_subcommand(1);

  // generate
  auto* cmd_generate = app.add_subcommand("generate", "Generate a synthetic market instance");
  std::string gen_out;
  std::uint64_t gen_seed = 1;
  GeneratorConfig gen_config;
  bool single_buyer = false;
  cmd_generate->add_option("--out", gen_out, "Instance file to write")->required();
  cmd_generate->add_option("--seed", gen_seed, "RNG seed");
  cmd_generate->add_option("--rho", gen_config.rho, "Total buyer weight per model");
  cmd_generate->add_option("--models", gen_config.n_models, "Number of models");
  cmd_generate->add_option("--datasets", gen_config.n_datasets, "Number of datasets");
  cmd_generate->add_flag("--single-buyer", single_buyer, "One buyer per model");

  // solve
  auto* cmd_solve = app.add_subcommand("solve", "Iterate the quotation operator to the fixed point");
  SolveFlags solve_flags;
  cmd_solve->add_option("--instance", solve_flags.instance_path, "Instance file")->required();
  cmd_solve->add_option("--out", solve_flags.out_path, "Equilibrium report (JSON)");
  cmd_solve->add_option("--trace-out", solve_flags.trace_path, "Residual trace (CSV)");
  cmd_solve->add_option("--epsilon", solve_flags.config.epsilon, "Stopping tolerance");
  cmd_solve->add_option("--max-iter", solve_flags.config.max_iterations, "Iteration cap");
  cmd_solve->add_option("--schedule", solve_flags.schedule, "sync | block | async")
      ->check(CLI::IsMember({"sync", "block", "async"}));
  cmd_solve->add_option("--seed", solve_flags.config.seed, "Seed for the async schedule");
  cmd_solve->add_option("--alpha-kd", solve_flags.alpha_kd, "Dataset offset scaling");
  cmd_solve->add_option("--alpha-km", solve_flags.alpha_km, "Model offset scaling");
  cmd_solve->add_option("--alpha-delta", solve_flags.alpha_delta, "Margin scaling");
  cmd_solve->add_option("--tau", solve_flags.tau, "Uniform platform fee in [0,1)");

  // shapley
  auto* cmd_shapley = app.add_subcommand("shapley", "Subset-utility file to normalized shares");
  std::string shapley_utilities, shapley_out;
  cmd_shapley->add_option("--utilities", shapley_utilities, "Subset-utility file")->required();
  cmd_shapley->add_option("--out", shapley_out, "Shapley table (JSON)");

  // envelope
  auto* cmd_envelope = app.add_subcommand("envelope", "Analytic and numerical feasibility frontiers");
  std::string env_instance, env_out, env_panel = "kd-delta";
  double env_alpha_kd = 1.0, env_alpha_km = 1.0, env_alpha_delta = 1.0;
  double env_x_min = 0.5, env_x_max = 4.0;
  int env_x_points = 8;
  bool env_no_numeric = false;
  cmd_envelope->add_option("--instance", env_instance, "Instance file")->required();
  cmd_envelope->add_option("--out", env_out, "Frontier CSV")->required();
  cmd_envelope->add_option("--panel", env_panel, "kd-delta | km-delta | kd-km")
      ->check(CLI::IsMember({"kd-delta", "km-delta", "kd-km"}));
  cmd_envelope->add_option("--alpha-kd", env_alpha_kd, "Fixed dataset offset scaling");
  cmd_envelope->add_option("--alpha-km", env_alpha_km, "Fixed model offset scaling");
  cmd_envelope->add_option("--alpha-delta", env_alpha_delta, "Fixed margin scaling");
  cmd_envelope->add_option("--x-min", env_x_min, "Grid start");
  cmd_envelope->add_option("--x-max", env_x_max, "Grid end");
  cmd_envelope->add_option("--x-points", env_x_points, "Grid size")->check(CLI::PositiveNumber);
  cmd_envelope->add_flag("--no-numeric", env_no_numeric, "Skip the bisection traces");

  // fee
  auto* cmd_fee = app.add_subcommand("fee", "Maximal uniform platform fee");
  std::string fee_instance, fee_out;
  cmd_fee->add_option("--instance", fee_instance, "Instance file")->required();
  cmd_fee->add_option("--out", fee_out, "Fee report (JSON)");

  // baseline
  auto* cmd_baseline = app.add_subcommand("baseline", "Run a pricing method once");
  std::string baseline_instance, baseline_out, baseline_method;
  BaselineConfig baseline_config;
  cmd_baseline->add_option("--instance", baseline_instance, "Instance file")->required();
  cmd_baseline->add_option("--method", baseline_method, "triplewin | sf | df | bc")
      ->required()
      ->check(CLI::IsMember({"triplewin", "sf", "df", "bc"}));
  cmd_baseline->add_option("--quantile", baseline_config.quantile, "Broker-centric reserve quantile")
      ->check(CLI::Range(0.0, 1.0));
  cmd_baseline->add_option("--out", baseline_out, "Price report (JSON)");

  // experiment
  auto* cmd_experiment = app.add_subcommand("experiment", "Reproduce a harness experiment");
  cmd_experiment->require_subcommand(1);
  std::string exp_out, exp_instance;
  ExperimentConfig exp_config;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--out", exp_out, "CSV output path")->required();
    sub->add_option("--seed", exp_config.base_seed, "Base seed");
    sub->add_option("--seeds", exp_config.seeds, "Seeds per cell")->check(CLI::PositiveNumber);
    sub->add_option("--models", exp_config.gen.n_models, "Models per market");
    sub->add_option("--datasets", exp_config.gen.n_datasets, "Datasets per market");
  };
  auto* cmd_exp_fairness = cmd_experiment->add_subcommand("fairness", "Shapley alignment sweep");
  add_common(cmd_exp_fairness);
  auto* cmd_exp_stress = cmd_experiment->add_subcommand("stress", "Success rate under scalings");
  add_common(cmd_exp_stress);
  auto* cmd_exp_propagation = cmd_experiment->add_subcommand("propagation", "Stagewise incidence");
  add_common(cmd_exp_propagation);
  auto* cmd_exp_envelope = cmd_experiment->add_subcommand("envelope", "Frontier panels");
  add_common(cmd_exp_envelope);
  cmd_exp_envelope->add_option("--instance", exp_instance, "Trace this instance instead");

  try {
    app.parse(argc, argv);

    if (*cmd_generate) {
      if (single_buyer) {
        gen_config.min_buyers_per_model = 1;
        gen_config.max_buyers_per_model = 1;
      }
      const MarketInstance instance = generate(gen_config, gen_seed);
      save_instance(instance, gen_out);
      std::cout << "wrote " << gen_out << " (" << instance.models.size() << " models, "
                << instance.dimension() << " edges)\n";
      return 0;
    }

    if (*cmd_solve) return run_solve(solve_flags);

    if (*cmd_shapley) {
      const auto utilities = load_subset_utilities(shapley_utilities);
      const ShapleyNormalization result = shapley_table(utilities);
      for (const auto& warning : result.clamp_log)
        std::cerr << "warning: clamped " << warning << "\n";
      for (const auto& [model, col] : result.table)
        for (const auto& [dataset, sv] : col)
          std::cout << "sv[" << dataset << "|" << model << "] = " << fixed6(sv) << "\n";
      if (!shapley_out.empty()) {
        json shapley = json::array();
        for (const auto& [model, col] : result.table) {
          json shares = json::object();
          for (const auto& [dataset, sv] : col) shares[dataset] = sv;
          shapley.push_back({{"model", model}, {"shares", std::move(shares)}});
        }
        write_text(shapley_out, json{{"shapley", std::move(shapley)}}.dump(2) + "\n");
      }
      return 0;
    }

    if (*cmd_envelope) {
      const MarketInstance instance = load_validated(env_instance);
      EnvelopePanel panel = EnvelopePanel::kd_delta;
      double fixed_third = env_alpha_km;
      if (env_panel == "km-delta") {
        panel = EnvelopePanel::km_delta;
        fixed_third = env_alpha_kd;
      } else if (env_panel == "kd-km") {
        panel = EnvelopePanel::kd_km;
        fixed_third = env_alpha_delta;
      }
      const std::vector<double> grid = linspace(env_x_min, env_x_max, env_x_points);

      std::vector<FrontierPoint> points;
      if (env_no_numeric) {
        for (double x : grid) {
          FrontierPoint p;
          p.x = x;
          const auto sample = [&] {
            const double one[] = {x};
            switch (panel) {
              case EnvelopePanel::kd_delta:
                return envelope_alpha_delta_vs_alpha_kd(instance, fixed_third, one)[0];
              case EnvelopePanel::km_delta:
                return envelope_alpha_delta_vs_alpha_km(instance, fixed_third, one)[0];
              default:
                return envelope_alpha_km_vs_alpha_kd(instance, fixed_third, one)[0];
            }
          }();
          p.analytic_max = sample.feasible_any ? sample.y_max
                                               : -std::numeric_limits<double>::infinity();
          p.binding_model = sample.binding_model;
          p.binding_buyer = sample.binding_buyer;
          points.push_back(std::move(p));
        }
      } else {
        points = numerical_frontier(instance, panel, fixed_third, grid);
      }
      write_frontier_csv(env_out, points);
      std::cout << "wrote " << env_out << " (" << points.size() << " grid points, panel "
                << panel_name(panel) << ")\n";
      return 0;
    }

    if (*cmd_fee) {
      const MarketInstance instance = load_validated(fee_instance);
      const FeeResult fee = max_uniform_fee(instance);
      std::cout << "alpha_star = " << fixed6(fee.alpha_star) << "\n"
                << "tau_star = " << fixed6(fee.tau_star) << "\n"
                << "binding_model = " << fee.binding_model << "\n";
      if (!fee_out.empty())
        write_text(fee_out, json{{"alpha_star", fee.alpha_star},
                                 {"tau_star", fee.tau_star},
                                 {"binding_model", fee.binding_model}}
                                    .dump(2) +
                                "\n");
      return 0;
    }

    if (*cmd_baseline) {
      const MarketInstance instance = load_validated(baseline_instance);
      const Method method = *method_from_name(baseline_method);
      PriceVector prices;
      if (method == Method::triplewin) {
        const EquilibriumReport report = solve(instance);
        if (!report.converged) {
          std::cerr << "error: no convergence\n";
          return kExitNoConvergence;
        }
        prices = report.prices;
      } else {
        baseline_config.method = method;
        prices = baseline_prices(instance, baseline_config.method, baseline_config.quantile);
      }
      print_prices(instance, prices);
      const AcceptanceReport acceptance = acceptance_check(instance, prices);
      std::cout << "success_rate = " << fixed6(acceptance.success_rate) << "\n";
      if (!baseline_out.empty()) {
        json doc;
        doc["method"] = method_name(method);
        doc["prices"] = prices_to_json(instance, prices);
        doc["acceptance"] = {{"success_rate", acceptance.success_rate},
                             {"feasible", acceptance.all_accepted()}};
        write_text(baseline_out, doc.dump(2) + "\n");
      }
      return 0;
    }

    if (*cmd_exp_fairness) {
      const double rho_grid[] = {0.4, 0.6, 0.8, 0.99};
      const Method methods[] = {Method::triplewin, Method::supply_first, Method::demand_first,
                                Method::broker_centric};
      const auto records = fairness_experiment(exp_config, rho_grid, methods);
      std::size_t skipped = 0;
      std::string last_model;
      for (const auto& r : records)
        if (std::isnan(r.spearman) && r.model != last_model) {
          last_model = r.model;
          ++skipped;
        }
      if (skipped > 0)
        std::cerr << "note: " << skipped
                  << " model(s) with fewer than two datasets skipped for spearman\n";
      write_fairness_csv(exp_out, records);
      std::cout << "wrote " << exp_out << "\n";
      return 0;
    }
    if (*cmd_exp_stress) {
      const double alpha_r[] = {0.25, 0.5, 0.75, 1.0, 1.5, 2.0};
      const double alpha_delta[] = {1.0, 2.0, 5.0, 10.0, 20.0, 50.0, 100.0, 200.0};
      const Method methods[] = {Method::triplewin, Method::supply_first, Method::demand_first,
                                Method::broker_centric};
      write_stress_csv(exp_out, stress_experiment(exp_config, alpha_r, alpha_delta, methods));
      std::cout << "wrote " << exp_out << "\n";
      return 0;
    }
    if (*cmd_exp_propagation) {
      const Method methods[] = {Method::triplewin, Method::supply_first, Method::demand_first,
                                Method::broker_centric};
      write_propagation_csv(exp_out, propagation_experiment(exp_config, methods));
      std::cout << "wrote " << exp_out << "\n";
      return 0;
    }
    if (*cmd_exp_envelope) {
      MarketInstance instance;
      if (!exp_instance.empty()) {
        instance = load_validated(exp_instance);
      } else {
        GeneratorConfig gen = exp_config.gen;
        gen.min_buyers_per_model = 1;
        gen.max_buyers_per_model = 1;  // single-buyer markets keep the frontiers tight
        instance = generate(gen, exp_config.base_seed);
      }
      const double grid[] = {0.5, 1.0, 1.5, 2.0, 3.0, 4.0};
      write_envelope_csv(exp_out, envelope_experiment(instance, grid));
      std::cout << "wrote " << exp_out << "\n";
      return 0;
    }
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitFailure;
  }
  return 0;
}
