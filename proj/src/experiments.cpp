#include "triplewin/experiments.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <stdexcept>

#include "triplewin/quotation.hpp"

namespace triplewin {

namespace {
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
}

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  (void)ec;
  return std::string(buf, ptr);
}

namespace {

std::vector<double> average_ranks(std::span<const double> values) {
  const std::size_t n = values.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(n, 0.0);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && values[order[j + 1]] == values[order[i]]) ++j;
    const double rank = 0.5 * static_cast<double>(i + j) + 1.0;  // average of tied positions
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = rank;
    i = j + 1;
  }
  return ranks;
}

}  // namespace

double spearman(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw std::invalid_argument("spearman needs equally sized vectors");
  if (x.size() < 2) return kNaN;
  const std::vector<double> rx = average_ranks(x);
  const std::vector<double> ry = average_ranks(y);
  const double n = static_cast<double>(x.size());
  double mean = 0.0;
  for (double r : rx) mean += r;
  mean /= n;

  double cov = 0.0, var_x = 0.0, var_y = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = rx[i] - mean;
    const double dy = ry[i] - mean;  // ranks share the same mean
    cov += dx * dy;
    var_x += dx * dx;
    var_y += dy * dy;
  }
  if (var_x == 0.0 && var_y == 0.0) return 1.0;  // both sides fully tied
  if (var_x == 0.0 || var_y == 0.0) return 0.0;
  return cov / std::sqrt(var_x * var_y);
}

std::vector<double> buyer_surplus(const MarketInstance& instance, const PriceVector& prices) {
  std::vector<double> out;
  out.reserve(prices.buyer.size());
  std::size_t be = 0;
  for (const auto& m : instance.models)
    for (const auto& b : m.buyers) out.push_back(b.reserve - prices.buyer[be++]);
  return out;
}

std::vector<double> seller_profit(const MarketInstance& instance, const PriceVector& prices) {
  std::vector<double> out;
  out.reserve(prices.data.size());
  std::size_t de = 0;
  for (const auto& m : instance.models)
    for (const auto& id : m.dataset_ids) out.push_back(prices.data[de++] - instance.dataset_offset(id));
  return out;
}

MarketInstance scale_instance(const MarketInstance& instance, double alpha_kd, double alpha_km,
                              double alpha_delta, double alpha_r) {
  if (!(alpha_kd > 0.0 && alpha_km > 0.0 && alpha_delta >= 0.0 && alpha_r > 0.0))
    throw std::invalid_argument("scale_instance: offset/reserve scalings must be positive");
  MarketInstance scaled = instance;
  for (auto& d : scaled.datasets) d.kappa_d *= alpha_kd;
  for (auto& m : scaled.models) {
    m.kappa_m *= alpha_km;
    m.delta *= alpha_delta;
    for (auto& b : m.buyers) b.reserve *= alpha_r;
  }
  return scaled;
}

namespace {

PriceVector method_prices(const MarketInstance& instance, Method method,
                          const ExperimentConfig& config) {
  if (method == Method::triplewin) return solve(instance, {}, config.solver).prices;
  return baseline_prices(instance, method, config.bc_quantile);
}

}  // namespace

std::vector<FairnessRecord> fairness_experiment(const ExperimentConfig& config,
                                                std::span<const double> rho_grid,
                                                std::span<const Method> methods) {
  struct Cell {
    std::vector<FairnessRecord> records;
  };
  const int n_seeds = config.seeds;
  std::vector<Cell> cells(rho_grid.size() * static_cast<std::size_t>(n_seeds));

#pragma omp parallel for schedule(dynamic) collapse(2)
  for (std::ptrdiff_t g = 0; g < static_cast<std::ptrdiff_t>(rho_grid.size()); ++g) {
    for (std::ptrdiff_t s = 0; s < n_seeds; ++s) {
      GeneratorConfig gen = config.gen;
      gen.rho = rho_grid[g];
      const std::uint64_t seed = config.base_seed + static_cast<std::uint64_t>(s);
      const MarketInstance instance = generate(gen, seed);

      Cell& cell = cells[static_cast<std::size_t>(g) * n_seeds + s];
      for (Method method : methods) {
        const PriceVector prices = method_prices(instance, method, config);
        std::size_t de = 0;
        for (const auto& m : instance.models) {
          std::vector<double> sv, share;
          double total = 0.0;
          for (std::size_t i = 0; i < m.dataset_ids.size(); ++i) total += prices.data[de + i];
          for (std::size_t i = 0; i < m.dataset_ids.size(); ++i) {
            sv.push_back(instance.shapley_share(m.id, m.dataset_ids[i]));
            share.push_back(prices.data[de + i] / total);
          }
          de += m.dataset_ids.size();

          const double rho_corr = spearman(sv, share);
          const std::string label = "s" + std::to_string(seed) + "/" + m.id;
          for (std::size_t i = 0; i < sv.size(); ++i)
            cell.records.push_back({rho_grid[g], method, label, rho_corr, sv[i], share[i]});
        }
      }
    }
  }

  std::vector<FairnessRecord> records;
  for (const Cell& cell : cells)
    records.insert(records.end(), cell.records.begin(), cell.records.end());
  return records;
}

std::vector<StressRecord> stress_experiment(const ExperimentConfig& config,
                                            std::span<const double> alpha_r_grid,
                                            std::span<const double> alpha_delta_grid,
                                            std::span<const Method> methods) {
  struct Task {
    std::string axis;
    double value = 0.0;
  };
  std::vector<Task> tasks;
  for (double v : alpha_r_grid) tasks.push_back({"alpha_r", v});
  for (double v : alpha_delta_grid) tasks.push_back({"alpha_delta", v});

  std::vector<std::vector<StressRecord>> per_task(tasks.size());

#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t t = 0; t < static_cast<std::ptrdiff_t>(tasks.size()); ++t) {
    const Task& task = tasks[t];
    std::vector<double> sums(methods.size(), 0.0);
    for (int s = 0; s < config.seeds; ++s) {
      const MarketInstance base = generate(config.gen, config.base_seed + static_cast<std::uint64_t>(s));
      const MarketInstance stressed =
          task.axis == "alpha_r" ? scale_instance(base, 1.0, 1.0, 1.0, task.value)
                                 : scale_instance(base, 1.0, 1.0, task.value, 1.0);
      for (std::size_t mi = 0; mi < methods.size(); ++mi) {
        const PriceVector prices = method_prices(stressed, methods[mi], config);
        sums[mi] += acceptance_check(stressed, prices).success_rate;
      }
    }
    for (std::size_t mi = 0; mi < methods.size(); ++mi)
      per_task[t].push_back(
          {task.axis, task.value, methods[mi], sums[mi] / static_cast<double>(config.seeds)});
  }

  std::vector<StressRecord> records;
  for (const auto& chunk : per_task) records.insert(records.end(), chunk.begin(), chunk.end());
  return records;
}

std::vector<PropagationRecord> propagation_experiment(const ExperimentConfig& config,
                                                      std::span<const Method> methods) {
  struct Sample {
    std::string stage;
    Method method;
    std::vector<double> surplus, profit;
  };
  const int kRounds = 5;

  std::vector<std::vector<Sample>> per_seed(config.seeds);

#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t s = 0; s < config.seeds; ++s) {
    const MarketInstance instance =
        generate(config.gen, config.base_seed + static_cast<std::uint64_t>(s));
    for (Method method : methods) {
      const PropagationTrace trace =
          staged_propagation(instance, method, kRounds, config.solver, config.bc_quantile);
      auto emit = [&](const std::string& stage, const PriceVector& p) {
        per_seed[s].push_back(
            {stage, method, buyer_surplus(instance, p), seller_profit(instance, p)});
      };
      emit("0", trace.stages[0]);
      emit("1", trace.stages[1]);
      emit("5", trace.stages[kRounds]);
      emit("converged", trace.converged);
    }
  }

  std::vector<PropagationRecord> records;
  for (std::ptrdiff_t s = 0; s < config.seeds; ++s) {
    // Normalize by the per-instance max magnitude across methods, stages
    // and both sides, so distributions share one scale per market.
    double scale = 0.0;
    for (const Sample& sample : per_seed[s]) {
      for (double v : sample.surplus) scale = std::max(scale, std::abs(v));
      for (double v : sample.profit) scale = std::max(scale, std::abs(v));
    }
    if (scale == 0.0) scale = 1.0;
    for (const Sample& sample : per_seed[s]) {
      for (double v : sample.surplus)
        records.push_back({sample.stage, sample.method, "buyer_surplus", v / scale});
      for (double v : sample.profit)
        records.push_back({sample.stage, sample.method, "seller_profit", v / scale});
    }
  }
  return records;
}

std::vector<EnvelopeRecord> envelope_experiment(const MarketInstance& instance,
                                                std::span<const double> x_grid,
                                                const SolverConfig& solver) {
  std::vector<EnvelopeRecord> records;
  const EnvelopePanel panels[] = {EnvelopePanel::kd_delta, EnvelopePanel::km_delta,
                                  EnvelopePanel::kd_km};
  for (EnvelopePanel panel : panels) {
    const double fixed_third = 1.0;
    const std::vector<FrontierPoint> curve =
        numerical_frontier(instance, panel, fixed_third, x_grid, 1e-6, solver);
    for (const FrontierPoint& p : curve)
      records.push_back({panel_name(panel), p.x, p.analytic_max, p.resolved ? p.numeric_max : kNaN});
  }
  return records;
}

namespace {

std::ofstream open_csv(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write csv file: " + path);
  return out;
}

}  // namespace

void write_fairness_csv(const std::string& path, std::span<const FairnessRecord> records) {
  std::ofstream out = open_csv(path);
  out << "rho,method,model,spearman,sv,share\n";
  for (const auto& r : records)
    out << format_double(r.rho) << ',' << method_name(r.method) << ',' << r.model << ','
        << format_double(r.spearman) << ',' << format_double(r.sv) << ',' << format_double(r.share)
        << '\n';
}

void write_stress_csv(const std::string& path, std::span<const StressRecord> records) {
  std::ofstream out = open_csv(path);
  out << "axis,value,method,success_rate\n";
  for (const auto& r : records)
    out << r.axis << ',' << format_double(r.value) << ',' << method_name(r.method) << ','
        << format_double(r.success_rate) << '\n';
}

void write_propagation_csv(const std::string& path, std::span<const PropagationRecord> records) {
  std::ofstream out = open_csv(path);
  out << "stage,method,side,value\n";
  for (const auto& r : records)
    out << r.stage << ',' << method_name(r.method) << ',' << r.side << ','
        << format_double(r.value) << '\n';
}

void write_envelope_csv(const std::string& path, std::span<const EnvelopeRecord> records) {
  std::ofstream out = open_csv(path);
  out << "panel,x,analytic_y,numeric_y\n";
  for (const auto& r : records)
    out << r.panel << ',' << format_double(r.x) << ',' << format_double(r.analytic_y) << ','
        << format_double(r.numeric_y) << '\n';
}

void write_frontier_csv(const std::string& path, std::span<const FrontierPoint> points) {
  std::ofstream out = open_csv(path);
  out << "axis1,axis2_analytic_max,axis2_numeric_max,binding_model,binding_buyer\n";
  for (const auto& p : points)
    out << format_double(p.x) << ',' << format_double(p.analytic_max) << ','
        << (p.resolved ? format_double(p.numeric_max) : std::string()) << ',' << p.binding_model
        << ',' << p.binding_buyer << '\n';
}

void write_trace_csv(const std::string& path, const std::string& instance_id,
                     const EquilibriumReport& report) {
  std::ofstream out = open_csv(path);
  out << "instance_id,schedule,iteration,residual\n";
  for (std::size_t t = 0; t < report.residual_trace.size(); ++t)
    out << instance_id << ',' << schedule_name(report.schedule) << ',' << (t + 1) << ','
        << format_double(report.residual_trace[t]) << '\n';
}

}  // namespace triplewin
