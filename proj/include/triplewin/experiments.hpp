// Desk-scale experiment harness: metrics, scaled-instance helpers, the
// four experiment drivers, and their CSV outputs.
#pragma once

#include <span>
#include <string>
#include <vector>

#include "triplewin/baselines.hpp"
#include "triplewin/feasibility.hpp"
#include "triplewin/generator.hpp"
#include "triplewin/market.hpp"
#include "triplewin/solver.hpp"

namespace triplewin {

struct ExperimentConfig {
  int seeds = 20;
  std::uint64_t base_seed = 1;
  GeneratorConfig gen;
  SolverConfig solver;
  double bc_quantile = 0.5;
};

// Spearman rank correlation with average ranks on ties. Two constant rank
// vectors correlate perfectly (1.0); exactly one constant vector yields 0.
// Fewer than two points is undefined and returns NaN.
double spearman(std::span<const double> x, std::span<const double> y);

std::vector<double> buyer_surplus(const MarketInstance& instance, const PriceVector& prices);
std::vector<double> seller_profit(const MarketInstance& instance, const PriceVector& prices);

// Materializes offset/margin/reserve scalings into a copy of the instance
// (caps are left untouched). Baselines have no scaling parameters, so
// stress sweeps rescale the instance itself for every method alike.
MarketInstance scale_instance(const MarketInstance& instance, double alpha_kd, double alpha_km,
                              double alpha_delta, double alpha_r);

struct FairnessRecord {
  double rho = 0.0;
  Method method = Method::triplewin;
  std::string model;     // "s<seed>/<model id>"
  double spearman = 0.0; // NaN marks a skipped (<2 datasets) model
  double sv = 0.0;
  double share = 0.0;
};

std::vector<FairnessRecord> fairness_experiment(const ExperimentConfig& config,
                                                std::span<const double> rho_grid,
                                                std::span<const Method> methods);

struct StressRecord {
  std::string axis;  // "alpha_r" or "alpha_delta"
  double value = 0.0;
  Method method = Method::triplewin;
  double success_rate = 0.0;  // mean per-instance success rate over seeds
};

std::vector<StressRecord> stress_experiment(const ExperimentConfig& config,
                                            std::span<const double> alpha_r_grid,
                                            std::span<const double> alpha_delta_grid,
                                            std::span<const Method> methods);

struct PropagationRecord {
  std::string stage;  // "0", "1", "5", "converged"
  Method method = Method::triplewin;
  std::string side;   // "buyer_surplus" or "seller_profit"
  double value = 0.0; // normalized by the per-instance max magnitude
};

std::vector<PropagationRecord> propagation_experiment(const ExperimentConfig& config,
                                                      std::span<const Method> methods);

struct EnvelopeRecord {
  std::string panel;  // "kd_delta", "km_delta", "kd_km"
  double x = 0.0;
  double analytic_y = 0.0;  // -inf marks a grid point no scaling can fix
  double numeric_y = 0.0;   // NaN when the bisection was unresolved
};

std::vector<EnvelopeRecord> envelope_experiment(const MarketInstance& instance,
                                                std::span<const double> x_grid,
                                                const SolverConfig& solver = {});

void write_fairness_csv(const std::string& path, std::span<const FairnessRecord> records);
void write_stress_csv(const std::string& path, std::span<const StressRecord> records);
void write_propagation_csv(const std::string& path, std::span<const PropagationRecord> records);
void write_envelope_csv(const std::string& path, std::span<const EnvelopeRecord> records);
void write_frontier_csv(const std::string& path, std::span<const FrontierPoint> points);
void write_trace_csv(const std::string& path, const std::string& instance_id,
                     const EquilibriumReport& report);

// Shortest round-trip decimal rendering, shared by every CSV writer.
std::string format_double(double v);

}  // namespace triplewin
