// The three single-pass comparison pipelines and staged price propagation.
#pragma once

#include <optional>
#include <string>
#include <vector>

#include "triplewin/market.hpp"
#include "triplewin/solver.hpp"

namespace triplewin {

enum class Method { triplewin, supply_first, demand_first, broker_centric };

const char* method_name(Method method);          // "triplewin", "sf", "df", "bc"
std::optional<Method> method_from_name(const std::string& name);

struct BaselineConfig {
  Method method = Method::supply_first;
  double quantile = 0.5;      // broker-centric reserve quantile
  int propagation_rounds = 1;
};

// Sellers post their list caps; buyer prices follow from one downstream
// pass. Throws std::invalid_argument when a used data edge has no cap.
PriceVector supply_first(const MarketInstance& instance);

// Buyers anchor at the model offsets; data prices follow from one
// upstream pass.
PriceVector demand_first(const MarketInstance& instance);

// The producer targets the q-quantile of its buyers' reserves, derives the
// markup that reaches it from floor-level data expenditure (clamped at
// zero), posts that price to every buyer, and runs one upstream pass with
// the derived markup.
PriceVector broker_centric(const MarketInstance& instance, double quantile = 0.5);

// Linear interpolation between order statistics.
double reserve_quantile(std::vector<double> values, double q);

struct PropagationTrace {
  std::vector<PriceVector> stages;  // states after 0..rounds applications
  PriceVector converged;            // solve() result for triplewin, the
                                    // stationary pass for baselines
};

PriceVector baseline_prices(const MarketInstance& instance, Method method, double quantile = 0.5);

PropagationTrace staged_propagation(const MarketInstance& instance, Method method, int rounds,
                                    const SolverConfig& config = {}, double quantile = 0.5);

}  // namespace triplewin
