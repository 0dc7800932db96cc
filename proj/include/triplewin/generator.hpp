// Seeded synthetic market generator.
#pragma once

#include <cstdint>

#include "triplewin/market.hpp"

namespace triplewin {

struct GeneratorConfig {
  int n_datasets = 7;
  int n_models = 7;
  int min_buyers_per_model = 1;
  int max_buyers_per_model = 5;
  int min_datasets_per_model = 2;
  int max_datasets_per_model = 5;   // clamped to n_datasets
  double kappa_d_min = 0.10, kappa_d_max = 0.40;
  double kappa_m_min = 1.0, kappa_m_max = 5.0;
  double delta = 0.10;
  double reserve_min = 25.0, reserve_max = 100.0;
  double cap_min = 1.5, cap_max = 4.0;
  double rho = 0.6;                 // total buyer weight per model
  int buyer_pool = 0;               // 0 means 3 x n_models shared buyer ids
};

// Deterministic for a given (config, seed). Buyer weights are drawn
// positive and rescaled so they sum to rho exactly; Shapley columns are
// positive simplex draws (normalized Exp(1) variates).
MarketInstance generate(const GeneratorConfig& config, std::uint64_t seed);

}  // namespace triplewin
