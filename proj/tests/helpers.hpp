// Shared fixtures: the two hand-solved single-model markets E1 and E2 used
// throughout the tests, plus small builders.
#pragma once

#include "triplewin/generator.hpp"
#include "triplewin/market.hpp"

namespace triplewin::testing {

// One model, one dataset, one buyer:
//   kappa_D = 0.2, SV = 1, omega = 0.6, R = 100, kappa_M = 2.0, delta = 0.1
// Fixed point: p_B = (2 + 1.1 * 0.2) / (1 - 0.6) = 5.55,
//              p_D = 0.2 + 0.6 * 5.55 / 1.1 = 3.22727...
inline MarketInstance make_e1() {
  MarketInstance e1;
  e1.datasets = {{"D1", 0.2}};
  ModelSpec m;
  m.id = "M1";
  m.kappa_m = 2.0;
  m.delta = 0.1;
  m.dataset_ids = {"D1"};
  m.buyers = {{"B1", 0.6, 100.0}};
  e1.models = {m};
  e1.shapley = {{"M1", {{"D1", 1.0}}}};
  e1.caps = {{{"D1", "M1"}, 3.0}};
  return e1;
}

// One model, two datasets, two buyers:
//   kappa_D = (0.1, 0.3), SV = (0.4, 0.6), omega = (0.3, 0.3),
//   R = (100, 100), kappa_M = 1.0, delta = 0
// Fixed point: p_B = 1.4 / 0.4 = 3.5 (both buyers), p_D = (0.94, 1.56).
inline MarketInstance make_e2() {
  MarketInstance e2;
  e2.datasets = {{"D1", 0.1}, {"D2", 0.3}};
  ModelSpec m;
  m.id = "M1";
  m.kappa_m = 1.0;
  m.delta = 0.0;
  m.dataset_ids = {"D1", "D2"};
  m.buyers = {{"B1", 0.3, 100.0}, {"B2", 0.3, 100.0}};
  e2.models = {m};
  e2.shapley = {{"M1", {{"D1", 0.4}, {"D2", 0.6}}}};
  e2.caps = {{{"D1", "M1"}, 2.0}, {{"D2", "M1"}, 2.5}};
  return e2;
}

inline MarketInstance random_instance(std::uint64_t seed, double rho = 0.6) {
  GeneratorConfig config;
  config.rho = rho;
  return generate(config, seed);
}

}  // namespace triplewin::testing
