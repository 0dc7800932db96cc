// Fixed-point iteration to the unique market equilibrium, plus the
// closed-form equilibrium and the feasible upper bound used as oracles.
#pragma once

#include <cstdint>
#include <vector>

#include "triplewin/market.hpp"
#include "triplewin/quotation.hpp"

namespace triplewin {

enum class Schedule { synchronous, block_alternating, async_random_fair };

enum class InitPolicy {
  table_caps,           // p_D = cap (kappa_D when capless), p_B = kappa_M
  zeros,                //
  upper_bound_times_10, // 10 x feasible upper bound
  random_nonnegative,   // Unif[0, 2 x upper bound], seeded
};

struct SolverConfig {
  double epsilon = 1e-10;        // stop when ||Q(p)-p||_2 / sqrt(d) <= epsilon
  int max_iterations = 100000;   // full sweeps
  Schedule schedule = Schedule::synchronous;
  std::uint64_t seed = 0;        // async coordinate order and random init
  InitPolicy init = InitPolicy::table_caps;
};

struct EquilibriumReport {
  PriceVector prices;
  int iterations = 0;                  // full sweeps performed
  std::vector<double> residual_trace;  // one entry per sweep
  bool converged = false;
  Schedule schedule = Schedule::synchronous;
  AcceptanceReport acceptance;

  double final_residual() const { return residual_trace.empty() ? 0.0 : residual_trace.back(); }
};

PriceVector initial_prices(const MarketInstance& instance, InitPolicy policy,
                           const QuotationParams& params = {}, std::uint64_t seed = 0);

// Runs the bidirectional price adjustment to the fixed point. Hitting
// max_iterations yields converged = false, never a throw.
EquilibriumReport solve(const MarketInstance& instance, const QuotationParams& params = {},
                        const SolverConfig& config = {});

// Per model j: p_B = fee * (kM + (1+d) S_j) / (1 - rho_j) on every buyer
// edge, p_D(i) = fee * kD_i + SV(i|j) * rho_j * p_B / (1+d), all offsets
// and margins taken after scaling. Independent oracle for solve().
PriceVector closed_form_equilibrium(const MarketInstance& instance, const QuotationParams& params = {});

// The constructed point p_bar with Q(p_bar) <= p_bar componentwise; the
// inequality is verified before returning.
PriceVector feasible_upper_bound(const MarketInstance& instance, const QuotationParams& params = {});

const char* schedule_name(Schedule schedule);

}  // namespace triplewin
