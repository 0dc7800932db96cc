// Closed-form buyer-feasibility envelopes in scaling space, numerical
// frontier tracing against actual fixed points, offset comparative
// statics, and the maximal uniform platform fee.
#pragma once

#include <limits>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "triplewin/market.hpp"
#include "triplewin/solver.hpp"

namespace triplewin {

// One sample of an analytic envelope: at the grid value x of one scaling,
// the largest market-wide value of the free scaling that still guarantees
// buyer feasibility of the fixed point. y_max is +infinity when no model
// constrains the free axis (e.g. all baseline margins are zero).
struct EnvelopeSample {
  double x = 0.0;
  double y_max = 0.0;
  // False when some buyer-model edge has nonpositive slack, so no choice
  // of the free scaling (or any smaller x) helps on this grid point.
  bool feasible_any = true;
  std::string binding_model;
  std::string binding_buyer;
};

// alpha_delta^max as a function of alpha_kappa_d, at fixed alpha_kappa_m.
std::vector<EnvelopeSample> envelope_alpha_delta_vs_alpha_kd(const MarketInstance& instance,
                                                             double alpha_km,
                                                             std::span<const double> alpha_kd_grid);
// alpha_delta^max as a function of alpha_kappa_m, at fixed alpha_kappa_d.
std::vector<EnvelopeSample> envelope_alpha_delta_vs_alpha_km(const MarketInstance& instance,
                                                             double alpha_kd,
                                                             std::span<const double> alpha_km_grid);
// alpha_kappa_m^max as a function of alpha_kappa_d, at fixed alpha_delta.
std::vector<EnvelopeSample> envelope_alpha_km_vs_alpha_kd(const MarketInstance& instance,
                                                          double alpha_delta,
                                                          std::span<const double> alpha_kd_grid);
// alpha_kappa_d^max as a function of alpha_kappa_m, at fixed alpha_delta.
std::vector<EnvelopeSample> envelope_alpha_kd_vs_alpha_km(const MarketInstance& instance,
                                                          double alpha_delta,
                                                          std::span<const double> alpha_km_grid);

// Sufficient condition for buyer feasibility of the fixed point:
//   (1 + a_d d0_j) a_kD S_j <= R_jk - a_kM kM0_j - rho_j Rbar_j
// for every model j and buyer k.
bool global_feasibility(const MarketInstance& instance, double alpha_kd, double alpha_km,
                        double alpha_delta);

enum class EnvelopePanel {
  kd_delta,  // x = alpha_kappa_d, free axis alpha_delta, fixed third = alpha_kappa_m
  km_delta,  // x = alpha_kappa_m, free axis alpha_delta, fixed third = alpha_kappa_d
  kd_km,     // x = alpha_kappa_d, free axis alpha_kappa_m, fixed third = alpha_delta
};

const char* panel_name(EnvelopePanel panel);

struct FrontierPoint {
  double x = 0.0;
  double analytic_max = 0.0;
  double numeric_max = std::numeric_limits<double>::quiet_NaN();
  bool resolved = false;  // false on bracket failure or an infeasible grid point
  std::string binding_model;
  std::string binding_buyer;
};

// For each grid value of the panel's x axis, bisects the free scaling to
// the largest value whose solved fixed point passes buyer-side acceptance.
// Brackets start at [0, 10 x analytic bound].
std::vector<FrontierPoint> numerical_frontier(const MarketInstance& instance, EnvelopePanel panel,
                                              double fixed_third, std::span<const double> x_grid,
                                              double bisect_tol = 1e-6,
                                              const SolverConfig& solver = {});

struct MonotonicityVerdict {
  bool pass = false;
  std::vector<std::string> violations;
  PriceVector base;
  PriceVector shifted;
};

// Comparisons at 1e-9 / 1e-12 need equilibria a few orders tighter.
SolverConfig tight_solver_config();

// Solves the instance and a copy with offsets raised by the given
// nonnegative increments (per dataset id / per model id), then checks the
// equilibrium rose weakly everywhere and strictly on the edges whose own
// offset rose.
MonotonicityVerdict offset_monotonicity_check(const MarketInstance& instance,
                                              const std::map<std::string, double>& dataset_increments,
                                              const std::map<std::string, double>& model_increments,
                                              SolverConfig config = tight_solver_config());

struct FeeResult {
  double alpha_star = 0.0;  // largest feasible grossing factor
  double tau_star = 0.0;    // max{0, 1 - 1/alpha_star}
  std::string binding_model;
};

// Closed-form maximal uniform ad-valorem fee.
FeeResult max_uniform_fee(const MarketInstance& instance);

}  // namespace triplewin
