#include "triplewin/solver.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

namespace triplewin {

const char* schedule_name(Schedule schedule) {
  switch (schedule) {
    case Schedule::synchronous: return "sync";
    case Schedule::block_alternating: return "block";
    case Schedule::async_random_fair: return "async";
  }
  return "?";
}

PriceVector initial_prices(const MarketInstance& instance, InitPolicy policy,
                           const QuotationParams& params, std::uint64_t seed) {
  PriceVector p = PriceVector::zeros(instance);
  switch (policy) {
    case InitPolicy::zeros:
      return p;
    case InitPolicy::table_caps: {
      std::size_t be = 0, de = 0;
      for (const auto& m : instance.models) {
        for (std::size_t k = 0; k < m.buyers.size(); ++k) p.buyer[be++] = m.kappa_m;
        for (const auto& id : m.dataset_ids) {
          auto it = instance.caps.find({id, m.id});
          p.data[de++] = it != instance.caps.end() ? it->second : instance.dataset_offset(id);
        }
      }
      return p;
    }
    case InitPolicy::upper_bound_times_10: {
      PriceVector bar = feasible_upper_bound(instance, params);
      for (double& v : bar.buyer) v *= 10.0;
      for (double& v : bar.data) v *= 10.0;
      return bar;
    }
    case InitPolicy::random_nonnegative: {
      PriceVector bar = feasible_upper_bound(instance, params);
      std::mt19937_64 rng(seed);
      std::uniform_real_distribution<double> unit(0.0, 2.0);
      for (double& v : bar.buyer) v *= unit(rng);
      for (double& v : bar.data) v *= unit(rng);
      return bar;
    }
  }
  return p;
}

namespace {

EquilibriumReport run_synchronous(const QuotationKernel& kernel, const QuotationParams& params,
                                  const SolverConfig& config, PriceVector p) {
  EquilibriumReport report;
  PriceVector next;
  kernel.apply(p, params, next);  // sweep 1
  for (int t = 1; t <= config.max_iterations; ++t) {
    std::swap(p, next);
    kernel.apply(p, params, next);
    // ||Q(p_t) - p_t|| is free here: next already holds Q(p_t).
    double sq = 0.0;
    for (std::size_t e = 0; e < p.buyer.size(); ++e) {
      const double diff = next.buyer[e] - p.buyer[e];
      sq += diff * diff;
    }
    for (std::size_t e = 0; e < p.data.size(); ++e) {
      const double diff = next.data[e] - p.data[e];
      sq += diff * diff;
    }
    const double res = std::sqrt(sq) / std::sqrt(static_cast<double>(p.dimension()));
    report.residual_trace.push_back(res);
    report.iterations = t;
    if (res <= config.epsilon) {
      report.converged = true;
      break;
    }
  }
  report.prices = std::move(p);
  return report;
}

EquilibriumReport run_block_alternating(const QuotationKernel& kernel, const QuotationParams& params,
                                        const SolverConfig& config, PriceVector p) {
  EquilibriumReport report;
  for (int t = 1; t <= config.max_iterations; ++t) {
    // Data block first from the current buyer block, then the buyer block
    // from the refreshed data block.
    std::vector<double> new_data(p.data.size());
    kernel.quote_data(p.buyer, params, new_data);
    p.data = std::move(new_data);
    std::vector<double> new_buyer(p.buyer.size());
    kernel.quote_buyers(p.data, params, new_buyer);
    p.buyer = std::move(new_buyer);

    const double res = kernel.residual(p, params);
    report.residual_trace.push_back(res);
    report.iterations = t;
    if (res <= config.epsilon) {
      report.converged = true;
      break;
    }
  }
  report.prices = std::move(p);
  return report;
}

EquilibriumReport run_async_fair(const QuotationKernel& kernel, const QuotationParams& params,
                                 const SolverConfig& config, PriceVector p) {
  EquilibriumReport report;
  const std::size_t d = kernel.dimension();
  // Stale coordinates preempt the random draw once their age reaches 3d.
  // At most d coordinates can be that old at once and they are served
  // oldest-first, so no coordinate ever waits 4d micro-steps.
  const std::size_t stale_threshold = 3 * d;
  std::mt19937_64 rng(config.seed);
  std::uniform_int_distribution<std::size_t> pick(0, d - 1);
  std::vector<std::size_t> age(d, 0);

  for (int t = 1; t <= config.max_iterations; ++t) {
    for (std::size_t step = 0; step < d; ++step) {
      std::size_t c = pick(rng);
      bool preempted = false;
      for (std::size_t i = 0; i < d; ++i) {
        if (age[i] >= stale_threshold && (!preempted || age[i] > age[c])) {
          c = i;
          preempted = true;
        }
      }

      const double v = kernel.apply_coordinate(p, params, c);
      if (c < p.buyer.size())
        p.buyer[c] = v;
      else
        p.data[c - p.buyer.size()] = v;
      for (std::size_t i = 0; i < d; ++i) ++age[i];
      age[c] = 0;
    }
    const double res = kernel.residual(p, params);
    report.residual_trace.push_back(res);
    report.iterations = t;
    if (res <= config.epsilon) {
      report.converged = true;
      break;
    }
  }
  report.prices = std::move(p);
  return report;
}

}  // namespace

EquilibriumReport solve(const MarketInstance& instance, const QuotationParams& params,
                        const SolverConfig& config) {
  params.check();
  if (!(config.epsilon > 0.0)) throw std::invalid_argument("epsilon must be positive");
  if (config.max_iterations < 1) throw std::invalid_argument("max_iterations must be >= 1");

  QuotationKernel kernel(instance);
  PriceVector p = initial_prices(instance, config.init, params, config.seed);

  EquilibriumReport report;
  if (kernel.dimension() == 0) {  // vacuous market
    report.prices = std::move(p);
    report.converged = true;
    report.schedule = config.schedule;
    report.acceptance = acceptance_check(instance, report.prices);
    return report;
  }
  switch (config.schedule) {
    case Schedule::synchronous:
      report = run_synchronous(kernel, params, config, std::move(p));
      break;
    case Schedule::block_alternating:
      report = run_block_alternating(kernel, params, config, std::move(p));
      break;
    case Schedule::async_random_fair:
      report = run_async_fair(kernel, params, config, std::move(p));
      break;
  }
  report.schedule = config.schedule;
  report.acceptance = acceptance_check(instance, report.prices);
  return report;
}

PriceVector closed_form_equilibrium(const MarketInstance& instance, const QuotationParams& params) {
  params.check();
  PriceVector p = PriceVector::zeros(instance);
  std::size_t be = 0, de = 0;
  for (const auto& m : instance.models) {
    const double rho = m.rho();
    const double delta = params.alpha_delta * m.delta;
    double s = 0.0;
    for (const auto& id : m.dataset_ids) s += instance.dataset_offset(id);
    s *= params.alpha_kappa_d;
    const double p_model =
        params.fee_alpha * (params.alpha_kappa_m * m.kappa_m + (1.0 + delta) * s) / (1.0 - rho);
    for (std::size_t k = 0; k < m.buyers.size(); ++k) p.buyer[be++] = p_model;
    for (const auto& id : m.dataset_ids)
      p.data[de++] = params.fee_alpha * params.alpha_kappa_d * instance.dataset_offset(id) +
                     instance.shapley_share(m.id, id) * rho * p_model / (1.0 + delta);
  }
  return p;
}

PriceVector feasible_upper_bound(const MarketInstance& instance, const QuotationParams& params) {
  params.check();
  // With one per-sale offset per model the constructed bound coincides
  // with the fixed point itself; Q(p_bar) <= p_bar still gets verified.
  PriceVector bar = closed_form_equilibrium(instance, params);
  PriceVector quoted = joint_operator(instance, bar, params);
  const double slack = 1e-9;
  for (std::size_t e = 0; e < bar.buyer.size(); ++e)
    if (quoted.buyer[e] > bar.buyer[e] + slack)
      throw std::logic_error("upper bound construction violated Q(p) <= p on a buyer edge");
  for (std::size_t e = 0; e < bar.data.size(); ++e)
    if (quoted.data[e] > bar.data[e] + slack)
      throw std::logic_error("upper bound construction violated Q(p) <= p on a data edge");
  return bar;
}

}  // namespace triplewin
