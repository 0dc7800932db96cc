#include "triplewin/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "triplewin/quotation.hpp"

namespace triplewin {

const char* method_name(Method method) {
  switch (method) {
    case Method::triplewin: return "triplewin";
    case Method::supply_first: return "sf";
    case Method::demand_first: return "df";
    case Method::broker_centric: return "bc";
  }
  return "?";
}

std::optional<Method> method_from_name(const std::string& name) {
  if (name == "triplewin" || name == "tw") return Method::triplewin;
  if (name == "sf") return Method::supply_first;
  if (name == "df") return Method::demand_first;
  if (name == "bc") return Method::broker_centric;
  return std::nullopt;
}

PriceVector supply_first(const MarketInstance& instance) {
  PriceVector p = PriceVector::zeros(instance);
  std::size_t de = 0;
  for (const auto& m : instance.models) {
    for (const auto& id : m.dataset_ids) {
      auto it = instance.caps.find({id, m.id});
      if (it == instance.caps.end())
        throw std::invalid_argument("supply-first needs a cap for edge " + id + "->" + m.id);
      p.data[de++] = it->second;
    }
  }
  p.buyer = quote_buyers(instance, p);
  return p;
}

PriceVector demand_first(const MarketInstance& instance) {
  PriceVector p = PriceVector::zeros(instance);
  std::size_t be = 0;
  for (const auto& m : instance.models)
    for (std::size_t k = 0; k < m.buyers.size(); ++k) p.buyer[be++] = m.kappa_m;
  p.data = quote_data(instance, p);
  return p;
}

double reserve_quantile(std::vector<double> values, double q) {
  if (values.empty()) throw std::invalid_argument("quantile of an empty set");
  if (!(q >= 0.0 && q <= 1.0)) throw std::invalid_argument("quantile must lie in [0,1]");
  std::sort(values.begin(), values.end());
  const double h = q * static_cast<double>(values.size() - 1);
  const std::size_t lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  const double frac = h - static_cast<double>(lo);
  return values[lo] + frac * (values[hi] - values[lo]);
}

PriceVector broker_centric(const MarketInstance& instance, double quantile) {
  PriceVector p = PriceVector::zeros(instance);
  std::size_t be = 0, de = 0;
  for (const auto& m : instance.models) {
    std::vector<double> reserves;
    reserves.reserve(m.buyers.size());
    for (const auto& b : m.buyers) reserves.push_back(b.reserve);
    const double target = reserve_quantile(std::move(reserves), quantile);

    double floor_spend = 0.0;  // data expenditure at seller floors
    for (const auto& id : m.dataset_ids) floor_spend += instance.dataset_offset(id);

    double markup = (target - m.kappa_m) / floor_spend - 1.0;
    double posted = target;
    if (markup < 0.0) {
      markup = 0.0;
      posted = m.kappa_m + floor_spend;
    }
    for (std::size_t k = 0; k < m.buyers.size(); ++k) p.buyer[be++] = posted;

    double w = 0.0;
    for (const auto& b : m.buyers) w += b.omega * posted;
    for (const auto& id : m.dataset_ids)
      p.data[de++] =
          instance.dataset_offset(id) + instance.shapley_share(m.id, id) * w / (1.0 + markup);
  }
  return p;
}

PriceVector baseline_prices(const MarketInstance& instance, Method method, double quantile) {
  switch (method) {
    case Method::supply_first: return supply_first(instance);
    case Method::demand_first: return demand_first(instance);
    case Method::broker_centric: return broker_centric(instance, quantile);
    case Method::triplewin: break;
  }
  throw std::invalid_argument("baseline_prices called with triplewin; use solve()");
}

PropagationTrace staged_propagation(const MarketInstance& instance, Method method, int rounds,
                                    const SolverConfig& config, double quantile) {
  if (rounds < 0) throw std::invalid_argument("rounds must be nonnegative");

  PropagationTrace trace;
  trace.stages.push_back(initial_prices(instance, InitPolicy::table_caps));

  if (method == Method::triplewin) {
    QuotationKernel kernel(instance);
    const QuotationParams params;
    for (int r = 1; r <= rounds; ++r) {
      PriceVector next;
      kernel.apply(trace.stages.back(), params, next);
      trace.stages.push_back(std::move(next));
    }
    trace.converged = solve(instance, params, config).prices;
    return trace;
  }

  // Baselines ignore the current state: re-applying the pass is stationary
  // from round one on.
  for (int r = 1; r <= rounds; ++r)
    trace.stages.push_back(baseline_prices(instance, method, quantile));
  trace.converged =
      rounds >= 1 ? trace.stages.back() : baseline_prices(instance, method, quantile);
  return trace;
}

}  // namespace triplewin
