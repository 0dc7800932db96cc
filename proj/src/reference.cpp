#include "triplewin/reference.hpp"

#include <cmath>
#include <stdexcept>

namespace triplewin::reference {

namespace {

void check_aligned(const MarketInstance& instance, const PriceVector& prices) {
  if (!prices.matches(instance))
    throw std::invalid_argument("price vector does not match instance edge sets");
}

}  // namespace

std::vector<double> effective_revenue(const MarketInstance& instance, const PriceVector& prices) {
  check_aligned(instance, prices);
  std::vector<double> w;
  w.reserve(instance.models.size());
  std::size_t be = 0;
  for (const auto& m : instance.models) {
    double sum = 0.0;
    for (const auto& b : m.buyers) sum += b.omega * prices.buyer[be++];
    w.push_back(sum);
  }
  return w;
}

std::vector<double> quote_buyers(const MarketInstance& instance, const PriceVector& prices,
                                 const QuotationParams& params) {
  check_aligned(instance, prices);
  params.check();
  std::vector<double> out;
  out.reserve(instance.buyer_edge_count());
  std::size_t de = 0;
  for (const auto& m : instance.models) {
    double expenditure = 0.0;
    for (std::size_t i = 0; i < m.dataset_ids.size(); ++i) expenditure += prices.data[de++];
    const double v = params.fee_alpha * params.alpha_kappa_m * m.kappa_m +
                     (1.0 + params.alpha_delta * m.delta) * expenditure;
    for (std::size_t k = 0; k < m.buyers.size(); ++k) out.push_back(v);
  }
  return out;
}

std::vector<double> quote_data(const MarketInstance& instance, const PriceVector& prices,
                               const QuotationParams& params) {
  check_aligned(instance, prices);
  params.check();
  std::vector<double> out;
  out.reserve(instance.data_edge_count());
  std::size_t be = 0;
  for (const auto& m : instance.models) {
    double w = 0.0;
    for (const auto& b : m.buyers) w += b.omega * prices.buyer[be++];
    const double passthrough = w / (1.0 + params.alpha_delta * m.delta);
    for (const auto& id : m.dataset_ids)
      out.push_back(params.fee_alpha * params.alpha_kappa_d * instance.dataset_offset(id) +
                    instance.shapley_share(m.id, id) * passthrough);
  }
  return out;
}

PriceVector joint_operator(const MarketInstance& instance, const PriceVector& prices,
                           const QuotationParams& params) {
  PriceVector out;
  out.buyer = reference::quote_buyers(instance, prices, params);
  out.data = reference::quote_data(instance, prices, params);
  return out;
}

double residual(const MarketInstance& instance, const PriceVector& prices,
                const QuotationParams& params) {
  const PriceVector quoted = reference::joint_operator(instance, prices, params);
  double total = 0.0;
  std::size_t be = 0, de = 0;
  for (const auto& m : instance.models) {
    double sq = 0.0;
    for (std::size_t k = 0; k < m.buyers.size(); ++k, ++be) {
      const double diff = quoted.buyer[be] - prices.buyer[be];
      sq += diff * diff;
    }
    for (std::size_t i = 0; i < m.dataset_ids.size(); ++i, ++de) {
      const double diff = quoted.data[de] - prices.data[de];
      sq += diff * diff;
    }
    total += sq;
  }
  const std::size_t d = prices.dimension();
  return d == 0 ? 0.0 : std::sqrt(total) / std::sqrt(static_cast<double>(d));
}

}  // namespace triplewin::reference
