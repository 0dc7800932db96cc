// Straight-line serial implementations of the quotation operator, written
// directly against the instance structures. Kept as the ground truth the
// parallel kernels are tested and benchmarked against.
#pragma once

#include "triplewin/market.hpp"
#include "triplewin/quotation.hpp"

namespace triplewin::reference {

std::vector<double> effective_revenue(const MarketInstance& instance, const PriceVector& prices);
std::vector<double> quote_buyers(const MarketInstance& instance, const PriceVector& prices,
                                 const QuotationParams& params = {});
std::vector<double> quote_data(const MarketInstance& instance, const PriceVector& prices,
                               const QuotationParams& params = {});
PriceVector joint_operator(const MarketInstance& instance, const PriceVector& prices,
                           const QuotationParams& params = {});
double residual(const MarketInstance& instance, const PriceVector& prices,
                const QuotationParams& params = {});

}  // namespace triplewin::reference
