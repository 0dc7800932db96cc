// Bidirectional quotation mappings and the joint operator Q(p).
//
// Buyer side:  v_B = fee * a_kM * kM0 + (1 + a_d * d0) * sum_i p_D(i,j)
// Data side:   v_D = fee * a_kD * kD0 + SV(i|j) * W_j / (1 + a_d * d0)
// with W_j = sum_k omega_jk * p_B(k,j).
//
// With fee = 1 and unit scalings this is the plain quotation pair; both
// sides keep strictly positive offsets, so Q is positive, monotone and
// scalable on the nonnegative orthant.
#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "triplewin/market.hpp"

namespace triplewin {

struct QuotationParams {
  double fee_alpha = 1.0;      // grossing factor 1/(1-tau), >= 1
  double alpha_kappa_d = 1.0;  // > 0
  double alpha_kappa_m = 1.0;  // > 0
  double alpha_delta = 1.0;    // >= 0

  static QuotationParams from_fee(double tau);
  bool valid() const;
  void check() const;  // throws std::invalid_argument when not valid()
};

// Flattened, model-major view of an instance. Edge order matches
// PriceVector. Construction is O(edges); apply() is the hot path and is
// parallelized over models for large markets.
class QuotationKernel {
 public:
  explicit QuotationKernel(const MarketInstance& instance);

  std::size_t model_count() const { return kappa_m_.size(); }
  std::size_t buyer_edge_count() const { return omega_.size(); }
  std::size_t data_edge_count() const { return sv_.size(); }
  std::size_t dimension() const { return omega_.size() + sv_.size(); }

  std::size_t buyer_begin(std::size_t model) const { return buyer_begin_[model]; }
  std::size_t buyer_end(std::size_t model) const { return buyer_begin_[model + 1]; }
  std::size_t data_begin(std::size_t model) const { return data_begin_[model]; }
  std::size_t data_end(std::size_t model) const { return data_begin_[model + 1]; }

  double omega(std::size_t buyer_edge) const { return omega_[buyer_edge]; }
  double reserve(std::size_t buyer_edge) const { return reserve_[buyer_edge]; }
  double sv(std::size_t data_edge) const { return sv_[data_edge]; }
  double kappa_d(std::size_t data_edge) const { return kappa_d_[data_edge]; }
  double kappa_m(std::size_t model) const { return kappa_m_[model]; }
  double delta(std::size_t model) const { return delta_[model]; }
  double rho(std::size_t model) const;
  double baseline_offset_sum(std::size_t model) const;  // S_j over the model's datasets

  void effective_revenue(std::span<const double> buyer_prices, std::span<double> w) const;
  void quote_buyers(std::span<const double> data_prices, const QuotationParams& params,
                    std::span<double> out) const;
  void quote_data(std::span<const double> buyer_prices, const QuotationParams& params,
                  std::span<double> out) const;
  void apply(const PriceVector& prices, const QuotationParams& params, PriceVector& out) const;
  double residual(const PriceVector& prices, const QuotationParams& params) const;

  // Recompute a single coordinate of Q(p); buyer edges first, then data
  // edges, matching PriceVector order. Used by asynchronous schedules.
  double apply_coordinate(const PriceVector& prices, const QuotationParams& params,
                          std::size_t coordinate) const;
  std::size_t model_of_buyer_edge(std::size_t buyer_edge) const { return buyer_model_[buyer_edge]; }
  std::size_t model_of_data_edge(std::size_t data_edge) const { return data_model_[data_edge]; }

 private:
  std::vector<std::size_t> buyer_begin_, data_begin_;
  std::vector<std::size_t> buyer_model_, data_model_;
  std::vector<double> omega_, reserve_;
  std::vector<double> sv_, kappa_d_;
  std::vector<double> kappa_m_, delta_;
};

// Convenience wrappers; each builds a kernel on the fly.
std::vector<double> effective_revenue(const MarketInstance& instance, const PriceVector& prices);
std::vector<double> quote_buyers(const MarketInstance& instance, const PriceVector& prices,
                                 const QuotationParams& params = {});
std::vector<double> quote_data(const MarketInstance& instance, const PriceVector& prices,
                               const QuotationParams& params = {});
PriceVector joint_operator(const MarketInstance& instance, const PriceVector& prices,
                           const QuotationParams& params = {});
double residual(const MarketInstance& instance, const PriceVector& prices,
                const QuotationParams& params = {});

// The constant part of Q: Q(0). Buyer entries fee*a_kM*kM0, data entries
// fee*a_kD*kD0.
PriceVector offset_vector(const MarketInstance& instance, const QuotationParams& params = {});

}  // namespace triplewin
