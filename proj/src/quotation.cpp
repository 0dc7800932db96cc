#include "triplewin/quotation.hpp"

#include <cmath>
#include <stdexcept>

namespace triplewin {

namespace {
// Below this many models the parallel fork costs more than the sweep.
constexpr std::size_t kOmpMinModels = 128;
}  // namespace

QuotationParams QuotationParams::from_fee(double tau) {
  if (!(tau >= 0.0 && tau < 1.0)) throw std::invalid_argument("tau must lie in [0,1)");
  QuotationParams p;
  p.fee_alpha = 1.0 / (1.0 - tau);
  return p;
}

bool QuotationParams::valid() const {
  return std::isfinite(fee_alpha) && fee_alpha >= 1.0 && std::isfinite(alpha_kappa_d) &&
         alpha_kappa_d > 0.0 && std::isfinite(alpha_kappa_m) && alpha_kappa_m > 0.0 &&
         std::isfinite(alpha_delta) && alpha_delta >= 0.0;
}

void QuotationParams::check() const {
  if (!valid()) throw std::invalid_argument("invalid quotation params: fee_alpha >= 1, offset scalings > 0, alpha_delta >= 0 required");
}

QuotationKernel::QuotationKernel(const MarketInstance& instance) {
  const std::size_t n_models = instance.models.size();
  buyer_begin_.reserve(n_models + 1);
  data_begin_.reserve(n_models + 1);
  buyer_begin_.push_back(0);
  data_begin_.push_back(0);
  kappa_m_.reserve(n_models);
  delta_.reserve(n_models);

  for (std::size_t j = 0; j < n_models; ++j) {
    const ModelSpec& m = instance.models[j];
    kappa_m_.push_back(m.kappa_m);
    delta_.push_back(m.delta);
    for (const auto& b : m.buyers) {
      omega_.push_back(b.omega);
      reserve_.push_back(b.reserve);
      buyer_model_.push_back(j);
    }
    for (const auto& id : m.dataset_ids) {
      sv_.push_back(instance.shapley_share(m.id, id));
      kappa_d_.push_back(instance.dataset_offset(id));
      data_model_.push_back(j);
    }
    buyer_begin_.push_back(omega_.size());
    data_begin_.push_back(sv_.size());
  }
}

double QuotationKernel::rho(std::size_t model) const {
  double sum = 0.0;
  for (std::size_t e = buyer_begin_[model]; e < buyer_begin_[model + 1]; ++e) sum += omega_[e];
  return sum;
}

double QuotationKernel::baseline_offset_sum(std::size_t model) const {
  double sum = 0.0;
  for (std::size_t e = data_begin_[model]; e < data_begin_[model + 1]; ++e) sum += kappa_d_[e];
  return sum;
}

void QuotationKernel::effective_revenue(std::span<const double> buyer_prices, std::span<double> w) const {
  const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(model_count());
#pragma omp parallel for schedule(static) if (model_count() >= kOmpMinModels)
  for (std::ptrdiff_t j = 0; j < n; ++j) {
    double sum = 0.0;
    for (std::size_t e = buyer_begin_[j]; e < buyer_begin_[j + 1]; ++e)
      sum += omega_[e] * buyer_prices[e];
    w[j] = sum;
  }
}

void QuotationKernel::quote_buyers(std::span<const double> data_prices, const QuotationParams& params,
                                   std::span<double> out) const {
  const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(model_count());
#pragma omp parallel for schedule(static) if (model_count() >= kOmpMinModels)
  for (std::ptrdiff_t j = 0; j < n; ++j) {
    double expenditure = 0.0;
    for (std::size_t e = data_begin_[j]; e < data_begin_[j + 1]; ++e) expenditure += data_prices[e];
    const double v = params.fee_alpha * params.alpha_kappa_m * kappa_m_[j] +
                     (1.0 + params.alpha_delta * delta_[j]) * expenditure;
    for (std::size_t e = buyer_begin_[j]; e < buyer_begin_[j + 1]; ++e) out[e] = v;
  }
}

void QuotationKernel::quote_data(std::span<const double> buyer_prices, const QuotationParams& params,
                                 std::span<double> out) const {
  const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(model_count());
#pragma omp parallel for schedule(static) if (model_count() >= kOmpMinModels)
  for (std::ptrdiff_t j = 0; j < n; ++j) {
    double w = 0.0;
    for (std::size_t e = buyer_begin_[j]; e < buyer_begin_[j + 1]; ++e)
      w += omega_[e] * buyer_prices[e];
    const double passthrough = w / (1.0 + params.alpha_delta * delta_[j]);
    for (std::size_t e = data_begin_[j]; e < data_begin_[j + 1]; ++e)
      out[e] = params.fee_alpha * params.alpha_kappa_d * kappa_d_[e] + sv_[e] * passthrough;
  }
}

void QuotationKernel::apply(const PriceVector& prices, const QuotationParams& params,
                            PriceVector& out) const {
  out.buyer.resize(buyer_edge_count());
  out.data.resize(data_edge_count());
  quote_buyers(prices.data, params, out.buyer);
  quote_data(prices.buyer, params, out.data);
}

double QuotationKernel::residual(const PriceVector& prices, const QuotationParams& params) const {
  const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(model_count());
  std::vector<double> partial(model_count(), 0.0);
  // Per-model partials, combined serially, so the result does not depend
  // on the number of threads.
#pragma omp parallel for schedule(static) if (model_count() >= kOmpMinModels)
  for (std::ptrdiff_t j = 0; j < n; ++j) {
    double expenditure = 0.0;
    for (std::size_t e = data_begin_[j]; e < data_begin_[j + 1]; ++e) expenditure += prices.data[e];
    double w = 0.0;
    for (std::size_t e = buyer_begin_[j]; e < buyer_begin_[j + 1]; ++e)
      w += omega_[e] * prices.buyer[e];

    const double v_b = params.fee_alpha * params.alpha_kappa_m * kappa_m_[j] +
                       (1.0 + params.alpha_delta * delta_[j]) * expenditure;
    const double passthrough = w / (1.0 + params.alpha_delta * delta_[j]);

    double sq = 0.0;
    for (std::size_t e = buyer_begin_[j]; e < buyer_begin_[j + 1]; ++e) {
      const double diff = v_b - prices.buyer[e];
      sq += diff * diff;
    }
    for (std::size_t e = data_begin_[j]; e < data_begin_[j + 1]; ++e) {
      const double v_d = params.fee_alpha * params.alpha_kappa_d * kappa_d_[e] + sv_[e] * passthrough;
      const double diff = v_d - prices.data[e];
      sq += diff * diff;
    }
    partial[j] = sq;
  }
  double total = 0.0;
  for (double s : partial) total += s;
  const std::size_t d = dimension();
  return d == 0 ? 0.0 : std::sqrt(total) / std::sqrt(static_cast<double>(d));
}

double QuotationKernel::apply_coordinate(const PriceVector& prices, const QuotationParams& params,
                                         std::size_t coordinate) const {
  if (coordinate < buyer_edge_count()) {
    const std::size_t j = buyer_model_[coordinate];
    double expenditure = 0.0;
    for (std::size_t e = data_begin_[j]; e < data_begin_[j + 1]; ++e) expenditure += prices.data[e];
    return params.fee_alpha * params.alpha_kappa_m * kappa_m_[j] +
           (1.0 + params.alpha_delta * delta_[j]) * expenditure;
  }
  const std::size_t e = coordinate - buyer_edge_count();
  const std::size_t j = data_model_[e];
  double w = 0.0;
  for (std::size_t be = buyer_begin_[j]; be < buyer_begin_[j + 1]; ++be)
    w += omega_[be] * prices.buyer[be];
  return params.fee_alpha * params.alpha_kappa_d * kappa_d_[e] +
         sv_[e] * w / (1.0 + params.alpha_delta * delta_[j]);
}

namespace {

void check_aligned(const MarketInstance& instance, const PriceVector& prices) {
  if (!prices.matches(instance))
    throw std::invalid_argument("price vector does not match instance edge sets");
}

}  // namespace

std::vector<double> effective_revenue(const MarketInstance& instance, const PriceVector& prices) {
  check_aligned(instance, prices);
  QuotationKernel kernel(instance);
  std::vector<double> w(kernel.model_count(), 0.0);
  kernel.effective_revenue(prices.buyer, w);
  return w;
}

std::vector<double> quote_buyers(const MarketInstance& instance, const PriceVector& prices,
                                 const QuotationParams& params) {
  check_aligned(instance, prices);
  params.check();
  QuotationKernel kernel(instance);
  std::vector<double> out(kernel.buyer_edge_count(), 0.0);
  kernel.quote_buyers(prices.data, params, out);
  return out;
}

std::vector<double> quote_data(const MarketInstance& instance, const PriceVector& prices,
                               const QuotationParams& params) {
  check_aligned(instance, prices);
  params.check();
  QuotationKernel kernel(instance);
  std::vector<double> out(kernel.data_edge_count(), 0.0);
  kernel.quote_data(prices.buyer, params, out);
  return out;
}

PriceVector joint_operator(const MarketInstance& instance, const PriceVector& prices,
                           const QuotationParams& params) {
  check_aligned(instance, prices);
  params.check();
  QuotationKernel kernel(instance);
  PriceVector out;
  kernel.apply(prices, params, out);
  return out;
}

double residual(const MarketInstance& instance, const PriceVector& prices,
                const QuotationParams& params) {
  check_aligned(instance, prices);
  params.check();
  QuotationKernel kernel(instance);
  return kernel.residual(prices, params);
}

PriceVector offset_vector(const MarketInstance& instance, const QuotationParams& params) {
  params.check();
  return joint_operator(instance, PriceVector::zeros(instance), params);
}

}  // namespace triplewin
