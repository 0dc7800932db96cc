#include "triplewin/generator.hpp"

#include <algorithm>
#include <numeric>
#include <random>
#include <stdexcept>

namespace triplewin {

namespace {

// Fisher-Yates prefix: the first k entries of a shuffled index range.
std::vector<int> sample_without_replacement(int n, int k, std::mt19937_64& rng) {
  std::vector<int> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  for (int i = 0; i < k; ++i) {
    std::uniform_int_distribution<int> pick(i, n - 1);
    std::swap(idx[i], idx[pick(rng)]);
  }
  idx.resize(k);
  std::sort(idx.begin(), idx.end());
  return idx;
}

}  // namespace

MarketInstance generate(const GeneratorConfig& config, std::uint64_t seed) {
  if (config.n_datasets < 1 || config.n_models < 1)
    throw std::invalid_argument("generator needs at least one dataset and one model");
  if (!(config.rho >= 0.0 && config.rho < 1.0))
    throw std::invalid_argument("rho must lie in [0,1)");
  const int max_ds = std::min(config.max_datasets_per_model, config.n_datasets);
  const int min_ds = std::min(config.min_datasets_per_model, max_ds);
  if (min_ds < 1) throw std::invalid_argument("datasets per model must be at least 1");
  if (config.min_buyers_per_model < 1 || config.max_buyers_per_model < config.min_buyers_per_model)
    throw std::invalid_argument("invalid buyers-per-model range");

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> kappa_d(config.kappa_d_min, config.kappa_d_max);
  std::uniform_real_distribution<double> kappa_m(config.kappa_m_min, config.kappa_m_max);
  std::uniform_real_distribution<double> reserve(config.reserve_min, config.reserve_max);
  std::uniform_real_distribution<double> cap(config.cap_min, config.cap_max);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<int> n_buyers_dist(config.min_buyers_per_model,
                                                   config.max_buyers_per_model);
  std::uniform_int_distribution<int> n_datasets_dist(min_ds, max_ds);
  std::exponential_distribution<double> exponential(1.0);

  MarketInstance instance;
  for (int i = 0; i < config.n_datasets; ++i)
    instance.datasets.push_back({"D" + std::to_string(i + 1), kappa_d(rng)});

  const int pool = config.buyer_pool > 0 ? config.buyer_pool : 3 * config.n_models;

  for (int j = 0; j < config.n_models; ++j) {
    ModelSpec m;
    m.id = "M" + std::to_string(j + 1);
    m.kappa_m = kappa_m(rng);
    m.delta = config.delta;

    for (int i : sample_without_replacement(config.n_datasets, n_datasets_dist(rng), rng))
      m.dataset_ids.push_back(instance.datasets[i].id);

    const int n_buyers = n_buyers_dist(rng);
    std::vector<double> raw(n_buyers);
    double raw_sum = 0.0;
    for (double& w : raw) {
      w = unit(rng) + 1e-9;
      raw_sum += w;
    }
    for (int i : sample_without_replacement(pool, n_buyers, rng)) {
      BuyerEdge b;
      b.buyer_id = "B" + std::to_string(i + 1);
      b.omega = raw[m.buyers.size()] / raw_sum * config.rho;
      b.reserve = reserve(rng);
      m.buyers.push_back(std::move(b));
    }

    std::map<std::string, double> shares;
    double share_sum = 0.0;
    for (const auto& id : m.dataset_ids) {
      shares[id] = exponential(rng);
      share_sum += shares[id];
    }
    for (auto& [id, sv] : shares) sv /= share_sum;
    instance.shapley[m.id] = std::move(shares);

    for (const auto& id : m.dataset_ids) instance.caps[{id, m.id}] = cap(rng);

    instance.models.push_back(std::move(m));
  }
  return instance;
}

}  // namespace triplewin
