// Times the OpenMP quotation kernel against the serial reference on a
// large synthetic market and checks they agree bit for bit.
#include <chrono>
#include <cstdio>
#include <random>

#include <omp.h>

#include <CLI11.hpp>

#include "triplewin/generator.hpp"
#include "triplewin/quotation.hpp"
#include "triplewin/reference.hpp"

using namespace triplewin;

namespace {

double checksum(const PriceVector& p) {
  double sum = 0.0;
  for (double v : p.buyer) sum += v;
  for (double v : p.data) sum += v;
  return sum;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"quotation kernel benchmark"};
  int n_models = 20000;
  int n_datasets = 2000;
  int sweeps = 50;
  std::uint64_t seed = 1;
  app.add_option("--models", n_models, "Models in the market");
  app.add_option("--datasets", n_datasets, "Datasets in the market");
  app.add_option("--sweeps", sweeps, "Operator applications to time");
  app.add_option("--seed", seed, "Generator seed");
  CLI11_PARSE(app, argc, argv);

  GeneratorConfig config;
  config.n_models = n_models;
  config.n_datasets = n_datasets;
  const MarketInstance instance = generate(config, seed);
  const std::size_t d = instance.dimension();
  std::printf("market: %d models, %zu edges\n", n_models, d);

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 20.0);
  PriceVector p0 = PriceVector::zeros(instance);
  for (double& v : p0.buyer) v = unit(rng);
  for (double& v : p0.data) v = unit(rng);
  const QuotationParams params;

  using clock = std::chrono::steady_clock;

  // Serial reference: straight loops over the instance structures.
  PriceVector ref = p0;
  const auto t0 = clock::now();
  for (int i = 0; i < sweeps; ++i) ref = reference::joint_operator(instance, ref, params);
  const auto t1 = clock::now();
  const double ref_ms =
      std::chrono::duration<double, std::milli>(t1 - t0).count() / static_cast<double>(sweeps);

  // Flattened kernel, preallocated double buffers, single thread.
  const QuotationKernel kernel(instance);
  const int max_threads = omp_get_max_threads();
  omp_set_num_threads(1);
  PriceVector a1 = p0;
  PriceVector b1 = PriceVector::zeros(instance);
  const auto t2 = clock::now();
  for (int i = 0; i < sweeps; ++i) {
    kernel.apply(a1, params, b1);
    std::swap(a1, b1);
  }
  const auto t3 = clock::now();
  const double kernel1_ms =
      std::chrono::duration<double, std::milli>(t3 - t2).count() / static_cast<double>(sweeps);

  // Same kernel with all threads.
  omp_set_num_threads(max_threads);
  PriceVector a = p0;
  PriceVector b = PriceVector::zeros(instance);
  const auto t4 = clock::now();
  for (int i = 0; i < sweeps; ++i) {
    kernel.apply(a, params, b);
    std::swap(a, b);
  }
  const auto t5 = clock::now();
  const double kernel_ms =
      std::chrono::duration<double, std::milli>(t5 - t4).count() / static_cast<double>(sweeps);

  const bool identical = ref.buyer == a.buyer && ref.data == a.data &&
                         a1.buyer == a.buyer && a1.data == a.data;
  std::printf("serial reference   : %9.3f ms/sweep\n", ref_ms);
  std::printf("kernel, 1 thread   : %9.3f ms/sweep  (%.2fx vs reference)\n", kernel1_ms,
              ref_ms / kernel1_ms);
  std::printf("kernel, %d threads  : %9.3f ms/sweep  (%.2fx vs 1 thread)\n", max_threads,
              kernel_ms, kernel1_ms / kernel_ms);
  std::printf("checksum           : %.17g (%s)\n", checksum(a),
              identical ? "bit-identical" : "MISMATCH");
  return identical ? 0 : 1;
}
