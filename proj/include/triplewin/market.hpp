// Static market description (sellers, producers, buyers, edges) and the
// joint price state, with validation and a canonical on-disk format.
#pragma once

#include <cstddef>
#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace triplewin {

struct DatasetSpec {
  std::string id;
  double kappa_d = 0.0;  // per-use offset, strictly positive
};

struct BuyerEdge {
  std::string buyer_id;
  double omega = 0.0;    // revenue weight, nonnegative
  double reserve = 0.0;  // max willingness to pay, positive
};

struct ModelSpec {
  std::string id;
  double kappa_m = 0.0;  // per-sale offset, strictly positive
  double delta = 0.0;    // producer margin, nonnegative
  std::vector<std::string> dataset_ids;
  std::vector<BuyerEdge> buyers;

  // rho is always derived from the weights, never stored.
  double rho() const;
};

// Per model: dataset id -> normalized contribution share.
using ShapleyTable = std::map<std::string, std::map<std::string, double>>;

// Seller list caps, keyed by (dataset id, model id).
using CapMap = std::map<std::pair<std::string, std::string>, double>;

struct MarketInstance {
  std::vector<DatasetSpec> datasets;
  std::vector<ModelSpec> models;
  CapMap caps;
  ShapleyTable shapley;

  const DatasetSpec* find_dataset(const std::string& id) const;
  const ModelSpec* find_model(const std::string& id) const;
  double dataset_offset(const std::string& dataset_id) const;
  double shapley_share(const std::string& model_id, const std::string& dataset_id) const;

  std::size_t buyer_edge_count() const;
  std::size_t data_edge_count() const;
  // Total number of scalar edge prices.
  std::size_t dimension() const;
};

// Joint price state. Edges are stored model-major: for each model in
// instance order, its buyer edges (resp. dataset edges) in declaration
// order. This layout is shared by every operator in the library.
struct PriceVector {
  std::vector<double> buyer;  // p_{B_k -> M_j}
  std::vector<double> data;   // p_{D_i -> M_j}

  std::size_t dimension() const { return buyer.size() + data.size(); }

  static PriceVector zeros(const MarketInstance& instance);
  bool matches(const MarketInstance& instance) const;
};

struct Violation {
  std::string field;      // e.g. "models[M1].delta"
  std::string invariant;  // e.g. "rho_j must lie in [0,1)"
  std::string value;      // offending value, rendered
};

struct ValidationReport {
  std::vector<Violation> violations;
  bool pass() const { return violations.empty(); }
};

// Checks every structural invariant of the instance. Violations are data,
// not faults: a malformed instance never throws here.
ValidationReport validate(const MarketInstance& instance);

struct AcceptanceReport {
  std::vector<bool> buyer_ok;  // p_B <= R, per buyer edge
  std::vector<bool> data_ok;   // p_D >= kappa_D, per data edge
  double success_rate = 0.0;   // accepted edges / all edges, both sides pooled

  bool all_accepted() const;
  bool buyer_side_ok() const;
};

// Throws std::invalid_argument when prices are not indexed like the instance.
AcceptanceReport acceptance_check(const MarketInstance& instance, const PriceVector& prices);

class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Canonical instance document. save(load(x)) is byte-identical once x is in
// canonical form (sorted object keys, caps ordered by (dataset, model)).
MarketInstance parse_instance(const std::string& text);
std::string serialize_instance(const MarketInstance& instance);
MarketInstance load_instance(const std::string& path);
void save_instance(const MarketInstance& instance, const std::string& path);

}  // namespace triplewin
