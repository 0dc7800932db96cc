// Exact Shapley contribution shares of datasets to a model, computed by
// full subset enumeration from an arbitrary coalition-utility function.
#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "triplewin/market.hpp"

namespace triplewin {

// Utility over coalitions of a fixed ground set of datasets. Coalitions
// are bitmasks over ground_set indices. value() must be deterministic and
// defined on all 2^n masks.
struct CoalitionUtility {
  std::vector<std::string> ground_set;
  std::function<double(std::uint32_t mask)> value;

  static constexpr std::size_t kMaxGroundSet = 20;

  std::size_t size() const { return ground_set.size(); }
  std::uint32_t full_mask() const { return (1u << ground_set.size()) - 1u; }
};

// Builds a utility from a dense table indexed by mask (size 2^n).
CoalitionUtility make_table_utility(std::vector<std::string> ground_set, std::vector<double> table);

// Exact Shapley value of one dataset: the subset-enumeration form with
// binomial weights,
//   SV_i = (1/n) * sum_{S not containing i} (U(S+i) - U(S)) / C(n-1,|S|).
// Throws std::length_error past the enumeration cap and
// std::invalid_argument for a dataset outside the ground set.
double shapley_exact(const CoalitionUtility& utility, const std::string& dataset_id);

// Raw values for the whole ground set, in ground-set order.
std::vector<double> shapley_raw(const CoalitionUtility& utility);

struct ShapleyNormalization {
  ShapleyTable table;
  // One message per clamped entry ("model/dataset raw=v clamped to 0").
  std::vector<std::string> clamp_log;
};

// Normalizes raw values into per-model shares summing to one. Negative raw
// values are clamped to zero first (and logged); a raw column sum <= 0 is a
// normalization error (std::runtime_error).
ShapleyNormalization shapley_table(const std::map<std::string, CoalitionUtility>& per_model);

// Subset-utility document: array of {model, subset: [dataset ids], utility}.
// Every model must cover all 2^n subsets of its ground set exactly once.
std::map<std::string, CoalitionUtility> parse_subset_utilities(const std::string& text);
std::map<std::string, CoalitionUtility> load_subset_utilities(const std::string& path);

}  // namespace triplewin
