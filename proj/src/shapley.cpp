#include "triplewin/shapley.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace triplewin {

using nlohmann::json;

CoalitionUtility make_table_utility(std::vector<std::string> ground_set, std::vector<double> table) {
  if (ground_set.size() > CoalitionUtility::kMaxGroundSet)
    throw std::length_error("ground set exceeds the exact-enumeration cap of 20 datasets");
  const std::size_t expected = std::size_t{1} << ground_set.size();
  if (table.size() != expected)
    throw std::invalid_argument("utility table must have 2^n entries, got " + std::to_string(table.size()));
  CoalitionUtility u;
  u.ground_set = std::move(ground_set);
  u.value = [t = std::move(table)](std::uint32_t mask) { return t[mask]; };
  return u;
}

namespace {

std::size_t index_of(const CoalitionUtility& utility, const std::string& dataset_id) {
  auto it = std::find(utility.ground_set.begin(), utility.ground_set.end(), dataset_id);
  if (it == utility.ground_set.end())
    throw std::invalid_argument("dataset not in ground set: " + dataset_id);
  return static_cast<std::size_t>(it - utility.ground_set.begin());
}

void check_capacity(const CoalitionUtility& utility) {
  if (utility.size() == 0) throw std::invalid_argument("empty ground set");
  if (utility.size() > CoalitionUtility::kMaxGroundSet)
    throw std::length_error("ground set exceeds the exact-enumeration cap of 20 datasets");
}

}  // namespace

double shapley_exact(const CoalitionUtility& utility, const std::string& dataset_id) {
  check_capacity(utility);
  const std::size_t n = utility.size();
  const std::uint32_t bit = 1u << index_of(utility, dataset_id);

  // Binomials C(n-1, s) are exact in double for n <= 20.
  std::vector<double> binom(n, 1.0);
  for (std::size_t s = 1; s < n; ++s)
    binom[s] = binom[s - 1] * static_cast<double>(n - s) / static_cast<double>(s);

  double total = 0.0;
  const std::uint32_t full = utility.full_mask();
  for (std::uint32_t mask = 0; mask <= full; ++mask) {
    if (mask & bit) continue;
    const int s = std::popcount(mask);
    total += (utility.value(mask | bit) - utility.value(mask)) / binom[s];
  }
  return total / static_cast<double>(n);
}

std::vector<double> shapley_raw(const CoalitionUtility& utility) {
  check_capacity(utility);
  std::vector<double> raw;
  raw.reserve(utility.size());
  for (const auto& id : utility.ground_set) raw.push_back(shapley_exact(utility, id));
  return raw;
}

ShapleyNormalization shapley_table(const std::map<std::string, CoalitionUtility>& per_model) {
  ShapleyNormalization result;
  for (const auto& [model, utility] : per_model) {
    std::vector<double> raw = shapley_raw(utility);
    double raw_sum = 0.0;
    for (double v : raw) raw_sum += v;
    if (!(raw_sum > 0.0))
      throw std::runtime_error("normalization error: raw shapley column for model " + model +
                               " sums to " + std::to_string(raw_sum));
    double clamped_sum = 0.0;
    for (std::size_t i = 0; i < raw.size(); ++i) {
      if (raw[i] < 0.0) {
        std::ostringstream msg;
        msg << model << "/" << utility.ground_set[i] << " raw=" << raw[i] << " clamped to 0";
        result.clamp_log.push_back(msg.str());
        raw[i] = 0.0;
      }
      clamped_sum += raw[i];
    }
    std::map<std::string, double> col;
    for (std::size_t i = 0; i < raw.size(); ++i) col[utility.ground_set[i]] = raw[i] / clamped_sum;
    result.table[model] = std::move(col);
  }
  return result;
}

std::map<std::string, CoalitionUtility> parse_subset_utilities(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("parse error at /: ") + e.what());
  }
  if (!doc.is_array()) throw ParseError("parse error at /: expected an array of subset-utility entries");

  struct Partial {
    std::vector<std::string> ground_set;                    // discovery order
    std::vector<std::pair<std::vector<std::string>, double>> entries;
  };
  std::map<std::string, Partial> partials;

  for (std::size_t i = 0; i < doc.size(); ++i) {
    const std::string path = "/" + std::to_string(i);
    const json& entry = doc[i];
    if (!entry.is_object() || !entry.contains("model") || !entry.contains("subset") ||
        !entry.contains("utility"))
      throw ParseError("parse error at " + path + ": entry needs model, subset, utility");
    if (!entry["model"].is_string()) throw ParseError("parse error at " + path + "/model: expected a string");
    if (!entry["subset"].is_array()) throw ParseError("parse error at " + path + "/subset: expected an array");
    if (!entry["utility"].is_number())
      throw ParseError("parse error at " + path + "/utility: expected a number");

    Partial& p = partials[entry["model"].get<std::string>()];
    std::vector<std::string> subset;
    for (const auto& id : entry["subset"]) {
      if (!id.is_string()) throw ParseError("parse error at " + path + "/subset: expected dataset id strings");
      subset.push_back(id.get<std::string>());
      if (std::find(p.ground_set.begin(), p.ground_set.end(), subset.back()) == p.ground_set.end())
        p.ground_set.push_back(subset.back());
    }
    p.entries.emplace_back(std::move(subset), entry["utility"].get<double>());
  }

  std::map<std::string, CoalitionUtility> out;
  for (auto& [model, p] : partials) {
    std::sort(p.ground_set.begin(), p.ground_set.end());
    if (p.ground_set.size() > CoalitionUtility::kMaxGroundSet)
      throw ParseError("model " + model + " has " + std::to_string(p.ground_set.size()) +
                       " datasets, past the exact-enumeration cap of 20");
    const std::size_t n = p.ground_set.size();
    const std::size_t expected = std::size_t{1} << n;
    std::vector<double> table(expected, 0.0);
    std::vector<bool> seen(expected, false);
    for (const auto& [subset, utility] : p.entries) {
      std::uint32_t mask = 0;
      for (const auto& id : subset) {
        const std::size_t idx =
            std::find(p.ground_set.begin(), p.ground_set.end(), id) - p.ground_set.begin();
        const std::uint32_t bit = 1u << idx;
        if (mask & bit) throw ParseError("model " + model + ": subset lists dataset " + id + " twice");
        mask |= bit;
      }
      if (seen[mask]) throw ParseError("model " + model + ": duplicate subset entry");
      seen[mask] = true;
      table[mask] = utility;
    }
    if (p.entries.size() != expected)
      throw ParseError("model " + model + ": expected all " + std::to_string(expected) +
                       " subsets of its " + std::to_string(n) + " datasets, got " +
                       std::to_string(p.entries.size()));
    out[model] = make_table_utility(p.ground_set, std::move(table));
  }
  return out;
}

std::map<std::string, CoalitionUtility> load_subset_utilities(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open subset-utility file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_subset_utilities(buf.str());
}

}  // namespace triplewin
