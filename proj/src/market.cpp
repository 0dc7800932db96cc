#include "triplewin/market.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace triplewin {

using nlohmann::json;

double ModelSpec::rho() const {
  double sum = 0.0;
  for (const auto& b : buyers) sum += b.omega;
  return sum;
}

const DatasetSpec* MarketInstance::find_dataset(const std::string& id) const {
  for (const auto& d : datasets)
    if (d.id == id) return &d;
  return nullptr;
}

const ModelSpec* MarketInstance::find_model(const std::string& id) const {
  for (const auto& m : models)
    if (m.id == id) return &m;
  return nullptr;
}

double MarketInstance::dataset_offset(const std::string& dataset_id) const {
  const DatasetSpec* d = find_dataset(dataset_id);
  if (!d) throw std::invalid_argument("unknown dataset id: " + dataset_id);
  return d->kappa_d;
}

double MarketInstance::shapley_share(const std::string& model_id, const std::string& dataset_id) const {
  auto mit = shapley.find(model_id);
  if (mit == shapley.end()) throw std::invalid_argument("no shapley column for model: " + model_id);
  auto dit = mit->second.find(dataset_id);
  if (dit == mit->second.end())
    throw std::invalid_argument("no shapley share for dataset " + dataset_id + " in model " + model_id);
  return dit->second;
}

std::size_t MarketInstance::buyer_edge_count() const {
  std::size_t n = 0;
  for (const auto& m : models) n += m.buyers.size();
  return n;
}

std::size_t MarketInstance::data_edge_count() const {
  std::size_t n = 0;
  for (const auto& m : models) n += m.dataset_ids.size();
  return n;
}

std::size_t MarketInstance::dimension() const { return buyer_edge_count() + data_edge_count(); }

PriceVector PriceVector::zeros(const MarketInstance& instance) {
  PriceVector p;
  p.buyer.assign(instance.buyer_edge_count(), 0.0);
  p.data.assign(instance.data_edge_count(), 0.0);
  return p;
}

bool PriceVector::matches(const MarketInstance& instance) const {
  return buyer.size() == instance.buyer_edge_count() && data.size() == instance.data_edge_count();
}

namespace {

std::string render(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

bool finite_pos(double v) { return std::isfinite(v) && v > 0.0; }

}  // namespace

ValidationReport validate(const MarketInstance& instance) {
  ValidationReport report;
  auto flag = [&](std::string field, std::string invariant, std::string value) {
    report.violations.push_back({std::move(field), std::move(invariant), std::move(value)});
  };

  std::set<std::string> dataset_ids;
  for (const auto& d : instance.datasets) {
    if (!dataset_ids.insert(d.id).second)
      flag("datasets[" + d.id + "].id", "ids must be unique within their category", d.id);
    if (!finite_pos(d.kappa_d))
      flag("datasets[" + d.id + "].kappa_d", "kappa_d must be strictly positive", render(d.kappa_d));
  }

  std::set<std::string> model_ids;
  for (const auto& m : instance.models) {
    const std::string where = "models[" + m.id + "]";
    if (!model_ids.insert(m.id).second)
      flag(where + ".id", "ids must be unique within their category", m.id);
    if (!finite_pos(m.kappa_m))
      flag(where + ".kappa_m", "kappa_m must be strictly positive", render(m.kappa_m));
    if (!(std::isfinite(m.delta) && m.delta >= 0.0))
      flag(where + ".delta", "delta must be nonnegative", render(m.delta));

    if (m.dataset_ids.empty())
      flag(where + ".datasets", "model must reference at least one dataset", "[]");
    std::set<std::string> used;
    for (const auto& id : m.dataset_ids) {
      if (!used.insert(id).second)
        flag(where + ".datasets", "dataset referenced twice by same model", id);
      if (!dataset_ids.count(id))
        flag(where + ".datasets", "referenced dataset does not exist", id);
    }

    if (m.buyers.empty())
      flag(where + ".buyers", "model must have at least one buyer edge", "[]");
    std::set<std::string> buyer_ids;
    double rho = 0.0;
    for (const auto& b : m.buyers) {
      const std::string bwhere = where + ".buyers[" + b.buyer_id + "]";
      if (!buyer_ids.insert(b.buyer_id).second)
        flag(bwhere, "buyer ids must be unique within a model", b.buyer_id);
      if (!(std::isfinite(b.omega) && b.omega >= 0.0))
        flag(bwhere + ".omega", "omega must be nonnegative", render(b.omega));
      if (!finite_pos(b.reserve))
        flag(bwhere + ".reserve", "reserve must be positive", render(b.reserve));
      rho += b.omega;
    }
    if (!(std::isfinite(rho) && rho >= 0.0 && rho < 1.0))
      flag(where + ".rho", "rho_j must lie in [0,1)", render(rho));

    auto col = instance.shapley.find(m.id);
    if (col == instance.shapley.end()) {
      flag("shapley[" + m.id + "]", "shapley column missing for model", m.id);
    } else {
      double sum = 0.0;
      for (const auto& id : m.dataset_ids) {
        auto it = col->second.find(id);
        if (it == col->second.end()) {
          flag("shapley[" + m.id + "][" + id + "]", "shapley share missing for dataset edge", id);
          continue;
        }
        if (!(std::isfinite(it->second) && it->second >= 0.0))
          flag("shapley[" + m.id + "][" + id + "]", "shapley shares must be nonnegative", render(it->second));
        sum += it->second;
      }
      for (const auto& [id, sv] : col->second)
        if (std::find(m.dataset_ids.begin(), m.dataset_ids.end(), id) == m.dataset_ids.end())
          flag("shapley[" + m.id + "][" + id + "]", "shapley share for dataset not used by model", render(sv));
      if (std::abs(sum - 1.0) > 1e-12)
        flag("shapley[" + m.id + "]", "shapley column must sum to 1 within 1e-12", render(sum));
    }
  }

  for (const auto& [model_id, col] : instance.shapley) {
    (void)col;
    if (!model_ids.count(model_id))
      flag("shapley[" + model_id + "]", "shapley column for unknown model", model_id);
  }

  for (const auto& [edge, cap] : instance.caps) {
    const auto& [dataset_id, model_id] = edge;
    const std::string where = "caps[" + dataset_id + "," + model_id + "]";
    const ModelSpec* m = instance.find_model(model_id);
    if (!dataset_ids.count(dataset_id) || !m ||
        std::find(m->dataset_ids.begin(), m->dataset_ids.end(), dataset_id) == m->dataset_ids.end()) {
      flag(where, "cap references a nonexistent dataset-model edge", dataset_id + "," + model_id);
      continue;
    }
    if (!finite_pos(cap)) flag(where, "cap must be positive", render(cap));
  }

  return report;
}

bool AcceptanceReport::all_accepted() const {
  for (bool ok : buyer_ok)
    if (!ok) return false;
  for (bool ok : data_ok)
    if (!ok) return false;
  return true;
}

bool AcceptanceReport::buyer_side_ok() const {
  for (bool ok : buyer_ok)
    if (!ok) return false;
  return true;
}

AcceptanceReport acceptance_check(const MarketInstance& instance, const PriceVector& prices) {
  if (!prices.matches(instance))
    throw std::invalid_argument("price vector does not match instance edge sets (" +
                                std::to_string(prices.buyer.size()) + "x" + std::to_string(prices.data.size()) +
                                " vs " + std::to_string(instance.buyer_edge_count()) + "x" +
                                std::to_string(instance.data_edge_count()) + ")");

  AcceptanceReport report;
  report.buyer_ok.reserve(prices.buyer.size());
  report.data_ok.reserve(prices.data.size());

  std::size_t accepted = 0;
  std::size_t be = 0, de = 0;
  for (const auto& m : instance.models) {
    for (const auto& b : m.buyers) {
      const bool ok = prices.buyer[be++] <= b.reserve;  // inclusive
      report.buyer_ok.push_back(ok);
      accepted += ok;
    }
    for (const auto& id : m.dataset_ids) {
      const bool ok = prices.data[de++] >= instance.dataset_offset(id);  // inclusive
      report.data_ok.push_back(ok);
      accepted += ok;
    }
  }
  const std::size_t total = prices.dimension();
  report.success_rate = total == 0 ? 1.0 : static_cast<double>(accepted) / static_cast<double>(total);
  return report;
}

namespace {

const json& require_key(const json& j, const char* key, const std::string& path) {
  if (!j.is_object())
    throw ParseError("parse error at " + (path.empty() ? std::string("/") : path) + ": expected an object");
  auto it = j.find(key);
  if (it == j.end()) throw ParseError("parse error at " + path + "/" + key + ": missing required key");
  return *it;
}

double require_number(const json& j, const char* key, const std::string& path) {
  const json& v = require_key(j, key, path);
  if (!v.is_number()) throw ParseError("parse error at " + path + "/" + key + ": expected a number");
  return v.get<double>();
}

std::string require_string(const json& j, const char* key, const std::string& path) {
  const json& v = require_key(j, key, path);
  if (!v.is_string()) throw ParseError("parse error at " + path + "/" + key + ": expected a string");
  return v.get<std::string>();
}

const json& require_array(const json& j, const char* key, const std::string& path) {
  const json& v = require_key(j, key, path);
  if (!v.is_array()) throw ParseError("parse error at " + path + "/" + key + ": expected an array");
  return v;
}

}  // namespace

MarketInstance parse_instance(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("parse error at /: ") + e.what());
  }

  MarketInstance instance;

  const json& datasets = require_array(doc, "datasets", "");
  for (std::size_t i = 0; i < datasets.size(); ++i) {
    const std::string path = "/datasets/" + std::to_string(i);
    DatasetSpec d;
    d.id = require_string(datasets[i], "id", path);
    d.kappa_d = require_number(datasets[i], "kappa_d", path);
    instance.datasets.push_back(std::move(d));
  }

  const json& models = require_array(doc, "models", "");
  for (std::size_t i = 0; i < models.size(); ++i) {
    const std::string path = "/models/" + std::to_string(i);
    ModelSpec m;
    m.id = require_string(models[i], "id", path);
    m.kappa_m = require_number(models[i], "kappa_m", path);
    m.delta = require_number(models[i], "delta", path);
    const json& ds = require_array(models[i], "datasets", path);
    for (std::size_t k = 0; k < ds.size(); ++k) {
      if (!ds[k].is_string())
        throw ParseError("parse error at " + path + "/datasets/" + std::to_string(k) + ": expected a string");
      m.dataset_ids.push_back(ds[k].get<std::string>());
    }
    const json& buyers = require_array(models[i], "buyers", path);
    for (std::size_t k = 0; k < buyers.size(); ++k) {
      const std::string bpath = path + "/buyers/" + std::to_string(k);
      BuyerEdge b;
      b.buyer_id = require_string(buyers[k], "id", bpath);
      b.omega = require_number(buyers[k], "omega", bpath);
      b.reserve = require_number(buyers[k], "reserve", bpath);
      m.buyers.push_back(std::move(b));
    }
    instance.models.push_back(std::move(m));
  }

  const json& caps = require_array(doc, "caps", "");
  for (std::size_t i = 0; i < caps.size(); ++i) {
    const std::string path = "/caps/" + std::to_string(i);
    std::string dataset = require_string(caps[i], "dataset", path);
    std::string model = require_string(caps[i], "model", path);
    double cap = require_number(caps[i], "cap", path);
    instance.caps[{std::move(dataset), std::move(model)}] = cap;
  }

  const json& shapley = require_array(doc, "shapley", "");
  for (std::size_t i = 0; i < shapley.size(); ++i) {
    const std::string path = "/shapley/" + std::to_string(i);
    std::string model = require_string(shapley[i], "model", path);
    const json& shares = require_key(shapley[i], "shares", path);
    if (!shares.is_object()) throw ParseError("parse error at " + path + "/shares: expected an object");
    std::map<std::string, double> col;
    for (const auto& [dataset, value] : shares.items()) {
      if (!value.is_number())
        throw ParseError("parse error at " + path + "/shares/" + dataset + ": expected a number");
      col[dataset] = value.get<double>();
    }
    instance.shapley[std::move(model)] = std::move(col);
  }

  return instance;
}

std::string serialize_instance(const MarketInstance& instance) {
  json doc;

  json datasets = json::array();
  for (const auto& d : instance.datasets) datasets.push_back({{"id", d.id}, {"kappa_d", d.kappa_d}});
  doc["datasets"] = std::move(datasets);

  json models = json::array();
  for (const auto& m : instance.models) {
    json buyers = json::array();
    for (const auto& b : m.buyers)
      buyers.push_back({{"id", b.buyer_id}, {"omega", b.omega}, {"reserve", b.reserve}});
    models.push_back({{"id", m.id},
                      {"kappa_m", m.kappa_m},
                      {"delta", m.delta},
                      {"datasets", m.dataset_ids},
                      {"buyers", std::move(buyers)}});
  }
  doc["models"] = std::move(models);

  json caps = json::array();
  for (const auto& [edge, cap] : instance.caps)
    caps.push_back({{"dataset", edge.first}, {"model", edge.second}, {"cap", cap}});
  doc["caps"] = std::move(caps);

  json shapley = json::array();
  for (const auto& [model, col] : instance.shapley) {
    json shares = json::object();
    for (const auto& [dataset, sv] : col) shares[dataset] = sv;
    shapley.push_back({{"model", model}, {"shares", std::move(shares)}});
  }
  doc["shapley"] = std::move(shapley);

  return doc.dump(2) + "\n";
}

MarketInstance load_instance(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open instance file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_instance(buf.str());
}

void save_instance(const MarketInstance& instance, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write instance file: " + path);
  out << serialize_instance(instance);
}

}  // namespace triplewin
