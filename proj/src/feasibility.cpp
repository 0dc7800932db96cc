#include "triplewin/feasibility.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace triplewin {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct ModelStats {
  double rho = 0.0;
  double s = 0.0;      // baseline data-offset sum
  double r_bar = 0.0;  // max reserve over the model's buyers
};

ModelStats stats_of(const MarketInstance& instance, const ModelSpec& m) {
  ModelStats st;
  st.rho = m.rho();
  for (const auto& id : m.dataset_ids) st.s += instance.dataset_offset(id);
  for (const auto& b : m.buyers) st.r_bar = std::max(st.r_bar, b.reserve);
  return st;
}

// Slack of edge (j,k): R_jk - a_kM * kM0_j - rho_j * Rbar_j.
double edge_slack(const ModelSpec& m, const ModelStats& st, const BuyerEdge& b, double alpha_km) {
  return b.reserve - alpha_km * m.kappa_m - st.rho * st.r_bar;
}

// Shared sweep over (j,k): feeds each edge's bound for the free axis into
// the market-wide minimum, tracking the binding edge and whether any edge
// rules out the whole grid point.
template <typename BoundFn>
EnvelopeSample min_over_edges(const MarketInstance& instance, double x, BoundFn&& bound) {
  EnvelopeSample sample;
  sample.x = x;
  sample.y_max = kInf;
  for (const auto& m : instance.models) {
    const ModelStats st = stats_of(instance, m);
    for (const auto& b : m.buyers) {
      const auto [y, restricts, hopeless] = bound(m, st, b);
      if (hopeless) {
        sample.feasible_any = false;
        sample.binding_model = m.id;
        sample.binding_buyer = b.buyer_id;
        return sample;
      }
      if (restricts && y < sample.y_max) {
        sample.y_max = y;
        sample.binding_model = m.id;
        sample.binding_buyer = b.buyer_id;
      }
    }
  }
  return sample;
}

struct EdgeBound {
  double y = 0.0;
  bool restricts = false;
  bool hopeless = false;
};

EnvelopeSample alpha_delta_max_at(const MarketInstance& instance, double alpha_km, double alpha_kd) {
  return min_over_edges(instance, alpha_kd, [&](const ModelSpec& m, const ModelStats& st,
                                                const BuyerEdge& b) {
    EdgeBound out;
    const double slack = edge_slack(m, st, b, alpha_km);
    if (slack <= 0.0) {
      out.hopeless = true;
      return std::tuple{out.y, out.restricts, out.hopeless};
    }
    if (m.delta > 0.0) {
      out.y = (slack / (alpha_kd * st.s) - 1.0) / m.delta;
      out.restricts = true;
    }
    return std::tuple{out.y, out.restricts, out.hopeless};
  });
}

}  // namespace

std::vector<EnvelopeSample> envelope_alpha_delta_vs_alpha_kd(const MarketInstance& instance,
                                                             double alpha_km,
                                                             std::span<const double> alpha_kd_grid) {
  std::vector<EnvelopeSample> curve;
  curve.reserve(alpha_kd_grid.size());
  for (double alpha_kd : alpha_kd_grid) {
    if (!(alpha_kd > 0.0)) throw std::invalid_argument("alpha_kappa_d grid values must be positive");
    curve.push_back(alpha_delta_max_at(instance, alpha_km, alpha_kd));
  }
  return curve;
}

std::vector<EnvelopeSample> envelope_alpha_delta_vs_alpha_km(const MarketInstance& instance,
                                                             double alpha_kd,
                                                             std::span<const double> alpha_km_grid) {
  if (!(alpha_kd > 0.0)) throw std::invalid_argument("alpha_kappa_d must be positive");
  std::vector<EnvelopeSample> curve;
  curve.reserve(alpha_km_grid.size());
  for (double alpha_km : alpha_km_grid) {
    EnvelopeSample s = alpha_delta_max_at(instance, alpha_km, alpha_kd);
    s.x = alpha_km;
    curve.push_back(s);
  }
  return curve;
}

std::vector<EnvelopeSample> envelope_alpha_km_vs_alpha_kd(const MarketInstance& instance,
                                                          double alpha_delta,
                                                          std::span<const double> alpha_kd_grid) {
  if (!(alpha_delta >= 0.0)) throw std::invalid_argument("alpha_delta must be nonnegative");
  std::vector<EnvelopeSample> curve;
  curve.reserve(alpha_kd_grid.size());
  for (double alpha_kd : alpha_kd_grid) {
    if (!(alpha_kd > 0.0)) throw std::invalid_argument("alpha_kappa_d grid values must be positive");
    curve.push_back(min_over_edges(
        instance, alpha_kd, [&](const ModelSpec& m, const ModelStats& st, const BuyerEdge& b) {
          EdgeBound out;
          out.y = (b.reserve - (1.0 + alpha_delta * m.delta) * alpha_kd * st.s - st.rho * st.r_bar) /
                  m.kappa_m;
          out.restricts = true;
          out.hopeless = false;
          return std::tuple{out.y, out.restricts, out.hopeless};
        }));
  }
  return curve;
}

std::vector<EnvelopeSample> envelope_alpha_kd_vs_alpha_km(const MarketInstance& instance,
                                                          double alpha_delta,
                                                          std::span<const double> alpha_km_grid) {
  if (!(alpha_delta >= 0.0)) throw std::invalid_argument("alpha_delta must be nonnegative");
  std::vector<EnvelopeSample> curve;
  curve.reserve(alpha_km_grid.size());
  for (double alpha_km : alpha_km_grid) {
    curve.push_back(min_over_edges(
        instance, alpha_km, [&](const ModelSpec& m, const ModelStats& st, const BuyerEdge& b) {
          EdgeBound out;
          const double slack = edge_slack(m, st, b, alpha_km);
          if (slack <= 0.0) {
            out.hopeless = true;
            return std::tuple{out.y, out.restricts, out.hopeless};
          }
          out.y = slack / ((1.0 + alpha_delta * m.delta) * st.s);
          out.restricts = true;
          return std::tuple{out.y, out.restricts, out.hopeless};
        }));
  }
  return curve;
}

bool global_feasibility(const MarketInstance& instance, double alpha_kd, double alpha_km,
                        double alpha_delta) {
  if (!(alpha_kd > 0.0 && alpha_km > 0.0 && alpha_delta >= 0.0))
    throw std::invalid_argument("scalings must be positive (alpha_delta may be zero)");
  for (const auto& m : instance.models) {
    const ModelStats st = stats_of(instance, m);
    const double lhs = (1.0 + alpha_delta * m.delta) * alpha_kd * st.s;
    for (const auto& b : m.buyers)
      if (lhs > edge_slack(m, st, b, alpha_km)) return false;
  }
  return true;
}

const char* panel_name(EnvelopePanel panel) {
  switch (panel) {
    case EnvelopePanel::kd_delta: return "kd_delta";
    case EnvelopePanel::km_delta: return "km_delta";
    case EnvelopePanel::kd_km: return "kd_km";
  }
  return "?";
}

namespace {

QuotationParams panel_params(EnvelopePanel panel, double x, double y, double fixed_third) {
  QuotationParams p;
  switch (panel) {
    case EnvelopePanel::kd_delta:
      p.alpha_kappa_d = x;
      p.alpha_delta = y;
      p.alpha_kappa_m = fixed_third;
      break;
    case EnvelopePanel::km_delta:
      p.alpha_kappa_m = x;
      p.alpha_delta = y;
      p.alpha_kappa_d = fixed_third;
      break;
    case EnvelopePanel::kd_km:
      p.alpha_kappa_d = x;
      p.alpha_kappa_m = y;
      p.alpha_delta = fixed_third;
      break;
  }
  return p;
}

EnvelopeSample analytic_sample(const MarketInstance& instance, EnvelopePanel panel, double x,
                               double fixed_third) {
  switch (panel) {
    case EnvelopePanel::kd_delta:
      return envelope_alpha_delta_vs_alpha_kd(instance, fixed_third, std::span(&x, 1))[0];
    case EnvelopePanel::km_delta:
      return envelope_alpha_delta_vs_alpha_km(instance, fixed_third, std::span(&x, 1))[0];
    case EnvelopePanel::kd_km:
      return envelope_alpha_km_vs_alpha_kd(instance, fixed_third, std::span(&x, 1))[0];
  }
  throw std::logic_error("unknown panel");
}

}  // namespace

std::vector<FrontierPoint> numerical_frontier(const MarketInstance& instance, EnvelopePanel panel,
                                              double fixed_third, std::span<const double> x_grid,
                                              double bisect_tol, const SolverConfig& solver) {
  // The free axis of kd_km is an offset scaling, which must stay positive.
  const double lo_floor = panel == EnvelopePanel::kd_km ? 1e-9 : 0.0;

  std::vector<FrontierPoint> curve;
  curve.reserve(x_grid.size());
  for (double x : x_grid) {
    FrontierPoint point;
    point.x = x;
    const EnvelopeSample analytic = analytic_sample(instance, panel, x, fixed_third);
    point.analytic_max = analytic.feasible_any ? analytic.y_max : -kInf;
    point.binding_model = analytic.binding_model;
    point.binding_buyer = analytic.binding_buyer;

    if (!analytic.feasible_any || !std::isfinite(analytic.y_max)) {
      curve.push_back(point);
      continue;
    }

    auto buyer_feasible = [&](double y) {
      const QuotationParams params = panel_params(panel, x, std::max(y, lo_floor), fixed_third);
      return solve(instance, params, solver).acceptance.buyer_side_ok();
    };

    double lo = lo_floor;
    double hi = 10.0 * std::max(std::abs(analytic.y_max), bisect_tol);
    if (!buyer_feasible(lo) || buyer_feasible(hi)) {
      curve.push_back(point);  // bracket failure: left unresolved
      continue;
    }
    while (hi - lo > bisect_tol) {
      const double mid = 0.5 * (lo + hi);
      (buyer_feasible(mid) ? lo : hi) = mid;
    }
    point.numeric_max = lo;
    point.resolved = true;
    curve.push_back(point);
  }
  return curve;
}

SolverConfig tight_solver_config() {
  SolverConfig config;
  config.epsilon = 1e-12;
  config.max_iterations = 200000;
  return config;
}

MonotonicityVerdict offset_monotonicity_check(const MarketInstance& instance,
                                              const std::map<std::string, double>& dataset_increments,
                                              const std::map<std::string, double>& model_increments,
                                              SolverConfig config) {
  for (const auto& [id, inc] : dataset_increments)
    if (!(inc >= 0.0)) throw std::invalid_argument("negative offset increment for dataset " + id);
  for (const auto& [id, inc] : model_increments)
    if (!(inc >= 0.0)) throw std::invalid_argument("negative offset increment for model " + id);

  MarketInstance shifted = instance;
  for (auto& d : shifted.datasets) {
    auto it = dataset_increments.find(d.id);
    if (it != dataset_increments.end()) d.kappa_d += it->second;
  }
  for (auto& m : shifted.models) {
    auto it = model_increments.find(m.id);
    if (it != model_increments.end()) m.kappa_m += it->second;
  }

  MonotonicityVerdict verdict;
  verdict.base = solve(instance, {}, config).prices;
  verdict.shifted = solve(shifted, {}, config).prices;

  auto complain = [&](const std::string& what) { verdict.violations.push_back(what); };

  std::size_t be = 0, de = 0;
  for (const auto& m : instance.models) {
    const bool model_raised =
        model_increments.count(m.id) && model_increments.at(m.id) > 0.0;
    for (const auto& b : m.buyers) {
      const double diff = verdict.shifted.buyer[be] - verdict.base.buyer[be];
      if (diff < -1e-9)
        complain("buyer edge " + b.buyer_id + "->" + m.id + " fell by " + std::to_string(-diff));
      if (model_raised && diff <= 1e-12)
        complain("buyer edge " + b.buyer_id + "->" + m.id + " did not strictly rise");
      ++be;
    }
    for (const auto& id : m.dataset_ids) {
      const bool dataset_raised = dataset_increments.count(id) && dataset_increments.at(id) > 0.0;
      const double diff = verdict.shifted.data[de] - verdict.base.data[de];
      if (diff < -1e-9)
        complain("data edge " + id + "->" + m.id + " fell by " + std::to_string(-diff));
      if (dataset_raised && diff <= 1e-12)
        complain("data edge " + id + "->" + m.id + " did not strictly rise");
      ++de;
    }
  }
  verdict.pass = verdict.violations.empty();
  return verdict;
}

FeeResult max_uniform_fee(const MarketInstance& instance) {
  FeeResult result;
  result.alpha_star = kInf;
  for (const auto& m : instance.models) {
    double s = 0.0;
    for (const auto& id : m.dataset_ids) s += instance.dataset_offset(id);
    double r_min = kInf;
    for (const auto& b : m.buyers) r_min = std::min(r_min, b.reserve);
    const double bound = (1.0 - m.rho()) * r_min / (m.kappa_m + (1.0 + m.delta) * s);
    if (bound < result.alpha_star) {
      result.alpha_star = bound;
      result.binding_model = m.id;
    }
  }
  result.tau_star = std::max(0.0, 1.0 - 1.0 / result.alpha_star);
  return result;
}

}  // namespace triplewin
