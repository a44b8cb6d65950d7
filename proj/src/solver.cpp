#include "eml/solver.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <string>

namespace eml {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Strictly better by more than rounding noise; near-ties keep the earlier candidate.
bool beats(double v, double best) { return v > best + 1e-12 * std::max(1.0, std::fabs(best)); }

double positive_part(double x) { return x >= 0.0 ? x : 0.0; }

bool nonnegative(const Prices& p) {
  return std::isfinite(p.on_demand) && std::isfinite(p.sharing) && p.on_demand >= 0.0 && p.sharing >= 0.0;
}

std::string fmt_interval(double lo, double hi) {
  char buf[96];
  std::snprintf(buf, sizeof buf, "[%.6g, %.6g]", lo, hi);
  return buf;
}

void check_commission(double commission) {
  if (!(commission >= 0.0 && commission <= 1.0)) throw std::invalid_argument("commission (delta) must lie in [0,1]");
}

// Lowest on-demand price that keeps p_r inside R3 (p_r <= max(q_s/q_o,1) p_o - (q_o-q_s)^+).
double r3_min_on_demand_price(double pr, const Supplies& s) {
  if (supply_order(s) == SupplyOrder::Equal) return pr;  // needs p_r < p_o, strictly
  return (pr + positive_part(s.on_demand - s.sharing)) / std::max(s.sharing / s.on_demand, 1.0);
}

// Lowest sharing price that keeps p_o inside R2.
double r2_min_sharing_price(double po, const Supplies& s) {
  if (supply_order(s) == SupplyOrder::Equal) return po;
  return std::min(s.sharing / s.on_demand, 1.0) * po + positive_part(s.sharing - s.on_demand);
}

const Candidate* pick(const std::vector<const Candidate*>& ordered) {
  const Candidate* best = nullptr;
  for (const auto* c : ordered) {
    if (c == nullptr || !c->feasible) continue;
    if (best == nullptr || beats(c->revenue, best->revenue)) best = c;
  }
  return best;
}

}  // namespace

const Candidate* SolveResult::best_candidate(std::string_view prefix) const {
  const Candidate* best = nullptr;
  for (const auto& c : diagnostics) {
    if (!c.feasible || std::string_view(c.label).substr(0, prefix.size()) != prefix) continue;
    if (best == nullptr || c.revenue > best->revenue) best = &c;
  }
  return best;
}

GridArgmax revenue_grid_search(const Supplies& s, double commission, int n, const Distribution& types,
                               const GridAxis& on_demand_prices, const GridAxis& sharing_prices) {
  return grid_argmax(on_demand_prices, sharing_prices, [&](double po, double pr) {
    return revenue_general({po, pr}, s, commission, n, types);
  });
}

GridArgmax revenue_grid_search_serial(const Supplies& s, double commission, int n, const Distribution& types,
                                      const GridAxis& on_demand_prices, const GridAxis& sharing_prices) {
  return grid_argmax_serial(on_demand_prices, sharing_prices, [&](double po, double pr) {
    return revenue_general({po, pr}, s, commission, n, types);
  });
}

bool convexity_gate(const Supplies& s, double commission) {
  return (commission + 1.0) * (commission + 1.0) * s.sharing < 4.0 * commission * s.on_demand;
}

SolveResult solve_case1(const Supplies& s, double commission, int n) {
  validate(s);
  if (!(s.sharing > 0.0)) throw std::invalid_argument("solve_case1: sharing supply must be > 0");
  check_commission(commission);
  if (n < 1) throw std::invalid_argument("solve_case1: n must be >= 1");

  const auto uniform = Distribution::uniform();
  const auto revenue_at = [&](const Prices& p) { return revenue_general(p, s, commission, n, uniform); };
  const auto make = [&](std::string label, Prices p, bool feasible, std::string note) {
    feasible = feasible && nonnegative(p);
    return Candidate{std::move(label), p, nonnegative(p) ? revenue_at(p) : 0.0, feasible, std::move(note)};
  };

  const double qo = s.on_demand;
  const double qs = s.sharing;
  const double d = commission;
  const double dp1sq = (1.0 + d) * (1.0 + d);

  SolveResult out;
  std::vector<Candidate>& diag = out.diagnostics;
  diag.reserve(8);
  std::optional<std::size_t> interior, r1_grid;
  std::vector<std::size_t> boundary;

  const auto order = supply_order(s);
  if (order == SupplyOrder::SharingDominant) {
    const double denom = 4.0 * qs * d - dp1sq * qo;
    if (denom > 0.0) {
      const Prices p{d * (1.0 + d) * qo * (qs - qo) / denom,
                     (qs - qo) / 2.0 + dp1sq * qo * (qs - qo) / (2.0 * denom)};
      const bool inside = in_region(RegionLabel::R1, p, s);
      diag.push_back(make("R1a", p, inside, inside ? "interior stationary point" : "stationary point outside R1"));
    } else {
      diag.push_back({"R1a", {kNaN, kNaN}, 0.0, false, "objective not concave (4 q_s delta <= (1+delta)^2 q_o)"});
    }
    interior = diag.size() - 1;
    if (!diag.back().feasible) {
      diag.push_back(make("R1a@R2", {qo / 2.0, qs - qo / 2.0}, true, "boundary with R2"));
      boundary.push_back(diag.size() - 1);
      diag.push_back(make("R1a@R3", {qo / 2.0, qs / 2.0}, true, "boundary with R3"));
      boundary.push_back(diag.size() - 1);
    }
  } else if (order == SupplyOrder::OnDemandDominant) {
    if (convexity_gate(s, d)) {
      const double denom = 4.0 * d * qo - dp1sq * qs;
      const Prices p{2.0 * d * qo * (qo - qs) / denom, qs * (d + 1.0) * (qo - qs) / denom};
      const bool inside = in_region(RegionLabel::R1, p, s);
      diag.push_back(make("R1b", p, inside, inside ? "interior stationary point" : "stationary point outside R1"));
      interior = diag.size() - 1;
      if (!inside) {
        diag.push_back(make("R1b@R3", {qo - qs / 2.0, qs / 2.0}, true, "boundary with R3"));
        boundary.push_back(diag.size() - 1);
        diag.push_back(make("R1b@R2", {qo / 2.0, qs / 2.0}, true, "boundary with R2"));
        boundary.push_back(diag.size() - 1);
      }
    } else {
      const double hi = std::max({1.0, qo, qs});
      const GridAxis axis{0.0, hi, 1e-3};
      const Region r1{RegionLabel::R1, SupplyOrder::OnDemandDominant};
      const auto best = grid_argmax(axis, axis, [&](double po, double pr) {
        const Prices p{po, pr};
        return in_region(RegionLabel::R1, p, s) ? region_formula(r1, p, s, d, n) : kNaN;
      });
      const std::string note = "convexity gate failed ((delta+1)^2 q_s >= 4 delta q_o); grid search, step 1e-3";
      if (best.found) {
        diag.push_back(make("R1b-grid", {best.x, best.y}, true, note));
      } else {
        diag.push_back({"R1b-grid", {kNaN, kNaN}, 0.0, false, note + "; no grid point inside R1"});
      }
      r1_grid = diag.size() - 1;
      out.warnings.push_back(note);
    }
  } else {
    diag.push_back({"R1", {kNaN, kNaN}, 0.0, false, "R1 is empty when q_s == q_o"});
  }

  // R2: p_o = q_o / 2 with any sharing price at or above the R2 boundary.
  std::size_t r2;
  {
    const double po = qo / 2.0;
    const double lo = r2_min_sharing_price(po, s);
    const double hi = std::max(lo, qs);
    const Prices p{po, (lo + hi) / 2.0};
    const bool ok = classify(p, s).label == RegionLabel::R2;
    diag.push_back(make("R2", p, ok, "free sharing price: any value in " + fmt_interval(lo, hi) + " or above"));
    r2 = diag.size() - 1;
  }
  // R3: p_r = q_s / 2 with any on-demand price at or above the R3 boundary.
  std::size_t r3;
  {
    const double pr = qs / 2.0;
    const double lo = r3_min_on_demand_price(pr, s);
    const double hi = std::max(lo, qo);
    const Prices p{(lo + hi) / 2.0, pr};
    const bool ok = classify(p, s).label == RegionLabel::R3;
    diag.push_back(make("R3", p, ok, "free on-demand price: any value in " + fmt_interval(lo, hi) + " or above"));
    r3 = diag.size() - 1;
  }
  diag.push_back(make("R4", {qo, qs}, true, "no purchases"));
  const std::size_t r4 = diag.size() - 1;

  std::vector<const Candidate*> ordered;
  if (interior) ordered.push_back(&diag[*interior]);
  ordered.push_back(&diag[r2]);
  ordered.push_back(&diag[r3]);
  for (auto i : boundary) ordered.push_back(&diag[i]);
  if (r1_grid) ordered.push_back(&diag[*r1_grid]);
  ordered.push_back(&diag[r4]);

  const Candidate* win = pick(ordered);
  out.prices = win->prices;
  out.region = classify(out.prices, s);
  out.revenue = revenue_at(out.prices);
  out.sharing_supply = qs;
  return out;
}

std::vector<OnDemandCandidate> optimal_po_given_pr(double pr, double qs, double qo, double commission) {
  check_commission(commission);
  if (!(qo > 0.0)) throw std::invalid_argument("optimal_po_given_pr: q_o must be > 0");
  std::vector<OnDemandCandidate> out;
  const Supplies s{qo, qs};
  const auto order = supply_order(s);
  const double d = commission;
  const double b1 = pr - qs + qo;
  const double b2 = qs > 0.0 ? pr * qo / qs : kNaN;

  if (qs > 0.0 && order != SupplyOrder::Equal) {
    const bool a = order == SupplyOrder::SharingDominant;
    const std::string base = a ? "R1a" : "R1b";
    const double stationary = a ? qo * pr * (1.0 + d) / (2.0 * qs) : (pr * (1.0 + d) + qo - qs) / 2.0;
    const bool inside = stationary >= 0.0 && in_region(RegionLabel::R1, {stationary, pr}, s);
    out.push_back({base, RegionLabel::R1, stationary, inside, inside ? "stationary point" : "stationary point outside R1"});
    if (!inside) {
      const Region r1{RegionLabel::R1, order};
      const auto value = [&](double po) { return region_formula(r1, {po, pr}, s, d, 1); };
      const bool b1_ok = b1 >= 0.0;
      const bool b2_ok = std::isfinite(b2) && b2 >= 0.0;
      if (b1_ok && (!b2_ok || value(b1) >= value(b2))) {
        out.push_back({base + "@B1", RegionLabel::R1, b1, true, "boundary B1 = p_r - q_s + q_o"});
      } else if (b2_ok) {
        out.push_back({base + "@B2", RegionLabel::R1, b2, true, "boundary B2 = p_r q_o / q_s"});
      } else {
        out.push_back({base + "@B", RegionLabel::R1, kNaN, false, "no non-negative boundary price"});
      }
    }
  } else if (!(qs > 0.0)) {
    out.push_back({"R1", RegionLabel::R1, kNaN, false, "empty sharing pool"});
  } else {
    out.push_back({"R1", RegionLabel::R1, kNaN, false, "R1 is empty when q_s == q_o"});
  }

  if (order == SupplyOrder::Equal) {
    const double po = std::min(qo / 2.0, pr);
    out.push_back({"R2", RegionLabel::R2, po, po < qo, po == qo / 2.0 ? "stationary point" : "boundary p_o = p_r"});
  } else {
    const bool a = order == SupplyOrder::SharingDominant;
    const std::string label = a ? "R2a" : "R2b";
    const double stationary = qo / 2.0;
    if (in_region(RegionLabel::R2, {stationary, pr}, s)) {
      out.push_back({label, RegionLabel::R2, stationary, true, "stationary point q_o/2"});
    } else {
      const double b = a ? b1 : b2;
      const bool ok = std::isfinite(b) && b >= 0.0 && b < qo;
      out.push_back({label, RegionLabel::R2, b, ok, a ? "boundary B1" : "boundary B2"});
    }
  }
  return out;
}

namespace {

RMax r_max_grid(double pr, double qs, const MarketParams& params) {
  const double qo = params.on_demand_supply;
  const Supplies s{qo, qs};
  const double scale = params.usage.mean();
  const GridAxis axis{0.0, qo, 1e-3};
  RMax out;
  out.sharing_supply = qs;
  bool have = false;
  const std::size_t n = axis.size();
  for (std::size_t i = 0; i <= n; ++i) {
    const double po = i < n ? axis.at(i) : qo;  // p_o = q_o closes the grid (no on-demand buyers)
    const double v = scale * revenue_general({po, pr}, s, params.commission, params.n_buyers, params.buyer_types);
    if (!have || beats(v, out.revenue)) {
      out.revenue = v;
      out.prices = {po, pr};
      have = true;
    }
  }
  out.region = classify(out.prices, s);
  out.candidates.push_back({"grid", out.prices, out.revenue, true, "non-uniform types: grid over p_o, step 1e-3"});
  return out;
}

}  // namespace

RMax r_max(double pr, const MarketParams& params) {
  params.validate();
  if (!std::isfinite(pr) || pr < 0.0) throw std::invalid_argument("r_max: sharing price must be finite and >= 0");
  const double qs = expected_sharing_supply(pr, params);
  if (!params.buyer_types.is_uniform()) return r_max_grid(pr, qs, params);

  const double qo = params.on_demand_supply;
  const Supplies s{qo, qs};
  const double scale = params.usage.mean();
  const auto uniform = Distribution::uniform();
  const auto revenue_at = [&](const Prices& p) {
    return scale * revenue_general(p, s, params.commission, params.n_buyers, uniform);
  };

  RMax out;
  out.sharing_supply = qs;
  auto& cands = out.candidates;
  for (const auto& c : optimal_po_given_pr(pr, qs, qo, params.commission)) {
    const Prices p{c.on_demand_price, pr};
    const bool ok = c.feasible && nonnegative(p);
    cands.push_back({c.label, p, ok ? revenue_at(p) : 0.0, ok, c.note});
  }
  if (pr < qs) {
    const double lo = r3_min_on_demand_price(pr, s);
    const Prices p{(lo + std::max(lo, qo)) / 2.0, pr};
    cands.push_back({"R3", p, revenue_at(p), true, "free on-demand price"});
  } else {
    cands.push_back({"R3", {kNaN, pr}, 0.0, false, "p_r >= q_s"});
  }
  if (pr >= qs) {
    cands.push_back({"R4", {qo, pr}, 0.0, true, "no purchases"});
  } else {
    cands.push_back({"R4", {qo, pr}, 0.0, false, "p_r < q_s"});
  }

  // Interior R1 first, then single-pool regions, then R1 boundary points.
  std::vector<const Candidate*> ordered;
  for (const auto& c : cands)
    if (c.label == "R1a" || c.label == "R1b") ordered.push_back(&c);
  for (const auto& c : cands)
    if (c.label.rfind("R2", 0) == 0) ordered.push_back(&c);
  for (const auto& c : cands)
    if (c.label == "R3") ordered.push_back(&c);
  for (const auto& c : cands)
    if (c.label.find('@') != std::string::npos) ordered.push_back(&c);
  for (const auto& c : cands)
    if (c.label == "R4") ordered.push_back(&c);

  if (const Candidate* win = pick(ordered)) {
    out.prices = win->prices;
    out.revenue = win->revenue;
  } else {
    out.prices = {qo, pr};
    out.revenue = 0.0;
  }
  out.region = classify(out.prices, s);
  return out;
}

namespace {

SolveResult assemble_case2(const std::vector<RMax>& per_price, const GridAxis& grid) {
  SolveResult out;
  std::size_t best = 0;
  for (std::size_t i = 1; i < per_price.size(); ++i) {
    if (beats(per_price[i].revenue, per_price[best].revenue)) best = i;
  }
  const RMax& w = per_price[best];
  out.prices = w.prices;
  out.region = w.region;
  out.revenue = w.revenue;
  out.sharing_supply = w.sharing_supply;

  std::map<std::string, Candidate> per_label;
  for (const auto& r : per_price) {
    for (const auto& c : r.candidates) {
      if (!c.feasible) continue;
      auto it = per_label.find(c.label);
      if (it == per_label.end() || c.revenue > it->second.revenue) per_label[c.label] = c;
    }
  }
  for (auto& [label, c] : per_label) {
    c.note = "best over sharing-price grid; " + c.note;
    out.diagnostics.push_back(std::move(c));
  }
  if (per_price.size() > 1 && best + 1 == per_price.size()) {
    out.warnings.push_back("optimum at the upper end of the sharing-price range " + fmt_interval(grid.lo, grid.hi) +
                           "; widen the search range");
  }
  return out;
}

}  // namespace

SolveResult solve_case2(const MarketParams& params, const GridAxis& sharing_prices) {
  params.validate();
  const auto per_price =
      map_index<RMax>(sharing_prices.size(), [&](std::size_t i) { return r_max(sharing_prices.at(i), params); });
  return assemble_case2(per_price, sharing_prices);
}

SolveResult solve_case2_serial(const MarketParams& params, const GridAxis& sharing_prices) {
  params.validate();
  const auto per_price = map_index_serial<RMax>(sharing_prices.size(),
                                                [&](std::size_t i) { return r_max(sharing_prices.at(i), params); });
  return assemble_case2(per_price, sharing_prices);
}

SolveResult evaluate_fixed_prices(const Prices& prices, const MarketParams& params) {
  params.validate();
  validate(prices);
  SolveResult out;
  out.prices = prices;
  out.sharing_supply = expected_sharing_supply(prices.sharing, params);
  const Supplies s{params.on_demand_supply, out.sharing_supply};
  out.region = classify(prices, s);
  out.revenue =
      params.usage.mean() * revenue_general(prices, s, params.commission, params.n_buyers, params.buyer_types);
  return out;
}

std::string_view to_string(SweepAxis a) {
  switch (a) {
    case SweepAxis::OnDemandSupply: return "q_o";
    case SweepAxis::Commission: return "delta";
    case SweepAxis::OnDemandPrice: return "p_o";
    case SweepAxis::SupplyScale: return "a";
  }
  return "?";
}

SweepAxis parse_sweep_axis(std::string_view s) {
  if (s == "q_o" || s == "qo") return SweepAxis::OnDemandSupply;
  if (s == "delta") return SweepAxis::Commission;
  if (s == "p_o" || s == "po") return SweepAxis::OnDemandPrice;
  if (s == "a") return SweepAxis::SupplyScale;
  throw std::invalid_argument("unknown sweep axis '" + std::string(s) + "'");
}

std::string_view to_string(SweepMode m) {
  switch (m) {
    case SweepMode::Case1: return "case1";
    case SweepMode::Case2: return "case2";
    case SweepMode::FixedPrices: return "fixed-prices";
  }
  return "?";
}

SweepMode parse_sweep_mode(std::string_view s) {
  if (s == "case1") return SweepMode::Case1;
  if (s == "case2") return SweepMode::Case2;
  if (s == "fixed-prices") return SweepMode::FixedPrices;
  throw std::invalid_argument("unknown sweep mode '" + std::string(s) + "'");
}

SweepError::SweepError(SweepAxis axis, double v, const std::string& what)
    : std::runtime_error("sweep " + std::string(to_string(axis)) + "=" + std::to_string(v) + ": " + what), value(v) {}

RevenueCurve sweep(const MarketParams& params, SweepAxis axis, const std::vector<double>& values,
                   const SweepOptions& options) {
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (!(values[i] > values[i - 1])) throw std::invalid_argument("sweep: values must be strictly increasing");
  }
  if ((options.mode == SweepMode::FixedPrices) != (axis == SweepAxis::OnDemandPrice)) {
    throw std::invalid_argument("sweep: the p_o axis is evaluated at fixed prices, and only it");
  }

  const auto solve_point = [&](std::size_t i) {
    const double v = values[i];
    try {
      MarketParams p = params;
      switch (axis) {
        case SweepAxis::OnDemandSupply: p.on_demand_supply = v; break;
        case SweepAxis::Commission: p.commission = v; break;
        case SweepAxis::SupplyScale: p.supply_scale = v; break;
        case SweepAxis::OnDemandPrice: break;
      }
      switch (options.mode) {
        case SweepMode::Case1:
          return CurvePoint{v, solve_case1({p.on_demand_supply, options.case1_sharing_supply}, p.commission, p.n_buyers)};
        case SweepMode::Case2: return CurvePoint{v, solve_case2(p, options.sharing_price_grid)};
        case SweepMode::FixedPrices: return CurvePoint{v, evaluate_fixed_prices({v, options.fixed_sharing_price}, p)};
      }
      throw std::logic_error("unreachable");
    } catch (const SweepError&) {
      throw;
    } catch (const std::exception& e) {
      throw SweepError(axis, v, e.what());
    }
  };
  RevenueCurve curve;
  curve.axis = axis;
  curve.points = map_index<CurvePoint>(values.size(), solve_point);
  return curve;
}

}  // namespace eml
