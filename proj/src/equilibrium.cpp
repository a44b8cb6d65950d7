#include "eml/equilibrium.hpp"

#include <algorithm>
#include <string>

namespace eml {

namespace {

double positive_part(double x) { return x >= 0.0 ? x : 0.0; }

// Lower boundary of R2 in p_r: min(q_s/q_o, 1) p_o + (q_s - q_o)^+.
double r2_boundary(const Prices& p, const Supplies& s) {
  return std::min(s.sharing / s.on_demand, 1.0) * p.on_demand + positive_part(s.sharing - s.on_demand);
}

// Upper boundary of R3 in p_r: max(q_s/q_o, 1) p_o - (q_o - q_s)^+.
double r3_boundary(const Prices& p, const Supplies& s) {
  return std::max(s.sharing / s.on_demand, 1.0) * p.on_demand - positive_part(s.on_demand - s.sharing);
}

}  // namespace

std::string_view to_string(RegionLabel r) {
  switch (r) {
    case RegionLabel::R1: return "R1";
    case RegionLabel::R2: return "R2";
    case RegionLabel::R3: return "R3";
    case RegionLabel::R4: return "R4";
  }
  return "?";
}

std::string_view to_string(SupplyOrder o) {
  switch (o) {
    case SupplyOrder::SharingDominant: return "sharing-dominant";
    case SupplyOrder::OnDemandDominant: return "on-demand-dominant";
    case SupplyOrder::Equal: return "equal";
  }
  return "?";
}

RegionLabel parse_region_label(std::string_view s) {
  if (s == "R1") return RegionLabel::R1;
  if (s == "R2") return RegionLabel::R2;
  if (s == "R3") return RegionLabel::R3;
  if (s == "R4") return RegionLabel::R4;
  throw std::invalid_argument("unknown region label '" + std::string(s) + "'");
}

SupplyOrder supply_order(const Supplies& s) {
  if (s.sharing > s.on_demand) return SupplyOrder::SharingDominant;
  if (s.on_demand > s.sharing) return SupplyOrder::OnDemandDominant;
  return SupplyOrder::Equal;
}

bool in_region(RegionLabel label, const Prices& p, const Supplies& s) {
  const double pr = p.sharing;
  switch (label) {
    case RegionLabel::R1: return pr < r2_boundary(p, s) && pr > r3_boundary(p, s);
    case RegionLabel::R2: return p.on_demand < s.on_demand && pr >= r2_boundary(p, s);
    case RegionLabel::R3: return pr < s.sharing && pr <= r3_boundary(p, s);
    case RegionLabel::R4: return pr >= s.sharing && p.on_demand >= s.on_demand;
  }
  return false;
}

Region classify_region(const Prices& p, const Supplies& s) {
  const auto order = supply_order(s);
  if (order == SupplyOrder::Equal) throw DegenerateSuppliesError("classify_region: q_s == q_o; use classify_equal_supplies");
  for (auto label : {RegionLabel::R1, RegionLabel::R2, RegionLabel::R3, RegionLabel::R4}) {
    if (in_region(label, p, s)) return {label, order};
  }
  // Only reachable through rounding on a shared boundary point.
  throw RegionMismatchError("classify_region: no region condition holds");
}

Region classify_equal_supplies(const Prices& p, const Supplies& s) {
  const double q = s.on_demand;
  if (p.on_demand >= q && p.sharing >= s.sharing) return {RegionLabel::R4, SupplyOrder::Equal};
  if (p.sharing < p.on_demand) return {RegionLabel::R3, SupplyOrder::Equal};
  return {RegionLabel::R2, SupplyOrder::Equal};
}

Region classify(const Prices& p, const Supplies& s) {
  return supply_order(s) == SupplyOrder::Equal ? classify_equal_supplies(p, s) : classify_region(p, s);
}

double region_formula(Region region, const Prices& p, const Supplies& s, double commission, int n) {
  const double po = p.on_demand;
  const double pr = p.sharing;
  const double qo = s.on_demand;
  const double qs = s.sharing;
  const double N = n;
  switch (region.label) {
    case RegionLabel::R1:
      if (region.order == SupplyOrder::SharingDominant) {
        const double t = (pr - po) / (qs - qo);
        return N * po * (t - po / qo) + N * pr * commission * (1.0 - t);
      }
      if (region.order == SupplyOrder::OnDemandDominant) {
        const double t = (po - pr) / (qo - qs);
        return N * pr * commission * (t - pr / qs) + N * po * (1.0 - t);
      }
      throw RegionMismatchError("R1 is empty when q_s == q_o");
    case RegionLabel::R2: return N * po * (1.0 - po / qo);
    case RegionLabel::R3: return N * pr * commission * (1.0 - pr / qs);
    case RegionLabel::R4: return 0.0;
  }
  return 0.0;
}

double region_revenue_uniform(Region region, const Prices& p, const Supplies& s, double commission, int n) {
  const Region actual = classify(p, s);
  if (actual.label != region.label || actual.order != region.order) {
    throw RegionMismatchError("region_revenue_uniform: prices lie in " + std::string(to_string(actual.label)) +
                              " (" + std::string(to_string(actual.order)) + "), not " +
                              std::string(to_string(region.label)));
  }
  return region_formula(region, p, s, commission, n);
}

BuyerMasses buyer_masses(const Prices& p, const Supplies& s, const Distribution& types) {
  const double po = p.on_demand;
  const double pr = p.sharing;
  const double qo = s.on_demand;
  const double qs = s.sharing;
  const auto F = [&](double x) { return types.cdf(x); };
  BuyerMasses m;
  if (!(qs > 0.0)) {
    // The sharing payoff is -p_r <= 0 for every buyer.
    m.on_demand = 1.0 - F(po / qo);
    return m;
  }
  switch (supply_order(s)) {
    case SupplyOrder::SharingDominant: {
      const double t = (pr - po) / (qs - qo);
      const double od_lo = po / qo;
      m.sharing = 1.0 - F(std::max(t, pr / qs));
      m.on_demand = t > od_lo ? std::max(0.0, F(t) - F(od_lo)) : 0.0;
      break;
    }
    case SupplyOrder::OnDemandDominant: {
      const double t = (po - pr) / (qo - qs);
      const double sh_lo = pr / qs;
      m.on_demand = 1.0 - F(std::max(t, po / qo));
      m.sharing = t > sh_lo ? std::max(0.0, F(t) - F(sh_lo)) : 0.0;
      break;
    }
    case SupplyOrder::Equal:
      if (pr < po) {
        m.sharing = 1.0 - F(pr / qs);
      } else {
        m.on_demand = 1.0 - F(po / qo);
      }
      break;
  }
  return m;
}

double revenue_general(const Prices& p, const Supplies& s, double commission, int n, const Distribution& types) {
  const auto m = buyer_masses(p, s, types);
  return static_cast<double>(n) * (p.on_demand * m.on_demand + commission * p.sharing * m.sharing);
}

}  // namespace eml
