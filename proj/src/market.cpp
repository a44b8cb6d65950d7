#include "eml/market.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace eml {

std::string_view to_string(BuyerChoice c) {
  switch (c) {
    case BuyerChoice::OnDemand: return "ONDEMAND";
    case BuyerChoice::Sharing: return "SHARING";
    case BuyerChoice::NoPurchase: return "NONE";
  }
  return "?";
}

std::string_view to_string(ResellerChoice c) { return c == ResellerChoice::Sell ? "Y" : "N"; }

void MarketParams::validate() const {
  if (!std::isfinite(on_demand_supply) || !(on_demand_supply > 0.0))
    throw std::invalid_argument("on_demand_supply (q_o) must be finite and > 0");
  if (!(commission >= 0.0 && commission <= 1.0)) throw std::invalid_argument("commission (delta) must lie in [0,1]");
  if (!std::isfinite(supply_scale) || !(supply_scale > 0.0))
    throw std::invalid_argument("supply_scale (a) must be finite and > 0");
  if (n_buyers < 1) throw std::invalid_argument("n_buyers must be >= 1");
  if (n_resellers < 1) throw std::invalid_argument("n_resellers must be >= 1");
}

void validate(const Prices& p) {
  if (!std::isfinite(p.on_demand) || p.on_demand < 0.0) throw std::invalid_argument("on-demand price must be finite and >= 0");
  if (!std::isfinite(p.sharing) || p.sharing < 0.0) throw std::invalid_argument("sharing price must be finite and >= 0");
}

void validate(const Supplies& s) {
  if (!std::isfinite(s.on_demand) || !(s.on_demand > 0.0)) throw std::invalid_argument("on-demand supply must be finite and > 0");
  if (!std::isfinite(s.sharing) || s.sharing < 0.0) throw std::invalid_argument("sharing supply must be finite and >= 0");
}

double buyer_payoff(double willingness, BuyerChoice choice, const Prices& prices, const Supplies& supplies) {
  switch (choice) {
    case BuyerChoice::OnDemand: return willingness * supplies.on_demand - prices.on_demand;
    case BuyerChoice::Sharing: return willingness * supplies.sharing - prices.sharing;
    case BuyerChoice::NoPurchase: return 0.0;
  }
  return 0.0;
}

double reseller_payoff(double cost, ResellerChoice choice, double sharing_price, double commission) {
  return choice == ResellerChoice::Sell ? (1.0 - commission) * sharing_price - cost : 0.0;
}

BuyerChoice buyer_best_response(double willingness, const Prices& prices, const Supplies& supplies) {
  const double od = buyer_payoff(willingness, BuyerChoice::OnDemand, prices, supplies);
  const double sh = buyer_payoff(willingness, BuyerChoice::Sharing, prices, supplies);
  if (std::max(od, sh) <= 0.0) return BuyerChoice::NoPurchase;
  return sh > od ? BuyerChoice::Sharing : BuyerChoice::OnDemand;
}

ResellerChoice reseller_best_response(double cost, double sharing_price, double commission) {
  return (1.0 - commission) * sharing_price - cost > kResellerTieTolerance ? ResellerChoice::Sell : ResellerChoice::No;
}

double reseller_proportion(double sharing_price, double commission, const Distribution& costs) {
  return std::clamp(costs.cdf((1.0 - commission) * sharing_price), 0.0, 1.0);
}

double sharing_supply(double sharing_price, double commission, double scale, const Distribution& costs) {
  return scale * std::log1p(reseller_proportion(sharing_price, commission, costs));
}

double expected_sharing_supply(double sharing_price, const MarketParams& params) {
  const double prop = reseller_proportion(sharing_price, params.commission, params.reseller_costs);
  return params.supply_scale * std::log1p(params.usage.mean() * prop);
}

}  // namespace eml
