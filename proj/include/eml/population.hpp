#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "eml/market.hpp"

namespace eml {

struct Buyer {
  double willingness = 0.0;  // u
  double usage = 1.0;        // w
};

struct Reseller {
  double cost = 0.0;   // g
  double usage = 1.0;  // unused-quota level
};

struct Population {
  std::vector<Buyer> buyers;
  std::vector<Reseller> resellers;
  std::uint64_t seed = 0;
};

/// Draws params.n_buyers buyers and params.n_resellers re-sellers. Each field
/// has its own generator stream, so changing one distribution leaves the
/// other draws untouched.
Population sample_population(const MarketParams& params, std::uint64_t seed);

struct MarketOutcome {
  std::size_t on_demand = 0;
  std::size_t sharing = 0;
  std::size_t no_purchase = 0;
  std::size_t sellers = 0;
  double on_demand_revenue = 0.0;
  double sharing_revenue = 0.0;  // commission part only
  double sharing_supply = 0.0;   // realized
  std::vector<double> buyer_payoffs;

  double revenue() const { return on_demand_revenue + sharing_revenue; }
};

/// Applies the best responses population-wide. The realized sharing supply is
/// a * ln(1 + sum of seller usage / n_resellers) unless `forced_sharing_supply`
/// is given.
MarketOutcome simulate_market(const Population& pop, const Prices& prices, const MarketParams& params,
                              std::optional<double> forced_sharing_supply = std::nullopt);
MarketOutcome simulate_market_serial(const Population& pop, const Prices& prices, const MarketParams& params,
                                     std::optional<double> forced_sharing_supply = std::nullopt);

}  // namespace eml
