#include "eml/population.hpp"

#include <array>
#include <cmath>
#include <stdexcept>

#include "eml/kernels.hpp"
#include "eml/rng.hpp"

namespace eml {

namespace {

enum Stream : std::uint64_t { kBuyerType = 1, kBuyerUsage = 2, kResellerCost = 3, kResellerUsage = 4 };

struct ChunkSums {
  std::array<std::size_t, 3> counts{};
  double on_demand_revenue = 0.0;
  double sharing_revenue = 0.0;
};

struct SellerSums {
  std::size_t sellers = 0;
  double usage = 0.0;
};

std::size_t chunk_begin(std::size_t chunk, std::size_t n) { return chunk * n / kReductionChunks; }

SellerSums seller_chunk(const Population& pop, std::size_t chunk, double pr, double commission) {
  SellerSums s;
  const std::size_t n = pop.resellers.size();
  for (std::size_t i = chunk_begin(chunk, n); i < chunk_begin(chunk + 1, n); ++i) {
    const auto& r = pop.resellers[i];
    if (reseller_best_response(r.cost, pr, commission) == ResellerChoice::Sell) {
      ++s.sellers;
      s.usage += r.usage;
    }
  }
  return s;
}

ChunkSums buyer_chunk(const Population& pop, std::size_t chunk, const Prices& p, const Supplies& s,
                      double commission, std::vector<double>& payoffs) {
  ChunkSums c;
  const std::size_t n = pop.buyers.size();
  for (std::size_t i = chunk_begin(chunk, n); i < chunk_begin(chunk + 1, n); ++i) {
    const auto& b = pop.buyers[i];
    const BuyerChoice choice = buyer_best_response(b.willingness, p, s);
    payoffs[i] = buyer_payoff(b.willingness, choice, p, s);
    ++c.counts[static_cast<std::size_t>(choice)];
    if (choice == BuyerChoice::OnDemand) c.on_demand_revenue += b.usage * p.on_demand;
    if (choice == BuyerChoice::Sharing) c.sharing_revenue += b.usage * commission * p.sharing;
  }
  return c;
}

template <class Map>
MarketOutcome simulate(const Population& pop, const Prices& prices, const MarketParams& params,
                       std::optional<double> forced, Map&& map) {
  params.validate();
  validate(prices);
  if (pop.resellers.empty() && !forced) throw std::invalid_argument("simulate_market: no re-sellers");
  MarketOutcome out;

  const auto sellers = map.template operator()<SellerSums>(
      kReductionChunks, [&](std::size_t c) { return seller_chunk(pop, c, prices.sharing, params.commission); });
  double usage_sum = 0.0;
  for (const auto& s : sellers) {
    out.sellers += s.sellers;
    usage_sum += s.usage;
  }
  if (forced) {
    if (!(*forced >= 0.0)) throw std::invalid_argument("simulate_market: forced sharing supply must be >= 0");
    out.sharing_supply = *forced;
  } else {
    out.sharing_supply = params.supply_scale * std::log1p(usage_sum / static_cast<double>(pop.resellers.size()));
  }

  const Supplies supplies{params.on_demand_supply, out.sharing_supply};
  out.buyer_payoffs.assign(pop.buyers.size(), 0.0);
  const auto chunks = map.template operator()<ChunkSums>(kReductionChunks, [&](std::size_t c) {
    return buyer_chunk(pop, c, prices, supplies, params.commission, out.buyer_payoffs);
  });
  std::array<std::size_t, 3> counts{};
  for (const auto& c : chunks) {
    for (std::size_t k = 0; k < 3; ++k) counts[k] += c.counts[k];
    out.on_demand_revenue += c.on_demand_revenue;
    out.sharing_revenue += c.sharing_revenue;
  }
  out.on_demand = counts[static_cast<std::size_t>(BuyerChoice::OnDemand)];
  out.sharing = counts[static_cast<std::size_t>(BuyerChoice::Sharing)];
  out.no_purchase = counts[static_cast<std::size_t>(BuyerChoice::NoPurchase)];
  return out;
}

struct ParallelMap {
  template <class T, class F>
  std::vector<T> operator()(std::size_t n, F&& f) const { return map_index<T>(n, std::forward<F>(f)); }
};

struct SerialMap {
  template <class T, class F>
  std::vector<T> operator()(std::size_t n, F&& f) const { return map_index_serial<T>(n, std::forward<F>(f)); }
};

}  // namespace

Population sample_population(const MarketParams& params, std::uint64_t seed) {
  params.validate();
  Population pop;
  pop.seed = seed;
  Rng types(stream_seed(seed, {kBuyerType}));
  Rng buyer_usage(stream_seed(seed, {kBuyerUsage}));
  Rng costs(stream_seed(seed, {kResellerCost}));
  Rng reseller_usage(stream_seed(seed, {kResellerUsage}));
  pop.buyers.resize(static_cast<std::size_t>(params.n_buyers));
  for (auto& b : pop.buyers) {
    b.willingness = params.buyer_types.sample(types);
    b.usage = params.usage.sample(buyer_usage);
  }
  pop.resellers.resize(static_cast<std::size_t>(params.n_resellers));
  for (auto& r : pop.resellers) {
    r.cost = params.reseller_costs.sample(costs);
    r.usage = params.usage.sample(reseller_usage);
  }
  return pop;
}

MarketOutcome simulate_market(const Population& pop, const Prices& prices, const MarketParams& params,
                              std::optional<double> forced_sharing_supply) {
  return simulate(pop, prices, params, forced_sharing_supply, ParallelMap{});
}

MarketOutcome simulate_market_serial(const Population& pop, const Prices& prices, const MarketParams& params,
                                     std::optional<double> forced_sharing_supply) {
  return simulate(pop, prices, params, forced_sharing_supply, SerialMap{});
}

}  // namespace eml
