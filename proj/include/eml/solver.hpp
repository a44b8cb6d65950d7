#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "eml/equilibrium.hpp"
#include "eml/kernels.hpp"
#include "eml/market.hpp"

// Operator revenue maximization. Case 1 has an exogenous sharing supply and
// closed-form optimal prices; case 2 derives the sharing supply from the
// re-seller price and searches over it.
namespace eml {

/// One evaluated subproblem candidate. Infeasible candidates are kept with a
/// note explaining why they were dropped.
struct Candidate {
  std::string label;  // e.g. "R1a", "R1a@B1", "R2b", "R3", "R1b-grid"
  Prices prices;
  double revenue = 0.0;
  bool feasible = false;
  std::string note;
};

struct SolveResult {
  Prices prices;
  Region region;
  double revenue = 0.0;
  double sharing_supply = 0.0;  // q_s at the returned prices
  std::vector<Candidate> diagnostics;
  std::vector<std::string> warnings;

  /// Best feasible diagnostic whose label starts with `prefix`.
  const Candidate* best_candidate(std::string_view prefix) const;
};

/// Exhaustive revenue search over a (p_o, p_r) grid for a fixed sharing
/// supply. This is the brute-force oracle for the closed forms; x is p_o and
/// y is p_r in the returned argmax.
GridArgmax revenue_grid_search(const Supplies& s, double commission, int n, const Distribution& types,
                               const GridAxis& on_demand_prices, const GridAxis& sharing_prices);
GridArgmax revenue_grid_search_serial(const Supplies& s, double commission, int n, const Distribution& types,
                                      const GridAxis& on_demand_prices, const GridAxis& sharing_prices);

/// True when the R1 subproblem with q_o > q_s is certified concave:
/// (delta + 1)^2 q_s < 4 delta q_o.
bool convexity_gate(const Supplies& s, double commission);

/// Case 1: optimal prices for fixed supplies and uniform willingness to pay.
SolveResult solve_case1(const Supplies& s, double commission, int n);

/// Stationary on-demand price for a region with p_r and q_s fixed, or the
/// best region-boundary price when the stationary point is infeasible.
struct OnDemandCandidate {
  std::string label;  // "R1a", "R1a@B1", "R1a@B2", "R1b", ..., "R2a", "R2b", "R2"
  RegionLabel region = RegionLabel::R1;
  double on_demand_price = 0.0;
  bool feasible = false;
  std::string note;
};

std::vector<OnDemandCandidate> optimal_po_given_pr(double sharing_price, double sharing_supply_value,
                                                  double on_demand_supply, double commission);

/// Best achievable revenue for one sharing price: max over the R1, R2, R3
/// candidates and zero.
struct RMax {
  double revenue = 0.0;
  Region region;
  Prices prices;
  double sharing_supply = 0.0;
  std::vector<Candidate> candidates;
};

RMax r_max(double sharing_price, const MarketParams& params);

/// Case 2: linear search of r_max over a sharing-price grid. Non-uniform
/// willingness to pay falls back to a full grid over both prices.
SolveResult solve_case2(const MarketParams& params, const GridAxis& sharing_prices = {0.0, 2.0, 1e-3});
SolveResult solve_case2_serial(const MarketParams& params, const GridAxis& sharing_prices = {0.0, 2.0, 1e-3});

/// Revenue and region at fixed prices (case-2 supply).
SolveResult evaluate_fixed_prices(const Prices& prices, const MarketParams& params);

enum class SweepAxis { OnDemandSupply, Commission, OnDemandPrice, SupplyScale };
enum class SweepMode { Case1, Case2, FixedPrices };

std::string_view to_string(SweepAxis a);
SweepAxis parse_sweep_axis(std::string_view s);
std::string_view to_string(SweepMode m);
SweepMode parse_sweep_mode(std::string_view s);

struct SweepOptions {
  SweepMode mode = SweepMode::Case2;
  double case1_sharing_supply = 0.0;  // Case1 only
  double fixed_sharing_price = 0.0;   // FixedPrices only
  GridAxis sharing_price_grid{0.0, 2.0, 1e-3};
};

struct CurvePoint {
  double value = 0.0;
  SolveResult result;
};

struct RevenueCurve {
  SweepAxis axis = SweepAxis::OnDemandSupply;
  std::vector<CurvePoint> points;
};

class SweepError : public std::runtime_error {
 public:
  SweepError(SweepAxis axis, double value, const std::string& what);
  double value;
};

/// One solve per axis value, evaluated in parallel, returned in input order.
RevenueCurve sweep(const MarketParams& params, SweepAxis axis, const std::vector<double>& values,
                   const SweepOptions& options);

}  // namespace eml
