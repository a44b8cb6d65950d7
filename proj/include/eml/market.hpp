#pragma once

#include <string_view>

#include "eml/distribution.hpp"

// Individual payoffs and best responses of buyers and re-sellers, and the
// sharing-pool supply function. Everything here is pure.
namespace eml {

/// Per-unit prices set by the operator.
struct Prices {
  double on_demand = 0.0;  // paid to the operator in full
  double sharing = 0.0;    // re-sold quota; operator keeps a commission
};

/// Supply (quality) levels of the two pools.
struct Supplies {
  double on_demand = 0.0;
  double sharing = 0.0;
};

enum class BuyerChoice { OnDemand, Sharing, NoPurchase };
enum class ResellerChoice { Sell, No };

std::string_view to_string(BuyerChoice c);
std::string_view to_string(ResellerChoice c);

struct MarketParams {
  double on_demand_supply = 0.2;  // q_o
  double commission = 0.2;        // fraction of each sharing sale kept by the operator
  double supply_scale = 2.0;      // normalization of the log supply curve
  int n_buyers = 50;
  int n_resellers = 50;
  Distribution buyer_types = Distribution::uniform();     // willingness to pay
  Distribution reseller_costs = Distribution::uniform();  // inconvenience cost
  Distribution usage = Distribution::degenerate(1.0);     // per-user usage level

  /// Throws std::invalid_argument naming the offending field.
  void validate() const;
};

void validate(const Prices& p);
void validate(const Supplies& s);

double buyer_payoff(double willingness, BuyerChoice choice, const Prices& prices, const Supplies& supplies);
double reseller_payoff(double cost, ResellerChoice choice, double sharing_price, double commission);

/// Payoff-maximizing pool. A buyer only purchases when the best pool payoff is
/// strictly positive; exact pool ties go to the on-demand pool.
BuyerChoice buyer_best_response(double willingness, const Prices& prices, const Supplies& supplies);

/// Net margins within this of zero count as ties (no sale).
inline constexpr double kResellerTieTolerance = 1e-12;

/// Sell iff the net sale price strictly exceeds the inconvenience cost.
ResellerChoice reseller_best_response(double cost, double sharing_price, double commission);

/// Fraction of re-sellers willing to sell: F_g((1 - commission) * p_r), clamped to [0, 1].
double reseller_proportion(double sharing_price, double commission, const Distribution& costs);

/// a * ln(1 + reseller_proportion).
double sharing_supply(double sharing_price, double commission, double scale, const Distribution& costs);

/// Sharing supply with the expected re-seller usage folded into the
/// proportion: a * ln(1 + E[w] * proportion). Equals sharing_supply when
/// usage is degenerate at 1.
double expected_sharing_supply(double sharing_price, const MarketParams& params);

}  // namespace eml
