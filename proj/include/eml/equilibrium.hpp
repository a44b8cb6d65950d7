#pragma once

#include <stdexcept>
#include <string_view>

#include "eml/distribution.hpp"
#include "eml/market.hpp"

// The four-region structure of the buyers' aggregate equilibrium and the
// operator revenue in each region.
namespace eml {

enum class RegionLabel { R1, R2, R3, R4 };

/// Which pool has the larger supply. Region boundaries and the R1 revenue
/// formula switch on this.
enum class SupplyOrder { SharingDominant, OnDemandDominant, Equal };

struct Region {
  RegionLabel label = RegionLabel::R4;
  SupplyOrder order = SupplyOrder::Equal;
  friend bool operator==(const Region&, const Region&) = default;
};

std::string_view to_string(RegionLabel r);
std::string_view to_string(SupplyOrder o);
RegionLabel parse_region_label(std::string_view s);

SupplyOrder supply_order(const Supplies& s);

class DegenerateSuppliesError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class RegionMismatchError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Boundary condition of one region for unequal supplies, with the min/max
/// and positive-part terms written out literally.
bool in_region(RegionLabel label, const Prices& p, const Supplies& s);

/// Classifies (prices, supplies) into R1..R4. Requires q_s != q_o; throws
/// DegenerateSuppliesError otherwise (use classify_equal_supplies).
Region classify_region(const Prices& p, const Supplies& s);

/// Equal-supply classification: the cheaper pool takes every buyer who buys;
/// equal prices go to the on-demand pool.
Region classify_equal_supplies(const Prices& p, const Supplies& s);

/// Dispatches on supply order.
Region classify(const Prices& p, const Supplies& s);

/// Closed-form revenue of a region for uniform types, without checking the
/// boundary conditions. R1 formulas are continuous onto the R2/R3 boundaries,
/// so this also evaluates boundary candidates.
double region_formula(Region region, const Prices& p, const Supplies& s, double commission, int n);

/// Closed-form revenue for uniform types. Throws RegionMismatchError when the
/// prices do not satisfy the region's boundary conditions.
double region_revenue_uniform(Region region, const Prices& p, const Supplies& s, double commission, int n);

/// Probability mass of buyers choosing each pool under `types`, taken as
/// cdf differences over the best-response intervals.
struct BuyerMasses {
  double on_demand = 0.0;
  double sharing = 0.0;
};
BuyerMasses buyer_masses(const Prices& p, const Supplies& s, const Distribution& types);

/// n * (p_o * mass_on_demand + commission * p_r * mass_sharing), for any type
/// distribution.
double revenue_general(const Prices& p, const Supplies& s, double commission, int n, const Distribution& types);

}  // namespace eml
