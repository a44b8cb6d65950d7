#pragma once

#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "eml/market.hpp"

// Study decision records. One record per line, comma-separated, numbers with
// six decimals, timestamps in integer UTC seconds:
//   buyer:    usage,u,q_o,q_s,p_o,p_r,SHARING|ONDEMAND|NONE,timestamp
//   reseller: remaining_usage,g,p_r,delta,app_type,Y|N,timestamp
namespace eml {

enum class Role { Buyer, Reseller };

std::string_view to_string(Role r);
Role parse_role(std::string_view s);  // "buyer" | "reseller"

struct BuyerRecord {
  double usage = 0.0;
  double willingness = 0.0;
  double on_demand_supply = 0.0;
  double sharing_supply = 0.0;
  double on_demand_price = 0.0;
  double sharing_price = 0.0;
  BuyerChoice choice = BuyerChoice::NoPurchase;
  std::int64_t timestamp = 0;
};

struct ResellerRecord {
  double remaining_usage = 0.0;
  double cost = 0.0;
  double sharing_price = 0.0;
  double commission = 0.0;
  std::string app_type;
  ResellerChoice choice = ResellerChoice::No;
  std::int64_t timestamp = 0;
};

using Record = std::variant<BuyerRecord, ResellerRecord>;

Role role_of(const Record& r);
std::int64_t timestamp_of(const Record& r);

BuyerChoice parse_buyer_choice(std::string_view s);
ResellerChoice parse_reseller_choice(std::string_view s);

/// Rounds to the six decimals used by the storage format.
double round6(double x);

class RecordParseError : public std::runtime_error {
 public:
  RecordParseError(std::size_t line, const std::string& what);
  std::size_t line;
};

std::string serialize(const Record& r);
/// Parses one line (without its newline). Errors carry line number 0.
Record parse_record(std::string_view line);
/// Parses a whole stream; errors carry the 1-based line number.
std::vector<Record> parse_records(std::istream& in);
void write_records(std::ostream& out, const std::vector<Record>& records);

}  // namespace eml
