#include "eml/records.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>

namespace eml {

namespace {

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    out.push_back(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

double number(std::string_view field, const char* name, bool unit_interval) {
  std::string s(field);
  char* end = nullptr;
  const double v = s.empty() ? NAN : std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size() || !std::isfinite(v)) {
    throw std::invalid_argument(std::string(name) + ": not a finite number");
  }
  if (unit_interval && (v < 0.0 || v > 1.0)) throw std::invalid_argument(std::string(name) + ": outside [0,1]");
  if (v < 0.0) throw std::invalid_argument(std::string(name) + ": negative");
  return v;
}

std::int64_t integer(std::string_view field, const char* name) {
  std::int64_t v = 0;
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
  if (field.empty() || ec != std::errc{} || ptr != field.data() + field.size()) {
    throw std::invalid_argument(std::string(name) + ": not an integer");
  }
  return v;
}

void append_number(std::string& out, double v) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.6f", v == 0.0 ? 0.0 : v);
  out += buf;
  out += ',';
}

}  // namespace

std::string_view to_string(Role r) { return r == Role::Buyer ? "buyer" : "reseller"; }

Role parse_role(std::string_view s) {
  if (s == "buyer") return Role::Buyer;
  if (s == "reseller") return Role::Reseller;
  throw std::invalid_argument("unknown role '" + std::string(s) + "'");
}

Role role_of(const Record& r) { return std::holds_alternative<BuyerRecord>(r) ? Role::Buyer : Role::Reseller; }

std::int64_t timestamp_of(const Record& r) {
  return std::visit([](const auto& x) { return x.timestamp; }, r);
}

BuyerChoice parse_buyer_choice(std::string_view s) {
  if (s == "SHARING") return BuyerChoice::Sharing;
  if (s == "ONDEMAND") return BuyerChoice::OnDemand;
  if (s == "NONE") return BuyerChoice::NoPurchase;
  throw std::invalid_argument("invalid buyer choice '" + std::string(s) + "'");
}

ResellerChoice parse_reseller_choice(std::string_view s) {
  if (s == "Y") return ResellerChoice::Sell;
  if (s == "N") return ResellerChoice::No;
  throw std::invalid_argument("invalid re-seller choice '" + std::string(s) + "'");
}

double round6(double x) {
  const double r = std::round(x * 1e6) / 1e6;
  return r == 0.0 ? 0.0 : r;
}

RecordParseError::RecordParseError(std::size_t l, const std::string& what)
    : std::runtime_error(l ? "line " + std::to_string(l) + ": " + what : what), line(l) {}

std::string serialize(const Record& rec) {
  std::string out;
  if (const auto* b = std::get_if<BuyerRecord>(&rec)) {
    for (double v : {b->usage, b->willingness, b->on_demand_supply, b->sharing_supply, b->on_demand_price, b->sharing_price})
      append_number(out, v);
    out += to_string(b->choice);
    out += ',';
    out += std::to_string(b->timestamp);
  } else {
    const auto& r = std::get<ResellerRecord>(rec);
    for (double v : {r.remaining_usage, r.cost, r.sharing_price, r.commission}) append_number(out, v);
    out += r.app_type;
    out += ',';
    out += to_string(r.choice);
    out += ',';
    out += std::to_string(r.timestamp);
  }
  return out;
}

Record parse_record(std::string_view line) {
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  const auto f = split(line);
  try {
    if (f.size() == 8) {
      BuyerRecord b;
      b.usage = number(f[0], "usage", true);
      b.willingness = number(f[1], "u", true);
      b.on_demand_supply = number(f[2], "q_o", false);
      b.sharing_supply = number(f[3], "q_s", false);
      b.on_demand_price = number(f[4], "p_o", false);
      b.sharing_price = number(f[5], "p_r", false);
      b.choice = parse_buyer_choice(f[6]);
      b.timestamp = integer(f[7], "timestamp");
      if (!(b.on_demand_supply > 0.0)) throw std::invalid_argument("q_o: must be > 0");
      return b;
    }
    if (f.size() == 7) {
      ResellerRecord r;
      r.remaining_usage = number(f[0], "remaining usage", true);
      r.cost = number(f[1], "g", true);
      r.sharing_price = number(f[2], "p_r", false);
      r.commission = number(f[3], "delta", true);
      if (f[4].empty()) throw std::invalid_argument("app_type: empty");
      r.app_type = std::string(f[4]);
      r.choice = parse_reseller_choice(f[5]);
      r.timestamp = integer(f[6], "timestamp");
      return r;
    }
  } catch (const std::invalid_argument& e) {
    throw RecordParseError(0, e.what());
  }
  throw RecordParseError(0, "expected 8 (buyer) or 7 (re-seller) fields, got " + std::to_string(f.size()));
}

std::vector<Record> parse_records(std::istream& in) {
  std::vector<Record> out;
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (line.empty() && in.peek() == std::char_traits<char>::eof()) break;
    try {
      out.push_back(parse_record(line));
    } catch (const RecordParseError& e) {
      throw RecordParseError(n, e.what());
    }
  }
  return out;
}

void write_records(std::ostream& out, const std::vector<Record>& records) {
  for (const auto& r : records) out << serialize(r) << '\n';
}

}  // namespace eml
