#include "eml/analytics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <ostream>
#include <sstream>

namespace eml {

namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

std::string open_interval(double lo, double hi, bool closed_lo = false) {
  lo = std::clamp(lo, 0.0, 1.0);
  hi = std::clamp(hi, 0.0, 1.0);
  if (hi < lo || (hi == lo && !closed_lo)) return "empty";
  return std::string(closed_lo ? "[" : "(") + fmt(lo) + ", " + fmt(hi) + "]";
}

struct BuyerIntervals {
  std::string sharing, on_demand, neither;
};

// Best-response intervals of u in [0,1], following the tie rules of
// buyer_best_response.
BuyerIntervals buyer_intervals(const BuyerRecord& r) {
  const double qo = r.on_demand_supply, qs = r.sharing_supply, po = r.on_demand_price, pr = r.sharing_price;
  BuyerIntervals out;
  if (qs == qo || qs == 0.0) {
    const bool sharing_cheaper = qs > 0.0 && pr < po;
    const double t = sharing_cheaper ? pr / qs : po / qo;
    (sharing_cheaper ? out.sharing : out.on_demand) = open_interval(t, 1.0);
    (sharing_cheaper ? out.on_demand : out.sharing) = "empty";
    out.neither = open_interval(0.0, t, true);
    return out;
  }
  const bool sharing_high = qs > qo;
  const double q_low = sharing_high ? qo : qs, p_low = sharing_high ? po : pr;
  const double q_high = sharing_high ? qs : qo, p_high = sharing_high ? pr : po;
  const double t_low = p_low / q_low;
  const double t_high = std::max((p_high - p_low) / (q_high - q_low), p_high / q_high);
  std::string low, high;
  if (t_high <= t_low) {
    low = "empty";
    high = open_interval(t_high, 1.0);
    out.neither = open_interval(0.0, t_high, true);
  } else {
    low = open_interval(t_low, t_high);
    high = open_interval(t_high, 1.0);
    out.neither = open_interval(0.0, t_low, true);
  }
  out.sharing = sharing_high ? high : low;
  out.on_demand = sharing_high ? low : high;
  return out;
}

void require_same_market(const std::vector<const BuyerRecord*>& b, const std::vector<const ResellerRecord*>& r) {
  for (const auto* x : b) {
    if (x->on_demand_supply != b[0]->on_demand_supply || x->sharing_supply != b[0]->sharing_supply ||
        x->on_demand_price != b[0]->on_demand_price || x->sharing_price != b[0]->sharing_price) {
      throw MixedParametersError("buyer records carry different market parameters (q_o, q_s, p_o, p_r)");
    }
  }
  for (const auto* x : r) {
    if (x->sharing_price != r[0]->sharing_price || x->commission != r[0]->commission) {
      throw MixedParametersError("re-seller records carry different market parameters (p_r, delta)");
    }
  }
}

template <class Rec, class Choice>
RegionRow region_row(Role role, std::string name, std::string interval, Choice option,
                     const std::vector<const Rec*>& records) {
  RegionRow row;
  row.role = role;
  row.region = std::move(name);
  row.interval = std::move(interval);
  for (const auto* r : records) {
    if (predicted_choice(*r) != option) continue;
    ++row.count;
    row.agree += r->choice == option;
  }
  row.agreement = row.count ? static_cast<double>(row.agree) / static_cast<double>(row.count) : 1.0;
  return row;
}

template <class Rec, class Choice, class Value>
KsResult region_ks(Choice option, const std::vector<const Rec*>& records, Value value) {
  std::vector<double> data, model;
  for (const auto* r : records) {
    if (r->choice == option) data.push_back(value(*r));
    if (predicted_choice(*r) == option) model.push_back(value(*r));
  }
  if (data.empty() && model.empty()) return {0.0, 1.0};
  if (data.empty() || model.empty()) return {1.0, 0.0};
  return ks_two_sample(std::move(data), std::move(model));
}

struct Split {
  std::vector<const BuyerRecord*> buyers;
  std::vector<const ResellerRecord*> resellers;
};

Split split(const std::vector<Record>& records) {
  Split s;
  for (const auto& r : records) {
    if (const auto* b = std::get_if<BuyerRecord>(&r)) {
      s.buyers.push_back(b);
    } else {
      s.resellers.push_back(&std::get<ResellerRecord>(r));
    }
  }
  require_same_market(s.buyers, s.resellers);
  return s;
}

constexpr BuyerChoice kBuyerOptions[] = {BuyerChoice::Sharing, BuyerChoice::OnDemand, BuyerChoice::NoPurchase};
constexpr ResellerChoice kResellerOptions[] = {ResellerChoice::Sell, ResellerChoice::No};

std::vector<RegionRow> agreement_rows(const Split& s) {
  std::vector<RegionRow> rows;
  if (!s.buyers.empty()) {
    const auto iv = buyer_intervals(*s.buyers[0]);
    const std::string names[] = {"Sharing", "On Demand", "Neither"};
    const std::string intervals[] = {iv.sharing, iv.on_demand, iv.neither};
    for (int k = 0; k < 3; ++k) rows.push_back(region_row(Role::Buyer, names[k], intervals[k], kBuyerOptions[k], s.buyers));
  }
  if (!s.resellers.empty()) {
    const double t = (1.0 - s.resellers[0]->commission) * s.resellers[0]->sharing_price;
    rows.push_back(region_row(Role::Reseller, "Re-selling", "g < " + fmt(t), kResellerOptions[0], s.resellers));
    rows.push_back(region_row(Role::Reseller, "Not re-selling", "g >= " + fmt(t), kResellerOptions[1], s.resellers));
  }
  return rows;
}

}  // namespace

BuyerChoice predicted_choice(const BuyerRecord& r) {
  return buyer_best_response(r.willingness, {r.on_demand_price, r.sharing_price},
                             {r.on_demand_supply, r.sharing_supply});
}

ResellerChoice predicted_choice(const ResellerRecord& r) {
  return reseller_best_response(r.cost, r.sharing_price, r.commission);
}

double kolmogorov_q(double lambda) {
  if (!(lambda > 0.0)) return 1.0;
  constexpr double pi = std::numbers::pi;
  if (lambda < 1.18) {
    // Dual theta-function form for small lambda.
    const double y = std::exp(-pi * pi / (8.0 * lambda * lambda));
    double s = 0.0;
    for (int k = 1; k <= 50; ++k) {
      const double term = std::pow(y, (2 * k - 1) * (2 * k - 1));
      s += term;
      if (term < 1e-16) break;
    }
    return std::clamp(1.0 - std::sqrt(2.0 * pi) / lambda * s, 0.0, 1.0);
  }
  double s = 0.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = std::exp(-2.0 * k * k * lambda * lambda);
    s += (k % 2 ? 1.0 : -1.0) * term;
    if (term < 1e-12) break;
  }
  return std::clamp(2.0 * s, 0.0, 1.0);
}

KsResult ks_two_sample(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty()) throw std::invalid_argument("ks_two_sample: both samples must be non-empty");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double n = static_cast<double>(a.size());
  const double m = static_cast<double>(b.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] == x) ++i;
    while (j < b.size() && b[j] == x) ++j;
    d = std::max(d, std::fabs(static_cast<double>(i) / n - static_cast<double>(j) / m));
  }
  const double ne = n * m / (n + m);
  const double sq = std::sqrt(ne);
  return {d, kolmogorov_q((sq + 0.12 + 0.11 / sq) * d)};
}

KsResult ks_one_sample(std::vector<double> sample, const std::function<double(double)>& cdf) {
  if (sample.empty()) throw std::invalid_argument("ks_one_sample: empty sample");
  std::sort(sample.begin(), sample.end());
  const double n = static_cast<double>(sample.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    const double f = cdf(sample[i]);
    d = std::max({d, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n});
  }
  const double sq = std::sqrt(n);
  return {d, kolmogorov_q((sq + 0.12 + 0.11 / sq) * d)};
}

std::vector<RegionRow> percentage_agreement(const std::vector<Record>& records) {
  return agreement_rows(split(records));
}

StudyReport build_study_report(const std::vector<Record>& records, double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("alpha must lie in (0,1)");
  const Split s = split(records);
  StudyReport report;
  report.alpha = alpha;
  report.buyers = s.buyers.size();
  report.resellers = s.resellers.size();
  report.rows = agreement_rows(s);
  std::size_t i = 0;
  if (!s.buyers.empty()) {
    for (auto option : kBuyerOptions)
      report.rows[i++].ks = region_ks(option, s.buyers, [](const BuyerRecord& r) { return r.willingness; });
  }
  if (!s.resellers.empty()) {
    for (auto option : kResellerOptions)
      report.rows[i++].ks = region_ks(option, s.resellers, [](const ResellerRecord& r) { return r.cost; });
  }
  for (auto& row : report.rows) row.distinct = row.ks.p_value < alpha;
  return report;
}

std::string StudyReport::to_text() const {
  std::ostringstream out;
  char buf[256];
  out << "Study report: " << buyers << " buyer records, " << resellers << " re-seller records, alpha = " << alpha
      << "\n";
  Role current = Role::Buyer;
  bool first = true;
  for (const auto& row : rows) {
    if (first || row.role != current) {
      out << "\n" << (row.role == Role::Buyer ? "Buyers" : "Re-sellers") << "\n";
      std::snprintf(buf, sizeof buf, "  %-15s %-22s %6s %9s %8s %8s  %s\n", "Region", "Model interval", "n",
                    "Agreement", "KS D", "p-value", "Distinct?");
      out << buf;
      current = row.role;
      first = false;
    }
    std::snprintf(buf, sizeof buf, "  %-15s %-22s %6zu %8.1f%% %8.4f %8.4f  %s\n", row.region.c_str(),
                  row.interval.c_str(), row.count, 100.0 * row.agreement, row.ks.statistic, row.ks.p_value,
                  row.distinct ? "yes" : "no significant evidence");
    out << buf;
  }
  return out.str();
}

void StudyReport::write_csv(std::ostream& out) const {
  out << kReportCsvHeader << '\n';
  char buf[128];
  for (const auto& row : rows) {
    std::snprintf(buf, sizeof buf, ",%zu,%zu,%.6f,%.6f,%.6g,%s", row.count, row.agree, row.agreement, row.ks.statistic,
                  row.ks.p_value, row.distinct ? "yes" : "no");
    out << to_string(row.role) << ',' << row.region << ",\"" << row.interval << '"' << buf << '\n';
  }
}

}  // namespace eml
