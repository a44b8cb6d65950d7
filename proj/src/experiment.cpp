#include "eml/experiment.hpp"

#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "eml/population.hpp"

namespace eml {

namespace {

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

std::string fmt_family(const char* name, double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%s=%.2f", name, v);
  return buf;
}

ExperimentSpec base_spec(const std::string& id) {
  ExperimentSpec s;
  s.id = id;
  s.params.commission = 0.2;
  s.params.supply_scale = 2.0;
  s.params.n_buyers = 50;
  s.params.n_resellers = 50;
  s.options.mode = SweepMode::Case2;
  return s;
}

ExperimentSpec qo_sweep(const std::string& id) {
  auto s = base_spec(id);
  s.axis = SweepAxis::OnDemandSupply;
  s.values = axis_values(0.1, 0.9, 0.05);
  return s;
}

ExperimentSpec delta_sweep(const std::string& id) {
  auto s = base_spec(id);
  s.axis = SweepAxis::Commission;
  s.params.on_demand_supply = 0.2;
  s.values = axis_values(0.05, 0.95, 0.05);
  return s;
}

void use_beta(ExperimentSpec& s) {
  s.params.buyer_types = Distribution::beta(2.0, 2.0);
  s.params.reseller_costs = Distribution::beta(2.0, 2.0);
}

double parse_double(const std::string& field, std::size_t col) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(field, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != field.size()) throw std::invalid_argument("column " + std::to_string(col) + ": not a number");
  return v;
}

}  // namespace

std::vector<double> axis_values(double lo, double hi, double step) {
  std::vector<double> out;
  const std::size_t n = GridAxis{lo, hi, step}.size();
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) out.push_back(std::round((lo + static_cast<double>(i) * step) * 1e9) / 1e9);
  return out;
}

std::vector<std::string> figure_ids() { return {"4a", "4b", "4c", "5a", "5b", "5c", "5d", "5e", "6a", "6b"}; }

std::vector<ExperimentSpec> figure_specs(const std::string& id) {
  if (id == "4a") return {qo_sweep(id)};
  if (id == "4b") {
    auto s = qo_sweep(id);
    use_beta(s);
    return {s};
  }
  if (id == "4c") {
    auto s = qo_sweep(id);
    s.params.usage = Distribution::uniform();
    return {s};
  }
  if (id == "5a") {
    std::vector<ExperimentSpec> out;
    for (double d : {0.1, 0.2, 0.4, 0.6}) {
      auto s = qo_sweep(id + ":" + fmt_family("delta", d));
      s.params.commission = d;
      out.push_back(s);
    }
    return out;
  }
  if (id == "5b") {
    std::vector<ExperimentSpec> out;
    for (double qo : {0.1, 0.2, 0.4, 0.6}) {
      auto s = delta_sweep(id + ":" + fmt_family("q_o", qo));
      s.params.on_demand_supply = qo;
      out.push_back(s);
    }
    return out;
  }
  if (id == "5c") return {delta_sweep(id)};
  if (id == "5d") {
    auto s = delta_sweep(id);
    use_beta(s);
    return {s};
  }
  if (id == "5e") {
    auto s = delta_sweep(id);
    s.params.usage = Distribution::uniform();
    return {s};
  }
  if (id == "6a") {
    auto s = base_spec(id);
    use_beta(s);
    s.params.on_demand_supply = 0.2;
    s.axis = SweepAxis::OnDemandPrice;
    s.options.mode = SweepMode::FixedPrices;
    s.options.fixed_sharing_price = 0.5;
    s.values = axis_values(0.01, 0.4, 0.01);
    return {s};
  }
  if (id == "6b") {
    auto s = qo_sweep(id);
    s.params.supply_scale = 1.5;
    return {s};
  }
  throw std::invalid_argument("unknown figure id '" + id + "'");
}

std::vector<OutputRow> run_experiment(const ExperimentSpec& spec) {
  if (spec.replications < 1) throw std::invalid_argument("replications must be >= 1");
  const RevenueCurve curve = sweep(spec.params, spec.axis, spec.values, spec.options);

  const std::size_t points = curve.points.size();
  const auto reps = static_cast<std::size_t>(spec.replications);
  const std::uint64_t experiment_key = fnv1a(spec.id);
  const auto revenues = map_index<double>(points * reps, [&](std::size_t k) {
    const std::size_t point = k / reps;
    const std::size_t rep = k % reps;
    MarketParams p = spec.params;
    const double v = curve.points[point].value;
    if (spec.axis == SweepAxis::OnDemandSupply) p.on_demand_supply = v;
    if (spec.axis == SweepAxis::Commission) p.commission = v;
    if (spec.axis == SweepAxis::SupplyScale) p.supply_scale = v;
    const auto pop = sample_population(p, stream_seed(spec.seed, {experiment_key, point, rep}));
    return simulate_market(pop, curve.points[point].result.prices, p).revenue();
  });

  std::vector<OutputRow> rows;
  rows.reserve(points);
  for (std::size_t i = 0; i < points; ++i) {
    const auto& pt = curve.points[i];
    double sum = 0.0;
    for (std::size_t r = 0; r < reps; ++r) sum += revenues[i * reps + r];
    const double mean = sum / static_cast<double>(reps);
    double ss = 0.0;
    for (std::size_t r = 0; r < reps; ++r) ss += (revenues[i * reps + r] - mean) * (revenues[i * reps + r] - mean);
    const double se = reps > 1 ? std::sqrt(ss / static_cast<double>(reps - 1) / static_cast<double>(reps)) : 0.0;

    OutputRow row;
    row.experiment = spec.id;
    row.axis = std::string(to_string(spec.axis));
    row.value = pt.value;
    row.on_demand_price = pt.result.prices.on_demand;
    row.sharing_price = pt.result.prices.sharing;
    row.sharing_supply = pt.result.sharing_supply;
    row.region = std::string(to_string(pt.result.region.label));
    row.revenue = pt.result.revenue;
    row.mean = mean;
    row.stderr_ = se;
    row.reps = spec.replications;
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string to_csv_line(const OutputRow& r) {
  std::string line = r.experiment + "," + r.axis + "," + fmt(r.value) + "," + fmt(r.on_demand_price) + "," +
                     fmt(r.sharing_price) + "," + fmt(r.sharing_supply) + "," + r.region + "," + fmt(r.revenue) + ",";
  line += (r.mean ? fmt(*r.mean) : "") + ",";
  line += (r.stderr_ ? fmt(*r.stderr_) : "") + ",";
  line += r.reps ? std::to_string(*r.reps) : "";
  return line;
}

OutputRow parse_csv_line(const std::string& line) {
  std::vector<std::string> f;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    f.push_back(line.substr(start, comma - start));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  if (f.size() != 11) throw std::invalid_argument("expected 11 columns, got " + std::to_string(f.size()));
  OutputRow r;
  r.experiment = f[0];
  r.axis = f[1];
  r.value = parse_double(f[2], 3);
  r.on_demand_price = parse_double(f[3], 4);
  r.sharing_price = parse_double(f[4], 5);
  r.sharing_supply = parse_double(f[5], 6);
  r.region = f[6];
  parse_region_label(r.region);
  r.revenue = parse_double(f[7], 8);
  if (!f[8].empty()) r.mean = parse_double(f[8], 9);
  if (!f[9].empty()) r.stderr_ = parse_double(f[9], 10);
  if (!f[10].empty()) r.reps = static_cast<int>(parse_double(f[10], 11));
  return r;
}

void write_csv(std::ostream& out, const std::vector<OutputRow>& rows) {
  out << kCsvHeader << '\n';
  for (const auto& r : rows) out << to_csv_line(r) << '\n';
}

std::vector<OutputRow> read_csv(std::istream& in) {
  std::string line;
  std::size_t n = 0;
  if (!std::getline(in, line) || line != kCsvHeader) throw std::runtime_error("line 1: missing or wrong CSV header");
  ++n;
  std::vector<OutputRow> rows;
  while (std::getline(in, line)) {
    ++n;
    try {
      rows.push_back(parse_csv_line(line));
    } catch (const std::exception& e) {
      throw std::runtime_error("line " + std::to_string(n) + ": " + e.what());
    }
  }
  return rows;
}

}  // namespace eml
