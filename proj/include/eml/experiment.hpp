#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "eml/solver.hpp"

// Figure reproductions: an analytic sweep plus Monte Carlo replications of the
// resulting prices on sampled populations.
namespace eml {

struct ExperimentSpec {
  std::string id;  // e.g. "4a", or "5a:delta=0.20" for one curve of a family
  MarketParams params;
  SweepAxis axis = SweepAxis::OnDemandSupply;
  std::vector<double> values;
  SweepOptions options;
  int replications = 20;
  std::uint64_t seed = 1;
};

/// Figure ids with their caption parameters. Families (5a, 5b) expand to one
/// spec per curve.
std::vector<std::string> figure_ids();
std::vector<ExperimentSpec> figure_specs(const std::string& figure_id);

/// Evenly spaced values lo, lo + step, ..., hi, rounded to 1e-9.
std::vector<double> axis_values(double lo, double hi, double step);

struct OutputRow {
  std::string experiment;
  std::string axis;
  double value = 0.0;
  double on_demand_price = 0.0;
  double sharing_price = 0.0;
  double sharing_supply = 0.0;
  std::string region;
  double revenue = 0.0;
  std::optional<double> mean;
  std::optional<double> stderr_;
  std::optional<int> reps;

  friend bool operator==(const OutputRow&, const OutputRow&) = default;
};

inline constexpr const char* kCsvHeader = "experiment,axis,value,p_o,p_r,q_s,region,revenue,mean,stderr,reps";

std::string to_csv_line(const OutputRow& row);
OutputRow parse_csv_line(const std::string& line);
void write_csv(std::ostream& out, const std::vector<OutputRow>& rows);
/// Throws std::runtime_error naming the line number on malformed input.
std::vector<OutputRow> read_csv(std::istream& in);

/// Sweep plus `replications` simulated markets per axis point at the optimal
/// prices. Deterministic given spec.seed.
std::vector<OutputRow> run_experiment(const ExperimentSpec& spec);

}  // namespace eml
