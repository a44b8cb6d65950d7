#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "eml/distribution.hpp"
#include "eml/records.hpp"

namespace eml {

/// Fixed market parameters and sampling setup of a decision-capture study.
/// Defaults are the preliminary user-study settings.
struct StudyConfig {
  double on_demand_supply = 0.6;
  double sharing_supply = 0.7;
  double on_demand_price = 0.15;
  double sharing_price = 0.2;
  double commission = 0.2;
  std::vector<std::string> buyer_apps{"IoT Sensing Analytics", "Mobile Gaming", "Augmented Reality",
                                      "Data Analytics on Device", "Smart Home IoT Analytics"};
  std::vector<std::string> reseller_apps{"IoT Sensing Analytics", "Distributed AI",    "Predictive Maintence",
                                         "Remote Monitoring",     "Industrial IoT",    "Augmented Reality Display"};
  Distribution willingness = Distribution::uniform();
  Distribution costs = Distribution::uniform();
  Distribution usage = Distribution::uniform();
  bool show_willingness = true;
  std::string host = "0.0.0.0";
  int port = 8080;
  std::string storage_path = "records.csv";

  /// Throws std::invalid_argument naming the field.
  void validate() const;

  /// JSON object with any subset of: q_o, q_s, p_o, p_r, delta, buyer_apps,
  /// reseller_apps, willingness, cost, usage, show_willingness, host, port,
  /// storage. Unknown keys are rejected.
  static StudyConfig from_json_text(const std::string& text);
  static StudyConfig load(const std::string& path);
  std::string to_json_text() const;

  /// Applies EML_PORT and EML_STORAGE when set.
  void apply_environment(const std::function<const char*(const char*)>& getenv_fn);
};

struct SyntheticOptions {
  std::size_t buyers = 500;
  std::size_t resellers = 500;
  double noise = 0.0;  // fraction of each model region given a different choice
  std::uint64_t seed = 1;
  std::int64_t start_time = 1700000000;
};

/// Records sampled like study sessions, with model-following choices. For
/// noise > 0, exactly round(noise * n) records of each model region (n records)
/// get a uniformly chosen different option.
std::vector<Record> synthesize_records(const StudyConfig& config, const SyntheticOptions& options);

}  // namespace eml
