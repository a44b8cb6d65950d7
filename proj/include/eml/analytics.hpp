#pragma once

#include <functional>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "eml/records.hpp"

// Agreement between recorded study decisions and the model, plus the
// Kolmogorov-Smirnov tests used to compare them.
namespace eml {

BuyerChoice predicted_choice(const BuyerRecord& r);
ResellerChoice predicted_choice(const ResellerRecord& r);

struct KsResult {
  double statistic = 0.0;  // D
  double p_value = 1.0;
};

/// Kolmogorov survival function Q(lambda) = 2 sum (-1)^(k-1) exp(-2 k^2 lambda^2).
double kolmogorov_q(double lambda);

/// Exact D over the merged sorted samples; asymptotic p-value with effective
/// size n m / (n + m). Throws std::invalid_argument on an empty sample.
KsResult ks_two_sample(std::vector<double> a, std::vector<double> b);

/// One-sample test of `sample` against a continuous cdf.
KsResult ks_one_sample(std::vector<double> sample, const std::function<double(double)>& cdf);

class MixedParametersError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct RegionRow {
  Role role = Role::Buyer;
  std::string region;    // "Sharing", "On Demand", "Neither", "Re-selling", "Not re-selling"
  std::string interval;  // model interval of u (or g)
  std::size_t count = 0;
  std::size_t agree = 0;
  double agreement = 1.0;  // agree / count, 1 for an empty region
  KsResult ks;
  bool distinct = false;  // p < alpha
};

/// Region rows without the KS columns. Throws MixedParametersError when the
/// records of one role do not share their market parameters.
std::vector<RegionRow> percentage_agreement(const std::vector<Record>& records);

struct StudyReport {
  double alpha = 0.05;
  std::size_t buyers = 0;
  std::size_t resellers = 0;
  std::vector<RegionRow> rows;

  std::string to_text() const;
  void write_csv(std::ostream& out) const;
};

inline constexpr const char* kReportCsvHeader = "role,region,interval,count,agree,agreement,ks_d,p_value,distinct";

/// Per region: agreement, and a two-sample KS test between the u (or g) values
/// of records whose recorded choice is that region's option and those the
/// model assigns to it.
StudyReport build_study_report(const std::vector<Record>& records, double alpha = 0.05);

}  // namespace eml
