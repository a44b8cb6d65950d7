#include <doctest.h>

#include <sstream>

#include "eml/experiment.hpp"

using namespace eml;

namespace {

std::vector<RegionLabel> region_path(const std::vector<OutputRow>& rows) {
  std::vector<RegionLabel> path;
  for (const auto& r : rows) {
    const auto l = parse_region_label(r.region);
    if (path.empty() || path.back() != l) path.push_back(l);
  }
  return path;
}

}  // namespace

TEST_CASE("figure ids are bound to caption parameters") {
  for (const auto& id : figure_ids()) CHECK_FALSE(figure_specs(id).empty());
  CHECK_THROWS_AS(figure_specs("7z"), std::invalid_argument);

  const auto a = figure_specs("4a").at(0);
  CHECK(a.axis == SweepAxis::OnDemandSupply);
  CHECK(a.params.commission == 0.2);
  CHECK(a.params.supply_scale == 2.0);
  CHECK(a.params.buyer_types.is_uniform());

  const auto c = figure_specs("5c").at(0);
  CHECK(c.axis == SweepAxis::Commission);
  CHECK(c.params.on_demand_supply == 0.2);

  const auto b = figure_specs("4b").at(0);
  CHECK(b.params.buyer_types == Distribution::beta(2, 2));
  CHECK(figure_specs("5a").size() == 4);
  CHECK(figure_specs("6b").at(0).params.supply_scale == 1.5);
}

TEST_CASE("axis values") {
  const auto v = axis_values(0.1, 0.9, 0.05);
  REQUIRE(v.size() == 17);
  CHECK(v[2] == 0.2);
  CHECK(v.back() == 0.9);
}

TEST_CASE("figure 4a shape") {
  auto spec = figure_specs("4a").at(0);
  spec.replications = 3;
  const auto rows = run_experiment(spec);
  CHECK(region_path(rows) == std::vector<RegionLabel>{RegionLabel::R1, RegionLabel::R2});
  for (std::size_t i = 1; i < rows.size(); ++i) CHECK(rows[i].revenue >= rows[i - 1].revenue);
}

TEST_CASE("figure 5c shape") {
  auto spec = figure_specs("5c").at(0);
  spec.replications = 2;
  CHECK(region_path(run_experiment(spec)) == std::vector<RegionLabel>{RegionLabel::R2, RegionLabel::R1, RegionLabel::R2});
}

TEST_CASE("experiments are deterministic and CSV round-trips") {
  auto spec = figure_specs("6b").at(0);
  spec.values = {0.2, 0.4, 0.6};
  spec.replications = 5;
  const auto a = run_experiment(spec);
  const auto b = run_experiment(spec);
  std::ostringstream sa, sb;
  write_csv(sa, a);
  write_csv(sb, b);
  CHECK(sa.str() == sb.str());

  std::istringstream in(sa.str());
  const auto back = read_csv(in);
  std::ostringstream again;
  write_csv(again, back);
  CHECK(again.str() == sa.str());
  CHECK(sa.str().rfind(std::string(kCsvHeader) + "\n", 0) == 0);
}

TEST_CASE("Monte Carlo mean tracks the analytic revenue") {
  auto spec = figure_specs("4a").at(0);
  spec.values = {0.3, 0.7};
  spec.replications = 400;
  for (const auto& row : run_experiment(spec)) {
    CHECK(row.reps == 400);
    CHECK(std::fabs(*row.mean - row.revenue) < 5.0 * *row.stderr_ + 0.05 * row.revenue);
  }
}

TEST_CASE("malformed CSV lines are reported with their line number") {
  std::istringstream in(std::string(kCsvHeader) + "\n4a,q_o,0.1,0.1,0.2,0.3,R1,1,,,\n4a,q_o,bad\n");
  CHECK_THROWS_WITH(read_csv(in), doctest::Contains("line 3"));
  CHECK_THROWS_AS(run_experiment([] {
                    auto s = figure_specs("4a").at(0);
                    s.replications = 0;
                    return s;
                  }()),
                  std::invalid_argument);
}
