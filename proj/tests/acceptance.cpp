// Acceptance suite: prints one PASS/FAIL line per criterion and exits nonzero
// if any criterion fails.

#include <httplib.h>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <json.hpp>
#include <numeric>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "commands.hpp"
#include "eml/analytics.hpp"
#include "eml/equilibrium.hpp"
#include "eml/experiment.hpp"
#include "eml/http_api.hpp"
#include "eml/population.hpp"
#include "eml/rng.hpp"
#include "eml/service.hpp"
#include "eml/solver.hpp"
#include "temp_dir.hpp"

using namespace eml;

namespace {

struct Outcome {
  bool pass;
  std::string detail;
};

int failures = 0;

void criterion(const std::string& name, double limit_seconds, const std::function<Outcome()>& body) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o{false, ""};
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (limit_seconds > 0.0 && secs > limit_seconds) {
    o.pass = false;
    o.detail += "; over the " + std::to_string(static_cast<int>(limit_seconds)) + " s limit";
  }
  if (!o.pass) ++failures;
  std::printf("%s %s (%.2f s): %s\n", o.pass ? "PASS" : "FAIL", name.c_str(), secs, o.detail.c_str());
  std::fflush(stdout);
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

std::vector<RegionLabel> region_runs(const RevenueCurve& c) {
  std::vector<RegionLabel> runs;
  for (const auto& p : c.points) {
    if (runs.empty() || runs.back() != p.result.region.label) runs.push_back(p.result.region.label);
  }
  return runs;
}

std::string runs_text(const std::vector<RegionLabel>& runs) {
  std::string s;
  for (auto r : runs) s += (s.empty() ? "" : "->") + std::string(to_string(r));
  return s;
}

RevenueCurve figure_curve(const std::string& id) {
  const auto spec = figure_specs(id).at(0);
  return sweep(spec.params, spec.axis, spec.values, spec.options);
}

// Case 1 closed form ---------------------------------------------------------

Outcome case1_closed_form() {
  constexpr int n = 50;
  Rng rng(20240601);
  const GridAxis axis{0.0, 1.0, 1e-3};
  double worst_gap = 0.0;
  double worst_grad = 0.0;
  int gradient_checks = 0;
  for (int i = 0; i < 200; ++i) {
    const double qo = 1.0 - rng.uniform01();
    double qs = 1.0 - rng.uniform01();
    if (qs == qo) qs = std::nextafter(qs, 0.0);
    const double delta = 0.05 + 0.9 * rng.uniform01();
    const Supplies s{qo, qs};
    const auto closed = solve_case1(s, delta, n);
    const auto grid = revenue_grid_search(s, delta, n, Distribution::uniform(), axis, axis);
    worst_gap = std::max(worst_gap, std::abs(closed.revenue - grid.value));

    for (const auto& c : closed.diagnostics) {
      if ((c.label != "R1a" && c.label != "R1b") || !c.feasible) continue;
      const Region r1{RegionLabel::R1, supply_order(s)};
      const double h = 1e-6;
      const auto f = [&](double po, double pr) { return region_formula(r1, {po, pr}, s, delta, n); };
      const double gx = (f(c.prices.on_demand + h, c.prices.sharing) - f(c.prices.on_demand - h, c.prices.sharing)) / (2 * h);
      const double gy = (f(c.prices.on_demand, c.prices.sharing + h) - f(c.prices.on_demand, c.prices.sharing - h)) / (2 * h);
      worst_grad = std::max(worst_grad, std::hypot(gx, gy));
      ++gradient_checks;
    }
  }
  const bool pass = worst_gap <= 1e-3 * n && worst_grad <= 1e-6;
  return {pass, "max |closed - grid| = " + fmt("%.3g", worst_gap) + " (tol " + fmt("%.3g", 1e-3 * n) +
                    "), max interior gradient = " + fmt("%.3g", worst_grad) + " over " +
                    std::to_string(gradient_checks) + " interior points"};
}

// Figures --------------------------------------------------------------------

Outcome fig4a() {
  const auto c = figure_curve("4a");
  bool monotone = true;
  for (std::size_t i = 1; i < c.points.size(); ++i) {
    monotone = monotone && c.points[i].result.revenue >= c.points[i - 1].result.revenue;
  }
  const auto runs = region_runs(c);
  const bool pass = monotone && runs == std::vector{RegionLabel::R1, RegionLabel::R2};
  return {pass, "regions " + runs_text(runs) + (monotone ? ", revenue non-decreasing" : ", revenue NOT monotone")};
}

Outcome fig5c() {
  const auto runs = region_runs(figure_curve("5c"));
  return {runs == std::vector{RegionLabel::R2, RegionLabel::R1, RegionLabel::R2}, "regions " + runs_text(runs)};
}

Outcome fig6b() {
  const auto c = figure_curve("6b");
  bool all_r2 = true;
  bool r1_nonzero = true;
  int r1_feasible = 0;
  for (const auto& p : c.points) {
    all_r2 = all_r2 && p.result.region.label == RegionLabel::R2;
    if (const auto* r1 = p.result.best_candidate("R1")) {
      ++r1_feasible;
      r1_nonzero = r1_nonzero && r1->revenue > 0.0;
    }
  }
  return {all_r2 && r1_nonzero, "regions " + runs_text(region_runs(c)) + ", R1 candidate feasible at " +
                                    std::to_string(r1_feasible) + " points" +
                                    (r1_nonzero ? ", all nonzero" : ", some zero")};
}

Outcome fig6a() {
  MarketParams p;
  p.on_demand_supply = 0.2;
  p.commission = 0.2;
  p.supply_scale = 2.0;
  SweepOptions opt;
  opt.mode = SweepMode::FixedPrices;
  opt.fixed_sharing_price = 0.5;
  const auto uniform = region_runs(sweep(p, SweepAxis::OnDemandPrice, axis_values(0.01, 0.4, 0.01), opt));
  const auto beta = region_runs(figure_curve("6a"));
  const std::vector expected{RegionLabel::R2, RegionLabel::R1, RegionLabel::R3};
  return {uniform == expected && beta == expected,
          "uniform types " + runs_text(uniform) + ", Beta(2,2) types " + runs_text(beta)};
}

// Monte Carlo ----------------------------------------------------------------

Outcome monte_carlo() {
  MarketParams p;
  p.on_demand_supply = 0.6;
  p.commission = 0.2;
  p.n_buyers = 100000;
  p.n_resellers = 100000;
  const auto pop = sample_population(p, 99);
  const auto out = simulate_market(pop, {0.15, 0.2}, p, 0.7);
  const double n = static_cast<double>(p.n_buyers);
  const double f_none = static_cast<double>(out.no_purchase) / n;
  const double f_od = static_cast<double>(out.on_demand) / n;
  const double f_sh = static_cast<double>(out.sharing) / n;
  const double per_capita = out.revenue() / n;
  const double target = 2.875 / 50.0;
  const bool pass = std::abs(f_none - 0.25) <= 0.01 && std::abs(f_od - 0.25) <= 0.01 && std::abs(f_sh - 0.5) <= 0.01 &&
                    std::abs(per_capita - target) <= 0.01 * target;
  return {pass, "fractions none/on-demand/sharing = " + fmt("%.4f", f_none) + "/" + fmt("%.4f", f_od) + "/" +
                    fmt("%.4f", f_sh) + ", revenue per buyer " + fmt("%.6f", per_capita) + " vs " +
                    fmt("%.6f", target)};
}

// Region disjointness --------------------------------------------------------

Outcome disjointness() {
  Rng rng(77);
  std::size_t violations = 0;
  const std::size_t tuples = 1000000;
  for (std::size_t i = 0; i < tuples; ++i) {
    const Prices p{1.2 * rng.uniform01(), 1.2 * rng.uniform01()};
    const double qo = 1.0 - rng.uniform01();
    double qs = 1.0 - rng.uniform01();
    if (qs == qo) continue;
    const Supplies s{qo, qs};
    int hits = 0;
    for (auto r : {RegionLabel::R1, RegionLabel::R2, RegionLabel::R3, RegionLabel::R4}) hits += in_region(r, p, s);
    if (hits != 1) ++violations;
  }
  return {violations == 0, std::to_string(violations) + " violations in " + std::to_string(tuples) + " tuples"};
}

// KS ---------------------------------------------------------------------------

double ecdf(const std::vector<double>& xs, double t) {
  return static_cast<double>(std::count_if(xs.begin(), xs.end(), [&](double x) { return x <= t; })) /
         static_cast<double>(xs.size());
}

double brute_force_d(const std::vector<double>& a, const std::vector<double>& b) {
  std::vector<double> grid(a);
  grid.insert(grid.end(), b.begin(), b.end());
  double d = 0.0;
  for (double t : grid) d = std::max(d, std::abs(ecdf(a, t) - ecdf(b, t)));
  return d;
}

std::vector<double> uniform_sample(Rng& rng, std::size_t n, double shift = 0.0) {
  std::vector<double> v(n);
  for (auto& x : v) x = rng.uniform01() + shift;
  return v;
}

// D from a label assignment over the pooled values sorted once.
double labelled_d(const std::vector<double>& pooled, const std::vector<char>& is_a, std::size_t na, std::size_t nb) {
  double fa = 0.0, fb = 0.0, d = 0.0;
  for (std::size_t i = 0; i < pooled.size(); ++i) {
    (is_a[i] ? fa : fb) += 1.0;
    if (i + 1 < pooled.size() && pooled[i + 1] == pooled[i]) continue;
    d = std::max(d, std::abs(fa / static_cast<double>(na) - fb / static_cast<double>(nb)));
  }
  return d;
}

Outcome ks() {
  Rng rng(4242);
  int d_mismatch = 0;
  for (int i = 0; i < 1000; ++i) {
    auto a = uniform_sample(rng, 1 + rng.index(60));
    auto b = uniform_sample(rng, 1 + rng.index(60));
    if (i % 2) {
      for (auto& x : a) x = std::round(x * 20.0) / 20.0;
      for (auto& x : b) x = std::round(x * 20.0) / 20.0;
    }
    if (std::abs(ks_two_sample(a, b).statistic - brute_force_d(a, b)) > 1e-12) ++d_mismatch;
  }

  int rejections = 0;
  for (int i = 0; i < 1000; ++i) {
    if (ks_two_sample(uniform_sample(rng, 100), uniform_sample(rng, 100)).p_value < 0.05) ++rejections;
  }
  const double rate = rejections / 1000.0;

  const auto x = uniform_sample(rng, 200);
  const auto y = uniform_sample(rng, 200, 0.5);
  const auto shifted = ks_two_sample(x, y);
  std::vector<std::pair<double, char>> tagged;
  for (double v : x) tagged.emplace_back(v, 1);
  for (double v : y) tagged.emplace_back(v, 0);
  std::sort(tagged.begin(), tagged.end());
  std::vector<double> pooled;
  std::vector<char> labels;
  for (const auto& [v, l] : tagged) {
    pooled.push_back(v);
    labels.push_back(l);
  }
  int exceed = 0;
  constexpr int shuffles = 100000;
  for (int s = 0; s < shuffles; ++s) {
    std::shuffle(labels.begin(), labels.end(), rng);
    if (labelled_d(pooled, labels, 200, 200) >= shifted.statistic - 1e-12) ++exceed;
  }
  const double perm_p = (exceed + 1.0) / (shuffles + 1.0);

  const bool pass = d_mismatch == 0 && std::abs(rate - 0.05) <= 0.02 && shifted.p_value < 1e-6 && exceed == 0;
  return {pass, std::to_string(d_mismatch) + " D mismatches in 1000 pairs; false-positive rate " + fmt("%.3f", rate) +
                    "; shift 0.5: D = " + fmt("%.3f", shifted.statistic) + ", p = " + fmt("%.3g", shifted.p_value) +
                    ", permutation p <= " + fmt("%.3g", perm_p) + " (" + std::to_string(exceed) + "/" +
                    std::to_string(shuffles) + " shuffles as extreme)"};
}

// Study pipeline -------------------------------------------------------------

struct ReportCsvRow {
  std::string role, region;
  double agreement = 0.0;
  double p_value = 0.0;
};

std::vector<ReportCsvRow> read_report(const std::string& path) {
  std::ifstream in(path);
  std::string line;
  std::getline(in, line);
  std::vector<ReportCsvRow> rows;
  while (std::getline(in, line)) {
    // The quoted interval column may contain commas; the numeric tail does not.
    std::vector<std::string> tail;
    std::string rest = line;
    for (int k = 0; k < 6; ++k) {
      const auto c = rest.rfind(',');
      tail.push_back(rest.substr(c + 1));
      rest = rest.substr(0, c);
    }
    ReportCsvRow r;
    r.role = rest.substr(0, rest.find(','));
    r.region = rest.substr(rest.find(',') + 1, rest.find(',', rest.find(',') + 1) - rest.find(',') - 1);
    r.p_value = std::stod(tail[1]);
    r.agreement = std::stod(tail[3]);
    rows.push_back(r);
  }
  return rows;
}

Outcome pipeline() {
  TempDir dir;
  std::ostringstream sink;
  const auto clean = dir.file("clean.csv");
  const auto noisy = dir.file("noisy.csv");
  if (cli::run_cli({"synth", "--buyers", "500", "--resellers", "500", "--seed", "11", "--out", clean}, sink, sink) != 0 ||
      cli::run_cli({"synth", "--buyers", "500", "--resellers", "500", "--seed", "12", "--noise", "0.2", "--out", noisy},
                   sink, sink) != 0) {
    return {false, "synth failed: " + sink.str()};
  }
  const auto clean_report = dir.file("clean-report.csv");
  const auto noisy_report = dir.file("noisy-report.csv");
  if (cli::run_cli({"analyze", "--records", clean, "--out", clean_report}, sink, sink) != 0 ||
      cli::run_cli({"analyze", "--records", noisy, "--out", noisy_report}, sink, sink) != 0) {
    return {false, "analyze failed: " + sink.str()};
  }
  bool pass = true;
  std::string detail = "clean:";
  for (const auto& r : read_report(clean_report)) {
    pass = pass && r.agreement == 1.0 && r.p_value == 1.0;
    detail += " " + r.region + "=" + fmt("%.3f", r.agreement) + "/p" + fmt("%.2g", r.p_value);
  }
  detail += "; 20% noise:";
  for (const auto& r : read_report(noisy_report)) {
    pass = pass && std::abs(r.agreement - 0.8) <= 0.05;
    detail += " " + r.region + "=" + fmt("%.3f", r.agreement);
  }
  return {pass, detail};
}

// Service integrity ------------------------------------------------------------

Outcome service_integrity() {
  using nlohmann::json;
  TempDir dir;
  StudyConfig cfg;
  cfg.storage_path = dir.file("records.csv");
  StudyService svc(cfg, 5);
  StudyHttpServer server(svc);
  const int port = server.bind_any_port("127.0.0.1");
  if (port <= 0) return {false, "cannot bind"};
  std::thread listener([&] { server.listen(); });
  while (!server.is_running()) std::this_thread::yield();

  std::vector<std::string> ids(100);
  std::atomic<int> accepted{0};
  std::vector<std::thread> clients;
  for (int i = 0; i < 100; ++i) {
    clients.emplace_back([&, i] {
      httplib::Client cli("127.0.0.1", port);
      const bool buyer = i % 2 == 0;
      auto s = cli.Get(buyer ? "/session/buyer" : "/session/reseller");
      if (!s || s->status != 200) return;
      ids[i] = json::parse(s->body)["session"];
      auto d = cli.Post("/decision", json{{"session", ids[i]}, {"choice", buyer ? "SHARING" : "N"}}.dump(),
                        "application/json");
      if (d && d->status == 200) ++accepted;
    });
  }
  for (auto& t : clients) t.join();

  int replay_rejected = 0;
  httplib::Client cli("127.0.0.1", port);
  for (int i = 0; i < 100; ++i) {
    auto d = cli.Post("/decision", json{{"session", ids[i]}, {"choice", i % 2 == 0 ? "SHARING" : "N"}}.dump(),
                      "application/json");
    if (d && d->status == 409) ++replay_rejected;
  }
  auto exported = cli.Get("/export");
  server.stop();
  listener.join();
  svc.flush();

  std::ifstream in(cfg.storage_path, std::ios::binary);
  std::ostringstream file;
  file << in.rdbuf();
  std::size_t lines = 0;
  std::string rewritten;
  try {
    std::istringstream body(exported ? exported->body : "");
    const auto recs = parse_records(body);
    lines = recs.size();
    std::ostringstream out;
    write_records(out, recs);
    rewritten = out.str();
  } catch (const std::exception& e) {
    return {false, std::string("export did not parse: ") + e.what()};
  }
  const bool identical = exported && rewritten == exported->body && rewritten == file.str();
  const bool pass = accepted == 100 && lines == 100 && replay_rejected == 100 && identical;
  return {pass, std::to_string(accepted.load()) + " accepted, " + std::to_string(lines) + " record lines, " +
                    std::to_string(replay_rejected) + "/100 replays rejected with 409, round trip " +
                    (identical ? "byte-identical" : "DIFFERS")};
}

}  // namespace

int main() {
  criterion("closed-form case 1 prices match the grid oracle", 120, case1_closed_form);
  criterion("q_o sweep: R1 then R2, revenue non-decreasing", 60, fig4a);
  criterion("commission sweep: R2 -> R1 -> R2", 60, fig5c);
  criterion("a = 1.5: R2 everywhere, feasible R1 revenue nonzero", 60, fig6b);
  criterion("on-demand price sweep at p_r = 0.5: R2 -> R1 -> R3", 0, fig6a);
  criterion("Monte Carlo matches the analytic choice fractions and revenue", 30, monte_carlo);
  criterion("regions are disjoint and exhaustive", 0, disjointness);
  criterion("two-sample KS statistic, size and power", 0, ks);
  criterion("study pipeline closure", 0, pipeline);
  criterion("service integrity under concurrent sessions", 0, service_integrity);
  std::printf("%s: %d failing criteria\n", failures == 0 ? "ALL PASS" : "FAILURES", failures);
  return failures == 0 ? 0 : 1;
}
