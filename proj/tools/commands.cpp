#include "commands.hpp"

#include <pthread.h>
#include <signal.h>

#include <CLI11.hpp>
#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <optional>
#include <thread>

#include "eml/analytics.hpp"
#include "eml/experiment.hpp"
#include "eml/http_api.hpp"
#include "eml/records.hpp"
#include "eml/service.hpp"
#include "eml/solver.hpp"
#include "eml/study.hpp"

namespace eml::cli {
namespace {

struct ExitError {
  int code;
  std::string message;
};

[[noreturn]] void fail(int code, std::string message) { throw ExitError{code, std::move(message)}; }

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

CLI::Validator distribution_validator() {
  return CLI::Validator(
      [](std::string& s) {
        try {
          Distribution::parse(s);
        } catch (const std::exception& e) {
          return std::string(e.what());
        }
        return std::string();
      },
      "DIST", "distribution");
}

struct MarketFlags {
  double qo = 0.2;
  double delta = 0.2;
  double a = 2.0;
  int n = 50;
  std::string dist = "uniform";
  std::string cost_dist = "uniform";
  std::string usage_dist = "degenerate:1";

  void add_to(CLI::App* cmd) {
    cmd->add_option("--qo", qo, "on-demand supply q_o")->check(CLI::PositiveNumber)->capture_default_str();
    cmd->add_option("--delta", delta, "operator commission")->check(CLI::Range(0.0, 1.0))->capture_default_str();
    cmd->add_option("--a", a, "sharing supply scale")->check(CLI::PositiveNumber)->capture_default_str();
    cmd->add_option("--n", n, "number of buyers and of re-sellers")->check(CLI::PositiveNumber)->capture_default_str();
    cmd->add_option("--dist", dist, "buyer willingness-to-pay distribution (uniform, beta:A,B, degenerate:V)")
        ->check(distribution_validator())
        ->capture_default_str();
    cmd->add_option("--cost-dist", cost_dist, "re-seller cost distribution")
        ->check(distribution_validator())
        ->capture_default_str();
    cmd->add_option("--usage-dist", usage_dist, "usage distribution")
        ->check(distribution_validator())
        ->capture_default_str();
  }

  MarketParams params() const {
    MarketParams p;
    p.on_demand_supply = qo;
    p.commission = delta;
    p.supply_scale = a;
    p.n_buyers = n;
    p.n_resellers = n;
    p.buyer_types = Distribution::parse(dist);
    p.reseller_costs = Distribution::parse(cost_dist);
    p.usage = Distribution::parse(usage_dist);
    return p;
  }
};

std::ofstream open_output(const std::string& path) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) fail(kExitUnwritablePath, "cannot write '" + path + "'");
  return f;
}

void finish_output(std::ofstream& f, const std::string& path) {
  f.flush();
  if (!f) fail(kExitUnwritablePath, "cannot write '" + path + "'");
}

// solve

struct SolveFlags {
  MarketFlags market;
  std::string mode = "case2";
  std::optional<double> qs;
  double pr_max = 2.0;
  double pr_step = 1e-3;
  std::string out;
};

nlohmann::ordered_json solve_json(const SolveResult& r, const std::string& mode) {
  nlohmann::ordered_json j;
  j["mode"] = mode;
  j["p_o"] = r.prices.on_demand;
  j["p_r"] = r.prices.sharing;
  j["q_s"] = r.sharing_supply;
  j["region"] = to_string(r.region.label);
  j["supply_order"] = to_string(r.region.order);
  j["revenue"] = r.revenue;
  j["candidates"] = nlohmann::ordered_json::array();
  for (const auto& c : r.diagnostics) {
    j["candidates"].push_back({{"label", c.label},
                               {"p_o", c.prices.on_demand},
                               {"p_r", c.prices.sharing},
                               {"revenue", c.revenue},
                               {"feasible", c.feasible},
                               {"note", c.note}});
  }
  j["warnings"] = r.warnings;
  return j;
}

int run_solve(const SolveFlags& f, std::ostream& out) {
  const MarketParams params = f.market.params();
  SolveResult result;
  if (f.mode == "case1") {
    if (!f.qs) fail(kExitInvalidFlags, "--qs is required with --mode case1");
    if (!params.buyer_types.is_uniform()) fail(kExitInvalidFlags, "--dist: case1 requires uniform willingness to pay");
    result = solve_case1({params.on_demand_supply, *f.qs}, params.commission, params.n_buyers);
  } else {
    if (f.qs) fail(kExitInvalidFlags, "--qs: only valid with --mode case1");
    result = solve_case2(params, {0.0, f.pr_max, f.pr_step});
  }

  std::ofstream file;
  if (!f.out.empty()) file = open_output(f.out);

  out << "p_o " << fmt(result.prices.on_demand) << '\n'
      << "p_r " << fmt(result.prices.sharing) << '\n'
      << "q_s " << fmt(result.sharing_supply) << '\n'
      << "region " << to_string(result.region.label) << " (" << to_string(result.region.order) << ")\n"
      << "revenue " << fmt(result.revenue) << '\n'
      << "candidates:\n";
  for (const auto& c : result.diagnostics) {
    out << "  " << c.label << " p_o=" << fmt(c.prices.on_demand) << " p_r=" << fmt(c.prices.sharing)
        << " revenue=" << fmt(c.revenue) << (c.feasible ? " feasible" : " infeasible");
    if (!c.note.empty()) out << " (" << c.note << ")";
    out << '\n';
  }
  for (const auto& w : result.warnings) out << "warning: " << w << '\n';

  if (!f.out.empty()) {
    file << solve_json(result, f.mode).dump(2) << '\n';
    finish_output(file, f.out);
  }
  return kExitOk;
}

// experiment

struct ExperimentFlags {
  MarketFlags market;
  std::string figure;
  std::string axis;
  double from = 0.0;
  double to = 0.0;
  double step = 0.0;
  std::string mode = "case2";
  std::optional<double> qs;
  std::optional<double> pr;
  std::string id = "custom";
  std::optional<std::uint64_t> seed;
  std::optional<int> reps;
  std::string out;
};

std::vector<ExperimentSpec> experiment_specs(const ExperimentFlags& f) {
  std::vector<ExperimentSpec> specs;
  if (!f.figure.empty()) {
    try {
      specs = figure_specs(f.figure);
    } catch (const std::invalid_argument& e) {
      fail(kExitInvalidFlags, "--figure: " + std::string(e.what()));
    }
  } else {
    if (f.axis.empty()) fail(kExitInvalidFlags, "--figure or --axis is required");
    ExperimentSpec s;
    s.id = f.id;
    s.params = f.market.params();
    s.axis = parse_sweep_axis(f.axis);
    s.options.mode = parse_sweep_mode(f.mode);
    if (!(f.step > 0.0) || !(f.to >= f.from)) fail(kExitInvalidFlags, "--from/--to/--step: need step > 0 and to >= from");
    s.values = axis_values(f.from, f.to, f.step);
    if (s.options.mode == SweepMode::Case1) {
      if (!f.qs) fail(kExitInvalidFlags, "--qs is required with --mode case1");
      s.options.case1_sharing_supply = *f.qs;
    }
    if (s.options.mode == SweepMode::FixedPrices) {
      if (!f.pr) fail(kExitInvalidFlags, "--pr is required with --mode fixed-prices");
      s.options.fixed_sharing_price = *f.pr;
    }
    specs.push_back(s);
  }
  for (auto& s : specs) {
    if (f.seed) s.seed = *f.seed;
    if (f.reps) s.replications = *f.reps;
  }
  return specs;
}

int run_experiment_cmd(const ExperimentFlags& f, std::ostream& out) {
  const auto specs = experiment_specs(f);
  std::ofstream file;
  if (!f.out.empty()) file = open_output(f.out);
  std::vector<OutputRow> rows;
  for (const auto& s : specs) {
    try {
      auto part = run_experiment(s);
      rows.insert(rows.end(), part.begin(), part.end());
    } catch (const SweepError& e) {
      fail(kExitFailure, std::string(e.what()));
    }
  }
  if (f.out.empty()) {
    write_csv(out, rows);
  } else {
    write_csv(file, rows);
    finish_output(file, f.out);
    out << "wrote " << rows.size() << " rows to " << f.out << '\n';
  }
  return kExitOk;
}

// analyze

struct AnalyzeFlags {
  std::string records;
  std::string out;
  double alpha = 0.05;
};

int run_analyze(const AnalyzeFlags& f, std::ostream& out) {
  std::ifstream in(f.records, std::ios::binary);
  if (!in) fail(kExitInvalidFlags, "--records: cannot read '" + f.records + "'");
  std::vector<Record> records;
  try {
    records = parse_records(in);
  } catch (const RecordParseError& e) {
    fail(kExitMalformedRecord, f.records + ": " + e.what());
  }
  std::ofstream file;
  if (!f.out.empty()) file = open_output(f.out);
  StudyReport report;
  try {
    report = build_study_report(records, f.alpha);
  } catch (const MixedParametersError& e) {
    fail(kExitFailure, e.what());
  }
  out << report.to_text();
  if (!f.out.empty()) {
    report.write_csv(file);
    finish_output(file, f.out);
  }
  return kExitOk;
}

// synth

struct SynthFlags {
  std::string config;
  std::size_t buyers = 500;
  std::size_t resellers = 500;
  double noise = 0.0;
  std::uint64_t seed = 1;
  std::string out;
};

StudyConfig load_config(const std::string& path) {
  if (path.empty()) return StudyConfig{};
  try {
    return StudyConfig::load(path);
  } catch (const std::exception& e) {
    fail(kExitInvalidFlags, "--config: " + std::string(e.what()));
  }
}

int run_synth(const SynthFlags& f, std::ostream& out) {
  const StudyConfig config = load_config(f.config);
  SyntheticOptions opt;
  opt.buyers = f.buyers;
  opt.resellers = f.resellers;
  opt.noise = f.noise;
  opt.seed = f.seed;
  const auto records = synthesize_records(config, opt);
  if (f.out.empty()) {
    write_records(out, records);
    return kExitOk;
  }
  auto file = open_output(f.out);
  write_records(file, records);
  finish_output(file, f.out);
  out << "wrote " << records.size() << " records to " << f.out << '\n';
  return kExitOk;
}

// serve

struct ServeFlags {
  std::string config;
  std::optional<int> port;
  std::optional<std::string> storage;
  std::optional<std::string> host;
  std::uint64_t seed = 0;
};

int run_serve(const ServeFlags& f, std::ostream& out) {
  StudyConfig config = load_config(f.config);
  config.apply_environment([](const char* name) { return std::getenv(name); });
  if (f.port) config.port = *f.port;
  if (f.storage) config.storage_path = *f.storage;
  if (f.host) config.host = *f.host;
  try {
    config.validate();
  } catch (const std::exception& e) {
    fail(kExitInvalidFlags, e.what());
  }

  const std::uint64_t seed =
      f.seed != 0 ? f.seed : static_cast<std::uint64_t>(std::chrono::steady_clock::now().time_since_epoch().count());
  std::optional<StudyService> service;
  try {
    service.emplace(config, seed);
  } catch (const StorageError& e) {
    fail(kExitUnwritablePath, e.what());
  }

  StudyHttpServer server(*service);
  int port = config.port;
  if (port == 0) {
    port = server.bind_any_port(config.host);
    if (port <= 0) fail(kExitPortBusy, "cannot bind " + config.host);
  } else if (!server.bind(config.host, port)) {
    fail(kExitPortBusy, "port " + std::to_string(port) + " is busy");
  }
  // Inherited by the server threads; the waiter thread takes the signals.
  sigset_t stop_signals;
  sigemptyset(&stop_signals);
  sigaddset(&stop_signals, SIGINT);
  sigaddset(&stop_signals, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &stop_signals, nullptr);

  out << "listening on " << config.host << ':' << port << std::endl;

  std::atomic<bool> listen_done{false};
  std::thread waiter([&] {
    int sig = 0;
    sigwait(&stop_signals, &sig);
    while (!listen_done.load()) {
      server.stop();
      std::this_thread::sleep_for(std::chrono::milliseconds(10));
    }
  });
  const bool listened = server.listen();
  listen_done = true;
  pthread_kill(waiter.native_handle(), SIGTERM);
  waiter.join();
  service->flush();
  out << "stopped" << std::endl;
  return listened ? kExitOk : kExitFailure;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Mobile data sharing market: equilibrium solver, experiments and study back end", "eml"};
  app.require_subcommand(1);

  SolveFlags solve;
  auto* solve_cmd = app.add_subcommand("solve", "optimal operator prices for one market");
  solve.market.add_to(solve_cmd);
  solve_cmd->add_option("--mode", solve.mode, "case1 (fixed q_s) or case2 (q_s from re-sellers)")
      ->check(CLI::IsMember({"case1", "case2"}))
      ->capture_default_str();
  solve_cmd->add_option("--qs", solve.qs, "sharing supply (case1)")->check(CLI::NonNegativeNumber);
  solve_cmd->add_option("--pr-max", solve.pr_max, "upper end of the p_r search grid")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  solve_cmd->add_option("--pr-step", solve.pr_step, "p_r search step")->check(CLI::PositiveNumber)->capture_default_str();
  solve_cmd->add_option("--out", solve.out, "write the result as JSON");

  ExperimentFlags exp;
  auto* exp_cmd = app.add_subcommand("experiment", "revenue curves as CSV");
  exp.market.add_to(exp_cmd);
  auto* figure_opt = exp_cmd->add_option("--figure", exp.figure, "figure id")->check(CLI::IsMember(figure_ids()));
  auto* axis_opt = exp_cmd->add_option("--axis", exp.axis, "sweep axis")->check(CLI::IsMember({"q_o", "delta", "p_o", "a"}));
  figure_opt->excludes(axis_opt);
  exp_cmd->add_option("--from", exp.from, "first axis value");
  exp_cmd->add_option("--to", exp.to, "last axis value");
  exp_cmd->add_option("--step", exp.step, "axis step")->check(CLI::PositiveNumber);
  exp_cmd->add_option("--mode", exp.mode, "case1, case2 or fixed-prices")
      ->check(CLI::IsMember({"case1", "case2", "fixed-prices"}))
      ->capture_default_str();
  exp_cmd->add_option("--qs", exp.qs, "sharing supply (case1)")->check(CLI::NonNegativeNumber);
  exp_cmd->add_option("--pr", exp.pr, "sharing price (fixed-prices)")->check(CLI::NonNegativeNumber);
  exp_cmd->add_option("--id", exp.id, "experiment id for explicit sweeps")->capture_default_str();
  exp_cmd->add_option("--seed", exp.seed, "Monte Carlo seed");
  exp_cmd->add_option("--reps", exp.reps, "Monte Carlo replications per point")->check(CLI::PositiveNumber);
  exp_cmd->add_option("--out", exp.out, "CSV output path (default stdout)");

  AnalyzeFlags analyze;
  auto* analyze_cmd = app.add_subcommand("analyze", "agreement and KS report for study records");
  analyze_cmd->add_option("--records", analyze.records, "record file")->required();
  analyze_cmd->add_option("--out", analyze.out, "CSV report path");
  analyze_cmd->add_option("--alpha", analyze.alpha, "KS significance level")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();

  SynthFlags synth;
  auto* synth_cmd = app.add_subcommand("synth", "synthetic model-following study records");
  synth_cmd->add_option("--config", synth.config, "study config JSON")->check(CLI::ExistingFile);
  synth_cmd->add_option("--buyers", synth.buyers, "buyer records")->capture_default_str();
  synth_cmd->add_option("--resellers", synth.resellers, "re-seller records")->capture_default_str();
  synth_cmd->add_option("--noise", synth.noise, "fraction of records with a non-model choice")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
  synth_cmd->add_option("--seed", synth.seed, "sampling seed")->capture_default_str();
  synth_cmd->add_option("--out", synth.out, "record file (default stdout)");

  ServeFlags serve;
  auto* serve_cmd = app.add_subcommand("serve", "run the study back end");
  serve_cmd->add_option("--config", serve.config, "study config JSON")->check(CLI::ExistingFile);
  serve_cmd->add_option("--port", serve.port, "listen port (0 picks a free port)")->check(CLI::Range(0, 65535));
  serve_cmd->add_option("--storage", serve.storage, "record file");
  serve_cmd->add_option("--host", serve.host, "listen address");
  serve_cmd->add_option("--seed", serve.seed, "session sampling seed (0 seeds from the clock)");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, err, err);
    return kExitInvalidFlags;
  }

  try {
    if (*solve_cmd) return run_solve(solve, out);
    if (*exp_cmd) return run_experiment_cmd(exp, out);
    if (*analyze_cmd) return run_analyze(analyze, out);
    if (*synth_cmd) return run_synth(synth, out);
    if (*serve_cmd) return run_serve(serve, out);
  } catch (const ExitError& e) {
    err << "error: " << e.message << '\n';
    return e.code;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return kExitInvalidFlags;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
  return kExitFailure;
}

}  // namespace eml::cli
