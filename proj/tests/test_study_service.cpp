#include <doctest.h>
#include <httplib.h>

#include <fstream>
#include <json.hpp>
#include <set>
#include <sstream>
#include <thread>

#include "eml/analytics.hpp"
#include "eml/http_api.hpp"
#include "eml/service.hpp"
#include "temp_dir.hpp"

using namespace eml;
using nlohmann::json;

namespace {

StudyConfig config_at(const std::string& path) {
  StudyConfig c;
  c.storage_path = path;
  return c;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct RunningServer {
  StudyHttpServer server;
  int port;
  std::thread thread;
  explicit RunningServer(StudyService& svc) : server(svc), port(server.bind_any_port("127.0.0.1")) {
    REQUIRE(port > 0);
    thread = std::thread([this] { server.listen(); });
    while (!server.is_running()) std::this_thread::yield();
  }
  ~RunningServer() {
    server.stop();
    thread.join();
  }
};

}  // namespace

TEST_CASE("offers carry the study parameters and a payoff preview") {
  TempDir dir;
  StudyService svc(config_at(dir.file("r.csv")), 3);
  const auto b = svc.open_session(Role::Buyer);
  CHECK(b.on_demand_supply == 0.6);
  CHECK(b.sharing_supply == 0.7);
  CHECK(b.on_demand_price == 0.15);
  CHECK(b.sharing_price == 0.2);
  REQUIRE(b.payoffs.size() == 3);
  CHECK(b.payoffs[0].payoff == doctest::Approx(round6(b.private_value * 0.7 - 0.2)));
  const auto& apps = svc.config().buyer_apps;
  CHECK(std::find(apps.begin(), apps.end(), b.app_type) != apps.end());
  CHECK(svc.open_session(Role::Buyer).session_id != b.session_id);

  const auto r = svc.open_session(Role::Reseller);
  REQUIRE(r.payoffs.size() == 2);
  CHECK(r.payoffs[0].payoff == doctest::Approx(round6(0.16 - r.private_value)));
  CHECK(r.payoffs[1].payoff == 0.0);
}

TEST_CASE("re-seller payoff preview for g = 0.1") {
  TempDir dir;
  auto cfg = config_at(dir.file("r.csv"));
  cfg.costs = Distribution::degenerate(0.1);
  StudyService svc(cfg, 1);
  const auto r = svc.open_session(Role::Reseller);
  CHECK(r.payoffs[0].option == "Y");
  CHECK(r.payoffs[0].payoff == doctest::Approx(0.06));
  CHECK(r.payoffs[1].payoff == 0.0);
}

TEST_CASE("hidden willingness drops u and payoffs from the offer") {
  TempDir dir;
  auto cfg = config_at(dir.file("r.csv"));
  cfg.show_willingness = false;
  StudyService svc(cfg, 1);
  const auto j = json::parse(svc.open_session(Role::Buyer).to_json_text());
  CHECK_FALSE(j.contains("willingness"));
  CHECK_FALSE(j["options"][0].contains("payoff"));
}

TEST_CASE("decisions are recorded once, matching the offer") {
  TempDir dir;
  StudyService svc(config_at(dir.file("r.csv")), 4, [] { return std::int64_t{1700000123}; });
  const auto offer = svc.open_session(Role::Buyer);
  const auto rec = std::get<BuyerRecord>(svc.submit_decision(offer.session_id, "ONDEMAND"));
  CHECK(rec.willingness == offer.private_value);
  CHECK(rec.usage == offer.usage);
  CHECK(rec.timestamp == 1700000123);
  CHECK_THROWS_AS(svc.submit_decision(offer.session_id, "ONDEMAND"), ConsumedSessionError);
  CHECK_THROWS_AS(svc.submit_decision("nope", "ONDEMAND"), UnknownSessionError);
  const auto r = svc.open_session(Role::Reseller);
  CHECK_THROWS_AS(svc.submit_decision(r.session_id, "SHARING"), InvalidChoiceError);
  svc.submit_decision(r.session_id, "Y");
  CHECK(svc.export_records().size() == 2);
  CHECK(svc.export_records(Role::Reseller).size() == 1);
  CHECK(svc.export_records(std::nullopt, 1700000124).empty());
}

TEST_CASE("record file only grows by whole lines") {
  TempDir dir;
  const auto path = dir.file("r.csv");
  StudyService svc(config_at(path), 8);
  std::string before = slurp(path);
  for (int i = 0; i < 20; ++i) {
    const auto o = svc.open_session(i % 2 ? Role::Buyer : Role::Reseller);
    svc.submit_decision(o.session_id, i % 2 ? "NONE" : "N");
    const std::string now = slurp(path);
    CHECK(now.compare(0, before.size(), before) == 0);
    CHECK(now.back() == '\n');
    before = now;
  }
}

TEST_CASE("unwritable storage") {
  CHECK_THROWS_AS(StudyService(config_at("/nonexistent-dir/r.csv"), 1), StorageError);
}

TEST_CASE("sampled fields follow the configured distributions") {
  TempDir dir;
  auto cfg = config_at(dir.file("r.csv"));
  cfg.costs = Distribution::beta(2, 2);
  StudyService svc(cfg, 12);
  std::vector<double> u, g;
  for (int i = 0; i < 10000; ++i) {
    u.push_back(svc.open_session(Role::Buyer).private_value);
    g.push_back(svc.open_session(Role::Reseller).private_value);
  }
  CHECK(ks_one_sample(u, [](double x) { return std::clamp(x, 0.0, 1.0); }).p_value > 0.01);
  const auto beta = Distribution::beta(2, 2);
  CHECK(ks_one_sample(g, [&](double x) { return beta.cdf(x); }).p_value > 0.01);
}

TEST_CASE("HTTP API") {
  TempDir dir;
  const auto path = dir.file("r.csv");
  StudyService svc(config_at(path), 21);
  RunningServer rs(svc);
  httplib::Client cli("127.0.0.1", rs.port);

  auto health = cli.Get("/health");
  REQUIRE(health);
  CHECK(health->status == 200);
  CHECK(health->get_header_value("Access-Control-Allow-Origin") == "*");

  auto s = cli.Get("/session/buyer");
  REQUIRE(s);
  CHECK(s->status == 200);
  const auto offer = json::parse(s->body);
  CHECK(offer["market"]["q_o"] == 0.6);
  const std::string id = offer["session"];

  CHECK(cli.Get("/session/admin")->status == 404);
  CHECK(cli.Post("/decision", json{{"session", id}, {"choice", "MAYBE"}}.dump(), "application/json")->status == 400);
  CHECK(cli.Post("/decision", "not json", "application/json")->status == 400);
  CHECK(cli.Post("/decision", json{{"session", "zzz"}, {"choice", "NONE"}}.dump(), "application/json")->status == 404);
  CHECK(cli.Post("/decision", json{{"session", id}, {"choice", "SHARING"}}.dump(), "application/json")->status == 200);
  CHECK(cli.Post("/decision", json{{"session", id}, {"choice", "SHARING"}}.dump(), "application/json")->status == 409);

  const std::string rid = json::parse(cli.Get("/session/reseller")->body)["session"];
  CHECK(cli.Post("/decision", json{{"session", rid}, {"choice", "N"}}.dump(), "application/json")->status == 200);

  auto all = cli.Get("/export");
  REQUIRE(all);
  CHECK(all->status == 200);
  CHECK(all->body == slurp(path));
  auto buyers = cli.Get("/export?role=buyer");
  CHECK(std::count(buyers->body.begin(), buyers->body.end(), '\n') == 1);
  CHECK(cli.Get("/export?role=admin")->status == 400);
  CHECK(cli.Get("/export?from=abc")->status == 400);
  CHECK(cli.Options("/decision")->status == 204);
}

TEST_CASE("concurrent sessions over HTTP") {
  TempDir dir;
  const auto path = dir.file("r.csv");
  StudyService svc(config_at(path), 22);
  RunningServer rs(svc);
  std::vector<std::thread> clients;
  std::atomic<int> ok{0};
  for (int i = 0; i < 100; ++i) {
    clients.emplace_back([&, i] {
      httplib::Client cli("127.0.0.1", rs.port);
      const bool buyer = i % 2 == 0;
      auto s = cli.Get(buyer ? "/session/buyer" : "/session/reseller");
      if (!s || s->status != 200) return;
      const std::string id = json::parse(s->body)["session"];
      auto d = cli.Post("/decision", json{{"session", id}, {"choice", buyer ? "ONDEMAND" : "Y"}}.dump(),
                        "application/json");
      if (d && d->status == 200) ++ok;
    });
  }
  for (auto& t : clients) t.join();
  CHECK(ok == 100);
  std::ifstream in(path);
  const auto recs = parse_records(in);
  CHECK(recs.size() == 100);
  std::ostringstream again;
  write_records(again, recs);
  CHECK(again.str() == slurp(path));
}

TEST_CASE("binding a port that is already listening fails") {
  TempDir dir;
  StudyService svc(config_at(dir.file("r.csv")), 1);
  StudyHttpServer first(svc);
  const int port = first.bind_any_port("127.0.0.1");
  REQUIRE(port > 0);
  StudyHttpServer second(svc);
  CHECK_FALSE(second.bind("127.0.0.1", port));
}
