#include "eml/study.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <json.hpp>
#include <sstream>
#include <stdexcept>

#include "eml/analytics.hpp"
#include "eml/rng.hpp"

namespace eml {

namespace {

using nlohmann::json;

void check_apps(const std::vector<std::string>& apps, const char* name) {
  if (apps.empty()) throw std::invalid_argument(std::string(name) + ": app list must be non-empty");
  for (const auto& a : apps) {
    if (a.empty() || a.find_first_of(",\n\r") != std::string::npos) {
      throw std::invalid_argument(std::string(name) + ": app names must be non-empty and free of commas/newlines");
    }
  }
}

int parse_port(const std::string& s, const char* source) {
  std::size_t used = 0;
  int port = -1;
  try {
    port = std::stoi(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != s.size() || port < 0 || port > 65535) {
    throw std::invalid_argument(std::string(source) + ": invalid port '" + s + "'");
  }
  return port;
}

}  // namespace

void StudyConfig::validate() const {
  if (!(on_demand_supply > 0.0) || !std::isfinite(on_demand_supply)) throw std::invalid_argument("q_o must be > 0");
  if (!(sharing_supply >= 0.0) || !std::isfinite(sharing_supply)) throw std::invalid_argument("q_s must be >= 0");
  if (!(on_demand_price >= 0.0) || !std::isfinite(on_demand_price)) throw std::invalid_argument("p_o must be >= 0");
  if (!(sharing_price >= 0.0) || !std::isfinite(sharing_price)) throw std::invalid_argument("p_r must be >= 0");
  if (!(commission >= 0.0 && commission <= 1.0)) throw std::invalid_argument("delta must lie in [0,1]");
  check_apps(buyer_apps, "buyer_apps");
  check_apps(reseller_apps, "reseller_apps");
  if (port < 0 || port > 65535) throw std::invalid_argument("port must lie in [0,65535]");
  if (storage_path.empty()) throw std::invalid_argument("storage must be non-empty");
}

StudyConfig StudyConfig::from_json_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(std::string("config: ") + e.what());
  }
  if (!j.is_object()) throw std::invalid_argument("config: expected a JSON object");
  StudyConfig c;
  try {
    for (const auto& [key, v] : j.items()) {
      if (key == "q_o") c.on_demand_supply = v.get<double>();
      else if (key == "q_s") c.sharing_supply = v.get<double>();
      else if (key == "p_o") c.on_demand_price = v.get<double>();
      else if (key == "p_r") c.sharing_price = v.get<double>();
      else if (key == "delta") c.commission = v.get<double>();
      else if (key == "buyer_apps") c.buyer_apps = v.get<std::vector<std::string>>();
      else if (key == "reseller_apps") c.reseller_apps = v.get<std::vector<std::string>>();
      else if (key == "willingness") c.willingness = Distribution::parse(v.get<std::string>());
      else if (key == "cost") c.costs = Distribution::parse(v.get<std::string>());
      else if (key == "usage") c.usage = Distribution::parse(v.get<std::string>());
      else if (key == "show_willingness") c.show_willingness = v.get<bool>();
      else if (key == "host") c.host = v.get<std::string>();
      else if (key == "port") c.port = v.get<int>();
      else if (key == "storage") c.storage_path = v.get<std::string>();
      else throw std::invalid_argument("config: unknown key '" + key + "'");
    }
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("config: ") + e.what());
  }
  c.validate();
  return c;
}

StudyConfig StudyConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("config: cannot read '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return from_json_text(ss.str());
}

std::string StudyConfig::to_json_text() const {
  const json j = {{"q_o", on_demand_supply},
                  {"q_s", sharing_supply},
                  {"p_o", on_demand_price},
                  {"p_r", sharing_price},
                  {"delta", commission},
                  {"buyer_apps", buyer_apps},
                  {"reseller_apps", reseller_apps},
                  {"willingness", willingness.to_string()},
                  {"cost", costs.to_string()},
                  {"usage", usage.to_string()},
                  {"show_willingness", show_willingness},
                  {"host", host},
                  {"port", port},
                  {"storage", storage_path}};
  return j.dump(2);
}

void StudyConfig::apply_environment(const std::function<const char*(const char*)>& getenv_fn) {
  if (const char* p = getenv_fn("EML_PORT"); p && *p) port = parse_port(p, "EML_PORT");
  if (const char* s = getenv_fn("EML_STORAGE"); s && *s) storage_path = s;
}

std::vector<Record> synthesize_records(const StudyConfig& config, const SyntheticOptions& options) {
  config.validate();
  if (!(options.noise >= 0.0 && options.noise <= 1.0)) throw std::invalid_argument("noise must lie in [0,1]");
  Rng rng(options.seed);
  std::vector<Record> out;
  out.reserve(options.buyers + options.resellers);
  std::int64_t t = options.start_time;
  for (std::size_t i = 0; i < options.buyers; ++i) {
    BuyerRecord b;
    b.usage = round6(config.usage.sample(rng));
    b.willingness = round6(config.willingness.sample(rng));
    b.on_demand_supply = round6(config.on_demand_supply);
    b.sharing_supply = round6(config.sharing_supply);
    b.on_demand_price = round6(config.on_demand_price);
    b.sharing_price = round6(config.sharing_price);
    b.choice = predicted_choice(b);
    b.timestamp = t++;
    out.push_back(b);
  }
  for (std::size_t i = 0; i < options.resellers; ++i) {
    ResellerRecord r;
    r.remaining_usage = round6(config.usage.sample(rng));
    r.cost = round6(config.costs.sample(rng));
    r.sharing_price = round6(config.sharing_price);
    r.commission = round6(config.commission);
    r.app_type = config.reseller_apps[rng.index(config.reseller_apps.size())];
    r.choice = predicted_choice(r);
    r.timestamp = t++;
    out.push_back(r);
  }
  if (options.noise == 0.0) return out;

  // Group record indices by (role, model choice), then flip a fixed share of each group.
  std::map<std::pair<int, int>, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (const auto* b = std::get_if<BuyerRecord>(&out[i])) {
      groups[{0, static_cast<int>(b->choice)}].push_back(i);
    } else {
      groups[{1, static_cast<int>(std::get<ResellerRecord>(out[i]).choice)}].push_back(i);
    }
  }
  for (auto& [key, idx] : groups) {
    std::shuffle(idx.begin(), idx.end(), rng);
    const auto flips = static_cast<std::size_t>(std::llround(options.noise * static_cast<double>(idx.size())));
    for (std::size_t k = 0; k < flips; ++k) {
      auto& rec = out[idx[k]];
      if (auto* b = std::get_if<BuyerRecord>(&rec)) {
        const int shift = 1 + static_cast<int>(rng.index(2));
        b->choice = static_cast<BuyerChoice>((static_cast<int>(b->choice) + shift) % 3);
      } else {
        auto& r = std::get<ResellerRecord>(rec);
        r.choice = r.choice == ResellerChoice::Sell ? ResellerChoice::No : ResellerChoice::Sell;
      }
    }
  }
  return out;
}

}  // namespace eml
