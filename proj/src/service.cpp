#include "eml/service.hpp"

#include <cerrno>
#include <chrono>
#include <cstring>
#include <fstream>
#include <json.hpp>

namespace eml {

namespace {

std::string hex64(std::uint64_t x) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(x));
  return buf;
}

StudyConfig validated(StudyConfig c) {
  c.validate();
  return c;
}

}  // namespace

RecordStore::RecordStore(std::string path) : path_(std::move(path)) {
  file_ = std::fopen(path_.c_str(), "a");
  if (file_ == nullptr) throw StorageError("cannot open record file '" + path_ + "': " + std::strerror(errno));
}

RecordStore::~RecordStore() {
  if (file_ != nullptr) std::fclose(file_);
}

void RecordStore::append(const Record& r) {
  const std::string line = serialize(r) + "\n";
  std::lock_guard lock(mutex_);
  if (std::fwrite(line.data(), 1, line.size(), file_) != line.size() || std::fflush(file_) != 0) {
    throw StorageError("write to '" + path_ + "' failed: " + std::strerror(errno));
  }
}

std::vector<Record> RecordStore::read_all() const {
  std::lock_guard lock(mutex_);
  std::ifstream in(path_);
  if (!in) throw StorageError("cannot read record file '" + path_ + "'");
  return parse_records(in);
}

void RecordStore::flush() {
  std::lock_guard lock(mutex_);
  std::fflush(file_);
}

std::string SessionOffer::to_json_text() const {
  nlohmann::ordered_json j;
  j["session"] = session_id;
  j["role"] = std::string(to_string(role));
  j["app_type"] = app_type;
  if (role == Role::Buyer) {
    j["usage"] = usage;
    if (private_value_shown) j["willingness"] = private_value;
    j["market"] = {{"q_o", on_demand_supply}, {"q_s", sharing_supply}, {"p_o", on_demand_price}, {"p_r", sharing_price}};
  } else {
    j["remaining_usage"] = usage;
    j["inconvenience"] = private_value;
    j["market"] = {{"p_r", sharing_price}, {"delta", commission}};
  }
  auto options = nlohmann::ordered_json::array();
  for (const auto& p : payoffs) {
    nlohmann::ordered_json o{{"option", p.option}};
    if (private_value_shown) o["payoff"] = p.payoff;
    options.push_back(o);
  }
  j["options"] = options;
  return j.dump();
}

StudyService::StudyService(StudyConfig config, std::uint64_t seed, Clock clock)
    : config_(validated(std::move(config))),
      clock_(std::move(clock)),
      store_(config_.storage_path),
      rng_(stream_seed(seed, {1})),
      id_key_(stream_seed(seed, {2})) {}

std::int64_t StudyService::system_clock_seconds() {
  return std::chrono::duration_cast<std::chrono::seconds>(std::chrono::system_clock::now().time_since_epoch()).count();
}

SessionOffer StudyService::open_session(Role role) {
  std::lock_guard lock(mutex_);
  SessionOffer o;
  o.role = role;
  o.session_id = hex64(splitmix64(id_key_ + counter_++)) + hex64(rng_());
  o.private_value_shown = role == Role::Reseller || config_.show_willingness;
  o.sharing_price = round6(config_.sharing_price);
  if (role == Role::Buyer) {
    o.app_type = config_.buyer_apps[rng_.index(config_.buyer_apps.size())];
    o.usage = round6(config_.usage.sample(rng_));
    o.private_value = round6(config_.willingness.sample(rng_));
    o.on_demand_supply = round6(config_.on_demand_supply);
    o.sharing_supply = round6(config_.sharing_supply);
    o.on_demand_price = round6(config_.on_demand_price);
    const Prices p{o.on_demand_price, o.sharing_price};
    const Supplies s{o.on_demand_supply, o.sharing_supply};
    for (auto c : {BuyerChoice::Sharing, BuyerChoice::OnDemand, BuyerChoice::NoPurchase}) {
      o.payoffs.push_back({std::string(to_string(c)), round6(buyer_payoff(o.private_value, c, p, s))});
    }
  } else {
    o.app_type = config_.reseller_apps[rng_.index(config_.reseller_apps.size())];
    o.usage = round6(config_.usage.sample(rng_));
    o.private_value = round6(config_.costs.sample(rng_));
    o.commission = round6(config_.commission);
    for (auto c : {ResellerChoice::Sell, ResellerChoice::No}) {
      o.payoffs.push_back({std::string(to_string(c)), round6(reseller_payoff(o.private_value, c, o.sharing_price, o.commission))});
    }
  }
  sessions_[o.session_id] = Session{o};
  return o;
}

Record StudyService::submit_decision(const std::string& session_id, const std::string& choice) {
  SessionOffer offer;
  {
    std::lock_guard lock(mutex_);
    const auto it = sessions_.find(session_id);
    if (it == sessions_.end()) throw UnknownSessionError("unknown session '" + session_id + "'");
    if (it->second.state != Session::State::Open) throw ConsumedSessionError("session '" + session_id + "' already used");
    offer = it->second.offer;
    try {
      if (offer.role == Role::Buyer) {
        parse_buyer_choice(choice);
      } else {
        parse_reseller_choice(choice);
      }
    } catch (const std::invalid_argument& e) {
      throw InvalidChoiceError(e.what());
    }
    it->second.state = Session::State::Pending;
  }

  Record rec;
  if (offer.role == Role::Buyer) {
    rec = BuyerRecord{offer.usage,          offer.private_value,       offer.on_demand_supply,
                      offer.sharing_supply, offer.on_demand_price,     offer.sharing_price,
                      parse_buyer_choice(choice), clock_()};
  } else {
    rec = ResellerRecord{offer.usage,         offer.private_value,           offer.sharing_price, offer.commission,
                         offer.app_type,      parse_reseller_choice(choice), clock_()};
  }
  try {
    store_.append(rec);
  } catch (...) {
    std::lock_guard lock(mutex_);
    sessions_[session_id].state = Session::State::Open;
    throw;
  }
  std::lock_guard lock(mutex_);
  sessions_[session_id].state = Session::State::Consumed;
  return rec;
}

std::vector<Record> StudyService::export_records(std::optional<Role> role, std::optional<std::int64_t> from,
                                                 std::optional<std::int64_t> to) const {
  std::vector<Record> out;
  for (auto& r : store_.read_all()) {
    if (role && role_of(r) != *role) continue;
    const auto t = timestamp_of(r);
    if ((from && t < *from) || (to && t > *to)) continue;
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace eml
