#pragma once

#include <cstdint>
#include <cstdio>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "eml/records.hpp"
#include "eml/rng.hpp"
#include "eml/study.hpp"

namespace eml {

class StorageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Append-only record file. Each append writes one complete line and flushes
/// it before returning; appends and exports are serialized.
class RecordStore {
 public:
  explicit RecordStore(std::string path);  // throws StorageError if not writable
  ~RecordStore();
  RecordStore(const RecordStore&) = delete;
  RecordStore& operator=(const RecordStore&) = delete;

  void append(const Record& r);
  /// Throws RecordParseError (with line number) on a corrupt file.
  std::vector<Record> read_all() const;
  void flush();
  const std::string& path() const { return path_; }

 private:
  std::string path_;
  std::FILE* file_ = nullptr;
  mutable std::mutex mutex_;
};

struct PayoffPreview {
  std::string option;  // SHARING, ONDEMAND, NONE or Y, N
  double payoff = 0.0;
};

struct SessionOffer {
  Role role = Role::Buyer;
  std::string session_id;
  std::string app_type;
  double usage = 0.0;           // usage requirement (buyer) or remaining usage (re-seller)
  double private_value = 0.0;   // u (buyer) or g (re-seller)
  bool private_value_shown = true;
  double on_demand_supply = 0.0;
  double sharing_supply = 0.0;
  double on_demand_price = 0.0;
  double sharing_price = 0.0;
  double commission = 0.0;
  std::vector<PayoffPreview> payoffs;

  std::string to_json_text() const;
};

class UnknownSessionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};
class ConsumedSessionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};
class InvalidChoiceError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Issues single-use sessions with sampled user fields and records one
/// decision per session.
class StudyService {
 public:
  using Clock = std::function<std::int64_t()>;

  StudyService(StudyConfig config, std::uint64_t seed, Clock clock = system_clock_seconds);

  SessionOffer open_session(Role role);
  /// Throws UnknownSessionError, ConsumedSessionError, InvalidChoiceError or
  /// StorageError. A failed write leaves the session open.
  Record submit_decision(const std::string& session_id, const std::string& choice);
  /// Records in append order, optionally filtered by role and inclusive time range.
  std::vector<Record> export_records(std::optional<Role> role = std::nullopt,
                                     std::optional<std::int64_t> from = std::nullopt,
                                     std::optional<std::int64_t> to = std::nullopt) const;
  void flush() { store_.flush(); }

  const StudyConfig& config() const { return config_; }

  static std::int64_t system_clock_seconds();

 private:
  struct Session {
    SessionOffer offer;
    enum class State { Open, Pending, Consumed } state = State::Open;
  };

  StudyConfig config_;
  Clock clock_;
  RecordStore store_;
  std::mutex mutex_;
  Rng rng_;
  std::uint64_t id_key_;
  std::uint64_t counter_ = 0;
  std::map<std::string, Session> sessions_;
};

}  // namespace eml
