#include "eml/http_api.hpp"

#include <httplib.h>

#include <json.hpp>
#include <sstream>

namespace eml {

namespace {

std::string error_body(const std::string& message) { return nlohmann::json{{"error", message}}.dump(); }

void send_error(httplib::Response& res, int status, const std::string& message) {
  res.status = status;
  res.set_content(error_body(message), "application/json");
}

std::optional<std::int64_t> time_param(const httplib::Request& req, const char* name) {
  if (!req.has_param(name)) return std::nullopt;
  const std::string v = req.get_param_value(name);
  std::size_t used = 0;
  long long t = 0;
  try {
    t = std::stoll(v, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != v.size()) throw std::invalid_argument(std::string(name) + ": expected integer UTC seconds");
  return t;
}

}  // namespace

StudyHttpServer::StudyHttpServer(StudyService& service)
    : service_(service), server_(std::make_unique<httplib::Server>()) {
  auto& svr = *server_;
  svr.set_socket_options([](socket_t sock) {
    int yes = 1;
    setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, &yes, sizeof(yes));
  });
  svr.set_default_headers({{"Access-Control-Allow-Origin", "*"},
                           {"Access-Control-Allow-Methods", "GET, POST, OPTIONS"},
                           {"Access-Control-Allow-Headers", "Content-Type"}});

  svr.Options(R"(.*)", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });

  svr.Get("/health", [](const httplib::Request&, httplib::Response& res) {
    res.set_content(R"({"status":"ok"})", "application/json");
  });

  svr.Get(R"(/session/(buyer|reseller))", [this](const httplib::Request& req, httplib::Response& res) {
    const auto offer = service_.open_session(parse_role(req.matches[1].str()));
    res.set_content(offer.to_json_text(), "application/json");
  });

  svr.Post("/decision", [this](const httplib::Request& req, httplib::Response& res) {
    std::string session, choice;
    try {
      const auto body = nlohmann::json::parse(req.body);
      session = body.at("session").get<std::string>();
      choice = body.at("choice").get<std::string>();
    } catch (const nlohmann::json::exception&) {
      return send_error(res, 400, R"(expected {"session": string, "choice": string})");
    }
    try {
      service_.submit_decision(session, choice);
      res.set_content(R"({"status":"recorded"})", "application/json");
    } catch (const UnknownSessionError& e) {
      send_error(res, 404, e.what());
    } catch (const ConsumedSessionError& e) {
      send_error(res, 409, e.what());
    } catch (const InvalidChoiceError& e) {
      send_error(res, 400, e.what());
    } catch (const StorageError& e) {
      send_error(res, 500, e.what());
    }
  });

  svr.Get("/export", [this](const httplib::Request& req, httplib::Response& res) {
    std::optional<Role> role;
    std::optional<std::int64_t> from, to;
    try {
      if (req.has_param("role") && !req.get_param_value("role").empty()) role = parse_role(req.get_param_value("role"));
      from = time_param(req, "from");
      to = time_param(req, "to");
    } catch (const std::invalid_argument& e) {
      return send_error(res, 400, e.what());
    }
    try {
      std::ostringstream out;
      write_records(out, service_.export_records(role, from, to));
      res.set_content(out.str(), "text/plain");
    } catch (const std::exception& e) {
      send_error(res, 500, e.what());
    }
  });

  svr.set_error_handler([](const httplib::Request&, httplib::Response& res) {
    if (res.body.empty()) res.set_content(error_body(httplib::status_message(res.status)), "application/json");
  });
  svr.set_exception_handler([](const httplib::Request&, httplib::Response& res, std::exception_ptr ep) {
    try {
      std::rethrow_exception(ep);
    } catch (const std::exception& e) {
      send_error(res, 500, e.what());
    } catch (...) {
      send_error(res, 500, "internal error");
    }
  });
}

StudyHttpServer::~StudyHttpServer() = default;

bool StudyHttpServer::bind(const std::string& host, int port) { return server_->bind_to_port(host, port); }

int StudyHttpServer::bind_any_port(const std::string& host) { return server_->bind_to_any_port(host); }

bool StudyHttpServer::listen() { return server_->listen_after_bind(); }

void StudyHttpServer::stop() { server_->stop(); }

bool StudyHttpServer::is_running() const { return server_->is_running(); }

}  // namespace eml
