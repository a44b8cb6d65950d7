#pragma once

#include <memory>
#include <string>

#include "eml/service.hpp"

namespace httplib {
class Server;
}

// HTTP front of the study service. JSON bodies except /export, which returns
// record lines as text/plain.
//
//   GET  /session/buyer, /session/reseller   -> offer
//   POST /decision {"session": id, "choice": c} -> {"status": "recorded"}
//   GET  /export?role=&from=&to=             -> record lines
//   GET  /health                             -> {"status": "ok"}
//
// Errors: 400 bad request or invalid choice, 404 unknown session or route,
// 409 session already used, 500 storage failure. Every response carries
// Access-Control-Allow-Origin: *.
namespace eml {

class StudyHttpServer {
 public:
  explicit StudyHttpServer(StudyService& service);
  ~StudyHttpServer();

  /// Returns false if the address cannot be bound (e.g. port in use).
  bool bind(const std::string& host, int port);
  /// Binds an ephemeral port and returns it, or -1.
  int bind_any_port(const std::string& host);
  /// Serves until stop(); returns false on a listen failure.
  bool listen();
  void stop();
  bool is_running() const;

 private:
  StudyService& service_;
  std::unique_ptr<httplib::Server> server_;
};

}  // namespace eml
