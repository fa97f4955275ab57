#pragma once

#include <memory>
#include <string>
#include <vector>

#include "json.hpp"
#include "tapestry/flesh/simulation.hpp"

namespace tapestry::monitor {

/// http::enabled, http::port, http::host and http::norms.
flesh::ThornManifest http_thorn();

struct Response {
  int status = 200;
  std::string body;  // JSON
};

struct MonitorOptions {
  /// Variables whose L2 norm goes into every snapshot; empty means every
  /// variable of every evolved group.
  std::vector<std::string> norms;
  std::string checkpoint_dir = "checkpoints";
  /// Seconds a GET /reduce waits for the next iteration boundary.
  double reduce_timeout = 30.0;
};

/// Live view of one simulation. Snapshots are published from the run loop
/// at every iteration boundary; requests only read those and queue work for
/// the next boundary, so the evolution never races the server.
class Monitor {
 public:
  Monitor(flesh::Simulation& sim, MonitorOptions options = {});
  ~Monitor();
  Monitor(const Monitor&) = delete;
  Monitor& operator=(const Monitor&) = delete;

  /// Dispatch one request as the HTTP server would.
  Response handle_request(const std::string& method, const std::string& target, const std::string& body);

  /// Serve on host:port in a background thread; port 0 picks a free port.
  /// Returns the bound port.
  int start_server(const std::string& host = "127.0.0.1", int port = 0);
  void stop_server();

  /// Latest published /status body.
  std::string status() const;
  /// Number of snapshots published so far.
  std::int64_t published() const;

  struct State;

 private:
  std::shared_ptr<State> state_;
};

/// Monitor configured from the http:: parameters, serving when
/// http::enabled is set; nullptr otherwise.
std::unique_ptr<Monitor> attach_from_params(flesh::Simulation& sim);

}  // namespace tapestry::monitor
