#pragma once

#include <chrono>
#include <filesystem>
#include <map>
#include <memory>
#include <shared_mutex>
#include <string>
#include <vector>

#include "teamlens/error.hpp"
#include "teamlens/ingestion.hpp"
#include "teamlens/network.hpp"

namespace httplib {
class Server;
}

namespace teamlens {

/// Immutable networks keyed by a client-chosen id. Readers get a snapshot
/// pointer and keep it for the whole request, so an overwrite never changes a
/// network underneath an in-flight computation.
class NetworkRegistry {
 public:
  struct Entry {
    std::shared_ptr<const AttributedNetwork> network;
    std::vector<Diagnostic> diagnostics;
    std::chrono::system_clock::time_point created;
  };

  /// Throws Conflict if `id` exists and `overwrite` is false.
  std::shared_ptr<const Entry> put(const std::string& id, LoadedNetwork loaded, bool overwrite);
  /// Throws UnknownNetwork.
  std::shared_ptr<const Entry> get(const std::string& id) const;
  std::vector<std::string> ids() const;

 private:
  mutable std::shared_mutex mutex_;
  std::map<std::string, std::shared_ptr<const Entry>> entries_;
};

struct HttpResponse {
  int status = 200;
  std::string content_type = "application/json";
  std::string body;
};

using QueryParams = std::multimap<std::string, std::string>;

/// HTTP front end. Every endpoint is also callable directly so the routing can
/// be exercised without sockets.
class Service {
 public:
  Service();
  ~Service();
  Service(const Service&) = delete;
  Service& operator=(const Service&) = delete;

  NetworkRegistry& registry() noexcept { return registry_; }

  HttpResponse health() const;
  /// `body` is JSON {"nodes_csv": ..., "edges_csv": ...}.
  HttpResponse put_network(const std::string& id, const std::string& body, bool overwrite);
  HttpResponse put_network_csv(const std::string& id, const std::string& nodes_csv, const std::string& edges_csv,
                               bool overwrite);
  HttpResponse get_network(const std::string& id) const;
  HttpResponse post_recommendation(const std::string& id, const std::string& body) const;
  HttpResponse get_explanation(const std::string& id, const QueryParams& query) const;

  /// Registers every <name>.nodes.csv / <name>.edges.csv pair under <name>.
  std::size_t load_directory(const std::filesystem::path& dir);

  /// Binds (throws PortInUse on failure) and serves until stop(). Port 0 picks
  /// a free port; bound_port() reports it once bind succeeded.
  void listen(const std::string& host, int port);
  int bind(const std::string& host, int port);
  void serve_bound();
  void stop();
  int bound_port() const noexcept { return bound_port_; }

  static HttpResponse error_response(const Error& error);

 private:
  NetworkRegistry registry_;
  std::unique_ptr<httplib::Server> server_;
  int bound_port_ = 0;
};

/// HTTP status used for an error code.
int http_status(ErrorCode code) noexcept;

}  // namespace teamlens
