#include "teamlens/service.hpp"

#include <ctime>
#include <mutex>

#include "httplib.h"
#include "json.hpp"

#include "teamlens/api.hpp"
#include "teamlens/json_text.hpp"

namespace teamlens {

namespace {

using ordered_json = nlohmann::ordered_json;

HttpResponse json_response(int status, const ordered_json& body) {
  return {status, "application/json", json_text(body)};
}

std::string iso8601(std::chrono::system_clock::time_point t) {
  const std::time_t tt = std::chrono::system_clock::to_time_t(t);
  std::tm tm{};
  gmtime_r(&tt, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::optional<std::string> query_value(const QueryParams& q, const std::string& key) {
  auto it = q.find(key);
  if (it == q.end()) return std::nullopt;
  return it->second;
}

double query_double(const QueryParams& q, const std::string& key, double fallback) {
  const auto v = query_value(q, key);
  if (!v) return fallback;
  try {
    std::size_t used = 0;
    const double out = std::stod(*v, &used);
    if (used != v->size()) throw std::invalid_argument(key);
    return out;
  } catch (const std::exception&) {
    throw Error(ErrorCode::ValidationError, "query parameter '" + key + "' is not a number");
  }
}

template <typename Fn>
HttpResponse guarded(Fn&& fn) {
  try {
    return fn();
  } catch (const Error& e) {
    return Service::error_response(e);
  } catch (const std::exception& e) {
    return Service::error_response(Error(ErrorCode::ValidationError, e.what()));
  }
}

void write(httplib::Response& res, const HttpResponse& out) {
  res.status = out.status;
  res.set_content(out.body, out.content_type);
}

QueryParams to_query(const httplib::Params& params) { return QueryParams(params.begin(), params.end()); }

}  // namespace

int http_status(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::UnknownNetwork: return 404;
    case ErrorCode::Conflict: return 409;
    case ErrorCode::NotConverged:
    case ErrorCode::ConvergenceRisk: return 422;
    case ErrorCode::IoError:
    case ErrorCode::PortInUse: return 500;
    default: return 400;
  }
}

std::shared_ptr<const NetworkRegistry::Entry> NetworkRegistry::put(const std::string& id, LoadedNetwork loaded,
                                                                   bool overwrite) {
  auto entry = std::make_shared<Entry>();
  entry->network = std::make_shared<const AttributedNetwork>(std::move(loaded.network));
  entry->diagnostics = std::move(loaded.diagnostics);
  entry->created = std::chrono::system_clock::now();
  std::unique_lock lock(mutex_);
  auto [it, inserted] = entries_.try_emplace(id, entry);
  if (!inserted) {
    if (!overwrite) throw Error(ErrorCode::Conflict, "network '" + id + "' already exists");
    it->second = entry;
  }
  return entry;
}

std::shared_ptr<const NetworkRegistry::Entry> NetworkRegistry::get(const std::string& id) const {
  std::shared_lock lock(mutex_);
  auto it = entries_.find(id);
  if (it == entries_.end()) throw Error(ErrorCode::UnknownNetwork, "no network named '" + id + "'");
  return it->second;
}

std::vector<std::string> NetworkRegistry::ids() const {
  std::shared_lock lock(mutex_);
  std::vector<std::string> out;
  for (const auto& [id, entry] : entries_) out.push_back(id);
  return out;
}

Service::Service() = default;
Service::~Service() { stop(); }

HttpResponse Service::error_response(const Error& error) {
  ordered_json detail = ordered_json::object();
  if (error.line()) detail["line"] = *error.line();
  return json_response(http_status(error.code()), {{"code", std::string(code_name(error.code()))},
                                                   {"message", error.what()},
                                                   {"detail", std::move(detail)}});
}

HttpResponse Service::health() const { return json_response(200, {{"status", "ok"}}); }

HttpResponse Service::put_network_csv(const std::string& id, const std::string& nodes_csv,
                                      const std::string& edges_csv, bool overwrite) {
  return guarded([&] {
    if (id.empty()) throw Error(ErrorCode::ValidationError, "network id must not be empty");
    auto loaded = load_network(nodes_csv, edges_csv, id);
    if (loaded.network.size() > api::kMaxNetworkNodes) {
      throw Error(ErrorCode::ValidationError,
                  "networks are limited to " + std::to_string(api::kMaxNetworkNodes) + " nodes");
    }
    bool existed = true;
    try {
      registry_.get(id);
    } catch (const Error&) {
      existed = false;
    }
    const auto entry = registry_.put(id, std::move(loaded), overwrite);
    return json_response(existed ? 200 : 201, {{"id", id},
                                               {"n", entry->network->size()},
                                               {"d", entry->network->skill_count()},
                                               {"edges", entry->network->edge_count()},
                                               {"diagnostics", api::diagnostics_json(entry->diagnostics)}});
  });
}

HttpResponse Service::put_network(const std::string& id, const std::string& body, bool overwrite) {
  return guarded([&] {
    nlohmann::json doc;
    try {
      doc = nlohmann::json::parse(body);
      return put_network_csv(id, doc.at("nodes_csv").get<std::string>(), doc.at("edges_csv").get<std::string>(),
                             overwrite);
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::ValidationError,
                  std::string("body must be JSON with nodes_csv and edges_csv strings: ") + e.what());
    }
  });
}

HttpResponse Service::get_network(const std::string& id) const {
  return guarded([&] {
    const auto entry = registry_.get(id);
    const auto& net = *entry->network;
    return json_response(200, {{"id", id},
                               {"n", net.size()},
                               {"d", net.skill_count()},
                               {"edges", net.edge_count()},
                               {"skill_names", net.skill_names()},
                               {"created_at", iso8601(entry->created)}});
  });
}

HttpResponse Service::post_recommendation(const std::string& id, const std::string& body) const {
  return guarded([&] {
    const auto entry = registry_.get(id);
    nlohmann::json doc;
    try {
      doc = nlohmann::json::parse(body);
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::ValidationError, std::string("request body is not JSON: ") + e.what());
    }
    const auto request = api::parse_recommend_body(doc);
    const auto result = api::run(*entry->network, request);
    return json_response(200, api::to_json(result, *entry->network, id));
  });
}

HttpResponse Service::get_explanation(const std::string& id, const QueryParams& query) const {
  return guarded([&] {
    const auto entry = registry_.get(id);
    api::ExplainRequest req;
    const auto scenario_text = query_value(query, "scenario").value_or("raw-pair");
    const auto scenario = parse_scenario(scenario_text);
    if (!scenario) throw Error(ErrorCode::ValidationError, "unknown scenario '" + scenario_text + "'");
    req.scenario = *scenario;
    const auto team = query_value(query, "team");
    if (!team) throw Error(ErrorCode::ValidationError, "query parameter 'team' is required");
    req.team = api::split_list(*team);
    req.pivot = query_value(query, "pivot");
    req.candidate = query_value(query, "candidate");
    if (const auto need = query_value(query, "require")) req.requirement = api::parse_requirement(*need);
    if (const auto other = query_value(query, "other")) req.other = api::split_list(*other);
    req.params.c = query_double(query, "c", api::default_decay());
    req.params.tol = query_double(query, "tol", req.params.tol);
    req.params.max_iter = static_cast<int>(query_double(query, "max_iter", req.params.max_iter));
    req.top_t = static_cast<std::size_t>(query_double(query, "top_t", static_cast<double>(req.top_t)));
    const auto format_text = query_value(query, "format").value_or("json");
    const auto format = parse_export_format(format_text);
    if (!format) throw Error(ErrorCode::UnsupportedFormat, "unsupported format '" + format_text + "'");
    req.format = *format;

    const auto report = api::run(*entry->network, req);
    return HttpResponse{200, req.format == ExportFormat::Dot ? "text/vnd.graphviz" : "application/json",
                        api::render(report, req.format)};
  });
}

std::size_t Service::load_directory(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) throw Error(ErrorCode::IoError, dir.string() + " is not a directory");
  std::vector<std::filesystem::path> node_files;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    const auto name = entry.path().filename().string();
    const std::string suffix = ".nodes.csv";
    if (name.size() > suffix.size() && name.ends_with(suffix)) node_files.push_back(entry.path());
  }
  std::sort(node_files.begin(), node_files.end());
  std::size_t loaded = 0;
  for (const auto& nodes : node_files) {
    const auto name = nodes.filename().string();
    const auto id = name.substr(0, name.size() - std::string(".nodes.csv").size());
    const auto edges = dir / (id + ".edges.csv");
    if (!std::filesystem::exists(edges)) continue;
    registry_.put(id, load_network_files(nodes, edges, id), true);
    ++loaded;
  }
  return loaded;
}

int Service::bind(const std::string& host, int port) {
  server_ = std::make_unique<httplib::Server>();
  auto& srv = *server_;
  // No SO_REUSEPORT: a second server on the same port must fail to bind.
  srv.set_socket_options([](socket_t sock) {
    int yes = 1;
    setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, reinterpret_cast<const void*>(&yes), sizeof yes);
  });

  srv.Get("/health", [this](const httplib::Request&, httplib::Response& res) { write(res, health()); });

  srv.Put(R"(/networks/([^/]+))", [this](const httplib::Request& req, httplib::Response& res) {
    const std::string id = req.matches[1];
    const bool overwrite = req.has_param("overwrite") && req.get_param_value("overwrite") == "true";
    if (req.is_multipart_form_data()) {
      const auto field = [&](const char* a, const char* b) -> std::optional<std::string> {
        if (req.has_file(a)) return req.get_file_value(a).content;
        if (req.has_file(b)) return req.get_file_value(b).content;
        return std::nullopt;
      };
      const auto nodes = field("nodes", "nodes_csv");
      const auto edges = field("edges", "edges_csv");
      if (!nodes || !edges) {
        write(res, error_response(Error(ErrorCode::ValidationError, "multipart body needs nodes and edges parts")));
        return;
      }
      write(res, put_network_csv(id, *nodes, *edges, overwrite));
    } else {
      write(res, put_network(id, req.body, overwrite));
    }
  });

  srv.Get(R"(/networks/([^/]+))", [this](const httplib::Request& req, httplib::Response& res) {
    write(res, get_network(req.matches[1]));
  });

  srv.Post(R"(/networks/([^/]+)/recommendations)", [this](const httplib::Request& req, httplib::Response& res) {
    write(res, post_recommendation(req.matches[1], req.body));
  });

  srv.Get(R"(/networks/([^/]+)/explanations)", [this](const httplib::Request& req, httplib::Response& res) {
    write(res, get_explanation(req.matches[1], to_query(req.params)));
  });

  if (port == 0) {
    bound_port_ = srv.bind_to_any_port(host);
    if (bound_port_ < 0) bound_port_ = 0;
  } else if (srv.bind_to_port(host, port)) {
    bound_port_ = port;
  } else {
    bound_port_ = 0;
  }
  if (bound_port_ == 0) {
    server_.reset();
    throw Error(ErrorCode::PortInUse, "cannot bind " + host + ":" + std::to_string(port));
  }
  return bound_port_;
}

void Service::serve_bound() {
  if (!server_) throw Error(ErrorCode::IoError, "server is not bound");
  server_->listen_after_bind();
}

void Service::listen(const std::string& host, int port) {
  bind(host, port);
  serve_bound();
}

void Service::stop() {
  if (server_) server_->stop();
}

}  // namespace teamlens
