#include "teamlens/cli.hpp"

#include <atomic>
#include <chrono>
#include <csignal>
#include <fstream>
#include <iostream>
#include <optional>
#include <thread>

#include "CLI11.hpp"
#include "json.hpp"

#include "teamlens/api.hpp"
#include "teamlens/json_text.hpp"
#include "teamlens/error.hpp"
#include "teamlens/ingestion.hpp"
#include "teamlens/service.hpp"

namespace teamlens::cli {

namespace {

struct NetworkFlags {
  std::string nodes;
  std::string edges;
  std::string scenario;
  std::string team;
  std::optional<std::string> departing;
  std::optional<std::string> require;
  std::optional<double> c;
  double tol = KernelParams{}.tol;
  int max_iter = KernelParams{}.max_iter;
};

void add_network_flags(CLI::App& cmd, NetworkFlags& f) {
  cmd.add_option("--nodes", f.nodes, "nodes CSV (id,name,<skills...>)")->required();
  cmd.add_option("--edges", f.edges, "edges CSV (src,dst,weight)")->required();
  cmd.add_option("--team", f.team, "comma-separated member ids")->required();
  cmd.add_option("--departing", f.departing, "member leaving the team (replace)");
  cmd.add_option("--require", f.require, "required skills for expand, skill=w,...");
  cmd.add_option("--c", f.c, "decay factor in (0, 1); default $TEAMLENS_DEFAULT_C or 0.1");
  cmd.add_option("--tol", f.tol, "fixed-point tolerance");
  cmd.add_option("--max-iter", f.max_iter, "fixed-point iteration cap");
}

Scenario scenario_from(const std::string& text, bool allow_raw) {
  const auto s = parse_scenario(text);
  if (!s || (!allow_raw && *s == Scenario::RawPair)) {
    throw Error(ErrorCode::ValidationError, "unknown scenario '" + text + "'");
  }
  return *s;
}

KernelParams params_from(const NetworkFlags& f) {
  KernelParams p;
  p.c = f.c ? *f.c : api::default_decay();
  p.tol = f.tol;
  p.max_iter = f.max_iter;
  return p;
}

AttributedNetwork load(const NetworkFlags& f, std::ostream& err) {
  auto loaded = load_network_files(f.nodes, f.edges, "cli");
  for (const auto& d : loaded.diagnostics) {
    err << "warning: " << diagnostic_name(d.kind);
    if (d.line) err << " (line " << d.line << ")";
    err << ": " << d.message << "\n";
  }
  return std::move(loaded.network);
}

std::optional<std::vector<std::pair<std::string, double>>> requirement_from(const NetworkFlags& f) {
  if (!f.require) return std::nullopt;
  return api::parse_requirement(*f.require);
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path);
  out << text;
  if (!out) throw Error(ErrorCode::IoError, "failed writing " + path);
}

volatile std::sig_atomic_t g_stop_requested = 0;

extern "C" void on_signal(int) { g_stop_requested = 1; }

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Team recommendation with influence explanations", "teamlens"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all");

  NetworkFlags rec;
  std::size_t k = 10;
  bool require_link = true;
  auto* recommend = app.add_subcommand("recommend", "rank candidates for a team change");
  add_network_flags(*recommend, rec);
  recommend->add_option("--scenario", rec.scenario, "replace | expand | shrink")->required();
  recommend->add_option("--k", k, "number of candidates to return")->check(CLI::PositiveNumber);
  recommend->add_option("--require-link", require_link, "only consider candidates linked to the team");

  NetworkFlags exp;
  std::optional<std::string> candidate;
  std::optional<std::string> other;
  std::string format = "json";
  std::size_t top_t = 5;
  auto* explain = app.add_subcommand("explain", "influence breakdown for one candidate");
  add_network_flags(*explain, exp);
  explain->add_option("--scenario", exp.scenario, "replace | expand | shrink | raw")->required();
  explain->add_option("--candidate", candidate, "candidate id (member to dismiss for shrink)");
  explain->add_option("--other", other, "second team for raw, comma-separated (default: the team itself)");
  explain->add_option("--format", format, "json | dot")->check(CLI::IsMember({"json", "dot"}));
  explain->add_option("--top", top_t, "highlight list length");

  int port = 8080;
  std::string host = "127.0.0.1";
  std::optional<std::string> data_dir;
  auto* serve = app.add_subcommand("serve", "run the HTTP service");
  serve->add_option("--port", port, "TCP port (0 picks a free one)");
  serve->add_option("--host", host, "bind address");
  serve->add_option("--data-dir", data_dir, "preload <id>.nodes.csv / <id>.edges.csv pairs");

  std::uint64_t seed = 0;
  std::size_t n = 0, d = 0;
  std::optional<NodeIndex> clone_of;
  std::string prefix;
  SynthParams synth_params;
  auto* synth = app.add_subcommand("synth", "write a synthetic network");
  synth->add_option("--seed", seed)->required();
  synth->add_option("--n", n, "node count")->required()->check(CLI::PositiveNumber);
  synth->add_option("--d", d, "skill count")->required()->check(CLI::PositiveNumber);
  synth->add_option("--plant-clone-of", clone_of, "node index copied into node n-1");
  synth->add_option("--edge-probability", synth_params.edge_probability)->check(CLI::Range(0.0, 1.0));
  synth->add_option("--out-prefix", prefix, "writes <prefix>.nodes.csv and <prefix>.edges.csv")->required();

  std::vector<std::string> argv(args.rbegin(), args.rend());
  try {
    app.parse(argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? kOk : kValidation;
  }

  try {
    if (recommend->parsed()) {
      const auto net = load(rec, err);
      api::RecommendRequest req;
      req.scenario = scenario_from(rec.scenario, false);
      req.team = api::split_list(rec.team);
      req.departing = rec.departing;
      req.requirement = requirement_from(rec);
      req.k = k;
      req.params = params_from(rec);
      req.require_link = require_link;
      if (req.scenario == Scenario::Replacement && !req.departing) {
        err << "error: --scenario replace needs --departing\n" << recommend->help();
        return kValidation;
      }
      if (req.scenario == Scenario::Expansion && !req.requirement) {
        err << "error: --scenario expand needs --require\n" << recommend->help();
        return kValidation;
      }
      out << json_text(api::to_json(api::run(net, req), net));
      return kOk;
    }

    if (explain->parsed()) {
      const auto net = load(exp, err);
      api::ExplainRequest req;
      req.scenario = scenario_from(exp.scenario, true);
      req.team = api::split_list(exp.team);
      req.pivot = exp.departing;
      req.candidate = candidate;
      req.requirement = requirement_from(exp);
      if (other) req.other = api::split_list(*other);
      req.params = params_from(exp);
      req.top_t = top_t;
      req.format = *parse_export_format(format);
      out << api::render(api::run(net, req), req.format);
      return kOk;
    }

    if (serve->parsed()) {
      Service service;
      if (data_dir) err << "loaded " << service.load_directory(*data_dir) << " network(s) from " << *data_dir << "\n";
      const int bound = service.bind(host, port);
      err << "listening on http://" << host << ":" << bound << "\n";
      g_stop_requested = 0;
      const auto previous_int = std::signal(SIGINT, on_signal);
      const auto previous_term = std::signal(SIGTERM, on_signal);
      std::atomic<bool> finished{false};
      std::thread watcher([&] {
        while (!finished) {
          if (g_stop_requested) {
            service.stop();
            break;
          }
          std::this_thread::sleep_for(std::chrono::milliseconds(50));
        }
      });
      service.serve_bound();
      finished = true;
      watcher.join();
      std::signal(SIGINT, previous_int);
      std::signal(SIGTERM, previous_term);
      return kOk;
    }

    if (synth->parsed()) {
      SynthParams params = synth_params;
      params.plant_clone_of = clone_of;
      const auto net = synth_network(seed, n, d, params);
      const auto [nodes_csv, edges_csv] = write_network_csv(net);
      write_file(prefix + ".nodes.csv", nodes_csv);
      write_file(prefix + ".edges.csv", edges_csv);
      nlohmann::ordered_json summary = {{"nodes", prefix + ".nodes.csv"},
                                        {"edges", prefix + ".edges.csv"},
                                        {"n", net.size()},
                                        {"d", net.skill_count()},
                                        {"edge_count", net.edge_count()}};
      if (clone_of) summary["clone"] = net.node_ids()[net.size() - 1];
      out << json_text(summary);
      return kOk;
    }
  } catch (const Error& e) {
    err << "error: " << code_name(e.code());
    if (e.line()) err << " (line " << *e.line() << ")";
    err << ": " << e.what() << "\n";
    return is_numerical(e.code()) ? kNumerical : kValidation;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kValidation;
  }
  return kValidation;
}

}  // namespace teamlens::cli
