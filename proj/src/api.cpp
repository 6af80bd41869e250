#include "teamlens/api.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdlib>

#include "teamlens/error.hpp"

namespace teamlens::api {

namespace {

using ordered_json = nlohmann::ordered_json;

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t");
  if (first == std::string::npos) return {};
  return s.substr(first, s.find_last_not_of(" \t") - first + 1);
}

double parse_double(const std::string& text, const char* what) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size() || text.empty()) {
    throw Error(ErrorCode::ValidationError, std::string("invalid ") + what + " '" + text + "'");
  }
  return v;
}

std::string shortest(double v) {
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

void check_team_size(std::size_t m) {
  if (m > kMaxTeamSize) {
    throw Error(ErrorCode::ValidationError, "teams are limited to " + std::to_string(kMaxTeamSize) + " members");
  }
}

ordered_json params_json(const KernelParams& p) {
  return {{"c", p.c}, {"tol", p.tol}, {"max_iter", p.max_iter}};
}

std::string requirement_text(const AttributedNetwork& net, const Eigen::VectorXd& requirement) {
  std::string out;
  for (Eigen::Index k = 0; k < requirement.size(); ++k) {
    if (requirement(k) == 0.0) continue;
    if (!out.empty()) out += ",";
    out += net.skill_names()[k] + "=" + shortest(requirement(k));
  }
  return out;
}

}  // namespace

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto end = text.find(',', pos);
    if (end == std::string::npos) end = text.size();
    auto piece = trim(text.substr(pos, end - pos));
    if (!piece.empty()) out.push_back(std::move(piece));
    pos = end + 1;
  }
  return out;
}

std::vector<std::pair<std::string, double>> parse_requirement(const std::string& text) {
  std::vector<std::pair<std::string, double>> out;
  for (const auto& item : split_list(text)) {
    const auto eq = item.rfind('=');
    if (eq == std::string::npos || eq == 0) {
      throw Error(ErrorCode::ValidationError, "requirement entries look like skill=weight, got '" + item + "'");
    }
    out.emplace_back(trim(item.substr(0, eq)), parse_double(trim(item.substr(eq + 1)), "requirement weight"));
  }
  return out;
}

double default_decay() {
  if (const char* env = std::getenv("TEAMLENS_DEFAULT_C"); env && *env) {
    return parse_double(env, "TEAMLENS_DEFAULT_C");
  }
  return kDefaultDecay;
}

NodeIndex resolve_node(const AttributedNetwork& net, const std::string& id, const char* role) {
  const NodeIndex i = net.find(id);
  if (i < 0) throw Error(ErrorCode::ValidationError, std::string("unknown ") + role + " id '" + id + "'");
  return i;
}

std::vector<NodeIndex> resolve_team(const AttributedNetwork& net, const std::vector<std::string>& ids) {
  check_team_size(ids.size());
  std::vector<NodeIndex> out;
  out.reserve(ids.size());
  for (const auto& id : ids) out.push_back(resolve_node(net, id, "team member"));
  return out;
}

Eigen::VectorXd requirement_vector(const AttributedNetwork& net,
                                   const std::vector<std::pair<std::string, double>>& requirement) {
  Eigen::VectorXd v = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(net.skill_count()));
  for (const auto& [name, weight] : requirement) {
    const auto& names = net.skill_names();
    const auto it = std::find(names.begin(), names.end(), name);
    if (it == names.end()) throw Error(ErrorCode::ValidationError, "unknown skill '" + name + "'");
    v(std::distance(names.begin(), it)) += weight;
  }
  return v;
}

RecommendationResult run(const AttributedNetwork& net, const RecommendRequest& request) {
  const auto team = resolve_team(net, request.team);
  switch (request.scenario) {
    case Scenario::Replacement: {
      if (!request.departing) throw Error(ErrorCode::ValidationError, "replacement needs a departing member");
      const NodeIndex departing = resolve_node(net, *request.departing, "departing");
      return recommend_replacement(net, team, departing, request.k, request.params, request.require_link);
    }
    case Scenario::Expansion: {
      if (!request.requirement) throw Error(ErrorCode::ValidationError, "expansion needs required skills");
      if (team.empty()) throw Error(ErrorCode::AllZeroTeam, "expansion needs a non-empty team");
      return recommend_expansion(net, team, requirement_vector(net, *request.requirement), request.k,
                                 request.params, request.require_link);
    }
    case Scenario::Shrinkage:
      return recommend_shrinkage(net, team, request.k, request.params);
    case Scenario::RawPair:
      break;
  }
  throw Error(ErrorCode::ValidationError, "raw-pair is not a recommendation scenario");
}

InfluenceReport run(const AttributedNetwork& net, const ExplainRequest& request) {
  const auto team = resolve_team(net, request.team);
  const auto need_candidate = [&]() {
    if (!request.candidate) throw Error(ErrorCode::ValidationError, "a candidate is required");
    return resolve_node(net, *request.candidate, "candidate");
  };
  switch (request.scenario) {
    case Scenario::Replacement: {
      if (!request.pivot) throw Error(ErrorCode::ValidationError, "replacement needs a departing member");
      const NodeIndex departing = resolve_node(net, *request.pivot, "departing");
      return explain_replacement(net, team, departing, need_candidate(), request.params, request.top_t);
    }
    case Scenario::Expansion: {
      if (!request.requirement) throw Error(ErrorCode::ValidationError, "expansion needs required skills");
      if (team.empty()) throw Error(ErrorCode::AllZeroTeam, "expansion needs a non-empty team");
      return explain_expansion(net, team, requirement_vector(net, *request.requirement), need_candidate(),
                               request.params, request.top_t);
    }
    case Scenario::Shrinkage: {
      const auto& who = request.candidate ? request.candidate : request.pivot;
      if (!who) throw Error(ErrorCode::ValidationError, "shrinkage needs the member to dismiss");
      return explain_shrinkage(net, team, resolve_node(net, *who, "dismissal"), request.params, request.top_t);
    }
    case Scenario::RawPair: {
      const auto other = resolve_team(net, request.other);
      return explain_pair(net, team, other, request.params, request.top_t);
    }
  }
  throw Error(ErrorCode::ValidationError, "unknown scenario");
}

std::string render(const InfluenceReport& report, ExportFormat format) { return export_explanation(report, format); }

std::string url_encode(const std::string& text) {
  static constexpr char kHex[] = "0123456789ABCDEF";
  std::string out;
  for (unsigned char ch : text) {
    if (std::isalnum(ch) || ch == '-' || ch == '_' || ch == '.' || ch == '~') {
      out.push_back(static_cast<char>(ch));
    } else {
      out.push_back('%');
      out.push_back(kHex[ch >> 4]);
      out.push_back(kHex[ch & 15]);
    }
  }
  return out;
}

std::string explanation_query(const RecommendationResult& result, const AttributedNetwork& net,
                              const std::string& candidate_id) {
  std::string team;
  for (NodeIndex i : result.team) {
    if (!team.empty()) team += ",";
    team += net.node_ids()[i];
  }
  std::string q = "scenario=" + std::string(scenario_name(result.scenario)) + "&team=" + url_encode(team);
  if (result.pivot) q += "&pivot=" + url_encode(net.node_ids()[*result.pivot]);
  q += "&candidate=" + url_encode(candidate_id);
  if (result.scenario == Scenario::Expansion) q += "&require=" + url_encode(requirement_text(net, result.requirement));
  q += "&c=" + shortest(result.params_echo.c);
  q += "&tol=" + shortest(result.params_echo.tol);
  q += "&max_iter=" + std::to_string(result.params_echo.max_iter);
  return q;
}

ordered_json to_json(const RecommendationResult& result, const AttributedNetwork& net,
                     const std::optional<std::string>& network_id) {
  ordered_json team = ordered_json::array();
  for (NodeIndex i : result.team) team.push_back(net.node_ids()[i]);
  ordered_json requirement = nullptr;
  if (result.scenario == Scenario::Expansion) {
    requirement = ordered_json::object();
    for (Eigen::Index k = 0; k < result.requirement.size(); ++k) {
      if (result.requirement(k) != 0.0) requirement[net.skill_names()[k]] = round_significant(result.requirement(k));
    }
  }
  ordered_json ranking = ordered_json::array();
  for (std::size_t r = 0; r < result.ranking.size(); ++r) {
    const auto& c = result.ranking[r];
    ordered_json entry = {{"rank", r + 1},
                          {"id", c.id},
                          {"name", net.display_names()[c.node]},
                          {"score", round_significant(c.score)}};
    if (network_id) {
      entry["explanation_url"] =
          "/networks/" + url_encode(*network_id) + "/explanations?" + explanation_query(result, net, c.id);
    }
    ranking.push_back(std::move(entry));
  }
  return {{"scenario", std::string(scenario_name(result.scenario))},
          {"team", std::move(team)},
          {"pivot", result.pivot ? ordered_json(net.node_ids()[*result.pivot]) : ordered_json(nullptr)},
          {"requirement", std::move(requirement)},
          {"params", params_json(result.params_echo)},
          {"ranking", std::move(ranking)}};
}

RecommendRequest parse_recommend_body(const nlohmann::json& body) {
  try {
    if (!body.is_object()) throw Error(ErrorCode::ValidationError, "request body must be a JSON object");
    RecommendRequest req;
    const auto scenario = parse_scenario(body.at("scenario").get<std::string>());
    if (!scenario || *scenario == Scenario::RawPair) {
      throw Error(ErrorCode::ValidationError, "scenario must be replacement, expansion or shrinkage");
    }
    req.scenario = *scenario;
    req.team = body.at("team").get<std::vector<std::string>>();
    if (body.contains("departing") && !body["departing"].is_null()) req.departing = body["departing"].get<std::string>();
    if (body.contains("required_skills") && !body["required_skills"].is_null()) {
      std::vector<std::pair<std::string, double>> need;
      for (const auto& [name, weight] : body["required_skills"].items()) need.emplace_back(name, weight.get<double>());
      req.requirement = std::move(need);
    }
    if (body.contains("k")) {
      const auto k = body["k"].get<long long>();
      if (k < 1) throw Error(ErrorCode::ValidationError, "k must be at least 1");
      req.k = static_cast<std::size_t>(k);
    }
    if (body.contains("require_link")) req.require_link = body["require_link"].get<bool>();
    req.params.c = default_decay();
    if (body.contains("params")) {
      const auto& p = body["params"];
      if (p.contains("c")) req.params.c = p["c"].get<double>();
      if (p.contains("tol")) req.params.tol = p["tol"].get<double>();
      if (p.contains("max_iter")) req.params.max_iter = p["max_iter"].get<int>();
    }
    if (body.contains("c")) req.params.c = body["c"].get<double>();
    return req;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ValidationError, std::string("malformed request body: ") + e.what());
  }
}

ordered_json diagnostics_json(const std::vector<Diagnostic>& diagnostics) {
  ordered_json out = ordered_json::array();
  for (const auto& d : diagnostics) {
    out.push_back({{"kind", std::string(diagnostic_name(d.kind))},
                   {"line", d.line ? ordered_json(d.line) : ordered_json(nullptr)},
                   {"message", d.message}});
  }
  return out;
}

}  // namespace teamlens::api
