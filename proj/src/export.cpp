#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <string>

#include "json.hpp"

#include "teamlens/error.hpp"
#include "teamlens/ingestion.hpp"
#include "teamlens/json_text.hpp"

namespace teamlens {

namespace {

using ordered_json = nlohmann::ordered_json;

std::string skill_name(const TeamGraph& g, std::size_t k) {
  return g.skill_names && k < g.skill_names->size() ? (*g.skill_names)[k] : "skill" + std::to_string(k);
}

ordered_json graph_json(const TeamGraph& g, const Eigen::VectorXd& node_influence, const Eigen::MatrixXd& attr,
                        const Eigen::MatrixXd& edge_influence) {
  ordered_json members = ordered_json::array();
  for (std::size_t i = 0; i < g.size(); ++i) {
    ordered_json skills = ordered_json::object();
    ordered_json skill_influence = ordered_json::object();
    for (Eigen::Index k = 0; k < g.L.cols(); ++k) {
      const auto name = skill_name(g, static_cast<std::size_t>(k));
      skills[name] = round_significant(g.L(i, k));
      skill_influence[name] = round_significant(attr(i, k));
    }
    members.push_back({{"id", g.ids[i]},
                       {"name", g.names[i]},
                       {"node_influence", round_significant(node_influence(i))},
                       {"skills", std::move(skills)},
                       {"skill_influence", std::move(skill_influence)}});
  }
  ordered_json edges = ordered_json::array();
  for (Eigen::Index i = 0; i < g.W.rows(); ++i) {
    for (Eigen::Index j = i + 1; j < g.W.cols(); ++j) {
      if (g.W(i, j) <= 0.0) continue;
      edges.push_back({{"src", g.ids[i]},
                       {"dst", g.ids[j]},
                       {"weight", round_significant(g.W(i, j))},
                       {"influence", round_significant(edge_influence(i, j))}});
    }
  }
  return {{"members", std::move(members)}, {"edges", std::move(edges)}};
}

ordered_json edge_list(const std::vector<RankedEdge>& edges, const TeamGraph& g) {
  ordered_json out = ordered_json::array();
  for (const auto& e : edges) {
    out.push_back({{"src", g.ids[e.i]},
                   {"dst", g.ids[e.j]},
                   {"weight", round_significant(e.weight)},
                   {"influence", round_significant(e.influence)}});
  }
  return out;
}

ordered_json node_list(const std::vector<RankedNode>& nodes, const TeamGraph& g) {
  ordered_json out = ordered_json::array();
  for (const auto& n : nodes) out.push_back({{"id", g.ids[n.index]}, {"influence", round_significant(n.influence)}});
  return out;
}

std::string to_json(const InfluenceReport& r) {
  const TeamGraph& focus = r.scenario() == Scenario::Expansion ? r.after : r.before;
  ordered_json skills = ordered_json::array();
  for (const auto& s : r.highlights.skills) {
    skills.push_back({{"name", skill_name(focus, s.skill)}, {"influence", round_significant(s.influence)}});
  }
  const auto pivot_id = [](const TeamGraph& g, std::optional<std::size_t> pos) {
    return pos ? ordered_json(g.ids[*pos]) : ordered_json(nullptr);
  };

  ordered_json doc = {
      {"kernel", round_significant(r.kernel_value)},
      {"scenario", std::string(scenario_name(r.scenario()))},
      {"params", {{"c", r.params_echo.c}, {"tol", r.params_echo.tol}, {"max_iter", r.params_echo.max_iter}}},
      {"pivot", {{"before", pivot_id(r.before, r.context.pivot_before)},
                 {"after", pivot_id(r.after, r.context.pivot_after)}}},
      {"graphs",
       {{"before", graph_json(r.before, r.node_influence_G, r.attr_influence_G, r.edge_influence_G)},
        {"after", graph_json(r.after, r.node_influence_Gp, r.attr_influence_Gp, r.edge_influence_Gp)}}},
      {"highlights",
       {{"edges", edge_list(r.highlights.edges, focus)},
        {"members", node_list(r.highlights.members, focus)},
        {"skills", std::move(skills)}}},
      {"top_edges", {{"before", edge_list(r.top_edges_G, r.before)}, {"after", edge_list(r.top_edges_Gp, r.after)}}},
  };
  return json_text(doc);
}

std::string dot_quote(const std::string& s) {
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"' || ch == '\\') out.push_back('\\');
    out.push_back(ch);
  }
  out.push_back('"');
  return out;
}

std::string format_penwidth(double w) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", w);
  std::string s = buf;
  while (s.size() > 1 && s.back() == '0' && s[s.size() - 2] != '.') s.pop_back();
  return s;
}

std::string format_3g(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

void dot_graph(std::string& out, const char* label, const TeamGraph& g, const Eigen::MatrixXd& influence) {
  double max_positive = 0.0;
  for (Eigen::Index i = 0; i < g.W.rows(); ++i) {
    for (Eigen::Index j = i + 1; j < g.W.cols(); ++j) {
      if (g.W(i, j) > 0.0) max_positive = std::max(max_positive, influence(i, j));
    }
  }
  out += "graph " + std::string(label) + " {\n";
  for (std::size_t i = 0; i < g.size(); ++i) {
    out += "  " + dot_quote(g.ids[i]) + " [label=" + dot_quote(g.names[i]) + "];\n";
  }
  for (Eigen::Index i = 0; i < g.W.rows(); ++i) {
    for (Eigen::Index j = i + 1; j < g.W.cols(); ++j) {
      if (g.W(i, j) <= 0.0) continue;
      const double score = influence(i, j);
      const double width = max_positive > 0.0 ? 1.0 + 9.0 * std::max(score, 0.0) / max_positive : 1.0;
      out += "  " + dot_quote(g.ids[i]) + " -- " + dot_quote(g.ids[j]) + " [penwidth=" + format_penwidth(width) +
             ", label=\"" + format_3g(score) + "\"];\n";
    }
  }
  out += "}\n";
}

std::string to_dot(const InfluenceReport& r) {
  std::string out;
  dot_graph(out, "before", r.before, r.edge_influence_G);
  dot_graph(out, "after", r.after, r.edge_influence_Gp);
  return out;
}

}  // namespace

std::optional<ExportFormat> parse_export_format(std::string_view text) noexcept {
  if (text == "json") return ExportFormat::Json;
  if (text == "dot") return ExportFormat::Dot;
  return std::nullopt;
}

double round_significant(double value, int digits) {
  if (value == 0.0 || !std::isfinite(value)) return value;
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", digits, value);
  return std::strtod(buf, nullptr);
}

std::string export_explanation(const InfluenceReport& report, ExportFormat format) {
  switch (format) {
    case ExportFormat::Json: return to_json(report);
    case ExportFormat::Dot: return to_dot(report);
  }
  throw Error(ErrorCode::UnsupportedFormat, "unsupported export format");
}

}  // namespace teamlens
