#pragma once

// Request/response mapping shared by the HTTP service and the CLI, so both
// front ends go through exactly the same library calls.

#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "teamlens/influence.hpp"
#include "teamlens/ingestion.hpp"
#include "teamlens/kron_kernel.hpp"
#include "teamlens/network.hpp"
#include "teamlens/recommender.hpp"

namespace teamlens::api {

inline constexpr std::size_t kMaxNetworkNodes = 50'000;
inline constexpr std::size_t kMaxTeamSize = 64;
inline constexpr double kDefaultDecay = 0.1;

struct RecommendRequest {
  Scenario scenario = Scenario::Replacement;
  std::vector<std::string> team;
  std::optional<std::string> departing;
  std::optional<std::vector<std::pair<std::string, double>>> requirement;
  std::size_t k = 10;
  KernelParams params;
  bool require_link = true;
};

struct ExplainRequest {
  Scenario scenario = Scenario::RawPair;
  std::vector<std::string> team;
  std::optional<std::string> pivot;      // departing member (replacement)
  std::optional<std::string> candidate;  // candidate, or dismissal member for shrinkage
  std::optional<std::vector<std::pair<std::string, double>>> requirement;
  std::vector<std::string> other;        // second team for raw-pair
  KernelParams params;
  std::size_t top_t = 5;
  ExportFormat format = ExportFormat::Json;
};

/// Splits "a,b,c" (empty pieces dropped).
std::vector<std::string> split_list(const std::string& text);
/// Parses "skill=w,skill=w".
std::vector<std::pair<std::string, double>> parse_requirement(const std::string& text);
/// Decay used when none is given: $TEAMLENS_DEFAULT_C, else 0.1.
double default_decay();

/// Resolves ids to indices; unknown ids are ValidationError.
std::vector<NodeIndex> resolve_team(const AttributedNetwork& net, const std::vector<std::string>& ids);
NodeIndex resolve_node(const AttributedNetwork& net, const std::string& id, const char* role);
Eigen::VectorXd requirement_vector(const AttributedNetwork& net,
                                   const std::vector<std::pair<std::string, double>>& requirement);

RecommendationResult run(const AttributedNetwork& net, const RecommendRequest& request);
InfluenceReport run(const AttributedNetwork& net, const ExplainRequest& request);
std::string render(const InfluenceReport& report, ExportFormat format);

/// Query string (without '?') that reproduces the explanation of `candidate`.
std::string explanation_query(const RecommendationResult& result, const AttributedNetwork& net,
                              const std::string& candidate_id);

/// Serialized ranking. When `network_id` is set each entry carries an
/// explanation_url under /networks/{id}/explanations.
nlohmann::ordered_json to_json(const RecommendationResult& result, const AttributedNetwork& net,
                               const std::optional<std::string>& network_id = std::nullopt);

/// Reads a JSON recommendation body (scenario, team, departing | required_skills, k, params, require_link).
RecommendRequest parse_recommend_body(const nlohmann::json& body);

nlohmann::ordered_json diagnostics_json(const std::vector<Diagnostic>& diagnostics);

std::string url_encode(const std::string& text);

}  // namespace teamlens::api
