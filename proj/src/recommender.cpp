#include "teamlens/recommender.hpp"

#include <algorithm>
#include <exception>

#include "teamlens/error.hpp"

namespace teamlens {

namespace {

std::size_t team_position(const TeamGraph& G, NodeIndex node, const AttributedNetwork& net) {
  const auto pos = G.position_of(node);
  if (pos < 0) {
    const std::string id = (node >= 0 && static_cast<std::size_t>(node) < net.size())
                               ? net.node_ids()[node]
                               : std::to_string(node);
    throw Error(ErrorCode::NotATeamMember, "'" + id + "' is not a member of the team");
  }
  return static_cast<std::size_t>(pos);
}

void check_candidate(const AttributedNetwork& net, const TeamGraph& G, NodeIndex candidate) {
  if (candidate < 0 || static_cast<std::size_t>(candidate) >= net.size()) {
    throw Error(ErrorCode::UnknownNode, "candidate index " + std::to_string(candidate) + " out of range");
  }
  if (G.position_of(candidate) >= 0) {
    throw Error(ErrorCode::AlreadyInTeam, "'" + net.node_ids()[candidate] + "' is already in the team");
  }
}

void check_k(std::size_t k) {
  if (k < 1) throw Error(ErrorCode::ValidationError, "k must be at least 1");
}

/// Scores every candidate concurrently; results land in pool order so the
/// subsequent sort is independent of scheduling.
template <typename ScoreFn>
std::vector<RankedCandidate> score_all(const AttributedNetwork& net, const std::vector<NodeIndex>& pool,
                                       ScoreFn score) {
  std::vector<RankedCandidate> out(pool.size());
  std::exception_ptr failure;
  const auto count = static_cast<std::ptrdiff_t>(pool.size());
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t idx = 0; idx < count; ++idx) {
    try {
      out[idx] = {pool[idx], net.node_ids()[pool[idx]], score(pool[idx])};
    } catch (...) {
#pragma omp critical(teamlens_recommender_failure)
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
  return out;
}

Eigen::VectorXd normalized_requirement(const AttributedNetwork& net, const Eigen::VectorXd& required) {
  if (static_cast<std::size_t>(required.size()) != net.skill_count()) {
    throw Error(ErrorCode::SkillDimensionMismatch, "requirement has " + std::to_string(required.size()) +
                                                       " entries, network has " +
                                                       std::to_string(net.skill_count()) + " skills");
  }
  if (!required.allFinite() || (required.array() < 0.0).any()) {
    throw Error(ErrorCode::ValidationError, "skill requirement must be finite and nonnegative");
  }
  const double total = required.sum();
  if (!(total > 0.0)) throw Error(ErrorCode::AllZeroRequirement, "skill requirement is all zero");
  return required / total;
}

void check_team_nonempty(std::span<const NodeIndex> team) {
  if (team.empty()) throw Error(ErrorCode::AllZeroTeam, "expansion needs a non-empty team");
}

}  // namespace

void finalize_ranking(std::vector<RankedCandidate>& ranking, std::size_t k) {
  std::sort(ranking.begin(), ranking.end(), [](const RankedCandidate& a, const RankedCandidate& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.node < b.node;
  });
  if (ranking.size() > k) ranking.resize(k);
}

double score_replacement(const AttributedNetwork& net, std::span<const NodeIndex> team, NodeIndex departing,
                         NodeIndex candidate, const KernelParams& params) {
  const TeamGraph before = induced_subgraph(net, team);
  const std::size_t pos = team_position(before, departing, net);
  check_candidate(net, before, candidate);
  const TeamGraph after = replace_member(net, before, pos, candidate);
  return kernel(before, after, params);
}

RecommendationResult recommend_replacement(const AttributedNetwork& net, std::span<const NodeIndex> team,
                                           NodeIndex departing, std::size_t k, const KernelParams& params,
                                           bool require_link) {
  check_k(k);
  validate(params);
  const TeamGraph before = induced_subgraph(net, team);
  const std::size_t pos = team_position(before, departing, net);
  const NodeIndex excluded[] = {departing};
  const auto pool = candidate_pool(net, before, excluded, require_link);
  if (pool.empty()) throw Error(ErrorCode::EmptyCandidatePool, "no replacement candidates");

  RecommendationResult result;
  result.scenario = Scenario::Replacement;
  result.team.assign(team.begin(), team.end());
  result.pivot = departing;
  result.params_echo = params;
  result.ranking = score_all(net, pool, [&](NodeIndex candidate) {
    return kernel(before, replace_member(net, before, pos, candidate), params);
  });
  finalize_ranking(result.ranking, k);
  return result;
}

TeamGraph expansion_target(const AttributedNetwork& net, std::span<const NodeIndex> team,
                           const Eigen::VectorXd& required_skills) {
  check_team_nonempty(team);
  const Eigen::VectorXd need = normalized_requirement(net, required_skills);
  const TeamGraph G = induced_subgraph(net, team);
  double total = 0.0;
  std::size_t count = 0;
  for (Eigen::Index i = 0; i < G.W.rows(); ++i) {
    for (Eigen::Index j = i + 1; j < G.W.cols(); ++j) {
      if (G.W(i, j) > 0.0) {
        total += G.W(i, j);
        ++count;
      }
    }
  }
  const double link = count ? total / static_cast<double>(count) : 1.0;
  return append_virtual_member(G, need, link, "__target__", "Required profile");
}

RecommendationResult recommend_expansion(const AttributedNetwork& net, std::span<const NodeIndex> team,
                                         const Eigen::VectorXd& required_skills, std::size_t k,
                                         const KernelParams& params, bool require_link) {
  check_k(k);
  validate(params);
  const TeamGraph target = expansion_target(net, team, required_skills);
  const TeamGraph G = induced_subgraph(net, team);
  const auto pool = candidate_pool(net, G, {}, require_link);
  if (pool.empty()) throw Error(ErrorCode::EmptyCandidatePool, "no expansion candidates");

  RecommendationResult result;
  result.scenario = Scenario::Expansion;
  result.team.assign(team.begin(), team.end());
  result.requirement = normalized_requirement(net, required_skills);
  result.params_echo = params;
  result.ranking = score_all(net, pool, [&](NodeIndex candidate) {
    return kernel(target, append_member(net, G, candidate), params);
  });
  finalize_ranking(result.ranking, k);
  return result;
}

RecommendationResult recommend_shrinkage(const AttributedNetwork& net, std::span<const NodeIndex> team,
                                         std::size_t k, const KernelParams& params) {
  check_k(k);
  validate(params);
  if (team.size() < 2) throw Error(ErrorCode::TeamTooSmall, "shrinkage needs at least two members");
  const TeamGraph G = induced_subgraph(net, team);
  const std::vector<NodeIndex> members(team.begin(), team.end());

  RecommendationResult result;
  result.scenario = Scenario::Shrinkage;
  result.team = members;
  result.params_echo = params;
  result.ranking = score_all(net, members, [&](NodeIndex member) {
    return kernel(G, remove_member(G, static_cast<std::size_t>(G.position_of(member))), params);
  });
  finalize_ranking(result.ranking, k);
  return result;
}

InfluenceReport explain_replacement(const AttributedNetwork& net, std::span<const NodeIndex> team,
                                    NodeIndex departing, NodeIndex candidate, const KernelParams& params,
                                    std::size_t top_t) {
  const TeamGraph before = induced_subgraph(net, team);
  const std::size_t pos = team_position(before, departing, net);
  check_candidate(net, before, candidate);
  const TeamGraph after = replace_member(net, before, pos, candidate);
  return influence_report(before, after, params, {Scenario::Replacement, pos, pos, top_t});
}

InfluenceReport explain_expansion(const AttributedNetwork& net, std::span<const NodeIndex> team,
                                  const Eigen::VectorXd& required_skills, NodeIndex candidate,
                                  const KernelParams& params, std::size_t top_t) {
  const TeamGraph target = expansion_target(net, team, required_skills);
  const TeamGraph G = induced_subgraph(net, team);
  check_candidate(net, G, candidate);
  const TeamGraph after = append_member(net, G, candidate);
  const std::size_t slot = G.size();
  return influence_report(target, after, params, {Scenario::Expansion, slot, slot, top_t});
}

InfluenceReport explain_shrinkage(const AttributedNetwork& net, std::span<const NodeIndex> team,
                                  NodeIndex dismissed, const KernelParams& params, std::size_t top_t) {
  if (team.size() < 2) throw Error(ErrorCode::TeamTooSmall, "shrinkage needs at least two members");
  const TeamGraph G = induced_subgraph(net, team);
  const std::size_t pos = team_position(G, dismissed, net);
  return influence_report(G, remove_member(G, pos), params, {Scenario::Shrinkage, pos, std::nullopt, top_t});
}

InfluenceReport explain_pair(const AttributedNetwork& net, std::span<const NodeIndex> team,
                             std::span<const NodeIndex> other, const KernelParams& params, std::size_t top_t) {
  const TeamGraph G = induced_subgraph(net, team);
  const TeamGraph Gp = other.empty() ? G : induced_subgraph(net, other);
  return influence_report(G, Gp, params, {Scenario::RawPair, std::nullopt, std::nullopt, top_t});
}

InfluenceReport RecommendationResult::explain(const AttributedNetwork& net, NodeIndex candidate,
                                              std::size_t top_t) const {
  switch (scenario) {
    case Scenario::Replacement:
      return explain_replacement(net, team, pivot.value(), candidate, params_echo, top_t);
    case Scenario::Expansion:
      return explain_expansion(net, team, requirement, candidate, params_echo, top_t);
    case Scenario::Shrinkage:
      return explain_shrinkage(net, team, candidate, params_echo, top_t);
    case Scenario::RawPair:
      break;
  }
  return explain_pair(net, team, {}, params_echo, top_t);
}

}  // namespace teamlens
