#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "teamlens/influence.hpp"
#include "teamlens/kron_kernel.hpp"
#include "teamlens/network.hpp"

namespace teamlens {

struct RankedCandidate {
  NodeIndex node = 0;
  std::string id;
  double score = 0.0;
};

/// A ranked answer to one scenario query. Explanations are not stored; call
/// explain() for the candidates the user actually inspects.
struct RecommendationResult {
  Scenario scenario = Scenario::Replacement;
  std::vector<NodeIndex> team;
  std::optional<NodeIndex> pivot;        // departing member (replacement)
  Eigen::VectorXd requirement;           // normalized need (expansion)
  std::vector<RankedCandidate> ranking;  // score descending, ties by node index
  KernelParams params_echo;

  InfluenceReport explain(const AttributedNetwork& net, NodeIndex candidate, std::size_t top_t = 5) const;
};

/// Sorts by score descending, ties by ascending node index, keeps `k`.
void finalize_ranking(std::vector<RankedCandidate>& ranking, std::size_t k);

double score_replacement(const AttributedNetwork& net, std::span<const NodeIndex> team, NodeIndex departing,
                         NodeIndex candidate, const KernelParams& params);

RecommendationResult recommend_replacement(const AttributedNetwork& net, std::span<const NodeIndex> team,
                                           NodeIndex departing, std::size_t k, const KernelParams& params,
                                           bool require_link = true);

/// Team plus an ideal member holding `required_skills` (normalized) and linked
/// to everyone at the mean positive intra-team weight (1 when edgeless).
TeamGraph expansion_target(const AttributedNetwork& net, std::span<const NodeIndex> team,
                           const Eigen::VectorXd& required_skills);

RecommendationResult recommend_expansion(const AttributedNetwork& net, std::span<const NodeIndex> team,
                                         const Eigen::VectorXd& required_skills, std::size_t k,
                                         const KernelParams& params, bool require_link = true);

RecommendationResult recommend_shrinkage(const AttributedNetwork& net, std::span<const NodeIndex> team,
                                         std::size_t k, const KernelParams& params);

InfluenceReport explain_replacement(const AttributedNetwork& net, std::span<const NodeIndex> team,
                                    NodeIndex departing, NodeIndex candidate, const KernelParams& params,
                                    std::size_t top_t = 5);
InfluenceReport explain_expansion(const AttributedNetwork& net, std::span<const NodeIndex> team,
                                  const Eigen::VectorXd& required_skills, NodeIndex candidate,
                                  const KernelParams& params, std::size_t top_t = 5);
InfluenceReport explain_shrinkage(const AttributedNetwork& net, std::span<const NodeIndex> team,
                                  NodeIndex dismissed, const KernelParams& params, std::size_t top_t = 5);
/// Plain pair of induced teams; `other` empty means the team against itself.
InfluenceReport explain_pair(const AttributedNetwork& net, std::span<const NodeIndex> team,
                             std::span<const NodeIndex> other, const KernelParams& params, std::size_t top_t = 5);

}  // namespace teamlens
