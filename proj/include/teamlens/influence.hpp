#pragma once

#include <optional>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "teamlens/kron_kernel.hpp"
#include "teamlens/network.hpp"

namespace teamlens {

enum class Scenario { Replacement, Expansion, Shrinkage, RawPair };

std::string_view scenario_name(Scenario s) noexcept;
/// Accepts the report tags and the short CLI forms (replace, expand, shrink, raw).
std::optional<Scenario> parse_scenario(std::string_view text) noexcept;

/// Derivatives of the kernel with respect to every edge slot and every skill
/// entry of both graphs. Edge matrices are unmasked: non-edges carry the
/// derivative a new collaboration would have.
struct InfluenceArrays {
  double kernel = 0.0;
  Eigen::MatrixXd edge_before, edge_after;
  Eigen::MatrixXd attr_before, attr_after;
};

/// Structured assembly: one right solve, one left solve, then a few m x m'
/// matrix products. The two solves run concurrently when OpenMP allows.
InfluenceArrays influence_arrays(const PairInputs& in, double tol, int max_iter);

/// Zeroes entries where the adjacency has no edge.
Eigen::MatrixXd mask_to_support(const Eigen::MatrixXd& influence, const Eigen::MatrixXd& W);

std::pair<Eigen::MatrixXd, Eigen::MatrixXd> edge_influences(const TeamGraph& G, const TeamGraph& Gp,
                                                            const KernelParams& params, bool mask = true);
std::pair<Eigen::MatrixXd, Eigen::MatrixXd> attribute_influences(const TeamGraph& G, const TeamGraph& Gp,
                                                                 const KernelParams& params);

/// Sum of incident edge influences, ascending neighbor order.
Eigen::VectorXd node_influences(const Eigen::MatrixXd& edge_influence, const Eigen::MatrixXd& W);
inline Eigen::VectorXd node_influences(const Eigen::MatrixXd& edge_influence, const TeamGraph& G) {
  return node_influences(edge_influence, G.W);
}

struct RankedEdge {
  std::size_t i = 0;
  std::size_t j = 0;
  double influence = 0.0;
  double weight = 0.0;
};

struct RankedNode {
  std::size_t index = 0;
  double influence = 0.0;
};

struct RankedSkill {
  std::size_t skill = 0;
  double influence = 0.0;
};

/// Scenario reading of the raw scores:
///  - replacement: collaborations, partners and skills shared by the departing
///    member (before) and the candidate (after) at the pivot slot;
///  - expansion: the candidate's new collaborations, the members it would work
///    with, and skills it brings that nobody on the old team has;
///  - shrinkage: missing collaborations of the dismissal candidate, the members
///    it should have worked with, and its below-team-median skills.
struct Highlights {
  std::vector<RankedEdge> edges;
  std::vector<RankedNode> members;
  std::vector<RankedSkill> skills;
};

struct ExplainContext {
  Scenario scenario = Scenario::RawPair;
  std::optional<std::size_t> pivot_before;
  std::optional<std::size_t> pivot_after;
  std::size_t top_t = 5;
};

struct InfluenceReport {
  double kernel_value = 0.0;
  Eigen::MatrixXd edge_influence_G, edge_influence_Gp;          // masked
  Eigen::MatrixXd raw_edge_influence_G, raw_edge_influence_Gp;  // unmasked
  Eigen::VectorXd node_influence_G, node_influence_Gp;
  Eigen::MatrixXd attr_influence_G, attr_influence_Gp;
  KernelParams params_echo;
  ExplainContext context;
  TeamGraph before, after;

  std::vector<RankedEdge> top_edges_G, top_edges_Gp;
  std::vector<RankedNode> top_members_G, top_members_Gp;
  /// Edges incident to the pivot, strongest first.
  std::vector<RankedEdge> pivot_edges_G, pivot_edges_Gp;
  Highlights highlights;

  Scenario scenario() const noexcept { return context.scenario; }
};

InfluenceReport influence_report(const TeamGraph& G, const TeamGraph& Gp, const KernelParams& params,
                                 const ExplainContext& context);

/// Builds a report from explicit inputs (e.g. c = 0 or custom distributions).
InfluenceReport influence_report(const PairInputs& in, const TeamGraph& G, const TeamGraph& Gp,
                                 const KernelParams& params_echo, const ExplainContext& context);

/// Edges of W (i < j, positive weight) ranked by influence, ties by (i, j).
std::vector<RankedEdge> rank_edges(const Eigen::MatrixXd& influence, const Eigen::MatrixXd& W,
                                   std::size_t limit);
/// Edges incident to `pivot`, ranked by influence, ties by partner index.
std::vector<RankedEdge> rank_incident_edges(const Eigen::MatrixXd& influence, const Eigen::MatrixXd& W,
                                            std::size_t pivot, std::size_t limit);
/// Indices of the `limit` largest values, ties by index.
std::vector<RankedNode> rank_values(const Eigen::VectorXd& values, std::size_t limit);

}  // namespace teamlens
