#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace teamlens {

using NodeIndex = std::int64_t;

/// Marks a team slot that is not backed by a network node (expansion target).
inline constexpr NodeIndex kVirtualNode = -1;

struct Neighbor {
  NodeIndex index;
  double weight;
};

struct UndirectedEdge {
  NodeIndex a;
  NodeIndex b;
  double weight;
};

/// Global collaboration graph with per-node skill profiles.
///
/// The adjacency is stored as sorted neighbor lists (symmetric, no self-loops,
/// positive weights only). Skill rows are L1-normalized or all zero. Instances
/// are immutable once built and safe to share between threads.
class AttributedNetwork {
 public:
  /// Validates and assembles a network. `edges` are undirected and must not
  /// repeat a pair; zero-weight edges are dropped. Throws teamlens::Error when
  /// any invariant is violated (no silent repair happens here; see ingestion).
  static AttributedNetwork from_parts(std::string name, std::vector<std::string> node_ids,
                                      std::vector<std::string> display_names,
                                      std::vector<std::string> skill_names,
                                      std::span<const UndirectedEdge> edges,
                                      Eigen::MatrixXd skills);

  const std::string& name() const noexcept { return name_; }
  std::size_t size() const noexcept { return node_ids_.size(); }
  std::size_t skill_count() const noexcept { return skill_names_->size(); }

  const std::vector<std::string>& node_ids() const noexcept { return node_ids_; }
  const std::vector<std::string>& display_names() const noexcept { return display_names_; }
  const std::vector<std::string>& skill_names() const noexcept { return *skill_names_; }
  std::shared_ptr<const std::vector<std::string>> shared_skill_names() const { return skill_names_; }

  const Eigen::MatrixXd& skills() const noexcept { return skills_; }
  std::span<const Neighbor> neighbors(NodeIndex i) const;
  double weight(NodeIndex i, NodeIndex j) const;
  std::size_t edge_count() const noexcept { return edge_count_; }

  /// Index of an opaque id; -1 when absent.
  NodeIndex find(const std::string& id) const;
  /// Like find() but throws UnknownNode.
  NodeIndex index_of(const std::string& id) const;

  /// Materialized n×n adjacency. Intended for small networks and tests.
  Eigen::MatrixXd dense_adjacency() const;

 private:
  AttributedNetwork() = default;

  std::string name_;
  std::vector<std::string> node_ids_;
  std::vector<std::string> display_names_;
  std::shared_ptr<const std::vector<std::string>> skill_names_;
  std::vector<std::vector<Neighbor>> adjacency_;
  std::vector<std::pair<std::string, NodeIndex>> id_lookup_;  // sorted by id
  Eigen::MatrixXd skills_;
  std::size_t edge_count_ = 0;
};

/// Team subgraph: induced adjacency and skill rows in member order.
struct TeamGraph {
  std::vector<NodeIndex> members;
  std::vector<std::string> ids;
  std::vector<std::string> names;
  std::shared_ptr<const std::vector<std::string>> skill_names;
  Eigen::MatrixXd W;
  Eigen::MatrixXd L;
  std::string source_id;

  std::size_t size() const noexcept { return members.size(); }
  std::size_t skill_count() const noexcept { return static_cast<std::size_t>(L.cols()); }
  /// Position of a network node inside the team, or -1.
  std::ptrdiff_t position_of(NodeIndex node) const noexcept;
};

/// Rescales every nonzero row to sum to one; all-zero rows stay zero.
/// Returns the indices of rows that were all zero.
std::vector<std::size_t> normalize_skill_rows(Eigen::MatrixXd& skills);

TeamGraph induced_subgraph(const AttributedNetwork& net, std::span<const NodeIndex> members);

/// Network nodes outside `team` and `exclude`, ascending. With `require_link`
/// only nodes holding a positive-weight edge to some team member survive.
std::vector<NodeIndex> candidate_pool(const AttributedNetwork& net, const TeamGraph& team,
                                      std::span<const NodeIndex> exclude, bool require_link);

/// S[i, i'] = <L row i, L' row i'>; the diagonal of the label-match matrix.
Eigen::MatrixXd skill_overlap(const TeamGraph& a, const TeamGraph& b);
Eigen::MatrixXd skill_overlap(const Eigen::MatrixXd& La, const Eigen::MatrixXd& Lb);

/// Copy of `team` with `node` swapped in at `position`.
TeamGraph replace_member(const AttributedNetwork& net, const TeamGraph& team,
                         std::size_t position, NodeIndex node);
/// Copy of `team` with `node` appended.
TeamGraph append_member(const AttributedNetwork& net, const TeamGraph& team, NodeIndex node);
/// Copy of `team` without the member at `position`.
TeamGraph remove_member(const TeamGraph& team, std::size_t position);
/// Copy of `team` plus a member that is not in the network, linked to every
/// current member with `link_weight`.
TeamGraph append_virtual_member(const TeamGraph& team, const Eigen::VectorXd& skills,
                                double link_weight, std::string id, std::string name);

}  // namespace teamlens
