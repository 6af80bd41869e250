#include "teamlens/network.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

#include "teamlens/error.hpp"

namespace teamlens {

namespace {

constexpr double kRowSumTolerance = 1e-9;

void check_index(const AttributedNetwork& net, NodeIndex i) {
  if (i < 0 || static_cast<std::size_t>(i) >= net.size()) {
    throw Error(ErrorCode::UnknownNode, "node index " + std::to_string(i) + " out of range [0, " +
                                            std::to_string(net.size()) + ")");
  }
}

}  // namespace

AttributedNetwork AttributedNetwork::from_parts(std::string name, std::vector<std::string> node_ids,
                                                std::vector<std::string> display_names,
                                                std::vector<std::string> skill_names,
                                                std::span<const UndirectedEdge> edges,
                                                Eigen::MatrixXd skills) {
  const auto n = node_ids.size();
  if (display_names.size() != n) {
    throw Error(ErrorCode::DimensionMismatch, "display_names size differs from node count");
  }
  if (static_cast<std::size_t>(skills.rows()) != n ||
      static_cast<std::size_t>(skills.cols()) != skill_names.size()) {
    throw Error(ErrorCode::SkillDimensionMismatch, "skill matrix shape does not match nodes x skills");
  }
  for (Eigen::Index r = 0; r < skills.rows(); ++r) {
    double sum = 0.0;
    for (Eigen::Index k = 0; k < skills.cols(); ++k) {
      const double v = skills(r, k);
      if (!std::isfinite(v)) throw Error(ErrorCode::ValidationError, "non-finite skill level");
      if (v < 0.0) throw Error(ErrorCode::NegativeSkill, "negative skill level for " + node_ids[r]);
      sum += v;
    }
    if (sum != 0.0 && std::abs(sum - 1.0) > kRowSumTolerance) {
      throw Error(ErrorCode::ValidationError, "skill row of " + node_ids[r] + " is not normalized");
    }
  }

  AttributedNetwork net;
  net.name_ = std::move(name);
  net.id_lookup_.reserve(n);
  for (std::size_t i = 0; i < n; ++i) net.id_lookup_.emplace_back(node_ids[i], static_cast<NodeIndex>(i));
  std::sort(net.id_lookup_.begin(), net.id_lookup_.end());
  for (std::size_t i = 1; i < n; ++i) {
    if (net.id_lookup_[i].first == net.id_lookup_[i - 1].first) {
      throw Error(ErrorCode::DuplicateMember, "duplicate node id '" + net.id_lookup_[i].first + "'");
    }
  }
  net.node_ids_ = std::move(node_ids);
  net.display_names_ = std::move(display_names);
  net.skill_names_ = std::make_shared<const std::vector<std::string>>(std::move(skill_names));
  net.skills_ = std::move(skills);
  net.adjacency_.assign(n, {});

  for (const auto& e : edges) {
    check_index(net, e.a);
    check_index(net, e.b);
    if (!std::isfinite(e.weight)) throw Error(ErrorCode::ValidationError, "non-finite edge weight");
    if (e.weight < 0.0) throw Error(ErrorCode::NegativeWeight, "negative edge weight");
    if (e.a == e.b) throw Error(ErrorCode::ValidationError, "self-loop on " + net.node_ids_[e.a]);
    if (e.weight == 0.0) continue;
    net.adjacency_[e.a].push_back({e.b, e.weight});
    net.adjacency_[e.b].push_back({e.a, e.weight});
    ++net.edge_count_;
  }
  for (auto& row : net.adjacency_) {
    std::sort(row.begin(), row.end(), [](const Neighbor& x, const Neighbor& y) { return x.index < y.index; });
    for (std::size_t k = 1; k < row.size(); ++k) {
      if (row[k].index == row[k - 1].index) {
        throw Error(ErrorCode::ValidationError, "edge listed more than once");
      }
    }
  }
  return net;
}

std::span<const Neighbor> AttributedNetwork::neighbors(NodeIndex i) const {
  check_index(*this, i);
  return adjacency_[static_cast<std::size_t>(i)];
}

double AttributedNetwork::weight(NodeIndex i, NodeIndex j) const {
  const auto row = neighbors(i);
  check_index(*this, j);
  auto it = std::lower_bound(row.begin(), row.end(), j,
                             [](const Neighbor& nb, NodeIndex key) { return nb.index < key; });
  return (it != row.end() && it->index == j) ? it->weight : 0.0;
}

NodeIndex AttributedNetwork::find(const std::string& id) const {
  auto it = std::lower_bound(id_lookup_.begin(), id_lookup_.end(), id,
                             [](const auto& entry, const std::string& key) { return entry.first < key; });
  return (it != id_lookup_.end() && it->first == id) ? it->second : NodeIndex{-1};
}

NodeIndex AttributedNetwork::index_of(const std::string& id) const {
  const NodeIndex i = find(id);
  if (i < 0) throw Error(ErrorCode::UnknownNode, "unknown node id '" + id + "'");
  return i;
}

Eigen::MatrixXd AttributedNetwork::dense_adjacency() const {
  const auto n = static_cast<Eigen::Index>(size());
  Eigen::MatrixXd W = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (const auto& nb : adjacency_[i]) W(i, nb.index) = nb.weight;
  }
  return W;
}

std::ptrdiff_t TeamGraph::position_of(NodeIndex node) const noexcept {
  auto it = std::find(members.begin(), members.end(), node);
  return it == members.end() ? -1 : std::distance(members.begin(), it);
}

std::vector<std::size_t> normalize_skill_rows(Eigen::MatrixXd& skills) {
  std::vector<std::size_t> zero_rows;
  for (Eigen::Index r = 0; r < skills.rows(); ++r) {
    const double sum = skills.row(r).sum();
    if (sum > 0.0) {
      skills.row(r) /= sum;
    } else {
      skills.row(r).setZero();
      zero_rows.push_back(static_cast<std::size_t>(r));
    }
  }
  return zero_rows;
}

TeamGraph induced_subgraph(const AttributedNetwork& net, std::span<const NodeIndex> members) {
  if (members.empty()) throw Error(ErrorCode::ValidationError, "a team needs at least one member");
  std::unordered_set<NodeIndex> seen;
  for (NodeIndex i : members) {
    check_index(net, i);
    if (!seen.insert(i).second) {
      throw Error(ErrorCode::DuplicateMember, "node '" + net.node_ids()[i] + "' listed twice");
    }
  }

  const auto m = static_cast<Eigen::Index>(members.size());
  TeamGraph team;
  team.members.assign(members.begin(), members.end());
  team.skill_names = net.shared_skill_names();
  team.source_id = net.name();
  team.W = Eigen::MatrixXd::Zero(m, m);
  team.L.resize(m, static_cast<Eigen::Index>(net.skill_count()));
  for (Eigen::Index a = 0; a < m; ++a) {
    team.ids.push_back(net.node_ids()[members[a]]);
    team.names.push_back(net.display_names()[members[a]]);
    team.L.row(a) = net.skills().row(members[a]);
    for (Eigen::Index b = a + 1; b < m; ++b) {
      const double w = net.weight(members[a], members[b]);
      team.W(a, b) = w;
      team.W(b, a) = w;
    }
  }
  return team;
}

std::vector<NodeIndex> candidate_pool(const AttributedNetwork& net, const TeamGraph& team,
                                      std::span<const NodeIndex> exclude, bool require_link) {
  std::vector<char> blocked(net.size(), 0);
  for (NodeIndex i : team.members) {
    if (i >= 0) blocked[i] = 1;
  }
  for (NodeIndex i : exclude) {
    if (i >= 0 && static_cast<std::size_t>(i) < net.size()) blocked[i] = 1;
  }

  std::vector<char> linked(net.size(), require_link ? 0 : 1);
  if (require_link) {
    for (NodeIndex t : team.members) {
      if (t < 0) continue;
      for (const auto& nb : net.neighbors(t)) {
        if (nb.weight > 0.0) linked[nb.index] = 1;
      }
    }
  }

  std::vector<NodeIndex> pool;
  for (std::size_t i = 0; i < net.size(); ++i) {
    if (!blocked[i] && linked[i]) pool.push_back(static_cast<NodeIndex>(i));
  }
  return pool;
}

Eigen::MatrixXd skill_overlap(const Eigen::MatrixXd& La, const Eigen::MatrixXd& Lb) {
  if (La.cols() != Lb.cols()) {
    throw Error(ErrorCode::SkillDimensionMismatch,
                "skill dimensions differ: " + std::to_string(La.cols()) + " vs " + std::to_string(Lb.cols()));
  }
  return La * Lb.transpose();
}

Eigen::MatrixXd skill_overlap(const TeamGraph& a, const TeamGraph& b) { return skill_overlap(a.L, b.L); }

TeamGraph replace_member(const AttributedNetwork& net, const TeamGraph& team, std::size_t position,
                         NodeIndex node) {
  std::vector<NodeIndex> members = team.members;
  members.at(position) = node;
  return induced_subgraph(net, members);
}

TeamGraph append_member(const AttributedNetwork& net, const TeamGraph& team, NodeIndex node) {
  check_index(net, node);
  if (team.position_of(node) >= 0) {
    throw Error(ErrorCode::AlreadyInTeam, "node '" + net.node_ids()[node] + "' already in team");
  }
  const auto m = static_cast<Eigen::Index>(team.size());
  TeamGraph out = team;
  out.members.push_back(node);
  out.ids.push_back(net.node_ids()[node]);
  out.names.push_back(net.display_names()[node]);
  out.W.conservativeResize(m + 1, m + 1);
  out.W.row(m).setZero();
  out.W.col(m).setZero();
  for (Eigen::Index a = 0; a < m; ++a) {
    const double w = team.members[a] >= 0 ? net.weight(team.members[a], node) : 0.0;
    out.W(a, m) = w;
    out.W(m, a) = w;
  }
  out.L.conservativeResize(m + 1, Eigen::NoChange);
  out.L.row(m) = net.skills().row(node);
  return out;
}

TeamGraph remove_member(const TeamGraph& team, std::size_t position) {
  const auto m = static_cast<Eigen::Index>(team.size());
  const auto p = static_cast<Eigen::Index>(position);
  if (p >= m) throw Error(ErrorCode::NotATeamMember, "team position out of range");
  if (m == 1) throw Error(ErrorCode::TeamTooSmall, "cannot remove the only member of a team");

  std::vector<Eigen::Index> keep;
  for (Eigen::Index a = 0; a < m; ++a) {
    if (a != p) keep.push_back(a);
  }
  TeamGraph out;
  out.skill_names = team.skill_names;
  out.source_id = team.source_id;
  const auto k = static_cast<Eigen::Index>(keep.size());
  out.W.resize(k, k);
  out.L.resize(k, team.L.cols());
  for (Eigen::Index a = 0; a < k; ++a) {
    out.members.push_back(team.members[keep[a]]);
    out.ids.push_back(team.ids[keep[a]]);
    out.names.push_back(team.names[keep[a]]);
    out.L.row(a) = team.L.row(keep[a]);
    for (Eigen::Index b = 0; b < k; ++b) out.W(a, b) = team.W(keep[a], keep[b]);
  }
  return out;
}

TeamGraph append_virtual_member(const TeamGraph& team, const Eigen::VectorXd& skills, double link_weight,
                                std::string id, std::string name) {
  if (skills.size() != team.L.cols()) {
    throw Error(ErrorCode::SkillDimensionMismatch, "virtual member skill vector has wrong length");
  }
  const auto m = static_cast<Eigen::Index>(team.size());
  TeamGraph out = team;
  out.members.push_back(kVirtualNode);
  out.ids.push_back(std::move(id));
  out.names.push_back(std::move(name));
  out.W.conservativeResize(m + 1, m + 1);
  out.W.row(m).setConstant(link_weight);
  out.W.col(m).setConstant(link_weight);
  out.W(m, m) = 0.0;
  out.L.conservativeResize(m + 1, Eigen::NoChange);
  out.L.row(m) = skills.transpose();
  return out;
}

}  // namespace teamlens
