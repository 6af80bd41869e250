#include "teamlens/influence.hpp"

#include <algorithm>
#include <exception>
#include <numeric>

#include "teamlens/error.hpp"

namespace teamlens {

namespace {

using ConstRowMap = Eigen::Map<const RowMatrix>;

RowMatrix reshape(const Eigen::VectorXd& v, Eigen::Index rows, Eigen::Index cols) {
  return ConstRowMap(v.data(), rows, cols);
}

Eigen::VectorXd flatten(const RowMatrix& M) { return Eigen::Map<const Eigen::VectorXd>(M.data(), M.size()); }

double median_of(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  return n % 2 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

template <typename T, typename Key>
void sort_desc(std::vector<T>& items, Key key) {
  std::stable_sort(items.begin(), items.end(), [&](const T& a, const T& b) { return key(a) > key(b); });
}

void truncate(auto& items, std::size_t limit) {
  if (items.size() > limit) items.resize(limit);
}

std::vector<RankedSkill> rank_row(const Eigen::MatrixXd& attr, std::size_t row, std::size_t limit) {
  std::vector<RankedSkill> out;
  for (Eigen::Index k = 0; k < attr.cols(); ++k) out.push_back({static_cast<std::size_t>(k), attr(row, k)});
  sort_desc(out, [](const RankedSkill& s) { return s.influence; });
  truncate(out, limit);
  return out;
}

Highlights replacement_highlights(const InfluenceReport& r, std::size_t p, std::size_t top_t) {
  Highlights h;
  const auto& W = r.before.W;
  const auto& Wp = r.after.W;
  for (Eigen::Index j = 0; j < W.rows(); ++j) {
    if (static_cast<std::size_t>(j) == p || j >= Wp.rows()) continue;
    if (W(p, j) > 0.0 && Wp(p, j) > 0.0) {
      const auto uj = static_cast<std::size_t>(j);
      h.edges.push_back({p, uj, r.edge_influence_G(p, j) + r.edge_influence_Gp(p, j), W(p, j)});
      h.members.push_back({uj, r.node_influence_G(j) + r.node_influence_Gp(j)});
    }
  }
  sort_desc(h.edges, [](const RankedEdge& e) { return e.influence; });
  sort_desc(h.members, [](const RankedNode& n) { return n.influence; });
  truncate(h.edges, top_t);
  truncate(h.members, top_t);

  const auto top_before = rank_row(r.attr_influence_G, p, top_t);
  const auto top_after = rank_row(r.attr_influence_Gp, p, top_t);
  for (const auto& s : top_before) {
    const bool in_both = std::any_of(top_after.begin(), top_after.end(),
                                     [&](const RankedSkill& t) { return t.skill == s.skill; });
    if (in_both && r.before.L(p, s.skill) > 0.0 && r.after.L(p, s.skill) > 0.0) {
      h.skills.push_back({s.skill, r.attr_influence_G(p, s.skill) + r.attr_influence_Gp(p, s.skill)});
    }
  }
  sort_desc(h.skills, [](const RankedSkill& s) { return s.influence; });
  return h;
}

Highlights expansion_highlights(const InfluenceReport& r, std::size_t p, std::size_t top_t) {
  Highlights h;
  const auto& Wp = r.after.W;
  const auto& Lp = r.after.L;
  h.edges = rank_incident_edges(r.edge_influence_Gp, Wp, p, top_t);
  for (const auto& e : rank_incident_edges(r.edge_influence_Gp, Wp, p, Wp.rows())) {
    h.members.push_back({e.j, r.node_influence_Gp(e.j)});
  }
  sort_desc(h.members, [](const RankedNode& n) { return n.influence; });
  truncate(h.members, top_t);

  for (Eigen::Index k = 0; k < Lp.cols(); ++k) {
    if (Lp(p, k) <= 0.0) continue;
    bool held_by_team = false;
    for (Eigen::Index j = 0; j < Lp.rows(); ++j) {
      if (static_cast<std::size_t>(j) != p && Lp(j, k) > 0.0) held_by_team = true;
    }
    if (!held_by_team) h.skills.push_back({static_cast<std::size_t>(k), r.attr_influence_Gp(p, k)});
  }
  sort_desc(h.skills, [](const RankedSkill& s) { return s.influence; });
  truncate(h.skills, top_t);
  return h;
}

Highlights shrinkage_highlights(const InfluenceReport& r, std::size_t p, std::size_t top_t) {
  Highlights h;
  const auto& W = r.before.W;
  const auto& L = r.before.L;
  for (Eigen::Index j = 0; j < W.rows(); ++j) {
    if (static_cast<std::size_t>(j) == p || W(p, j) > 0.0) continue;
    const auto uj = static_cast<std::size_t>(j);
    h.edges.push_back({p, uj, r.raw_edge_influence_G(p, j), 0.0});
    h.members.push_back({uj, r.node_influence_G(j)});
  }
  // Missing collaborations are ordered by how central the partner is.
  std::stable_sort(h.edges.begin(), h.edges.end(), [&](const RankedEdge& a, const RankedEdge& b) {
    const double na = r.node_influence_G(a.j), nb = r.node_influence_G(b.j);
    if (na != nb) return na > nb;
    return a.influence > b.influence;
  });
  sort_desc(h.members, [](const RankedNode& n) { return n.influence; });
  truncate(h.edges, top_t);
  truncate(h.members, top_t);

  if (L.rows() > 1) {
    for (Eigen::Index k = 0; k < L.cols(); ++k) {
      std::vector<double> others;
      for (Eigen::Index j = 0; j < L.rows(); ++j) {
        if (static_cast<std::size_t>(j) != p) others.push_back(L(j, k));
      }
      if (L(p, k) < median_of(std::move(others))) {
        h.skills.push_back({static_cast<std::size_t>(k), r.attr_influence_G(p, k)});
      }
    }
  }
  sort_desc(h.skills, [](const RankedSkill& s) { return s.influence; });
  truncate(h.skills, top_t);
  return h;
}

}  // namespace

std::string_view scenario_name(Scenario s) noexcept {
  switch (s) {
    case Scenario::Replacement: return "replacement";
    case Scenario::Expansion: return "expansion";
    case Scenario::Shrinkage: return "shrinkage";
    case Scenario::RawPair: return "raw-pair";
  }
  return "raw-pair";
}

std::optional<Scenario> parse_scenario(std::string_view text) noexcept {
  if (text == "replacement" || text == "replace") return Scenario::Replacement;
  if (text == "expansion" || text == "expand") return Scenario::Expansion;
  if (text == "shrinkage" || text == "shrink") return Scenario::Shrinkage;
  if (text == "raw-pair" || text == "raw") return Scenario::RawPair;
  return std::nullopt;
}

InfluenceArrays influence_arrays(const PairInputs& in, double tol, int max_iter) {
  const Eigen::Index m = in.m(), mp = in.mp();
  const Eigen::MatrixXd S = in.overlap();
  const KronOperator op(in.W, in.Wp, S, in.c);
  require_contraction(op);

  const RowMatrix S_row = S;
  const RowMatrix P = in.p * in.pp.transpose();
  const Eigen::VectorXd b = flatten(S_row.cwiseProduct(P));
  const Eigen::VectorXd qx = in.stop_pairs();

  SolveReport right, left;
  std::exception_ptr failure;
#pragma omp parallel sections if (m * mp > 256)
  {
#pragma omp section
    {
      try {
        right = solve_right(op, b, tol, max_iter);
      } catch (...) {
#pragma omp critical(teamlens_influence_failure)
        if (!failure) failure = std::current_exception();
      }
    }
#pragma omp section
    {
      try {
        left = solve_left(op, qx, tol, max_iter);
      } catch (...) {
#pragma omp critical(teamlens_influence_failure)
        if (!failure) failure = std::current_exception();
      }
    }
  }
  if (failure) std::rethrow_exception(failure);

  const RowMatrix Z = reshape(right.solution, m, mp);
  const RowMatrix U = reshape(left.solution, m, mp);
  const RowMatrix Ytil = S_row.cwiseProduct(U);
  const RowMatrix V = P + reshape(op.apply_walk(right.solution), m, mp);

  InfluenceArrays out;
  out.kernel = qx.dot(right.solution);

  const Eigen::MatrixXd M = Ytil * in.Wp * Z.transpose();
  out.edge_before = in.c * (M + M.transpose());
  out.edge_before.diagonal().setZero();

  const Eigen::MatrixXd Mp = Ytil.transpose() * in.W * Z;
  out.edge_after = in.c * (Mp + Mp.transpose());
  out.edge_after.diagonal().setZero();

  const Eigen::MatrixXd UV = U.cwiseProduct(V);
  out.attr_before = UV * in.Lp;
  out.attr_after = UV.transpose() * in.L;
  return out;
}

Eigen::MatrixXd mask_to_support(const Eigen::MatrixXd& influence, const Eigen::MatrixXd& W) {
  return (W.array() > 0.0).select(influence, 0.0);
}

std::pair<Eigen::MatrixXd, Eigen::MatrixXd> edge_influences(const TeamGraph& G, const TeamGraph& Gp,
                                                            const KernelParams& params, bool mask) {
  auto arrays = influence_arrays(PairInputs::from_teams(G, Gp, params), params.tol, params.max_iter);
  if (!mask) return {std::move(arrays.edge_before), std::move(arrays.edge_after)};
  return {mask_to_support(arrays.edge_before, G.W), mask_to_support(arrays.edge_after, Gp.W)};
}

std::pair<Eigen::MatrixXd, Eigen::MatrixXd> attribute_influences(const TeamGraph& G, const TeamGraph& Gp,
                                                                 const KernelParams& params) {
  auto arrays = influence_arrays(PairInputs::from_teams(G, Gp, params), params.tol, params.max_iter);
  return {std::move(arrays.attr_before), std::move(arrays.attr_after)};
}

Eigen::VectorXd node_influences(const Eigen::MatrixXd& edge_influence, const Eigen::MatrixXd& W) {
  if (edge_influence.rows() != W.rows() || edge_influence.cols() != W.cols()) {
    throw Error(ErrorCode::DimensionMismatch, "influence matrix does not match adjacency");
  }
  Eigen::VectorXd out = Eigen::VectorXd::Zero(W.rows());
  for (Eigen::Index i = 0; i < W.rows(); ++i) {
    double sum = 0.0;
    for (Eigen::Index j = 0; j < W.cols(); ++j) {
      if (W(i, j) > 0.0) sum += edge_influence(i, j);
    }
    out(i) = sum;
  }
  return out;
}

std::vector<RankedEdge> rank_edges(const Eigen::MatrixXd& influence, const Eigen::MatrixXd& W,
                                   std::size_t limit) {
  std::vector<RankedEdge> out;
  for (Eigen::Index i = 0; i < W.rows(); ++i) {
    for (Eigen::Index j = i + 1; j < W.cols(); ++j) {
      if (W(i, j) > 0.0) {
        out.push_back({static_cast<std::size_t>(i), static_cast<std::size_t>(j), influence(i, j), W(i, j)});
      }
    }
  }
  sort_desc(out, [](const RankedEdge& e) { return e.influence; });
  truncate(out, limit);
  return out;
}

std::vector<RankedEdge> rank_incident_edges(const Eigen::MatrixXd& influence, const Eigen::MatrixXd& W,
                                            std::size_t pivot, std::size_t limit) {
  std::vector<RankedEdge> out;
  const auto p = static_cast<Eigen::Index>(pivot);
  for (Eigen::Index j = 0; j < W.cols(); ++j) {
    if (j != p && W(p, j) > 0.0) out.push_back({pivot, static_cast<std::size_t>(j), influence(p, j), W(p, j)});
  }
  sort_desc(out, [](const RankedEdge& e) { return e.influence; });
  truncate(out, limit);
  return out;
}

std::vector<RankedNode> rank_values(const Eigen::VectorXd& values, std::size_t limit) {
  std::vector<RankedNode> out;
  for (Eigen::Index i = 0; i < values.size(); ++i) out.push_back({static_cast<std::size_t>(i), values(i)});
  sort_desc(out, [](const RankedNode& n) { return n.influence; });
  truncate(out, limit);
  return out;
}

InfluenceReport influence_report(const PairInputs& in, const TeamGraph& G, const TeamGraph& Gp,
                                 const KernelParams& params_echo, const ExplainContext& context) {
  if (in.m() != static_cast<Eigen::Index>(G.size()) || in.mp() != static_cast<Eigen::Index>(Gp.size())) {
    throw Error(ErrorCode::DimensionMismatch, "inputs do not match the supplied teams");
  }
  auto arrays = influence_arrays(in, params_echo.tol, params_echo.max_iter);

  InfluenceReport r;
  r.kernel_value = arrays.kernel;
  r.raw_edge_influence_G = std::move(arrays.edge_before);
  r.raw_edge_influence_Gp = std::move(arrays.edge_after);
  r.edge_influence_G = mask_to_support(r.raw_edge_influence_G, in.W);
  r.edge_influence_Gp = mask_to_support(r.raw_edge_influence_Gp, in.Wp);
  r.node_influence_G = node_influences(r.edge_influence_G, in.W);
  r.node_influence_Gp = node_influences(r.edge_influence_Gp, in.Wp);
  r.attr_influence_G = std::move(arrays.attr_before);
  r.attr_influence_Gp = std::move(arrays.attr_after);
  r.params_echo = params_echo;
  r.context = context;
  r.before = G;
  r.after = Gp;

  const std::size_t t = context.top_t;
  r.top_edges_G = rank_edges(r.edge_influence_G, in.W, t);
  r.top_edges_Gp = rank_edges(r.edge_influence_Gp, in.Wp, t);
  r.top_members_G = rank_values(r.node_influence_G, t);
  r.top_members_Gp = rank_values(r.node_influence_Gp, t);

  const auto check_pivot = [](std::optional<std::size_t> pivot, std::size_t size) {
    if (pivot && *pivot >= size) throw Error(ErrorCode::ValidationError, "pivot position outside team");
  };
  check_pivot(context.pivot_before, G.size());
  check_pivot(context.pivot_after, Gp.size());
  if (context.pivot_before) r.pivot_edges_G = rank_incident_edges(r.edge_influence_G, in.W, *context.pivot_before, t);
  if (context.pivot_after) r.pivot_edges_Gp = rank_incident_edges(r.edge_influence_Gp, in.Wp, *context.pivot_after, t);

  switch (context.scenario) {
    case Scenario::Replacement:
      if (!context.pivot_before) throw Error(ErrorCode::ValidationError, "replacement needs a pivot");
      r.highlights = replacement_highlights(r, *context.pivot_before, t);
      break;
    case Scenario::Expansion:
      if (!context.pivot_after) throw Error(ErrorCode::ValidationError, "expansion needs the candidate slot");
      r.highlights = expansion_highlights(r, *context.pivot_after, t);
      break;
    case Scenario::Shrinkage:
      if (!context.pivot_before) throw Error(ErrorCode::ValidationError, "shrinkage needs the dismissal slot");
      r.highlights = shrinkage_highlights(r, *context.pivot_before, t);
      break;
    case Scenario::RawPair:
      break;
  }
  return r;
}

InfluenceReport influence_report(const TeamGraph& G, const TeamGraph& Gp, const KernelParams& params,
                                 const ExplainContext& context) {
  return influence_report(PairInputs::from_teams(G, Gp, params), G, Gp, params, context);
}

}  // namespace teamlens
