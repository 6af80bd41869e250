// Runs every acceptance criterion and prints one PASS/FAIL line per criterion.
// Exit status is nonzero when any criterion fails.

#include <algorithm>
#include <array>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <queue>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <sys/wait.h>

#include "teamlens/dense_reference.hpp"
#include "teamlens/influence.hpp"
#include "teamlens/ingestion.hpp"
#include "teamlens/kron_kernel.hpp"
#include "teamlens/network.hpp"
#include "teamlens/recommender.hpp"

#include "../support/oracles.hpp"

#ifndef TEAMLENS_CLI_PATH
#error "TEAMLENS_CLI_PATH must name the teamlens executable"
#endif
#ifndef TEAMLENS_TEST_DATA
#error "TEAMLENS_TEST_DATA must name the fixture directory"
#endif

namespace {

using namespace teamlens;
using testing::Instance;
using Clock = std::chrono::steady_clock;

// Solver tolerance for the oracle comparisons; the comparison tolerances
// below are independent of it.
constexpr double kTightTol = 1e-14;
constexpr int kTightIter = 100000;

struct Outcome {
  bool pass = false;
  std::string detail;
};

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

Outcome kernel_oracle() {
  std::mt19937_64 rng(1001);
  std::uniform_int_distribution<int> msz(1, 8), dsz(1, 4);
  const auto t0 = Clock::now();
  int bad = 0;
  double worst = 0.0;
  const int pairs = 250;
  for (int t = 0; t < pairs; ++t) {
    const Instance x = testing::random_instance(rng, msz(rng), msz(rng), dsz(rng));
    const PairInputs in = x.inputs();
    const double k = kernel(in, KernelParams{}.tol, KernelParams{}.max_iter);
    const double ref = testing::oracle_kernel(x);
    const double err = std::abs(k - ref) / (1.0 + std::abs(k));
    worst = std::max(worst, err);
    if (!(err <= 1e-10)) ++bad;
  }
  const double elapsed = seconds_since(t0);
  Outcome o;
  o.pass = bad == 0 && elapsed < 30.0;
  o.detail = std::to_string(pairs) + " pairs, " + std::to_string(bad) + " out of tolerance, worst scaled error " +
             fmt("%.2e, %.2f s", worst, elapsed);
  return o;
}

struct GradientStats {
  int checked = 0;
  int fd_bad = 0;
  int dense_bad = 0;
  double fd_worst = 0.0;
  double dense_worst = 0.0;

  void add(double fast, double dense, double fd) {
    ++checked;
    const auto rel = [](double a, double ref) {
      const double diff = std::abs(a - ref);
      return diff == 0.0 ? 0.0 : diff / std::abs(ref);
    };
    const double e_fd = rel(fast, fd), e_dense = rel(fast, dense);
    fd_worst = std::max(fd_worst, e_fd);
    dense_worst = std::max(dense_worst, e_dense);
    if (!testing::close_rel(fast, fd, 1e-4)) ++fd_bad;
    if (!testing::close_rel(fast, dense, 1e-10)) ++dense_bad;
  }
};

Outcome edge_gradient() {
  std::mt19937_64 rng(2002);
  std::uniform_int_distribution<int> msz(2, 8), dsz(1, 4);
  const auto t0 = Clock::now();
  GradientStats stats;
  const int instances = 120;
  for (int t = 0; t < instances; ++t) {
    const Instance x = testing::random_instance(rng, msz(rng), msz(rng), dsz(rng));
    const auto fast = influence_arrays(x.inputs(), kTightTol, kTightIter);
    const testing::Oracle oracle(x);
    for (bool after : {false, true}) {
      const Eigen::MatrixXd& E = after ? fast.edge_after : fast.edge_before;
      for (Eigen::Index i = 0; i < E.rows(); ++i)
        for (Eigen::Index j = i + 1; j < E.cols(); ++j)
          stats.add(E(i, j), oracle.edge(after, i, j), testing::fd_edge(x, after, i, j, 1e-5));
    }
  }
  const double elapsed = seconds_since(t0);
  Outcome o;
  o.pass = stats.fd_bad == 0 && stats.dense_bad == 0 && elapsed < 60.0;
  o.detail = std::to_string(instances) + " instances, " + std::to_string(stats.checked) + " edge slots; FD misses " +
             std::to_string(stats.fd_bad) + " (worst " + fmt("%.2e", stats.fd_worst) + "), dense misses " +
             std::to_string(stats.dense_bad) + " (worst " + fmt("%.2e", stats.dense_worst) + "), " +
             fmt("%.2f s", elapsed);
  return o;
}

Outcome attribute_gradient() {
  std::mt19937_64 rng(3003);
  std::uniform_int_distribution<int> msz(2, 8), dsz(1, 4);
  const auto t0 = Clock::now();
  GradientStats stats;
  const int instances = 120;
  for (int t = 0; t < instances; ++t) {
    const Instance x = testing::random_instance(rng, msz(rng), msz(rng), dsz(rng));
    const auto fast = influence_arrays(x.inputs(), kTightTol, kTightIter);
    const testing::Oracle oracle(x);
    for (bool after : {false, true}) {
      const Eigen::MatrixXd& A = after ? fast.attr_after : fast.attr_before;
      for (Eigen::Index i = 0; i < A.rows(); ++i)
        for (Eigen::Index k = 0; k < A.cols(); ++k)
          stats.add(A(i, k), oracle.attribute(after, i, k), testing::fd_attribute(x, after, i, k, 1e-6));
    }
  }
  const double elapsed = seconds_since(t0);
  Outcome o;
  o.pass = stats.fd_bad == 0 && stats.dense_bad == 0 && elapsed < 60.0;
  o.detail = std::to_string(instances) + " instances, " + std::to_string(stats.checked) + " skill entries; FD misses " +
             std::to_string(stats.fd_bad) + " (worst " + fmt("%.2e", stats.fd_worst) + "), dense misses " +
             std::to_string(stats.dense_bad) + " (worst " + fmt("%.2e", stats.dense_worst) + "), " +
             fmt("%.2f s", elapsed);
  return o;
}

AttributedNetwork ring_network() {
  const std::array<UndirectedEdge, 1> edges{{{0, 1, 1.0}}};
  return AttributedNetwork::from_parts("ring", {"a", "b"}, {"A", "B"}, {"s"}, edges, Eigen::MatrixXd::Ones(2, 1));
}

Outcome ring_fixture() {
  // Frozen values: hand Neumann series on the permutation eigenvector, and
  // confirmed against the literal oracle below before comparing.
  const double kernel_expected = 1.0 / 3.6;
  const double edge_expected = 0.4 / 12.96;
  const testing::Oracle oracle(testing::ring_instance());
  const bool oracle_ok = std::abs(oracle.kernel() - kernel_expected) <= 1e-14 &&
                         std::abs(oracle.edge(false, 0, 1) - edge_expected) <= 1e-14 &&
                         std::abs(oracle.edge(true, 0, 1) - edge_expected) <= 1e-14;

  const auto net = ring_network();
  const std::vector<NodeIndex> team{0, 1};
  const TeamGraph G = induced_subgraph(net, team);
  KernelParams params;
  params.c = 0.1;
  const auto report = influence_report(G, G, params, ExplainContext{});
  const double dk = std::abs(report.kernel_value - kernel_expected);
  double de = 0.0;
  for (const auto* E : {&report.edge_influence_G, &report.edge_influence_Gp}) {
    de = std::max({de, std::abs((*E)(0, 1) - edge_expected), std::abs((*E)(1, 0) - edge_expected)});
  }
  Outcome o;
  o.pass = oracle_ok && dk <= 1e-12 && de <= 1e-10;
  o.detail = "kernel " + fmt("%.15f (|diff| %.1e)", report.kernel_value, dk) + ", edge " +
             fmt("%.15f (|diff| %.1e)", report.edge_influence_G(0, 1), de) +
             (oracle_ok ? ", oracle agrees" : ", ORACLE DISAGREES");
  return o;
}

TeamGraph team_from(const Eigen::MatrixXd& W, const Eigen::MatrixXd& L) {
  TeamGraph g;
  for (Eigen::Index i = 0; i < W.rows(); ++i) {
    g.members.push_back(i);
    g.ids.push_back("v" + std::to_string(i));
    g.names.push_back(g.ids.back());
  }
  auto names = std::make_shared<std::vector<std::string>>();
  for (Eigen::Index k = 0; k < L.cols(); ++k) names->push_back("s" + std::to_string(k));
  g.skill_names = names;
  g.W = W;
  g.L = L;
  g.source_id = "random";
  return g;
}

Outcome aggregation_identity() {
  std::mt19937_64 rng(5005);
  std::uniform_int_distribution<int> msz(1, 8), dsz(1, 4);
  int checked = 0, bad = 0;
  for (int t = 0; t < 200; ++t) {
    const Instance x = testing::random_instance(rng, msz(rng), msz(rng), dsz(rng));
    const TeamGraph G = team_from(x.W, x.L), Gp = team_from(x.Wp, x.Lp);
    KernelParams params;
    params.c = x.c;
    const auto report = influence_report(G, Gp, params, ExplainContext{});
    const auto check = [&](const Eigen::VectorXd& nodes, const Eigen::MatrixXd& E, const Eigen::MatrixXd& W) {
      for (Eigen::Index i = 0; i < W.rows(); ++i) {
        double sum = 0.0;
        for (Eigen::Index j = 0; j < W.cols(); ++j)
          if (W(i, j) > 0.0) sum += E(i, j);
        ++checked;
        if (std::memcmp(&sum, &nodes(i), sizeof(double)) != 0) ++bad;
      }
    };
    check(report.node_influence_G, report.edge_influence_G, x.W);
    check(report.node_influence_Gp, report.edge_influence_Gp, x.Wp);
  }
  return {bad == 0, std::to_string(checked) + " node sums, " + std::to_string(bad) + " not bitwise equal"};
}

std::vector<NodeIndex> bfs_team(const AttributedNetwork& net, NodeIndex start, NodeIndex skip, std::size_t size) {
  std::vector<NodeIndex> team{start};
  std::set<NodeIndex> seen{start, skip};
  std::queue<NodeIndex> frontier;
  frontier.push(start);
  while (!frontier.empty() && team.size() < size) {
    const NodeIndex u = frontier.front();
    frontier.pop();
    for (const auto& nb : net.neighbors(u)) {
      if (team.size() >= size) break;
      if (seen.insert(nb.index).second) {
        team.push_back(nb.index);
        frontier.push(nb.index);
      }
    }
  }
  return team;
}

Outcome clone_optimality() {
  const std::size_t n = 30;
  int runs = 0, wins = 0;
  std::string losses;
  for (std::uint64_t seed = 0; runs < 50; ++seed) {
    SynthParams sp;
    sp.plant_clone_of = 0;
    const auto net = synth_network(6000 + seed, n, 8, sp);
    const NodeIndex clone = static_cast<NodeIndex>(n - 1);
    const auto team = bfs_team(net, 0, clone, 6);
    if (team.size() < 6) continue;  // departing member's component too small
    ++runs;
    KernelParams params;
    const auto result = recommend_replacement(net, team, 0, n, params, true);
    if (!result.ranking.empty() && result.ranking.front().node == clone) {
      ++wins;
    } else if (losses.size() < 120) {
      const auto it = std::find_if(result.ranking.begin(), result.ranking.end(),
                                   [&](const RankedCandidate& r) { return r.node == clone; });
      losses += " seed " + std::to_string(6000 + seed) + ": clone rank " +
                std::to_string(std::distance(result.ranking.begin(), it) + 1) + ";";
    }
  }
  return {wins == runs, "clone ranked first in " + std::to_string(wins) + "/" + std::to_string(runs) + (losses.empty() ? "" : " |" + losses)};
}

Outcome shrinkage_star() {
  std::mt19937_64 rng(7007);
  std::uniform_real_distribution<double> weight(0.05, 0.5), level(0.05, 1.0);
  int ok = 0;
  const int draws = 100;
  for (int t = 0; t < draws; ++t) {
    std::vector<UndirectedEdge> edges;
    for (NodeIndex leaf = 1; leaf <= 4; ++leaf) edges.push_back({0, leaf, weight(rng)});
    Eigen::RowVectorXd profile(3);
    for (Eigen::Index k = 0; k < 3; ++k) profile(k) = level(rng);
    profile /= profile.sum();
    const Eigen::MatrixXd L = profile.replicate(5, 1);
    const auto net = AttributedNetwork::from_parts("star", {"h", "l1", "l2", "l3", "l4"}, {"h", "l1", "l2", "l3", "l4"},
                                                   {"a", "b", "c"}, edges, L);
    const std::vector<NodeIndex> team{0, 1, 2, 3, 4};
    const auto result = recommend_shrinkage(net, team, 5, KernelParams{});
    if (!result.ranking.empty() && result.ranking.back().node == 0) ++ok;
  }
  return {ok == draws, "hub ranked last in " + std::to_string(ok) + "/" + std::to_string(draws) + " draws"};
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  return v[v.size() / 2];
}

Outcome performance() {
  const auto net = synth_network(8008, 80, 10, SynthParams{});
  std::vector<NodeIndex> a, b;
  for (NodeIndex i = 0; i < 40; ++i) {
    a.push_back(i);
    b.push_back(40 + i);
  }
  const TeamGraph G = induced_subgraph(net, a), Gp = induced_subgraph(net, b);
  KernelParams params;
  params.c = 0.05;
  std::vector<double> fast, dense;
  double kf = 0.0, kd = 0.0;
  for (int r = 0; r < 5; ++r) {
    auto t0 = Clock::now();
    const auto report = influence_report(G, Gp, params, ExplainContext{});
    fast.push_back(seconds_since(t0));
    kf = report.kernel_value;
    t0 = Clock::now();
    const DenseSystem system(PairInputs::from_teams(G, Gp, params));
    const auto all = system.all_influences();
    dense.push_back(seconds_since(t0));
    kd = all.kernel;
  }
  const double speedup = median(dense) / median(fast);
  Outcome o;
  o.pass = speedup >= 10.0 && std::abs(kf - kd) <= 1e-10 * (1.0 + std::abs(kd));
  o.detail = fmt("fast %.4f s, dense %.3f s (medians of 5), speedup %.0fx", median(fast), median(dense), speedup);
  return o;
}

std::pair<int, std::string> capture(const std::string& command) {
  std::string out;
  FILE* pipe = popen(command.c_str(), "r");
  if (!pipe) return {-1, out};
  std::array<char, 4096> buf;
  std::size_t got;
  while ((got = std::fread(buf.data(), 1, buf.size(), pipe)) > 0) out.append(buf.data(), got);
  const int status = pclose(pipe);
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, out};
}

Outcome cli_determinism() {
  const std::string data = TEAMLENS_TEST_DATA;
  const std::string net = " --nodes '" + data + "/lab.nodes.csv' --edges '" + data + "/lab.edges.csv'";
  const std::string cli = std::string("'") + TEAMLENS_CLI_PATH + "'";
  const std::string recommend =
      cli + " recommend" + net + " --scenario replace --team yu,lin,zhao,chen,sun --departing yu --k 5 2>/dev/null";
  const std::string explain_json = cli + " explain" + net +
                                   " --scenario replace --team yu,lin,zhao,chen,sun --departing yu --candidate han"
                                   " --format json 2>/dev/null";
  const std::string explain_dot = cli + " explain" + net +
                                  " --scenario replace --team yu,lin,zhao,chen,sun --departing yu --candidate han"
                                  " --format dot 2>/dev/null";
  bool ok = true;
  std::string detail;
  for (const auto& [label, cmd] : {std::pair{"recommend", recommend}, {"explain json", explain_json},
                                   {"explain dot", explain_dot}}) {
    const auto first = capture(cmd);
    const auto second = capture(cmd);
    const bool same = first.first == 0 && second.first == 0 && !first.second.empty() && first.second == second.second;
    ok = ok && same;
    detail += std::string(label) + (same ? " identical (" + std::to_string(first.second.size()) + " bytes); "
                                         : " DIFFERS or failed (exit " + std::to_string(first.first) + "); ");
  }
  return {ok, detail};
}

}  // namespace

int main() {
  struct Criterion {
    const char* name;
    Outcome (*run)();
  };
  const Criterion criteria[] = {
      {"kernel oracle equivalence", kernel_oracle},
      {"edge influence gradient check", edge_gradient},
      {"attribute influence gradient check", attribute_gradient},
      {"two-node ring fixture", ring_fixture},
      {"node influence aggregation identity", aggregation_identity},
      {"clone optimality", clone_optimality},
      {"shrinkage star sanity", shrinkage_star},
      {"fast vs dense performance", performance},
      {"CLI end-to-end determinism", cli_determinism},
  };
  int failed = 0;
  int index = 0;
  for (const auto& c : criteria) {
    ++index;
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.pass) ++failed;
    std::cout << (o.pass ? "PASS" : "FAIL") << "  criterion " << index << ": " << c.name << " -- " << o.detail
              << std::endl;
  }
  std::cout << (failed == 0 ? "all criteria passed" : std::to_string(failed) + " criterion(s) failed") << std::endl;
  return failed == 0 ? EXIT_SUCCESS : EXIT_FAILURE;
}
