#include <cmath>
#include <regex>

#include <gtest/gtest.h>

#include "json.hpp"

#include "teamlens/error.hpp"
#include "teamlens/influence.hpp"
#include "teamlens/ingestion.hpp"
#include "teamlens/json_text.hpp"
#include "teamlens/recommender.hpp"

namespace teamlens {
namespace {

Error load_error(const std::string& nodes, const std::string& edges) {
  try {
    load_network(nodes, edges);
  } catch (const Error& e) {
    return e;
  }
  ADD_FAILURE() << "load succeeded";
  return Error(ErrorCode::ValidationError, "none");
}

bool has(const LoadedNetwork& loaded, DiagnosticKind kind) {
  for (const auto& d : loaded.diagnostics)
    if (d.kind == kind) return true;
  return false;
}

void expect_invariants(const AttributedNetwork& net) {
  const Eigen::MatrixXd W = net.dense_adjacency();
  EXPECT_EQ(W, W.transpose());
  EXPECT_EQ(W.diagonal().cwiseAbs().sum(), 0.0);
  EXPECT_GE(W.minCoeff(), 0.0);
  EXPECT_TRUE(W.allFinite());
  for (Eigen::Index i = 0; i < net.skills().rows(); ++i) {
    const double s = net.skills().row(i).sum();
    EXPECT_TRUE(s == 0.0 || std::abs(s - 1.0) <= 1e-9);
    EXPECT_GE(net.skills().row(i).minCoeff(), 0.0);
  }
}

TEST(Load, SingleNodeNormalized) {
  const auto loaded = load_network("id,name,databases,data mining\na,Ann,1,1\n", "src,dst,weight\n");
  ASSERT_EQ(loaded.network.size(), 1u);
  EXPECT_EQ(loaded.network.skills()(0, 0), 0.5);
  EXPECT_EQ(loaded.network.skills()(0, 1), 0.5);
  EXPECT_EQ(loaded.network.skill_names()[1], "data mining");
  EXPECT_TRUE(has(loaded, DiagnosticKind::SkillRowsNormalized));
}

TEST(Load, AsymmetricPairsAveraged) {
  const auto loaded = load_network("id,name,s\na,A,1\nb,B,1\n", "src,dst,weight\na,b,2\nb,a,4\n");
  EXPECT_EQ(loaded.network.weight(0, 1), 3.0);
  EXPECT_EQ(loaded.network.weight(1, 0), 3.0);
  EXPECT_TRUE(has(loaded, DiagnosticKind::AsymmetrySymmetrized));
  const auto agree = load_network("id,name,s\na,A,1\nb,B,1\n", "src,dst,weight\na,b,2\nb,a,2\n");
  EXPECT_FALSE(has(agree, DiagnosticKind::AsymmetrySymmetrized));
  EXPECT_TRUE(agree.diagnostics.empty());
}

TEST(Load, SelfLoopZeroed) {
  const auto loaded = load_network("id,name,s\na,A,1\n", "src,dst,weight\na,a,5\n");
  EXPECT_EQ(loaded.network.edge_count(), 0u);
  ASSERT_TRUE(has(loaded, DiagnosticKind::SelfLoopZeroed));
  EXPECT_EQ(loaded.diagnostics.front().line, 2u);
}

TEST(Load, ZeroSkillRowAndMissingCells) {
  const auto loaded = load_network("id,name,s,t\na,A,,\nb,B,0.3\n", "src,dst,weight\n");
  EXPECT_EQ(loaded.network.skills().row(0).sum(), 0.0);
  EXPECT_EQ(loaded.network.skills()(1, 0), 1.0);
  EXPECT_TRUE(has(loaded, DiagnosticKind::ZeroSkillRow));
}

TEST(Load, QuotedFields) {
  const auto loaded = load_network("id,name,s\n\"a,1\",\"Doe, \"\"J\"\"\",1\n", "src,dst,weight\n");
  EXPECT_EQ(loaded.network.node_ids()[0], "a,1");
  EXPECT_EQ(loaded.network.display_names()[0], "Doe, \"J\"");
}

TEST(Load, Errors) {
  auto e = load_error("id,name,s\na,A,1\nb,B,1\n", "src,dst,weight\na,b,-1\n");
  EXPECT_EQ(e.code(), ErrorCode::NegativeWeight);
  EXPECT_EQ(e.line(), 2u);
  e = load_error("id,name,s\na,A,-1\n", "src,dst,weight\n");
  EXPECT_EQ(e.code(), ErrorCode::NegativeSkill);
  EXPECT_EQ(e.line(), 2u);
  e = load_error("id,name,s\na,A,1\n", "src,dst,weight\na,zz,1\n");
  EXPECT_EQ(e.code(), ErrorCode::UnknownNodeRef);
  e = load_error("id,name,s\na,A,x\n", "src,dst,weight\n");
  EXPECT_EQ(e.code(), ErrorCode::ParseError);
  EXPECT_EQ(e.line(), 2u);
  e = load_error("ident,name,s\na,A,1\n", "src,dst,weight\n");
  EXPECT_EQ(e.code(), ErrorCode::ParseError);
  e = load_error("id,name,s\na,A,1\nb,B,1\n", "src,dst,weight\na,b,1\na,b,2\n");
  EXPECT_EQ(e.code(), ErrorCode::ParseError);
  EXPECT_EQ(e.line(), 3u);
  e = load_error("id,name,s\na,A,1\na,B,1\n", "src,dst,weight\n");
  EXPECT_EQ(e.code(), ErrorCode::ParseError);
  EXPECT_EQ(e.line(), 3u);
  e = load_error("id,name,s\na,A,1\nb,B,1\n", "src,dst,weight\na,b\n");
  EXPECT_EQ(e.code(), ErrorCode::ParseError);
}

TEST(Synth, DeterministicAndValid) {
  const auto a = write_network_csv(synth_network(7, 6, 3));
  const auto b = write_network_csv(synth_network(7, 6, 3));
  EXPECT_EQ(a, b);
  for (std::uint64_t seed = 0; seed < 100; ++seed) expect_invariants(synth_network(seed, 15, 4));
}

TEST(Synth, PlantedClone) {
  SynthParams sp;
  sp.plant_clone_of = 2;
  const auto net = synth_network(7, 12, 3, sp);
  const Eigen::MatrixXd W = net.dense_adjacency();
  EXPECT_EQ(net.skills().row(2), net.skills().row(11));
  EXPECT_EQ(W(2, 11), 0.0);
  for (Eigen::Index j = 0; j < 11; ++j)
    if (j != 2) EXPECT_EQ(W(2, j), W(11, j));
  sp.plant_clone_of = 11;
  EXPECT_THROW(synth_network(7, 12, 3, sp), Error);
}

TEST(Synth, CsvRoundTrip) {
  SynthParams sp;
  sp.plant_clone_of = 1;
  const auto net = synth_network(99, 20, 5, sp);
  const auto [nodes, edges] = write_network_csv(net);
  const auto back = load_network(nodes, edges);
  EXPECT_TRUE(back.diagnostics.empty());
  EXPECT_EQ(back.network.dense_adjacency(), net.dense_adjacency());
  EXPECT_EQ(back.network.skills(), net.skills());
  EXPECT_EQ(back.network.node_ids(), net.node_ids());
  expect_invariants(back.network);
  EXPECT_EQ(write_network_csv(back.network), std::make_pair(nodes, edges));
}

AttributedNetwork ring() {
  return load_network("id,name,skill\na,Ann,1\nb,Bo,1\n", "src,dst,weight\na,b,1\n").network;
}

InfluenceReport ring_report(double c = 0.1) {
  const auto net = ring();
  const std::vector<NodeIndex> team{0, 1};
  if (c > 0.0) {
    KernelParams p;
    p.c = c;
    return explain_pair(net, team, {}, p);
  }
  const TeamGraph g = induced_subgraph(net, team);
  PairInputs in = PairInputs::from_teams(g, g, KernelParams{});
  in.c = 0.0;
  return influence_report(in, g, g, KernelParams{}, ExplainContext{});
}

TEST(Export, RingDotHasOneFullWidthEdgePerGraph) {
  const auto dot = export_explanation(ring_report(), ExportFormat::Dot);
  const std::regex edge_line(R"(\"a\" -- \"b\" \[penwidth=10\.0, label=\"0\.0309\"\];)");
  const auto begin = std::sregex_iterator(dot.begin(), dot.end(), edge_line);
  EXPECT_EQ(std::distance(begin, std::sregex_iterator()), 2);
  EXPECT_NE(dot.find("graph before {"), std::string::npos);
  EXPECT_NE(dot.find("graph after {"), std::string::npos);
  EXPECT_EQ(dot, export_explanation(ring_report(), ExportFormat::Dot));
}

TEST(Export, ZeroInfluenceFallsBackToUnitWidth) {
  const auto dot = export_explanation(ring_report(0.0), ExportFormat::Dot);
  EXPECT_EQ(dot.find("penwidth=10"), std::string::npos);
  EXPECT_NE(dot.find("penwidth=1.0,"), std::string::npos);
}

TEST(Export, PenwidthIsLinearInScore) {
  std::vector<UndirectedEdge> edges{{0, 1, 0.3}, {1, 2, 0.1}, {0, 2, 0.2}, {2, 3, 0.4}};
  Eigen::MatrixXd L(4, 2);
  L << 1, 0, 0.5, 0.5, 0, 1, 0.3, 0.7;
  const auto net = AttributedNetwork::from_parts("w", {"a", "b", "c", "d"}, {"a", "b", "c", "d"}, {"x", "y"}, edges, L);
  const std::vector<NodeIndex> team{0, 1, 2, 3};
  const auto report = explain_pair(net, team, {}, KernelParams{});
  const auto dot = export_explanation(report, ExportFormat::Dot);
  const double max = report.edge_influence_G.maxCoeff();
  const std::regex edge_line(R"(\"(\w)\" -- \"(\w)\" \[penwidth=([0-9.]+), label=\"([^\"]+)\"\];)");
  int seen = 0;
  for (auto it = std::sregex_iterator(dot.begin(), dot.end(), edge_line); it != std::sregex_iterator() && seen < 4;
       ++it, ++seen) {
    const int i = (*it)[1].str()[0] - 'a', j = (*it)[2].str()[0] - 'a';
    const double score = report.edge_influence_G(i, j);
    EXPECT_NEAR(std::stod((*it)[3].str()), 1.0 + 9.0 * score / max, 1e-3);
    char label[32];
    std::snprintf(label, sizeof label, "%.3g", score);
    EXPECT_EQ((*it)[4].str(), label);
  }
  EXPECT_EQ(seen, 4);
}

TEST(Export, JsonSchemaAndRoundTrip) {
  const auto report = ring_report();
  const auto text = export_explanation(report, ExportFormat::Json);
  const auto doc = nlohmann::json::parse(text);
  EXPECT_NEAR(doc.at("kernel").get<double>(), 1.0 / 3.6, 1e-12);
  EXPECT_EQ(doc.at("scenario"), "raw-pair");
  for (const char* side : {"before", "after"}) {
    const auto& g = doc.at("graphs").at(side);
    ASSERT_EQ(g.at("members").size(), 2u);
    for (const auto& m : g.at("members")) {
      EXPECT_TRUE(m.at("id").is_string());
      EXPECT_TRUE(m.at("name").is_string());
      EXPECT_TRUE(m.at("node_influence").is_number());
      EXPECT_TRUE(m.at("skills").is_object());
      EXPECT_TRUE(m.at("skill_influence").is_object());
    }
    ASSERT_EQ(g.at("edges").size(), 1u);
    const auto& e = g.at("edges")[0];
    EXPECT_EQ(e.at("src"), "a");
    EXPECT_EQ(e.at("dst"), "b");
    EXPECT_EQ(e.at("weight").get<double>(), 1.0);
    EXPECT_NEAR(e.at("influence").get<double>(), 0.4 / 12.96, 1e-12);
  }
  // Every number survives at 12 significant digits.
  const double k = doc.at("kernel").get<double>();
  EXPECT_EQ(k, round_significant(report.kernel_value));
  EXPECT_EQ(doc["graphs"]["after"]["members"][1]["skill_influence"]["skill"].get<double>(),
            round_significant(report.attr_influence_Gp(1, 0)));
  EXPECT_EQ(text, export_explanation(report, ExportFormat::Json));
}

TEST(Export, FormatParsing) {
  EXPECT_EQ(parse_export_format("json"), ExportFormat::Json);
  EXPECT_EQ(parse_export_format("dot"), ExportFormat::Dot);
  EXPECT_FALSE(parse_export_format("png").has_value());
  EXPECT_EQ(round_significant(0.1234567890123456), 0.123456789012);
}

TEST(JsonText, MatchesDumpLayout) {
  const nlohmann::ordered_json doc = {{"a", 1},
                                      {"b", {1.5, "x", nullptr, true}},
                                      {"c", nlohmann::ordered_json::object()},
                                      {"d", nlohmann::ordered_json::array()},
                                      {"e", {{"f", "g\"h"}}},
                                      {"n", 10.0}};
  EXPECT_EQ(json_text(doc), doc.dump(2) + "\n");
}

TEST(JsonText, ShortestRoundTripFloats) {
  const double score = round_significant(0.021176986810899998);
  const auto text = json_text(nlohmann::ordered_json{{"score", score}});
  EXPECT_EQ(text, "{\n  \"score\": 0.0211769868109\n}\n");
  EXPECT_EQ(nlohmann::json::parse(text)["score"].get<double>(), score);
  EXPECT_EQ(json_text(nlohmann::ordered_json{{"x", std::nan("")}}), "{\n  \"x\": null\n}\n");
}

}  // namespace
}  // namespace teamlens
