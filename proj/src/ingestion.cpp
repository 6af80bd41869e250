#include "teamlens/ingestion.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <random>
#include <sstream>

#include "teamlens/error.hpp"

namespace teamlens {

namespace {

constexpr double kSkillRowTolerance = 1e-9;

struct Record {
  std::size_t line;
  std::vector<std::string> cells;
};

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t");
  return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split_csv_line(std::string_view line, std::size_t line_no) {
  std::vector<std::string> cells;
  std::string cell;
  bool quoted = false;
  bool was_quoted = false;
  for (std::size_t k = 0; k < line.size(); ++k) {
    const char ch = line[k];
    if (quoted) {
      if (ch == '"') {
        if (k + 1 < line.size() && line[k + 1] == '"') {
          cell.push_back('"');
          ++k;
        } else {
          quoted = false;
        }
      } else {
        cell.push_back(ch);
      }
    } else if (ch == '"') {
      quoted = true;
      was_quoted = true;
    } else if (ch == ',') {
      cells.push_back(was_quoted ? cell : trim(cell));
      cell.clear();
      was_quoted = false;
    } else {
      cell.push_back(ch);
    }
  }
  if (quoted) throw Error(ErrorCode::ParseError, "line " + std::to_string(line_no) + ": unterminated quote", line_no);
  cells.push_back(was_quoted ? cell : trim(cell));
  return cells;
}

std::vector<Record> parse_csv(std::string_view text) {
  std::vector<Record> records;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line_no == 1 && line.size() >= 3 && line.substr(0, 3) == "\xEF\xBB\xBF") line.remove_prefix(3);
    if (!trim(line).empty()) records.push_back({line_no, split_csv_line(line, line_no)});
    pos = end + 1;
  }
  return records;
}

[[noreturn]] void fail(ErrorCode code, std::size_t line, const std::string& what) {
  throw Error(code, "line " + std::to_string(line) + ": " + what, line);
}

double parse_number(const std::string& cell, std::size_t line, const char* what) {
  double value = 0.0;
  const char* begin = cell.data();
  const char* end = cell.data() + cell.size();
  if (!cell.empty() && *begin == '+') ++begin;
  const auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc() || ptr != end || cell.empty()) {
    fail(ErrorCode::ParseError, line, std::string("invalid ") + what + " '" + cell + "'");
  }
  if (!std::isfinite(value)) fail(ErrorCode::ParseError, line, std::string("non-finite ") + what);
  return value;
}

std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos && trim(s) == s) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out.push_back('"');
    out.push_back(ch);
  }
  out.push_back('"');
  return out;
}

std::string format_exact(double v) {
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

class SplitMix {
 public:
  explicit SplitMix(std::uint64_t seed) : engine_(seed) {}
  // 53-bit uniform in [0, 1); identical across standard libraries.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  std::size_t below(std::size_t n) { return static_cast<std::size_t>(uniform() * static_cast<double>(n)); }

 private:
  std::mt19937_64 engine_;
};

}  // namespace

std::string_view diagnostic_name(DiagnosticKind kind) noexcept {
  switch (kind) {
    case DiagnosticKind::SelfLoopZeroed: return "SelfLoopZeroed";
    case DiagnosticKind::AsymmetrySymmetrized: return "AsymmetrySymmetrized";
    case DiagnosticKind::ZeroSkillRow: return "ZeroSkillRow";
    case DiagnosticKind::SkillRowsNormalized: return "SkillRowsNormalized";
  }
  return "Unknown";
}

LoadedNetwork load_network(std::string_view nodes_csv, std::string_view edges_csv, std::string name) {
  std::vector<Diagnostic> diagnostics;

  const auto node_records = parse_csv(nodes_csv);
  if (node_records.empty()) throw Error(ErrorCode::ParseError, "nodes file is empty", 1);
  const auto& header = node_records.front();
  if (header.cells.size() < 3 || header.cells[0] != "id" || header.cells[1] != "name") {
    fail(ErrorCode::ParseError, header.line, "nodes header must be id,name,<skill-1>,...");
  }
  std::vector<std::string> skill_names(header.cells.begin() + 2, header.cells.end());
  for (const auto& s : skill_names) {
    if (s.empty()) fail(ErrorCode::ParseError, header.line, "empty skill name");
  }
  const auto d = static_cast<Eigen::Index>(skill_names.size());

  std::vector<std::string> ids, names;
  std::vector<std::size_t> node_lines;
  std::map<std::string, NodeIndex> index;
  Eigen::MatrixXd skills = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(node_records.size() - 1), d);
  for (std::size_t r = 1; r < node_records.size(); ++r) {
    const auto& rec = node_records[r];
    if (rec.cells.size() > static_cast<std::size_t>(d) + 2) fail(ErrorCode::ParseError, rec.line, "too many cells");
    const std::string& id = rec.cells[0];
    if (id.empty()) fail(ErrorCode::ParseError, rec.line, "empty node id");
    if (!index.emplace(id, static_cast<NodeIndex>(ids.size())).second) {
      fail(ErrorCode::ParseError, rec.line, "duplicate node id '" + id + "'");
    }
    const auto row = static_cast<Eigen::Index>(ids.size());
    ids.push_back(id);
    names.push_back(rec.cells.size() > 1 ? rec.cells[1] : id);
    node_lines.push_back(rec.line);
    for (std::size_t c = 2; c < rec.cells.size(); ++c) {
      if (rec.cells[c].empty()) continue;
      const double v = parse_number(rec.cells[c], rec.line, "skill level");
      if (v < 0.0) fail(ErrorCode::NegativeSkill, rec.line, "negative skill level for '" + id + "'");
      skills(row, static_cast<Eigen::Index>(c - 2)) = v;
    }
  }

  // Rows already summing to 1 within the network tolerance are kept verbatim so
  // that written-out networks reload unchanged.
  std::size_t rescaled = 0;
  for (Eigen::Index r = 0; r < skills.rows(); ++r) {
    const double sum = skills.row(r).sum();
    if (sum == 0.0) {
      diagnostics.push_back({DiagnosticKind::ZeroSkillRow, node_lines[r], "node '" + ids[r] + "' has no skills"});
    } else if (std::abs(sum - 1.0) > kSkillRowTolerance) {
      skills.row(r) /= sum;
      ++rescaled;
    }
  }
  if (rescaled > 0) {
    diagnostics.push_back({DiagnosticKind::SkillRowsNormalized, 0,
                           std::to_string(rescaled) + " skill rows rescaled to sum to 1"});
  }

  struct Directed {
    double weight;
    std::size_t line;
  };
  std::map<std::pair<NodeIndex, NodeIndex>, Directed> directed;
  const auto edge_records = parse_csv(edges_csv);
  if (!edge_records.empty()) {
    const auto& eh = edge_records.front();
    if (eh.cells.size() != 3 || eh.cells[0] != "src" || eh.cells[1] != "dst" || eh.cells[2] != "weight") {
      fail(ErrorCode::ParseError, eh.line, "edges header must be src,dst,weight");
    }
  }
  for (std::size_t r = 1; r < edge_records.size(); ++r) {
    const auto& rec = edge_records[r];
    if (rec.cells.size() != 3) fail(ErrorCode::ParseError, rec.line, "expected src,dst,weight");
    const auto lookup = [&](const std::string& id) {
      auto it = index.find(id);
      if (it == index.end()) fail(ErrorCode::UnknownNodeRef, rec.line, "unknown node '" + id + "'");
      return it->second;
    };
    const NodeIndex a = lookup(rec.cells[0]);
    const NodeIndex b = lookup(rec.cells[1]);
    const double w = parse_number(rec.cells[2], rec.line, "weight");
    if (w < 0.0) fail(ErrorCode::NegativeWeight, rec.line, "negative weight " + rec.cells[2]);
    if (a == b) {
      diagnostics.push_back({DiagnosticKind::SelfLoopZeroed, rec.line, "self-loop on '" + ids[a] + "' zeroed"});
      continue;
    }
    if (!directed.emplace(std::pair{a, b}, Directed{w, rec.line}).second) {
      fail(ErrorCode::ParseError, rec.line, "edge " + ids[a] + "," + ids[b] + " listed twice");
    }
  }

  std::vector<UndirectedEdge> edges;
  for (const auto& [key, fwd] : directed) {
    const auto [a, b] = key;
    auto back = directed.find({b, a});
    if (back == directed.end()) {
      edges.push_back({a, b, fwd.weight});
      continue;
    }
    if (a > b) continue;  // handled from the other direction
    double w = fwd.weight;
    if (back->second.weight != fwd.weight) {
      w = 0.5 * (fwd.weight + back->second.weight);
      diagnostics.push_back({DiagnosticKind::AsymmetrySymmetrized, std::max(fwd.line, back->second.line),
                             "weights of " + ids[a] + "," + ids[b] + " differ by direction; averaged to " +
                                 format_exact(w)});
    }
    edges.push_back({a, b, w});
  }

  auto net = AttributedNetwork::from_parts(std::move(name), std::move(ids), std::move(names),
                                           std::move(skill_names), edges, std::move(skills));
  return {std::move(net), std::move(diagnostics)};
}

LoadedNetwork load_network_files(const std::filesystem::path& nodes, const std::filesystem::path& edges,
                                 std::string name) {
  return load_network(read_file(nodes), read_file(edges), std::move(name));
}

std::pair<std::string, std::string> write_network_csv(const AttributedNetwork& net) {
  std::string nodes = "id,name";
  for (const auto& s : net.skill_names()) nodes += "," + csv_escape(s);
  nodes += "\n";
  for (std::size_t i = 0; i < net.size(); ++i) {
    nodes += csv_escape(net.node_ids()[i]) + "," + csv_escape(net.display_names()[i]);
    for (Eigen::Index k = 0; k < net.skills().cols(); ++k) nodes += "," + format_exact(net.skills()(i, k));
    nodes += "\n";
  }
  std::string edges = "src,dst,weight\n";
  for (std::size_t i = 0; i < net.size(); ++i) {
    for (const auto& nb : net.neighbors(static_cast<NodeIndex>(i))) {
      if (nb.index <= static_cast<NodeIndex>(i)) continue;
      edges += csv_escape(net.node_ids()[i]) + "," + csv_escape(net.node_ids()[nb.index]) + "," +
               format_exact(nb.weight) + "\n";
    }
  }
  return {std::move(nodes), std::move(edges)};
}

AttributedNetwork synth_network(std::uint64_t seed, std::size_t n, std::size_t d, const SynthParams& params) {
  if (n < 1 || d < 1) throw Error(ErrorCode::ValidationError, "synthetic network needs n >= 1 and d >= 1");
  const bool plant = params.plant_clone_of.has_value();
  if (plant && (n < 2 || *params.plant_clone_of < 0 || static_cast<std::size_t>(*params.plant_clone_of) >= n - 1)) {
    throw Error(ErrorCode::ValidationError, "plant_clone_of must index one of the first n-1 nodes");
  }
  if (params.max_weight < 1 || !(params.count_scale > 0.0) || params.edge_probability < 0.0 || params.edge_probability > 1.0) {
    throw Error(ErrorCode::ValidationError, "invalid synthetic model parameters");
  }

  SplitMix rng(seed);
  const std::size_t base = plant ? n - 1 : n;
  Eigen::MatrixXd W = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < base; ++i) {
    for (std::size_t j = i + 1; j < base; ++j) {
      if (rng.uniform() < params.edge_probability) {
        const double w = (1.0 + static_cast<double>(rng.below(static_cast<std::size_t>(params.max_weight)))) /
                         params.count_scale;
        W(i, j) = W(j, i) = w;
      }
    }
  }

  Eigen::MatrixXd L = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
  const std::size_t per_node = std::min<std::size_t>(std::max(params.skills_per_node, 1), d);
  std::vector<std::size_t> order(d);
  for (std::size_t i = 0; i < base; ++i) {
    for (std::size_t k = 0; k < d; ++k) order[k] = k;
    for (std::size_t k = 0; k < per_node; ++k) {
      const std::size_t pick = k + rng.below(d - k);
      std::swap(order[k], order[pick]);
      L(i, order[k]) = 0.5 + rng.uniform();
    }
  }
  normalize_skill_rows(L);

  if (plant) {
    const auto t = static_cast<Eigen::Index>(*params.plant_clone_of);
    const auto c = static_cast<Eigen::Index>(n - 1);
    W.row(c) = W.row(t);
    W.col(c) = W.row(t).transpose();
    W(c, c) = 0.0;
    W(c, t) = W(t, c) = 0.0;
    L.row(c) = L.row(t);
  }

  std::vector<std::string> ids, names, skill_names;
  for (std::size_t i = 0; i < n; ++i) {
    ids.push_back("n" + std::to_string(i));
    names.push_back("Member " + std::to_string(i));
  }
  for (std::size_t k = 0; k < d; ++k) skill_names.push_back("skill" + std::to_string(k));
  std::vector<UndirectedEdge> edges;
  for (Eigen::Index i = 0; i < W.rows(); ++i) {
    for (Eigen::Index j = i + 1; j < W.cols(); ++j) {
      if (W(i, j) > 0.0) edges.push_back({i, j, W(i, j)});
    }
  }
  return AttributedNetwork::from_parts("synth-" + std::to_string(seed), std::move(ids), std::move(names),
                                       std::move(skill_names), edges, std::move(L));
}

}  // namespace teamlens
