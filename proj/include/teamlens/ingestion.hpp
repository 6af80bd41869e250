#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "teamlens/influence.hpp"
#include "teamlens/network.hpp"

namespace teamlens {

enum class DiagnosticKind {
  SelfLoopZeroed,
  AsymmetrySymmetrized,
  ZeroSkillRow,
  SkillRowsNormalized,
};

std::string_view diagnostic_name(DiagnosticKind kind) noexcept;

/// One mutation (or notable condition) applied while loading.
struct Diagnostic {
  DiagnosticKind kind;
  std::size_t line = 0;  // 0 when not tied to a single line
  std::string message;
};

struct LoadedNetwork {
  AttributedNetwork network;
  std::vector<Diagnostic> diagnostics;
};

/// Parses `id,name,<skills...>` and `src,dst,weight` CSV text.
///
/// Self-loops are zeroed, a pair listed in both directions with different
/// weights is averaged, and skill rows are L1-normalized; each such mutation is
/// reported. Missing skill cells count as zero.
LoadedNetwork load_network(std::string_view nodes_csv, std::string_view edges_csv, std::string name = "network");
LoadedNetwork load_network_files(const std::filesystem::path& nodes, const std::filesystem::path& edges,
                                 std::string name = "network");

/// Serializes a network back to the two CSV files. Values are written with
/// round-trip precision, so reloading gives the identical network.
std::pair<std::string, std::string> write_network_csv(const AttributedNetwork& net);

struct SynthParams {
  double edge_probability = 0.2;
  int max_weight = 3;          // integer collaboration counts in [1, max_weight]
  double count_scale = 10.0;   // weight = count / count_scale, keeps teams contractive at c = 0.1
  int skills_per_node = 2;     // nonzero skill entries per node (capped at d)
  std::optional<NodeIndex> plant_clone_of;
};

/// Deterministic random network. With `plant_clone_of = t`, node n-1 is a copy
/// of node t: same neighbors and weights, same skills, and no edge between the
/// two.
AttributedNetwork synth_network(std::uint64_t seed, std::size_t n, std::size_t d, const SynthParams& params = {});

enum class ExportFormat { Json, Dot };

std::optional<ExportFormat> parse_export_format(std::string_view text) noexcept;

/// Rounds to 12 significant digits, the precision used in exported JSON.
double round_significant(double value, int digits = 12);

/// JSON with stable keys, or DOT with one graph per side where edge penwidth
/// scales linearly from 1 to 10 with influence.
std::string export_explanation(const InfluenceReport& report, ExportFormat format);

}  // namespace teamlens
