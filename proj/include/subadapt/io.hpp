#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"

#include "subadapt/combiner.hpp"
#include "subadapt/metrics.hpp"
#include "subadapt/subspace.hpp"
#include "subadapt/topology.hpp"

namespace subadapt {

inline constexpr const char* kToolVersion = "0.1.0";

/// Matrices are {"rows", "cols", "re": [...], "im": [...]} in row-major order.
nlohmann::json matrix_to_json(const CMatrix& m);
CMatrix matrix_from_json(const nlohmann::json& j);
RMatrix real_matrix_from_json(const nlohmann::json& j);

/// {"block_sizes": [...], "edges": [[k, l], ...]} with one-based agent ids.
nlohmann::json topology_to_json(const Topology& t);
TopologyPtr topology_from_json(const nlohmann::json& j);

nlohmann::json subspace_to_json(const Subspace& s);
Subspace subspace_from_json(const nlohmann::json& j);

/// {"topology": ..., "blocks": [{"k", "l", "re", "im"}, ...]}, one-based ids,
/// block entries row-major.
nlohmann::json combiner_to_json(const BlockMatrix& a);
BlockMatrix combiner_from_json(const nlohmann::json& j);

/// Throws ConfigError on unreadable files or malformed JSON.
nlohmann::json read_json(const std::filesystem::path& path);
void write_text(const std::filesystem::path& path, const std::string& text);

/// 64-bit FNV-1a.
std::uint64_t fnv1a(const std::string& text);

/// Provenance written as leading '#' lines of every CSV.
struct CsvMeta {
  std::uint64_t config_hash = 0;
  std::uint64_t master_seed = 0;
  std::string tool_version = kToolVersion;
  std::string kind;
};

/// Round-trip decimal representation ("%.17g", C locale).
std::string format_double(double x);

/// One row per (recorded iteration, agent); agents are one-based.
std::string trajectory_csv(const Trajectory& traj, const CsvMeta& meta);
std::string msd_csv(const EnsembleStats& stats, const CsvMeta& meta);
std::string sinr_csv(const SeriesStats& sinr, const CsvMeta& meta);
std::string scaling_csv(const ScalingResult& result, const CsvMeta& meta);
std::string agent_csv(const std::vector<AgentPlateau>& table, const CsvMeta& meta);

}  // namespace subadapt
