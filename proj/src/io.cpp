#include "subadapt/io.hpp"

#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "subadapt/errors.hpp"

namespace subadapt {

using nlohmann::json;

namespace {

template <class Fn>
auto guarded(const char* what, Fn&& fn) {
  try {
    return fn();
  } catch (const json::exception& e) {
    throw ConfigError(std::string(what) + ": " + e.what());
  }
}

std::string header(const CsvMeta& meta) {
  char buf[160];
  std::snprintf(buf, sizeof buf, "# config_hash: %016" PRIx64 "\n# master_seed: %" PRIu64 "\n",
                meta.config_hash, meta.master_seed);
  std::string out = buf;
  out += "# tool_version: " + meta.tool_version + "\n";
  if (!meta.kind.empty()) out += "# kind: " + meta.kind + "\n";
  return out;
}

}  // namespace

json matrix_to_json(const CMatrix& m) {
  json re = json::array(), im = json::array();
  for (Index r = 0; r < m.rows(); ++r)
    for (Index c = 0; c < m.cols(); ++c) {
      re.push_back(m(r, c).real());
      im.push_back(m(r, c).imag());
    }
  return {{"rows", m.rows()}, {"cols", m.cols()}, {"re", re}, {"im", im}};
}

CMatrix matrix_from_json(const json& j) {
  return guarded("matrix", [&] {
    const auto rows = j.at("rows").get<Index>();
    const auto cols = j.at("cols").get<Index>();
    const auto re = j.at("re").get<std::vector<double>>();
    const std::vector<double> im = j.contains("im") ? j.at("im").get<std::vector<double>>()
                                                    : std::vector<double>(re.size(), 0.0);
    if (rows < 0 || cols < 0 || re.size() != static_cast<std::size_t>(rows * cols) || im.size() != re.size())
      throw ConfigError("matrix: entry count does not match rows x cols");
    CMatrix m(rows, cols);
    std::size_t n = 0;
    for (Index r = 0; r < rows; ++r)
      for (Index c = 0; c < cols; ++c, ++n) m(r, c) = cplx(re[n], im[n]);
    return m;
  });
}

RMatrix real_matrix_from_json(const json& j) {
  const CMatrix m = matrix_from_json(j);
  if (m.imag().cwiseAbs().maxCoeff() > 0.0) throw ConfigError("matrix: expected real entries");
  return m.real();
}

json topology_to_json(const Topology& t) {
  json edges = json::array();
  for (const auto& [k, l] : t.edges()) edges.push_back({k + 1, l + 1});
  return {{"block_sizes", t.block_sizes()}, {"edges", edges}};
}

TopologyPtr topology_from_json(const json& j) {
  return guarded("topology", [&] {
    const auto sizes = j.at("block_sizes").get<std::vector<Index>>();
    std::vector<Topology::Edge> edges;
    for (const auto& e : j.at("edges")) {
      const auto k = e.at(0).get<Index>();
      const auto l = e.at(1).get<Index>();
      edges.emplace_back(k - 1, l - 1);
    }
    return std::make_shared<const Topology>(Topology::from_edges(sizes, edges));
  });
}

json subspace_to_json(const Subspace& s) {
  return {{"block_sizes", s.block_sizes}, {"basis", matrix_to_json(s.basis)}};
}

Subspace subspace_from_json(const json& j) {
  return guarded("subspace", [&] {
    return Subspace(matrix_from_json(j.at("basis")), j.at("block_sizes").get<std::vector<Index>>());
  });
}

json combiner_to_json(const BlockMatrix& a) {
  json blocks = json::array();
  for (const auto& [key, blk] : a.blocks()) {
    json e = matrix_to_json(blk);
    blocks.push_back({{"k", key.first + 1}, {"l", key.second + 1}, {"re", e["re"]}, {"im", e["im"]}});
  }
  return {{"topology", topology_to_json(a.topology())}, {"blocks", blocks}};
}

BlockMatrix combiner_from_json(const json& j) {
  return guarded("combiner", [&] {
    TopologyPtr t = topology_from_json(j.at("topology"));
    BlockMatrix a(t);
    for (const auto& b : j.at("blocks")) {
      const Index k = b.at("k").get<Index>() - 1;
      const Index l = b.at("l").get<Index>() - 1;
      if (k < 0 || l < 0 || k >= t->n_agents() || l >= t->n_agents())
        throw ConfigError("combiner: block index out of range");
      json m = {{"rows", t->block_size(k)}, {"cols", t->block_size(l)}, {"re", b.at("re")}, {"im", b.at("im")}};
      a.set_block(k, l, matrix_from_json(m));
    }
    return a;
  });
}

json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write " + path.string());
  out << text;
}

std::uint64_t fnv1a(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string trajectory_csv(const Trajectory& traj, const CsvMeta& meta) {
  std::string out = header(meta);
  out += "# variant: " + to_string(traj.meta.variant) + "\n";
  out += "# mu: " + format_double(traj.meta.mu) + "\n";
  out += "# run: " + std::to_string(traj.meta.seed) + "\n";
  out += "iter,agent,sq_error\n";
  for (std::size_t j = 0; j < traj.iterations.size(); ++j)
    for (Index k = 0; k < traj.sq_error.cols(); ++k)
      out += std::to_string(traj.iterations[j]) + "," + std::to_string(k + 1) + "," +
             format_double(traj.sq_error(static_cast<Index>(j), k)) + "\n";
  return out;
}

std::string msd_csv(const EnsembleStats& stats, const CsvMeta& meta) {
  std::string out = header(meta);
  out += "# runs: " + std::to_string(stats.num_runs) + "\n";
  out += "# steady_state_msd: " + format_double(stats.steady_state_msd) + "\n";
  out += "# steady_state_stderr: " + format_double(stats.steady_state_stderr) + "\n";
  out += std::string("# stderr_defined: ") + (stats.stderr_defined ? "true" : "false") + "\n";
  out += std::string("# plateau_reached: ") + (stats.plateau_reached ? "true" : "false") + "\n";
  out += "iter,msd,stderr\n";
  for (std::size_t j = 0; j < stats.iterations.size(); ++j) {
    const auto jj = static_cast<Index>(j);
    out += std::to_string(stats.iterations[j]) + "," + format_double(stats.msd(jj)) + "," +
           format_double(stats.stderr_(jj)) + "\n";
  }
  return out;
}

std::string sinr_csv(const SeriesStats& sinr, const CsvMeta& meta) {
  // The mean is taken on the linear ratio; the standard error is mapped through
  // the first-order dB derivative.
  std::string out = header(meta);
  out += "iter,sinr_db,stderr\n";
  for (std::size_t j = 0; j < sinr.iterations.size(); ++j) {
    const auto jj = static_cast<Index>(j);
    const double mean = sinr.mean(jj);
    const double err_db = mean > 0.0 ? 10.0 / std::log(10.0) * sinr.stderr_(jj) / mean : 0.0;
    out += std::to_string(sinr.iterations[j]) + "," + format_double(to_db(mean)) + "," + format_double(err_db) +
           "\n";
  }
  return out;
}

std::string scaling_csv(const ScalingResult& result, const CsvMeta& meta) {
  std::string out = header(meta);
  out += "mu,msd,stderr\n";
  for (const auto& p : result.points)
    out += format_double(p.mu) + "," + format_double(p.msd) + "," + format_double(p.stderr_) + "\n";
  out += "# slope: " + (result.slope_valid ? format_double(result.slope) : std::string("skipped")) + "\n";
  return out;
}

std::string agent_csv(const std::vector<AgentPlateau>& table, const CsvMeta& meta) {
  std::string out = header(meta);
  out += "agent,mse,stderr\n";
  for (const auto& row : table)
    out += std::to_string(row.agent + 1) + "," + format_double(row.mse) + "," + format_double(row.stderr_) + "\n";
  return out;
}

}  // namespace subadapt
