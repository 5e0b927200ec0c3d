#include "subadapt/config.hpp"

#include <cmath>

#include "subadapt/errors.hpp"
#include "subadapt/io.hpp"
#include "subadapt/rng.hpp"

namespace subadapt {

using nlohmann::json;

namespace {

template <class T>
T get_or(const json& j, const char* key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("field '") + key + "': " + e.what());
  }
}

const json& section(const json& doc, const char* name) {
  static const json empty = json::object();
  if (!doc.contains(name)) return empty;
  if (!doc.at(name).is_object()) throw ConfigError(std::string("section '") + name + "' must be an object");
  return doc.at(name);
}

std::vector<Index> block_sizes_of(const json& t) {
  if (t.contains("block_sizes")) return get_or<std::vector<Index>>(t, "block_sizes", {});
  const auto n = get_or<Index>(t, "n_agents", 0);
  const auto dim = get_or<Index>(t, "dim", 1);
  if (n < 1 || dim < 1) throw ConfigError("topology: need n_agents >= 1 and dim >= 1, or block_sizes");
  return std::vector<Index>(static_cast<std::size_t>(n), dim);
}

TopologyPtr topology_from_section(const json& t) {
  const auto sizes = block_sizes_of(t);
  const auto n = static_cast<Index>(sizes.size());
  const std::string kind = get_or<std::string>(t, "kind", t.contains("edges") ? "edges" : "ring");
  std::vector<Topology::Edge> edges;
  if (kind == "edges") {
    for (const auto& e : t.at("edges")) {
      const auto k = e.at(0).get<Index>() - 1;
      const auto l = e.at(1).get<Index>() - 1;
      if (k < 0 || l < 0 || k >= n || l >= n) throw ConfigError("topology: edge endpoint out of range");
      edges.emplace_back(k, l);
    }
  } else if (kind == "ring" || kind == "line") {
    for (Index k = 0; k + 1 < n; ++k) edges.emplace_back(k, k + 1);
    if (kind == "ring" && n > 2) edges.emplace_back(n - 1, 0);
  } else if (kind == "fully_connected") {
    return std::make_shared<const Topology>(Topology::fully_connected(sizes));
  } else if (kind == "random_geometric") {
    // Seeded unit-square geometric graph; the radius grows until connected.
    ComplexGaussian g(stream_key(get_or<std::uint64_t>(t, "seed", 0), {0x746f706fULL}));
    std::vector<std::pair<double, double>> pts;
    for (Index k = 0; k < n; ++k) {
      const double x = g.uniform();
      pts.emplace_back(x, g.uniform());
    }
    double radius = get_or<double>(t, "radius", 0.4);
    for (;;) {
      edges.clear();
      for (Index k = 0; k < n; ++k)
        for (Index l = k + 1; l < n; ++l) {
          const double dx = pts[static_cast<std::size_t>(k)].first - pts[static_cast<std::size_t>(l)].first;
          const double dy = pts[static_cast<std::size_t>(k)].second - pts[static_cast<std::size_t>(l)].second;
          if (std::hypot(dx, dy) <= radius) edges.emplace_back(k, l);
        }
      const Topology candidate = Topology::from_edges(sizes, edges);
      if (is_connected(candidate)) return std::make_shared<const Topology>(candidate);
      radius *= 1.1;
    }
  } else {
    throw ConfigError("topology: unknown kind '" + kind + "'");
  }
  return std::make_shared<const Topology>(Topology::from_edges(sizes, edges));
}

Index uniform_dim(const Topology& t, const char* what) {
  const auto& s = t.block_sizes();
  for (Index b : s)
    if (b != s.front()) throw ConfigError(std::string(what) + " requires equal block sizes");
  return s.front();
}

CMatrix random_covariance(ComplexGaussian& g, Index dim, double lo, double hi) {
  CMatrix raw(dim, dim);
  for (Index r = 0; r < dim; ++r)
    for (Index c = 0; c < dim; ++c) raw(r, c) = g();
  Eigen::HouseholderQR<CMatrix> qr(raw);
  const CMatrix q = qr.householderQ() * CMatrix::Identity(dim, dim);
  RVector eig(dim);
  for (Index i = 0; i < dim; ++i) eig(i) = lo + (hi - lo) * g.uniform();
  return hermitian_part(q * eig.cast<cplx>().asDiagonal() * q.adjoint());
}

Scenario regression_scenario(const ExperimentConfig& cfg, const json& sc, std::uint64_t master_seed) {
  const ConstraintProblem problem = build_constraint_problem(cfg);
  const Topology& t = *problem.topology;
  const std::string stream_kind = get_or<std::string>(sc, "stream", "mse");
  StreamKind kind;
  if (stream_kind == "mse")
    kind = StreamKind::MseRegression;
  else if (stream_kind == "min_variance")
    kind = StreamKind::MinimumVariance;
  else
    throw ConfigError("scenario: unknown stream '" + stream_kind + "'");

  ComplexGaussian g(stream_key(get_or<std::uint64_t>(sc, "data_seed", 0), {0x64617461ULL}));
  const std::string cov = get_or<std::string>(sc, "covariance", "random");
  const double lo = get_or<double>(sc, "eig_min", 0.5);
  const double hi = get_or<double>(sc, "eig_max", 1.5);
  if (!(lo > 0.0) || hi < lo) throw ConfigError("scenario: need 0 < eig_min <= eig_max");
  std::vector<CMatrix> covs;
  for (Index k = 0; k < t.n_agents(); ++k) {
    const Index d = t.block_size(k);
    if (cov == "identity")
      covs.push_back(hi * CMatrix::Identity(d, d));
    else if (cov == "random")
      covs.push_back(random_covariance(g, d, lo, hi));
    else
      throw ConfigError("scenario: unknown covariance '" + cov + "'");
  }

  std::vector<CVector> w_ref;
  const std::string ref = get_or<std::string>(sc, "w_ref", "random");
  if (ref == "common") {
    const CVector common = g.vector(uniform_dim(t, "w_ref = common"));
    for (Index k = 0; k < t.n_agents(); ++k) w_ref.push_back(common);
  } else if (ref == "random") {
    for (Index k = 0; k < t.n_agents(); ++k) w_ref.push_back(g.vector(t.block_size(k)));
  } else if (ref == "zero") {
    for (Index k = 0; k < t.n_agents(); ++k) w_ref.push_back(CVector::Zero(t.block_size(k)));
  } else {
    throw ConfigError("scenario: unknown w_ref '" + ref + "'");
  }
  const double noise_var = get_or<double>(sc, "noise_var", 0.01);
  if (noise_var < 0.0) throw ConfigError("scenario: noise_var must be nonnegative");

  Scenario out;
  out.topology = problem.topology;
  out.subspace = problem.subspace;
  out.affine = problem.affine;
  auto stream = std::make_shared<RegressionStream>(kind, std::move(covs), std::move(w_ref), noise_var, master_seed);
  out.costs = stream->induced_costs();
  out.stream = stream;
  out.w_opt = network_optimum(out.costs, out.subspace, out.affine);
  return out;
}

ULAScenario ula_from_section(const json& sc) {
  ULAScenario u;
  u.n_antennas = get_or<Index>(sc, "n_antennas", u.n_antennas);
  u.nu = get_or<Index>(sc, "nu", u.nu);
  u.doas = get_or<std::vector<double>>(sc, "doas", u.doas);
  u.powers = get_or<std::vector<double>>(sc, "powers", u.powers);
  if (sc.contains("noise_std")) {
    const double s = get_or<double>(sc, "noise_std", 0.7);
    u.noise_var = s * s;
  }
  u.noise_var = get_or<double>(sc, "noise_var", u.noise_var);
  u.spacing_ratio = get_or<double>(sc, "spacing_ratio", u.spacing_ratio);
  u.constraint_doas = get_or<std::vector<double>>(sc, "constraint_doas", u.constraint_doas);
  u.constraint_gains = get_or<std::vector<double>>(sc, "constraint_gains", u.constraint_gains);
  u.validate();
  return u;
}

}  // namespace

ExperimentConfig load_config(const std::filesystem::path& path) {
  return parse_config(read_json(path), path.parent_path());
}

ExperimentConfig parse_config(const json& doc, const std::filesystem::path& base_dir) {
  if (!doc.is_object()) throw ConfigError("config must be a JSON object");
  ExperimentConfig cfg;
  cfg.doc = doc;
  cfg.hash = fnv1a(doc.dump());
  cfg.base_dir = base_dir;

  const json& sc = section(doc, "scenario");
  const std::string kind = get_or<std::string>(sc, "kind", "regression");
  if (kind == "beamformer")
    cfg.beamformer = ula_from_section(sc);
  else if (kind != "regression")
    throw ConfigError("scenario: unknown kind '" + kind + "'");

  const json& cb = section(doc, "combiner");
  cfg.combiner.kind = get_or<std::string>(cb, "kind", "design");
  if (cfg.combiner.kind == "file") {
    const auto p = std::filesystem::path(get_or<std::string>(cb, "path", ""));
    if (p.empty()) throw ConfigError("combiner: file kind requires a path");
    cfg.combiner.path = p.is_absolute() ? p : base_dir / p;
    if (!std::filesystem::exists(cfg.combiner.path))
      throw ConfigError("combiner: file not found: " + cfg.combiner.path.string());
  } else if (cfg.combiner.kind != "design" && cfg.combiner.kind != "metropolis" &&
             cfg.combiner.kind != "projector") {
    throw ConfigError("combiner: unknown kind '" + cfg.combiner.kind + "'");
  }
  DesignConfig& d = cfg.combiner.design;
  d.epsilon = get_or<double>(cb, "epsilon", d.epsilon);
  d.max_iters = get_or<std::size_t>(cb, "max_iters", d.max_iters);
  d.tol = get_or<double>(cb, "tol", d.tol);
  d.margin = get_or<double>(cb, "margin", d.margin);
  if (!(d.epsilon > 0.0 && d.epsilon < 1.0)) throw ConfigError("combiner: epsilon must lie in (0, 1)");

  const json& run = section(doc, "run");
  RunSection& r = cfg.run;
  const bool affine = cfg.beamformer || get_or<std::string>(section(doc, "subspace"), "kind", "") == "affine";
  r.variant = variant_from_string(get_or<std::string>(run, "variant", affine ? "distributed-affine" : "distributed"));
  r.mu = get_or<double>(run, "mu", r.mu);
  r.mus = get_or<std::vector<double>>(run, "mus", {});
  r.iterations = get_or<std::size_t>(run, "iterations", r.iterations);
  r.runs = get_or<std::size_t>(run, "runs", r.runs);
  r.master_seed = get_or<std::uint64_t>(run, "master_seed", 0);
  r.record_stride = get_or<std::size_t>(run, "record_stride", 1);
  r.exact_gradients = get_or<bool>(run, "exact_gradients", false);
  if (r.runs < 1) throw ConfigError("run: runs must be at least 1");
  if (r.record_stride < 1) throw ConfigError("run: record_stride must be at least 1");
  if (!(r.mu >= 0.0)) throw ConfigError("run: mu must be nonnegative");
  for (double m : r.mus)
    if (!(m > 0.0)) throw ConfigError("run: every entry of mus must be positive");
  return cfg;
}

ConstraintProblem build_constraint_problem(const ExperimentConfig& cfg) {
  ConstraintProblem p;
  if (cfg.beamformer) {
    p.topology = ula_topology(cfg.beamformer->n_antennas, cfg.beamformer->nu);
    auto [net, rhs] = build_constraints(*cfg.beamformer);
    auto [s, a] = affine_to_subspace(net, rhs, p.topology->block_sizes());
    p.subspace = std::move(s);
    p.affine = std::move(a);
    return p;
  }
  p.topology = topology_from_section(section(cfg.doc, "topology"));
  const Topology& t = *p.topology;
  const json& s = section(cfg.doc, "subspace");
  const std::string kind = get_or<std::string>(s, "kind", "consensus");
  try {
    if (kind == "consensus") {
      p.subspace = consensus_subspace(t.n_agents(), uniform_dim(t, "consensus subspace"));
      p.subspace.block_sizes = t.block_sizes();
    } else if (kind == "coupled") {
      std::vector<std::vector<Index>> assignment;
      for (const auto& row : s.at("assignment")) {
        std::vector<Index> held;
        for (const auto& v : row) held.push_back(v.get<Index>() - 1);
        assignment.push_back(std::move(held));
      }
      if (static_cast<Index>(assignment.size()) != t.n_agents())
        throw ConfigError("subspace: assignment must list every agent");
      for (Index k = 0; k < t.n_agents(); ++k)
        if (static_cast<Index>(assignment[static_cast<std::size_t>(k)].size()) != t.block_size(k))
          throw ConfigError("subspace: assignment sizes must match block_sizes");
      p.subspace = coupled_subspace(assignment, s.at("global_dim").get<Index>());
    } else if (kind == "smoothness") {
      RMatrix adj;
      if (s.contains("adjacency")) {
        adj = real_matrix_from_json(s.at("adjacency"));
      } else {
        adj = connection_matrix(t);
        adj.diagonal().setZero();
      }
      p.subspace = smoothness_subspace(adj, s.at("p").get<Index>(), uniform_dim(t, "smoothness subspace"));
    } else if (kind == "affine") {
      auto [sub, a] = affine_to_subspace(matrix_from_json(s.at("d_matrix")),
                                         matrix_from_json(s.at("d_vector")).col(0), t.block_sizes());
      p.subspace = std::move(sub);
      p.affine = std::move(a);
    } else if (kind == "explicit") {
      p.subspace = orthonormalize(matrix_from_json(s.at("basis")), t.block_sizes());
    } else {
      throw ConfigError("subspace: unknown kind '" + kind + "'");
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("subspace: ") + e.what());
  }
  if (p.subspace.dim() != t.total_dim()) throw ConfigError("subspace dimension does not match the topology");
  return p;
}

BlockMatrix build_combiner(const ExperimentConfig& cfg, const ConstraintProblem& problem) {
  const std::string& kind = cfg.combiner.kind;
  if (kind == "design") return design_pocs(problem.topology, problem.subspace, cfg.combiner.design).matrix;
  if (kind == "projector") return BlockMatrix::from_dense(problem.topology, projector(problem.subspace));
  if (kind == "metropolis") {
    const Topology& t = *problem.topology;
    return consensus_combiner(metropolis_weights(t), uniform_dim(t, "metropolis combiner"), problem.topology);
  }
  BlockMatrix a = combiner_from_json(read_json(cfg.combiner.path));
  if (a.topology().block_sizes() != problem.topology->block_sizes())
    throw ConfigError("combiner file block layout does not match the configured topology");
  // Re-home the blocks on the configured topology so neighborhoods agree.
  BlockMatrix out(problem.topology);
  for (const auto& [key, blk] : a.blocks()) out.set_block(key.first, key.second, blk);
  return out;
}

Scenario build_scenario(const ExperimentConfig& cfg, std::uint64_t master_seed, bool with_combiner) {
  Scenario out;
  if (cfg.beamformer) {
    out = make_beamformer_scenario(*cfg.beamformer, master_seed, false);
  } else {
    out = regression_scenario(cfg, section(cfg.doc, "scenario"), master_seed);
  }
  if (with_combiner) {
    ConstraintProblem p{out.topology, out.subspace, out.affine};
    out.combiner = build_combiner(cfg, p);
  }
  return out;
}

RunConfig base_run_config(const ExperimentConfig& cfg) {
  RunConfig r;
  r.mu = cfg.run.mu;
  r.iterations = cfg.run.iterations;
  r.variant = cfg.run.variant;
  r.record_stride = cfg.run.record_stride;
  r.exact_gradients = cfg.run.exact_gradients;
  return r;
}

}  // namespace subadapt
