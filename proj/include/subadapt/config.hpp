#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "subadapt/beamformer.hpp"
#include "subadapt/combiner.hpp"
#include "subadapt/engine.hpp"

namespace subadapt {

struct RunSection {
  Variant variant = Variant::Distributed;
  double mu = 0.01;
  std::vector<double> mus;
  std::size_t iterations = 1000;
  std::size_t runs = 10;
  std::uint64_t master_seed = 0;
  std::size_t record_stride = 1;
  bool exact_gradients = false;
};

struct CombinerSection {
  std::string kind = "design";  // design | metropolis | projector | file
  std::filesystem::path path;
  DesignConfig design;
};

/// One JSON document describing an experiment. Relative paths resolve
/// against the directory holding the config file.
struct ExperimentConfig {
  nlohmann::json doc;
  std::uint64_t hash = 0;
  std::filesystem::path base_dir;
  std::optional<ULAScenario> beamformer;
  CombinerSection combiner;
  RunSection run;
};

/// Throws ConfigError.
ExperimentConfig load_config(const std::filesystem::path& path);
ExperimentConfig parse_config(const nlohmann::json& doc, const std::filesystem::path& base_dir = {});

/// Topology, subspace and optional affine constraint without costs.
struct ConstraintProblem {
  TopologyPtr topology;
  Subspace subspace;
  std::optional<AffineConstraint> affine;
};
ConstraintProblem build_constraint_problem(const ExperimentConfig& cfg);

/// Builds the combiner named by the combiner section (may throw InfeasibleError).
BlockMatrix build_combiner(const ExperimentConfig& cfg, const ConstraintProblem& problem);

/// Complete scenario with sample stream seeded by master_seed.
Scenario build_scenario(const ExperimentConfig& cfg, std::uint64_t master_seed, bool with_combiner = true);

RunConfig base_run_config(const ExperimentConfig& cfg);

}  // namespace subadapt
