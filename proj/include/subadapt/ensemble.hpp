#pragma once

#include <cstddef>
#include <vector>

#include "subadapt/engine.hpp"

namespace subadapt {

/// Runs `runs` independent trajectories with run coordinates 0..runs-1.
/// Run m uses base with seed = m; results are ordered by m regardless of how
/// the work was scheduled.
///
/// OpenMP over runs with `jobs` threads (jobs <= 0 uses the OpenMP default).
std::vector<Trajectory> run_ensemble(const Scenario& scenario, const RunConfig& base, std::size_t runs,
                                     int jobs = 1, const IterateMetric& metric = {});

/// Plain loop. Reference implementation for run_ensemble.
std::vector<Trajectory> run_ensemble_serial(const Scenario& scenario, const RunConfig& base,
                                            std::size_t runs, const IterateMetric& metric = {});

/// Number of threads OpenMP would use for jobs <= 0.
int default_jobs();

}  // namespace subadapt
