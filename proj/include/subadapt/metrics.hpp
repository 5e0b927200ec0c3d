#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include "subadapt/engine.hpp"

namespace subadapt {

struct EnsembleStats {
  std::vector<std::size_t> iterations;
  RVector msd;     // mean over runs of (1/N) ||W^o - W_i||^2
  RVector stderr_; // standard error across runs (zero when num_runs == 1)
  double steady_state_msd = 0.0;
  double steady_state_stderr = 0.0;
  std::size_t num_runs = 0;
  bool stderr_defined = false;
  /// |slope of ln MSD| < 1e-3 per 100 iterations over the steady-state window.
  bool plateau_reached = false;
};

/// Fraction of recorded iterations (from the end) averaged for steady state.
inline constexpr double kSteadyStateWindow = 0.1;

/// Pointwise ensemble MSD. Throws EnsembleError on inconsistent metadata.
EnsembleStats msd_curve(const std::vector<Trajectory>& trajectories);

struct AgentPlateau {
  Index agent = 0;
  double mse = 0.0;
  double stderr_ = 0.0;
};
/// Steady-state ||w^o_k - w_{k,i}||^2 per agent.
std::vector<AgentPlateau> per_agent_mse(const std::vector<Trajectory>& trajectories);

struct ScalingPoint {
  double mu = 0.0;
  double msd = 0.0;
  double stderr_ = 0.0;
};
struct ScalingResult {
  std::vector<ScalingPoint> points;
  /// Least-squares slope of ln MSD against ln mu.
  double slope = 0.0;
  /// False when every plateau is at or below 1e-12 (noise-free scenario).
  bool slope_valid = false;
};

/// Least-squares slope of ln(y) against ln(x).
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

/// Steady-state MSD for each step-size, all cells sharing the same run seeds.
/// Divergence in a cell rethrows DivergenceError tagged with that mu.
ScalingResult mu_scaling(const Scenario& scenario, const RunConfig& base, const std::vector<double>& mus,
                         std::size_t runs, int jobs = 1);

/// Mean and standard error across runs of Trajectory::metric.
struct SeriesStats {
  std::vector<std::size_t> iterations;
  RVector mean;
  RVector stderr_;
};
SeriesStats average_metric(const std::vector<Trajectory>& trajectories);

/// 10 log10(x); -inf for x <= 0.
double to_db(double ratio);

}  // namespace subadapt
