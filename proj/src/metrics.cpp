#include "subadapt/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "subadapt/ensemble.hpp"

namespace subadapt {
namespace {

void check_consistent(const std::vector<Trajectory>& trajectories) {
  if (trajectories.empty()) throw EnsembleError("no trajectories to reduce");
  const Trajectory& first = trajectories.front();
  for (const auto& t : trajectories) {
    if (t.iterations != first.iterations || t.sq_error.cols() != first.sq_error.cols() ||
        t.meta.mu != first.meta.mu || t.meta.variant != first.meta.variant ||
        t.meta.iterations != first.meta.iterations)
      throw EnsembleError("trajectories disagree on scenario, step-size or recorded iterations");
    if (t.sq_error.rows() != static_cast<Index>(t.iterations.size()))
      throw EnsembleError("trajectory record count mismatch");
  }
}

std::size_t window_start(std::size_t n) {
  const auto len = static_cast<std::size_t>(std::ceil(kSteadyStateWindow * static_cast<double>(n)));
  return n - std::max<std::size_t>(1, std::min(len, n));
}

struct MeanErr {
  double mean = 0.0;
  double err = 0.0;
};

// Accumulates in run order so the reduction is independent of scheduling.
MeanErr mean_stderr(const std::vector<double>& v) {
  MeanErr out;
  for (double x : v) out.mean += x;
  out.mean /= static_cast<double>(v.size());
  if (v.size() > 1) {
    double ss = 0.0;
    for (double x : v) ss += (x - out.mean) * (x - out.mean);
    out.err = std::sqrt(ss / static_cast<double>(v.size() - 1) / static_cast<double>(v.size()));
  }
  return out;
}

// Reduces a per-run series matrix (runs x points).
void reduce_series(const RMatrix& per_run, RVector& mean, RVector& err) {
  const Index runs = per_run.rows();
  mean.resize(per_run.cols());
  err.resize(per_run.cols());
  std::vector<double> col(static_cast<std::size_t>(runs));
  for (Index j = 0; j < per_run.cols(); ++j) {
    for (Index r = 0; r < runs; ++r) col[static_cast<std::size_t>(r)] = per_run(r, j);
    const MeanErr me = mean_stderr(col);
    mean(j) = me.mean;
    err(j) = me.err;
  }
}

}  // namespace

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = x.size();
  if (n < 2 || y.size() != n) return std::numeric_limits<double>::quiet_NaN();
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double lx = std::log(x[i]);
    const double ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  const double dn = static_cast<double>(n);
  return (dn * sxy - sx * sy) / (dn * sxx - sx * sx);
}

EnsembleStats msd_curve(const std::vector<Trajectory>& trajectories) {
  check_consistent(trajectories);
  const auto runs = static_cast<Index>(trajectories.size());
  const Trajectory& first = trajectories.front();
  const auto points = static_cast<Index>(first.iterations.size());
  const auto n_agents = static_cast<double>(first.sq_error.cols());

  RMatrix per_run(runs, points);
  for (Index r = 0; r < runs; ++r)
    per_run.row(r) = trajectories[static_cast<std::size_t>(r)].sq_error.rowwise().sum().transpose() / n_agents;

  EnsembleStats out;
  out.iterations = first.iterations;
  out.num_runs = trajectories.size();
  out.stderr_defined = runs > 1;
  reduce_series(per_run, out.msd, out.stderr_);

  const auto start = static_cast<Index>(window_start(static_cast<std::size_t>(points)));
  std::vector<double> window_means(static_cast<std::size_t>(runs));
  for (Index r = 0; r < runs; ++r)
    window_means[static_cast<std::size_t>(r)] = per_run.row(r).segment(start, points - start).mean();
  const MeanErr ss = mean_stderr(window_means);
  out.steady_state_msd = ss.mean;
  out.steady_state_stderr = ss.err;

  // Plateau detector: regression of ln MSD on iteration over the window.
  const Index len = points - start;
  if (len >= 2) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (Index j = start; j < points; ++j) {
      const double x = static_cast<double>(out.iterations[static_cast<std::size_t>(j)]);
      const double y = std::log(std::max(out.msd(j), 1e-300));
      sx += x;
      sy += y;
      sxx += x * x;
      sxy += x * y;
    }
    const double dn = static_cast<double>(len);
    const double slope = (dn * sxy - sx * sy) / (dn * sxx - sx * sx);
    out.plateau_reached = std::abs(slope) * 100.0 < 1e-3 || out.steady_state_msd <= 1e-12;
  } else {
    out.plateau_reached = out.steady_state_msd <= 1e-12;
  }
  return out;
}

std::vector<AgentPlateau> per_agent_mse(const std::vector<Trajectory>& trajectories) {
  check_consistent(trajectories);
  const Trajectory& first = trajectories.front();
  const auto points = static_cast<Index>(first.iterations.size());
  const auto start = static_cast<Index>(window_start(static_cast<std::size_t>(points)));
  std::vector<AgentPlateau> out;
  std::vector<double> per_run(trajectories.size());
  for (Index k = 0; k < first.sq_error.cols(); ++k) {
    for (std::size_t r = 0; r < trajectories.size(); ++r)
      per_run[r] = trajectories[r].sq_error.col(k).segment(start, points - start).mean();
    const MeanErr me = mean_stderr(per_run);
    out.push_back({k, me.mean, me.err});
  }
  return out;
}

ScalingResult mu_scaling(const Scenario& scenario, const RunConfig& base, const std::vector<double>& mus,
                         std::size_t runs, int jobs) {
  if (mus.size() < 2) throw ConfigError("step-size sweep needs at least two values");
  ScalingResult out;
  for (double mu : mus) {
    RunConfig cfg = base;
    cfg.mu = mu;
    std::vector<Trajectory> trajs;
    try {
      trajs = run_ensemble(scenario, cfg, runs, jobs);
    } catch (const DivergenceError& e) {
      std::ostringstream os;
      os << "divergence at mu = " << mu << ": " << e.what();
      throw DivergenceError(os.str(), e.iteration(), mu);
    }
    const EnsembleStats stats = msd_curve(trajs);
    out.points.push_back({mu, stats.steady_state_msd, stats.steady_state_stderr});
  }
  std::vector<double> x, y;
  for (const auto& p : out.points) {
    x.push_back(p.mu);
    y.push_back(p.msd);
  }
  out.slope_valid = std::all_of(y.begin(), y.end(), [](double v) { return v > 1e-12; });
  out.slope = out.slope_valid ? loglog_slope(x, y) : std::numeric_limits<double>::quiet_NaN();
  return out;
}

SeriesStats average_metric(const std::vector<Trajectory>& trajectories) {
  check_consistent(trajectories);
  const auto runs = static_cast<Index>(trajectories.size());
  const auto points = static_cast<Index>(trajectories.front().metric.size());
  RMatrix per_run(runs, points);
  for (Index r = 0; r < runs; ++r) {
    const auto& m = trajectories[static_cast<std::size_t>(r)].metric;
    if (static_cast<Index>(m.size()) != points) throw EnsembleError("metric series length mismatch");
    for (Index j = 0; j < points; ++j) per_run(r, j) = m[static_cast<std::size_t>(j)];
  }
  SeriesStats out;
  out.iterations = trajectories.front().iterations;
  reduce_series(per_run, out.mean, out.stderr_);
  return out;
}

double to_db(double ratio) {
  return ratio > 0.0 ? 10.0 * std::log10(ratio) : -std::numeric_limits<double>::infinity();
}

}  // namespace subadapt
