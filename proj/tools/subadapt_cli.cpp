// Command-line front end: design, verify, run and sweep.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"

#include "subadapt/config.hpp"
#include "subadapt/ensemble.hpp"
#include "subadapt/errors.hpp"
#include "subadapt/io.hpp"
#include "subadapt/metrics.hpp"

namespace fs = std::filesystem;
using namespace subadapt;

namespace {

enum Exit : int { kOk = 0, kVerifyFail = 1, kInfeasible = 2, kDivergence = 3, kConfig = 64, kInternal = 70 };

struct Options {
  std::string config;
  std::string out = ".";
  std::string matrix;
  int jobs = 1;
  std::optional<std::uint64_t> seed;
};

std::string report_text(const VerificationReport& r) {
  std::ostringstream os;
  os << "right_residual " << format_double(r.right_eig_residual) << "\n"
     << "left_residual " << format_double(r.left_eig_residual) << "\n"
     << "rho(A - P_U) " << format_double(r.spectral_radius_gap) << "\n"
     << "unit_eigenvalues " << r.unit_eig_count << "\n"
     << "||A^" << r.checked_power << " - P_U|| " << format_double(r.power_limit_residual) << "\n"
     << "verdict " << (r.passes ? "pass" : "fail") << "\n";
  return os.str();
}

fs::path out_dir(const Options& o) {
  fs::path p(o.out);
  std::error_code ec;
  fs::create_directories(p, ec);
  if (ec) throw ConfigError("cannot create output directory " + p.string());
  return p;
}

CsvMeta meta_for(const ExperimentConfig& cfg, std::uint64_t seed, const char* kind) {
  CsvMeta m;
  m.config_hash = cfg.hash;
  m.master_seed = seed;
  m.kind = kind;
  return m;
}

int cmd_design(const Options& o) {
  const ExperimentConfig cfg = load_config(o.config);
  const ConstraintProblem problem = build_constraint_problem(cfg);
  const fs::path dir = out_dir(o);
  std::string trace;
  BlockMatrix a(problem.topology);
  if (cfg.combiner.kind == "design") {
    try {
      DesignResult res = design_pocs(problem.topology, problem.subspace, cfg.combiner.design);
      a = std::move(res.matrix);
      trace = "iteration,affine_residual\n";
      for (std::size_t i = 0; i < res.residual_trace.size(); ++i)
        trace += std::to_string(i + 1) + "," + format_double(res.residual_trace[i]) + "\n";
      std::cout << "design converged in " << res.iterations << " iterations\n";
    } catch (const InfeasibleError& e) {
      std::cerr << "infeasible: " << e.what() << "\n"
                << "iterations " << e.iterations() << ", residual " << format_double(e.residual()) << "\n";
      return kInfeasible;
    }
  } else {
    a = build_combiner(cfg, problem);
  }
  const VerificationReport r = verify_conditions(a, problem.subspace);
  const std::string text = report_text(r);
  write_text(dir / "combiner.json", combiner_to_json(a).dump(1) + "\n");
  write_text(dir / "design_report.txt", text);
  if (!trace.empty()) write_text(dir / "design_trace.csv", trace);
  std::cout << text;
  return r.passes ? kOk : kVerifyFail;
}

int cmd_verify(const Options& o) {
  const ExperimentConfig cfg = load_config(o.config);
  const ConstraintProblem problem = build_constraint_problem(cfg);
  const BlockMatrix loaded = combiner_from_json(read_json(o.matrix));
  if (loaded.dim() != problem.subspace.dim()) throw ConfigError("matrix dimension does not match the subspace");
  const VerificationReport r = verify_conditions(loaded, problem.subspace);
  const bool pattern_ok = validate_sparsity(loaded, *problem.topology);
  std::cout << report_text(r) << "sparsity " << (pattern_ok ? "ok" : "violated") << "\n";
  return r.passes && pattern_ok ? kOk : kVerifyFail;
}

int cmd_run(const Options& o) {
  const ExperimentConfig cfg = load_config(o.config);
  const std::uint64_t seed = o.seed.value_or(cfg.run.master_seed);
  const Scenario scn = build_scenario(cfg, seed, cfg.run.variant != Variant::Centralized);
  check_step_size(scn, cfg.run.mu);
  const fs::path dir = out_dir(o);
  const IterateMetric metric = cfg.beamformer ? sinr_metric(*cfg.beamformer) : IterateMetric{};
  std::vector<Trajectory> trajs;
  try {
    trajs = run_ensemble(scn, base_run_config(cfg), cfg.run.runs, o.jobs, metric);
  } catch (const DivergenceError& e) {
    std::cerr << "divergence at iteration " << e.iteration() << " (mu = " << format_double(cfg.run.mu)
              << "): " << e.what() << "\n";
    return kDivergence;
  }
  const EnsembleStats stats = msd_curve(trajs);
  write_text(dir / "msd.csv", msd_csv(stats, meta_for(cfg, seed, "msd")));
  write_text(dir / "trajectory.csv", trajectory_csv(trajs.front(), meta_for(cfg, seed, "trajectory_run0")));
  write_text(dir / "agents.csv", agent_csv(per_agent_mse(trajs), meta_for(cfg, seed, "per_agent_mse")));
  std::ostringstream summary;
  summary << "variant " << to_string(cfg.run.variant) << "\n"
          << "runs " << stats.num_runs << "\n"
          << "steady_state_msd " << format_double(stats.steady_state_msd) << " +- "
          << format_double(stats.steady_state_stderr) << "\n"
          << "steady_state_msd_db " << format_double(to_db(stats.steady_state_msd)) << "\n"
          << "plateau_reached " << (stats.plateau_reached ? "true" : "false") << "\n";
  if (metric) {
    const SeriesStats s = average_metric(trajs);
    write_text(dir / "sinr.csv", sinr_csv(s, meta_for(cfg, seed, "sinr")));
    const CVector h_opt = extract_h(scn.w_opt, *cfg.beamformer);
    summary << "final_sinr_db " << format_double(to_db(s.mean(s.mean.size() - 1))) << "\n"
            << "oracle_sinr_db " << format_double(to_db(sinr(h_opt, *cfg.beamformer))) << "\n";
  }
  write_text(dir / "summary.txt", summary.str());
  std::cout << summary.str();
  return kOk;
}

int cmd_sweep(const Options& o) {
  const ExperimentConfig cfg = load_config(o.config);
  if (cfg.run.mus.size() < 2) throw ConfigError("sweep requires run.mus with at least two step-sizes");
  const std::uint64_t seed = o.seed.value_or(cfg.run.master_seed);
  const Scenario scn = build_scenario(cfg, seed, cfg.run.variant != Variant::Centralized);
  for (double mu : cfg.run.mus) check_step_size(scn, mu);
  const fs::path dir = out_dir(o);
  ScalingResult res;
  try {
    res = mu_scaling(scn, base_run_config(cfg), cfg.run.mus, cfg.run.runs, o.jobs);
  } catch (const DivergenceError& e) {
    std::cerr << "divergence at mu = " << format_double(e.mu()) << " (iteration " << e.iteration() << ")\n";
    return kDivergence;
  }
  write_text(dir / "scaling.csv", scaling_csv(res, meta_for(cfg, seed, "scaling")));
  for (const auto& p : res.points)
    std::cout << "mu " << format_double(p.mu) << " msd " << format_double(p.msd) << " +- "
              << format_double(p.stderr_) << "\n";
  std::cout << "slope " << (res.slope_valid ? format_double(res.slope) : std::string("skipped")) << "\n";
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Subspace-constrained adaptation over networks"};
  app.require_subcommand(1);
  Options o;
  auto add_common = [&](CLI::App* sub, bool runs) {
    sub->add_option("--config", o.config, "Experiment config (JSON)")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", o.out, "Output directory");
    if (runs) {
      sub->add_option("--jobs", o.jobs, "Worker threads for Monte Carlo runs (0 = all)");
      sub->add_option("--seed", o.seed, "Override run.master_seed");
    }
  };
  auto* design = app.add_subcommand("design", "Design a combination matrix and verify it");
  add_common(design, false);
  auto* verify = app.add_subcommand("verify", "Check a combination matrix against the configured subspace");
  add_common(verify, false);
  verify->add_option("--matrix", o.matrix, "Combiner file (JSON block list)")->required()->check(CLI::ExistingFile);
  auto* run = app.add_subcommand("run", "Monte Carlo ensemble; writes msd.csv (and sinr.csv)");
  add_common(run, true);
  auto* sweep = app.add_subcommand("sweep", "Step-size sweep; writes scaling.csv");
  add_common(sweep, true);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfig;
  }

  try {
    if (*design) return cmd_design(o);
    if (*verify) return cmd_verify(o);
    if (*run) return cmd_run(o);
    return cmd_sweep(o);
  } catch (const InfeasibleError& e) {
    std::cerr << "infeasible: " << e.what() << "\n";
    return kInfeasible;
  } catch (const DivergenceError& e) {
    std::cerr << "divergence: " << e.what() << "\n";
    return kDivergence;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kConfig;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return kInternal;
  }
}
