#include "subadapt/ensemble.hpp"

namespace subadapt {

std::vector<Trajectory> run_ensemble_serial(const Scenario& scenario, const RunConfig& base,
                                            std::size_t runs, const IterateMetric& metric) {
  std::vector<Trajectory> out;
  out.reserve(runs);
  for (std::size_t m = 0; m < runs; ++m) {
    RunConfig cfg = base;
    cfg.seed = m;
    out.push_back(run(cfg, scenario, metric));
  }
  return out;
}

}  // namespace subadapt
