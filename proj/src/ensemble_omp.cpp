#include <exception>

#include <omp.h>

#include "subadapt/ensemble.hpp"

namespace subadapt {

int default_jobs() { return omp_get_max_threads(); }

std::vector<Trajectory> run_ensemble(const Scenario& scenario, const RunConfig& base, std::size_t runs,
                                     int jobs, const IterateMetric& metric) {
  std::vector<Trajectory> out(runs);
  std::vector<std::exception_ptr> errors(runs);
  const int threads = jobs > 0 ? jobs : omp_get_max_threads();
  const auto n = static_cast<long long>(runs);

#pragma omp parallel for num_threads(threads) schedule(dynamic, 1)
  for (long long m = 0; m < n; ++m) {
    const auto idx = static_cast<std::size_t>(m);
    try {
      RunConfig cfg = base;
      cfg.seed = idx;
      out[idx] = run(cfg, scenario, metric);
    } catch (...) {
      errors[idx] = std::current_exception();
    }
  }

  // Lowest failing run wins so the reported error does not depend on scheduling.
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
  return out;
}

}  // namespace subadapt
