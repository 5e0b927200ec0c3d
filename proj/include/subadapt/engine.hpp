#pragma once

#include <concepts>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "subadapt/costs.hpp"
#include "subadapt/errors.hpp"
#include "subadapt/subspace.hpp"
#include "subadapt/topology.hpp"

namespace subadapt {

enum class Variant { Centralized, Distributed, DistributedAffine, LinearProjection };

std::string to_string(Variant v);
Variant variant_from_string(const std::string& s);

struct RunConfig {
  double mu = 0.01;
  std::size_t iterations = 1000;
  Variant variant = Variant::Distributed;
  /// Run coordinate passed to the sample stream alongside its master seed.
  std::uint64_t seed = 0;
  std::size_t record_stride = 1;
  /// Use true gradients instead of streaming samples.
  bool exact_gradients = false;
  /// Store the stacked iterate at every recorded iteration.
  bool keep_iterates = false;
};

/// Stacked iterate col{w_k} and intermediate col{psi_k}.
struct NetworkState {
  CVector w;
  CVector psi;
  std::size_t iteration = 0;
};

/// True gradients from the quadratic costs, or instantaneous gradients from a
/// sample stream evaluated at (run, agent, iteration).
class GradientSource {
 public:
  static GradientSource exact(const std::vector<QuadraticCost>& costs);
  static GradientSource stochastic(const SampleStream& stream, std::uint64_t run);

  /// Stacked gradient at iteration i for the stacked iterate w.
  void evaluate(std::uint64_t i, const std::vector<Index>& offsets, const CVector& w, CVector& out) const;

 private:
  const std::vector<QuadraticCost>* costs_ = nullptr;
  const SampleStream* stream_ = nullptr;
  std::uint64_t run_ = 0;
  mutable std::vector<AgentSample> scratch_;
};

/// Anything that hands out blocks by (k, l); nullptr means a zero block.
template <class T>
concept BlockSource = requires(const T& b, Index k, Index l) {
  { b.find(k, l) } -> std::convertible_to<const CMatrix*>;
};

/// w_k = sum_{l in N_k} A_kl psi_l (+ drive_k). Reads only neighborhood blocks.
template <BlockSource Blocks>
void combine(const Topology& topology, const Blocks& a, const CVector& psi, CVector& out,
             const CVector* drive = nullptr) {
  out.resize(topology.total_dim());
  for (Index k = 0; k < topology.n_agents(); ++k) {
    auto wk = out.segment(topology.offset(k), topology.block_size(k));
    if (drive)
      wk = drive->segment(topology.offset(k), topology.block_size(k));
    else
      wk.setZero();
    for (Index l : topology.neighbors(k)) {
      const CMatrix* blk = a.find(k, l);
      if (blk) wk.noalias() += *blk * psi.segment(topology.offset(l), topology.block_size(l));
    }
  }
}

/// Throws DivergenceError for non-finite entries or ||w|| > 1e12.
void check_finite(const CVector& w, std::size_t iteration);

/// W_i = P_U (W_{i-1} - mu g) (+ d_D).
NetworkState step_centralized(const NetworkState& state, const GradientSource& grad,
                              const Subspace& s, double mu,
                              const std::optional<AffineConstraint>& affine = std::nullopt);

/// Adapt-then-combine: psi = w - mu g; w_k = sum_{l in N_k} A_kl psi_l (+ drive_k).
template <BlockSource Blocks>
NetworkState step_distributed(const NetworkState& state, const GradientSource& grad,
                              const Topology& topology, const Blocks& a, double mu,
                              const CVector* drive = nullptr) {
  NetworkState next;
  next.iteration = state.iteration + 1;
  std::vector<Index> offsets;
  offsets.reserve(static_cast<std::size_t>(topology.n_agents()) + 1);
  for (Index k = 0; k < topology.n_agents(); ++k) offsets.push_back(topology.offset(k));
  offsets.push_back(topology.total_dim());
  CVector g;
  grad.evaluate(next.iteration, offsets, state.w, g);
  next.psi = state.w - mu * g;
  combine(topology, a, next.psi, next.w, drive);
  check_finite(next.w, next.iteration);
  return next;
}

/// Step with the constant driving term (I - A) d_D.
template <BlockSource Blocks>
NetworkState step_distributed_affine(const NetworkState& state, const GradientSource& grad,
                                     const Topology& topology, const Blocks& a,
                                     const CVector& drive, double mu) {
  return step_distributed(state, grad, topology, a, mu, &drive);
}

/// (I - A) d_D, block-partitioned per agent.
CVector driving_term(const BlockMatrix& a, const AffineConstraint& affine);

struct LinearProjectionResult {
  CVector w_limit;
  std::vector<double> residual_curve;
};

/// Noise-free W_i = A W_{i-1} + (I - A + P_U) d_D toward P_U W_0 + d_D.
/// Throws MaxIterationsError when the residual is still above tol at i_max.
LinearProjectionResult linear_projection_iteration(const BlockMatrix& a, const Subspace& s,
                                                   const std::optional<AffineConstraint>& affine,
                                                   const CVector& w0, std::size_t i_max, double tol);

/// Everything one run needs.
struct Scenario {
  TopologyPtr topology;
  Subspace subspace;
  std::optional<AffineConstraint> affine;
  std::vector<QuadraticCost> costs;
  std::shared_ptr<const SampleStream> stream;
  std::optional<BlockMatrix> combiner;
  /// Oracle W^o against which errors are recorded.
  CVector w_opt;
  /// Initial iterate; empty means zero.
  CVector w0;
  /// Data-type flag (1 real, 2 complex); only affects reported bounds.
  int h = 2;
};

/// Per-run record of squared errors ||w^o_k - w_{k,i}||^2.
struct Trajectory {
  std::vector<std::size_t> iterations;
  RMatrix sq_error;  // rows: recorded iterations, cols: agents
  std::vector<CVector> iterates;
  /// Optional scalar per recorded iteration (e.g. SINR), see run().
  std::vector<double> metric;
  RunConfig meta;
};

using IterateMetric = std::function<double(const CVector&)>;

/// Executes cfg.iterations steps of the configured variant. Records at
/// iterations divisible by record_stride (iteration 0 included).
Trajectory run(const RunConfig& cfg, const Scenario& scenario, const IterateMetric& metric = {});

/// Warns when mu is at or beyond the divergence threshold 2 / delta of the
/// reduced recursion. Returns false in that case.
bool check_step_size(const Scenario& scenario, double mu);

}  // namespace subadapt
