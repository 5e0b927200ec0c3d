#pragma once

#include <cstdint>
#include <memory>
#include <utility>
#include <vector>

#include "subadapt/combiner.hpp"
#include "subadapt/costs.hpp"
#include "subadapt/engine.hpp"

namespace subadapt {

/// Narrowband ULA experiment. Angles are in degrees; the first DOA is the
/// desired source.
struct ULAScenario {
  Index n_antennas = 14;
  Index nu = 4;
  std::vector<double> doas{30.0, -60.0, 60.0};
  std::vector<double> powers{1.0, 1.0, 1.0};
  double noise_var = 0.49;
  double spacing_ratio = 0.5;
  std::vector<double> constraint_doas{30.0, 58.5, 61.5};
  std::vector<double> constraint_gains{1.0, 0.01, 0.01};

  /// Throws ConfigError.
  void validate() const;
};

/// a(theta) = col{e^{-j m tau}}, tau = 2 pi (d/lambda) sin(theta).
CVector steering_vector(double theta_deg, Index n, double spacing_ratio);

/// Agent k holds {h_m : m in N_k}, N_k = {max(0, k - nu), ..., min(k + nu, N - 1)}.
std::vector<std::vector<Index>> ula_assignment(Index n, Index nu);
TopologyPtr ula_topology(Index n, Index nu);

/// R_x = sum_n sigma_n^2 a(theta_n) a(theta_n)* + sigma_v^2 I.
CMatrix array_covariance(const ULAScenario& scn);
/// R_z: as R_x without the desired source.
CMatrix interference_covariance(const ULAScenario& scn);
/// D = [a(theta'_1) ... a(theta'_Q)].
CMatrix constraint_matrix(const ULAScenario& scn);

/// Snapshots x_i shared by all agents; u_{k,i} = col{|N_m|^{-1/2} x_m(i)}, d = 0.
class ArrayStream final : public SampleStream {
 public:
  ArrayStream(ULAScenario scn, std::uint64_t seed);

  Index n_agents() const override { return scn_.n_antennas; }
  Index agent_dim(Index k) const override {
    return static_cast<Index>(assignment_[static_cast<std::size_t>(k)].size());
  }
  AgentSample draw(std::uint64_t run, Index k, std::uint64_t i) const override;
  void draw_all(std::uint64_t run, std::uint64_t i, std::vector<AgentSample>& out) const override;
  QuadraticCost induced_cost(Index k) const override;
  NoiseBounds noise_bounds(Index k, int h) const override;
  double noise_second_moment(Index k, const CVector& w) const override;

  /// The array snapshot x_i of a run.
  CVector snapshot(std::uint64_t run, std::uint64_t i) const;

 private:
  AgentSample local(Index k, const CVector& x) const;

  ULAScenario scn_;
  std::uint64_t seed_;
  std::vector<std::vector<Index>> assignment_;
  std::vector<double> weight_;  // |N_m|^{-1/2}
  std::vector<CVector> steering_;
  CMatrix r_x_;
};

/// Merged constraint system: chained consensus differences for every
/// duplicated h_m, then D* h = b lifted onto the first copy of each h_m.
/// Returns (D_net, d) with D_net* W = d. Throws RankError.
std::pair<CMatrix, CVector> build_constraints(const ULAScenario& scn);

/// F o R_x with F_kl = [E^2]_kl / sqrt(|N_k| |N_l|).
CMatrix partial_covariance(const RMatrix& connection, const CMatrix& r_x);

/// R_x^{-1} D (D* R_x^{-1} D)^{-1} b. Throws CurvatureError for singular R_x.
CVector lcmv_optimum(const CMatrix& r_x, const CMatrix& d, const CVector& b);

/// Solves min sum_k w_k* R_k w_k s.t. D_net* W = d through its KKT system.
CVector network_lcmv_optimum(const ULAScenario& scn);
/// Same, for an explicit right-hand side.
CVector network_lcmv_optimum(const ULAScenario& scn, const CVector& rhs);

/// Global h from stacked W; each h_m is the mean of its copies.
CVector extract_h(const CVector& w, const ULAScenario& scn);

/// sigma_0^2 |h* a(theta_0)|^2 / (h* R_z h); 0 when h = 0.
double sinr(const CVector& h, const ULAScenario& scn);

/// Topology, constraint subspace, stream, KKT oracle and (optionally) the
/// POCS-designed combiner. The initial iterate is zero.
Scenario make_beamformer_scenario(const ULAScenario& scn, std::uint64_t seed, bool design_combiner = true,
                                  const DesignConfig& design = {});

/// Per-iterate SINR metric for engine::run.
IterateMetric sinr_metric(const ULAScenario& scn);

}  // namespace subadapt
