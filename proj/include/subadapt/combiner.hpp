#pragma once

#include <cstddef>
#include <vector>

#include "subadapt/linalg.hpp"
#include "subadapt/subspace.hpp"
#include "subadapt/topology.hpp"

namespace subadapt {

struct VerifyTolerances {
  /// Threshold on ||AU - U||_F and ||U*A - U*||_F.
  double residual_tol = 1e-8;
  /// |lambda - 1| below this counts as a unit eigenvalue.
  double eig_tol = 1e-6;
  /// Required contraction margin: rho(A - P_U) <= 1 - epsilon_report.
  double epsilon_report = 1e-9;
  /// Power used for the reported ||A^i - P_U||_2.
  std::size_t check_power = 200;
};

struct VerificationReport {
  double right_eig_residual = 0.0;
  double left_eig_residual = 0.0;
  double spectral_radius_gap = 0.0;  // rho(A - P_U)
  Index unit_eig_count = 0;
  double power_limit_residual = 0.0;
  std::size_t checked_power = 0;
  bool passes = false;
};

/// Checks A U = U, U* A = U* and rho(A - P_U) < 1.
VerificationReport verify_conditions(const CMatrix& a, const Subspace& s,
                                     const VerifyTolerances& tol = {});
VerificationReport verify_conditions(const BlockMatrix& a, const Subspace& s,
                                     const VerifyTolerances& tol = {});

/// ||A^i - P_U||_2 for i = 1..i_max.
std::vector<double> power_limit_check(const CMatrix& a, const Subspace& s, std::size_t i_max);
std::vector<double> power_limit_check(const BlockMatrix& a, const Subspace& s, std::size_t i_max);

/// Kronecker expansion A_small kron I_L on the topology. Rejects matrices whose
/// row or column sums deviate from one by more than 1e-10, or with negative entries.
BlockMatrix consensus_combiner(const RMatrix& a_small, Index dim_per_agent, TopologyPtr topology);

/// Metropolis-Hastings weights a_kl = 1 / max(n_k, n_l) on the neighbor graph.
RMatrix metropolis_weights(const Topology& topology);

struct EigenstructureReport {
  Index unit_count = 0;
  double max_sub_unit_modulus = 0.0;
  double subspace_alignment = 0.0;  // ||P_U - P_eig||_F
};

/// Throws StructureError when the unit eigenvalue count differs from P.
EigenstructureReport eigenstructure_report(const CMatrix& a, const Subspace& s, double eig_tol = 1e-6);

struct DesignConfig {
  double epsilon = 0.01;
  std::size_t max_iters = 5000;
  double tol = 1e-8;
  bool hermitian = true;
  /// The spectral-ball projection clips at (1 - epsilon) - margin * epsilon so
  /// that the returned matrix meets the bound after finitely many sweeps.
  double margin = 0.1;
};

struct DesignResult {
  BlockMatrix matrix;
  std::size_t iterations = 0;
  double affine_residual = 0.0;  // max of ||AU-U||_F and ||U*A-U*||_F
  double spectral_gap = 0.0;     // ||A - P_U||_2
  std::vector<double> residual_trace;
};

/// Alternating projections between the affine set {pattern, Hermitian, AU = U}
/// and the spectral ball {||A - P_U||_2 <= 1 - epsilon}. Throws InfeasibleError.
DesignResult design_pocs(TopologyPtr topology, const Subspace& s, const DesignConfig& cfg = {});

}  // namespace subadapt
