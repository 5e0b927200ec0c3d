#pragma once

#include <utility>
#include <vector>

#include "subadapt/linalg.hpp"

namespace subadapt {

/// Semi-unitary basis U (M x P) of the constraint subspace, with the row-block
/// layout of the network it lives on.
struct Subspace {
  CMatrix basis;
  std::vector<Index> block_sizes;
  /// Set when the basis was picked out of a degenerate eigenspace.
  bool degenerate = false;

  Subspace() = default;
  /// Checks U*U = I within 1e-10 and that block sizes sum to M.
  Subspace(CMatrix u, std::vector<Index> blocks);

  Index dim() const { return basis.rows(); }
  Index rank() const { return basis.cols(); }
};

/// Affine constraint D* W = d together with the least-norm offset
/// d_D = D (D* D)^{-1} d.
struct AffineConstraint {
  CMatrix d_matrix;
  CVector d_vector;
  CVector offset;
};

/// Modified Gram-Schmidt with one reorthogonalization pass. Columns whose
/// residual falls below 1e-10 of their input norm raise RankError.
/// An empty block layout means a single block of size M.
Subspace orthonormalize(const CMatrix& raw, std::vector<Index> block_sizes = {});

/// P_U = U U*.
CMatrix projector(const Subspace& s);

/// U = (1/sqrt(N)) (1_N kron I_L).
Subspace consensus_subspace(Index n_agents, Index dim_per_agent);

/// Selection basis for overlapping parameter vectors. assignment[k] lists the
/// global-variable indices (zero-based) held by agent k, in local order.
Subspace coupled_subspace(const std::vector<std::vector<Index>>& assignment, Index global_dim);

/// First p Laplacian eigenvectors of the weighted adjacency C, expanded by I_L.
/// Degenerate eigenvalue at the cut emits a warning and sets Subspace::degenerate.
Subspace smoothness_subspace(const RMatrix& adjacency, Index p, Index dim_per_agent);

/// Orthonormal basis of null(D*) plus the affine offset.
std::pair<Subspace, AffineConstraint> affine_to_subspace(const CMatrix& d_matrix,
                                                         const CVector& d_vector,
                                                         std::vector<Index> block_sizes = {});

/// I - D (D* D)^{-1} D*.
CMatrix affine_projector(const CMatrix& d_matrix);

/// Graph Laplacian diag(C 1) - C.
RMatrix laplacian(const RMatrix& adjacency);

}  // namespace subadapt
