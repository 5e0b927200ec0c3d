#include "subadapt/subspace.hpp"

#include <cmath>
#include <numeric>
#include <sstream>
#include <string>

#include <Eigen/QR>
#include <Eigen/SVD>
#include <unsupported/Eigen/KroneckerProduct>

#include "subadapt/errors.hpp"
#include "subadapt/log.hpp"

namespace subadapt {
namespace {

constexpr double kUnitaryTol = 1e-10;
constexpr double kRankTol = 1e-10;

std::vector<Index> default_blocks(std::vector<Index> blocks, Index m) {
  if (blocks.empty()) blocks.push_back(m);
  return blocks;
}

void check_full_column_rank(const CMatrix& d) {
  Eigen::JacobiSVD<CMatrix> svd(d);
  const auto& sv = svd.singularValues();
  if (sv.size() == 0) return;
  if (sv(sv.size() - 1) <= kRankTol * sv(0)) throw RankError("constraint matrix is rank deficient");
}

}  // namespace

Subspace::Subspace(CMatrix u, std::vector<Index> blocks)
    : basis(std::move(u)), block_sizes(default_blocks(std::move(blocks), basis.rows())) {
  if (basis.cols() > basis.rows()) throw ShapeError("subspace rank exceeds ambient dimension");
  const Index total = std::accumulate(block_sizes.begin(), block_sizes.end(), Index{0});
  if (total != basis.rows()) throw ShapeError("block sizes do not sum to basis rows");
  const double err =
      (basis.adjoint() * basis - CMatrix::Identity(basis.cols(), basis.cols())).norm();
  if (err > kUnitaryTol) {
    std::ostringstream os;
    os << "basis is not semi-unitary (||U*U - I||_F = " << err << ")";
    throw ShapeError(os.str());
  }
}

Subspace orthonormalize(const CMatrix& raw, std::vector<Index> block_sizes) {
  CMatrix q = raw;
  for (Index j = 0; j < q.cols(); ++j) {
    const double input_norm = raw.col(j).norm();
    for (int pass = 0; pass < 2; ++pass)
      for (Index i = 0; i < j; ++i) {
        const cplx c = q.col(i).dot(q.col(j));  // q_i^* q_j
        q.col(j) -= c * q.col(i);
      }
    const double r = q.col(j).norm();
    if (input_norm == 0.0 || r < kRankTol * input_norm)
      throw RankError("column " + std::to_string(j) + " is linearly dependent");
    q.col(j) /= r;
  }
  return Subspace(std::move(q), std::move(block_sizes));
}

CMatrix projector(const Subspace& s) { return s.basis * s.basis.adjoint(); }

Subspace consensus_subspace(Index n_agents, Index dim_per_agent) {
  if (n_agents < 1 || dim_per_agent < 1) throw ShapeError("consensus subspace needs N, L >= 1");
  const double scale = 1.0 / std::sqrt(static_cast<double>(n_agents));
  CMatrix u(n_agents * dim_per_agent, dim_per_agent);
  for (Index k = 0; k < n_agents; ++k)
    u.middleRows(k * dim_per_agent, dim_per_agent) =
        CMatrix::Identity(dim_per_agent, dim_per_agent) * scale;
  return Subspace(std::move(u), std::vector<Index>(static_cast<std::size_t>(n_agents), dim_per_agent));
}

Subspace coupled_subspace(const std::vector<std::vector<Index>>& assignment, Index global_dim) {
  std::vector<Index> multiplicity(static_cast<std::size_t>(global_dim), 0);
  std::vector<Index> blocks;
  for (const auto& vars : assignment) {
    if (vars.empty()) throw ShapeError("every agent must hold at least one variable");
    blocks.push_back(static_cast<Index>(vars.size()));
    for (Index v : vars) {
      if (v < 0 || v >= global_dim) throw ShapeError("global variable index out of range");
      ++multiplicity[static_cast<std::size_t>(v)];
    }
  }
  for (Index v = 0; v < global_dim; ++v)
    if (multiplicity[static_cast<std::size_t>(v)] == 0)
      throw RankError("global variable " + std::to_string(v) + " is not used by any agent");

  const Index m = std::accumulate(blocks.begin(), blocks.end(), Index{0});
  CMatrix u = CMatrix::Zero(m, global_dim);
  Index row = 0;
  for (const auto& vars : assignment)
    for (Index v : vars)
      u(row++, v) = 1.0 / std::sqrt(static_cast<double>(multiplicity[static_cast<std::size_t>(v)]));
  return Subspace(std::move(u), std::move(blocks));
}

RMatrix laplacian(const RMatrix& adjacency) {
  RMatrix l = -adjacency;
  l.diagonal() += adjacency.rowwise().sum();
  return l;
}

Subspace smoothness_subspace(const RMatrix& adjacency, Index p, Index dim_per_agent) {
  const Index n = adjacency.rows();
  if (adjacency.cols() != n) throw ShapeError("adjacency must be square");
  if ((adjacency - adjacency.transpose()).cwiseAbs().maxCoeff() > 1e-12)
    throw ShapeError("adjacency must be symmetric");
  if (adjacency.diagonal().cwiseAbs().maxCoeff() > 0.0 || adjacency.minCoeff() < 0.0)
    throw ShapeError("adjacency must be nonnegative with zero diagonal");
  if (p < 1 || p > n || dim_per_agent < 1) throw ShapeError("need 1 <= p <= N and L >= 1");

  Eigen::SelfAdjointEigenSolver<RMatrix> es(laplacian(adjacency));
  const RVector& lam = es.eigenvalues();
  CMatrix v = es.eigenvectors().leftCols(p).cast<cplx>();
  normalize_column_phases(v);

  bool degenerate = false;
  if (p < n) {
    const double scale = std::max(1.0, lam.cwiseAbs().maxCoeff());
    if (std::abs(lam(p) - lam(p - 1)) <= 1e-10 * scale) {
      degenerate = true;
      std::ostringstream os;
      os << "degenerate Laplacian eigenspace at p=" << p << " (lambda_p = lambda_{p+1} = " << lam(p)
         << "); basis choice is not unique";
      warn(os.str());
    }
  }

  CMatrix u = Eigen::kroneckerProduct(v, CMatrix::Identity(dim_per_agent, dim_per_agent));
  Subspace s(std::move(u), std::vector<Index>(static_cast<std::size_t>(n), dim_per_agent));
  s.degenerate = degenerate;
  return s;
}

std::pair<Subspace, AffineConstraint> affine_to_subspace(const CMatrix& d_matrix,
                                                         const CVector& d_vector,
                                                         std::vector<Index> block_sizes) {
  const Index m = d_matrix.rows();
  const Index c = d_matrix.cols();
  if (c > m) throw ShapeError("constraint matrix has more columns than rows");
  if (d_vector.size() != c) throw ShapeError("constraint vector length mismatch");
  check_full_column_rank(d_matrix);

  // Trailing columns of the full Householder Q span null(D*).
  Eigen::HouseholderQR<CMatrix> qr(d_matrix);
  CMatrix q = qr.householderQ() * CMatrix::Identity(m, m);
  CMatrix u = q.rightCols(m - c);
  normalize_column_phases(u);
  // Re-orthonormalize after phase rotation; rotation is unitary so this is a
  // no-op up to rounding.
  Subspace s = orthonormalize(u, std::move(block_sizes));

  const CMatrix gram = d_matrix.adjoint() * d_matrix;
  CVector offset = d_matrix * gram.ldlt().solve(d_vector);
  return {std::move(s), AffineConstraint{d_matrix, d_vector, std::move(offset)}};
}

CMatrix affine_projector(const CMatrix& d_matrix) {
  const Index m = d_matrix.rows();
  const CMatrix gram = d_matrix.adjoint() * d_matrix;
  return CMatrix::Identity(m, m) - d_matrix * gram.ldlt().solve(d_matrix.adjoint());
}

}  // namespace subadapt
