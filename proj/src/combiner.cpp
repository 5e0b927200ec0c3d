#include "subadapt/combiner.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "subadapt/errors.hpp"

namespace subadapt {
namespace {

void check_shape(const CMatrix& a, const Subspace& s) {
  if (a.rows() != a.cols() || a.rows() != s.dim())
    throw ShapeError("combination matrix is " + std::to_string(a.rows()) + "x" +
                     std::to_string(a.cols()) + " but subspace dimension is " +
                     std::to_string(s.dim()));
}

CMatrix matrix_power(const CMatrix& a, std::size_t p) {
  CMatrix result = CMatrix::Identity(a.rows(), a.cols());
  CMatrix base = a;
  while (p > 0) {
    if (p & 1U) result = result * base;
    p >>= 1U;
    if (p > 0) base = base * base;
  }
  return result;
}

// ||B||_2 from the largest eigenvalue of B* B; much cheaper than an SVD.
double fast_spectral_norm(const CMatrix& b) {
  if (b.size() == 0) return 0.0;
  const CMatrix g = b.adjoint() * b;
  Eigen::SelfAdjointEigenSolver<CMatrix> es(g, Eigen::EigenvaluesOnly);
  return std::sqrt(std::max(0.0, es.eigenvalues().maxCoeff()));
}

}  // namespace

VerificationReport verify_conditions(const CMatrix& a, const Subspace& s, const VerifyTolerances& tol) {
  check_shape(a, s);
  const CMatrix& u = s.basis;
  const CMatrix pu = projector(s);

  VerificationReport r;
  r.right_eig_residual = (a * u - u).norm();
  r.left_eig_residual = (u.adjoint() * a - u.adjoint()).norm();
  r.spectral_radius_gap = spectral_radius(a - pu);

  Eigen::ComplexEigenSolver<CMatrix> es(a, false);
  const auto& lam = es.eigenvalues();
  for (Index i = 0; i < lam.size(); ++i)
    if (std::abs(lam(i) - cplx(1.0, 0.0)) <= tol.eig_tol) ++r.unit_eig_count;

  r.checked_power = tol.check_power;
  r.power_limit_residual = fast_spectral_norm(matrix_power(a, tol.check_power) - pu);
  r.passes = r.right_eig_residual <= tol.residual_tol && r.left_eig_residual <= tol.residual_tol &&
             r.spectral_radius_gap <= 1.0 - tol.epsilon_report;
  return r;
}

VerificationReport verify_conditions(const BlockMatrix& a, const Subspace& s, const VerifyTolerances& tol) {
  return verify_conditions(a.to_dense(), s, tol);
}

std::vector<double> power_limit_check(const CMatrix& a, const Subspace& s, std::size_t i_max) {
  check_shape(a, s);
  const CMatrix pu = projector(s);
  std::vector<double> out;
  out.reserve(i_max);
  CMatrix p = a;
  for (std::size_t i = 1; i <= i_max; ++i) {
    out.push_back(fast_spectral_norm(p - pu));
    if (i < i_max) p = p * a;
  }
  return out;
}

std::vector<double> power_limit_check(const BlockMatrix& a, const Subspace& s, std::size_t i_max) {
  return power_limit_check(a.to_dense(), s, i_max);
}

RMatrix metropolis_weights(const Topology& topology) {
  const Index n = topology.n_agents();
  RMatrix w = RMatrix::Zero(n, n);
  for (Index k = 0; k < n; ++k) {
    const auto nk = static_cast<double>(topology.neighbors(k).size());
    for (Index l : topology.neighbors(k)) {
      if (l == k) continue;
      const auto nl = static_cast<double>(topology.neighbors(l).size());
      w(k, l) = 1.0 / std::max(nk, nl);
    }
    w(k, k) = 1.0 - w.row(k).sum();
  }
  return w;
}

BlockMatrix consensus_combiner(const RMatrix& a_small, Index dim_per_agent, TopologyPtr topology) {
  const Index n = topology->n_agents();
  if (a_small.rows() != n || a_small.cols() != n)
    throw ShapeError("combination weights must be N x N");
  for (Index k = 0; k < n; ++k)
    if (topology->block_size(k) != dim_per_agent)
      throw ShapeError("consensus combiner needs block size L at every agent");
  if (a_small.minCoeff() < 0.0) throw StochasticityError("combination weights must be nonnegative");
  const double row_dev = (a_small.rowwise().sum().array() - 1.0).abs().maxCoeff();
  const double col_dev = (a_small.colwise().sum().array() - 1.0).abs().maxCoeff();
  if (row_dev > 1e-10 || col_dev > 1e-10)
    throw StochasticityError("combination weights are not doubly stochastic");

  BlockMatrix out(std::move(topology));
  const CMatrix eye = CMatrix::Identity(dim_per_agent, dim_per_agent);
  for (Index k = 0; k < n; ++k)
    for (Index l = 0; l < n; ++l) {
      if (a_small(k, l) == 0.0 && k != l) continue;
      if (k != l && !out.topology().is_neighbor(k, l))
        throw ShapeError("combination weight outside the neighborhood pattern");
      out.set_block(k, l, eye * a_small(k, l));
    }
  return out;
}

EigenstructureReport eigenstructure_report(const CMatrix& a, const Subspace& s, double eig_tol) {
  check_shape(a, s);
  Eigen::ComplexEigenSolver<CMatrix> es(a, false);
  const auto& lam = es.eigenvalues();

  EigenstructureReport r;
  for (Index i = 0; i < lam.size(); ++i) {
    if (std::abs(lam(i) - cplx(1.0, 0.0)) <= eig_tol)
      ++r.unit_count;
    else
      r.max_sub_unit_modulus = std::max(r.max_sub_unit_modulus, std::abs(lam(i)));
  }
  if (r.unit_count != s.rank())
    throw StructureError("unit eigenvalue count " + std::to_string(r.unit_count) +
                         " differs from subspace rank " + std::to_string(s.rank()));

  // Unit-eigenvalue invariant subspace = null(A - I) when the eigenvalue is semisimple.
  const Index m = a.rows();
  Eigen::JacobiSVD<CMatrix> svd(a - CMatrix::Identity(m, m), Eigen::ComputeFullV);
  const CMatrix v = svd.matrixV().rightCols(r.unit_count);
  const auto& sv = svd.singularValues();
  if (r.unit_count > 0 && sv(m - r.unit_count) > std::sqrt(eig_tol))
    throw StructureError("unit eigenvalue is defective");
  r.subspace_alignment = (projector(s) - v * v.adjoint()).norm();
  return r;
}

}  // namespace subadapt
