#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "subadapt/linalg.hpp"
#include "subadapt/rng.hpp"
#include "subadapt/topology.hpp"

namespace testutil {

using namespace subadapt;

inline CMatrix random_matrix(ComplexGaussian& g, Index rows, Index cols) {
  CMatrix m(rows, cols);
  for (Index r = 0; r < rows; ++r)
    for (Index c = 0; c < cols; ++c) m(r, c) = g();
  return m;
}

// Hermitian positive definite with eigenvalues in [lo, hi].
inline CMatrix random_hpd(ComplexGaussian& g, Index n, double lo, double hi) {
  Eigen::HouseholderQR<CMatrix> qr(random_matrix(g, n, n));
  const CMatrix q = qr.householderQ() * CMatrix::Identity(n, n);
  RVector eig(n);
  for (Index i = 0; i < n; ++i) eig(i) = lo + (hi - lo) * g.uniform();
  const CMatrix r = q * eig.cast<cplx>().asDiagonal() * q.adjoint();
  return (r + r.adjoint()) * 0.5;
}

// Oracle projector onto the column span: X (X*X)^{-1} X*.
inline CMatrix span_projector(const CMatrix& x) {
  return x * (x.adjoint() * x).ldlt().solve(x.adjoint());
}

inline TopologyPtr make_topology(std::vector<Index> sizes, const std::vector<Topology::Edge>& edges) {
  return std::make_shared<const Topology>(Topology::from_edges(std::move(sizes), edges));
}

inline TopologyPtr path_topology(Index n, Index dim = 1) {
  std::vector<Topology::Edge> e;
  for (Index k = 0; k + 1 < n; ++k) e.emplace_back(k, k + 1);
  return make_topology(std::vector<Index>(static_cast<std::size_t>(n), dim), e);
}

inline TopologyPtr ring_topology(Index n, Index dim = 1) {
  std::vector<Topology::Edge> e;
  for (Index k = 0; k < n; ++k) e.emplace_back(k, (k + 1) % n);
  return make_topology(std::vector<Index>(static_cast<std::size_t>(n), dim), e);
}

// Connected random graph: a random spanning tree plus extra edges.
inline TopologyPtr random_connected(ComplexGaussian& g, std::vector<Index> sizes, double extra_prob) {
  const auto n = static_cast<Index>(sizes.size());
  std::vector<Topology::Edge> e;
  for (Index k = 1; k < n; ++k) e.emplace_back(static_cast<Index>(g.uniform() * static_cast<double>(k)), k);
  for (Index k = 0; k < n; ++k)
    for (Index l = k + 1; l < n; ++l)
      if (g.uniform() < extra_prob) e.emplace_back(k, l);
  return make_topology(std::move(sizes), e);
}

}  // namespace testutil
