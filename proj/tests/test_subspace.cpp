#include <string>

#include "doctest.h"
#include "helpers.hpp"
#include "subadapt/beamformer.hpp"
#include "subadapt/errors.hpp"
#include "subadapt/log.hpp"
#include "subadapt/subspace.hpp"

using namespace subadapt;
using namespace testutil;

namespace {

double orthonormality_error(const CMatrix& u) {
  return (u.adjoint() * u - CMatrix::Identity(u.cols(), u.cols())).norm();
}

}  // namespace

TEST_SUITE("subspace") {

TEST_CASE("Gram-Schmidt on an upper-triangular input") {
  CMatrix raw(3, 2);
  raw << 1, 1, 0, 1, 0, 0;
  const Subspace s = orthonormalize(raw);
  CMatrix expected(3, 2);
  expected << 1, 0, 0, 1, 0, 0;
  CHECK((s.basis - expected).norm() < 1e-14);
}

TEST_CASE("orthonormalize keeps an orthonormal input's span") {
  ComplexGaussian g(3);
  Eigen::HouseholderQR<CMatrix> qr(random_matrix(g, 5, 3));
  const CMatrix q = qr.householderQ() * CMatrix::Identity(5, 3);
  const Subspace s = orthonormalize(q);
  CHECK(orthonormality_error(s.basis) < 1e-12);
  CHECK((projector(s) - q * q.adjoint()).norm() < 1e-12);
}

TEST_CASE("orthonormalize preserves the span of a random input") {
  ComplexGaussian g(5);
  const CMatrix raw = random_matrix(g, 6, 2);
  const Subspace s = orthonormalize(raw);
  CHECK(orthonormality_error(s.basis) < 1e-12);
  CHECK((projector(s) - span_projector(raw)).norm() < 1e-10);
}

TEST_CASE("rank deficiency is rejected") {
  CMatrix raw(3, 2);
  raw << 1, 2, 1, 2, 0, 0;
  CHECK_THROWS_AS(orthonormalize(raw), RankError);
  CHECK_THROWS_AS(Subspace(CMatrix::Ones(3, 2), {3}), Error);
}

TEST_CASE("projector examples") {
  CMatrix e1(2, 1);
  e1 << 1, 0;
  CMatrix p1(2, 2);
  p1 << 1, 0, 0, 0;
  CHECK((projector(Subspace(e1, {2})) - p1).norm() < 1e-15);
  CHECK((projector(consensus_subspace(2, 1)) - CMatrix::Constant(2, 2, 0.5)).norm() < 1e-15);

  RMatrix path(3, 3);
  path << 0, 1, 0, 1, 0, 1, 0, 1, 0;
  CHECK((projector(smoothness_subspace(path, 1, 1)) - CMatrix::Constant(3, 3, 1.0 / 3.0)).norm() < 1e-12);
}

TEST_CASE("consensus subspace") {
  CHECK((consensus_subspace(1, 2).basis - CMatrix::Identity(2, 2)).norm() < 1e-15);
  CHECK((consensus_subspace(4, 1).basis - CMatrix::Constant(4, 1, 0.5)).norm() < 1e-15);
  const CMatrix p = projector(consensus_subspace(2, 2));
  for (Index k = 0; k < 2; ++k)
    for (Index l = 0; l < 2; ++l) CHECK((p.block(2 * k, 2 * l, 2, 2) - 0.5 * CMatrix::Identity(2, 2)).norm() < 1e-15);
  const Subspace s = consensus_subspace(5, 3);
  CHECK(s.dim() == 15);
  CHECK(s.rank() == 3);
}

TEST_CASE("coupled subspace") {
  const Subspace both = coupled_subspace({{0}, {0}}, 1);
  CHECK((both.basis - consensus_subspace(2, 1).basis).norm() < 1e-15);

  // Agents hold {w1,w2}, {w2,w3}, {w2,w3}: column for w1 lives on agent 1 only.
  const Subspace fig = coupled_subspace({{0, 1}, {1, 2}, {1, 2}}, 3);
  CHECK(fig.dim() == 6);
  CHECK(fig.basis.col(0).segment(2, 4).norm() == 0.0);
  CHECK(fig.basis.col(0).norm() == doctest::Approx(1.0));
  CHECK(orthonormality_error(fig.basis) < 1e-14);

  // Multiplicities (2, 1): variable 0 on agents 1 and 2, variable 1 on agent 3.
  const Subspace m = coupled_subspace({{0}, {0}, {1}}, 2);
  CHECK(std::abs(m.basis(0, 0) - 1.0 / std::sqrt(2.0)) < 1e-15);
  CHECK(std::abs(m.basis(2, 1) - 1.0) < 1e-15);
  CHECK(m.basis.col(0).norm() == doctest::Approx(1.0));
  CHECK(m.basis.col(1).norm() == doctest::Approx(1.0));

  CHECK_THROWS_AS(coupled_subspace({{0}, {0}}, 2), RankError);
}

TEST_CASE("smoothness subspace") {
  RMatrix two(2, 2);
  two << 0, 1, 1, 0;
  CHECK((smoothness_subspace(two, 1, 1).basis - CMatrix::Constant(2, 1, 1.0 / std::sqrt(2.0))).norm() < 1e-12);

  RMatrix path(3, 3);
  path << 0, 1, 0, 1, 0, 1, 0, 1, 0;
  CHECK((projector(smoothness_subspace(path, 3, 2)) - CMatrix::Identity(6, 6)).norm() < 1e-12);

  // Dense eigensolve oracle of the path Laplacian.
  Eigen::SelfAdjointEigenSolver<RMatrix> es(laplacian(path));
  CHECK(es.eigenvalues()(0) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(es.eigenvalues()(1) == doctest::Approx(1.0));
  CHECK(es.eigenvalues()(2) == doctest::Approx(3.0));
  CMatrix expected(3, 2);
  expected << 1 / std::sqrt(3.0), 1 / std::sqrt(2.0), 1 / std::sqrt(3.0), 0, 1 / std::sqrt(3.0), -1 / std::sqrt(2.0);
  CHECK((projector(smoothness_subspace(path, 2, 1)) - expected * expected.adjoint()).norm() < 1e-12);
}

TEST_CASE("smoothness with p=1 reproduces consensus up to sign") {
  ComplexGaussian g(17);
  for (int trial = 0; trial < 5; ++trial) {
    const TopologyPtr t = random_connected(g, std::vector<Index>(6, 1), 0.3);
    RMatrix c = connection_matrix(*t);
    c.diagonal().setZero();
    for (Index k = 0; k < 6; ++k)
      for (Index l = k + 1; l < 6; ++l)
        if (c(k, l) != 0.0) c(k, l) = c(l, k) = 0.5 + g.uniform();
    const Subspace s = smoothness_subspace(c, 1, 2);
    CHECK((projector(s) - projector(consensus_subspace(6, 2))).norm() < 1e-10);
  }
}

TEST_CASE("degenerate Laplacian eigenvalue warns and flags") {
  std::vector<std::string> seen;
  auto previous = set_warning_handler([&](const std::string& m) { seen.push_back(m); });
  RMatrix split = RMatrix::Zero(4, 4);
  split(0, 1) = split(1, 0) = 1.0;
  split(2, 3) = split(3, 2) = 1.0;
  const Subspace s = smoothness_subspace(split, 1, 1);
  set_warning_handler(previous);
  CHECK(s.degenerate);
  CHECK(seen.size() == 1);

  RMatrix bad = RMatrix::Zero(2, 2);
  bad(0, 1) = 1.0;
  CHECK_THROWS(smoothness_subspace(bad, 1, 1));
}

TEST_CASE("affine reduction examples") {
  CMatrix e1(2, 1);
  e1 << 1, 0;
  CVector zero = CVector::Zero(1);
  auto [s0, a0] = affine_to_subspace(e1, zero);
  CHECK(std::abs(std::abs(s0.basis(1, 0)) - 1.0) < 1e-14);
  CHECK(std::abs(s0.basis(0, 0)) < 1e-14);
  CHECK(a0.offset.norm() == 0.0);

  CVector five(1);
  five << 5.0;
  auto [s5, a5] = affine_to_subspace(e1, five);
  CHECK(std::abs(a5.offset(0) - 5.0) < 1e-14);
  CHECK(std::abs(a5.offset(1)) < 1e-14);

  CMatrix dup(3, 2);
  dup << 1, 2, 1, 2, 0, 0;
  CHECK_THROWS_AS(affine_to_subspace(dup, CVector::Zero(2)), RankError);
}

TEST_CASE("affine projectors are complementary and the offset is feasible") {
  ComplexGaussian g(19);
  for (int trial = 0; trial < 10; ++trial) {
    const Index m = 4 + static_cast<Index>(g.uniform() * 10);
    const Index c = 1 + static_cast<Index>(g.uniform() * static_cast<double>(m - 2));
    const CMatrix d = random_matrix(g, m, c);
    const CVector rhs = g.vector(c);
    auto [s, a] = affine_to_subspace(d, rhs);
    CHECK(s.rank() == m - c);
    CHECK((projector(s) + span_projector(d) - CMatrix::Identity(m, m)).norm() < 1e-9);
    CHECK((d.adjoint() * a.offset - rhs).norm() < 1e-10);
    CHECK((affine_projector(d) - projector(s)).norm() < 1e-9);
  }
}

TEST_CASE("beamformer constraint stack has the SVD null-space dimension") {
  const ULAScenario scn;
  const auto [net, rhs] = build_constraints(scn);
  Eigen::JacobiSVD<CMatrix> svd(net);
  const RVector sv = svd.singularValues();
  Index rank = 0;
  for (Index i = 0; i < sv.size(); ++i) rank += sv(i) > 1e-10 * sv(0);
  auto [s, a] = affine_to_subspace(net, rhs, ula_topology(14, 4)->block_sizes());
  CHECK(net.rows() == 106);
  CHECK(s.rank() == net.rows() - rank);
  CHECK(s.rank() == 106 - (92 + 3));
}

TEST_CASE("random projectors are Hermitian idempotent with trace P") {
  ComplexGaussian g(23);
  for (int trial = 0; trial < 12; ++trial) {
    const Index m = 2 + static_cast<Index>(g.uniform() * 63);
    const Index p = 1 + static_cast<Index>(g.uniform() * static_cast<double>(m - 1));
    const CMatrix pu = projector(orthonormalize(random_matrix(g, m, p)));
    CHECK((pu * pu - pu).norm() < 1e-9);
    CHECK((pu - pu.adjoint()).norm() < 1e-12);
    CHECK(std::abs(pu.trace() - static_cast<double>(p)) < 1e-8);
  }
}

}  // TEST_SUITE
