#include <stdexcept>
#include <string>

#include "doctest.h"
#include "helpers.hpp"
#include "subadapt/beamformer.hpp"
#include "subadapt/combiner.hpp"
#include "subadapt/engine.hpp"
#include "subadapt/errors.hpp"
#include "subadapt/log.hpp"
#include "subadapt/metrics.hpp"

using namespace subadapt;
using namespace testutil;

namespace {

std::vector<QuadraticCost> scalar_pair() {
  return {{CMatrix::Constant(1, 1, 1.0), CVector::Constant(1, 1.0), 0.0},
          {CMatrix::Constant(1, 1, 2.0), CVector::Constant(1, 0.0), 0.0}};
}

// Faults on any access outside the neighborhood pattern.
struct GuardedBlocks {
  const BlockMatrix* inner;
  const Topology* topology;
  mutable std::size_t reads = 0;
  const CMatrix* find(Index k, Index l) const {
    if (!topology->is_neighbor(k, l)) throw std::logic_error("off-pattern block read");
    ++reads;
    return inner->find(k, l);
  }
};

Scenario consensus_scenario(ComplexGaussian& g, Index n, Index dim, double noise, bool common_ref = false) {
  Scenario s;
  s.topology = random_connected(g, std::vector<Index>(static_cast<std::size_t>(n), dim), 0.3);
  s.subspace = consensus_subspace(n, dim);
  std::vector<CMatrix> covs;
  std::vector<CVector> refs;
  const CVector shared = g.vector(dim);
  for (Index k = 0; k < n; ++k) {
    covs.push_back(random_hpd(g, dim, 0.5, 1.5));
    refs.push_back(common_ref ? shared : g.vector(dim));
  }
  auto stream = std::make_shared<RegressionStream>(StreamKind::MseRegression, covs, refs, noise, 99);
  s.costs = stream->induced_costs();
  s.stream = stream;
  s.combiner = consensus_combiner(metropolis_weights(*s.topology), dim, s.topology);
  s.w_opt = network_optimum(s.costs, s.subspace);
  return s;
}

NetworkState state_at(const CVector& w) {
  NetworkState s;
  s.w = w;
  return s;
}

// Noise-free limit of W = A(W - mu(RW - r)) + c, solved densely. It differs
// from W^o by the O(mu) term driven by A b whenever b = RW^o - r is nonzero.
CVector biased_fixed_point(const CMatrix& a, const std::vector<QuadraticCost>& costs, double mu, const CVector& c) {
  const CMatrix r = stacked_hessian(costs);
  const Index m = r.rows();
  const CMatrix lhs = CMatrix::Identity(m, m) - a + mu * a * r;
  return lhs.fullPivLu().solve(mu * a * stacked_linear_term(costs) + c);
}

}  // namespace

TEST_SUITE("engine") {

TEST_CASE("centralized step examples") {
  const auto costs = scalar_pair();
  const Subspace s = consensus_subspace(2, 1);
  const GradientSource grad = GradientSource::exact(costs);
  const CVector wo = network_optimum(costs, s);
  CHECK((step_centralized(state_at(wo), grad, s, 0.1).w - wo).norm() < 1e-15);

  CVector w(2);
  w << 1.0, -3.0;
  CHECK((step_centralized(state_at(w), grad, s, 0.0).w - projector(s) * w).norm() < 1e-15);

  NetworkState st = state_at(CVector::Zero(2));
  std::size_t i = 0;
  while ((st.w - wo).norm() >= 1e-10 && i < 300) {
    st = step_centralized(st, grad, s, 0.1);
    ++i;
  }
  CHECK(i <= 300);
  CHECK(std::abs(st.w(0) - 1.0 / 3.0) < 1e-10);
  CHECK(std::abs(st.w(1) - 1.0 / 3.0) < 1e-10);
}

TEST_CASE("distributed step on the two-agent example") {
  const auto costs = scalar_pair();
  const TopologyPtr t = path_topology(2);
  const BlockMatrix a = consensus_combiner(metropolis_weights(*t), 1, t);
  const GradientSource grad = GradientSource::exact(costs);
  const CVector wo = network_optimum(costs, consensus_subspace(2, 1));
  NetworkState st = state_at(CVector::Zero(2));
  std::size_t i = 0;
  while ((st.w - wo).norm() >= 1e-8 && i < 10000) {
    st = step_distributed(st, grad, *t, a, 0.05);
    ++i;
  }
  CHECK((st.w - wo).norm() < 1e-8);
}

TEST_CASE("zero step-size reduces to powers of A") {
  ComplexGaussian g(1);
  const TopologyPtr t = ring_topology(5, 2);
  const Subspace s = consensus_subspace(5, 2);
  const BlockMatrix a = design_pocs(t, s).matrix;
  const std::vector<QuadraticCost> costs(5, QuadraticCost{CMatrix::Identity(2, 2), CVector::Zero(2), 0.0});
  const GradientSource grad = GradientSource::exact(costs);
  const CVector w0 = g.vector(10);
  NetworkState st = state_at(w0);
  CMatrix power = CMatrix::Identity(10, 10);
  const CMatrix dense = a.to_dense();
  for (int i = 0; i < 400; ++i) {
    st = step_distributed(st, grad, *t, a, 0.0);
    power = dense * power;
    if (i < 20) CHECK((st.w - power * w0).norm() < 1e-12);
  }
  CHECK((st.w - projector(s) * w0).norm() < 1e-8);
}

TEST_CASE("combination reads only neighborhood blocks") {
  ComplexGaussian g(2);
  Scenario s = consensus_scenario(g, 6, 2, 0.01);
  // Poison every off-pattern block: any read would also corrupt the result.
  BlockMatrix poisoned = *s.combiner;
  for (Index k = 0; k < 6; ++k)
    for (Index l = 0; l < 6; ++l)
      if (!s.topology->is_neighbor(k, l)) poisoned.set_block(k, l, CMatrix::Constant(2, 2, 1e6));
  const GuardedBlocks guard{&poisoned, s.topology.get()};
  Index off = -1;
  for (Index l = 0; l < 6 && off < 0; ++l)
    if (!s.topology->is_neighbor(0, l)) off = l;
  REQUIRE(off >= 0);
  CHECK_THROWS_AS(guard.find(0, off), std::logic_error);
  guard.reads = 0;

  const GradientSource grad = GradientSource::stochastic(*s.stream, 0);
  NetworkState a = state_at(CVector::Zero(12));
  NetworkState b = a;
  for (int i = 0; i < 200; ++i) {
    a = step_distributed(a, grad, *s.topology, guard, 0.02);
    b = step_distributed(b, grad, *s.topology, *s.combiner, 0.02);
    REQUIRE(a.w == b.w);
  }
  CHECK(guard.reads > 0);
}

TEST_CASE("diffusion equivalence on consensus instances") {
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    ComplexGaussian g(100 + seed);
    const Scenario s = consensus_scenario(g, 5, 2, 0.05);
    const RMatrix ads = metropolis_weights(*s.topology);
    const GradientSource grad = GradientSource::stochastic(*s.stream, seed);
    const double mu = 0.03;
    NetworkState st = state_at(CVector::Zero(10));
    std::vector<CVector> w(5, CVector::Zero(2));
    for (std::uint64_t i = 1; i <= 300; ++i) {
      st = step_distributed(st, grad, *s.topology, *s.combiner, mu);
      std::vector<CVector> psi(5);
      for (Index k = 0; k < 5; ++k) {
        const AgentSample smp = s.stream->draw(seed, k, i);
        const cplx e = smp.d - smp.u.dot(w[static_cast<std::size_t>(k)]);
        psi[static_cast<std::size_t>(k)] = w[static_cast<std::size_t>(k)] + mu * smp.u * e;
      }
      for (Index k = 0; k < 5; ++k) {
        CVector acc = CVector::Zero(2);
        for (Index l = 0; l < 5; ++l) acc += ads(l, k) * psi[static_cast<std::size_t>(l)];
        w[static_cast<std::size_t>(k)] = acc;
      }
      for (Index k = 0; k < 5; ++k) REQUIRE((st.w.segment(2 * k, 2) - w[static_cast<std::size_t>(k)]).norm() <= 1e-12);
    }
  }
}

TEST_CASE("driving term examples") {
  ComplexGaussian g(3);
  const TopologyPtr t = std::make_shared<const Topology>(Topology::fully_connected({2, 2}));
  const CMatrix d = random_matrix(g, 4, 2);
  auto [s, a0] = affine_to_subspace(d, CVector::Zero(2), {2, 2});
  const BlockMatrix pu = BlockMatrix::from_dense(t, projector(s));
  CHECK(driving_term(pu, a0).norm() == 0.0);
  auto [s1, a1] = affine_to_subspace(d, g.vector(2), {2, 2});
  CHECK((driving_term(pu, a1) - a1.offset).norm() < 1e-12);
}

TEST_CASE("affine step with d = 0 matches the plain step bit for bit") {
  ComplexGaussian g(4);
  Scenario s = consensus_scenario(g, 4, 2, 0.05);
  AffineConstraint zero{CMatrix::Zero(8, 0), CVector::Zero(0), CVector::Zero(8)};
  const CVector drive = driving_term(*s.combiner, zero);
  const GradientSource grad = GradientSource::stochastic(*s.stream, 1);
  NetworkState a = state_at(CVector::Zero(8)), b = a;
  for (int i = 0; i < 100; ++i) {
    a = step_distributed(a, grad, *s.topology, *s.combiner, 0.05);
    b = step_distributed_affine(b, grad, *s.topology, *s.combiner, drive, 0.05);
    REQUIRE(a.w == b.w);
  }
}

TEST_CASE("W^o is a fixed point of every variant when b = 0") {
  ComplexGaussian g(5);
  const TopologyPtr t = ring_topology(4, 2);
  const CMatrix d = random_matrix(g, 8, 5);
  auto [s, aff] = affine_to_subspace(d, g.vector(5), t->block_sizes());
  const BlockMatrix a = design_pocs(t, s).matrix;
  // Each agent's own minimizer already satisfies the constraint.
  const CVector w_ref = aff.offset + s.basis * g.vector(s.rank());
  std::vector<QuadraticCost> costs;
  for (Index k = 0; k < 4; ++k) {
    const CMatrix r = random_hpd(g, 2, 0.5, 1.5);
    costs.push_back({r, r * w_ref.segment(2 * k, 2), 0.0});
  }
  const GradientSource grad = GradientSource::exact(costs);
  const CVector wo = network_optimum(costs, s, aff);
  CHECK((wo - w_ref).norm() < 1e-10);
  const CVector drive = driving_term(a, aff);
  CHECK((step_distributed_affine(state_at(wo), grad, *t, a, drive, 0.1).w - wo).norm() < 1e-10);
  CHECK((step_centralized(state_at(wo), grad, s, 0.1, aff).w - wo).norm() < 1e-10);

  const Subspace cons = consensus_subspace(4, 2);
  const CVector common = g.vector(2);
  std::vector<QuadraticCost> ccosts;
  for (Index k = 0; k < 4; ++k) {
    const CMatrix r = random_hpd(g, 2, 0.5, 1.5);
    ccosts.push_back({r, r * common, 0.0});
  }
  const GradientSource cgrad = GradientSource::exact(ccosts);
  const CVector wc = network_optimum(ccosts, cons);
  const BlockMatrix ac = design_pocs(t, cons).matrix;
  CHECK((step_distributed(state_at(wc), cgrad, *t, ac, 0.1).w - wc).norm() < 1e-10);
  CHECK((step_centralized(state_at(wc), cgrad, cons, 0.1).w - wc).norm() < 1e-10);
}

TEST_CASE("heterogeneous costs: one step from W^o moves by -mu A b") {
  ComplexGaussian g(15);
  const TopologyPtr t = ring_topology(4, 2);
  const std::vector<QuadraticCost> costs = {{random_hpd(g, 2, 0.5, 1.5), g.vector(2), 0.0},
                                            {random_hpd(g, 2, 0.5, 1.5), g.vector(2), 0.0},
                                            {random_hpd(g, 2, 0.5, 1.5), g.vector(2), 0.0},
                                            {random_hpd(g, 2, 0.5, 1.5), g.vector(2), 0.0}};
  const Subspace cons = consensus_subspace(4, 2);
  const BlockMatrix a = design_pocs(t, cons).matrix;
  const CVector wo = network_optimum(costs, cons);
  const CVector b = stacked_hessian(costs) * wo - stacked_linear_term(costs);
  CHECK((cons.basis.adjoint() * b).norm() < 1e-10);
  const CVector moved = step_distributed(state_at(wo), GradientSource::exact(costs), *t, a, 0.1).w;
  CHECK((moved - (wo - 0.1 * a.to_dense() * b)).norm() < 1e-12);
  CHECK((moved - wo).norm() > 1e-3);
  // The centralized recursion does keep W^o.
  CHECK((step_centralized(state_at(wo), GradientSource::exact(costs), cons, 0.1).w - wo).norm() < 1e-10);
}

TEST_CASE("noise-free beamformer run settles O(mu) from the KKT optimum") {
  const ULAScenario scn;
  const Scenario b = make_beamformer_scenario(scn, 0, true);
  const CMatrix a = b.combiner->to_dense();
  const CVector drive = driving_term(*b.combiner, *b.affine);
  RunConfig cfg;
  cfg.mu = 0.05;
  cfg.iterations = 20000;
  cfg.variant = Variant::DistributedAffine;
  cfg.exact_gradients = true;
  cfg.record_stride = 20000;
  cfg.keep_iterates = true;
  const Trajectory tr = run(cfg, b);
  const CVector limit = biased_fixed_point(a, b.costs, cfg.mu, drive);
  CHECK((tr.iterates.back() - limit).norm() <= 1e-6);

  // The offset from W^o is linear in mu, and small at the default step-size.
  const double e1 = (biased_fixed_point(a, b.costs, 0.01, drive) - b.w_opt).norm();
  const double e2 = (biased_fixed_point(a, b.costs, 0.005, drive) - b.w_opt).norm();
  CHECK(e1 / e2 == doctest::Approx(2.0).epsilon(0.05));
  const double oracle = to_db(sinr(extract_h(b.w_opt, scn), scn));
  const double at_default_mu = to_db(sinr(extract_h(biased_fixed_point(a, b.costs, 0.005, drive), scn), scn));
  CHECK(std::abs(oracle - at_default_mu) < 0.1);
}

TEST_CASE("linear projection iteration") {
  ComplexGaussian g(6);
  const TopologyPtr t = ring_topology(5, 1);
  const Subspace s = consensus_subspace(5, 1);
  const BlockMatrix a = design_pocs(t, s).matrix;
  const CVector w0 = g.vector(5);
  const LinearProjectionResult plain = linear_projection_iteration(a, s, std::nullopt, w0, 5000, 1e-10);
  CHECK((plain.w_limit - projector(s) * w0).norm() <= 1e-10);
  // d_D = 0: the residual curve is the power iteration applied to W_0.
  const CMatrix dense = a.to_dense();
  CMatrix p = dense;
  for (std::size_t i = 0; i < 10; ++i, p = dense * p)
    CHECK(plain.residual_curve[i] == doctest::Approx((p * w0 - projector(s) * w0).norm()).epsilon(1e-9));

  const CVector fixed = projector(s) * w0;
  const LinearProjectionResult at = linear_projection_iteration(a, s, std::nullopt, fixed, 10, 1e-12);
  CHECK(at.residual_curve.front() < 1e-14);

  // D = e_1 in M = 2 with d = 5.
  const TopologyPtr two = std::make_shared<const Topology>(Topology::fully_connected({1, 1}));
  CMatrix e1(2, 1);
  e1 << 1, 0;
  CVector five(1);
  five << 5.0;
  auto [s2, aff] = affine_to_subspace(e1, five, {1, 1});
  CMatrix a2(2, 2);
  a2 << 0.5, 0, 0, 1;
  CVector start(2);
  start << 2.0, -1.5;
  const LinearProjectionResult r =
      linear_projection_iteration(BlockMatrix::from_dense(two, a2), s2, aff, start, 200, 1e-12);
  CHECK(std::abs(r.w_limit(0) - 5.0) < 1e-12);
  CHECK(std::abs(r.w_limit(1) + 1.5) < 1e-12);

  const BlockMatrix ident = BlockMatrix::from_dense(t, CMatrix::Identity(5, 5));
  CHECK_THROWS_AS(linear_projection_iteration(ident, s, std::nullopt, w0, 50, 1e-10), MaxIterationsError);
}

TEST_CASE("run bookkeeping") {
  ComplexGaussian g(7);
  const Scenario s = consensus_scenario(g, 4, 2, 0.05);
  RunConfig cfg;
  cfg.iterations = 0;
  const Trajectory zero = run(cfg, s);
  CHECK(zero.iterations.size() == 1);
  CHECK(zero.sq_error.rows() == 1);
  CHECK(zero.sq_error.row(0).sum() == doctest::Approx(s.w_opt.squaredNorm()));

  cfg.iterations = 50;
  cfg.record_stride = 7;
  cfg.seed = 3;
  const Trajectory a = run(cfg, s);
  const Trajectory b = run(cfg, s);
  CHECK(a.iterations == std::vector<std::size_t>{0, 7, 14, 21, 28, 35, 42, 49});
  CHECK(a.sq_error == b.sq_error);
  cfg.seed = 4;
  CHECK(run(cfg, s).sq_error != a.sq_error);
}

TEST_CASE("divergence is detected and step-size is screened") {
  ComplexGaussian g(8);
  const Scenario s = consensus_scenario(g, 4, 2, 0.05);
  RunConfig cfg;
  cfg.mu = 50.0;
  cfg.iterations = 2000;
  CHECK_THROWS_AS(run(cfg, s), DivergenceError);

  std::vector<std::string> seen;
  auto prev = set_warning_handler([&](const std::string& m) { seen.push_back(m); });
  const bool ok_small = check_step_size(s, 0.01);
  const bool ok_large = check_step_size(s, 50.0);
  set_warning_handler(prev);
  CHECK(ok_small);
  CHECK_FALSE(ok_large);
  CHECK(seen.size() == 1);
}

TEST_CASE("centralized and distributed noise-free limits agree") {
  ComplexGaussian g(9);
  const Scenario s = consensus_scenario(g, 5, 2, 0.0, true);
  const GradientSource grad = GradientSource::exact(s.costs);
  NetworkState c = state_at(CVector::Zero(10)), d = c;
  for (int i = 0; i < 5000; ++i) {
    c = step_centralized(c, grad, s.subspace, 0.1);
    d = step_distributed(d, grad, *s.topology, *s.combiner, 0.1);
  }
  CHECK((c.w - d.w).norm() <= 1e-6);
  CHECK((d.w - s.w_opt).norm() <= 1e-6);
}

TEST_CASE("heterogeneous noise-free limit matches the biased fixed point") {
  ComplexGaussian g(19);
  const Scenario s = consensus_scenario(g, 5, 2, 0.0);
  const GradientSource grad = GradientSource::exact(s.costs);
  const CMatrix a = s.combiner->to_dense();
  double prev = 0.0;
  for (double mu : {0.02, 0.01}) {
    NetworkState d = state_at(CVector::Zero(10));
    for (int i = 0; i < 20000; ++i) d = step_distributed(d, grad, *s.topology, *s.combiner, mu);
    CHECK((d.w - biased_fixed_point(a, s.costs, mu, CVector::Zero(10))).norm() <= 1e-8);
    const double off = (d.w - s.w_opt).norm();
    if (prev > 0.0) CHECK(prev / off == doctest::Approx(2.0).epsilon(0.1));
    prev = off;
  }
}

}  // TEST_SUITE
