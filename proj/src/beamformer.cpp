#include "subadapt/beamformer.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "subadapt/errors.hpp"
#include "subadapt/rng.hpp"

namespace subadapt {

void ULAScenario::validate() const {
  if (n_antennas < 1) throw ConfigError("beamformer: need at least one antenna");
  if (nu < 1 || nu > n_antennas - 1) throw ConfigError("beamformer: nu must lie in [1, N-1]");
  if (doas.empty() || doas.size() != powers.size())
    throw ConfigError("beamformer: doas and powers must be nonempty and of equal length");
  for (double p : powers)
    if (!(p > 0.0)) throw ConfigError("beamformer: source powers must be positive");
  if (!(noise_var > 0.0)) throw ConfigError("beamformer: noise_var must be positive");
  if (!(spacing_ratio > 0.0)) throw ConfigError("beamformer: spacing_ratio must be positive");
  if (constraint_doas.empty() || constraint_doas.size() != constraint_gains.size())
    throw ConfigError("beamformer: constraint_doas and constraint_gains must match");
  if (static_cast<Index>(constraint_doas.size()) > n_antennas)
    throw ConfigError("beamformer: more constraints than antennas");
}

CVector steering_vector(double theta_deg, Index n, double spacing_ratio) {
  const double tau = 2.0 * std::numbers::pi * spacing_ratio * std::sin(theta_deg * std::numbers::pi / 180.0);
  CVector a(n);
  for (Index m = 0; m < n; ++m) a(m) = std::polar(1.0, -static_cast<double>(m) * tau);
  return a;
}

std::vector<std::vector<Index>> ula_assignment(Index n, Index nu) {
  std::vector<std::vector<Index>> out(static_cast<std::size_t>(n));
  for (Index k = 0; k < n; ++k)
    for (Index m = std::max<Index>(0, k - nu); m <= std::min(k + nu, n - 1); ++m)
      out[static_cast<std::size_t>(k)].push_back(m);
  return out;
}

TopologyPtr ula_topology(Index n, Index nu) {
  if (nu < 1 || nu > n - 1) throw ConfigError("beamformer: nu must lie in [1, N-1]");
  auto hoods = ula_assignment(n, nu);
  std::vector<Index> sizes;
  for (const auto& h : hoods) sizes.push_back(static_cast<Index>(h.size()));
  return std::make_shared<const Topology>(Topology::from_neighborhoods(sizes, hoods));
}

namespace {

CMatrix source_covariance(const ULAScenario& scn, std::size_t first) {
  CMatrix r = scn.noise_var * CMatrix::Identity(scn.n_antennas, scn.n_antennas);
  for (std::size_t s = first; s < scn.doas.size(); ++s) {
    const CVector a = steering_vector(scn.doas[s], scn.n_antennas, scn.spacing_ratio);
    r.noalias() += scn.powers[s] * a * a.adjoint();
  }
  return r;
}

// Position of each copy of h_m in the stacked W, ordered by agent.
std::vector<std::vector<Index>> copy_positions(const std::vector<std::vector<Index>>& assignment, Index n) {
  std::vector<std::vector<Index>> pos(static_cast<std::size_t>(n));
  Index offset = 0;
  for (const auto& held : assignment) {
    for (std::size_t j = 0; j < held.size(); ++j)
      pos[static_cast<std::size_t>(held[j])].push_back(offset + static_cast<Index>(j));
    offset += static_cast<Index>(held.size());
  }
  return pos;
}

std::vector<CMatrix> block_covariances(const ULAScenario& scn) {
  const auto assignment = ula_assignment(scn.n_antennas, scn.nu);
  const CMatrix r_x = array_covariance(scn);
  std::vector<CMatrix> out;
  for (const auto& held : assignment) {
    const auto mk = static_cast<Index>(held.size());
    CMatrix r(mk, mk);
    for (Index a = 0; a < mk; ++a)
      for (Index b = 0; b < mk; ++b) {
        const Index m = held[static_cast<std::size_t>(a)];
        const Index n = held[static_cast<std::size_t>(b)];
        const double sm = static_cast<double>(assignment[static_cast<std::size_t>(m)].size());
        const double sn = static_cast<double>(assignment[static_cast<std::size_t>(n)].size());
        r(a, b) = r_x(m, n) / std::sqrt(sm * sn);
      }
    out.push_back(std::move(r));
  }
  return out;
}

double lambda_max(const CMatrix& r) { return hermitian_eigen(r).values.maxCoeff(); }

}  // namespace

CMatrix array_covariance(const ULAScenario& scn) { return source_covariance(scn, 0); }

CMatrix interference_covariance(const ULAScenario& scn) { return source_covariance(scn, 1); }

CMatrix constraint_matrix(const ULAScenario& scn) {
  CMatrix d(scn.n_antennas, static_cast<Index>(scn.constraint_doas.size()));
  for (std::size_t q = 0; q < scn.constraint_doas.size(); ++q)
    d.col(static_cast<Index>(q)) = steering_vector(scn.constraint_doas[q], scn.n_antennas, scn.spacing_ratio);
  return d;
}

ArrayStream::ArrayStream(ULAScenario scn, std::uint64_t seed) : scn_(std::move(scn)), seed_(seed) {
  // Silent sources or a noiseless array are allowed here; validate() rejects
  // them for experiment configs.
  if (scn_.n_antennas < 1 || scn_.nu < 1 || scn_.nu > scn_.n_antennas - 1 ||
      scn_.doas.size() != scn_.powers.size() || scn_.noise_var < 0.0)
    throw ConfigError("ArrayStream: invalid array geometry or source list");
  for (double p : scn_.powers)
    if (p < 0.0) throw ConfigError("ArrayStream: negative source power");
  assignment_ = ula_assignment(scn_.n_antennas, scn_.nu);
  for (Index m = 0; m < scn_.n_antennas; ++m) {
    // |N_m| equals the number of agents holding h_m for banded neighborhoods.
    weight_.push_back(1.0 / std::sqrt(static_cast<double>(assignment_[static_cast<std::size_t>(m)].size())));
  }
  for (double th : scn_.doas) steering_.push_back(steering_vector(th, scn_.n_antennas, scn_.spacing_ratio));
  r_x_ = array_covariance(scn_);
}

CVector ArrayStream::snapshot(std::uint64_t run, std::uint64_t i) const {
  ComplexGaussian g(stream_key(seed_, {run, i}));
  CVector x = g.vector(scn_.n_antennas, scn_.noise_var);
  for (std::size_t s = 0; s < steering_.size(); ++s) x += g(scn_.powers[s]) * steering_[s];
  return x;
}

AgentSample ArrayStream::local(Index k, const CVector& x) const {
  const auto& held = assignment_[static_cast<std::size_t>(k)];
  AgentSample out;
  out.u.resize(static_cast<Index>(held.size()));
  for (std::size_t j = 0; j < held.size(); ++j)
    out.u(static_cast<Index>(j)) = weight_[static_cast<std::size_t>(held[j])] * x(held[j]);
  return out;
}

AgentSample ArrayStream::draw(std::uint64_t run, Index k, std::uint64_t i) const {
  return local(k, snapshot(run, i));
}

void ArrayStream::draw_all(std::uint64_t run, std::uint64_t i, std::vector<AgentSample>& out) const {
  const CVector x = snapshot(run, i);
  out.resize(assignment_.size());
  for (Index k = 0; k < n_agents(); ++k) out[static_cast<std::size_t>(k)] = local(k, x);
}

QuadraticCost ArrayStream::induced_cost(Index k) const {
  const auto& held = assignment_[static_cast<std::size_t>(k)];
  const auto mk = static_cast<Index>(held.size());
  QuadraticCost c;
  c.R.resize(mk, mk);
  for (Index a = 0; a < mk; ++a)
    for (Index b = 0; b < mk; ++b) {
      const auto m = static_cast<std::size_t>(held[static_cast<std::size_t>(a)]);
      const auto n = static_cast<std::size_t>(held[static_cast<std::size_t>(b)]);
      c.R(a, b) = weight_[m] * weight_[n] * r_x_(static_cast<Index>(m), static_cast<Index>(n));
    }
  c.r = CVector::Zero(mk);
  return c;
}

NoiseBounds ArrayStream::noise_bounds(Index k, int h) const {
  const CMatrix r = induced_cost(k).R;
  return {static_cast<double>(h * h) * r.trace().real() * lambda_max(r), 0.0};
}

double ArrayStream::noise_second_moment(Index k, const CVector& w) const {
  // u is circular Gaussian, so E||(uu* - R) w||^2 = tr(R) w* R w.
  const CMatrix r = induced_cost(k).R;
  return r.trace().real() * w.dot(r * w).real();
}

std::pair<CMatrix, CVector> build_constraints(const ULAScenario& scn) {
  scn.validate();
  const Index n = scn.n_antennas;
  const auto assignment = ula_assignment(n, scn.nu);
  const auto pos = copy_positions(assignment, n);
  Index m_total = 0;
  for (const auto& h : assignment) m_total += static_cast<Index>(h.size());

  Index consensus_rows = 0;
  for (const auto& p : pos) consensus_rows += static_cast<Index>(p.size()) - 1;
  const CMatrix d = constraint_matrix(scn);
  const Index q = d.cols();

  CMatrix net = CMatrix::Zero(m_total, consensus_rows + q);
  Index col = 0;
  for (const auto& p : pos)
    for (std::size_t j = 0; j + 1 < p.size(); ++j, ++col) {
      net(p[j], col) = 1.0;
      net(p[j + 1], col) = -1.0;
    }
  // Column c of D_net gives the row c of D_net* W = d; a_q(m) placed at the
  // first copy of h_m gives sum_m conj(a_q(m)) h_m.
  for (Index c = 0; c < q; ++c, ++col)
    for (Index m = 0; m < n; ++m) net(pos[static_cast<std::size_t>(m)].front(), col) = d(m, c);

  Eigen::JacobiSVD<CMatrix> svd(net);
  const RVector sv = svd.singularValues();
  if (sv.size() == 0 || sv.minCoeff() <= 1e-10 * sv.maxCoeff())
    throw RankError("beamformer: merged constraint matrix is rank deficient");

  CVector rhs = CVector::Zero(net.cols());
  for (Index c = 0; c < q; ++c) rhs(consensus_rows + c) = scn.constraint_gains[static_cast<std::size_t>(c)];
  return {net, rhs};
}

CMatrix partial_covariance(const RMatrix& connection, const CMatrix& r_x) {
  if (connection.rows() != connection.cols() || connection.rows() != r_x.rows() || r_x.rows() != r_x.cols())
    throw ShapeError("partial_covariance: dimension mismatch");
  const RMatrix e2 = connection * connection;
  const RVector deg = connection.rowwise().sum();
  CMatrix out(r_x.rows(), r_x.cols());
  for (Index k = 0; k < r_x.rows(); ++k)
    for (Index l = 0; l < r_x.cols(); ++l) out(k, l) = e2(k, l) / std::sqrt(deg(k) * deg(l)) * r_x(k, l);
  return out;
}

CVector lcmv_optimum(const CMatrix& r_x, const CMatrix& d, const CVector& b) {
  Eigen::LLT<CMatrix> llt(r_x);
  if (llt.info() != Eigen::Success || hermitian_eigen(r_x).values.minCoeff() <= 1e-12 * r_x.norm())
    throw CurvatureError("lcmv_optimum: R_x is not positive definite");
  const CMatrix rinv_d = llt.solve(d);
  const CMatrix gram = d.adjoint() * rinv_d;
  Eigen::FullPivLU<CMatrix> lu(gram);
  if (!lu.isInvertible()) throw RankError("lcmv_optimum: D is rank deficient");
  return rinv_d * lu.solve(b);
}

CVector network_lcmv_optimum(const ULAScenario& scn) { return network_lcmv_optimum(scn, build_constraints(scn).second); }

CVector network_lcmv_optimum(const ULAScenario& scn, const CVector& rhs) {
  const auto [net, d_default] = build_constraints(scn);
  if (rhs.size() != d_default.size()) throw ShapeError("network_lcmv_optimum: rhs size mismatch");
  const auto covs = block_covariances(scn);
  const Index m = net.rows();
  const Index c = net.cols();
  CMatrix kkt = CMatrix::Zero(m + c, m + c);
  Index off = 0;
  for (const auto& r : covs) {
    kkt.block(off, off, r.rows(), r.cols()) = r;
    off += r.rows();
  }
  kkt.block(0, m, m, c) = net;
  kkt.block(m, 0, c, m) = net.adjoint();
  CVector b = CVector::Zero(m + c);
  b.tail(c) = rhs;
  Eigen::FullPivLU<CMatrix> lu(kkt);
  if (!lu.isInvertible()) throw CurvatureError("network_lcmv_optimum: singular KKT system");
  return lu.solve(b).head(m);
}

CVector extract_h(const CVector& w, const ULAScenario& scn) {
  const auto assignment = ula_assignment(scn.n_antennas, scn.nu);
  CVector h = CVector::Zero(scn.n_antennas);
  RVector count = RVector::Zero(scn.n_antennas);
  Index off = 0;
  for (const auto& held : assignment) {
    for (std::size_t j = 0; j < held.size(); ++j) {
      h(held[j]) += w(off + static_cast<Index>(j));
      count(held[j]) += 1.0;
    }
    off += static_cast<Index>(held.size());
  }
  if (off != w.size()) throw ShapeError("extract_h: stacked vector does not match the array layout");
  return h.cwiseQuotient(count.cast<cplx>());
}

double sinr(const CVector& h, const ULAScenario& scn) {
  if (h.squaredNorm() == 0.0) return 0.0;
  const CVector a0 = steering_vector(scn.doas.front(), scn.n_antennas, scn.spacing_ratio);
  const double num = scn.powers.front() * std::norm(h.dot(a0));
  const double den = h.dot(interference_covariance(scn) * h).real();
  return den > 0.0 ? num / den : 0.0;
}

Scenario make_beamformer_scenario(const ULAScenario& scn, std::uint64_t seed, bool design_combiner,
                                  const DesignConfig& design) {
  scn.validate();
  Scenario out;
  out.topology = ula_topology(scn.n_antennas, scn.nu);
  auto [net, rhs] = build_constraints(scn);
  auto [sub, affine] = affine_to_subspace(net, rhs, out.topology->block_sizes());
  out.subspace = std::move(sub);
  out.affine = std::move(affine);
  auto stream = std::make_shared<ArrayStream>(scn, seed);
  out.costs = stream->induced_costs();
  out.stream = stream;
  out.w_opt = network_lcmv_optimum(scn, rhs);
  if (design_combiner) out.combiner = design_pocs(out.topology, out.subspace, design).matrix;
  return out;
}

IterateMetric sinr_metric(const ULAScenario& scn) {
  // The returned closure owns its copies, so it is safe to call concurrently.
  const CMatrix r_z = interference_covariance(scn);
  const CVector a0 = steering_vector(scn.doas.front(), scn.n_antennas, scn.spacing_ratio);
  const double p0 = scn.powers.front();
  return [scn, r_z, a0, p0](const CVector& w) {
    const CVector h = extract_h(w, scn);
    if (h.squaredNorm() == 0.0) return 0.0;
    const double den = h.dot(r_z * h).real();
    return den > 0.0 ? p0 * std::norm(h.dot(a0)) / den : 0.0;
  };
}

}  // namespace subadapt
