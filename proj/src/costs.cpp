#include "subadapt/costs.hpp"

#include <cmath>
#include <string>

#include <Eigen/Eigenvalues>

#include "subadapt/errors.hpp"
#include "subadapt/rng.hpp"

namespace subadapt {
namespace {

double lambda_max(const CMatrix& r) {
  if (r.size() == 0) return 0.0;
  return Eigen::SelfAdjointEigenSolver<CMatrix>(r, Eigen::EigenvaluesOnly).eigenvalues().maxCoeff();
}

CMatrix hermitian_sqrt(const CMatrix& r) {
  Eigen::SelfAdjointEigenSolver<CMatrix> es(hermitian_part(r));
  const RVector root = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return es.eigenvectors() * root.asDiagonal() * es.eigenvectors().adjoint();
}

CMatrix reduced_hessian(const std::vector<QuadraticCost>& costs, const Subspace& s) {
  const CMatrix r = stacked_hessian(costs);
  if (r.rows() != s.dim()) throw ShapeError("costs do not match subspace dimension");
  return hermitian_part(s.basis.adjoint() * r * s.basis);
}

}  // namespace

double QuadraticCost::value(const CVector& w) const {
  const cplx quad = w.dot(R * w);
  const cplx lin = w.dot(r);
  return quad.real() - 2.0 * lin.real() + c;
}

void validate_cost(const QuadraticCost& cost) {
  if (cost.R.rows() != cost.R.cols() || cost.r.size() != cost.R.rows())
    throw ShapeError("cost dimensions are inconsistent");
  if ((cost.R - cost.R.adjoint()).cwiseAbs().maxCoeff() > 1e-12)
    throw ShapeError("cost Hessian is not Hermitian");
  const RVector lam =
      Eigen::SelfAdjointEigenSolver<CMatrix>(cost.R, Eigen::EigenvaluesOnly).eigenvalues();
  if (lam.size() > 0 && lam.minCoeff() < -1e-10) throw ShapeError("cost Hessian is indefinite");
}

CVector true_gradient(const QuadraticCost& cost, const CVector& w) {
  if (w.size() != cost.dim()) throw ShapeError("gradient argument has wrong dimension");
  return cost.gradient(w);
}

CVector stochastic_gradient(const AgentSample& sample, const CVector& w) {
  const cplx err = sample.u.dot(w) - sample.d;  // u* w - d
  return sample.u * err;
}

void SampleStream::draw_all(std::uint64_t run, std::uint64_t i, std::vector<AgentSample>& out) const {
  out.resize(static_cast<std::size_t>(n_agents()));
  for (Index k = 0; k < n_agents(); ++k) out[static_cast<std::size_t>(k)] = draw(run, k, i);
}

double SampleStream::instantaneous_loss(const AgentSample& sample, const CVector& w) const {
  return std::norm(sample.d - sample.u.dot(w));
}

std::vector<QuadraticCost> SampleStream::induced_costs() const {
  std::vector<QuadraticCost> out;
  out.reserve(static_cast<std::size_t>(n_agents()));
  for (Index k = 0; k < n_agents(); ++k) out.push_back(induced_cost(k));
  return out;
}

RegressionStream::RegressionStream(StreamKind kind, std::vector<CMatrix> covariances,
                                   std::vector<CVector> w_ref, double noise_var, std::uint64_t seed)
    : kind_(kind), cov_(std::move(covariances)), w_ref_(std::move(w_ref)), noise_var_(noise_var), seed_(seed) {
  if (noise_var_ < 0.0) throw ShapeError("noise variance must be nonnegative");
  if (kind_ == StreamKind::MseRegression && w_ref_.size() != cov_.size())
    throw ShapeError("one reference vector per agent is required");
  if (kind_ == StreamKind::MinimumVariance && w_ref_.empty())
    for (const auto& c : cov_) w_ref_.push_back(CVector::Zero(c.rows()));
  for (std::size_t k = 0; k < cov_.size(); ++k) {
    validate_cost({cov_[k], CVector::Zero(cov_[k].rows()), 0.0});
    if (w_ref_[k].size() != cov_[k].rows()) throw ShapeError("reference vector has wrong dimension");
    sqrt_cov_.push_back(hermitian_sqrt(cov_[k]));
  }
}

AgentSample RegressionStream::draw(std::uint64_t run, Index k, std::uint64_t i) const {
  const auto ks = static_cast<std::size_t>(k);
  ComplexGaussian g(stream_key(seed_, {run, static_cast<std::uint64_t>(k), i}));
  AgentSample s;
  s.u = sqrt_cov_[ks] * g.vector(cov_[ks].rows());
  if (kind_ == StreamKind::MseRegression) s.d = s.u.dot(w_ref_[ks]) + g(noise_var_);
  return s;
}

QuadraticCost RegressionStream::induced_cost(Index k) const {
  const auto ks = static_cast<std::size_t>(k);
  const CMatrix& r = cov_[ks];
  if (kind_ == StreamKind::MinimumVariance) return {r, CVector::Zero(r.rows()), 0.0};
  const CVector rv = r * w_ref_[ks];
  return {r, rv, w_ref_[ks].dot(rv).real() + noise_var_};
}

NoiseBounds RegressionStream::noise_bounds(Index k, int h) const {
  const auto ks = static_cast<std::size_t>(k);
  const double tr = cov_[ks].trace().real();
  const double lmax = lambda_max(cov_[ks]);
  const double h2 = static_cast<double>(h * h);
  if (kind_ == StreamKind::MinimumVariance) return {h2 * tr * lmax, 0.0};
  return {2.0 * h2 * tr * lmax, 2.0 * tr * lmax * w_ref_[ks].squaredNorm() + noise_var_ * tr};
}

double RegressionStream::noise_second_moment(Index k, const CVector& w) const {
  // Circular Gaussian fourth moment: E[u u* X u u*] = R X R + tr(R X) R.
  const auto ks = static_cast<std::size_t>(k);
  const CMatrix& r = cov_[ks];
  const double tr = r.trace().real();
  if (kind_ == StreamKind::MinimumVariance) return tr * w.dot(r * w).real();
  const CVector e = w - w_ref_[ks];
  return tr * e.dot(r * e).real() + noise_var_ * tr;
}

CMatrix stacked_hessian(const std::vector<QuadraticCost>& costs) {
  Index m = 0;
  for (const auto& c : costs) m += c.dim();
  CMatrix out = CMatrix::Zero(m, m);
  Index off = 0;
  for (const auto& c : costs) {
    out.block(off, off, c.dim(), c.dim()) = c.R;
    off += c.dim();
  }
  return out;
}

CVector stacked_linear_term(const std::vector<QuadraticCost>& costs) {
  Index m = 0;
  for (const auto& c : costs) m += c.dim();
  CVector out(m);
  Index off = 0;
  for (const auto& c : costs) {
    out.segment(off, c.dim()) = c.r;
    off += c.dim();
  }
  return out;
}

CVector stacked_gradient(const std::vector<QuadraticCost>& costs, const CVector& w) {
  CVector out(w.size());
  Index off = 0;
  for (const auto& c : costs) {
    if (off + c.dim() > w.size()) throw ShapeError("stacked vector too short");
    out.segment(off, c.dim()) = c.gradient(w.segment(off, c.dim()));
    off += c.dim();
  }
  if (off != w.size()) throw ShapeError("stacked vector too long");
  return out;
}

CVector network_optimum(const std::vector<QuadraticCost>& costs, const Subspace& s,
                        const std::optional<AffineConstraint>& affine) {
  const CMatrix r = stacked_hessian(costs);
  const CVector rv = stacked_linear_term(costs);
  if (r.rows() != s.dim()) throw ShapeError("costs do not match subspace dimension");
  const CMatrix& u = s.basis;
  const CMatrix h = reduced_hessian(costs, s);
  const RVector lam = Eigen::SelfAdjointEigenSolver<CMatrix>(h, Eigen::EigenvaluesOnly).eigenvalues();
  if (lam.size() > 0 && lam.minCoeff() <= 1e-12 * std::max(1.0, lam.maxCoeff()))
    throw CurvatureError("reduced Hessian U* R U is singular");
  const auto llt = h.llt();
  if (!affine) return u * llt.solve(u.adjoint() * rv);
  const CVector& dd = affine->offset;
  if (dd.size() != s.dim()) throw ShapeError("affine offset has wrong dimension");
  return dd + u * llt.solve(u.adjoint() * (rv - r * dd));
}

BiasResult bias_vector(const std::vector<QuadraticCost>& costs, const CVector& w_opt, const Subspace& s) {
  BiasResult out;
  out.b = stacked_gradient(costs, w_opt);
  out.projected_norm = (s.basis.adjoint() * out.b).norm();
  return out;
}

Curvature curvature_check(const std::vector<QuadraticCost>& costs, const Subspace& s) {
  const RVector lam = Eigen::SelfAdjointEigenSolver<CMatrix>(reduced_hessian(costs, s),
                                                            Eigen::EigenvaluesOnly)
                          .eigenvalues();
  Curvature c{lam.minCoeff(), lam.maxCoeff()};
  if (c.nu <= 1e-12 * std::max(1.0, std::abs(c.delta)))
    throw CurvatureError("reduced Hessian is not positive definite (nu = " + std::to_string(c.nu) + ")");
  return c;
}

NoiseMoments noise_moment_check(const SampleStream& stream, Index k, const CVector& w,
                                std::size_t trials, int h, std::uint64_t run) {
  if (trials == 0) throw ShapeError("noise moment check needs at least one trial");
  const CVector g_true = stream.induced_cost(k).gradient(w);
  CVector sum = CVector::Zero(w.size());
  double sq = 0.0;
  for (std::size_t i = 0; i < trials; ++i) {
    const CVector s = g_true - stochastic_gradient(stream.draw(run, k, i), w);
    sum += s;
    sq += s.squaredNorm();
  }
  NoiseMoments out;
  out.trials = trials;
  out.mean_norm = (sum / static_cast<double>(trials)).norm();
  out.second_moment = sq / static_cast<double>(trials);
  out.bound = stream.noise_bounds(k, h).bound(w, h);
  out.var_ratio = out.bound > 0.0 ? out.second_moment / out.bound : (out.second_moment > 0.0 ? INFINITY : 0.0);
  return out;
}

}  // namespace subadapt
