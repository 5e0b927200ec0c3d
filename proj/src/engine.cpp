#include "subadapt/engine.hpp"

#include <cmath>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "subadapt/log.hpp"

namespace subadapt {

std::string to_string(Variant v) {
  switch (v) {
    case Variant::Centralized: return "centralized";
    case Variant::Distributed: return "distributed";
    case Variant::DistributedAffine: return "distributed-affine";
    case Variant::LinearProjection: return "linear-projection";
  }
  return "unknown";
}

Variant variant_from_string(const std::string& s) {
  if (s == "centralized") return Variant::Centralized;
  if (s == "distributed") return Variant::Distributed;
  if (s == "distributed-affine") return Variant::DistributedAffine;
  if (s == "linear-projection") return Variant::LinearProjection;
  throw ConfigError("unknown variant '" + s + "'");
}

GradientSource GradientSource::exact(const std::vector<QuadraticCost>& costs) {
  GradientSource g;
  g.costs_ = &costs;
  return g;
}

GradientSource GradientSource::stochastic(const SampleStream& stream, std::uint64_t run) {
  GradientSource g;
  g.stream_ = &stream;
  g.run_ = run;
  return g;
}

void GradientSource::evaluate(std::uint64_t i, const std::vector<Index>& offsets, const CVector& w,
                              CVector& out) const {
  const auto n = offsets.size() - 1;
  out.resize(w.size());
  if (costs_) {
    if (costs_->size() != n) throw ShapeError("cost count differs from agent count");
    for (std::size_t k = 0; k < n; ++k) {
      const Index off = offsets[k];
      const Index len = offsets[k + 1] - off;
      out.segment(off, len) = (*costs_)[k].gradient(w.segment(off, len));
    }
    return;
  }
  stream_->draw_all(run_, i, scratch_);
  if (scratch_.size() != n) throw ShapeError("stream agent count differs from topology");
  for (std::size_t k = 0; k < n; ++k) {
    const Index off = offsets[k];
    const Index len = offsets[k + 1] - off;
    out.segment(off, len) = stochastic_gradient(scratch_[k], w.segment(off, len));
  }
}

void check_finite(const CVector& w, std::size_t iteration) {
  const double norm = w.norm();
  if (!std::isfinite(norm) || norm > 1e12) {
    std::ostringstream os;
    os << "iterate diverged at iteration " << iteration << " (||w|| = " << norm << ")";
    throw DivergenceError(os.str(), iteration);
  }
}

NetworkState step_centralized(const NetworkState& state, const GradientSource& grad, const Subspace& s,
                              double mu, const std::optional<AffineConstraint>& affine) {
  NetworkState next;
  next.iteration = state.iteration + 1;
  std::vector<Index> offsets{0};
  for (Index b : s.block_sizes) offsets.push_back(offsets.back() + b);
  CVector g;
  grad.evaluate(next.iteration, offsets, state.w, g);
  next.psi = state.w - mu * g;
  next.w = s.basis * (s.basis.adjoint() * next.psi);
  if (affine) next.w += affine->offset;
  check_finite(next.w, next.iteration);
  return next;
}

CVector driving_term(const BlockMatrix& a, const AffineConstraint& affine) {
  const auto& t = a.topology();
  if (affine.offset.size() != t.total_dim()) throw ShapeError("affine offset has wrong dimension");
  CVector ad;
  combine(t, a, affine.offset, ad);
  return affine.offset - ad;
}

LinearProjectionResult linear_projection_iteration(const BlockMatrix& a, const Subspace& s,
                                                   const std::optional<AffineConstraint>& affine,
                                                   const CVector& w0, std::size_t i_max, double tol) {
  const auto& t = a.topology();
  if (w0.size() != t.total_dim() || s.dim() != t.total_dim())
    throw ShapeError("linear projection inputs have inconsistent dimensions");
  CVector offset = CVector::Zero(t.total_dim());
  if (affine) offset = affine->offset;
  // (I - A + P_U) d_D
  CVector ad;
  combine(t, a, offset, ad);
  const CVector drive = offset - ad + s.basis * (s.basis.adjoint() * offset);
  const CVector target = s.basis * (s.basis.adjoint() * w0) + offset;

  LinearProjectionResult out;
  CVector w = w0;
  CVector next;
  for (std::size_t i = 1; i <= i_max; ++i) {
    combine(t, a, w, next, &drive);
    w.swap(next);
    check_finite(w, i);
    const double res = (w - target).norm();
    out.residual_curve.push_back(res);
    if (res <= tol) {
      out.w_limit = std::move(w);
      return out;
    }
  }
  std::ostringstream os;
  os << "linear projection iteration did not reach " << tol << " within " << i_max << " iterations";
  throw MaxIterationsError(os.str(), out.residual_curve.empty() ? 0.0 : out.residual_curve.back());
}

bool check_step_size(const Scenario& scenario, double mu) {
  const Curvature c = curvature_check(scenario.costs, scenario.subspace);
  if (mu >= 2.0 / c.delta) {
    std::ostringstream os;
    os << "step-size " << mu << " is at or above the divergence threshold 2/delta = " << 2.0 / c.delta;
    warn(os.str());
    return false;
  }
  return true;
}

Trajectory run(const RunConfig& cfg, const Scenario& scenario, const IterateMetric& metric) {
  const Topology& t = *scenario.topology;
  const Index m = t.total_dim();
  if (cfg.record_stride == 0) throw ConfigError("record_stride must be positive");
  if (!(cfg.mu >= 0.0)) throw ConfigError("step-size must be nonnegative");

  const bool needs_combiner = cfg.variant != Variant::Centralized;
  if (needs_combiner && !scenario.combiner) throw ConfigError("variant requires a combination matrix");
  const bool affine_variant =
      cfg.variant == Variant::DistributedAffine ||
      (cfg.variant == Variant::Centralized && scenario.affine.has_value());
  if (cfg.variant == Variant::DistributedAffine && !scenario.affine)
    throw ConfigError("distributed-affine variant requires an affine constraint");
  if (!cfg.exact_gradients && !scenario.stream && cfg.variant != Variant::LinearProjection)
    throw ConfigError("stochastic run requires a sample stream");

  NetworkState state;
  state.w = scenario.w0.size() == m ? scenario.w0 : CVector::Zero(m);

  CVector reference = scenario.w_opt;
  CVector drive;
  if (cfg.variant == Variant::DistributedAffine) drive = driving_term(*scenario.combiner, *scenario.affine);
  if (cfg.variant == Variant::LinearProjection) {
    const CVector offset = scenario.affine ? scenario.affine->offset : CVector::Zero(m);
    CVector ad;
    combine(t, *scenario.combiner, offset, ad);
    drive = offset - ad + scenario.subspace.basis * (scenario.subspace.basis.adjoint() * offset);
    reference = scenario.subspace.basis * (scenario.subspace.basis.adjoint() * state.w) + offset;
  }
  if (reference.size() != m) throw ShapeError("oracle W^o has wrong dimension");

  const GradientSource grad = cfg.exact_gradients
                                  ? GradientSource::exact(scenario.costs)
                                  : (scenario.stream ? GradientSource::stochastic(*scenario.stream, cfg.seed)
                                                     : GradientSource::exact(scenario.costs));

  Trajectory traj;
  traj.meta = cfg;
  const std::size_t n_rec = cfg.iterations / cfg.record_stride + 1;
  traj.sq_error.resize(static_cast<Index>(n_rec), t.n_agents());
  traj.iterations.reserve(n_rec);

  auto record = [&](std::size_t i) {
    const auto row = static_cast<Index>(traj.iterations.size());
    traj.iterations.push_back(i);
    for (Index k = 0; k < t.n_agents(); ++k)
      traj.sq_error(row, k) =
          (reference.segment(t.offset(k), t.block_size(k)) - state.w.segment(t.offset(k), t.block_size(k)))
              .squaredNorm();
    if (cfg.keep_iterates) traj.iterates.push_back(state.w);
    if (metric) traj.metric.push_back(metric(state.w));
  };

  record(0);
  CVector next;
  for (std::size_t i = 1; i <= cfg.iterations; ++i) {
    switch (cfg.variant) {
      case Variant::Centralized:
        state = step_centralized(state, grad, scenario.subspace, cfg.mu,
                                 affine_variant ? scenario.affine : std::nullopt);
        break;
      case Variant::Distributed:
        state = step_distributed(state, grad, t, *scenario.combiner, cfg.mu);
        break;
      case Variant::DistributedAffine:
        state = step_distributed_affine(state, grad, t, *scenario.combiner, drive, cfg.mu);
        break;
      case Variant::LinearProjection:
        combine(t, *scenario.combiner, state.w, next, &drive);
        state.w.swap(next);
        state.iteration = i;
        check_finite(state.w, i);
        break;
    }
    if (i % cfg.record_stride == 0) record(i);
  }
  return traj;
}

}  // namespace subadapt
