#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <utility>
#include <vector>

#include "subadapt/linalg.hpp"
#include "subadapt/subspace.hpp"

namespace subadapt {

/// J(w) = w* R w - w* r - r* w + c with R Hermitian positive semidefinite.
struct QuadraticCost {
  CMatrix R;
  CVector r;
  double c = 0.0;

  double value(const CVector& w) const;
  /// Wirtinger gradient with respect to w*: R w - r.
  CVector gradient(const CVector& w) const { return R * w - r; }
  Index dim() const { return R.rows(); }
};

/// Throws ShapeError unless R is Hermitian (1e-12) with eigenvalues >= -1e-10.
void validate_cost(const QuadraticCost& cost);

CVector true_gradient(const QuadraticCost& cost, const CVector& w);

/// Gradient-noise moment bound E||s||^2 <= (beta^2 / h^2) ||w||^2 + sigma^2.
struct NoiseBounds {
  double beta_sq = 0.0;
  double sigma_sq = 0.0;
  double bound(const CVector& w, int h) const {
    return beta_sq / static_cast<double>(h * h) * w.squaredNorm() + sigma_sq;
  }
};

/// One streaming observation: regressor u and desired response d.
struct AgentSample {
  CVector u;
  cplx d{0.0, 0.0};
};

/// u (u* w - d): the instantaneous gradient of |d - u* w|^2 with respect to w*.
CVector stochastic_gradient(const AgentSample& sample, const CVector& w);

/// Seeded source of per-agent samples. Draws are pure functions of
/// (seed, run, agent, iteration) so runs may execute in any order.
class SampleStream {
 public:
  virtual ~SampleStream() = default;

  virtual Index n_agents() const = 0;
  virtual Index agent_dim(Index k) const = 0;
  virtual AgentSample draw(std::uint64_t run, Index k, std::uint64_t i) const = 0;
  /// Fills one sample per agent for iteration i; streams with a shared
  /// snapshot override this to draw it once.
  virtual void draw_all(std::uint64_t run, std::uint64_t i, std::vector<AgentSample>& out) const;

  /// The risk the samples induce at agent k.
  virtual QuadraticCost induced_cost(Index k) const = 0;
  /// Analytic gradient-noise bound at agent k for data-type flag h.
  virtual NoiseBounds noise_bounds(Index k, int h) const = 0;
  /// Analytic E||s_k(w)||^2.
  virtual double noise_second_moment(Index k, const CVector& w) const = 0;
  /// Instantaneous loss |d - u* w|^2 whose mean is J_k(w).
  double instantaneous_loss(const AgentSample& sample, const CVector& w) const;

  std::vector<QuadraticCost> induced_costs() const;
};

enum class StreamKind { MseRegression, MinimumVariance };

/// Independent circular Gaussian regressors u ~ CN(0, R_k) per agent; for
/// MSE regression d = u* w_ref + v with v ~ CN(0, sigma_v^2).
class RegressionStream final : public SampleStream {
 public:
  RegressionStream(StreamKind kind, std::vector<CMatrix> covariances, std::vector<CVector> w_ref,
                   double noise_var, std::uint64_t seed);

  Index n_agents() const override { return static_cast<Index>(cov_.size()); }
  Index agent_dim(Index k) const override { return cov_[static_cast<std::size_t>(k)].rows(); }
  AgentSample draw(std::uint64_t run, Index k, std::uint64_t i) const override;
  QuadraticCost induced_cost(Index k) const override;
  NoiseBounds noise_bounds(Index k, int h) const override;
  double noise_second_moment(Index k, const CVector& w) const override;

  StreamKind kind() const { return kind_; }
  std::uint64_t seed() const { return seed_; }
  double noise_var() const { return noise_var_; }
  const CVector& w_ref(Index k) const { return w_ref_[static_cast<std::size_t>(k)]; }

 private:
  StreamKind kind_;
  std::vector<CMatrix> cov_;
  std::vector<CMatrix> sqrt_cov_;
  std::vector<CVector> w_ref_;
  double noise_var_;
  std::uint64_t seed_;
};

/// Block-diagonal stacked Hessian diag{R_k}.
CMatrix stacked_hessian(const std::vector<QuadraticCost>& costs);
/// col{r_k}.
CVector stacked_linear_term(const std::vector<QuadraticCost>& costs);
/// col{R_k w_k - r_k} for stacked W.
CVector stacked_gradient(const std::vector<QuadraticCost>& costs, const CVector& w);

/// Minimizer of sum_k J_k(w_k) over the constraint set. Subspace case:
/// W = U (U*RU)^{-1} U* r. Affine case: W = d_D + U (U*RU)^{-1} U* (r - R d_D).
/// Throws CurvatureError when U*RU is singular.
CVector network_optimum(const std::vector<QuadraticCost>& costs, const Subspace& s,
                        const std::optional<AffineConstraint>& affine = std::nullopt);

struct BiasResult {
  CVector b;
  double projected_norm = 0.0;  // ||U* b||
};
BiasResult bias_vector(const std::vector<QuadraticCost>& costs, const CVector& w_opt,
                       const Subspace& s);

struct Curvature {
  double nu = 0.0;
  double delta = 0.0;
};
/// Extreme eigenvalues of U* R U. Throws CurvatureError when nu <= 0.
Curvature curvature_check(const std::vector<QuadraticCost>& costs, const Subspace& s);

struct NoiseMoments {
  double mean_norm = 0.0;      // ||empirical mean of s||
  double second_moment = 0.0;  // empirical E||s||^2
  double bound = 0.0;          // (beta^2/h^2)||w||^2 + sigma^2
  double var_ratio = 0.0;      // second_moment / bound
  std::size_t trials = 0;
};
/// Empirical gradient-noise moments at agent k, fixed w, over iterations
/// 0..trials-1 of the given run.
NoiseMoments noise_moment_check(const SampleStream& stream, Index k, const CVector& w,
                                std::size_t trials, int h = 2, std::uint64_t run = 0);

}  // namespace subadapt
