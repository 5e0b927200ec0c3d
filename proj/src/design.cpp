#include "subadapt/combiner.hpp"

#include <cmath>
#include <sstream>
#include <vector>
#include <algorithm>
#include <limits>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/Sparse>

#include "subadapt/errors.hpp"

namespace subadapt {
namespace {

constexpr double kInvSqrt2 = 0.70710678118654752440;

// Real coordinates of a Hermitian matrix supported on the block pattern,
// scaled so that the Euclidean norm of the coordinates equals the Frobenius
// norm of the matrix. Off-diagonal entries (r < c) contribute two coordinates
// (real and imaginary part of a_rc times sqrt 2); diagonal entries one.
class HermitianPattern {
 public:
  struct Entry {
    Index row;
    Index col;
    Index param;  // first coordinate; off-diagonal entries also use param + 1
  };

  explicit HermitianPattern(const Topology& t) : dim_(t.total_dim()) {
    for (Index k = 0; k < t.n_agents(); ++k)
      for (Index l : t.neighbors(k)) {
        if (l < k) continue;
        for (Index i = 0; i < t.block_size(k); ++i)
          for (Index j = 0; j < t.block_size(l); ++j) {
            const Index r = t.offset(k) + i;
            const Index c = t.offset(l) + j;
            if (r > c) continue;
            entries_.push_back({r, c, n_params_});
            n_params_ += (r == c) ? 1 : 2;
          }
      }
  }

  Index n_params() const { return n_params_; }
  const std::vector<Entry>& entries() const { return entries_; }

  CMatrix to_dense(const RVector& y) const {
    CMatrix a = CMatrix::Zero(dim_, dim_);
    for (const auto& e : entries_) {
      if (e.row == e.col) {
        a(e.row, e.col) = y(e.param);
      } else {
        const cplx v(y(e.param) * kInvSqrt2, y(e.param + 1) * kInvSqrt2);
        a(e.row, e.col) = v;
        a(e.col, e.row) = std::conj(v);
      }
    }
    return a;
  }

  // Orthogonal projection of an arbitrary matrix onto the Hermitian pattern
  // space, expressed in coordinates.
  RVector from_dense(const CMatrix& a) const {
    RVector y(n_params_);
    for (const auto& e : entries_) {
      if (e.row == e.col) {
        y(e.param) = a(e.row, e.col).real();
      } else {
        const cplx v = 0.5 * (a(e.row, e.col) + std::conj(a(e.col, e.row)));
        y(e.param) = v.real() / kInvSqrt2;
        y(e.param + 1) = v.imag() / kInvSqrt2;
      }
    }
    return y;
  }

 private:
  Index dim_;
  Index n_params_ = 0;
  std::vector<Entry> entries_;
};

// Projection onto {y : C y = c}, the real form of A U = U over the pattern.
// For Hermitian A this also enforces U* A = U*.
class AffineProjector {
 public:
  AffineProjector(const HermitianPattern& pattern, const CMatrix& u) {
    const Index m = u.rows();
    const Index p = u.cols();
    // Constraint row for Re/Im of (AU)_{i,q}: 2 * (i * P + q) + {0, 1}.
    auto row_re = [p](Index i, Index q) { return 2 * (i * p + q); };
    std::vector<Eigen::Triplet<double>> trips;
    for (const auto& e : pattern.entries()) {
      for (Index q = 0; q < p; ++q) {
        if (e.row == e.col) {
          const cplx g = u(e.row, q);
          trips.emplace_back(row_re(e.row, q), e.param, g.real());
          trips.emplace_back(row_re(e.row, q) + 1, e.param, g.imag());
          continue;
        }
        // d(AU)_{r,q}: a_rc U_{c,q};  d(AU)_{c,q}: conj(a_rc) U_{r,q}.
        const cplx gr = u(e.col, q) * kInvSqrt2;
        const cplx gc = u(e.row, q) * kInvSqrt2;
        const cplx i1(0.0, 1.0);
        const cplx dr1 = gr, dr2 = i1 * gr, dc1 = gc, dc2 = -i1 * gc;
        trips.emplace_back(row_re(e.row, q), e.param, dr1.real());
        trips.emplace_back(row_re(e.row, q) + 1, e.param, dr1.imag());
        trips.emplace_back(row_re(e.row, q), e.param + 1, dr2.real());
        trips.emplace_back(row_re(e.row, q) + 1, e.param + 1, dr2.imag());
        trips.emplace_back(row_re(e.col, q), e.param, dc1.real());
        trips.emplace_back(row_re(e.col, q) + 1, e.param, dc1.imag());
        trips.emplace_back(row_re(e.col, q), e.param + 1, dc2.real());
        trips.emplace_back(row_re(e.col, q) + 1, e.param + 1, dc2.imag());
      }
    }
    c_mat_.resize(2 * m * p, pattern.n_params());
    c_mat_.setFromTriplets(trips.begin(), trips.end());
    c_mat_.prune(0.0);
    ct_mat_ = c_mat_.transpose();

    rhs_.resize(2 * m * p);
    for (Index i = 0; i < m; ++i)
      for (Index q = 0; q < p; ++q) {
        rhs_(row_re(i, q)) = u(i, q).real();
        rhs_(row_re(i, q) + 1) = u(i, q).imag();
      }

    // C C^T is singular (U K U* with K skew-Hermitian is invisible to the
    // pattern); a tiny ridge plus refinement recovers the exact projection.
    Eigen::SparseMatrix<double> g = c_mat_ * ct_mat_;
    RMatrix gd = RMatrix(g);
    const double ridge = 1e-12 * std::max(1.0, gd.diagonal().maxCoeff());
    gd.diagonal().array() += ridge;
    llt_.compute(gd);
    if (llt_.info() != Eigen::Success) throw Error("constraint Gram factorization failed");
  }

  /// Projects in place; returns the remaining residual ||C y - c||.
  double project(RVector& y) const {
    double res = std::numeric_limits<double>::infinity();
    const double floor = 1e-15 * (1.0 + rhs_.norm());
    for (int pass = 0; pass < 30; ++pass) {
      RVector r = c_mat_ * y - rhs_;
      const double norm = r.norm();
      if (norm <= floor || norm >= 0.5 * res) {
        res = std::min(res, norm);
        break;
      }
      res = norm;
      y.noalias() -= ct_mat_ * llt_.solve(r);
    }
    return std::min(res, (c_mat_ * y - rhs_).norm());
  }

 private:
  Eigen::SparseMatrix<double> c_mat_;
  Eigen::SparseMatrix<double> ct_mat_;
  RVector rhs_;
  Eigen::LLT<RMatrix> llt_;
};

}  // namespace

DesignResult design_pocs(TopologyPtr topology, const Subspace& s, const DesignConfig& cfg) {
  if (!(cfg.epsilon > 0.0 && cfg.epsilon < 1.0)) throw ConfigError("epsilon must lie in (0, 1)");
  if (!(cfg.tol > 0.0)) throw ConfigError("tol must be positive");
  if (!cfg.hermitian) throw ConfigError("only Hermitian combiner design is supported");
  if (s.dim() != topology->total_dim()) throw ShapeError("subspace does not match topology");

  const HermitianPattern pattern(*topology);
  const AffineProjector affine(pattern, s.basis);
  const CMatrix pu = projector(s);
  const double bound = 1.0 - cfg.epsilon;
  const double clip = bound - cfg.margin * cfg.epsilon;

  RVector y = pattern.from_dense(pu);
  double aff_res = affine.project(y);
  if (aff_res > cfg.tol) {
    std::ostringstream os;
    os << "sparsity pattern cannot satisfy A U = U (least-squares residual " << aff_res << ")";
    throw InfeasibleError(os.str(), 0, aff_res);
  }

  DesignResult result{BlockMatrix(topology), 0, aff_res, 0.0, {}};
  for (std::size_t it = 0; it <= cfg.max_iters; ++it) {
    const CMatrix a = pattern.to_dense(y);
    Eigen::SelfAdjointEigenSolver<CMatrix> es(a - pu);
    const RVector lam = es.eigenvalues();
    const double gap = lam.cwiseAbs().maxCoeff();

    RVector clipped = lam.cwiseMax(-clip).cwiseMin(clip);
    const double dist = (lam - clipped).norm();  // Frobenius distance to the ball
    result.residual_trace.push_back(std::max(dist, aff_res));

    if (gap <= bound && aff_res <= cfg.tol) {
      result.matrix = BlockMatrix::from_dense(topology, a);
      result.iterations = it;
      result.affine_residual = std::max((a * s.basis - s.basis).norm(),
                                        (s.basis.adjoint() * a - s.basis.adjoint()).norm());
      result.spectral_gap = gap;
      return result;
    }
    if (it == cfg.max_iters) break;

    const CMatrix next = pu + es.eigenvectors() * clipped.asDiagonal() * es.eigenvectors().adjoint();
    RVector y_next = pattern.from_dense(next);
    aff_res = affine.project(y_next);
    const double step = (y_next - y).norm();
    y = std::move(y_next);
    if (step <= 1e-13 * (1.0 + y.norm())) {
      std::ostringstream os;
      os << "alternating projections stalled at distance " << dist << " from the spectral bound";
      throw InfeasibleError(os.str(), it + 1, dist);
    }
  }
  std::ostringstream os;
  os << "no feasible combiner after " << cfg.max_iters << " iterations (residual "
     << result.residual_trace.back() << ")";
  throw InfeasibleError(os.str(), cfg.max_iters, result.residual_trace.back());
}

}  // namespace subadapt
