#include "subadapt/linalg.hpp"

#include <cmath>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

namespace subadapt {

double spectral_norm(const CMatrix& m) {
  if (m.size() == 0) return 0.0;
  Eigen::JacobiSVD<CMatrix> svd(m);
  return svd.singularValues()(0);
}

double spectral_radius(const CMatrix& m) {
  if (m.size() == 0) return 0.0;
  Eigen::ComplexEigenSolver<CMatrix> es(m, /*computeEigenvectors=*/false);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

void normalize_column_phases(CMatrix& m) {
  for (Index j = 0; j < m.cols(); ++j) {
    Index imax = 0;
    double best = -1.0;
    for (Index i = 0; i < m.rows(); ++i) {
      // Ties are broken toward the lowest row so the choice is reproducible.
      const double mag = std::abs(m(i, j));
      if (mag > best * (1.0 + 1e-12)) {
        best = mag;
        imax = i;
      }
    }
    if (best <= 0.0) continue;
    const cplx phase = std::conj(m(imax, j)) / best;
    m.col(j) *= phase;
    m(imax, j) = cplx(std::abs(m(imax, j)), 0.0);
  }
}

HermitianEigen hermitian_eigen(const CMatrix& m) {
  Eigen::SelfAdjointEigenSolver<CMatrix> es(hermitian_part(m));
  return {es.eigenvalues(), es.eigenvectors()};
}

}  // namespace subadapt
