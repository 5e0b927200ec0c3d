#pragma once

#include <complex>
#include <cstddef>

#include <Eigen/Dense>

namespace subadapt {

using cplx = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RMatrix = Eigen::MatrixXd;
using RVector = Eigen::VectorXd;
using Index = Eigen::Index;

/// Largest singular value.
double spectral_norm(const CMatrix& m);

/// Spectral radius via a dense general eigensolve.
double spectral_radius(const CMatrix& m);

/// (m + m*) / 2
inline CMatrix hermitian_part(const CMatrix& m) { return (m + m.adjoint()) * 0.5; }

/// Rotate each column so that its largest-magnitude entry is real and positive.
/// Makes eigenvector and orthonormal-basis constructors deterministic.
void normalize_column_phases(CMatrix& m);

/// Hermitian eigendecomposition with eigenvalues in ascending order.
struct HermitianEigen {
  RVector values;
  CMatrix vectors;
};
HermitianEigen hermitian_eigen(const CMatrix& m);

}  // namespace subadapt
