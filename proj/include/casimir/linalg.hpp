#pragma once

#include <complex>

#include <Eigen/Dense>

namespace casimir {

using cplx = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RMatrix = Eigen::MatrixXd;
using RVector = Eigen::VectorXd;

namespace linalg {

struct HermitianEigen {
    RVector values;   // ascending
    CMatrix vectors;  // column k pairs with values[k]
};

/// Full eigendecomposition of a Hermitian matrix (only the lower triangle is
/// read).  Throws NumericalFailure if the driver does not converge.
HermitianEigen hermitian_eigen(const CMatrix& h);

template <typename Derived>
double max_abs(const Eigen::MatrixBase<Derived>& m) {
    return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

/// log det of a square matrix via partial-pivot LU.  The imaginary part is
/// the principal argument of the determinant, in (-pi, pi].
cplx log_det(const CMatrix& m);

}  // namespace linalg
}  // namespace casimir
