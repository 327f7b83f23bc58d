#include <cmath>
#include <complex>
#include <string>
#include <vector>

#define lapack_complex_float std::complex<float>
#define lapack_complex_double std::complex<double>
#include <lapacke.h>

#include "casimir/errors.hpp"
#include "casimir/linalg.hpp"

namespace casimir::linalg {

HermitianEigen hermitian_eigen(const CMatrix& h) {
    if (h.rows() != h.cols()) throw DomainError("hermitian_eigen: matrix is not square");
    const auto n = static_cast<lapack_int>(h.rows());
    HermitianEigen out{RVector(n), CMatrix(n, n)};
    if (n == 0) return out;

    // zheevd from the system OpenBLAS returns wrong eigenpairs for n >~ 400,
    // so use the MRRR driver.
    CMatrix work = h;
    std::vector<lapack_int> support(2 * static_cast<std::size_t>(n));
    lapack_int found = 0;
    const lapack_int info =
        LAPACKE_zheevr(LAPACK_COL_MAJOR, 'V', 'A', 'L', n, work.data(), n, 0.0, 0.0, 0, 0, 0.0, &found,
                       out.values.data(), out.vectors.data(), n, support.data());
    if (info != 0)
        throw NumericalFailure("zheevr failed with info = " + std::to_string(info));
    if (found != n)
        throw NumericalFailure("zheevr returned " + std::to_string(found) + " of " + std::to_string(n) +
                               " eigenpairs");
    return out;
}

cplx log_det(const CMatrix& m) {
    Eigen::PartialPivLU<CMatrix> lu(m);
    const CMatrix& packed = lu.matrixLU();
    double log_mod = 0.0;
    double arg = 0.0;
    for (Eigen::Index i = 0; i < packed.rows(); ++i) {
        const cplx p = packed(i, i);
        log_mod += std::log(std::abs(p));
        arg += std::arg(p);
    }
    if (lu.permutationP().determinant() < 0) arg += M_PI;
    return {log_mod, std::remainder(arg, 2.0 * M_PI)};
}

}  // namespace casimir::linalg
