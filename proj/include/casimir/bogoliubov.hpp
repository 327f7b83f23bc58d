#pragma once

#include "casimir/linalg.hpp"
#include "casimir/model.hpp"

namespace casimir {

/// c_n = sum_k u_nk eta_k + v_nk eta†_k with H = sum_k lambda_k eta†_k eta_k.
struct BogoliubovSolution {
    CMatrix u;
    CMatrix v;
    RVector lambda;

    Eigen::Index dim() const { return u.rows(); }
};

/// Evolved mode operators U† c_n U = sum_m u_t(n, m) c_m + v_t(n, m) c†_m.
struct EvolvedTransform {
    CMatrix u_t;
    CMatrix v_t;
    double delta_l = 0.0;

    Eigen::Index dim() const { return u_t.rows(); }
};

struct CanonicalResiduals {
    double normal = 0.0;     // max |u u† + v v† - 1|
    double anomalous = 0.0;  // max |u v^T + v u^T|

    double max() const { return normal > anomalous ? normal : anomalous; }
};

struct DiagonalizationResiduals {
    double particle = 0.0;  // max |A u + B v* - u Lambda|
    double hole = 0.0;      // max |A v + B u* + v Lambda|
};

CanonicalResiduals canonical_residuals(const CMatrix& u, const CMatrix& v);
CanonicalResiduals canonical_residuals(const BogoliubovSolution& solution);
CanonicalResiduals canonical_residuals(const EvolvedTransform& transform);

DiagonalizationResiduals diagonalization_residuals(const QuadraticForm& form,
                                                   const BogoliubovSolution& solution);

/// The 2N x 2N Hermitian matrix [[A, B], [-B*, -A*]].
CMatrix bdg_matrix(const QuadraticForm& form);

/// Diagonalises the quadratic form through its BdG matrix.  Eigenvectors
/// with nonnegative eigenvalue become the columns (u_k ; v*_k).  Eigenvalues
/// within 1e-10 of zero are clamped and their subspace is split into
/// particle-hole partners explicitly.  Throws NumericalFailure when the
/// assembled solution misses its residual bounds.
BogoliubovSolution diagonalize(const QuadraticForm& form);

/// u_t = u D u† + v D* v†, v_t = u D v^T + v D* u^T with D = exp(-i lambda dl).
EvolvedTransform evolve(const BogoliubovSolution& solution, double delta_l);

/// Transform of the evolution by `first` followed by `second`.
EvolvedTransform compose(const EvolvedTransform& second, const EvolvedTransform& first);

}  // namespace casimir
