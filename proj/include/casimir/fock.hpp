#pragma once

#include <vector>

#include <Eigen/Sparse>

#include "casimir/linalg.hpp"
#include "casimir/model.hpp"
#include "casimir/statistics.hpp"

namespace casimir {

/// Exact many-body reference on the full 2^(2L) Fock space.
///
/// Basis state b has mode i occupied iff bit i of b is set; Jordan-Wigner
/// strings run over lower array indices, so the fermion ordering is the
/// global mode ordering.  The vacuum is b = 0.
struct FockOperators {
    using SparseOp = Eigen::SparseMatrix<double>;

    int cutoff = 0;
    Eigen::Index dim = 0;
    CMatrix h_tilde;
    RVector energy;             // sum of |n + 1/2| over occupied modes
    Eigen::VectorXi number;     // occupied mode count
    std::vector<SparseOp> annihilators;  // c_i; c†_i is the transpose
    linalg::HermitianEigen h_eigen;      // spectral decomposition of h_tilde

    int modes() const { return 2 * cutoff; }
};

/// Guard: L <= 5, or L <= 6 with allow_large.  Throws SizeError otherwise.
FockOperators build_fock_operators(const ModelConfig& config, bool allow_large = false);

/// max over (i, j) of the deviation of {c_i, c†_j} from delta_ij and of
/// {c_i, c_j} from zero.
double anticommutator_residual(const FockOperators& ops);

/// U|0> with U = exp(-i H delta_l).
CVector evolved_vacuum(const FockOperators& ops, double delta_l);

/// <0| U† exp(i u X) U |0> with X the energy or number operator.
cplx oracle_char(const FockOperators& ops, double delta_l, double u, Observable which);

/// Raw moment <0| U† X^order U |0>.
double oracle_moment(const FockOperators& ops, double delta_l, Observable which, int order);

/// Probabilities over N = 0 .. 2L or w = 0 .. L^2 (units pi v / l_final).
std::vector<double> oracle_distribution(const FockOperators& ops, double delta_l, Observable which);

/// Matrix over m, n in [0, L) of <0| b_n a_m U |0> / <0|U|0>.
/// Throws DegenerateOverlapError if the vacuum overlap vanishes.
CMatrix oracle_pair_amplitudes(const FockOperators& ops, double delta_l);

}  // namespace casimir
