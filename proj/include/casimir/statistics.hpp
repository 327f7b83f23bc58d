#pragma once

#include <optional>
#include <span>
#include <vector>

#include "casimir/bogoliubov.hpp"
#include "casimir/linalg.hpp"
#include "casimir/model.hpp"

namespace casimir {

enum class Observable { work, number };

/// The initial vacuum written as a Gaussian pairing state over the evolved
/// modes, U|0> ~ exp(1/2 sum G_mn c†_m c†_n)|0>.
struct PairingState {
    int cutoff = 0;
    CMatrix g;
    RVector freq_abs;           // |n + 1/2|, energies in units of pi v / l_final
    double log_norm_det = 0.0;  // log det(1 + G† G)

    double norm_det() const;
    Eigen::Index dim() const { return g.rows(); }
};

/// Solves u_t† G = -v_t^T by pivoted LU.  Throws IllConditionedError if the
/// condition number of u_t exceeds 1e12, NumericalFailure if G comes out
/// with skew residual above 1e-8.
PairingState pairing_matrix(const EvolvedTransform& t, const ModelConfig& config);

/// chi(u) = <0| exp(i u E~) |0> = sqrt(det(1 + G† G~(u)) / det(1 + G† G)),
/// with G~ = D G D, D = diag(exp(i u |w_n|)).  The square root follows the
/// branch continuous from chi(0) = 1.
cplx char_work(const PairingState& state, double u);

/// Particle-number analogue; G~ = exp(2 i u) G.
cplx char_number(const PairingState& state, double u);

cplx characteristic(const PairingState& state, Observable which, double u);

/// Characteristic function along a path 0 -> grid[0] -> grid[1] -> ...,
/// tracking the branch between consecutive points.
std::vector<cplx> characteristic_path(const PairingState& state, Observable which,
                                      std::span<const double> grid);

double mean_number_analytic(const EvolvedTransform& t);
double mean_work_analytic(const EvolvedTransform& t, const PairingState& state);

struct AnalyticMoments {
    double mean = 0.0;
    double second = 0.0;
    double variance = 0.0;
};

/// First two moments of sum_n weight_n c~†_n c~_n in the initial vacuum by
/// Wick contraction.
AnalyticMoments analytic_moments(const EvolvedTransform& t, const RVector& weights);
AnalyticMoments analytic_moments(const EvolvedTransform& t, const PairingState& state,
                                 Observable which);

struct FdMoments {
    std::vector<double> raw;  // raw[k] = <x^(k+1)>
    double step = 1e-3;
    bool consistent = true;             // order 1 within 1e-5 relative of analytic mean
    std::optional<double> mean_rel_diff;
};

/// Raw moments of order 1..max_order (<= 4) from central differences at
/// u = 0 with one Richardson halving.  The stencils act on log chi, which is
/// evaluated without cancellation near 0; cumulants are converted to raw
/// moments.  Throws BranchError if the step is too large for that expansion.  When an
/// analytic mean is supplied, a relative mismatch above 1e-3 raises
/// ConsistencyError; above 1e-5 it is flagged in the result.
FdMoments moments_fd(const PairingState& state, Observable which, int max_order,
                     double step = 1e-3, std::optional<double> analytic_mean = std::nullopt);

enum class MomentMethod { analytic, finite_difference };

struct Moment {
    double value = 0.0;
    MomentMethod method = MomentMethod::analytic;
};

/// Work moments in units of pi v / l_final (squared for second order),
/// number moments dimensionless.
struct MomentReport {
    ModelConfig config;
    Moment mean_w, m2_w, var_w;
    Moment mean_n, m2_n, var_n;
    std::optional<FdMoments> fd_w, fd_n;
};

/// P(N) for N = 0 .. 2L, from the singular values of G (they come in equal
/// pairs; P(N odd) = 0).  Throws PairingError if G is not skew within 1e-8
/// or its spectrum does not pair.
std::vector<double> number_distribution(const PairingState& state);

/// Same distribution recovered by a DFT of char_number over u_k = pi k / (L+1).
std::vector<double> number_distribution_dft(const PairingState& state);

/// p(w) for w = 0 .. L^2 (units pi v / l_final) by inverse DFT of char_work
/// sampled on [0, 2 pi).  L is guarded at 64 unless allow_large is set.
std::vector<double> work_distribution(const PairingState& state, bool allow_large = false);

/// First-order amplitude of a†_m b†_n |0> in U|0>.
double perturbative_pair_amplitude(int m, int n, double delta_l);

}  // namespace casimir
