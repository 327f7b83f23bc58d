#pragma once

#include <Eigen/Dense>

#include "casimir/linalg.hpp"

namespace casimir {

/// Physical and numerical inputs for a single linear-drive run.
///
/// The wall moves as l(t) = l0 + alpha t.  The run is parametrised by the
/// speed ratio alpha/v and by delta_l = ln(l_final / l_initial); the two
/// must share a sign (expansion or compression) unless delta_l is zero.
/// Modes n = -cutoff .. cutoff-1 are kept, i.e. 2*cutoff in total.
/// Internally energies are measured in units of pi v / l_final; l_ref and
/// v_ref only enter when converting reported values to physical units.
struct ModelConfig {
    double speed_ratio = 0.0;
    double delta_l = 0.0;
    int cutoff = 1;
    double theta0 = 0.0;
    double l_ref = 1.0;
    double v_ref = 1.0;

    int dim() const { return 2 * cutoff; }
    /// pi v / l_final in physical units.
    double energy_unit() const;
    /// Throws DomainError naming the violated constraint.
    void validate() const;
};

// Single array ordering shared by every matrix in the library: mode n sits
// at index n + cutoff.
inline int mode_index(int n, int cutoff) { return n + cutoff; }
inline int mode_label(int index, int cutoff) { return index - cutoff; }

/// Dimensionless quadratic form of the drive generator over 2L modes:
///   H = sum c†_m A_mn c_n + 1/2 (c†_m B_mn c†_n + h.c.)
/// with c_n = a_n for n >= 0 and c_{-1-n} = b_n.
struct QuadraticForm {
    int cutoff = 0;
    CMatrix a_block;
    CMatrix b_block;

    int dim() const { return 2 * cutoff; }
};

using Spinor = Eigen::Vector2cd;

/// One-particle energy (n + 1/2) pi v / l.
double mode_frequency(int n, double l, double v);

/// Instantaneous eigenfunction of -i v gamma5 d/dx at position x in [0, l].
Spinor mode_function(int n, double x, double l, double theta0);

/// Closed-form coupling M_mn * l / ldot.
double coupling_element(int m, int n);

/// The same coupling integrated numerically from the mode functions, with
/// the time derivative taken as ldot * d/dl at fixed mode index.  Uses
/// composite Gauss-Legendre, starting from `points` nodes and doubling.
/// Throws ConvergenceError if `points` and 2*`points` disagree by > 1e-8.
double coupling_quadrature(int m, int n, double l, double ldot, double theta0, int points = 128);

enum class Wall { left, right };

/// max |e^{i theta0 gamma5} psi - i n_mu gamma^mu psi| at a static wall,
/// with gamma0 = sigma_x, gamma1 = -i sigma_y and n the exterior normal.
double bag_condition_residual(int n, Wall wall, double l, double theta0);

/// Builds A and B for the given cutoff and speed ratio.
/// Throws DegenerateDriveError if speed_ratio == 0.
QuadraticForm build_quadratic_form(const ModelConfig& config);

}  // namespace casimir
