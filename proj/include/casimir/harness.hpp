#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "casimir/bogoliubov.hpp"
#include "casimir/errors.hpp"
#include "casimir/model.hpp"
#include "casimir/statistics.hpp"

namespace casimir {

inline constexpr const char* kEnergyUnit = "pi*v/l_final";

struct RunOptions {
    bool fd_check = false;  // also differentiate chi numerically
    double fd_step = 1e-3;
    int fd_max_order = 2;
    int jobs = 1;           // sweep points evaluated concurrently
};

/// Evolved transform and pairing state for one configuration.  A zero
/// expansion (delta_l = 0) short-cuts to the identity transform and G = 0.
struct Pipeline {
    EvolvedTransform transform;
    PairingState state;
};

Pipeline run_pipeline(const ModelConfig& config);

/// Full pipeline for one configuration: quadratic form, diagonalisation,
/// evolution, pairing state, moments.  Orders 1-2 are analytic; the FD
/// check, when requested, fills fd_w / fd_n.
MomentReport run_point(const ModelConfig& config, const RunOptions& options = {});

struct SweepRow {
    int cutoff = 0;
    double speed_ratio = 0.0;
    double delta_l = 0.0;
    double mean_w = 0.0;
    double m2_w = 0.0;
    double mean_n = 0.0;
    double m2_n = 0.0;
    MomentMethod method = MomentMethod::analytic;
};

/// Rows sorted by (speed_ratio, cutoff), unique keys.
struct SweepTable {
    std::vector<SweepRow> rows;
};

/// A sweep point failed.  Carries the rows that did complete.
class SweepAborted : public Error {
  public:
    SweepAborted(Kind kind, const std::string& msg, SweepTable partial)
        : Error(kind, msg), partial_(std::move(partial)) {}
    const SweepTable& partial() const { return partial_; }

  private:
    SweepTable partial_;
};

/// One row per cutoff with every other parameter taken from `base`.
/// `cutoffs` must be strictly increasing and >= 1.
SweepTable sweep_cutoff(const ModelConfig& base, const std::vector<int>& cutoffs,
                        const RunOptions& options = {});

/// Default cutoff grid 8, 16, ..., 512.
std::vector<int> default_cutoffs();
/// Default speed grid 0.1, 0.2, ..., 3.0.
std::vector<double> default_speeds();

enum class FitTarget { work, number };

/// Least-squares fit of mean_w to b0 + b1 L + b2 L^2 (work) or of mean_n to
/// g0 + g1 L + gl ln L (number).
struct FitResult {
    FitTarget target = FitTarget::work;
    std::array<double, 3> coefficients{};
    double residual_norm = 0.0;
    double condition = 1.0;  // of the column-scaled design matrix
    int l_min = 0;
    int l_max = 0;
    std::size_t rows_used = 0;
};

/// Uses rows with cutoff >= min_cutoff; needs at least four distinct
/// cutoffs.  Throws FitError when the design matrix is rank deficient.
FitResult fit_scaling(const SweepTable& table, FitTarget target, int min_cutoff = 16);

/// Scale-aware "compatible with zero" test on the fastest-growing term at
/// L = l_max: |b2| L^2 < fraction |b1| L for work fits and
/// |g1| L < fraction |gl| ln L for number fits.
bool leading_growth_negligible(const FitResult& fit, int l_max, double fraction = 0.1);

struct SpeedRow {
    double speed_ratio = 0.0;
    bool ok = false;
    std::string error;
    FitResult work_fit;
    FitResult number_fit;
    SweepTable table;

    double beta2() const { return work_fit.coefficients[2]; }
    double gamma1() const { return number_fit.coefficients[1]; }
};

/// For each speed: cutoff sweep then both fits.  A failing speed is
/// recorded (ok = false) and the sweep moves on.
std::vector<SpeedRow> sweep_speed(const ModelConfig& base, const std::vector<double>& speeds,
                                  const std::vector<int>& cutoffs, const RunOptions& options = {},
                                  int min_cutoff = 16);

}  // namespace casimir
