#include "casimir/statistics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <map>
#include <sstream>

#include "casimir/errors.hpp"

namespace casimir {

namespace {

constexpr double kMaxPhaseStep = M_PI / 4.0;
constexpr int kMaxBranchDepth = 40;

// Continuous log det(1 + G† G~(u)) as a function of u.  The imaginary part is
// kept unwrapped along the path walked so far.
class LogDetTracker {
  public:
    LogDetTracker(const PairingState& state, Observable which) : state_(state), which_(which) {
        g_adj_ = state.g.adjoint();
        if (which == Observable::number) gram_ = g_adj_ * state.g;
        current_ = {0.0, cplx(state.log_norm_det, 0.0)};
    }

    cplx advance_to(double u) {
        current_ = step(current_, u, 0);
        return current_.log_det;
    }

  private:
    struct Sample {
        double u;
        cplx log_det;
    };

    cplx principal(double u) const {
        const Eigen::Index n = state_.dim();
        CMatrix m;
        if (which_ == Observable::number) {
            m = std::polar(1.0, 2.0 * u) * gram_;
        } else {
            CVector phase(n);
            for (Eigen::Index i = 0; i < n; ++i) phase(i) = std::polar(1.0, u * state_.freq_abs(i));
            m = g_adj_ * (phase.asDiagonal() * state_.g * phase.asDiagonal());
        }
        m.diagonal().array() += 1.0;
        return linalg::log_det(m);
    }

    static double wrap(double x) { return std::remainder(x, 2.0 * M_PI); }

    Sample step(const Sample& from, double to, int depth) const {
        if (to == from.u) return from;
        const cplx end = principal(to);
        const double jump = wrap(end.imag() - from.log_det.imag());
        if (std::abs(jump) < kMaxPhaseStep) {
            // Confirm with the midpoint so that a full 2 pi winding between
            // the endpoints cannot hide behind a small apparent jump.
            const cplx mid = principal(0.5 * (from.u + to));
            const double first = wrap(mid.imag() - from.log_det.imag());
            const double second = wrap(end.imag() - mid.imag());
            if (std::abs(first) < kMaxPhaseStep && std::abs(second) < kMaxPhaseStep &&
                std::abs(first + second - jump) < 1e-9) {
                return {to, cplx(end.real(), from.log_det.imag() + jump)};
            }
        }
        if (depth >= kMaxBranchDepth) {
            std::ostringstream msg;
            msg << "characteristic function: branch tracking did not resolve between u = " << from.u
                << " and u = " << to;
            throw BranchError(msg.str());
        }
        const Sample mid = step(from, 0.5 * (from.u + to), depth + 1);
        return step(mid, to, depth + 1);
    }

    const PairingState& state_;
    Observable which_;
    CMatrix g_adj_;
    CMatrix gram_;
    Sample current_{};
};

cplx chi_from_log_det(const PairingState& state, cplx log_det) {
    return std::exp(0.5 * (log_det - state.log_norm_det));
}

// log chi(u) for small |u|, accurate relative to its own size.  The ratio
// det(1 + G† G~)/det(1 + G† G) is written as det(1 + X) with
// X = (1 + G† G)^{-1} G† (G~ - G), and log det(1 + X) = sum log1p(eig X),
// so no O(1) quantity is subtracted.  Differentiating this instead of chi
// keeps the stencils clear of roundoff when the moments are tiny.
class SmallLogChi {
  public:
    SmallLogChi(const PairingState& state, Observable which) : state_(state), which_(which) {
        g_adj_ = state.g.adjoint();
        CMatrix norm = g_adj_ * state.g;
        norm.diagonal().array() += 1.0;
        lu_.compute(norm);
    }

    cplx operator()(double u) {
        if (u == 0.0) return 0.0;
        if (const auto it = cache_.find(u); it != cache_.end()) return it->second;
        const Eigen::Index n = state_.dim();
        CMatrix delta(n, n);
        for (Eigen::Index j = 0; j < n; ++j)
            for (Eigen::Index i = 0; i < n; ++i) delta(i, j) = expm1i(u * (weight(i) + weight(j))) * state_.g(i, j);
        const CMatrix x = lu_.solve(CMatrix(g_adj_ * delta));
        const CVector eig = Eigen::ComplexEigenSolver<CMatrix>(x, false).eigenvalues();
        cplx sum = 0.0;
        for (const cplx& z : eig) {
            if (std::abs(z) >= 0.5) {
                std::ostringstream msg;
                msg << "moments_fd: step too large, eigenvalue " << std::abs(z) << " at u = " << u
                    << " leaves the principal branch";
                throw BranchError(msg.str());
            }
            sum += log1p(z);
        }
        return cache_[u] = 0.5 * sum;
    }

  private:
    double weight(Eigen::Index i) const { return which_ == Observable::work ? state_.freq_abs(i) : 1.0; }

    // exp(i theta) - 1 without cancellation.
    static cplx expm1i(double theta) {
        const double s = std::sin(0.5 * theta);
        return {-2.0 * s * s, std::sin(theta)};
    }

    static cplx log1p(const cplx& z) {
        const double x = z.real(), y = z.imag();
        return {0.5 * std::log1p(2.0 * x + x * x + y * y), std::atan2(y, 1.0 + x)};
    }

    const PairingState& state_;
    Observable which_;
    CMatrix g_adj_;
    Eigen::PartialPivLU<CMatrix> lu_;
    std::map<double, cplx> cache_;
};

// Raw derivative of order k at 0 from a symmetric O(h^2) stencil.
cplx central_difference(const std::function<cplx(double)>& f, int order, double h) {
    switch (order) {
    case 1:
        return (f(h) - f(-h)) / (2.0 * h);
    case 2:
        return (f(h) - 2.0 * f(0.0) + f(-h)) / (h * h);
    case 3:
        return (f(2 * h) - 2.0 * f(h) + 2.0 * f(-h) - f(-2 * h)) / (2.0 * h * h * h);
    case 4:
        return (f(2 * h) - 4.0 * f(h) + 6.0 * f(0.0) - 4.0 * f(-h) + f(-2 * h)) / (h * h * h * h);
    default:
        throw DomainError("central_difference: order must be 1..4");
    }
}

}  // namespace

double PairingState::norm_det() const { return std::exp(log_norm_det); }

PairingState pairing_matrix(const EvolvedTransform& t, const ModelConfig& config) {
    const Eigen::Index n = t.dim();
    if (n != config.dim()) throw DomainError("pairing_matrix: transform and config dimensions differ");

    PairingState state;
    state.cutoff = config.cutoff;
    state.freq_abs.resize(n);
    for (Eigen::Index i = 0; i < n; ++i)
        state.freq_abs(i) = std::abs(mode_label(static_cast<int>(i), config.cutoff) + 0.5);

    Eigen::PartialPivLU<CMatrix> lu(t.u_t.adjoint());
    const double rcond = lu.rcond();
    if (!(rcond * 1e12 >= 1.0)) {
        std::ostringstream msg;
        msg << "pairing_matrix: evolved transform is ill-conditioned (cond ~ " << 1.0 / rcond
            << ") at delta_l = " << t.delta_l << ", L = " << config.cutoff;
        throw IllConditionedError(msg.str());
    }
    state.g = lu.solve(-t.v_t.transpose());

    const double skew = linalg::max_abs(state.g + state.g.transpose());
    if (skew > 1e-8) {
        std::ostringstream msg;
        msg << "pairing_matrix: G is not skew-symmetric (residual " << skew << ") at delta_l = "
            << t.delta_l << ", L = " << config.cutoff;
        throw NumericalFailure(msg.str());
    }

    CMatrix gram = state.g.adjoint() * state.g;
    gram.diagonal().array() += 1.0;
    state.log_norm_det = linalg::log_det(gram).real();
    return state;
}

cplx characteristic(const PairingState& state, Observable which, double u) {
    if (u == 0.0) return 1.0;
    LogDetTracker tracker(state, which);
    return chi_from_log_det(state, tracker.advance_to(u));
}

cplx char_work(const PairingState& state, double u) { return characteristic(state, Observable::work, u); }

cplx char_number(const PairingState& state, double u) {
    return characteristic(state, Observable::number, u);
}

std::vector<cplx> characteristic_path(const PairingState& state, Observable which,
                                      std::span<const double> grid) {
    LogDetTracker tracker(state, which);
    std::vector<cplx> out;
    out.reserve(grid.size());
    for (const double u : grid) out.push_back(chi_from_log_det(state, tracker.advance_to(u)));
    return out;
}

double mean_number_analytic(const EvolvedTransform& t) { return t.v_t.squaredNorm(); }

double mean_work_analytic(const EvolvedTransform& t, const PairingState& state) {
    if (t.dim() != state.dim()) throw DomainError("mean_work_analytic: dimension mismatch");
    return state.freq_abs.dot(t.v_t.rowwise().squaredNorm());
}

AnalyticMoments analytic_moments(const EvolvedTransform& t, const RVector& weights) {
    if (weights.size() != t.dim()) throw DomainError("analytic_moments: dimension mismatch");
    // rho_ij = <c~†_i c~_j>, kappa_ij = <c~_i c~_j> in the initial vacuum.
    const CMatrix rho = t.v_t.conjugate() * t.v_t.transpose();
    const CMatrix kappa = t.u_t * t.v_t.transpose();
    const RVector occupation = rho.diagonal().real();

    AnalyticMoments m;
    m.mean = weights.dot(occupation);
    const RMatrix connected = kappa.cwiseAbs2() - rho.cwiseAbs2();
    m.variance = weights.cwiseAbs2().dot(occupation) + weights.dot(connected * weights);
    m.second = m.variance + m.mean * m.mean;
    return m;
}

AnalyticMoments analytic_moments(const EvolvedTransform& t, const PairingState& state,
                                 Observable which) {
    if (which == Observable::work) return analytic_moments(t, state.freq_abs);
    return analytic_moments(t, RVector::Ones(t.dim()));
}

FdMoments moments_fd(const PairingState& state, Observable which, int max_order, double step,
                     std::optional<double> analytic_mean) {
    if (max_order < 1 || max_order > 4) throw DomainError("moments_fd: max_order must be in 1..4");
    if (!(step > 0.0)) throw DomainError("moments_fd: step must be positive");

    SmallLogChi log_chi(state, which);
    const std::function<cplx(double)> f = [&](double u) { return log_chi(u); };
    // Cumulants c_k = (-i)^k (log chi)^(k)(0), then raw moments.
    std::array<double, 5> c{};
    for (int k = 1; k <= max_order; ++k) {
        const cplx coarse = central_difference(f, k, step);
        const cplx fine = central_difference(f, k, 0.5 * step);
        const cplx derivative = (4.0 * fine - coarse) / 3.0;
        c[k] = (std::pow(cplx(0.0, -1.0), k) * derivative).real();
    }
    FdMoments out;
    out.step = step;
    const std::array<double, 4> raw{
        c[1],
        c[2] + c[1] * c[1],
        c[3] + 3.0 * c[2] * c[1] + std::pow(c[1], 3),
        c[4] + 4.0 * c[3] * c[1] + 3.0 * c[2] * c[2] + 6.0 * c[2] * c[1] * c[1] + std::pow(c[1], 4),
    };
    out.raw.assign(raw.begin(), raw.begin() + max_order);

    if (analytic_mean) {
        const double scale = std::max(std::abs(*analytic_mean), 1e-6);
        const double rel = std::abs(out.raw[0] - *analytic_mean) / scale;
        out.mean_rel_diff = rel;
        out.consistent = rel <= 1e-5;
        if (rel > 1e-3) {
            std::ostringstream msg;
            msg << "moments_fd: finite-difference mean " << out.raw[0] << " disagrees with analytic mean "
                << *analytic_mean << " (relative " << rel << ")";
            throw ConsistencyError(msg.str());
        }
    }
    return out;
}

std::vector<double> number_distribution(const PairingState& state) {
    const Eigen::Index n = state.dim();
    std::vector<double> prob(static_cast<std::size_t>(n) + 1, 0.0);
    prob[0] = 1.0;
    if (n == 0) return prob;

    const double skew_residual = linalg::max_abs(CMatrix(state.g + state.g.transpose()));
    if (skew_residual > 1e-8) {
        std::ostringstream msg;
        msg << "number_distribution: G is not skew-symmetric (residual " << skew_residual << ")";
        throw PairingError(msg.str());
    }

    Eigen::BDCSVD<CMatrix> svd(state.g);
    std::vector<double> sigma(svd.singularValues().data(), svd.singularValues().data() + n);
    std::sort(sigma.begin(), sigma.end(), std::greater<>());
    const double largest = sigma.front();
    // A non-skew part E of the computed G can split a pair by up to ||E||_2
    // (Weyl), bounded here by the Frobenius norm.
    const double skew_defect = (0.5 * (state.g + state.g.transpose())).norm();
    const double floor = 64 * 1e-16 * largest + skew_defect;

    // Pair occupation probabilities s / (1 + s), s = sigma^2.
    std::vector<double> pair_weight;
    for (std::size_t i = 0; i < sigma.size(); i += 2) {
        if (sigma[i] <= 1e-10) break;
        const double partner = i + 1 < sigma.size() ? sigma[i + 1] : 0.0;
        if (std::abs(sigma[i] - partner) > 1e-6 * sigma[i] + floor) {
            std::ostringstream msg;
            msg << "number_distribution: singular values of G do not pair (" << sigma[i] << " vs "
                << partner << "); spectrum:";
            for (const double s : sigma) msg << ' ' << s;
            throw PairingError(msg.str());
        }
        pair_weight.push_back(sigma[i] * partner);
    }

    // Elementary symmetric polynomials, normalised by prod (1 + s) on the fly.
    std::vector<double> pairs(static_cast<std::size_t>(n / 2) + 1, 0.0);
    pairs[0] = 1.0;
    std::size_t used = 0;
    for (const double s : pair_weight) {
        ++used;
        for (std::size_t m = used; m > 0; --m) pairs[m] = (pairs[m] + s * pairs[m - 1]) / (1.0 + s);
        pairs[0] /= 1.0 + s;
    }
    for (std::size_t m = 0; m < pairs.size(); ++m) prob[2 * m] = pairs[m];
    return prob;
}

std::vector<double> number_distribution_dft(const PairingState& state) {
    const int pairs = state.cutoff;
    const int samples = pairs + 1;
    std::vector<double> grid(samples);
    for (int k = 0; k < samples; ++k) grid[k] = M_PI * k / samples;
    const auto chi = characteristic_path(state, Observable::number, grid);

    std::vector<double> prob(static_cast<std::size_t>(2 * pairs) + 1, 0.0);
    for (int m = 0; m <= pairs; ++m) {
        cplx acc = 0.0;
        for (int k = 0; k < samples; ++k) acc += chi[k] * std::polar(1.0, -2.0 * M_PI * k * m / samples);
        prob[2 * m] = acc.real() / samples;
    }
    return prob;
}

std::vector<double> work_distribution(const PairingState& state, bool allow_large) {
    const int cutoff = state.cutoff;
    if (cutoff > 64 && !allow_large)
        throw SizeError("work_distribution: L = " + std::to_string(cutoff) +
                        " exceeds the guard L <= 64 (override to force)");

    const int max_work = cutoff * cutoff;
    const int samples = 2 * (max_work + 1);
    std::vector<double> grid(samples);
    for (int k = 0; k < samples; ++k) grid[k] = 2.0 * M_PI * k / samples;
    const auto chi = characteristic_path(state, Observable::work, grid);

    std::vector<double> prob(static_cast<std::size_t>(max_work) + 1);
    double total = 0.0;
    for (int w = 0; w <= max_work; ++w) {
        cplx acc = 0.0;
        for (int k = 0; k < samples; ++k)
            acc += chi[k] * std::polar(1.0, -2.0 * M_PI * static_cast<double>(k) * w / samples);
        prob[w] = acc.real() / samples;
        total += prob[w];
    }

    const double most_negative = *std::min_element(prob.begin(), prob.end());
    if (most_negative < -1e-9 || std::abs(total - 1.0) > 1e-8) {
        std::ostringstream msg;
        msg << "work_distribution: inverse transform is not a distribution (sum " << total
            << ", min " << most_negative << ")";
        throw NumericalFailure(msg.str());
    }
    return prob;
}

double perturbative_pair_amplitude(int m, int n, double delta_l) {
    const double sign = ((m + n) % 2 == 0) ? 1.0 : -1.0;
    return 0.5 * delta_l * sign * (m - n) / (m + n + 1.0);
}

}  // namespace casimir
