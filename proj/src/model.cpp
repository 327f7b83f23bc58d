#include "casimir/model.hpp"

#include <cmath>
#include <string>

#include <boost/math/quadrature/gauss.hpp>

#include "casimir/errors.hpp"

namespace casimir {

namespace {

constexpr cplx I{0.0, 1.0};

double wavenumber(int n, double l) { return (n + 0.5) * M_PI / l; }

// d psi_n / dl at fixed n.
Spinor mode_function_dl(int n, double x, double l, double theta0) {
    const Spinor psi = mode_function(n, x, l, theta0);
    const double k = wavenumber(n, l);
    Spinor d;
    d(0) = psi(0) * (-0.5 / l - I * k * x / l);
    d(1) = psi(1) * (-0.5 / l + I * k * x / l);
    return d;
}

template <typename F>
cplx composite_gauss(F&& f, double a, double b, int panels) {
    using rule = boost::math::quadrature::gauss<double, 16>;
    const auto& nodes = rule::abscissa();
    const auto& weights = rule::weights();
    const double h = (b - a) / panels;
    cplx sum = 0.0;
    for (int p = 0; p < panels; ++p) {
        const double mid = a + (p + 0.5) * h;
        const double half = 0.5 * h;
        for (std::size_t j = 0; j < nodes.size(); ++j) {
            sum += weights[j] * half * (f(mid + half * nodes[j]) + f(mid - half * nodes[j]));
        }
    }
    return sum;
}

}  // namespace

double ModelConfig::energy_unit() const { return M_PI * v_ref / l_ref; }

void ModelConfig::validate() const {
    if (cutoff < 1) throw DomainError("cutoff must be >= 1 (got " + std::to_string(cutoff) + ")");
    if (!(l_ref > 0.0)) throw DomainError("l_ref must be > 0");
    if (!(v_ref > 0.0)) throw DomainError("v_ref must be > 0");
    if (!std::isfinite(speed_ratio) || !std::isfinite(delta_l) || !std::isfinite(theta0))
        throw DomainError("speed_ratio, delta_l and theta0 must be finite");
    if (delta_l != 0.0 && speed_ratio == 0.0)
        throw DomainError("alpha/v = 0 requires delta_l = 0 (a static wall cannot change the box length)");
    if (delta_l != 0.0 && (speed_ratio > 0.0) != (delta_l > 0.0))
        throw DomainError("alpha/v and delta_l must have the same sign (expansion: both > 0, compression: both < 0)");
}

double mode_frequency(int n, double l, double v) {
    if (!(l > 0.0) || !(v > 0.0)) throw DomainError("mode_frequency: l and v must be positive");
    return (n + 0.5) * M_PI * v / l;
}

Spinor mode_function(int n, double x, double l, double theta0) {
    if (!(l > 0.0)) throw DomainError("mode_function: l must be positive");
    if (x < 0.0 || x > l) throw DomainError("mode_function: x outside [0, l]");
    const double k = wavenumber(n, l);
    const double norm = 1.0 / std::sqrt(2.0 * l);
    Spinor psi;
    psi(0) = norm * std::exp(I * k * x);
    psi(1) = norm * I * std::exp(-I * (k * x - theta0));
    return psi;
}

double coupling_element(int m, int n) {
    if (m == n) return 0.0;
    const double sign = ((m - n) % 2 == 0) ? 1.0 : -1.0;
    return sign * (m + n + 1) / (2.0 * (m - n));
}

double coupling_quadrature(int m, int n, double l, double ldot, double theta0, int points) {
    if (!(l > 0.0)) throw DomainError("coupling_quadrature: l must be positive");
    if (ldot == 0.0) throw DomainError("coupling_quadrature: ldot must be nonzero");
    if (points < 64) throw DomainError("coupling_quadrature: need at least 64 points");

    auto integrand = [&](double x) -> cplx {
        const Spinor pm = mode_function(m, x, l, theta0);
        const Spinor pn = mode_function(n, x, l, theta0);
        const Spinor dm = ldot * mode_function_dl(m, x, l, theta0);
        const Spinor dn = ldot * mode_function_dl(n, x, l, theta0);
        return 0.5 * (pm.dot(dn) - dm.dot(pn));
    };
    auto element = [&](int nodes) {
        const int panels = (nodes + 15) / 16;
        return composite_gauss(integrand, 0.0, l, panels) / (ldot / l);
    };

    cplx prev = element(points);
    cplx next = element(2 * points);
    if (std::abs(next - prev) > 1e-8)
        throw ConvergenceError("coupling_quadrature(" + std::to_string(m) + ", " + std::to_string(n) +
                               "): not converged with " + std::to_string(points) + " points");
    int nodes = 2 * points;
    for (int doubling = 0; doubling < 8 && std::abs(next - prev) >= 1e-10; ++doubling) {
        nodes *= 2;
        prev = next;
        next = element(nodes);
    }
    if (std::abs(next.imag()) > 1e-8)
        throw NumericalFailure("coupling_quadrature: integral has imaginary part " +
                               std::to_string(next.imag()));
    return next.real();
}

double bag_condition_residual(int n, Wall wall, double l, double theta0) {
    const double x = wall == Wall::left ? 0.0 : l;
    const Spinor psi = mode_function(n, x, l, theta0);

    Eigen::Matrix2cd sigma_y;
    sigma_y << 0.0, -I, I, 0.0;
    const Eigen::Matrix2cd gamma1 = -I * sigma_y;
    Eigen::Matrix2cd phase = Eigen::Matrix2cd::Zero();
    phase(0, 0) = std::exp(I * theta0);
    phase(1, 1) = std::exp(-I * theta0);

    // Exterior normal n^1 = -1 on the left wall, +1 on the right; lowering
    // with g = diag(+, -) gives n_1 = -n^1.
    const double n_lower = wall == Wall::left ? 1.0 : -1.0;
    const Spinor lhs = phase * psi;
    const Spinor rhs = I * n_lower * (gamma1 * psi);
    return (lhs - rhs).cwiseAbs().maxCoeff();
}

QuadraticForm build_quadratic_form(const ModelConfig& config) {
    config.validate();
    if (config.speed_ratio == 0.0)
        throw DegenerateDriveError("build_quadratic_form: alpha/v = 0; the evolution is the identity");

    const int cutoff = config.cutoff;
    const int dim = config.dim();
    QuadraticForm form{cutoff, CMatrix::Zero(dim, dim), CMatrix::Zero(dim, dim)};

    for (int i = 0; i < dim; ++i) {
        const int m = mode_label(i, cutoff);
        form.a_block(i, i) = std::abs(m + 0.5) * M_PI / config.speed_ratio;
        for (int j = 0; j < dim; ++j) {
            if (i == j) continue;
            const int n = mode_label(j, cutoff);
            const cplx element = -I * coupling_element(m, n);
            if ((m >= 0) == (n >= 0)) {
                form.a_block(i, j) = element;
            } else if (m >= 0) {
                form.b_block(i, j) = element;
                form.b_block(j, i) = -element;
            }
        }
    }
    return form;
}

}  // namespace casimir
