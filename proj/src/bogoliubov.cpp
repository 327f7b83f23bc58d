#include "casimir/bogoliubov.hpp"

#include <cmath>
#include <sstream>
#include <vector>

#include "casimir/errors.hpp"

namespace casimir {

namespace {

constexpr double kZeroModeTol = 1e-10;
constexpr double kCanonicalTol = 1e-9;
constexpr double kResidualTol = 1e-9;

// Particle-hole conjugation (x ; y) -> (y* ; x*).  Maps BdG eigenvectors
// with eigenvalue E to eigenvectors with eigenvalue -E.
CVector particle_hole(const CVector& w) {
    const Eigen::Index n = w.size() / 2;
    CVector out(w.size());
    out.head(n) = w.tail(n).conjugate();
    out.tail(n) = w.head(n).conjugate();
    return out;
}

// Splits a particle-hole symmetric zero-energy subspace into z/2 vectors
// whose conjugate partners span the rest.  Works through the real subspace
// of self-conjugate vectors, pairing them as (m1 + i m2) / sqrt(2).
std::vector<CVector> split_zero_modes(const CMatrix& zero_space) {
    std::vector<CVector> real_basis;
    auto try_add = [&](CVector c) {
        for (const auto& b : real_basis) c -= b.dot(c).real() * b;
        for (const auto& b : real_basis) c -= b.dot(c).real() * b;
        const double norm = c.norm();
        if (norm > 1e-6) real_basis.push_back(c / norm);
    };
    for (Eigen::Index k = 0; k < zero_space.cols(); ++k) {
        const CVector e = zero_space.col(k);
        const CVector pe = particle_hole(e);
        try_add(e + pe);
        try_add(cplx(0.0, 1.0) * (e - pe));
    }
    if (real_basis.size() != static_cast<std::size_t>(zero_space.cols()) || real_basis.size() % 2 != 0) {
        std::ostringstream msg;
        msg << "diagonalize: zero-energy subspace of dimension " << zero_space.cols()
            << " could not be split into particle-hole partners";
        throw NumericalFailure(msg.str());
    }
    std::vector<CVector> out;
    for (std::size_t j = 0; j + 1 < real_basis.size(); j += 2)
        out.push_back((real_basis[j] + cplx(0.0, 1.0) * real_basis[j + 1]) / std::sqrt(2.0));
    return out;
}

}  // namespace

CanonicalResiduals canonical_residuals(const CMatrix& u, const CMatrix& v) {
    const Eigen::Index n = u.rows();
    CanonicalResiduals r;
    if (n == 0) return r;
    r.normal = linalg::max_abs(u * u.adjoint() + v * v.adjoint() - CMatrix::Identity(n, n));
    r.anomalous = linalg::max_abs(u * v.transpose() + v * u.transpose());
    return r;
}

CanonicalResiduals canonical_residuals(const BogoliubovSolution& solution) {
    return canonical_residuals(solution.u, solution.v);
}

CanonicalResiduals canonical_residuals(const EvolvedTransform& transform) {
    return canonical_residuals(transform.u_t, transform.v_t);
}

DiagonalizationResiduals diagonalization_residuals(const QuadraticForm& form,
                                                   const BogoliubovSolution& s) {
    DiagonalizationResiduals r;
    if (s.dim() == 0) return r;
    const auto lam = s.lambda.cast<cplx>().asDiagonal();
    r.particle = linalg::max_abs(form.a_block * s.u + form.b_block * s.v.conjugate() - s.u * lam);
    r.hole = linalg::max_abs(form.a_block * s.v + form.b_block * s.u.conjugate() + s.v * lam);
    return r;
}

CMatrix bdg_matrix(const QuadraticForm& form) {
    const int n = form.dim();
    CMatrix h(2 * n, 2 * n);
    h.topLeftCorner(n, n) = form.a_block;
    h.topRightCorner(n, n) = form.b_block;
    h.bottomLeftCorner(n, n) = -form.b_block.conjugate();
    h.bottomRightCorner(n, n) = -form.a_block.conjugate();
    return h;
}

BogoliubovSolution diagonalize(const QuadraticForm& form) {
    const Eigen::Index n = form.dim();
    const auto eig = linalg::hermitian_eigen(bdg_matrix(form));

    std::vector<Eigen::Index> positive;
    std::vector<Eigen::Index> zero;
    Eigen::Index negative = 0;
    for (Eigen::Index k = 0; k < 2 * n; ++k) {
        const double e = eig.values(k);
        if (e > kZeroModeTol) positive.push_back(k);
        else if (e < -kZeroModeTol) ++negative;
        else zero.push_back(k);
    }
    if (static_cast<Eigen::Index>(positive.size()) != negative) {
        std::ostringstream msg;
        msg << "diagonalize: unbalanced BdG spectrum (" << positive.size() << " positive, "
            << negative << " negative eigenvalues)";
        throw NumericalFailure(msg.str());
    }

    BogoliubovSolution s{CMatrix(n, n), CMatrix(n, n), RVector(n)};
    Eigen::Index col = 0;
    auto place = [&](const CVector& w, double energy) {
        s.u.col(col) = w.head(n);
        s.v.col(col) = w.tail(n).conjugate();
        s.lambda(col) = energy;
        ++col;
    };
    if (!zero.empty()) {
        CMatrix zero_space(2 * n, static_cast<Eigen::Index>(zero.size()));
        for (std::size_t j = 0; j < zero.size(); ++j) zero_space.col(j) = eig.vectors.col(zero[j]);
        for (const auto& w : split_zero_modes(zero_space)) place(w, 0.0);
    }
    for (const Eigen::Index k : positive) place(eig.vectors.col(k), eig.values(k));

    const auto canon = canonical_residuals(s);
    const auto resid = diagonalization_residuals(form, s);
    const double scale = std::max(1.0, linalg::max_abs(form.a_block));
    if (canon.max() > kCanonicalTol || resid.particle > kResidualTol * scale ||
        resid.hole > kResidualTol * scale) {
        std::ostringstream msg;
        msg << "diagonalize: residuals out of bounds (canonical " << canon.normal << ", "
            << canon.anomalous << "; eigen " << resid.particle << ", " << resid.hole << ")";
        throw NumericalFailure(msg.str());
    }
    return s;
}

EvolvedTransform evolve(const BogoliubovSolution& s, double delta_l) {
    const Eigen::Index n = s.dim();
    if (delta_l == 0.0) return {CMatrix::Identity(n, n), CMatrix::Zero(n, n), 0.0};

    CVector phase(n);
    for (Eigen::Index k = 0; k < n; ++k) phase(k) = std::polar(1.0, -s.lambda(k) * delta_l);
    const CMatrix ud = s.u * phase.asDiagonal();
    const CMatrix vd = s.v * phase.conjugate().asDiagonal();

    EvolvedTransform t;
    t.u_t = ud * s.u.adjoint() + vd * s.v.adjoint();
    t.v_t = ud * s.v.transpose() + vd * s.u.transpose();
    t.delta_l = delta_l;
    return t;
}

EvolvedTransform compose(const EvolvedTransform& second, const EvolvedTransform& first) {
    EvolvedTransform t;
    t.u_t = second.u_t * first.u_t + second.v_t * first.v_t.conjugate();
    t.v_t = second.u_t * first.v_t + second.v_t * first.u_t.conjugate();
    t.delta_l = first.delta_l + second.delta_l;
    return t;
}

}  // namespace casimir
