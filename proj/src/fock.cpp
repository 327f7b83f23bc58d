#include "casimir/fock.hpp"

#include <bit>
#include <cmath>
#include <sstream>

#include "casimir/errors.hpp"

namespace casimir {

namespace {

using SparseOp = FockOperators::SparseOp;
using SparseC = Eigen::SparseMatrix<cplx>;

SparseOp annihilator(int mode, Eigen::Index dim) {
    std::vector<Eigen::Triplet<double>> entries;
    entries.reserve(static_cast<std::size_t>(dim / 2));
    const std::uint64_t bit = std::uint64_t{1} << mode;
    for (std::uint64_t b = 0; b < static_cast<std::uint64_t>(dim); ++b) {
        if (!(b & bit)) continue;
        const int parity = std::popcount(b & (bit - 1));
        entries.emplace_back(static_cast<Eigen::Index>(b ^ bit), static_cast<Eigen::Index>(b),
                             parity % 2 == 0 ? 1.0 : -1.0);
    }
    SparseOp c(dim, dim);
    c.setFromTriplets(entries.begin(), entries.end());
    return c;
}

int support_value(const FockOperators& ops, Eigen::Index basis, Observable which) {
    if (which == Observable::number) return ops.number(basis);
    return static_cast<int>(std::lround(ops.energy(basis)));
}

}  // namespace

FockOperators build_fock_operators(const ModelConfig& config, bool allow_large) {
    const int limit = allow_large ? 6 : 5;
    if (config.cutoff > limit)
        throw SizeError("build_fock_operators: L = " + std::to_string(config.cutoff) +
                        " exceeds the oracle guard L <= " + std::to_string(limit));
    const QuadraticForm form = build_quadratic_form(config);

    FockOperators ops;
    ops.cutoff = config.cutoff;
    const int modes = config.dim();
    ops.dim = Eigen::Index{1} << modes;

    ops.energy = RVector::Zero(ops.dim);
    ops.number = Eigen::VectorXi::Zero(ops.dim);
    for (Eigen::Index b = 0; b < ops.dim; ++b) {
        for (int i = 0; i < modes; ++i) {
            if ((b >> i) & 1) {
                ops.energy(b) += std::abs(mode_label(i, config.cutoff) + 0.5);
                ops.number(b) += 1;
            }
        }
    }

    for (int i = 0; i < modes; ++i) ops.annihilators.push_back(annihilator(i, ops.dim));

    SparseC h(ops.dim, ops.dim);
    for (int i = 0; i < modes; ++i) {
        const SparseC create = SparseOp(ops.annihilators[i].transpose()).cast<cplx>();
        for (int j = 0; j < modes; ++j) {
            const SparseC cj = ops.annihilators[j].cast<cplx>();
            const SparseC cj_dag = SparseOp(ops.annihilators[j].transpose()).cast<cplx>();
            const cplx a = form.a_block(i, j);
            const cplx b = form.b_block(i, j);
            if (a != cplx(0.0)) h += SparseC(a * (create * cj));
            if (b != cplx(0.0)) {
                // 1/2 (B_ij c†_i c†_j + conj(B_ij) c_j c_i)
                const SparseC pair = create * cj_dag;
                h += SparseC((0.5 * b) * pair);
                h += SparseC((0.5 * std::conj(b)) * SparseC(pair.adjoint()));
            }
        }
    }
    ops.h_tilde = CMatrix(h);
    ops.h_eigen = linalg::hermitian_eigen(ops.h_tilde);
    return ops;
}

double anticommutator_residual(const FockOperators& ops) {
    double worst = 0.0;
    const int modes = ops.modes();
    for (int i = 0; i < modes; ++i) {
        const SparseOp& ci = ops.annihilators[i];
        for (int j = 0; j < modes; ++j) {
            const SparseOp& cj = ops.annihilators[j];
            const SparseOp cj_dag = cj.transpose();
            RMatrix mixed = RMatrix(SparseOp(ci * cj_dag + cj_dag * ci));
            if (i == j) mixed -= RMatrix::Identity(ops.dim, ops.dim);
            const RMatrix same = RMatrix(SparseOp(ci * cj + cj * ci));
            worst = std::max({worst, linalg::max_abs(mixed), linalg::max_abs(same)});
        }
    }
    return worst;
}

CVector evolved_vacuum(const FockOperators& ops, double delta_l) {
    const auto& eig = ops.h_eigen;
    // U|0> = V exp(-i lambda dl) V† e_0, and V† e_0 is the conjugated first row.
    CVector coeff = eig.vectors.row(0).adjoint();
    for (Eigen::Index k = 0; k < coeff.size(); ++k) coeff(k) *= std::polar(1.0, -eig.values(k) * delta_l);
    return eig.vectors * coeff;
}

cplx oracle_char(const FockOperators& ops, double delta_l, double u, Observable which) {
    const CVector psi = evolved_vacuum(ops, delta_l);
    cplx acc = 0.0;
    for (Eigen::Index b = 0; b < ops.dim; ++b) {
        const double x = which == Observable::work ? ops.energy(b) : ops.number(b);
        acc += std::norm(psi(b)) * std::polar(1.0, u * x);
    }
    return acc;
}

double oracle_moment(const FockOperators& ops, double delta_l, Observable which, int order) {
    const CVector psi = evolved_vacuum(ops, delta_l);
    double acc = 0.0;
    for (Eigen::Index b = 0; b < ops.dim; ++b) {
        const double x = which == Observable::work ? ops.energy(b) : ops.number(b);
        acc += std::norm(psi(b)) * std::pow(x, order);
    }
    return acc;
}

std::vector<double> oracle_distribution(const FockOperators& ops, double delta_l, Observable which) {
    const int top = which == Observable::work ? ops.cutoff * ops.cutoff : ops.modes();
    std::vector<double> prob(static_cast<std::size_t>(top) + 1, 0.0);
    const CVector psi = evolved_vacuum(ops, delta_l);
    for (Eigen::Index b = 0; b < ops.dim; ++b) prob[support_value(ops, b, which)] += std::norm(psi(b));
    return prob;
}

CMatrix oracle_pair_amplitudes(const FockOperators& ops, double delta_l) {
    const CVector psi = evolved_vacuum(ops, delta_l);
    const cplx overlap = psi(0);
    if (std::abs(overlap) < 1e-12) {
        std::ostringstream msg;
        msg << "oracle_pair_amplitudes: <0|U|0> vanishes at delta_l = " << delta_l;
        throw DegenerateOverlapError(msg.str());
    }
    const int cutoff = ops.cutoff;
    CMatrix amp(cutoff, cutoff);
    for (int m = 0; m < cutoff; ++m) {
        const SparseOp& a = ops.annihilators[mode_index(m, cutoff)];
        const CVector a_psi = a.cast<cplx>() * psi;
        for (int n = 0; n < cutoff; ++n) {
            const SparseOp& b = ops.annihilators[mode_index(-1 - n, cutoff)];
            const CVector ba_psi = b.cast<cplx>() * a_psi;
            amp(m, n) = ba_psi(0) / overlap;
        }
    }
    return amp;
}

}  // namespace casimir
