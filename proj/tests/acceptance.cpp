// Acceptance suite: one PASS/FAIL line per primary criterion, followed by
// indented detail lines.  Exit status is nonzero if any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <thread>
#include <vector>

#include "casimir/bogoliubov.hpp"
#include "casimir/errors.hpp"
#include "casimir/fock.hpp"
#include "casimir/harness.hpp"
#include "casimir/model.hpp"
#include "casimir/statistics.hpp"

using namespace casimir;

namespace {

const double kLn2 = std::log(2.0);
const std::vector<double> kUGrid{-3.0, -0.7, -0.1, 0.1, 0.7, 2.3, 5.0};

ModelConfig config(double speed, int cutoff, double delta_l = kLn2) {
    ModelConfig c;
    c.speed_ratio = speed;
    c.delta_l = delta_l;
    c.cutoff = cutoff;
    return c;
}

struct Evolved {
    EvolvedTransform t;
    PairingState state;
};

Evolved evolved(const ModelConfig& c) {
    const Pipeline p = run_pipeline(c);
    return {p.transform, p.state};
}

// Relative difference with a floor for quantities that vanish identically (L = 1).
double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-14); }

struct Outcome {
    bool pass = true;
    std::vector<std::string> details;

    void require(bool ok, const std::string& what) {
        if (!ok) {
            pass = false;
            details.push_back("violated: " + what);
        }
    }
    template <typename... Args>
    void note(const char* fmt, Args... args) {
        char buf[512];
        std::snprintf(buf, sizeof buf, fmt, args...);
        details.emplace_back(buf);
    }
};

struct Criterion {
    const char* name;
    double budget_seconds;
    std::function<void(Outcome&)> body;
};

int jobs() { return static_cast<int>(std::max(1u, std::thread::hardware_concurrency())); }

void oracle_equivalence(Outcome& out) {
    double chi_err = 0.0, moment_err = 0.0, fd_err = 0.0;
    int configs = 0;
    for (const int cutoff : {1, 2, 3})
        for (const double speed : {0.1, 0.5, 2.0})
            for (const int sign : {1, -1}) {
                const ModelConfig c = config(sign * speed, cutoff, sign * kLn2);
                const Evolved e = evolved(c);
                const FockOperators ops = build_fock_operators(c);
                for (const Observable which : {Observable::work, Observable::number}) {
                    for (const double u : kUGrid)
                        chi_err = std::max(chi_err, std::abs(characteristic(e.state, which, u) -
                                                             oracle_char(ops, c.delta_l, u, which)));
                    const double o1 = oracle_moment(ops, c.delta_l, which, 1);
                    const double o2 = oracle_moment(ops, c.delta_l, which, 2);
                    const AnalyticMoments m = analytic_moments(e.t, e.state, which);
                    moment_err = std::max({moment_err, rel(m.mean, o1), rel(m.second, o2)});
                    const FdMoments fd = moments_fd(e.state, which, 2, 1e-3, m.mean);
                    fd_err = std::max({fd_err, rel(fd.raw[0], o1), rel(fd.raw[1], o2)});
                }
                ++configs;
            }
    out.note("%d configs x 2 observables x %zu u points", configs, kUGrid.size());
    out.note("max |chi_gauss - chi_oracle| = %.3e (tol 1e-8)", chi_err);
    out.note("max rel moment error: analytic %.3e, finite-difference %.3e (tol 1e-6)", moment_err, fd_err);
    out.require(chi_err <= 1e-8, "characteristic functions within 1e-8");
    out.require(moment_err <= 1e-6, "analytic moments within 1e-6 relative");
    out.require(fd_err <= 1e-6, "finite-difference moments within 1e-6 relative");
}

void perturbative_regime(Outcome& out) {
    const double dl = 1e-3;
    auto max_error = [&](double speed, int cutoff) {
        const CMatrix amp = oracle_pair_amplitudes(build_fock_operators(config(speed, cutoff, dl)), dl);
        double err = 0.0;
        for (int m = 0; m < cutoff; ++m)
            for (int n = 0; n < cutoff; ++n)
                err = std::max(err, std::abs(amp(m, n) - perturbative_pair_amplitude(m, n, dl)));
        return err;
    };
    // The first-order formula omits the O(dl^2 |omega| / alpha) dynamical
    // phase, so the 1e-6 bound is checked in the fast-drive range.
    for (const double speed : {5.0, 10.0, 20.0}) {
        double worst = 0.0;
        for (int cutoff = 1; cutoff <= 4; ++cutoff) worst = std::max(worst, max_error(speed, cutoff));
        out.note("alpha/v = %4.1f: max entrywise error over L = 1..4 is %.3e (tol 1e-6)", speed, worst);
        out.require(worst <= 1e-6, "amplitudes within 1e-6 at alpha/v = " + std::to_string(speed));
    }
    for (const double speed : {0.1, 1.0, 2.0})
        out.note("info, alpha/v = %3.1f: L = 2 error %.3e, L = 4 error %.3e", speed, max_error(speed, 2),
                 max_error(speed, 4));
}

void scaling_constants(Outcome& out) {
    RunOptions opts;
    opts.jobs = jobs();
    for (const double speed : {0.05, 0.1, 0.2}) {
        const SweepTable t = sweep_cutoff(config(speed, 1), {128, 256, 512}, opts);
        for (const SweepRow& r : t.rows) {
            const double a2 = speed * speed;
            const double cn = r.mean_n / (a2 * std::log(static_cast<double>(r.cutoff)));
            const double cw = r.mean_w / (a2 * r.cutoff);
            out.note("alpha/v = %.2f, L = %3d: <N>/(a^2 ln L) = %.4f, <w>/(a^2 L) = %.4f", speed, r.cutoff, cn, cw);
            out.require(cn >= 0.015 && cn <= 0.06, "<N> constant within a factor 2 of 0.03");
            out.require(cw >= 0.01 && cw <= 0.04, "<w> constant within a factor 2 of 0.02");
        }
    }
}

void two_regimes(Outcome& out) {
    RunOptions opts;
    opts.jobs = jobs();
    const std::vector<int> cutoffs{16, 32, 64, 128, 256, 512};
    const std::vector<SpeedRow> rows = sweep_speed(config(1.0, 1), default_speeds(), cutoffs, opts, 16);
    const int lmax = cutoffs.back();
    const double l = lmax;

    auto find = [&](double speed) -> const SpeedRow& {
        return *std::find_if(rows.begin(), rows.end(),
                             [&](const SpeedRow& r) { return std::abs(r.speed_ratio - speed) < 1e-12; });
    };

    int failed = 0;
    for (const SpeedRow& r : rows)
        if (!r.ok) {
            ++failed;
            out.note("alpha/v = %.1f failed: %s", r.speed_ratio, r.error.c_str());
        }
    out.require(failed == 0, "every speed in the sweep completes");
    if (failed) return;

    const SpeedRow& slow = find(0.1);
    const auto& bw = slow.work_fit.coefficients;
    const auto& gn = slow.number_fit.coefficients;
    out.note("alpha/v = 0.1: |b2| L^2 = %.3e vs |b1| L = %.3e; |g1| L = %.3e vs |gl| ln L = %.3e",
             std::abs(bw[2]) * l * l, std::abs(bw[1]) * l, std::abs(gn[1]) * l, std::abs(gn[2]) * std::log(l));
    out.require(leading_growth_negligible(slow.work_fit, lmax), "alpha/v = 0.1: L^2 term below 10% of L term");
    out.require(leading_growth_negligible(slow.number_fit, lmax), "alpha/v = 0.1: L term below 10% of ln L term");

    const SpeedRow& fast = find(2.0);
    const auto& fw = fast.work_fit.coefficients;
    const auto& fn = fast.number_fit.coefficients;
    out.note("alpha/v = 2.0: b2 L^2 = %.3e vs b1 L = %.3e; g1 L = %.3e vs gl ln L = %.3e", fw[2] * l * l,
             fw[1] * l, fn[1] * l, fn[2] * std::log(l));
    out.require(fw[2] * l * l > fw[1] * l, "alpha/v = 2: L^2 term dominates the work mean");
    out.require(fn[1] * l > fn[2] * std::log(l), "alpha/v = 2: L term dominates the number mean");

    // Onset: every coefficient at alpha/v <= 0.8 stays below a tenth of the
    // smallest one at alpha/v >= 1.5.
    double below_b = 0.0, below_g = 0.0;
    double above_b = INFINITY, above_g = INFINITY;
    for (const SpeedRow& r : rows) {
        if (r.speed_ratio <= 0.8 + 1e-12) {
            below_b = std::max(below_b, std::abs(r.beta2()));
            below_g = std::max(below_g, std::abs(r.gamma1()));
        } else if (r.speed_ratio >= 1.5 - 1e-12) {
            above_b = std::min(above_b, r.beta2());
            above_g = std::min(above_g, r.gamma1());
        }
    }
    for (const double s : {0.5, 0.8, 0.9, 1.0, 1.1, 1.2, 1.5, 2.0, 2.5, 3.0}) {
        const SpeedRow& r = find(s);
        out.note("alpha/v = %.1f: beta2 = %+.4e  gamma1 = %+.4e", s, r.beta2(), r.gamma1());
    }
    out.note("max |beta2|, |gamma1| for alpha/v <= 0.8: %.3e, %.3e", below_b, below_g);
    out.note("min beta2, gamma1 for alpha/v >= 1.5:     %.3e, %.3e", above_b, above_g);
    out.require(above_b > 10.0 * below_b, "beta2 rises across alpha/v ~ 1");
    out.require(above_g > 10.0 * below_g, "gamma1 rises across alpha/v ~ 1");
}

void flip_invariance(Outcome& out) {
    double number_err = 0.0, work_change = 0.0;
    for (const double speed : {0.5, 2.0})
        for (const int cutoff : {8, 16}) {
            const MomentReport fwd = run_point(config(speed, cutoff, kLn2));
            const MomentReport bwd = run_point(config(-speed, cutoff, -kLn2));
            number_err = std::max({number_err, rel(bwd.mean_n.value, fwd.mean_n.value),
                                   rel(bwd.m2_n.value, fwd.m2_n.value)});
            const double dw = rel(bwd.mean_w.value, fwd.mean_w.value);
            work_change = std::max(work_change, dw);
            out.note("alpha/v = %.1f, L = %2d: <N> %.6e / %.6e, <w> %.6e / %.6e", speed, cutoff, fwd.mean_n.value,
                     bwd.mean_n.value, fwd.mean_w.value, bwd.mean_w.value);
        }
    out.note("max rel change of <N>, <N^2>: %.3e (tol 1e-8); max rel change of <w>: %.3e (need > 1e-3)", number_err,
             work_change);
    out.require(number_err <= 1e-8, "number moments invariant within 1e-8");
    out.require(work_change > 1e-3, "work mean changes by more than 1e-3 for some config");
}

void structural_invariants(Outcome& out) {
    double canonical = 0.0, skew = 0.0, chi0 = 0.0, chi_mod = 0.0, period_n = 0.0, period_w = 0.0;
    double n_odd = 0.0, n_sum = 0.0, n_neg = 0.0, w_sum = 0.0, w_neg = 0.0;
    for (const double speed : {0.1, 0.5, 1.0, 2.0, 3.0})
        for (const int sign : {1, -1})
            for (const int cutoff : {1, 2, 4, 8, 16, 32, 64, 128}) {
                const ModelConfig c = config(sign * speed, cutoff, sign * kLn2);
                const BogoliubovSolution s = diagonalize(build_quadratic_form(c));
                const EvolvedTransform t = evolve(s, c.delta_l);
                const PairingState st = pairing_matrix(t, c);
                canonical = std::max({canonical, canonical_residuals(s).max(), canonical_residuals(t).max()});
                skew = std::max(skew, linalg::max_abs(CMatrix(st.g + st.g.transpose())));
                if (cutoff > 16) continue;

                for (const Observable which : {Observable::work, Observable::number}) {
                    chi0 = std::max(chi0, std::abs(characteristic(st, which, 0.0) - 1.0));
                    for (double u = -10.0; u <= 10.0 + 1e-12; u += 0.1)
                        chi_mod = std::max(chi_mod, std::abs(characteristic(st, which, u)) - 1.0);
                }
                for (const double u : {0.3, 1.7}) {
                    period_n = std::max(period_n, std::abs(char_number(st, u + M_PI) - char_number(st, u)));
                    // Integer work support is equivalent to 2 pi periodicity of chi_work.
                    period_w = std::max(period_w, std::abs(char_work(st, u + 2 * M_PI) - char_work(st, u)));
                }
                const auto pn = number_distribution(st);
                double total = 0.0;
                for (std::size_t k = 0; k < pn.size(); ++k) {
                    if (k % 2 == 1) n_odd = std::max(n_odd, std::abs(pn[k]));
                    n_neg = std::max(n_neg, -pn[k]);
                    total += pn[k];
                }
                n_sum = std::max(n_sum, std::abs(total - 1.0));
                const auto pw = work_distribution(st);
                total = 0.0;
                for (const double p : pw) {
                    w_neg = std::max(w_neg, -p);
                    total += p;
                }
                w_sum = std::max(w_sum, std::abs(total - 1.0));
            }

    double coupling = 0.0;
    for (int m = -6; m <= 6; ++m)
        for (int n = -6; n <= 6; ++n)
            coupling = std::max(coupling, std::abs(coupling_element(m, n) - coupling_quadrature(m, n, 1.0, 1.0, 0.0)));

    out.note("canonical residual %.3e (tol 1e-9), G skewness %.3e (tol 1e-8)", canonical, skew);
    out.note("|chi(0) - 1| %.3e, max |chi| - 1 on [-10, 10] %.3e (tol 1e-10)", chi0, chi_mod);
    out.note("chi_N period-pi defect %.3e, chi_w period-2pi defect %.3e (tol 1e-10)", period_n, period_w);
    out.note("P(N odd) max %.3e, |sum P(N) - 1| %.3e (tol 1e-10), min P(N) %.3e", n_odd, n_sum, -n_neg);
    out.note("|sum p(w) - 1| %.3e (tol 1e-8), min p(w) %.3e", w_sum, -w_neg);
    out.note("coupling closed form vs quadrature on [-6, 6]^2: %.3e (tol 1e-8)", coupling);
    out.require(canonical <= 1e-9, "canonical relations");
    out.require(skew <= 1e-8, "G skew-symmetric");
    out.require(chi0 <= 1e-12, "chi(0) = 1");
    out.require(chi_mod <= 1e-10, "|chi| <= 1 + 1e-10");
    out.require(period_n <= 1e-10, "chi_N has period pi");
    out.require(period_w <= 1e-10, "work supported on integers");
    out.require(n_odd == 0.0 && n_sum <= 1e-10 && n_neg <= 1e-12, "number distribution even and normalised");
    out.require(w_sum <= 1e-8 && w_neg <= 1e-9, "work distribution normalised and nonnegative");
    out.require(coupling <= 1e-8, "coupling closed form matches quadrature");
}

}  // namespace

int main() {
    const std::vector<Criterion> criteria{
        {"oracle equivalence (L = 1..3, chi within 1e-8, moments within 1e-6)", 60.0, oracle_equivalence},
        {"perturbative pair amplitudes (dl = 1e-3, L <= 4, within 1e-6)", 60.0, perturbative_regime},
        {"scaling constants <N> ~ 0.03 a^2 ln L, <w> ~ 0.02 a^2 L (factor 2)", 600.0, scaling_constants},
        {"two regimes and onset near alpha/v = 1 (L = 16..512)", 1800.0, two_regimes},
        {"number moments invariant under (alpha, dl) -> (-alpha, -dl)", 60.0, flip_invariance},
        {"structural invariants", 60.0, structural_invariants},
    };

    // The report goes to stdout and to acceptance_report.txt in the working
    // directory, since ctest only shows the output of failing tests.
    std::FILE* report = std::fopen("acceptance_report.txt", "w");
    auto emit = [&](const std::string& line) {
        std::fputs(line.c_str(), stdout);
        std::fflush(stdout);
        if (report) {
            std::fputs(line.c_str(), report);
            std::fflush(report);
        }
    };

    int failures = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const Criterion& c = criteria[i];
        Outcome out;
        const auto start = std::chrono::steady_clock::now();
        try {
            c.body(out);
        } catch (const std::exception& e) {
            out.pass = false;
            out.details.push_back(std::string("exception: ") + e.what());
        }
        const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        if (seconds > c.budget_seconds) {
            out.pass = false;
            out.note("runtime %.1f s exceeds the %.0f s budget", seconds, c.budget_seconds);
        }
        char head[256];
        std::snprintf(head, sizeof head, "%s [%zu] %s (%.1f s)\n", out.pass ? "PASS" : "FAIL", i + 1, c.name, seconds);
        emit(head);
        for (const auto& d : out.details) emit("       " + d + "\n");
        if (!out.pass) ++failures;
    }
    emit(std::to_string(static_cast<int>(criteria.size()) - failures) + " of " + std::to_string(criteria.size()) +
         " criteria passed\n");
    if (report) std::fclose(report);
    return failures == 0 ? 0 : 1;
}
