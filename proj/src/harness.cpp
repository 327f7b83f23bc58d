#include "casimir/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <sstream>
#include <thread>

#include "casimir/bogoliubov.hpp"

namespace casimir {

namespace {

std::string describe(const ModelConfig& c) {
    std::ostringstream out;
    out << "[alpha/v = " << c.speed_ratio << ", delta_l = " << c.delta_l << ", L = " << c.cutoff << "]";
    return out.str();
}

Moment analytic(double value) { return {value, MomentMethod::analytic}; }

SweepRow to_row(const MomentReport& r) {
    return {r.config.cutoff, r.config.speed_ratio, r.config.delta_l, r.mean_w.value,
            r.m2_w.value,    r.mean_n.value,       r.m2_n.value,      r.mean_w.method};
}

// Runs task(i) for i in [0, count) on up to `jobs` threads.  Exceptions are
// stored per index.
template <typename Task>
std::vector<std::exception_ptr> run_indexed(std::size_t count, int jobs, Task&& task) {
    std::vector<std::exception_ptr> errors(count);
    auto guarded = [&](std::size_t i) {
        try {
            task(i);
        } catch (...) {
            errors[i] = std::current_exception();
        }
    };
    const std::size_t workers = std::min<std::size_t>(count, static_cast<std::size_t>(std::max(1, jobs)));
    if (workers <= 1) {
        for (std::size_t i = 0; i < count; ++i) guarded(i);
        return errors;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < count; i = next++) guarded(i);
        });
    }
    for (auto& t : pool) t.join();
    return errors;
}

}  // namespace

Pipeline run_pipeline(const ModelConfig& config) {
    config.validate();
    Pipeline p;
    if (config.delta_l == 0.0) {
        const Eigen::Index n = config.dim();
        p.transform = {CMatrix::Identity(n, n), CMatrix::Zero(n, n), 0.0};
    } else {
        const QuadraticForm form = build_quadratic_form(config);
        p.transform = evolve(diagonalize(form), config.delta_l);
    }
    p.state = pairing_matrix(p.transform, config);
    return p;
}

MomentReport run_point(const ModelConfig& config, const RunOptions& options) {
    config.validate();
    MomentReport report;
    report.config = config;
    try {
        const Pipeline p = run_pipeline(config);
        const AnalyticMoments work = analytic_moments(p.transform, p.state, Observable::work);
        const AnalyticMoments number = analytic_moments(p.transform, p.state, Observable::number);
        report.mean_w = analytic(work.mean);
        report.m2_w = analytic(work.second);
        report.var_w = analytic(work.variance);
        report.mean_n = analytic(number.mean);
        report.m2_n = analytic(number.second);
        report.var_n = analytic(number.variance);

        if (options.fd_check) {
            report.fd_w =
                moments_fd(p.state, Observable::work, options.fd_max_order, options.fd_step, work.mean);
            report.fd_n =
                moments_fd(p.state, Observable::number, options.fd_max_order, options.fd_step, number.mean);
        }
    } catch (const Error& e) {
        throw Error(e.kind(), std::string(e.what()) + " " + describe(config));
    }
    return report;
}

SweepTable sweep_cutoff(const ModelConfig& base, const std::vector<int>& cutoffs, const RunOptions& options) {
    for (std::size_t i = 0; i < cutoffs.size(); ++i) {
        if (cutoffs[i] < 1) throw DomainError("sweep_cutoff: cutoffs must be >= 1");
        if (i > 0 && cutoffs[i] <= cutoffs[i - 1])
            throw DomainError("sweep_cutoff: cutoffs must be strictly increasing");
    }

    std::vector<std::optional<SweepRow>> rows(cutoffs.size());
    const auto errors = run_indexed(cutoffs.size(), options.jobs, [&](std::size_t i) {
        ModelConfig config = base;
        config.cutoff = cutoffs[i];
        rows[i] = to_row(run_point(config, options));
    });

    SweepTable table;
    for (const auto& row : rows)
        if (row) table.rows.push_back(*row);
    for (std::size_t i = 0; i < errors.size(); ++i) {
        if (!errors[i]) continue;
        try {
            std::rethrow_exception(errors[i]);
        } catch (const Error& e) {
            throw SweepAborted(e.kind(), std::string("sweep_cutoff aborted: ") + e.what(), table);
        }
    }
    return table;
}

std::vector<int> default_cutoffs() { return {8, 16, 32, 64, 128, 256, 512}; }

std::vector<double> default_speeds() {
    std::vector<double> speeds;
    for (int k = 1; k <= 30; ++k) speeds.push_back(k / 10.0);
    return speeds;
}

FitResult fit_scaling(const SweepTable& table, FitTarget target, int min_cutoff) {
    std::vector<const SweepRow*> used;
    for (const auto& row : table.rows)
        if (row.cutoff >= min_cutoff) used.push_back(&row);
    std::sort(used.begin(), used.end(), [](auto* a, auto* b) { return a->cutoff < b->cutoff; });
    for (std::size_t i = 1; i < used.size(); ++i)
        if (used[i]->cutoff == used[i - 1]->cutoff)
            throw FitError("fit_scaling: duplicate cutoff " + std::to_string(used[i]->cutoff));
    if (used.size() < 4)
        throw FitError("fit_scaling: need at least 4 rows with L >= " + std::to_string(min_cutoff) + ", got " +
                       std::to_string(used.size()));

    const auto rows = static_cast<Eigen::Index>(used.size());
    RMatrix design(rows, 3);
    RVector y(rows);
    for (Eigen::Index i = 0; i < rows; ++i) {
        const double l = used[i]->cutoff;
        design(i, 0) = 1.0;
        design(i, 1) = l;
        design(i, 2) = target == FitTarget::work ? l * l : std::log(l);
        y(i) = target == FitTarget::work ? used[i]->mean_w : used[i]->mean_n;
    }

    const RVector scale = design.colwise().norm().transpose();
    const RMatrix scaled = design * scale.cwiseInverse().asDiagonal();
    Eigen::JacobiSVD<RMatrix> svd(scaled, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const RVector& sv = svd.singularValues();

    FitResult fit;
    fit.target = target;
    fit.condition = sv(0) / sv(sv.size() - 1);
    if (!(sv(sv.size() - 1) > 1e-13 * sv(0))) {
        std::ostringstream msg;
        msg << "fit_scaling: design matrix is rank deficient (condition estimate " << fit.condition << ")";
        throw FitError(msg.str());
    }
    const RVector beta = svd.solve(y).cwiseQuotient(scale);
    for (int k = 0; k < 3; ++k) fit.coefficients[k] = beta(k);
    fit.residual_norm = (y - design * beta).norm();
    fit.l_min = used.front()->cutoff;
    fit.l_max = used.back()->cutoff;
    fit.rows_used = used.size();
    return fit;
}

bool leading_growth_negligible(const FitResult& fit, int l_max, double fraction) {
    const double l = l_max;
    const auto& c = fit.coefficients;
    if (fit.target == FitTarget::work) return std::abs(c[2]) * l * l < fraction * std::abs(c[1]) * l;
    return std::abs(c[1]) * l < fraction * std::abs(c[2]) * std::log(l);
}

std::vector<SpeedRow> sweep_speed(const ModelConfig& base, const std::vector<double>& speeds,
                                  const std::vector<int>& cutoffs, const RunOptions& options, int min_cutoff) {
    if (speeds.empty() || cutoffs.empty()) throw DomainError("sweep_speed: empty speed or cutoff list");
    for (const double s : speeds)
        if (s == 0.0) throw DomainError("sweep_speed: speeds must be nonzero");

    std::vector<SpeedRow> out(speeds.size());
    RunOptions inner = options;
    inner.jobs = 1;
    const auto errors = run_indexed(speeds.size(), options.jobs, [&](std::size_t i) {
        SpeedRow& row = out[i];
        row.speed_ratio = speeds[i];
        ModelConfig config = base;
        config.speed_ratio = speeds[i];
        row.table = sweep_cutoff(config, cutoffs, inner);
        row.work_fit = fit_scaling(row.table, FitTarget::work, min_cutoff);
        row.number_fit = fit_scaling(row.table, FitTarget::number, min_cutoff);
        row.ok = true;
    });
    for (std::size_t i = 0; i < errors.size(); ++i) {
        if (!errors[i]) continue;
        try {
            std::rethrow_exception(errors[i]);
        } catch (const std::exception& e) {
            out[i].ok = false;
            out[i].error = e.what();
        }
    }
    std::stable_sort(out.begin(), out.end(),
                     [](const SpeedRow& a, const SpeedRow& b) { return a.speed_ratio < b.speed_ratio; });
    return out;
}

}  // namespace casimir
