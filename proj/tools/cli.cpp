#include "cli.hpp"

#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "casimir/csv.hpp"
#include "casimir/errors.hpp"
#include "casimir/fock.hpp"
#include "casimir/harness.hpp"
#include "casimir/statistics.hpp"

namespace casimir::cli {

namespace {

using json = nlohmann::ordered_json;

const std::string kVersion = std::string("casimir ") + CASIMIR_VERSION;

// Default characteristic-function grid for chi and oracle-check.
const std::vector<double> kDefaultGrid = {-3.0, -0.7, -0.1, 0.1, 0.7, 2.3, 5.0};

struct Params {
    double alpha_over_v = 0.1;
    double delta_l = std::log(2.0);
    double l_ratio = 2.0;
    int cutoff = 16;
    double theta0 = 0.0;
    double l_ref = 1.0;
    double v_ref = 1.0;

    std::string config_path;
    std::string output;
    std::string format;

    std::string which = "work";
    std::vector<double> u_grid = kDefaultGrid;
    bool allow_large = false;
    bool fd = false;
    double fd_step = 1e-3;
    int max_order = 2;
    std::vector<int> cutoffs = default_cutoffs();
    std::vector<double> speeds = default_speeds();
    int min_cutoff = 16;
    int jobs = 1;
    std::string input;
    std::string target = "both";
};

// Options of one subcommand, by flag name, with a setter used when the
// value comes from a --config file.
struct Registry {
    std::map<std::string, CLI::Option*> options;
    std::map<std::string, std::function<void(const json&)>> setters;

    template <typename T>
    CLI::Option* add(CLI::App* app, const std::string& name, T& target, const std::string& help) {
        CLI::Option* opt = app->add_option("--" + name, target, help)->capture_default_str();
        options[name] = opt;
        setters[name] = [&target](const json& j) { target = j.get<T>(); };
        return opt;
    }

    CLI::Option* flag(CLI::App* app, const std::string& name, bool& target, const std::string& help) {
        CLI::Option* opt = app->add_flag("--" + name, target, help);
        options[name] = opt;
        setters[name] = [&target](const json& j) { target = j.get<bool>(); };
        return opt;
    }
};

struct Subcommand {
    CLI::App* app = nullptr;
    Registry registry;
};

void add_model_options(Subcommand& sub, Params& p, bool with_cutoff = true) {
    auto* app = sub.app;
    auto& r = sub.registry;
    r.add(app, "alpha-over-v", p.alpha_over_v, "Wall speed over mode speed (negative: compression)");
    auto* dl = r.add(app, "delta-l", p.delta_l, "ln(l_final / l_initial)");
    auto* ratio = r.add(app, "l-ratio", p.l_ratio, "l_final / l_initial; sets delta-l = ln(ratio)");
    dl->excludes(ratio);
    if (with_cutoff) r.add(app, "cutoff", p.cutoff, "Cutoff L (modes -L .. L-1)");
    r.add(app, "theta0", p.theta0, "Boundary phase (radians)");
    r.add(app, "l-ref", p.l_ref, "Final box length for physical units");
    r.add(app, "v-ref", p.v_ref, "Mode speed for physical units");
}

void add_io_options(Subcommand& sub, Params& p) {
    sub.app->add_option("--config", p.config_path, "JSON file whose keys mirror the flags");
    sub.app->add_option("--output,-o", p.output, "Output file (default: stdout)");
    sub.app->add_option("--format", p.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
}

void apply_config_file(Subcommand& sub, Params& p) {
    if (p.config_path.empty()) return;
    std::ifstream in(p.config_path);
    if (!in) throw DomainError("cannot read config file '" + p.config_path + "'");
    json j;
    try {
        j = json::parse(in);
    } catch (const json::exception& e) {
        throw DomainError("config file '" + p.config_path + "': " + e.what());
    }
    if (!j.is_object()) throw DomainError("config file must hold a JSON object");

    auto& r = sub.registry;
    const bool cli_sets_delta = (r.options.count("delta-l") && r.options["delta-l"]->count() > 0) ||
                                (r.options.count("l-ratio") && r.options["l-ratio"]->count() > 0);
    if (j.contains("delta-l") && j.contains("l-ratio"))
        throw DomainError("config file: delta-l and l-ratio are mutually exclusive");

    for (const auto& [key, value] : j.items()) {
        const auto it = r.options.find(key);
        if (it == r.options.end())
            throw DomainError("config file: unknown key '" + key + "' for subcommand " + sub.app->get_name());
        if (it->second->count() > 0) continue;
        if ((key == "delta-l" || key == "l-ratio") && cli_sets_delta) continue;
        try {
            r.setters[key](value);
        } catch (const json::exception& e) {
            throw DomainError("config file: bad value for '" + key + "': " + e.what());
        }
    }
    if (!cli_sets_delta && j.contains("l-ratio")) {
        if (!(p.l_ratio > 0.0)) throw DomainError("l-ratio must be positive");
        p.delta_l = std::log(p.l_ratio);
    }
}

ModelConfig resolve_model(Subcommand& sub, Params& p) {
    auto& r = sub.registry;
    if (r.options.count("l-ratio") && r.options["l-ratio"]->count() > 0) {
        if (!(p.l_ratio > 0.0)) throw DomainError("l-ratio must be positive");
        p.delta_l = std::log(p.l_ratio);
    }
    ModelConfig c;
    c.speed_ratio = p.alpha_over_v;
    c.delta_l = p.delta_l;
    c.cutoff = p.cutoff;
    c.theta0 = p.theta0;
    c.l_ref = p.l_ref;
    c.v_ref = p.v_ref;
    c.validate();
    return c;
}

json config_json(const ModelConfig& c) {
    return json{{"alpha-over-v", c.speed_ratio}, {"delta-l", c.delta_l}, {"cutoff", c.cutoff},
                {"theta0", c.theta0},            {"l-ref", c.l_ref},     {"v-ref", c.v_ref}};
}

Observable parse_which(const std::string& which) {
    return which == "number" ? Observable::number : Observable::work;
}

const char* method_name(MomentMethod m) {
    return m == MomentMethod::analytic ? "analytic" : "finite-difference";
}

json fd_json(const FdMoments& fd) {
    json j{{"step", fd.step}, {"raw_moments", fd.raw}, {"consistent", fd.consistent}};
    if (fd.mean_rel_diff) j["mean_rel_diff"] = *fd.mean_rel_diff;
    return j;
}

json fit_json(const FitResult& f) {
    const bool work = f.target == FitTarget::work;
    json coeffs = work ? json{{"beta0", f.coefficients[0]}, {"beta1", f.coefficients[1]}, {"beta2", f.coefficients[2]}}
                       : json{{"gamma0", f.coefficients[0]}, {"gamma1", f.coefficients[1]},
                              {"gamma_l", f.coefficients[2]}};
    return json{{"target", work ? "work" : "number"},
                {"basis", work ? "1, L, L^2" : "1, L, ln L"},
                {"unit", work ? kEnergyUnit : "dimensionless"},
                {"coefficients", coeffs},
                {"residual_norm", f.residual_norm},
                {"condition", f.condition},
                {"l_min", f.l_min},
                {"l_max", f.l_max},
                {"rows_used", f.rows_used}};
}

csv::Metadata metadata(const std::string& command, const json& config) {
    return {{"version", kVersion}, {"command", command}, {"config", config.dump()}, {"energy_unit", kEnergyUnit}};
}

class Emitter {
  public:
    Emitter(const Params& p, std::ostream& fallback) {
        if (!p.output.empty()) {
            file_.open(p.output, std::ios::binary);
            if (!file_) throw DomainError("cannot open output file '" + p.output + "'");
        }
        out_ = p.output.empty() ? &fallback : &file_;
    }
    std::ostream& stream() { return *out_; }

  private:
    std::ofstream file_;
    std::ostream* out_;
};

std::string format_or(const Params& p, const char* fallback) { return p.format.empty() ? fallback : p.format; }

void write_json(std::ostream& out, const json& j) { out << j.dump(2) << '\n'; }

// --- subcommands -----------------------------------------------------------

void do_simulate(Subcommand& sub, Params& p, std::ostream& out) {
    const ModelConfig c = resolve_model(sub, p);
    RunOptions opts;
    opts.fd_check = p.fd || p.max_order > 2;
    opts.fd_step = p.fd_step;
    opts.fd_max_order = p.max_order;
    if (p.max_order < 1 || p.max_order > 4) throw DomainError("max-order must be in 1..4");
    const MomentReport r = run_point(c, opts);

    json cfg = config_json(c);
    cfg["fd"] = opts.fd_check;
    cfg["fd-step"] = p.fd_step;
    cfg["max-order"] = p.max_order;

    Emitter emit(p, out);
    if (format_or(p, "json") == "csv") {
        SweepTable t;
        t.rows.push_back({c.cutoff, c.speed_ratio, c.delta_l, r.mean_w.value, r.m2_w.value, r.mean_n.value,
                          r.m2_n.value, r.mean_w.method});
        csv::write_sweep(emit.stream(), t, metadata("simulate", cfg));
        return;
    }
    auto moment = [](const Moment& m, const char* unit) {
        return json{{"value", m.value}, {"method", method_name(m.method)}, {"unit", unit}};
    };
    const std::string unit2 = std::string("(") + kEnergyUnit + ")^2";
    const double e = c.energy_unit();
    json j{{"version", kVersion},
           {"command", "simulate"},
           {"config", cfg},
           {"energy_unit", {{"name", kEnergyUnit}, {"physical_value", e}}},
           {"moments",
            {{"mean_w", moment(r.mean_w, kEnergyUnit)},
             {"m2_w", moment(r.m2_w, unit2.c_str())},
             {"var_w", moment(r.var_w, unit2.c_str())},
             {"mean_n", moment(r.mean_n, "dimensionless")},
             {"m2_n", moment(r.m2_n, "dimensionless")},
             {"var_n", moment(r.var_n, "dimensionless")}}},
           {"physical",
            {{"mean_w", r.mean_w.value * e}, {"m2_w", r.m2_w.value * e * e}, {"var_w", r.var_w.value * e * e}}}};
    if (r.fd_w) j["finite_difference"]["work"] = fd_json(*r.fd_w);
    if (r.fd_n) j["finite_difference"]["number"] = fd_json(*r.fd_n);
    write_json(emit.stream(), j);
}

void do_chi(Subcommand& sub, Params& p, std::ostream& out) {
    const ModelConfig c = resolve_model(sub, p);
    const Observable which = parse_which(p.which);
    const Pipeline pipe = run_pipeline(c);
    const auto chi = characteristic_path(pipe.state, which, p.u_grid);

    json cfg = config_json(c);
    cfg["which"] = p.which;
    cfg["u-grid"] = p.u_grid;
    Emitter emit(p, out);
    if (format_or(p, "csv") == "json") {
        json rows = json::array();
        for (std::size_t i = 0; i < chi.size(); ++i)
            rows.push_back({{"u", p.u_grid[i]}, {"re", chi[i].real()}, {"im", chi[i].imag()}});
        write_json(emit.stream(), {{"version", kVersion}, {"command", "chi"}, {"config", cfg}, {"chi", rows}});
        return;
    }
    auto& s = emit.stream();
    for (const auto& [k, v] : metadata("chi", cfg)) s << "# " << k << ": " << v << '\n';
    s << "u,re,im,abs\n";
    for (std::size_t i = 0; i < chi.size(); ++i)
        s << csv::format_double(p.u_grid[i]) << ',' << csv::format_double(chi[i].real()) << ','
          << csv::format_double(chi[i].imag()) << ',' << csv::format_double(std::abs(chi[i])) << '\n';
}

void do_distribution(Subcommand& sub, Params& p, std::ostream& out) {
    const ModelConfig c = resolve_model(sub, p);
    const Observable which = parse_which(p.which);
    const Pipeline pipe = run_pipeline(c);
    const auto prob =
        which == Observable::number ? number_distribution(pipe.state) : work_distribution(pipe.state, p.allow_large);

    json cfg = config_json(c);
    cfg["which"] = p.which;
    cfg["allow-large"] = p.allow_large;
    const std::string column = which == Observable::number ? "N" : std::string("w[") + kEnergyUnit + "]";
    Emitter emit(p, out);
    if (format_or(p, "csv") == "json") {
        write_json(emit.stream(), {{"version", kVersion},
                                   {"command", "distribution"},
                                   {"config", cfg},
                                   {"support", column},
                                   {"probability", prob}});
        return;
    }
    auto& s = emit.stream();
    for (const auto& [k, v] : metadata("distribution", cfg)) s << "# " << k << ": " << v << '\n';
    s << column << ",probability\n";
    for (std::size_t i = 0; i < prob.size(); ++i) s << i << ',' << csv::format_double(prob[i]) << '\n';
}

void do_sweep_l(Subcommand& sub, Params& p, std::ostream& out) {
    const ModelConfig c = resolve_model(sub, p);
    RunOptions opts;
    opts.jobs = p.jobs;
    const SweepTable table = sweep_cutoff(c, p.cutoffs, opts);

    json cfg = config_json(c);
    cfg.erase("cutoff");
    cfg["cutoffs"] = p.cutoffs;
    Emitter emit(p, out);
    if (format_or(p, "csv") == "json") {
        json rows = json::array();
        for (const auto& r : table.rows)
            rows.push_back({{"L", r.cutoff}, {"alpha_over_v", r.speed_ratio}, {"delta_l", r.delta_l},
                            {"mean_w", r.mean_w}, {"m2_w", r.m2_w}, {"mean_n", r.mean_n}, {"m2_n", r.m2_n},
                            {"method", method_name(r.method)}});
        write_json(emit.stream(), {{"version", kVersion}, {"command", "sweep-l"}, {"config", cfg},
                                   {"energy_unit", kEnergyUnit}, {"rows", rows}});
        return;
    }
    csv::write_sweep(emit.stream(), table, metadata("sweep-l", cfg));
}

void do_sweep_alpha(Subcommand& sub, Params& p, std::ostream& out) {
    const ModelConfig c = resolve_model(sub, p);
    RunOptions opts;
    opts.jobs = p.jobs;
    const auto rows = sweep_speed(c, p.speeds, p.cutoffs, opts, p.min_cutoff);

    json cfg = config_json(c);
    cfg.erase("cutoff");
    cfg.erase("alpha-over-v");
    cfg["speeds"] = p.speeds;
    cfg["cutoffs"] = p.cutoffs;
    cfg["min-cutoff"] = p.min_cutoff;
    Emitter emit(p, out);
    if (format_or(p, "csv") == "json") {
        json arr = json::array();
        for (const auto& r : rows) {
            json j{{"alpha_over_v", r.speed_ratio}, {"ok", r.ok}};
            if (r.ok) {
                j["work_fit"] = fit_json(r.work_fit);
                j["number_fit"] = fit_json(r.number_fit);
            } else {
                j["error"] = r.error;
            }
            arr.push_back(j);
        }
        write_json(emit.stream(), {{"version", kVersion}, {"command", "sweep-alpha"}, {"config", cfg}, {"rows", arr}});
        return;
    }
    csv::write_speed_sweep(emit.stream(), rows, metadata("sweep-alpha", cfg));
}

void do_fit(Subcommand&, Params& p, std::ostream& out) {
    if (p.input.empty()) throw DomainError("fit: --input is required");
    std::ifstream in(p.input);
    if (!in) throw DomainError("fit: cannot read '" + p.input + "'");
    const SweepTable table = csv::read_sweep(in);

    std::vector<FitResult> fits;
    if (p.target == "work" || p.target == "both") fits.push_back(fit_scaling(table, FitTarget::work, p.min_cutoff));
    if (p.target == "number" || p.target == "both")
        fits.push_back(fit_scaling(table, FitTarget::number, p.min_cutoff));

    json cfg{{"input", p.input}, {"target", p.target}, {"min-cutoff", p.min_cutoff}};
    Emitter emit(p, out);
    if (format_or(p, "json") == "csv") {
        auto& s = emit.stream();
        for (const auto& [k, v] : metadata("fit", cfg)) s << "# " << k << ": " << v << '\n';
        s << "target,c0,c1,c2,residual_norm,condition,l_min,l_max\n";
        for (const auto& f : fits) {
            s << (f.target == FitTarget::work ? "work" : "number");
            for (const double x : f.coefficients) s << ',' << csv::format_double(x);
            s << ',' << csv::format_double(f.residual_norm) << ',' << csv::format_double(f.condition) << ','
              << f.l_min << ',' << f.l_max << '\n';
        }
        return;
    }
    json arr = json::array();
    for (const auto& f : fits) arr.push_back(fit_json(f));
    write_json(emit.stream(), {{"version", kVersion}, {"command", "fit"}, {"config", cfg}, {"fits", arr}});
}

int do_oracle_check(Subcommand& sub, Params& p, std::ostream& out) {
    const ModelConfig c = resolve_model(sub, p);
    const FockOperators ops = build_fock_operators(c, p.allow_large);
    const Pipeline pipe = run_pipeline(c);

    double max_chi = 0.0;
    json points = json::array();
    for (const Observable which : {Observable::work, Observable::number}) {
        const auto gauss = characteristic_path(pipe.state, which, p.u_grid);
        for (std::size_t i = 0; i < p.u_grid.size(); ++i) {
            const cplx exact = oracle_char(ops, c.delta_l, p.u_grid[i], which);
            const double diff = std::abs(gauss[i] - exact);
            max_chi = std::max(max_chi, diff);
            points.push_back({{"which", which == Observable::work ? "work" : "number"},
                              {"u", p.u_grid[i]},
                              {"gaussian", {gauss[i].real(), gauss[i].imag()}},
                              {"oracle", {exact.real(), exact.imag()}},
                              {"abs_diff", diff}});
        }
    }
    json moments = json::object();
    for (const Observable which : {Observable::work, Observable::number}) {
        const AnalyticMoments m = analytic_moments(pipe.transform, pipe.state, which);
        const double o1 = oracle_moment(ops, c.delta_l, which, 1);
        const double o2 = oracle_moment(ops, c.delta_l, which, 2);
        auto rel = [](double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); };
        moments[which == Observable::work ? "work" : "number"] = {
            {"mean", m.mean}, {"oracle_mean", o1}, {"second", m.second}, {"oracle_second", o2},
            {"mean_rel_diff", o1 == 0.0 ? std::abs(m.mean) : rel(m.mean, o1)},
            {"second_rel_diff", o2 == 0.0 ? std::abs(m.second) : rel(m.second, o2)}};
    }
    const bool pass = max_chi <= 1e-8;

    json cfg = config_json(c);
    cfg["u-grid"] = p.u_grid;
    cfg["allow-large"] = p.allow_large;
    Emitter emit(p, out);
    if (format_or(p, "json") == "csv") {
        auto& s = emit.stream();
        for (const auto& [k, v] : metadata("oracle-check", cfg)) s << "# " << k << ": " << v << '\n';
        s << "# max_abs_diff: " << csv::format_double(max_chi) << (pass ? " (pass)" : " (FAIL)") << '\n';
        s << "which,u,gaussian_re,gaussian_im,oracle_re,oracle_im,abs_diff\n";
        for (const auto& pt : points)
            s << pt["which"].get<std::string>() << ',' << csv::format_double(pt["u"]) << ','
              << csv::format_double(pt["gaussian"][0]) << ',' << csv::format_double(pt["gaussian"][1]) << ','
              << csv::format_double(pt["oracle"][0]) << ',' << csv::format_double(pt["oracle"][1]) << ','
              << csv::format_double(pt["abs_diff"]) << '\n';
    } else {
        write_json(emit.stream(), {{"version", kVersion},
                                   {"command", "oracle-check"},
                                   {"config", cfg},
                                   {"tolerance", 1e-8},
                                   {"max_abs_diff", max_chi},
                                   {"pass", pass},
                                   {"moments", moments},
                                   {"points", points}});
    }
    return pass ? kExitOk : kExitNumerical;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Fermionic dynamical Casimir effect: work and particle statistics", "casimir"};
    app.set_version_flag("--version", kVersion);
    app.require_subcommand(1, 1);

    Params p;
    std::map<std::string, Subcommand> subs;
    auto make = [&](const std::string& name, const std::string& help) -> Subcommand& {
        Subcommand& s = subs[name];
        s.app = app.add_subcommand(name, help);
        add_io_options(s, p);
        return s;
    };

    {
        auto& s = make("simulate", "Moments of work and particle number for one configuration");
        add_model_options(s, p);
        s.registry.flag(s.app, "fd", p.fd, "Cross-check moments by finite differences of chi");
        s.registry.add(s.app, "fd-step", p.fd_step, "Finite-difference step in u");
        s.registry.add(s.app, "max-order", p.max_order, "Highest moment order (3-4 use finite differences)");
    }
    {
        auto& s = make("chi", "Characteristic function on a u grid");
        add_model_options(s, p);
        s.registry.add(s.app, "which", p.which, "work or number")->check(CLI::IsMember({"work", "number"}));
        s.registry.add(s.app, "u-grid", p.u_grid, "u values (path order)")->delimiter(',');
    }
    {
        auto& s = make("distribution", "Probability distribution of work or particle number");
        add_model_options(s, p);
        s.registry.add(s.app, "which", p.which, "work or number")->check(CLI::IsMember({"work", "number"}));
        s.registry.flag(s.app, "allow-large", p.allow_large, "Lift the L <= 64 guard for work");
    }
    {
        auto& s = make("sweep-l", "Moments as a function of the cutoff L");
        add_model_options(s, p, false);
        s.registry.add(s.app, "cutoffs", p.cutoffs, "Strictly increasing cutoffs")->delimiter(',');
        s.registry.add(s.app, "jobs", p.jobs, "Concurrent sweep points");
    }
    {
        auto& s = make("sweep-alpha", "Scaling-fit coefficients as a function of alpha/v");
        add_model_options(s, p, false);
        s.registry.add(s.app, "speeds", p.speeds, "alpha/v values")->delimiter(',');
        s.registry.add(s.app, "cutoffs", p.cutoffs, "Strictly increasing cutoffs")->delimiter(',');
        s.registry.add(s.app, "min-cutoff", p.min_cutoff, "Smallest L used in the fits");
        s.registry.add(s.app, "jobs", p.jobs, "Concurrent speeds");
    }
    {
        auto& s = make("fit", "Fit scaling laws to a sweep-l CSV");
        s.registry.add(s.app, "input", p.input, "CSV written by sweep-l");
        s.registry.add(s.app, "target", p.target, "work, number or both")
            ->check(CLI::IsMember({"work", "number", "both"}));
        s.registry.add(s.app, "min-cutoff", p.min_cutoff, "Smallest L used in the fit");
    }
    {
        auto& s = make("oracle-check", "Compare the Gaussian pipeline with exact Fock-space evolution");
        add_model_options(s, p);
        s.registry.add(s.app, "u-grid", p.u_grid, "u values (path order)")->delimiter(',');
        s.registry.flag(s.app, "allow-large", p.allow_large, "Raise the oracle guard from L <= 5 to L <= 6");
    }

    std::vector<std::string> argv_store{"casimir"};
    argv_store.insert(argv_store.end(), args.begin(), args.end());
    std::vector<char*> argv;
    for (auto& a : argv_store) argv.push_back(a.data());

    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::Success& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        app.exit(e, out, err);
        return kExitValidation;
    }

    try {
        for (auto& [name, sub] : subs) {
            if (!sub.app->parsed()) continue;
            apply_config_file(sub, p);
            if (name == "simulate") do_simulate(sub, p, out);
            else if (name == "chi") do_chi(sub, p, out);
            else if (name == "distribution") do_distribution(sub, p, out);
            else if (name == "sweep-l") do_sweep_l(sub, p, out);
            else if (name == "sweep-alpha") do_sweep_alpha(sub, p, out);
            else if (name == "fit") do_fit(sub, p, out);
            else if (name == "oracle-check") return do_oracle_check(sub, p, out);
        }
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return e.kind() == Error::Kind::validation ? kExitValidation : kExitNumerical;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitNumerical;
    }
    return kExitOk;
}

}  // namespace casimir::cli
