#include "msbl/cli.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <sstream>

#include <CLI11.hpp>

#include "msbl/config.hpp"
#include "msbl/experiments.hpp"
#include "msbl/frozen.hpp"
#include "msbl/report_io.hpp"
#include "msbl/simd.hpp"

namespace msbl {

using nlohmann::json;

namespace {

constexpr const char* kVersion = "1.0.0";

struct Flags {
    std::string config;
    std::string out_dir;
    bool json_out = false;
    std::vector<std::string> sets;
    std::optional<std::size_t> paths;
    std::optional<std::uint64_t> seed;
    std::string x_file;
};

FbarMode averaged_mode(const ModelSpec& model) {
    if (model.is_linear_gaussian()) return FbarAnalytic{};
    return FbarOnline{default_burn_in(model), 20.0, 1e-3};
}

std::filesystem::path open_run_dir(const RunConfig& cfg, const Flags& f) {
    const std::string dir = f.out_dir.empty() ? cfg.text("output.dir") : f.out_dir;
    return make_run_dir(dir, cfg.hash());
}

json manifest(const RunConfig& cfg, const std::string& command) {
    return {{"command", command},
            {"version", kVersion},
            {"simd", simd::active().name},
            {"config_hash", cfg.hash()},
            {"config", cfg.doc()}};
}

std::string fixed(double v, int prec = 4) {
    if (!std::isfinite(v)) return "nan";
    std::ostringstream os;
    os << std::fixed << std::setprecision(prec) << v;
    return os.str();
}

void write_study(const std::filesystem::path& dir, const RunConfig& cfg, const std::string& command,
                 const json& report, const std::string& csv, const std::string& plot) {
    write_text(dir / "manifest.json", manifest(cfg, command).dump(2) + "\n");
    write_text(dir / "report.json", report.dump(2) + "\n");
    write_text(dir / "report.csv", csv);
    if (!plot.empty()) write_text(dir / "plot.csv", plot);
}

int cmd_validate(const RunConfig& cfg, const Flags& f, std::ostream& out) {
    const ModelSpec model = cfg.model();
    const ValidationReport r = validate_assumptions(model, model.q1, model.q2);
    if (f.json_out) {
        out << to_json(r).dump(2) << "\n";
    } else {
        for (const auto& c : r.checks)
            out << (c.pass ? "ok   " : "FAIL ") << c.name << " measured=" << format_double(c.measured)
                << " threshold=" << format_double(c.threshold) << "\n";
        out << (r.overall ? "all checks passed" : "assumption check failed") << "\n";
    }
    return r.overall ? exit_ok : exit_failure;
}

int cmd_simulate(const RunConfig& cfg, const Flags& f, std::ostream& out) {
    const ModelSpec model = cfg.model();
    const SimParams p = cfg.sim();
    const SineField x0 = cfg.x0(p.m), y0 = cfg.y0(p.m);
    const FbarMode mode = averaged_mode(model);
    const auto dir = open_run_dir(cfg, f);
    write_text(dir / "manifest.json", manifest(cfg, "simulate").dump(2) + "\n");
    for (std::size_t path = 0; path < p.n_paths; ++path) {
        const auto id = static_cast<std::uint32_t>(path);
        const auto [slow, fast] = simulate_coupled(x0, y0, model, p, id);
        const Trajectory avg = simulate_averaged(x0, model, p, mode, id);
        const std::string suffix = "_" + std::to_string(path) + ".csv";
        write_text(dir / ("slow_eps" + suffix), trajectory_csv(slow));
        write_text(dir / ("fast_eps" + suffix), trajectory_csv(fast));
        write_text(dir / ("averaged" + suffix), trajectory_csv(avg));
    }
    out << "wrote " << p.n_paths << " path(s) to " << dir.string() << "\n";
    return exit_ok;
}

int cmd_fbar(const RunConfig& cfg, const Flags& f, std::ostream& out) {
    const ModelSpec model = cfg.model();
    std::vector<double> xv;
    if (!f.x_file.empty()) {
        std::ifstream is(f.x_file, std::ios::binary);
        if (!is) throw ConfigError("fbar: cannot open '" + f.x_file + "'");
        std::stringstream ss;
        ss << is.rdbuf();
        xv = parse_coefficient_csv(ss.str());
    } else {
        xv = cfg.numbers("fbar.x");
    }
    const std::size_t m = std::max(cfg.count("fbar.m"), xv.size());
    xv.resize(m, 0.0);
    const SineField x(xv);
    const double window = cfg.number("fbar.window");
    const bool analytic = model.is_linear_gaussian();
    if (!analytic && !(window > 0.0)) {
        throw StudyError(exit_failure, "fbar: model '" + model.id +
                                           "' has no analytic averaged drift and fbar.window is not positive");
    }
    std::optional<FbarEstimate> est;
    if (window > 0.0) {
        const double burn = cfg.number("fbar.burn_in") > 0.0 ? cfg.number("fbar.burn_in") : default_burn_in(model);
        const NoiseStream s{cfg.sim().master_seed, static_cast<std::uint32_t>(cfg.count("fbar.path_id")),
                            Channel::W2, 0};
        est = estimate_fbar_ergodic(model, x, burn, window, cfg.number("fbar.micro_dt"), s);
    }
    std::optional<SineField> exact;
    if (analytic) exact = fbar_analytic(model, x);
    out << "mode,ergodic,std_err,analytic\n";
    for (std::size_t k = 0; k < m; ++k) {
        out << (k + 1) << ',';
        if (est) out << format_double(est->value[k]) << ',' << format_double(est->std_err[k]);
        else out << ',';
        out << ',';
        if (exact) out << format_double((*exact)[k]);
        out << '\n';
    }
    return exit_ok;
}

bool in_band(double v, const std::vector<double>& band) {
    if (band.size() != 2) throw ConfigError("config: band must be [lo, hi]");
    return std::isfinite(v) && v >= band[0] && v <= band[1];
}

void print_order(const ErrorReport& r, std::ostream& out) {
    out << "fitted_order " << fixed(r.fit.slope) << " CI95 [" << fixed(r.fit.ci_lo) << ", "
        << fixed(r.fit.ci_hi) << "]\n";
}

int cmd_study_strong(const RunConfig& cfg, const Flags& f, std::ostream& out) {
    const ModelSpec model = cfg.model();
    const SimParams p = cfg.sim_for("strong");
    StrongStudyOptions opts;
    opts.p = cfg.number("strong.p");
    opts.bias_guard = cfg.flag("strong.bias_guard");
    opts.probe_paths = cfg.count("strong.probe_paths");
    const std::vector<double> band = cfg.numbers("strong.band");
    const ErrorReport r = strong_error_study(model, cfg.x0(p.m), cfg.y0(p.m), cfg.eps_grid("strong"), p, opts);
    const auto dir = open_run_dir(cfg, f);
    write_study(dir, cfg, "study-strong", to_json(r), error_csv(r), plot_csv(r));
    print_order(r, out);
    out << "run directory " << dir.string() << "\n";
    if (f.json_out) out << to_json(r).dump(2) << "\n";
    return in_band(r.fit.slope, band) ? exit_ok : exit_failure;
}

int cmd_study_weak(const RunConfig& cfg, const Flags& f, std::ostream& out, std::ostream& err) {
    const ModelSpec model = cfg.model();
    const SimParams p = cfg.sim_for("weak");
    WeakStudyOptions opts;
    const std::string ev = cfg.text("weak.evaluation");
    if (ev == "sup_grid") opts.evaluation = WeakEvaluation::sup_grid;
    else if (ev == "terminal") opts.evaluation = WeakEvaluation::terminal;
    else throw ConfigError("config: 'weak.evaluation' must be sup_grid or terminal");
    opts.bias_guard = cfg.flag("weak.bias_guard");
    opts.probe_paths = cfg.count("weak.probe_paths");
    const std::vector<double> band = cfg.numbers("weak.band");
    TestFunctional phi;
    try {
        phi = test_functional(cfg.text("weak.phi"));
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("config: weak.phi: ") + e.what());
    }
    const ErrorReport r = weak_error_study(model, cfg.x0(p.m), cfg.y0(p.m), phi, cfg.eps_grid("weak"), p, opts);
    const auto dir = open_run_dir(cfg, f);
    write_study(dir, cfg, "study-weak", to_json(r), error_csv(r), r.degenerate ? std::string() : plot_csv(r));
    out << "run directory " << dir.string() << "\n";
    if (f.json_out) out << to_json(r).dump(2) << "\n";
    if (r.degenerate) {
        err << "degenerate functional: '" << phi.id << "' shows no difference at any eps\n";
        return exit_degenerate;
    }
    print_order(r, out);
    if (!r.all_flags_clear()) {
        err << "degenerate study: some errors are within 3 standard errors of zero\n";
        return exit_degenerate;
    }
    return in_band(r.fit.slope, band) ? exit_ok : exit_failure;
}

int cmd_study_moments(const RunConfig& cfg, const Flags& f, std::ostream& out) {
    const ModelSpec model = cfg.model();
    const SimParams p = cfg.sim_for("moments");
    const MomentReport r = moment_check(model, cfg.x0(p.m), cfg.y0(p.m), cfg.eps_grid("moments"), p,
                                        cfg.number("moments.p"), cfg.number("moments.ratio_max"));
    std::string csv = "eps,slow_sup_moment,slow_std_err,fast_moment\n";
    for (std::size_t i = 0; i < r.eps_grid.size(); ++i)
        csv += format_double(r.eps_grid[i]) + ',' + format_double(r.slow_sup_moment[i]) + ',' +
               format_double(r.slow_std_err[i]) + ',' + format_double(r.fast_moment[i]) + '\n';
    const auto dir = open_run_dir(cfg, f);
    write_study(dir, cfg, "study-moments", to_json(r), csv, "");
    out << "slow_ratio " << fixed(r.slow_ratio) << " fast_ratio " << fixed(r.fast_ratio) << " limit "
        << fixed(r.ratio_max) << "\n";
    out << "run directory " << dir.string() << "\n";
    if (f.json_out) out << to_json(r).dump(2) << "\n";
    return r.passed ? exit_ok : exit_failure;
}

int cmd_study_galerkin(const RunConfig& cfg, const Flags& f, std::ostream& out) {
    const ModelSpec model = cfg.model();
    const SimParams p = cfg.sim_for("galerkin");
    std::vector<std::size_t> m_list;
    for (double v : cfg.numbers("galerkin.m_list")) {
        if (!(v >= 1.0) || v != std::floor(v)) throw ConfigError("config: galerkin.m_list must hold positive integers");
        m_list.push_back(static_cast<std::size_t>(v));
    }
    const std::size_t m_ref = cfg.count("galerkin.m_ref");
    const std::size_t m_in = std::max(m_ref, m_list.empty() ? 1 : m_list.back());
    const GalerkinReport r = galerkin_refinement_check(model, cfg.x0(m_in), cfg.y0(m_in), cfg.number("galerkin.eps"),
                                                       p, m_list, m_ref);
    std::string csv = "m,error,std_err\n";
    for (std::size_t i = 0; i < r.m_list.size(); ++i)
        csv += std::to_string(r.m_list[i]) + ',' + format_double(r.errors[i]) + ',' + format_double(r.std_errs[i]) + '\n';
    const auto dir = open_run_dir(cfg, f);
    write_study(dir, cfg, "study-galerkin", to_json(r), csv, "");
    for (std::size_t i = 0; i < r.m_list.size(); ++i)
        out << "m=" << r.m_list[i] << " error " << format_double(r.errors[i]) << "\n";
    out << (r.decreasing ? "strictly decreasing" : "not strictly decreasing") << "\n";
    out << "run directory " << dir.string() << "\n";
    if (f.json_out) out << to_json(r).dump(2) << "\n";
    return r.decreasing ? exit_ok : exit_failure;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Slow-fast stochastic Burgers averaging lab"};
    app.require_subcommand(1);
    app.set_version_flag("--version", kVersion);
    Flags f;
    auto common = [&f](CLI::App* sub, bool with_paths) {
        sub->add_option("--config", f.config, "JSON config file")->check(CLI::ExistingFile);
        sub->add_option("--out", f.out_dir, "output root directory");
        sub->add_flag("--json", f.json_out, "machine-readable output");
        sub->add_option("--set", f.sets, "override a config value, KEY=VALUE (repeatable)");
        sub->add_option("--seed", f.seed, "master seed");
        if (with_paths) sub->add_option("--paths", f.paths, "number of Monte-Carlo paths")->check(CLI::PositiveNumber);
    };
    struct Sub {
        const char* name;
        const char* help;
        const char* section;  // receives --paths
    };
    const Sub subs[] = {
        {"validate", "check the model against the standing assumptions", nullptr},
        {"simulate", "write coupled and averaged trajectories", "sim"},
        {"fbar", "tabulate the averaged drift at one slow state", nullptr},
        {"study-strong", "strong error study over an eps grid", "strong"},
        {"study-weak", "weak error study over an eps grid", "weak"},
        {"study-moments", "uniform-in-eps moment check", "moments"},
        {"study-galerkin", "Galerkin refinement check", "galerkin"},
    };
    std::vector<CLI::App*> apps;
    for (const Sub& s : subs) {
        CLI::App* sub = app.add_subcommand(s.name, s.help);
        common(sub, s.section != nullptr);
        if (std::string(s.name) == "fbar") sub->add_option("--x", f.x_file, "coefficient CSV for the slow state");
        apps.push_back(sub);
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? exit_ok : exit_config;
    }

    std::size_t which = 0;
    while (which < apps.size() && !apps[which]->parsed()) ++which;
    const Sub& sub = subs[which];

    try {
        ConfigSources src;
        if (!f.config.empty()) src.file = f.config;
        src.sets = f.sets;
        if (f.paths && sub.section) src.sets.push_back(std::string(sub.section) + ".n_paths=" + std::to_string(*f.paths));
        if (const char* env = std::getenv("MSBL_SEED")) src.env_seed = std::string(env);
        src.seed = f.seed;
        const RunConfig cfg = RunConfig::load(src);

        const std::string name = sub.name;
        if (name == "validate") return cmd_validate(cfg, f, out);
        if (name == "simulate") return cmd_simulate(cfg, f, out);
        if (name == "fbar") return cmd_fbar(cfg, f, out);
        if (name == "study-strong") return cmd_study_strong(cfg, f, out);
        if (name == "study-weak") return cmd_study_weak(cfg, f, out, err);
        if (name == "study-moments") return cmd_study_moments(cfg, f, out);
        return cmd_study_galerkin(cfg, f, out);
    } catch (const StudyError& e) {
        err << "error: " << e.what() << "\n";
        return e.exit_code();
    } catch (const ConfigError& e) {
        err << "error: " << e.what() << "\n";
        return exit_config;
    } catch (const std::invalid_argument& e) {
        err << "error: invalid parameter: " << e.what() << "\n";
        return exit_config;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return exit_failure;
    }
}

}  // namespace msbl
