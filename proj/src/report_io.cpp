#include "msbl/report_io.hpp"

#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace msbl {

using nlohmann::json;

namespace {
json coeffs(const SineField& f) { return json(std::vector<double>(f.coeffs().begin(), f.coeffs().end())); }

// NaN and infinities become null.
json num(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }
}  // namespace

std::string format_double(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

json to_json(const ValidationReport& r) {
    json checks = json::array();
    for (const auto& c : r.checks)
        checks.push_back({{"name", c.name}, {"pass", c.pass}, {"measured", num(c.measured)},
                          {"threshold", num(c.threshold)}});
    return {{"checks", checks}, {"overall", r.overall}};
}

json to_json(const FbarEstimate& e) {
    return {{"x", coeffs(e.x)},        {"value", coeffs(e.value)}, {"std_err", e.std_err},
            {"burn_in", e.burn_in},    {"window", e.window},       {"micro_dt", e.micro_dt},
            {"batches", e.batches}};
}

json to_json(const SimParams& p) {
    return {{"eps", p.eps},
            {"T", p.T},
            {"macro_dt", p.macro_dt},
            {"kappa", p.kappa},
            {"m", p.m},
            {"n_paths", p.n_paths},
            {"master_seed", p.master_seed},
            {"drive", p.drive == SlowDrive::substep_average ? "substep_average" : "midpoint"},
            {"n_sub", p.n_sub()}};
}

json to_json(const StudyProtocol& p) {
    return {{"kind", p.kind},       {"model_id", p.model_id},   {"m", p.m},
            {"T", p.T},             {"macro_dt", p.macro_dt},   {"kappa", p.kappa},
            {"drive", p.drive},     {"n_paths", p.n_paths},     {"seed", p.seed},
            {"p", p.p},             {"phi_id", p.phi_id},       {"evaluation", p.evaluation},
            {"sup_surrogate", p.sup_surrogate}, {"x0", p.x0}, {"y0", p.y0}};
}

json to_json(const BiasGuard& g) {
    return {{"checked", g.checked},
            {"passed", g.passed},
            {"eps", g.eps},
            {"dt_bias", num(g.dt_bias)},
            {"averaging_error", num(g.averaging_error)},
            {"suggested_macro_dt", num(g.suggested_macro_dt)},
            {"probe_paths", g.probe_paths}};
}

json to_json(const ErrorReport& r) {
    json flagged = json::array();
    for (bool b : r.flagged) flagged.push_back(b);
    return {{"eps_grid", r.eps_grid},
            {"errors", r.errors},
            {"std_errs", r.std_errs},
            {"t_star", r.t_star},
            {"flagged", flagged},
            {"degenerate", r.degenerate},
            {"fitted_order", num(r.fit.slope)},
            {"intercept", num(r.fit.intercept)},
            {"order_se", num(r.fit.slope_se)},
            {"order_ci", {num(r.fit.ci_lo), num(r.fit.ci_hi)}},
            {"protocol", to_json(r.protocol)},
            {"bias_guard", to_json(r.guard)}};
}

json to_json(const MomentReport& r) {
    return {{"eps_grid", r.eps_grid},
            {"p", r.p},
            {"slow_sup_moment", r.slow_sup_moment},
            {"slow_std_err", r.slow_std_err},
            {"fast_moment", r.fast_moment},
            {"slow_ratio", num(r.slow_ratio)},
            {"fast_ratio", num(r.fast_ratio)},
            {"ratio_max", r.ratio_max},
            {"passed", r.passed},
            {"protocol", to_json(r.protocol)}};
}

json to_json(const GalerkinReport& r) {
    return {{"eps", r.eps},
            {"m_list", r.m_list},
            {"m_ref", r.m_ref},
            {"errors", r.errors},
            {"std_errs", r.std_errs},
            {"decreasing", r.decreasing},
            {"protocol", to_json(r.protocol)}};
}

std::string error_csv(const ErrorReport& r) {
    std::string s = "eps,error,std_err\n";
    for (std::size_t i = 0; i < r.eps_grid.size(); ++i)
        s += format_double(r.eps_grid[i]) + "," + format_double(r.errors[i]) + "," +
             format_double(r.std_errs[i]) + "\n";
    return s;
}

std::string plot_csv(const ErrorReport& r) {
    std::string s = "log10_eps,log10_error,fit_line\n";
    const double ln10 = std::log(10.0);
    for (std::size_t i = 0; i < r.eps_grid.size(); ++i) {
        const double le = std::log10(r.eps_grid[i]);
        const double fit = (r.fit.intercept + r.fit.slope * le * ln10) / ln10;
        s += format_double(le) + "," + format_double(std::log10(r.errors[i])) + "," +
             format_double(fit) + "\n";
    }
    return s;
}

std::string trajectory_kind_name(TrajectoryKind k) {
    switch (k) {
        case TrajectoryKind::slow_eps: return "slow_eps";
        case TrajectoryKind::fast_eps: return "fast_eps";
        case TrajectoryKind::averaged: return "averaged";
    }
    return "unknown";
}

std::string trajectory_csv(const Trajectory& tr) {
    std::ostringstream os;
    const std::size_t m = tr.states.empty() ? 0 : tr.states.front().modes();
    os << "t";
    for (std::size_t k = 1; k <= m; ++k) os << ",mode_" << k;
    os << "\n";
    for (std::size_t i = 0; i < tr.times.size(); ++i) {
        os << format_double(tr.times[i]);
        for (double v : tr.states[i].coeffs()) os << "," << format_double(v);
        os << "\n";
    }
    return os.str();
}

std::string content_hash(std::string_view bytes) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::filesystem::path make_run_dir(const std::filesystem::path& out, const std::string& hash) {
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm utc{};
    gmtime_r(&now, &utc);
    char stamp[32];
    std::strftime(stamp, sizeof stamp, "%Y%m%dT%H%M%SZ", &utc);
    const std::string base = std::string(stamp) + "_" + hash.substr(0, 8);
    std::filesystem::create_directories(out);
    std::filesystem::path dir = out / base;
    for (int i = 1; std::filesystem::exists(dir); ++i) dir = out / (base + "-" + std::to_string(i));
    std::filesystem::create_directories(dir);
    return dir;
}

void write_text(const std::filesystem::path& file, std::string_view text) {
    std::ofstream os(file, std::ios::binary);
    if (!os) throw std::runtime_error("cannot write " + file.string());
    os << text;
}

}  // namespace msbl
