#include "msbl/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <memory>
#include <numeric>
#include <thread>

#include <boost/math/distributions/students_t.hpp>

namespace msbl {

TestFunctional test_functional(const std::string& id) {
    if (id == "sin_e1") return {id, [](std::span<const double> x) { return std::sin(x[0]); }};
    auto norm2 = [](std::span<const double> x) {
        double s = 0.0;
        for (double v : x) s += v * v;
        return s;
    };
    if (id == "exp_neg_norm2") return {id, [norm2](std::span<const double> x) { return std::exp(-norm2(x)); }};
    if (id == "inv_one_plus_norm2")
        return {id, [norm2](std::span<const double> x) { return 1.0 / (1.0 + norm2(x)); }};
    if (id == "constant") return {id, [](std::span<const double>) { return 1.0; }};
    throw std::invalid_argument("unknown test functional '" + id + "'");
}

OrderFit fit_order(std::span<const double> eps, std::span<const double> errors,
                   std::span<const double> std_errs) {
    const std::size_t n = eps.size();
    if (n < 3 || errors.size() != n) throw std::invalid_argument("fit_order: need at least 3 points");
    for (std::size_t i = 0; i < n; ++i) {
        if (!(errors[i] > 0.0)) throw std::invalid_argument("fit_order: errors must be positive");
        if (!(eps[i] > 0.0)) throw std::invalid_argument("fit_order: eps must be positive");
    }
    const bool weighted = std_errs.size() == n &&
                          std::all_of(std_errs.begin(), std_errs.end(), [](double s) { return s > 0.0; });
    std::vector<double> x(n), y(n), w(n, 1.0);
    for (std::size_t i = 0; i < n; ++i) {
        x[i] = std::log(eps[i]);
        y[i] = std::log(errors[i]);
        if (weighted) {
            const double rel = std_errs[i] / errors[i];
            w[i] = 1.0 / (rel * rel);
        }
    }
    double sw = 0.0, sx = 0.0, sy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sw += w[i];
        sx += w[i] * x[i];
        sy += w[i] * y[i];
    }
    const double xm = sx / sw, ym = sy / sw;
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sxx += w[i] * (x[i] - xm) * (x[i] - xm);
        sxy += w[i] * (x[i] - xm) * (y[i] - ym);
    }
    if (!(sxx > 0.0)) throw std::invalid_argument("fit_order: eps values must not all coincide");
    OrderFit fit;
    fit.slope = sxy / sxx;
    fit.intercept = ym - fit.slope * xm;
    double rss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double r = y[i] - fit.intercept - fit.slope * x[i];
        rss += w[i] * r * r;
    }
    const double dof = static_cast<double>(n - 2);
    fit.slope_se = std::sqrt(rss / dof / sxx);
    const double tq = boost::math::quantile(boost::math::students_t(dof), 0.975);
    fit.ci_lo = fit.slope - tq * fit.slope_se;
    fit.ci_hi = fit.slope + tq * fit.slope_se;
    return fit;
}

bool ErrorReport::all_flags_clear() const {
    return !degenerate && std::none_of(flagged.begin(), flagged.end(), [](bool b) { return b; });
}

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn) {
    const std::size_t hw = std::max(1u, std::thread::hardware_concurrency());
    const std::size_t workers = std::min(hw, n);
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::atomic<bool> failed{false};
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < workers; ++t) {
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < n && !failed; i = next++) {
                try {
                    fn(i);
                } catch (...) {
                    if (!failed.exchange(true)) failure = std::current_exception();
                }
            }
        });
    }
    for (auto& th : pool) th.join();
    if (failure) std::rethrow_exception(failure);
}

namespace {

double sq_dist(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) s += (a[k] - b[k]) * (a[k] - b[k]);
    return s;
}

double sq_norm(std::span<const double> a) {
    double s = 0.0;
    for (double v : a) s += v * v;
    return s;
}

struct MeanSe {
    double mean = 0.0;
    double se = 0.0;
};

MeanSe mean_se(std::span<const double> v) {
    const auto n = static_cast<double>(v.size());
    double s = 0.0;
    for (double x : v) s += x;
    const double mean = s / n;
    double ss = 0.0;
    for (double x : v) ss += (x - mean) * (x - mean);
    return {mean, v.size() > 1 ? std::sqrt(ss / (n - 1.0) / n) : 0.0};
}

void check_grid(const std::vector<double>& eps_grid) {
    if (eps_grid.size() < 3) throw std::invalid_argument("study: need at least 3 eps values for a fit");
    for (std::size_t i = 0; i < eps_grid.size(); ++i) {
        if (!(eps_grid[i] > 0.0)) throw std::invalid_argument("study: eps values must be positive");
        if (i > 0 && !(eps_grid[i] < eps_grid[i - 1]))
            throw std::invalid_argument("study: eps grid must be strictly decreasing");
    }
}

void require_assumptions(const ModelSpec& model) {
    const ValidationReport r = validate_assumptions(model);
    if (r.overall) return;
    std::string failed;
    for (const auto& c : r.checks)
        if (!c.pass) failed += (failed.empty() ? "" : ", ") + c.name;
    throw StudyError(1, "assumption check failed: " + failed);
}

const char* drive_name(SlowDrive d) {
    return d == SlowDrive::substep_average ? "substep_average" : "midpoint";
}

StudyProtocol base_protocol(const std::string& kind, const std::string& model_id,
                            const SimParams& params, const SineField* x0, const SineField* y0) {
    StudyProtocol pr;
    pr.kind = kind;
    pr.model_id = model_id;
    pr.m = params.m;
    pr.T = params.T;
    pr.macro_dt = params.macro_dt;
    pr.kappa = params.kappa;
    pr.drive = drive_name(params.drive);
    pr.n_paths = params.n_paths;
    pr.seed = params.master_seed;
    if (x0) pr.x0.assign(x0->coeffs().begin(), x0->coeffs().end());
    if (y0) pr.y0.assign(y0->coeffs().begin(), y0->coeffs().end());
    return pr;
}

// Coupled/averaged pair at the given params, reporting every node.
void run_pair(const ModelSpec& model, const SineField& x0, const SineField& y0,
              const SimParams& params, const FbarMode& mode, std::uint32_t path,
              const PairObserver& obs) {
    CoupledStepper cs(model, params, path);
    AveragedStepper as(model, params, mode, path);
    std::vector<double> x(params.m, 0.0), y(params.m, 0.0), xb(params.m, 0.0);
    for (std::size_t k = 0; k < std::min(params.m, x0.modes()); ++k) x[k] = xb[k] = x0[k];
    for (std::size_t k = 0; k < std::min(params.m, y0.modes()); ++k) y[k] = y0[k];
    obs(0, x, xb);
    const std::size_t n = params.n_steps();
    for (std::size_t i = 0; i < n; ++i) {
        cs.step(x, y, i);
        as.step(xb, i);
        obs(i + 1, x, xb);
    }
}

// Difference trajectories D = X^eps - Xbar at macro_dt (noise refined 2x) and at macro_dt/2.
struct HalvingPair {
    SimParams coarse, fine;
};

HalvingPair halving_params(const SimParams& params, double eps) {
    HalvingPair h{params, params};
    h.coarse.eps = h.fine.eps = eps;
    const std::size_t nsub = h.coarse.n_sub();
    h.coarse.n_sub_override = nsub;
    h.coarse.noise_refine = 2;
    h.fine.macro_dt = params.macro_dt / 2.0;
    h.fine.n_sub_override = nsub;
    h.fine.noise_refine = 1;
    return h;
}

double suggest_dt(double dt, double bias, double avg) {
    if (!(bias > 0.0)) return dt;
    // first-order in macro_dt
    return dt * std::min(0.5, 0.1 * avg / bias);
}

}  // namespace

PairRunner make_pair_runner(const ModelSpec& model, const SineField& x0, const SineField& y0,
                            const SimParams& base, FbarMode mode) {
    auto shared = std::make_shared<const ModelSpec>(model);
    return [shared, x0, y0, base, mode](double eps, std::uint32_t path, const PairObserver& obs) {
        SimParams p = base;
        p.eps = eps;
        run_pair(*shared, x0, y0, p, mode, path, obs);
    };
}

BiasGuard strong_bias_guard(const ModelSpec& model, const SineField& x0, const SineField& y0,
                            const SimParams& params, double eps, std::size_t probe_paths, double p) {
    const HalvingPair h = halving_params(params, eps);
    const std::size_t n = h.coarse.n_steps();
    std::vector<double> bias_p(probe_paths), avg_p(probe_paths);
    parallel_for(probe_paths, [&](std::size_t path) {
        std::vector<double> dc((n + 1) * params.m);
        const auto pid = static_cast<std::uint32_t>(path);
        run_pair(model, x0, y0, h.coarse, FbarAnalytic{}, pid,
                 [&](std::size_t i, std::span<const double> xe, std::span<const double> xb) {
                     for (std::size_t k = 0; k < params.m; ++k) dc[i * params.m + k] = xe[k] - xb[k];
                 });
        double sup_bias = 0.0, sup_avg = 0.0;
        run_pair(model, x0, y0, h.fine, FbarAnalytic{}, pid,
                 [&](std::size_t j, std::span<const double> xe, std::span<const double> xb) {
                     double a = 0.0, b = 0.0;
                     for (std::size_t k = 0; k < params.m; ++k) {
                         const double d = xe[k] - xb[k];
                         a += d * d;
                         if (j % 2 == 0) {
                             const double e = dc[(j / 2) * params.m + k] - d;
                             b += e * e;
                         }
                     }
                     sup_avg = std::max(sup_avg, a);
                     sup_bias = std::max(sup_bias, b);
                 });
        bias_p[path] = std::pow(sup_bias, p / 2.0);
        avg_p[path] = std::pow(sup_avg, p / 2.0);
    });
    BiasGuard g;
    g.checked = true;
    g.eps = eps;
    g.probe_paths = probe_paths;
    g.dt_bias = std::pow(mean_se(bias_p).mean, 1.0 / p);
    g.averaging_error = std::pow(mean_se(avg_p).mean, 1.0 / p);
    g.passed = g.dt_bias < 0.1 * g.averaging_error || (g.dt_bias == 0.0 && g.averaging_error == 0.0);
    g.suggested_macro_dt = suggest_dt(params.macro_dt, g.dt_bias, g.averaging_error);
    return g;
}

BiasGuard weak_bias_guard(const ModelSpec& model, const SineField& x0, const SineField& y0,
                          const SimParams& params, double eps, std::size_t probe_paths,
                          const TestFunctional& phi) {
    const HalvingPair h = halving_params(params, eps);
    const std::size_t n = h.coarse.n_steps();
    // per path: coarse difference and (coarse - fine) shift at each coarse node
    std::vector<std::vector<double>> fine_diff(probe_paths), shift(probe_paths);
    parallel_for(probe_paths, [&](std::size_t path) {
        const auto pid = static_cast<std::uint32_t>(path);
        std::vector<double> coarse(n + 1);
        run_pair(model, x0, y0, h.coarse, FbarAnalytic{}, pid,
                 [&](std::size_t i, std::span<const double> xe, std::span<const double> xb) {
                     coarse[i] = phi.eval(xe) - phi.eval(xb);
                 });
        auto& fd = fine_diff[path];
        auto& sh = shift[path];
        fd.resize(n + 1);
        sh.resize(n + 1);
        run_pair(model, x0, y0, h.fine, FbarAnalytic{}, pid,
                 [&](std::size_t j, std::span<const double> xe, std::span<const double> xb) {
                     if (j % 2 != 0) return;
                     const double d = phi.eval(xe) - phi.eval(xb);
                     fd[j / 2] = d;
                     sh[j / 2] = coarse[j / 2] - d;
                 });
    });
    BiasGuard g;
    g.checked = true;
    g.eps = eps;
    g.probe_paths = probe_paths;
    std::vector<double> col(probe_paths);
    for (std::size_t i = 1; i <= n; ++i) {
        for (std::size_t p = 0; p < probe_paths; ++p) col[p] = fine_diff[p][i];
        g.averaging_error = std::max(g.averaging_error, std::abs(mean_se(col).mean));
        for (std::size_t p = 0; p < probe_paths; ++p) col[p] = shift[p][i];
        g.dt_bias = std::max(g.dt_bias, std::abs(mean_se(col).mean));
    }
    g.passed = g.dt_bias < 0.1 * g.averaging_error || (g.dt_bias == 0.0 && g.averaging_error == 0.0);
    g.suggested_macro_dt = suggest_dt(params.macro_dt, g.dt_bias, g.averaging_error);
    return g;
}

ErrorReport strong_error_study(const PairRunner& runner, std::vector<double> eps_grid,
                               const SimParams& params, double p) {
    check_grid(eps_grid);
    if (!(p >= 2.0)) throw std::invalid_argument("strong study: moment p must be >= 2");
    if (params.n_paths < 2) throw std::invalid_argument("strong study: need at least 2 paths");
    ErrorReport r;
    r.eps_grid = eps_grid;
    std::vector<double> sup_p(params.n_paths);
    for (double eps : eps_grid) {
        parallel_for(params.n_paths, [&](std::size_t path) {
            double sup = 0.0;
            runner(eps, static_cast<std::uint32_t>(path),
                   [&](std::size_t, std::span<const double> xe, std::span<const double> xb) {
                       sup = std::max(sup, sq_dist(xe, xb));
                   });
            sup_p[path] = std::pow(sup, p / 2.0);
        });
        const MeanSe ms = mean_se(sup_p);
        const double err = std::pow(ms.mean, 1.0 / p);
        r.errors.push_back(err);
        // delta method for M -> M^{1/p}
        r.std_errs.push_back(ms.mean > 0.0 ? ms.se * err / (p * ms.mean) : 0.0);
        r.flagged.push_back(false);
    }
    r.fit = fit_order(r.eps_grid, r.errors, r.std_errs);
    r.protocol.kind = "strong";
    r.protocol.p = p;
    r.protocol.n_paths = params.n_paths;
    r.protocol.sup_surrogate = "max over macro-grid nodes";
    return r;
}

ErrorReport strong_error_study(const ModelSpec& model, const SineField& x0, const SineField& y0,
                               std::vector<double> eps_grid, const SimParams& params,
                               const StrongStudyOptions& opts) {
    check_grid(eps_grid);
    params.validate();
    if (opts.check_assumptions) require_assumptions(model);
    BiasGuard guard;
    if (opts.bias_guard) {
        guard = strong_bias_guard(model, x0, y0, params, eps_grid.back(), opts.probe_paths, opts.p);
        if (!guard.passed)
            throw StudyError(3, "bias guard failed: dt-bias " + std::to_string(guard.dt_bias) +
                                    " >= 10% of averaging error " + std::to_string(guard.averaging_error) +
                                    "; try macro_dt <= " + std::to_string(guard.suggested_macro_dt));
    }
    ErrorReport r = strong_error_study(make_pair_runner(model, x0, y0, params), std::move(eps_grid),
                                       params, opts.p);
    const double p = r.protocol.p;
    r.protocol = base_protocol("strong", model.id, params, &x0, &y0);
    r.protocol.p = p;
    r.protocol.sup_surrogate = "max over macro-grid nodes";
    r.guard = guard;
    return r;
}

ErrorReport weak_error_study(const PairRunner& runner, const TestFunctional& phi,
                             std::vector<double> eps_grid, const SimParams& params,
                             WeakEvaluation evaluation) {
    check_grid(eps_grid);
    if (params.n_paths < 2) throw std::invalid_argument("weak study: need at least 2 paths");
    const std::size_t n = params.n_steps();
    ErrorReport r;
    r.eps_grid = eps_grid;
    std::vector<std::vector<double>> diff(params.n_paths);
    std::vector<double> col(params.n_paths);
    for (double eps : eps_grid) {
        parallel_for(params.n_paths, [&](std::size_t path) {
            auto& d = diff[path];
            d.assign(n + 1, 0.0);
            runner(eps, static_cast<std::uint32_t>(path),
                   [&](std::size_t i, std::span<const double> xe, std::span<const double> xb) {
                       if (i <= n) d[i] = phi.eval(xe) - phi.eval(xb);
                   });
        });
        MeanSe best{0.0, 0.0};
        std::size_t best_i = n;
        const std::size_t first = evaluation == WeakEvaluation::terminal ? n : 1;
        for (std::size_t i = first; i <= n; ++i) {
            for (std::size_t p = 0; p < params.n_paths; ++p) col[p] = diff[p][i];
            const MeanSe ms = mean_se(col);
            if (i == first || std::abs(ms.mean) > std::abs(best.mean)) {
                best = ms;
                best_i = i;
            }
        }
        r.errors.push_back(std::abs(best.mean));
        r.std_errs.push_back(best.se);
        r.t_star.push_back(static_cast<double>(best_i) * params.macro_dt);
        r.flagged.push_back(std::abs(best.mean) < 3.0 * best.se || best.mean == 0.0);
    }
    r.degenerate = std::all_of(r.errors.begin(), r.errors.end(), [](double e) { return e == 0.0; });
    if (!r.degenerate && std::all_of(r.errors.begin(), r.errors.end(), [](double e) { return e > 0.0; })) {
        r.fit = fit_order(r.eps_grid, r.errors, r.std_errs);
    } else {
        const double nan = std::numeric_limits<double>::quiet_NaN();
        r.fit = {nan, nan, nan, nan, nan};
    }
    r.protocol.kind = "weak";
    r.protocol.phi_id = phi.id;
    r.protocol.n_paths = params.n_paths;
    r.protocol.evaluation = evaluation == WeakEvaluation::terminal ? "terminal" : "sup_grid";
    return r;
}

ErrorReport weak_error_study(const ModelSpec& model, const SineField& x0, const SineField& y0,
                             const TestFunctional& phi, std::vector<double> eps_grid,
                             const SimParams& params, const WeakStudyOptions& opts) {
    check_grid(eps_grid);
    params.validate();
    if (opts.check_assumptions) require_assumptions(model);
    BiasGuard guard;
    if (opts.bias_guard) {
        guard = weak_bias_guard(model, x0, y0, params, eps_grid.back(), opts.probe_paths, phi);
        if (!guard.passed)
            throw StudyError(3, "bias guard failed: dt-bias " + std::to_string(guard.dt_bias) +
                                    " >= 10% of averaging error " + std::to_string(guard.averaging_error) +
                                    "; try macro_dt <= " + std::to_string(guard.suggested_macro_dt));
    }
    ErrorReport r = weak_error_study(make_pair_runner(model, x0, y0, params), phi, std::move(eps_grid),
                                     params, opts.evaluation);
    const StudyProtocol partial = r.protocol;
    r.protocol = base_protocol("weak", model.id, params, &x0, &y0);
    r.protocol.phi_id = partial.phi_id;
    r.protocol.evaluation = partial.evaluation;
    r.protocol.sup_surrogate = "max over macro-grid nodes of |mean difference|";
    r.guard = guard;
    return r;
}

MomentReport moment_check(const ModelSpec& model, const SineField& x0, const SineField& y0,
                          std::vector<double> eps_grid, const SimParams& params, double p,
                          double ratio_max) {
    if (eps_grid.empty()) throw std::invalid_argument("moment_check: empty eps grid");
    params.validate();
    const std::size_t n = params.n_steps();
    MomentReport r;
    r.eps_grid = eps_grid;
    r.p = p;
    r.ratio_max = ratio_max;
    r.protocol = base_protocol("moments", model.id, params, &x0, &y0);
    r.protocol.p = p;
    std::vector<double> sup_x(params.n_paths);
    std::vector<std::vector<double>> y_p(params.n_paths);
    for (double eps : eps_grid) {
        SimParams sp = params;
        sp.eps = eps;
        parallel_for(params.n_paths, [&](std::size_t path) {
            CoupledStepper cs(model, sp, static_cast<std::uint32_t>(path));
            std::vector<double> x(sp.m, 0.0), y(sp.m, 0.0);
            for (std::size_t k = 0; k < std::min(sp.m, x0.modes()); ++k) x[k] = x0[k];
            for (std::size_t k = 0; k < std::min(sp.m, y0.modes()); ++k) y[k] = y0[k];
            auto& yp = y_p[path];
            yp.assign(n + 1, 0.0);
            double sx = sq_norm(x);
            yp[0] = std::pow(sq_norm(y), p / 2.0);
            for (std::size_t i = 0; i < n; ++i) {
                cs.step(x, y, i);
                sx = std::max(sx, sq_norm(x));
                yp[i + 1] = std::pow(sq_norm(y), p / 2.0);
            }
            sup_x[path] = std::pow(sx, p / 2.0);
        });
        const MeanSe ms = mean_se(sup_x);
        r.slow_sup_moment.push_back(ms.mean);
        r.slow_std_err.push_back(ms.se);
        double best = 0.0;
        for (std::size_t i = 0; i <= n; ++i) {
            double s = 0.0;
            for (std::size_t path = 0; path < params.n_paths; ++path) s += y_p[path][i];
            best = std::max(best, s / static_cast<double>(params.n_paths));
        }
        r.fast_moment.push_back(best);
    }
    auto ratio = [](const std::vector<double>& v) {
        const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
        return *lo > 0.0 ? *hi / *lo : (*hi == 0.0 ? 1.0 : std::numeric_limits<double>::infinity());
    };
    r.slow_ratio = ratio(r.slow_sup_moment);
    r.fast_ratio = ratio(r.fast_moment);
    r.passed = r.slow_ratio < ratio_max && r.fast_ratio < ratio_max;
    return r;
}

GalerkinReport galerkin_refinement_check(const ModelSpec& model, const SineField& x0,
                                         const SineField& y0, double eps, const SimParams& params,
                                         std::vector<std::size_t> m_list, std::size_t m_ref) {
    if (m_list.empty()) throw std::invalid_argument("galerkin check: empty m_list");
    for (std::size_t i = 1; i < m_list.size(); ++i)
        if (m_list[i] <= m_list[i - 1]) throw std::invalid_argument("galerkin check: m_list must increase");
    if (m_ref == 0) m_ref = 2 * m_list.back();
    if (m_ref <= m_list.back()) throw std::invalid_argument("galerkin check: m_ref must exceed max(m_list)");

    SimParams base = params;
    base.eps = eps;
    base.validate();
    const std::size_t n = base.n_steps();
    const std::size_t nm = m_list.size();
    GalerkinReport r;
    r.eps = eps;
    r.m_list = m_list;
    r.m_ref = m_ref;
    r.protocol = base_protocol("galerkin", model.id, base, &x0, &y0);
    r.protocol.m = m_ref;

    std::vector<std::vector<double>> sup2(nm, std::vector<double>(params.n_paths));
    parallel_for(params.n_paths, [&](std::size_t path) {
        const auto pid = static_cast<std::uint32_t>(path);
        auto init = [&](std::size_t m, std::vector<double>& x, std::vector<double>& y) {
            x.assign(m, 0.0);
            y.assign(m, 0.0);
            for (std::size_t k = 0; k < std::min(m, x0.modes()); ++k) x[k] = x0[k];
            for (std::size_t k = 0; k < std::min(m, y0.modes()); ++k) y[k] = y0[k];
        };
        SimParams pr = base;
        pr.m = m_ref;
        CoupledStepper ref(model, pr, pid);
        std::vector<double> xr, yr;
        init(m_ref, xr, yr);
        std::vector<CoupledStepper> st;
        std::vector<std::vector<double>> xs(nm), ys(nm);
        st.reserve(nm);
        for (std::size_t j = 0; j < nm; ++j) {
            SimParams pj = base;
            pj.m = m_list[j];
            st.emplace_back(model, pj, pid);
            init(m_list[j], xs[j], ys[j]);
        }
        std::vector<double> sup(nm, 0.0);
        auto measure = [&] {
            for (std::size_t j = 0; j < nm; ++j) {
                double d = 0.0;
                for (std::size_t k = 0; k < m_ref; ++k) {
                    const double a = k < m_list[j] ? xs[j][k] : 0.0;
                    d += (a - xr[k]) * (a - xr[k]);
                }
                sup[j] = std::max(sup[j], d);
            }
        };
        measure();
        for (std::size_t i = 0; i < n; ++i) {
            ref.step(xr, yr, i);
            for (std::size_t j = 0; j < nm; ++j) st[j].step(xs[j], ys[j], i);
            measure();
        }
        for (std::size_t j = 0; j < nm; ++j) sup2[j][path] = sup[j];
    });
    for (std::size_t j = 0; j < nm; ++j) {
        const MeanSe ms = mean_se(sup2[j]);
        const double err = std::sqrt(ms.mean);
        r.errors.push_back(err);
        r.std_errs.push_back(ms.mean > 0.0 ? ms.se * err / (2.0 * ms.mean) : 0.0);
    }
    r.decreasing = true;
    for (std::size_t j = 1; j < nm; ++j)
        if (!(r.errors[j] < r.errors[j - 1])) r.decreasing = false;
    return r;
}

}  // namespace msbl
