#include <doctest.h>

#include <atomic>
#include <cmath>
#include <random>

#include "msbl/experiments.hpp"

using namespace msbl;

namespace {

SimParams short_params(std::size_t paths) {
    SimParams p;
    p.T = 0.02;
    p.m = 8;
    p.n_paths = paths;
    return p;
}

// difference sqrt(eps) * z_path * t at node t, z_path deterministic per path
PairRunner synthetic_runner(double power, bool noisy) {
    return [power, noisy](double eps, std::uint32_t path, const PairObserver& obs) {
        std::mt19937_64 rng(path);
        std::normal_distribution<double> nd;
        const double z = noisy ? 1.0 + 0.3 * nd(rng) : 1.0;
        std::vector<double> xe(2), xb(2, 0.0);
        for (std::size_t i = 0; i <= 20; ++i) {
            xe[0] = std::pow(eps, power) * z * static_cast<double>(i) / 20.0;
            obs(i, xe, xb);
        }
    };
}

}  // namespace

TEST_CASE("test functionals") {
    const std::vector<double> x{0.5, 2.0};
    CHECK(test_functional("sin_e1").eval(x) == doctest::Approx(std::sin(0.5)));
    CHECK(test_functional("exp_neg_norm2").eval(x) == doctest::Approx(std::exp(-4.25)));
    CHECK(test_functional("inv_one_plus_norm2").eval(x) == doctest::Approx(1.0 / 5.25));
    CHECK(test_functional("constant").eval(x) == 1.0);
    CHECK_THROWS_AS(test_functional("cos_e7"), std::invalid_argument);
}

TEST_CASE("order fit on an exact power law") {
    const std::vector<double> eps{0.1, 0.05, 0.025, 0.0125};
    std::vector<double> err, se(4, 0.0);
    for (double e : eps) err.push_back(3.0 * std::pow(e, 0.75));
    const OrderFit f = fit_order(eps, err, se);
    CHECK(f.slope == doctest::Approx(0.75).epsilon(1e-12));
    CHECK(f.intercept == doctest::Approx(std::log(3.0)).epsilon(1e-12));
    CHECK(f.ci_hi - f.ci_lo < 1e-9);

    CHECK_THROWS_AS(fit_order(std::vector<double>{0.1, 0.05}, std::vector<double>{1, 2}, se), std::invalid_argument);
    CHECK_THROWS_AS(fit_order(eps, std::vector<double>{1, 0, 1, 1}, se), std::invalid_argument);
}

TEST_CASE("order fit intervals cover the true slope about 95% of the time") {
    std::mt19937_64 rng(99);
    std::normal_distribution<double> nd;
    const std::vector<double> eps{0.125, 0.0625, 0.03125, 0.015625, 0.0078125, 0.00390625};
    int covered = 0;
    const int trials = 2000;
    for (int t = 0; t < trials; ++t) {
        std::vector<double> err, se;
        for (double e : eps) {
            const double s = 0.05 * std::pow(e, 0.5);
            err.push_back(std::pow(e, 0.5) * std::exp(0.05 * nd(rng)));
            se.push_back(s);
        }
        const OrderFit f = fit_order(eps, err, se);
        if (f.ci_lo <= 0.5 && 0.5 <= f.ci_hi) ++covered;
    }
    const double rate = static_cast<double>(covered) / trials;
    CHECK(rate > 0.93);
    CHECK(rate < 0.97);
}

TEST_CASE("strong study on an injected runner") {
    const SimParams p = short_params(50);
    const ErrorReport r = strong_error_study(synthetic_runner(0.5, true), {0.1, 0.05, 0.025, 0.0125}, p, 2.0);
    CHECK(r.fit.slope == doctest::Approx(0.5).epsilon(1e-9));
    CHECK(r.errors.size() == 4);
    CHECK(r.all_flags_clear());
    CHECK(r.protocol.kind == "strong");
    CHECK_THROWS_AS(strong_error_study(synthetic_runner(0.5, true), {0.1, 0.05}, p, 2.0), std::invalid_argument);
    CHECK_THROWS_AS(strong_error_study(synthetic_runner(0.5, true), {0.1, 0.2, 0.05}, p, 2.0), std::invalid_argument);
}

TEST_CASE("weak study on injected runners") {
    const SimParams p = short_params(40);
    TestFunctional lin{"first", [](std::span<const double> x) { return x[0]; }};
    const ErrorReport r = weak_error_study(synthetic_runner(1.0, true), lin, {0.2, 0.1, 0.05}, p, WeakEvaluation::sup_grid);
    CHECK(r.fit.slope == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(r.all_flags_clear());
    for (double t : r.t_star) CHECK(t == doctest::Approx(20 * p.macro_dt));

    const ErrorReport d = weak_error_study(synthetic_runner(1.0, true), test_functional("constant"), {0.2, 0.1, 0.05},
                                           p, WeakEvaluation::terminal);
    CHECK(d.degenerate);
    CHECK(std::isnan(d.fit.slope));
    CHECK_FALSE(d.all_flags_clear());
}

TEST_CASE("weak study flags points buried in noise") {
    SimParams p = short_params(30);
    PairRunner pure_noise = [](double, std::uint32_t path, const PairObserver& obs) {
        std::vector<double> xe{path % 2 ? 1.0 : -1.0}, xb{0.0};
        for (std::size_t i = 0; i <= 20; ++i) obs(i, xe, xb);
    };
    TestFunctional lin{"first", [](std::span<const double> x) { return x[0]; }};
    const ErrorReport r = weak_error_study(pure_noise, lin, {0.2, 0.1, 0.05}, p, WeakEvaluation::terminal);
    CHECK_FALSE(r.all_flags_clear());
}

TEST_CASE("studies refuse models that fail the assumptions") {
    ModelSpec mdl = model_from_catalog("linear_gaussian_default");
    mdl.L_G = 10.0;
    const SimParams p = short_params(4);
    try {
        (void)strong_error_study(mdl, SineField(8), SineField(8), {0.1, 0.05, 0.025}, p);
        FAIL("expected StudyError");
    } catch (const StudyError& e) {
        CHECK(e.exit_code() == 1);
        CHECK(std::string(e.what()).find("dissipativity_fast") != std::string::npos);
    }
}

TEST_CASE("bias guard on a short horizon") {
    const ModelSpec mdl = model_from_catalog("linear_gaussian_default");
    const SineField e1 = SineField::basis(1, 8);
    const BiasGuard g = strong_bias_guard(mdl, e1, e1, short_params(4), 0.05, 4, 2.0);
    CHECK(g.checked);
    CHECK(g.probe_paths == 4);
    CHECK(g.dt_bias >= 0.0);
    CHECK(g.averaging_error > 0.0);
    CHECK(g.passed == (g.dt_bias < 0.1 * g.averaging_error));
    CHECK(g.suggested_macro_dt <= short_params(4).macro_dt);

    const BiasGuard w = weak_bias_guard(mdl, e1, e1, short_params(4), 0.05, 4, test_functional("constant"));
    CHECK(w.passed);
    CHECK(w.dt_bias == 0.0);
}

TEST_CASE("moment and Galerkin checks run end to end") {
    const ModelSpec mdl = model_from_catalog("linear_gaussian_default");
    const SineField e1 = SineField::basis(1, 16);
    const MomentReport mr = moment_check(mdl, e1, e1, {0.25, 0.0625}, short_params(10), 2.0);
    CHECK(mr.slow_sup_moment.size() == 2);
    CHECK(mr.slow_ratio >= 1.0);
    CHECK(mr.passed == (mr.slow_ratio < 1.2 && mr.fast_ratio < 1.2));

    const GalerkinReport gr = galerkin_refinement_check(mdl, e1, e1, 0.25, short_params(6), {4, 8}, 16);
    CHECK(gr.errors.size() == 2);
    CHECK(gr.errors[0] > gr.errors[1]);
    CHECK(gr.decreasing);
    CHECK_THROWS_AS(galerkin_refinement_check(mdl, e1, e1, 0.25, short_params(6), {8, 4}, 16), std::invalid_argument);
}

TEST_CASE("parallel_for visits each index once") {
    std::vector<std::atomic<int>> hits(1000);
    parallel_for(hits.size(), [&](std::size_t i) { hits[i].fetch_add(1); });
    for (auto& h : hits) CHECK(h.load() == 1);
    parallel_for(0, [](std::size_t) { FAIL("no work expected"); });
}
