#include <doctest.h>

#include <cmath>

#include "msbl/integrators.hpp"

using namespace msbl;

namespace {

SimParams small_params(double eps) {
    SimParams p;
    p.eps = eps;
    p.T = 0.05;
    p.macro_dt = 1e-3;
    p.m = 8;
    return p;
}

double max_diff(const Trajectory& a, const Trajectory& b) {
    double d = 0.0;
    for (std::size_t i = 0; i < a.states.size(); ++i) d = std::max(d, norm(a.states[i] - b.states[i]));
    return d;
}

}  // namespace

TEST_CASE("parameter validation and step counts") {
    SimParams p;
    CHECK_NOTHROW(p.validate());
    CHECK(p.n_steps() == 500);
    p.eps = 0.01;
    p.kappa = 0.05;
    CHECK(p.n_sub() == 2);
    p.eps = 0.003;
    CHECK(p.n_sub() == 7);
    p.n_sub_override = 3;
    CHECK(p.n_sub() == 3);
    p.n_sub_override = 0;
    p.eps = 1e-12;
    CHECK_THROWS_AS(p.n_sub(), std::invalid_argument);

    for (auto bad : {+[](SimParams& q) { q.eps = 0.0; }, +[](SimParams& q) { q.T = -1.0; },
                     +[](SimParams& q) { q.macro_dt = 0.3; }, +[](SimParams& q) { q.macro_dt = 0.7; },
                     +[](SimParams& q) { q.kappa = 0.0; }, +[](SimParams& q) { q.m = 0; },
                     +[](SimParams& q) { q.noise_refine = 0; }}) {
        SimParams q;
        bad(q);
        CHECK_THROWS_AS(q.validate(), std::invalid_argument);
    }
}

TEST_CASE("trajectory layout and determinism") {
    const ModelSpec mdl = model_from_catalog("linear_gaussian_default");
    const SimParams p = small_params(0.1);
    const SineField x0 = SineField::basis(1, 8), y0 = SineField::basis(1, 8);
    const auto [slow, fast] = simulate_coupled(x0, y0, mdl, p, 0);
    CHECK(slow.kind == TrajectoryKind::slow_eps);
    CHECK(fast.kind == TrajectoryKind::fast_eps);
    REQUIRE(slow.times.size() == 51);
    CHECK(slow.states.size() == 51);
    CHECK(fast.states.size() == 51);
    CHECK(slow.times.back() == doctest::Approx(0.05));
    CHECK(slow.states.front() == x0);
    CHECK(fast.states.front() == y0);

    const auto again = simulate_coupled(x0, y0, mdl, p, 0);
    CHECK(max_diff(slow, again.first) == 0.0);
    CHECK(max_diff(fast, again.second) == 0.0);
    const auto other = simulate_coupled(x0, y0, mdl, p, 1);
    CHECK(max_diff(slow, other.first) > 0.0);

    const Trajectory avg = simulate_averaged(x0, mdl, p, FbarAnalytic{}, 0);
    CHECK(avg.kind == TrajectoryKind::averaged);
    CHECK(avg.states.size() == 51);
}

TEST_CASE("the zero state is a fixed point without noise or forcing") {
    ModelSpec mdl = make_linear_gaussian(1.0, 1.0, "sin", "zero");
    mdl.q1 = CovSpec::zero();
    mdl.q2 = CovSpec::zero();
    const SimParams p = small_params(0.05);
    const auto [slow, fast] = simulate_coupled(SineField(8), SineField(8), mdl, p, 0);
    CHECK(slow.states.back() == SineField(8));
    CHECK(fast.states.back() == SineField(8));
}

TEST_CASE("deterministic linear decay is exact per mode") {
    // f = 0, g = -v, no noise. x is tiny so the Burgers term is negligible and x decays at lambda_1
    ModelSpec mdl = make_linear_gaussian(1.0, 0.0, "zero", "zero");
    mdl.q1 = CovSpec::zero();
    mdl.q2 = CovSpec::zero();
    const SimParams p = small_params(0.5);
    const SineField x0 = SineField::basis(1, 8, 1e-8), y0 = SineField::basis(3, 8, 0.5);
    const auto [slow, fast] = simulate_coupled(x0, y0, mdl, p, 0);
    const double lam1 = laplace_eigenvalue(1);
    CHECK(slow.states.back()[0] == doctest::Approx(1e-8 * std::exp(-lam1 * 0.05)).epsilon(1e-6));
    // y decays at (lambda_3 + 1)/eps in real time; exponential Euler with explicit -v is first order
    const double lam3 = laplace_eigenvalue(3);
    CHECK(fast.states[1][2] / 0.5 == doctest::Approx(std::exp(-(lam3 + 1.0) * 1e-3 / 0.5)).epsilon(2e-3));
}

TEST_CASE("coupled and averaged paths share the slow noise") {
    const ModelSpec mdl = model_from_catalog("linear_gaussian_default");
    const SineField x0 = SineField::basis(1, 8), y0 = SineField::basis(1, 8);
    double prev = INFINITY;
    for (double eps : {0.25, 1.0 / 64}) {
        double d = 0.0;
        for (std::uint32_t path = 0; path < 4; ++path) {
            const SimParams p = small_params(eps);
            const auto [slow, fast] = simulate_coupled(x0, y0, mdl, p, path);
            d += max_diff(slow, simulate_averaged(x0, mdl, p, FbarAnalytic{}, path));
        }
        CHECK(d < prev);
        prev = d;
    }
    CHECK(prev < 0.02);
}

TEST_CASE("slow noise refinement matches the halved step") {
    const ModelSpec mdl = model_from_catalog("linear_gaussian_default");
    SimParams coarse = small_params(0.1);
    coarse.noise_refine = 2;
    SimParams fine = small_params(0.1);
    fine.macro_dt = coarse.macro_dt / 2.0;
    const SineField x0 = SineField::basis(1, 8);
    const Trajectory a = simulate_averaged(x0, mdl, coarse, FbarAnalytic{}, 3);
    const Trajectory b = simulate_averaged(x0, mdl, fine, FbarAnalytic{}, 3);
    const Trajectory unrelated = simulate_averaged(x0, mdl, small_params(0.1), FbarAnalytic{}, 3);
    const double same_path = norm(a.states.back() - b.states.back());
    CHECK(same_path < 1e-3);
    CHECK(same_path < 0.1 * norm(unrelated.states.back() - b.states.back()));
}

TEST_CASE("averaged drift sources") {
    const ModelSpec mdl = model_from_catalog("linear_gaussian_default");
    const SimParams p = small_params(0.1);
    const SineField x0 = SineField::basis(1, 8);
    CHECK_THROWS_AS(simulate_averaged(x0, mdl, p, FbarTable{}, 0), std::invalid_argument);

    // a table holding the exact drift at a grid of states stays close to the analytic run
    FbarTable table;
    for (int i = -4; i <= 12; ++i) {
        FbarEstimate e;
        e.x = SineField::basis(1, 8, 0.1 * i);
        e.value = fbar_analytic(mdl, e.x);
        table.entries.push_back(e);
    }
    const Trajectory exact = simulate_averaged(x0, mdl, p, FbarAnalytic{}, 0);
    const Trajectory tab = simulate_averaged(x0, mdl, p, table, 0);
    CHECK(norm(exact.states.back() - tab.states.back()) < 0.05);

    const ModelSpec nl = model_from_catalog("nonlinear_default");
    CHECK_THROWS(simulate_averaged(x0, nl, p, FbarAnalytic{}, 0));
    SimParams shorter = p;
    shorter.T = 0.005;
    const Trajectory online = simulate_averaged(x0, nl, shorter, FbarOnline{0.5, 1.0, 1e-3}, 0);
    CHECK(online.states.back().all_finite());
}

TEST_CASE("blow-up is reported") {
    const ModelSpec mdl = model_from_catalog("linear_gaussian_default");
    const SimParams p = small_params(0.1);
    const SineField huge = SineField::basis(2, 8, 1e200);
    CHECK_THROWS_AS(simulate_coupled(huge, SineField(8), mdl, p, 0), std::domain_error);
    CHECK_THROWS_AS(simulate_averaged(huge, mdl, p, FbarAnalytic{}, 0), std::domain_error);
}
