#include <doctest.h>

#include <cmath>

#include "msbl/frozen.hpp"
#include "oracles.hpp"

using namespace msbl;

TEST_CASE("frozen stationary statistics of the linear family") {
    const ModelSpec mdl = model_from_catalog("linear_gaussian_default");
    const std::size_t m = 4, n = 200000, batches = 50;
    const double h = 1e-3;
    SineField x(m);
    x[0] = 0.7;
    const SineField mu = frozen_invariant_mean(mdl, x);
    FrozenStepper st(mdl, m, h);
    st.freeze(x.coeffs());
    std::vector<double> y(m, 0.0);
    for (std::size_t i = 0; i < 2000; ++i) st.step(y, {11, 0, Channel::W2, i});
    std::vector<std::vector<double>> bm(m, std::vector<double>(batches)), bv(m, std::vector<double>(batches));
    for (std::size_t i = 0; i < n; ++i) {
        st.step(y, {11, 0, Channel::W2, 2000 + i});
        for (std::size_t k = 0; k < m; ++k) {
            bm[k][i * batches / n] += y[k];
            bv[k][i * batches / n] += (y[k] - mu[k]) * (y[k] - mu[k]);
        }
    }
    auto mean_se = [&](std::vector<double> v) {
        double s = 0, ss = 0;
        for (auto& b : v) s += (b /= static_cast<double>(n / batches));
        s /= batches;
        for (double b : v) ss += (b - s) * (b - s);
        return std::pair{s, std::sqrt(ss / (batches - 1) / batches)};
    };
    for (std::size_t k = 1; k <= m; ++k) {
        CAPTURE(k);
        const double lam = laplace_eigenvalue(k);
        const auto [mean, se_m] = mean_se(bm[k - 1]);
        const auto [var, se_v] = mean_se(bv[k - 1]);
        CHECK(std::abs(mean - mu[k - 1]) < 3.0 * se_m);
        CHECK(std::abs(var - mdl.q2.alpha(k) / (2.0 * (lam + 1.0))) < 3.0 * se_v);
    }
}

TEST_CASE("invariant mean and averaged drift in closed form") {
    const ModelSpec mdl = model_from_catalog("linear_gaussian_default");
    const SineField e1 = SineField::basis(1, 16);
    const SineField mu = frozen_invariant_mean(mdl, e1);
    CHECK(mu[0] == doctest::Approx(1.0 / (oracle::pi * oracle::pi + 1.0)).epsilon(1e-12));
    CHECK(std::abs(mu[1]) < 1e-14);
    const SineField fb = fbar_analytic(mdl, e1);
    const std::vector<double> e1v(e1.coeffs().begin(), e1.coeffs().end());
    for (std::size_t l = 1; l <= 5; ++l) {
        const double sin_part = oracle::nemytskii_coeff([](double u) { return std::sin(u); }, e1v, l);
        CHECK(std::abs(fb[l - 1] - sin_part - mu[l - 1]) < 1e-8);
    }
    CHECK(fbar_analytic(mdl, SineField(8)) == SineField(8));
}

TEST_CASE("ergodic averaged drift agrees with the closed form") {
    const ModelSpec mdl = model_from_catalog("linear_gaussian_default");
    const SineField x = SineField::basis(1, 8);
    const FbarEstimate e = estimate_fbar_ergodic(mdl, x, default_burn_in(mdl), 50.0, 1e-3, {3, 0, Channel::W2, 0});
    const SineField exact = fbar_analytic(mdl, x);
    CHECK(e.batches == 20);
    for (std::size_t k = 0; k < 8; ++k) {
        CAPTURE(k);
        CHECK(std::abs(e.value[k] - exact[k]) < 4.0 * e.std_err[k] + 1e-4);
    }
    CHECK_THROWS_AS(estimate_fbar_ergodic(mdl, x, 1.0, 0.01, 1e-3, {}), std::invalid_argument);
    CHECK_THROWS_AS(estimate_fbar_ergodic(mdl, x, 1.0, 1.0, 0.0, {}), std::invalid_argument);
}

TEST_CASE("Poisson corrector") {
    const ModelSpec mdl = model_from_catalog("linear_gaussian_default");
    const SineField x(8), y = SineField::basis(1, 8);
    const SineField exact = poisson_corrector_linear(mdl, x, y);
    CHECK(exact[0] == doctest::Approx(1.0 / (oracle::pi * oracle::pi + 1.0)).epsilon(1e-14));
    for (std::size_t k = 1; k < 8; ++k) CHECK(exact[k] == 0.0);

    const SineField q = poisson_corrector_quadrature(mdl, x, y, 3.0, 200, 1e-3, {9, 0, Channel::W2, 0});
    CHECK(norm(q - exact) / norm(exact) < 0.1);

    // antithetic pairs cancel the noise exactly for a linear F
    CorrectorOptions anti;
    const SineField a = poisson_corrector_quadrature(mdl, x, y, 3.0, 2, 1e-3, {9, 0, Channel::W2, 0}, anti);
    CHECK(norm(a - exact) / norm(exact) < 0.01);
    CHECK_THROWS_AS(poisson_corrector_quadrature(mdl, x, y, 0.0, 10, 1e-3, {}), std::invalid_argument);
}

TEST_CASE("frozen stepper reproduces a hand-computed step") {
    ModelSpec mdl = make_linear_gaussian(1.0, 1.0, "zero", "zero");
    mdl.q2 = CovSpec::zero();
    const SineField y = SineField::basis(2, 4, 0.5);
    const SineField out = frozen_step(mdl, SineField(4), y, 0.01, {});
    const double lam = laplace_eigenvalue(2);
    const double expect = std::exp(-lam * 0.01) * 0.5 - (1.0 - std::exp(-lam * 0.01)) / lam * 0.5;
    CHECK(out[1] == doctest::Approx(expect).epsilon(1e-12));
    CHECK(std::abs(out[0]) < 1e-15);
    CHECK_THROWS_AS(FrozenStepper(mdl, 4, 0.0), std::invalid_argument);
}
