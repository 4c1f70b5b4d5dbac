#include <doctest.h>

#include <cmath>

#include "msbl/coefficients.hpp"
#include "oracles.hpp"

using namespace msbl;

namespace {
std::vector<double> vec(const SineField& x) { return {x.coeffs().begin(), x.coeffs().end()}; }
}  // namespace

TEST_CASE("tanh Nemytskii against quadrature") {
    const std::size_t m = 16;
    SineField x(m);
    x[0] = 1.3;
    x[2] = -0.4;
    x[5] = 0.2;
    NemytskiiWorkspace ws(m);
    ws.set_x(x.coeffs());
    SineField out(m);
    ws.apply_unary([](double u) { return std::tanh(u); }, out.coeffs());
    // the 2m-point grid aliases modes near 2m+2-l back onto l
    for (std::size_t l = 1; l <= m; ++l)
        CHECK(std::abs(out[l - 1] - oracle::nemytskii_coeff([](double u) { return std::tanh(u); }, vec(x), l)) < 1e-7);
}

TEST_CASE("linear family coefficients") {
    const ModelSpec mdl = make_linear_gaussian(2.0, 0.5, "sin", "identity");
    CHECK(mdl.is_linear_gaussian());
    CHECK(mdl.L_F == 1.0);
    CHECK(mdl.L_G == 2.0);
    CHECK(mdl.f_slow(0.3, 2.0) == doctest::Approx(std::sin(0.3) + 1.0));
    CHECK(mdl.g_fast(0.3, 2.0) == doctest::Approx(0.3 - 4.0));

    // G is linear in its arguments here: G(e1, e2) = e1 - 2 e2 exactly
    const SineField e1 = SineField::basis(1, 8), e2 = SineField::basis(2, 8);
    const SineField g = apply_G(mdl, e1, e2);
    for (std::size_t k = 0; k < 8; ++k) CHECK(g[k] == doctest::Approx(e1[k] - 2.0 * e2[k]).scale(1.0).epsilon(1e-13));
    const SineField f = apply_F(mdl, SineField(8), e2);
    for (std::size_t k = 0; k < 8; ++k) CHECK(f[k] == doctest::Approx(0.5 * e2[k]).scale(1.0).epsilon(1e-13));

    CHECK_THROWS_AS(make_linear_gaussian(-1.0, 1.0, "sin", "identity"), std::invalid_argument);
    CHECK_THROWS_AS(make_linear_gaussian(1.0, 1.0, "exp", "identity"), std::invalid_argument);
    CHECK_THROWS_AS(make_nonlinear_default().linear(), std::invalid_argument);
}

TEST_CASE("catalog") {
    for (const auto& id : catalog_ids()) CHECK(model_from_catalog(id).id == id);
    CHECK_THROWS_AS(model_from_catalog("heat"), std::invalid_argument);
    const ModelSpec nl = model_from_catalog("nonlinear_default");
    CHECK_FALSE(nl.is_linear_gaussian());
    CHECK(nl.f_slow(0.0, 0.0) == 0.0);
    CHECK(nl.g_fast(0.0, 1.0) == doctest::Approx(-1.0));
}

TEST_CASE("non-finite grid values are reported with their location") {
    const ModelSpec mdl = make_linear_gaussian(1.0, 1.0, "sin", "identity");
    ModelSpec bad = mdl;
    bad.f_slow = [](double u, double) { return u > 0.5 ? NAN : 0.0; };
    SineField x(4);
    x[0] = 1.0;
    try {
        (void)apply_F(bad, x, SineField(4));
        FAIL("expected domain_error");
    } catch (const std::domain_error& e) {
        CHECK(std::string(e.what()).find("xi") != std::string::npos);
    }
}

TEST_CASE("assumption checks on the shipped defaults") {
    const ValidationReport r = validate_assumptions(model_from_catalog("linear_gaussian_default"));
    CHECK(r.overall);
    for (const char* name : {"dissipativity_slow", "dissipativity_fast", "noise_trace_q1", "noise_trace_q2",
                             "lipschitz_f", "lipschitz_g"}) {
        CAPTURE(name);
        REQUIRE(r.find(name) != nullptr);
        CHECK(r.find(name)->pass);
    }
    CHECK(validate_assumptions(model_from_catalog("nonlinear_default")).overall);
}

TEST_CASE("assumption failures are named") {
    ModelSpec mdl = model_from_catalog("linear_gaussian_default");
    mdl.L_G = 10.0;
    ValidationReport r = validate_assumptions(mdl);
    CHECK_FALSE(r.overall);
    CHECK_FALSE(r.find("dissipativity_fast")->pass);

    mdl = model_from_catalog("linear_gaussian_default");
    mdl.L_F = 5.0;
    CHECK_FALSE(validate_assumptions(mdl).find("dissipativity_slow")->pass);

    mdl = model_from_catalog("linear_gaussian_default");
    r = validate_assumptions(mdl, CovSpec::power_decay(1.0, 2.5), mdl.q2);
    CHECK_FALSE(r.find("noise_trace_q1")->pass);
    r = validate_assumptions(mdl, mdl.q1, CovSpec::power_decay(1.0, 0.5));
    CHECK_FALSE(r.find("noise_trace_q2")->pass);
    // finite rank is always trace class
    r = validate_assumptions(mdl, CovSpec::finite_rank({1.0, 1.0}), CovSpec::zero());
    CHECK(r.overall);

    // declared constant smaller than the truth
    mdl.L_G = 0.5;
    CHECK_FALSE(validate_assumptions(mdl).find("lipschitz_g")->pass);
}
