#include "msbl/coefficients.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>
#include <stdexcept>

namespace msbl {

const LinearGaussian& ModelSpec::linear() const {
    if (const auto* lg = std::get_if<LinearGaussian>(&family)) return *lg;
    throw std::invalid_argument("model '" + id + "' is not in the linear_gaussian family");
}

UnaryFn scalar_function(const std::string& name) {
    if (name == "sin") return [](double u) { return std::sin(u); };
    if (name == "cos") return [](double u) { return std::cos(u); };
    if (name == "tanh") return [](double u) { return std::tanh(u); };
    if (name == "identity") return [](double u) { return u; };
    if (name == "zero") return [](double) { return 0.0; };
    throw std::invalid_argument("unknown scalar function '" + name + "'");
}

double scalar_lipschitz(const std::string& name) {
    if (name == "sin" || name == "cos" || name == "tanh" || name == "identity") return 1.0;
    if (name == "zero") return 0.0;
    throw std::invalid_argument("unknown scalar function '" + name + "'");
}

ModelSpec make_linear_gaussian(double a, double c, const std::string& f1, const std::string& g1) {
    if (!(a >= 0.0) || !std::isfinite(a) || !std::isfinite(c))
        throw std::invalid_argument("linear_gaussian: need finite a >= 0 and finite c");
    LinearGaussian lg{a, c, scalar_function(f1), scalar_function(g1), f1, g1};
    ModelSpec m;
    m.id = "linear_gaussian";
    m.f_slow = [f = lg.f1, c](double u, double v) { return f(u) + c * v; };
    m.g_fast = [g = lg.g1, a](double u, double v) { return g(u) - a * v; };
    m.L_F = scalar_lipschitz(f1);
    m.L_G = a;
    m.family = std::move(lg);
    return m;
}

ModelSpec make_nonlinear_default() {
    ModelSpec m;
    m.id = "nonlinear_default";
    m.f_slow = [](double u, double v) { return std::sin(u) + std::tanh(v); };
    m.g_fast = [](double u, double v) { return std::cos(u) - 2.0 * v; };
    m.L_F = 1.0;
    m.L_G = 2.0;
    m.family = GeneralFamily{};
    return m;
}

ModelSpec model_from_catalog(const std::string& id) {
    if (id == "linear_gaussian_default") {
        ModelSpec m = make_linear_gaussian(1.0, 1.0, "sin", "identity");
        m.id = id;
        return m;
    }
    if (id == "nonlinear_default") return make_nonlinear_default();
    throw std::invalid_argument("unknown model id '" + id + "'");
}

std::vector<std::string> catalog_ids() { return {"linear_gaussian_default", "nonlinear_default"}; }

NemytskiiWorkspace::NemytskiiWorkspace(std::size_t m)
    : m_(m), tr_(transform_for(m, default_grid(m))), xg_(default_grid(m)), yg_(default_grid(m)),
      vg_(default_grid(m)) {}

void NemytskiiWorkspace::set_x(std::span<const double> x) { tr_->synthesize(x, xg_); }

namespace {
[[noreturn]] void non_finite(std::size_t j, std::size_t n, double u, double v) {
    std::ostringstream os;
    os << "Nemytskii evaluation produced a non-finite value at xi=" << double(j + 1) / double(n + 1)
       << " (u=" << u << ", v=" << v << ")";
    throw std::domain_error(os.str());
}
}  // namespace

void NemytskiiWorkspace::apply(const ScalarFn& fn, std::span<const double> y, std::span<double> out) {
    tr_->synthesize(y, yg_);
    const std::size_t n = vg_.size();
    for (std::size_t j = 0; j < n; ++j) {
        const double v = fn(xg_[j], yg_[j]);
        if (!std::isfinite(v)) non_finite(j, n, xg_[j], yg_[j]);
        vg_[j] = v;
    }
    tr_->analyze(vg_, out);
}

void NemytskiiWorkspace::apply_unary(const UnaryFn& fn, std::span<double> out) {
    const std::size_t n = vg_.size();
    for (std::size_t j = 0; j < n; ++j) {
        const double v = fn(xg_[j]);
        if (!std::isfinite(v)) non_finite(j, n, xg_[j], 0.0);
        vg_[j] = v;
    }
    tr_->analyze(vg_, out);
}

namespace {
SineField apply_nemytskii(const ScalarFn& fn, const SineField& x, const SineField& y) {
    if (x.modes() != y.modes()) throw std::invalid_argument("Nemytskii map: mode counts differ");
    NemytskiiWorkspace ws(x.modes());
    ws.set_x(x.coeffs());
    SineField out(x.modes());
    ws.apply(fn, y.coeffs(), out.coeffs());
    return out;
}
}  // namespace

SineField apply_F(const ModelSpec& model, const SineField& x, const SineField& y) {
    return apply_nemytskii(model.f_slow, x, y);
}

SineField apply_G(const ModelSpec& model, const SineField& x, const SineField& y) {
    return apply_nemytskii(model.g_fast, x, y);
}

const Check* ValidationReport::find(const std::string& name) const {
    auto it = std::find_if(checks.begin(), checks.end(), [&](const Check& c) { return c.name == name; });
    return it == checks.end() ? nullptr : &*it;
}

namespace {

// Convergence of sum_k lambda_k^power alpha_k, lambda_k ~ k^2.
Check trace_check(const std::string& name, const CovSpec& cov, double power, std::size_t m_check) {
    Check c{name};
    if (const auto* p = std::get_if<PowerDecay>(&cov.law)) {
        // sum_k k^{2 power - r} converges iff r - 2 power > 1
        c.measured = p->r;
        c.threshold = 2.0 * power + 1.0;
        c.pass = p->c == 0.0 || p->r > c.threshold;
        return c;
    }
    double partial = 0.0;
    for (std::size_t k = 1; k <= m_check; ++k) {
        const double a = cov.alpha(k);
        if (a != 0.0) partial += std::pow(laplace_eigenvalue(k), power) * a;
    }
    c.measured = partial;
    c.threshold = std::numeric_limits<double>::infinity();
    c.pass = std::isfinite(partial);
    return c;
}

double probe_lipschitz(const ScalarFn& fn, bool in_first, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> dist(-10.0, 10.0);
    std::normal_distribution<double> small(0.0, 0.1);
    double worst = 0.0;
    for (int i = 0; i < 20000; ++i) {
        const double u = dist(rng), v = dist(rng);
        double h = i % 2 ? small(rng) : dist(rng);
        if (h == 0.0) continue;
        const double d = in_first ? fn(u + h, v) - fn(u, v) : fn(u, v + h) - fn(u, v);
        worst = std::max(worst, std::abs(d) / std::abs(h));
    }
    return worst;
}

}  // namespace

ValidationReport validate_assumptions(const ModelSpec& model, const CovSpec& cov1,
                                      const CovSpec& cov2, std::size_t m_check) {
    const double lambda1 = laplace_eigenvalue(1);
    ValidationReport r;
    r.checks.push_back({"dissipativity_slow", lambda1 - 2.0 * model.L_F > 0.0, 2.0 * model.L_F, lambda1});
    r.checks.push_back({"dissipativity_fast", lambda1 - model.L_G > 0.0, model.L_G, lambda1});
    r.checks.push_back(trace_check("noise_trace_q1", cov1, 1.0, m_check));
    r.checks.push_back(trace_check("noise_trace_q2", cov2, model.meta.beta - 1.0, m_check));

    std::mt19937_64 rng(0x5eed);
    const double lf = probe_lipschitz(model.f_slow, true, rng);
    const double lg = probe_lipschitz(model.g_fast, false, rng);
    r.checks.push_back({"lipschitz_f", lf <= 1.01 * model.L_F, lf, 1.01 * model.L_F});
    r.checks.push_back({"lipschitz_g", lg <= 1.01 * model.L_G, lg, 1.01 * model.L_G});

    r.overall = std::all_of(r.checks.begin(), r.checks.end(), [](const Check& c) { return c.pass; });
    return r;
}

}  // namespace msbl
