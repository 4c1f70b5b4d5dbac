#pragma once

#include <functional>
#include <memory>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "msbl/noise.hpp"
#include "msbl/spectral.hpp"

namespace msbl {

using ScalarFn = std::function<double(double, double)>;
using UnaryFn = std::function<double(double)>;

/// f(u,v) = f1(u) + c v,  g(u,v) = g1(u) - a v. The frozen equation is then an
/// Ornstein-Uhlenbeck process and the averaged drift has a closed form.
struct LinearGaussian {
    double a = 1.0;
    double c = 1.0;
    UnaryFn f1;
    UnaryFn g1;
    std::string f1_name;
    std::string g1_name;
};
struct GeneralFamily {};

/// Regularity exponents carried for the record; nothing numerical uses tau/alpha,
/// beta enters the Q2 trace check.
struct RegularityMeta {
    double tau = 0.6;
    double alpha = 0.1;
    double beta = 0.95;
};

/// Coefficients F(x,y)(xi) = f(x(xi), y(xi)), G(x,y)(xi) = g(x(xi), y(xi)) and
/// the noise covariances of the slow (q1) and fast (q2) equations.
struct ModelSpec {
    std::string id;
    ScalarFn f_slow;
    ScalarFn g_fast;
    double L_F = 0.0;
    double L_G = 0.0;
    std::variant<LinearGaussian, GeneralFamily> family = GeneralFamily{};
    RegularityMeta meta;
    CovSpec q1 = CovSpec::power_decay(1.0, 4.0);
    CovSpec q2 = CovSpec::power_decay(1.0, 2.0);

    bool is_linear_gaussian() const { return std::holds_alternative<LinearGaussian>(family); }
    const LinearGaussian& linear() const;
};

/// Named scalar functions usable from configuration: sin, cos, tanh, identity, zero.
UnaryFn scalar_function(const std::string& name);
/// Lipschitz constant of a named scalar function.
double scalar_lipschitz(const std::string& name);

ModelSpec make_linear_gaussian(double a, double c, const std::string& f1, const std::string& g1);
/// f(u,v) = sin u + tanh v, g(u,v) = cos u - 2 v.
ModelSpec make_nonlinear_default();
/// "linear_gaussian_default" or "nonlinear_default"; throws std::invalid_argument otherwise.
ModelSpec model_from_catalog(const std::string& id);
std::vector<std::string> catalog_ids();

/// Evaluates Nemytskii maps on the 2m-point grid and projects back to m modes.
/// Holds scratch buffers; one workspace per thread.
class NemytskiiWorkspace {
public:
    explicit NemytskiiWorkspace(std::size_t m);

    std::size_t modes() const { return m_; }

    /// Caches the grid values of x for subsequent apply() calls.
    void set_x(std::span<const double> x);
    /// out = pi_m fn(x(.), y(.)). Throws std::domain_error on non-finite grid values.
    void apply(const ScalarFn& fn, std::span<const double> y, std::span<double> out);
    /// out = pi_m fn(x(.)) using the cached x.
    void apply_unary(const UnaryFn& fn, std::span<double> out);

private:
    std::size_t m_;
    std::shared_ptr<const SineTransform> tr_;
    std::vector<double> xg_, yg_, vg_;
};

/// F(x,y), G(x,y). Require x.modes() == y.modes().
SineField apply_F(const ModelSpec& model, const SineField& x, const SineField& y);
SineField apply_G(const ModelSpec& model, const SineField& x, const SineField& y);

struct Check {
    std::string name;
    bool pass = false;
    double measured = 0.0;
    double threshold = 0.0;
};

struct ValidationReport {
    std::vector<Check> checks;
    bool overall = false;

    const Check* find(const std::string& name) const;
};

/// Dissipativity (slow, fast), noise trace conditions via decay exponents, and an
/// empirical Lipschitz probe of f in u and g in v.
ValidationReport validate_assumptions(const ModelSpec& model, const CovSpec& cov1,
                                      const CovSpec& cov2, std::size_t m_check = 1000);
inline ValidationReport validate_assumptions(const ModelSpec& model) {
    return validate_assumptions(model, model.q1, model.q2);
}

}  // namespace msbl
