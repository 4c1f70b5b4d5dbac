#include "msbl/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <stdexcept>
#include <string>
#include <utility>

#include "msbl/simd.hpp"

namespace msbl {

SineField::SineField(std::size_t m) : coeffs_(m, 0.0) {
    if (m == 0) throw std::invalid_argument("SineField: at least one mode required");
}

SineField::SineField(std::vector<double> coeffs) : coeffs_(std::move(coeffs)) {
    if (coeffs_.empty()) throw std::invalid_argument("SineField: at least one mode required");
    if (!all_finite()) throw std::domain_error("SineField: non-finite coefficient");
}

SineField SineField::basis(std::size_t k, std::size_t m, double amplitude) {
    if (k == 0 || k > m) throw std::invalid_argument("SineField::basis: mode out of range");
    SineField f(m);
    f[k - 1] = amplitude;
    return f;
}

SineField SineField::resized(std::size_t m) const {
    SineField out(m);
    std::copy_n(coeffs_.begin(), std::min(m, coeffs_.size()), out.coeffs_.begin());
    return out;
}

bool SineField::all_finite() const {
    return std::all_of(coeffs_.begin(), coeffs_.end(), [](double v) { return std::isfinite(v); });
}

namespace {
void require_same(const SineField& a, const SineField& b, const char* op) {
    if (a.modes() != b.modes())
        throw std::invalid_argument(std::string(op) + ": mode counts differ (" +
                                    std::to_string(a.modes()) + " vs " +
                                    std::to_string(b.modes()) + ")");
}
}  // namespace

SineField& SineField::operator+=(const SineField& o) {
    require_same(*this, o, "operator+=");
    simd::active().axpy(1.0, o.coeffs_.data(), coeffs_.data(), coeffs_.size());
    return *this;
}

SineField& SineField::operator-=(const SineField& o) {
    require_same(*this, o, "operator-=");
    simd::active().axpy(-1.0, o.coeffs_.data(), coeffs_.data(), coeffs_.size());
    return *this;
}

SineField& SineField::operator*=(double s) {
    for (double& v : coeffs_) v *= s;
    return *this;
}

double inner(const SineField& a, const SineField& b) {
    require_same(a, b, "inner");
    return simd::active().dot(a.coeffs().data(), b.coeffs().data(), a.modes());
}

double norm(const SineField& x) { return std::sqrt(inner(x, x)); }

SineTransform::SineTransform(std::size_t modes, std::size_t grid)
    : modes_(modes), grid_(grid), synth_(grid * modes), analyze_(modes * grid) {
    if (modes == 0 || grid < modes)
        throw std::invalid_argument("SineTransform: need 1 <= modes <= grid");
    const double h = 1.0 / static_cast<double>(grid + 1);
    const double root2 = std::sqrt(2.0);
    for (std::size_t j = 1; j <= grid; ++j) {
        for (std::size_t k = 1; k <= modes; ++k) {
            // Reduce k*j modulo 2(n+1) so the sine argument stays in [0, 2pi).
            const std::size_t r = (k * j) % (2 * (grid + 1));
            const double s = std::sin(kPi * static_cast<double>(r) * h);
            synth_[(j - 1) * modes + (k - 1)] = root2 * s;
            analyze_[(k - 1) * grid + (j - 1)] = root2 * h * s;
        }
    }
}

void SineTransform::synthesize(std::span<const double> coeffs, std::span<double> values) const {
    simd::active().matvec(synth_.data(), coeffs.data(), values.data(), grid_, modes_);
}

void SineTransform::analyze(std::span<const double> values, std::span<double> coeffs) const {
    simd::active().matvec(analyze_.data(), values.data(), coeffs.data(), modes_, grid_);
}

std::shared_ptr<const SineTransform> transform_for(std::size_t modes, std::size_t grid) {
    static std::mutex mu;
    static std::map<std::pair<std::size_t, std::size_t>, std::shared_ptr<const SineTransform>> cache;
    std::lock_guard lock(mu);
    auto& slot = cache[{modes, grid}];
    if (!slot) slot = std::make_shared<const SineTransform>(modes, grid);
    return slot;
}

GridField to_grid(const SineField& x, std::size_t n) {
    if (n < x.modes())
        throw std::invalid_argument("to_grid: grid size " + std::to_string(n) +
                                    " smaller than mode count " + std::to_string(x.modes()));
    GridField g{std::vector<double>(n)};
    transform_for(x.modes(), n)->synthesize(x.coeffs(), g.values);
    return g;
}

GridField to_grid(const SineField& x) { return to_grid(x, default_grid(x.modes())); }

SineField from_grid(const GridField& g) {
    SineField out(g.size());
    transform_for(g.size(), g.size())->analyze(g.values, out.coeffs());
    if (!out.all_finite()) throw std::domain_error("from_grid: non-finite grid values");
    return out;
}

SineField apply_semigroup(const SineField& x, double t) {
    if (!(t >= 0.0)) throw std::invalid_argument("apply_semigroup: negative time");
    SineField out = x;
    for (std::size_t k = 1; k <= x.modes(); ++k) out[k - 1] *= std::exp(-laplace_eigenvalue(k) * t);
    return out;
}

double sobolev_norm(const SineField& x, double s) {
    double acc = 0.0;
    for (std::size_t k = 1; k <= x.modes(); ++k) {
        const double a = x[k - 1];
        if (a != 0.0) acc += std::pow(laplace_eigenvalue(k), s) * a * a;
    }
    return std::sqrt(acc);
}

namespace detail {

// x d/dxi y with x = sum a_j e_j, y = sum b_k e_k:
//   a_j b_k k pi [sin((j+k) pi xi) + sin((j-k) pi xi)] summed and projected on e_l gives
//   c_l = (pi/sqrt2) [ sum_{j+k=l} a_j k b_k + sum_{j-k=l} a_j k b_k - sum_{k-j=l} a_j k b_k ].
void bilinear_coeffs(std::span<const double> x, std::span<const double> y, std::span<double> out) {
    const std::size_t m = x.size();
    const auto& K = simd::active();
    thread_local std::vector<double> kb, xr;
    kb.resize(m);
    xr.resize(m);
    for (std::size_t k = 0; k < m; ++k) {
        kb[k] = static_cast<double>(k + 1) * y[k];
        xr[k] = x[m - 1 - k];
    }
    const double scale = kPi / std::sqrt(2.0);
    for (std::size_t l = 1; l <= m; ++l) {
        double s = 0.0;
        if (l > 1) s += K.dot(xr.data() + (m - l + 1), kb.data(), l - 1);
        if (l < m) {
            s += K.dot(x.data() + l, kb.data(), m - l);
            s -= K.dot(x.data(), kb.data() + l, m - l);
        }
        out[l - 1] = scale * s;
    }
}

}  // namespace detail

SineField bilinear_B(const SineField& x, const SineField& y) {
    require_same(x, y, "bilinear_B");
    SineField out(x.modes());
    detail::bilinear_coeffs(x.coeffs(), y.coeffs(), out.coeffs());
    return out;
}

SineField burgers_B(const SineField& x) { return bilinear_B(x, x); }

double trilinear_b(const SineField& x, const SineField& y, const SineField& z) {
    require_same(x, z, "trilinear_b");
    return inner(bilinear_B(x, y), z);
}

SineField project(const SineField& x, std::size_t m_prime) {
    if (m_prime == 0 || m_prime > x.modes())
        throw std::invalid_argument("project: target level must be in [1, m]");
    return x.resized(m_prime);
}

}  // namespace msbl
