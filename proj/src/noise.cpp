#include "msbl/noise.hpp"

#include <cmath>
#include <stdexcept>

namespace msbl {

double CovSpec::alpha(std::size_t k) const {
    if (k == 0) throw std::invalid_argument("CovSpec::alpha: modes start at 1");
    return std::visit(
        [k](const auto& law) -> double {
            using T = std::decay_t<decltype(law)>;
            if constexpr (std::is_same_v<T, PowerDecay>) {
                return law.c * std::pow(static_cast<double>(k), -law.r);
            } else if constexpr (std::is_same_v<T, FiniteRank>) {
                return k <= law.values.size() ? law.values[k - 1] : 0.0;
            } else {
                return 0.0;
            }
        },
        law);
}

bool CovSpec::is_zero() const {
    if (std::holds_alternative<ZeroCov>(law)) return true;
    if (const auto* p = std::get_if<PowerDecay>(&law)) return p->c == 0.0;
    for (double v : std::get<FiniteRank>(law).values)
        if (v != 0.0) return false;
    return true;
}

void CovSpec::validate() const {
    if (const auto* p = std::get_if<PowerDecay>(&law)) {
        if (!std::isfinite(p->c) || !std::isfinite(p->r) || p->c < 0.0)
            throw std::invalid_argument("power_decay covariance: need finite c >= 0 and finite r");
    } else if (const auto* f = std::get_if<FiniteRank>(&law)) {
        for (double v : f->values)
            if (!std::isfinite(v) || v < 0.0)
                throw std::invalid_argument("finite_rank covariance: eigenvalues must be finite and >= 0");
    }
}

std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> ctr,
                                        std::array<std::uint32_t, 2> key) {
    constexpr std::uint32_t M0 = 0xD2511F53u, M1 = 0xCD9E8D57u;
    constexpr std::uint32_t W0 = 0x9E3779B9u, W1 = 0xBB67AE85u;
    for (int round = 0; round < 10; ++round) {
        const std::uint64_t p0 = std::uint64_t{M0} * ctr[0];
        const std::uint64_t p1 = std::uint64_t{M1} * ctr[2];
        const auto hi0 = static_cast<std::uint32_t>(p0 >> 32), lo0 = static_cast<std::uint32_t>(p0);
        const auto hi1 = static_cast<std::uint32_t>(p1 >> 32), lo1 = static_cast<std::uint32_t>(p1);
        ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
        key[0] += W0;
        key[1] += W1;
    }
    return ctr;
}

namespace {

constexpr double kTwoPi = 2.0 * kPi;

// Uniform in (0, 1].
inline double unit_open0(std::uint32_t hi, std::uint32_t lo) {
    const std::uint64_t bits = ((std::uint64_t{hi} << 32) | lo) >> 11;
    return (static_cast<double>(bits) + 1.0) * 0x1.0p-53;
}

}  // namespace

void standard_normals(const NoiseStream& s, std::span<double> out) {
    const std::array<std::uint32_t, 2> key{static_cast<std::uint32_t>(s.master_seed),
                                           static_cast<std::uint32_t>(s.master_seed >> 32)};
    const auto chan = static_cast<std::uint32_t>(s.channel) << 31;
    for (std::size_t pair = 0; 2 * pair < out.size(); ++pair) {
        const std::array<std::uint32_t, 4> ctr{static_cast<std::uint32_t>(s.step),
                                               static_cast<std::uint32_t>(s.step >> 32),
                                               chan | static_cast<std::uint32_t>(pair), s.path_id};
        const auto r = philox4x32(ctr, key);
        // Box-Muller on two 64-bit uniforms.
        const double u1 = unit_open0(r[0], r[1]);
        const double u2 = unit_open0(r[2], r[3]);
        const double radius = std::sqrt(-2.0 * std::log(u1));
        const double angle = kTwoPi * u2;
        out[2 * pair] = radius * std::cos(angle);
        if (2 * pair + 1 < out.size()) out[2 * pair + 1] = radius * std::sin(angle);
    }
}

SineField wiener_increment(const CovSpec& cov, std::size_t m, double dt, const NoiseStream& stream) {
    if (!(dt > 0.0)) throw std::invalid_argument("wiener_increment: dt must be positive");
    SineField out(m);
    if (cov.is_zero()) return out;
    standard_normals(stream, out.coeffs());
    for (std::size_t k = 1; k <= m; ++k) out[k - 1] *= std::sqrt(cov.alpha(k) * dt);
    return out;
}

double convolution_stddev(const CovSpec& cov, std::size_t k, double dt) {
    const double lambda = laplace_eigenvalue(k);
    return std::sqrt(cov.alpha(k) * -std::expm1(-2.0 * lambda * dt) / (2.0 * lambda));
}

SineField convolution_increment(const CovSpec& cov, std::size_t m, double dt,
                                const NoiseStream& stream) {
    if (!(dt > 0.0)) throw std::invalid_argument("convolution_increment: dt must be positive");
    SineField out(m);
    if (cov.is_zero()) return out;
    standard_normals(stream, out.coeffs());
    for (std::size_t k = 1; k <= m; ++k) out[k - 1] *= convolution_stddev(cov, k, dt);
    return out;
}

}  // namespace msbl
