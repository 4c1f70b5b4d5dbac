#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <variant>
#include <vector>

#include "msbl/spectral.hpp"

namespace msbl {

/// alpha_k = c k^{-r}
struct PowerDecay {
    double c = 1.0;
    double r = 2.0;
};
/// alpha_k = values[k-1] for k <= values.size(), zero beyond.
struct FiniteRank {
    std::vector<double> values;
};
struct ZeroCov {};

/// Eigenvalues of a covariance operator diagonal in the sine basis.
struct CovSpec {
    std::variant<PowerDecay, FiniteRank, ZeroCov> law = ZeroCov{};
    std::size_t m_max = 0;  // informational: largest mode sampled so far by a study

    static CovSpec power_decay(double c, double r) { return {PowerDecay{c, r}}; }
    static CovSpec finite_rank(std::vector<double> v) { return {FiniteRank{std::move(v)}}; }
    static CovSpec zero() { return {ZeroCov{}}; }

    /// alpha_k for mode k >= 1.
    double alpha(std::size_t k) const;
    bool is_zero() const;
    /// Throws std::invalid_argument for negative or non-finite parameters.
    void validate() const;
};

enum class Channel : std::uint32_t { W1 = 0, W2 = 1 };

/// Address of one Gaussian vector. The draw is a pure function of the tuple.
struct NoiseStream {
    std::uint64_t master_seed = 0;
    std::uint32_t path_id = 0;
    Channel channel = Channel::W1;
    std::uint64_t step = 0;

    NoiseStream at(std::uint64_t s) const {
        NoiseStream o = *this;
        o.step = s;
        return o;
    }
};

/// Philox4x32-10 counter-based generator.
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter,
                                        std::array<std::uint32_t, 2> key);

/// Standard normals xi_1..xi_n for the address; xi_k depends only on (address, k),
/// so a shorter request is a prefix of a longer one.
void standard_normals(const NoiseStream& stream, std::span<double> out);

/// sqrt(alpha_k dt) xi_k on m modes. Throws for dt <= 0.
SineField wiener_increment(const CovSpec& cov, std::size_t m, double dt, const NoiseStream& stream);

/// Per-mode standard deviation of int_0^dt e^{(dt-s)A} sqrt(Q) dW_s.
double convolution_stddev(const CovSpec& cov, std::size_t k, double dt);

/// Exact stochastic-convolution increment over dt on m modes. Throws for dt <= 0.
SineField convolution_increment(const CovSpec& cov, std::size_t m, double dt,
                                const NoiseStream& stream);

}  // namespace msbl
