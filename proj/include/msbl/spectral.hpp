#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <vector>

// Fields on (0,1) with homogeneous Dirichlet conditions, expanded in the
// orthonormal sine basis e_k(xi) = sqrt(2) sin(k pi xi), with the Laplacian
// eigenvalues -lambda_k, lambda_k = k^2 pi^2.

namespace msbl {

inline constexpr double kPi = 3.14159265358979323846;

/// Eigenvalue lambda_k of -Laplacian for mode k >= 1.
inline constexpr double laplace_eigenvalue(std::size_t k) {
    const double kk = static_cast<double>(k);
    return kk * kk * kPi * kPi;
}

/// Truncated expansion sum_{k=1..m} a_k e_k. Coefficient storage is 0-based:
/// coeffs()[k-1] holds a_k.
class SineField {
public:
    SineField() = default;
    /// Zero field with m modes.
    explicit SineField(std::size_t m);
    /// Throws std::domain_error on non-finite input, std::invalid_argument if empty.
    explicit SineField(std::vector<double> coeffs);

    /// e_k truncated at m modes (k is 1-based).
    static SineField basis(std::size_t k, std::size_t m, double amplitude = 1.0);

    std::size_t modes() const { return coeffs_.size(); }
    std::span<const double> coeffs() const { return coeffs_; }
    std::span<double> coeffs() { return coeffs_; }
    double operator[](std::size_t i) const { return coeffs_[i]; }
    double& operator[](std::size_t i) { return coeffs_[i]; }

    /// Zero-pads or truncates to m modes.
    SineField resized(std::size_t m) const;

    bool all_finite() const;

    SineField& operator+=(const SineField& o);
    SineField& operator-=(const SineField& o);
    SineField& operator*=(double s);

    friend SineField operator+(SineField a, const SineField& b) { return a += b; }
    friend SineField operator-(SineField a, const SineField& b) { return a -= b; }
    friend SineField operator*(SineField a, double s) { return a *= s; }
    friend SineField operator*(double s, SineField a) { return a *= s; }
    friend bool operator==(const SineField&, const SineField&) = default;

private:
    std::vector<double> coeffs_;
};

/// Point values at the interior nodes xi_j = j/(n+1), j = 1..n.
struct GridField {
    std::vector<double> values;
    std::size_t size() const { return values.size(); }
};

/// L2 inner product (Parseval in the orthonormal basis). Requires equal m.
double inner(const SineField& a, const SineField& b);
/// L2 norm |x|.
double norm(const SineField& x);

/// Dense sine synthesis/analysis pair between m modes and an n-point grid.
/// Instances are immutable and shared through transform_for().
class SineTransform {
public:
    SineTransform(std::size_t modes, std::size_t grid);

    std::size_t modes() const { return modes_; }
    std::size_t grid() const { return grid_; }

    /// values[j] = sum_k a_k sqrt(2) sin(k pi xi_j). coeffs.size() == modes().
    void synthesize(std::span<const double> coeffs, std::span<double> values) const;
    /// First modes() discrete sine coefficients of grid values.
    void analyze(std::span<const double> values, std::span<double> coeffs) const;

private:
    std::size_t modes_;
    std::size_t grid_;
    std::vector<double> synth_;    // grid x modes
    std::vector<double> analyze_;  // modes x grid
};

/// Process-wide cache of transforms keyed by (modes, grid). Thread-safe.
std::shared_ptr<const SineTransform> transform_for(std::size_t modes, std::size_t grid);

/// Default oversampled grid for m modes.
inline std::size_t default_grid(std::size_t m) { return 2 * m; }

/// Throws std::invalid_argument if n < m.
GridField to_grid(const SineField& x, std::size_t n);
GridField to_grid(const SineField& x);
/// Full discrete sine transform: the result has n modes.
SineField from_grid(const GridField& g);

/// e^{tA} x, exact per mode. Throws for t < 0.
SineField apply_semigroup(const SineField& x, double t);

/// ||x||_s = (sum lambda_k^s a_k^2)^{1/2}; s may be negative.
double sobolev_norm(const SineField& x, double s);

/// pi_m (x * d/dxi y), exact coefficient convolution. Requires equal m.
SineField bilinear_B(const SineField& x, const SineField& y);
/// B(x, x) = pi_m (1/2 d/dxi x^2).
SineField burgers_B(const SineField& x);
/// int_0^1 x (d/dxi y) z dxi for truncated fields. Requires equal m.
double trilinear_b(const SineField& x, const SineField& y, const SineField& z);

/// First m' coefficients. Throws if m' > m or m' == 0.
SineField project(const SineField& x, std::size_t m_prime);

namespace detail {
/// Raw form of bilinear_B on coefficient spans of length m; out has length m.
void bilinear_coeffs(std::span<const double> x, std::span<const double> y, std::span<double> out);
}  // namespace detail

}  // namespace msbl
