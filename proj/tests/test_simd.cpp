#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "msbl/simd.hpp"

using namespace msbl;

namespace {

std::vector<double> random_vec(std::size_t n, std::mt19937_64& rng) {
    std::normal_distribution<double> nd;
    std::vector<double> v(n);
    for (auto& x : v) x = nd(rng);
    return v;
}

// every table that can run here, generic first
std::vector<const simd::KernelTable*> runnable() {
    std::vector<const simd::KernelTable*> t{&simd::generic_kernels()};
    if (simd::avx2_kernels() && simd::cpu_supports_avx2()) t.push_back(simd::avx2_kernels());
    if (simd::neon_kernels()) t.push_back(simd::neon_kernels());
    return t;
}

double rel_close(double a, double b) { return std::abs(a - b) <= 1e-13 * (1.0 + std::abs(a)); }

}  // namespace

TEST_CASE("every variant matches the scalar reference") {
    std::mt19937_64 rng(7);
    const auto& ref = simd::generic_kernels();
    for (const auto* k : runnable()) {
        CAPTURE(k->name);
        for (std::size_t n : {0u, 1u, 3u, 4u, 5u, 7u, 8u, 17u, 64u, 129u}) {
            CAPTURE(n);
            auto a = random_vec(n, rng), b = random_vec(n, rng);
            CHECK(rel_close(k->dot(a.data(), b.data(), n), ref.dot(a.data(), b.data(), n)));

            const std::size_t rows = n / 2 + 1;
            auto mat = random_vec(rows * n, rng);
            std::vector<double> o1(rows), o2(rows);
            k->matvec(mat.data(), a.data(), o1.data(), rows, n);
            ref.matvec(mat.data(), a.data(), o2.data(), rows, n);
            for (std::size_t r = 0; r < rows; ++r) CHECK(rel_close(o1[r], o2[r]));

            auto decay = random_vec(n, rng), w = random_vec(n, rng), noise = random_vec(n, rng);
            std::vector<double> e1(n), e2(n), f1(n), f2(n);
            k->exp_euler(decay.data(), a.data(), w.data(), b.data(), noise.data(), e1.data(), n);
            ref.exp_euler(decay.data(), a.data(), w.data(), b.data(), noise.data(), e2.data(), n);
            k->exp_euler(decay.data(), a.data(), w.data(), b.data(), nullptr, f1.data(), n);
            ref.exp_euler(decay.data(), a.data(), w.data(), b.data(), nullptr, f2.data(), n);
            for (std::size_t i = 0; i < n; ++i) {
                CHECK(rel_close(e1[i], e2[i]));
                CHECK(rel_close(f1[i], f2[i]));
                CHECK(rel_close(e1[i] - noise[i], decay[i] * a[i] + w[i] * b[i]));
            }

            auto y1 = b, y2 = b;
            k->axpy(0.37, a.data(), y1.data(), n);
            ref.axpy(0.37, a.data(), y2.data(), n);
            for (std::size_t i = 0; i < n; ++i) CHECK(rel_close(y1[i], y2[i]));
        }
    }
}

TEST_CASE("exp_euler may run in place") {
    const auto& k = simd::active();
    std::vector<double> d{0.5, 0.25, 2.0, 1.0, 3.0}, x{1, 2, 3, 4, 5}, w{1, 1, 1, 1, 1}, g{0, 1, 0, 1, 0};
    k.exp_euler(d.data(), x.data(), w.data(), g.data(), nullptr, x.data(), x.size());
    CHECK(x == std::vector<double>{0.5, 1.5, 6.0, 5.0, 15.0});
}

TEST_CASE("dot on exact integers") {
    std::vector<double> a(33), b(33);
    for (std::size_t i = 0; i < a.size(); ++i) {
        a[i] = static_cast<double>(i);
        b[i] = 2.0;
    }
    for (const auto* k : runnable()) CHECK(k->dot(a.data(), b.data(), a.size()) == 1056.0);
}

TEST_CASE("selection by name") {
    const auto before = simd::active().name;
    CHECK(simd::select("generic"));
    CHECK(simd::active().name == "generic");
    CHECK_FALSE(simd::select("sse9"));
    CHECK(simd::active().name == "generic");
    CHECK(simd::select(before));
}
