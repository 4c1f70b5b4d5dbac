// Compiled with -mavx2 -mfma; only reached after a runtime CPU check.
#include "msbl/simd.hpp"

#if defined(MSBL_HAVE_AVX2)
#include <immintrin.h>
#endif

namespace msbl::simd {

#if defined(MSBL_HAVE_AVX2)
namespace avx2 {

inline double hsum(__m256d v) {
    __m128d lo = _mm256_castpd256_pd128(v);
    __m128d hi = _mm256_extractf128_pd(v, 1);
    lo = _mm_add_pd(lo, hi);
    __m128d sh = _mm_unpackhi_pd(lo, lo);
    return _mm_cvtsd_f64(_mm_add_sd(lo, sh));
}

double dot(const double* a, const double* b, std::size_t n) {
    __m256d acc0 = _mm256_setzero_pd();
    __m256d acc1 = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
        acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4), acc1);
    }
    if (i + 4 <= n) {
        acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
        i += 4;
    }
    double s = hsum(_mm256_add_pd(acc0, acc1));
    for (; i < n; ++i) s += a[i] * b[i];
    return s;
}

// Four rows at a time so each load of v is reused.
void matvec(const double* mat, const double* v, double* out, std::size_t rows, std::size_t cols) {
    std::size_t r = 0;
    for (; r + 4 <= rows; r += 4) {
        const double* r0 = mat + r * cols;
        const double* r1 = r0 + cols;
        const double* r2 = r1 + cols;
        const double* r3 = r2 + cols;
        __m256d a0 = _mm256_setzero_pd(), a1 = _mm256_setzero_pd();
        __m256d a2 = _mm256_setzero_pd(), a3 = _mm256_setzero_pd();
        std::size_t c = 0;
        for (; c + 4 <= cols; c += 4) {
            __m256d x = _mm256_loadu_pd(v + c);
            a0 = _mm256_fmadd_pd(_mm256_loadu_pd(r0 + c), x, a0);
            a1 = _mm256_fmadd_pd(_mm256_loadu_pd(r1 + c), x, a1);
            a2 = _mm256_fmadd_pd(_mm256_loadu_pd(r2 + c), x, a2);
            a3 = _mm256_fmadd_pd(_mm256_loadu_pd(r3 + c), x, a3);
        }
        double s0 = hsum(a0), s1 = hsum(a1), s2 = hsum(a2), s3 = hsum(a3);
        for (; c < cols; ++c) {
            s0 += r0[c] * v[c];
            s1 += r1[c] * v[c];
            s2 += r2[c] * v[c];
            s3 += r3[c] * v[c];
        }
        out[r] = s0;
        out[r + 1] = s1;
        out[r + 2] = s2;
        out[r + 3] = s3;
    }
    for (; r < rows; ++r) out[r] = dot(mat + r * cols, v, cols);
}

void exp_euler(const double* decay, const double* x, const double* weight, const double* drive,
               const double* noise, double* out, std::size_t n) {
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d v = _mm256_mul_pd(_mm256_loadu_pd(decay + i), _mm256_loadu_pd(x + i));
        v = _mm256_fmadd_pd(_mm256_loadu_pd(weight + i), _mm256_loadu_pd(drive + i), v);
        if (noise) v = _mm256_add_pd(v, _mm256_loadu_pd(noise + i));
        _mm256_storeu_pd(out + i, v);
    }
    for (; i < n; ++i) {
        double v = decay[i] * x[i] + weight[i] * drive[i];
        if (noise) v += noise[i];
        out[i] = v;
    }
}

void axpy(double s, const double* x, double* out, std::size_t n) {
    const __m256d sv = _mm256_set1_pd(s);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4)
        _mm256_storeu_pd(out + i,
                         _mm256_fmadd_pd(sv, _mm256_loadu_pd(x + i), _mm256_loadu_pd(out + i)));
    for (; i < n; ++i) out[i] += s * x[i];
}

}  // namespace avx2

const KernelTable* avx2_kernels() {
    static const KernelTable table{"avx2", avx2::dot, avx2::matvec, avx2::exp_euler, avx2::axpy};
    return &table;
}
#else
const KernelTable* avx2_kernels() { return nullptr; }
#endif

}  // namespace msbl::simd
