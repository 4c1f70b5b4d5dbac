#include "msbl/simd.hpp"

#if defined(__aarch64__) && defined(__ARM_NEON)
#include <arm_neon.h>
#define MSBL_HAVE_NEON 1
#endif

namespace msbl::simd {

#if defined(MSBL_HAVE_NEON)
namespace neon {

double dot(const double* a, const double* b, std::size_t n) {
    float64x2_t acc0 = vdupq_n_f64(0.0);
    float64x2_t acc1 = vdupq_n_f64(0.0);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        acc0 = vfmaq_f64(acc0, vld1q_f64(a + i), vld1q_f64(b + i));
        acc1 = vfmaq_f64(acc1, vld1q_f64(a + i + 2), vld1q_f64(b + i + 2));
    }
    double s = vaddvq_f64(vaddq_f64(acc0, acc1));
    for (; i < n; ++i) s += a[i] * b[i];
    return s;
}

void matvec(const double* mat, const double* v, double* out, std::size_t rows, std::size_t cols) {
    for (std::size_t r = 0; r < rows; ++r) out[r] = dot(mat + r * cols, v, cols);
}

void exp_euler(const double* decay, const double* x, const double* weight, const double* drive,
               const double* noise, double* out, std::size_t n) {
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        float64x2_t v = vmulq_f64(vld1q_f64(decay + i), vld1q_f64(x + i));
        v = vfmaq_f64(v, vld1q_f64(weight + i), vld1q_f64(drive + i));
        if (noise) v = vaddq_f64(v, vld1q_f64(noise + i));
        vst1q_f64(out + i, v);
    }
    for (; i < n; ++i) {
        double v = decay[i] * x[i] + weight[i] * drive[i];
        if (noise) v += noise[i];
        out[i] = v;
    }
}

void axpy(double s, const double* x, double* out, std::size_t n) {
    const float64x2_t sv = vdupq_n_f64(s);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) vst1q_f64(out + i, vfmaq_f64(vld1q_f64(out + i), sv, vld1q_f64(x + i)));
    for (; i < n; ++i) out[i] += s * x[i];
}

}  // namespace neon

const KernelTable* neon_kernels() {
    static const KernelTable table{"neon", neon::dot, neon::matvec, neon::exp_euler, neon::axpy};
    return &table;
}
#else
const KernelTable* neon_kernels() { return nullptr; }
#endif

}  // namespace msbl::simd
