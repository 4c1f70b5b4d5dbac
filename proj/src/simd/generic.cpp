#include "msbl/simd.hpp"

namespace msbl::simd {
namespace generic {

double dot(const double* a, const double* b, std::size_t n) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
    return s;
}

void matvec(const double* mat, const double* v, double* out, std::size_t rows, std::size_t cols) {
    for (std::size_t r = 0; r < rows; ++r) out[r] = dot(mat + r * cols, v, cols);
}

void exp_euler(const double* decay, const double* x, const double* weight, const double* drive,
               const double* noise, double* out, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) {
        double v = decay[i] * x[i] + weight[i] * drive[i];
        if (noise) v += noise[i];
        out[i] = v;
    }
}

void axpy(double s, const double* x, double* out, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) out[i] += s * x[i];
}

}  // namespace generic

const KernelTable& generic_kernels() {
    static const KernelTable table{"generic", generic::dot, generic::matvec, generic::exp_euler,
                                   generic::axpy};
    return table;
}

}  // namespace msbl::simd
