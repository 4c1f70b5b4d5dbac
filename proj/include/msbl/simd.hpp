#pragma once

#include <cstddef>
#include <string_view>

// Data-parallel inner loops used by the spectral layer. Each instruction set
// provides the same table of kernels; the active table is chosen once at
// startup from the CPU's capabilities (override with MSBL_SIMD=generic|avx2|neon).

namespace msbl::simd {

struct KernelTable {
    std::string_view name;

    // sum_i a[i] * b[i]
    double (*dot)(const double* a, const double* b, std::size_t n);

    // out[r] = sum_c mat[r * cols + c] * v[c], row-major
    void (*matvec)(const double* mat, const double* v, double* out, std::size_t rows,
                   std::size_t cols);

    // out[i] = decay[i] * x[i] + weight[i] * drive[i] + noise[i]
    // (noise may be null)
    void (*exp_euler)(const double* decay, const double* x, const double* weight,
                      const double* drive, const double* noise, double* out, std::size_t n);

    // out[i] += s * x[i]
    void (*axpy)(double s, const double* x, double* out, std::size_t n);
};

const KernelTable& generic_kernels();

// Null when the instruction set is not compiled into this binary.
const KernelTable* avx2_kernels();
const KernelTable* neon_kernels();

// Whether the running CPU can execute the given table.
bool cpu_supports_avx2();

const KernelTable& active();

// Forces a specific table (tests, benchmarks). Returns false if unavailable.
bool select(std::string_view name);

}  // namespace msbl::simd
