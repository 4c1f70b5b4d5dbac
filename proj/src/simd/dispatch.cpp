#include <atomic>
#include <cstdlib>

#include "msbl/simd.hpp"

namespace msbl::simd {

bool cpu_supports_avx2() {
#if (defined(__x86_64__) || defined(__i386__)) && (defined(__GNUC__) || defined(__clang__))
    __builtin_cpu_init();
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
    return false;
#endif
}

namespace {

const KernelTable* lookup(std::string_view name) {
    if (name == "generic") return &generic_kernels();
    if (name == "avx2") return cpu_supports_avx2() ? avx2_kernels() : nullptr;
    if (name == "neon") return neon_kernels();
    return nullptr;
}

const KernelTable* detect() {
    if (const char* forced = std::getenv("MSBL_SIMD")) {
        if (const KernelTable* t = lookup(forced)) return t;
    }
    if (const KernelTable* t = neon_kernels()) return t;
    if (const KernelTable* t = lookup("avx2")) return t;
    return &generic_kernels();
}

std::atomic<const KernelTable*>& slot() {
    static std::atomic<const KernelTable*> current{detect()};
    return current;
}

}  // namespace

const KernelTable& active() { return *slot().load(std::memory_order_acquire); }

bool select(std::string_view name) {
    const KernelTable* t = lookup(name);
    if (!t) return false;
    slot().store(t, std::memory_order_release);
    return true;
}

}  // namespace msbl::simd
