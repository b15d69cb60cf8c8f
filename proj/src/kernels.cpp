#include "morphopt/kernels.hpp"

#include <cstdlib>
#include <cstring>

#include "morphopt/errors.hpp"

namespace morphopt::kernels {
namespace {

bool cpu_has_avx2() {
#if defined(__x86_64__) || defined(_M_X64)
    return __builtin_cpu_supports("avx2") != 0;
#else
    return false;
#endif
}

Backend pick_default() {
    if (const char* env = std::getenv("MORPHOPT_KERNELS")) {
        if (std::strcmp(env, "scalar") == 0) return Backend::scalar;
        if (std::strcmp(env, "avx2") == 0 && cpu_has_avx2()) return Backend::avx2;
    }
    return cpu_has_avx2() ? Backend::avx2 : Backend::scalar;
}

Backend& current() {
    static Backend b = pick_default();
    return b;
}

}  // namespace

bool available(Backend b) {
    switch (b) {
        case Backend::scalar: return true;
        case Backend::avx2: return cpu_has_avx2();
    }
    return false;
}

void set_backend(Backend b) {
    if (!available(b)) throw Error("kernel backend not available on this host");
    current() = b;
}

Backend active_backend() { return current(); }

const KernelTable& table() {
#if defined(__x86_64__) || defined(_M_X64)
    if (current() == Backend::avx2) return detail::avx2_table();
#endif
    return detail::scalar_table();
}

std::string backend_name() { return table().name; }

}  // namespace morphopt::kernels
