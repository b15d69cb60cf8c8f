#pragma once

#include <cstddef>
#include <string>

namespace morphopt::kernels {

// Data-parallel inner-loop primitives behind a runtime-dispatched table.
//
// Every kernel has pinned floating-point semantics so that all backends
// produce bit-identical results:
//   - reductions (dot, sumsq, sumsq_diff) accumulate into four independent
//     lane sums over blocks of four, combine as (s0+s1)+(s2+s3), then fold
//     the tail elements sequentially onto that sum;
//   - elementwise kernels perform the same mul/add per element in order;
//   - no FMA contraction anywhere (the build disables fp-contract and the
//     AVX2 path uses separate mul/add intrinsics).
// Equivalence tests assert exact equality between backends.

enum class Backend { scalar, avx2 };

struct KernelTable {
    const char* name;
    double (*dot)(const double* x, const double* y, std::size_t n);
    double (*sumsq)(const double* x, std::size_t n);
    double (*sumsq_diff)(const double* x, const double* y, std::size_t n);
    // y += a * x
    void (*axpy)(double a, const double* x, double* y, std::size_t n);
    // x *= a
    void (*scale)(double a, double* x, std::size_t n);
    // out = x ⊙ y
    void (*hadamard)(const double* x, const double* y, double* out, std::size_t n);
    // out = (1 - h ⊙ h) ⊙ v   (tanh derivative applied to a tangent)
    void (*dtanh_mul)(const double* h, const double* v, double* out, std::size_t n);
    // Adam update with precomputed bias corrections c1 = 1-b1^t, c2 = 1-b2^t:
    //   m = b1*m + (1-b1)*g;  v = b2*v + (1-b2)*g*g
    //   p -= lr * (m/c1) / (sqrt(v/c2) + eps)
    void (*adam_step)(double* p, const double* g, double* m, double* v, std::size_t n,
                      double lr, double beta1, double beta2, double eps, double c1, double c2);
};

// Active kernel table. Defaults to the best available backend; the
// MORPHOPT_KERNELS environment variable ("scalar" or "avx2") overrides.
const KernelTable& table();

bool available(Backend b);
void set_backend(Backend b);  // throws Error if unavailable
Backend active_backend();
std::string backend_name();

namespace detail {
const KernelTable& scalar_table();
#if defined(__x86_64__) || defined(_M_X64)
const KernelTable& avx2_table();
#endif
}  // namespace detail

}  // namespace morphopt::kernels
