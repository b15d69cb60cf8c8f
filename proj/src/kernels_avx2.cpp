#include "morphopt/kernels.hpp"

#if defined(__x86_64__) || defined(_M_X64)

#include <immintrin.h>

#include <cmath>

// AVX2 kernels. This translation unit is compiled with -mavx2 and is only
// reached after a runtime cpuid check in the dispatcher. Reductions keep the
// four lane sums of one __m256d accumulator and combine them in the same
// (s0+s1)+(s2+s3) order as the scalar reference; mul and add stay separate
// so results match the scalar backend exactly.

namespace morphopt::kernels {
namespace {

inline double combine_lanes(__m256d acc) {
    alignas(32) double lane[4];
    _mm256_store_pd(lane, acc);
    return (lane[0] + lane[1]) + (lane[2] + lane[3]);
}

double dot_avx2(const double* x, const double* y, std::size_t n) {
    __m256d acc = _mm256_setzero_pd();
    const std::size_t n4 = n - (n % 4);
    for (std::size_t i = 0; i < n4; i += 4) {
        const __m256d a = _mm256_loadu_pd(x + i);
        const __m256d b = _mm256_loadu_pd(y + i);
        acc = _mm256_add_pd(acc, _mm256_mul_pd(a, b));
    }
    double sum = combine_lanes(acc);
    for (std::size_t i = n4; i < n; ++i) sum += x[i] * y[i];
    return sum;
}

double sumsq_avx2(const double* x, std::size_t n) {
    __m256d acc = _mm256_setzero_pd();
    const std::size_t n4 = n - (n % 4);
    for (std::size_t i = 0; i < n4; i += 4) {
        const __m256d a = _mm256_loadu_pd(x + i);
        acc = _mm256_add_pd(acc, _mm256_mul_pd(a, a));
    }
    double sum = combine_lanes(acc);
    for (std::size_t i = n4; i < n; ++i) sum += x[i] * x[i];
    return sum;
}

double sumsq_diff_avx2(const double* x, const double* y, std::size_t n) {
    __m256d acc = _mm256_setzero_pd();
    const std::size_t n4 = n - (n % 4);
    for (std::size_t i = 0; i < n4; i += 4) {
        const __m256d d = _mm256_sub_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i));
        acc = _mm256_add_pd(acc, _mm256_mul_pd(d, d));
    }
    double sum = combine_lanes(acc);
    for (std::size_t i = n4; i < n; ++i) {
        const double d = x[i] - y[i];
        sum += d * d;
    }
    return sum;
}

void axpy_avx2(double a, const double* x, double* y, std::size_t n) {
    const __m256d va = _mm256_set1_pd(a);
    const std::size_t n4 = n - (n % 4);
    for (std::size_t i = 0; i < n4; i += 4) {
        const __m256d xv = _mm256_loadu_pd(x + i);
        const __m256d yv = _mm256_loadu_pd(y + i);
        _mm256_storeu_pd(y + i, _mm256_add_pd(yv, _mm256_mul_pd(va, xv)));
    }
    for (std::size_t i = n4; i < n; ++i) y[i] += a * x[i];
}

void scale_avx2(double a, double* x, std::size_t n) {
    const __m256d va = _mm256_set1_pd(a);
    const std::size_t n4 = n - (n % 4);
    for (std::size_t i = 0; i < n4; i += 4) {
        _mm256_storeu_pd(x + i, _mm256_mul_pd(_mm256_loadu_pd(x + i), va));
    }
    for (std::size_t i = n4; i < n; ++i) x[i] *= a;
}

void hadamard_avx2(const double* x, const double* y, double* out, std::size_t n) {
    const std::size_t n4 = n - (n % 4);
    for (std::size_t i = 0; i < n4; i += 4) {
        _mm256_storeu_pd(out + i, _mm256_mul_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
    }
    for (std::size_t i = n4; i < n; ++i) out[i] = x[i] * y[i];
}

void dtanh_mul_avx2(const double* h, const double* v, double* out, std::size_t n) {
    const __m256d one = _mm256_set1_pd(1.0);
    const std::size_t n4 = n - (n % 4);
    for (std::size_t i = 0; i < n4; i += 4) {
        const __m256d hv = _mm256_loadu_pd(h + i);
        const __m256d d = _mm256_sub_pd(one, _mm256_mul_pd(hv, hv));
        _mm256_storeu_pd(out + i, _mm256_mul_pd(d, _mm256_loadu_pd(v + i)));
    }
    for (std::size_t i = n4; i < n; ++i) out[i] = (1.0 - h[i] * h[i]) * v[i];
}

void adam_step_avx2(double* p, const double* g, double* m, double* v, std::size_t n,
                    double lr, double beta1, double beta2, double eps, double c1, double c2) {
    const __m256d vb1 = _mm256_set1_pd(beta1);
    const __m256d vb1c = _mm256_set1_pd(1.0 - beta1);
    const __m256d vb2 = _mm256_set1_pd(beta2);
    const __m256d vb2c = _mm256_set1_pd(1.0 - beta2);
    const __m256d vlr = _mm256_set1_pd(lr);
    const __m256d veps = _mm256_set1_pd(eps);
    const __m256d vc1 = _mm256_set1_pd(c1);
    const __m256d vc2 = _mm256_set1_pd(c2);
    const std::size_t n4 = n - (n % 4);
    for (std::size_t i = 0; i < n4; i += 4) {
        const __m256d gv = _mm256_loadu_pd(g + i);
        __m256d mv = _mm256_loadu_pd(m + i);
        __m256d vv = _mm256_loadu_pd(v + i);
        mv = _mm256_add_pd(_mm256_mul_pd(vb1, mv), _mm256_mul_pd(vb1c, gv));
        vv = _mm256_add_pd(_mm256_mul_pd(vb2, vv), _mm256_mul_pd(vb2c, _mm256_mul_pd(gv, gv)));
        _mm256_storeu_pd(m + i, mv);
        _mm256_storeu_pd(v + i, vv);
        const __m256d mhat = _mm256_div_pd(mv, vc1);
        const __m256d denom = _mm256_add_pd(_mm256_sqrt_pd(_mm256_div_pd(vv, vc2)), veps);
        const __m256d step = _mm256_mul_pd(vlr, _mm256_div_pd(mhat, denom));
        _mm256_storeu_pd(p + i, _mm256_sub_pd(_mm256_loadu_pd(p + i), step));
    }
    for (std::size_t i = n4; i < n; ++i) {
        m[i] = beta1 * m[i] + (1.0 - beta1) * g[i];
        v[i] = beta2 * v[i] + (1.0 - beta2) * (g[i] * g[i]);
        p[i] -= lr * ((m[i] / c1) / (std::sqrt(v[i] / c2) + eps));
    }
}

}  // namespace

const KernelTable& detail::avx2_table() {
    static const KernelTable t = {
        "avx2",       dot_avx2,       sumsq_avx2,     sumsq_diff_avx2,
        axpy_avx2,    scale_avx2,     hadamard_avx2,  dtanh_mul_avx2,
        adam_step_avx2,
    };
    return t;
}

}  // namespace morphopt::kernels

#endif  // x86_64
