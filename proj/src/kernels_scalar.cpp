#include "morphopt/kernels.hpp"

#include <cmath>

// Scalar reference kernels. The blocked 4-accumulator form is the semantic
// contract: SIMD backends must reproduce these results bit for bit.

namespace morphopt::kernels {
namespace {

double dot_scalar(const double* x, const double* y, std::size_t n) {
    double acc[4] = {0.0, 0.0, 0.0, 0.0};
    const std::size_t n4 = n - (n % 4);
    for (std::size_t i = 0; i < n4; i += 4) {
        acc[0] += x[i] * y[i];
        acc[1] += x[i + 1] * y[i + 1];
        acc[2] += x[i + 2] * y[i + 2];
        acc[3] += x[i + 3] * y[i + 3];
    }
    double sum = (acc[0] + acc[1]) + (acc[2] + acc[3]);
    for (std::size_t i = n4; i < n; ++i) sum += x[i] * y[i];
    return sum;
}

double sumsq_scalar(const double* x, std::size_t n) {
    double acc[4] = {0.0, 0.0, 0.0, 0.0};
    const std::size_t n4 = n - (n % 4);
    for (std::size_t i = 0; i < n4; i += 4) {
        acc[0] += x[i] * x[i];
        acc[1] += x[i + 1] * x[i + 1];
        acc[2] += x[i + 2] * x[i + 2];
        acc[3] += x[i + 3] * x[i + 3];
    }
    double sum = (acc[0] + acc[1]) + (acc[2] + acc[3]);
    for (std::size_t i = n4; i < n; ++i) sum += x[i] * x[i];
    return sum;
}

double sumsq_diff_scalar(const double* x, const double* y, std::size_t n) {
    double acc[4] = {0.0, 0.0, 0.0, 0.0};
    const std::size_t n4 = n - (n % 4);
    for (std::size_t i = 0; i < n4; i += 4) {
        const double d0 = x[i] - y[i];
        const double d1 = x[i + 1] - y[i + 1];
        const double d2 = x[i + 2] - y[i + 2];
        const double d3 = x[i + 3] - y[i + 3];
        acc[0] += d0 * d0;
        acc[1] += d1 * d1;
        acc[2] += d2 * d2;
        acc[3] += d3 * d3;
    }
    double sum = (acc[0] + acc[1]) + (acc[2] + acc[3]);
    for (std::size_t i = n4; i < n; ++i) {
        const double d = x[i] - y[i];
        sum += d * d;
    }
    return sum;
}

void axpy_scalar(double a, const double* x, double* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

void scale_scalar(double a, double* x, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) x[i] *= a;
}

void hadamard_scalar(const double* x, const double* y, double* out, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) out[i] = x[i] * y[i];
}

void dtanh_mul_scalar(const double* h, const double* v, double* out, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) out[i] = (1.0 - h[i] * h[i]) * v[i];
}

void adam_step_scalar(double* p, const double* g, double* m, double* v, std::size_t n,
                      double lr, double beta1, double beta2, double eps, double c1, double c2) {
    for (std::size_t i = 0; i < n; ++i) {
        m[i] = beta1 * m[i] + (1.0 - beta1) * g[i];
        v[i] = beta2 * v[i] + (1.0 - beta2) * (g[i] * g[i]);
        p[i] -= lr * ((m[i] / c1) / (std::sqrt(v[i] / c2) + eps));
    }
}

}  // namespace

const KernelTable& detail::scalar_table() {
    static const KernelTable t = {
        "scalar",       dot_scalar,       sumsq_scalar,     sumsq_diff_scalar,
        axpy_scalar,    scale_scalar,     hadamard_scalar,  dtanh_mul_scalar,
        adam_step_scalar,
    };
    return t;
}

}  // namespace morphopt::kernels
