#pragma once

#include <cstddef>
#include <vector>

#include "morphopt/geometry.hpp"

namespace morphopt {

using Vec = std::vector<double>;

// Dense row-major matrix sized for this project's needs (MLP layers up to
// 120x64, IK normal equations up to ~30x30).
struct Mat {
    int rows = 0, cols = 0;
    Vec a;

    Mat() = default;
    Mat(int r, int c) : rows(r), cols(c), a(static_cast<std::size_t>(r) * c, 0.0) {}

    double* row(int r) { return a.data() + static_cast<std::size_t>(r) * cols; }
    const double* row(int r) const { return a.data() + static_cast<std::size_t>(r) * cols; }
    double& operator()(int r, int c) { return a[static_cast<std::size_t>(r) * cols + c]; }
    double operator()(int r, int c) const { return a[static_cast<std::size_t>(r) * cols + c]; }
    void fill(double v) { a.assign(a.size(), v); }
};

namespace linalg {

// y = A x
void gemv(const Mat& A, const double* x, double* y);
// y += Aᵀ x
void gemv_t_add(const Mat& A, const double* x, double* y);
// A += alpha x yᵀ
void ger(Mat& A, double alpha, const double* x, const double* y);

double dot(const double* x, const double* y, std::size_t n);
double sumsq(const double* x, std::size_t n);
double sumsq_diff(const double* x, const double* y, std::size_t n);
void axpy(double a, const double* x, double* y, std::size_t n);

// Solves (A)x = b in place for symmetric positive definite A via Cholesky.
// Returns false when A is not positive definite.
bool cholesky_solve(Mat A, const double* b, double* x);

// Singular value decomposition of a 3x3 matrix: M = U diag(s) Vᵀ with
// s[0] >= s[1] >= s[2] >= 0 and U, V proper orthonormal up to column signs.
// Robust to rank deficiency (zero singular values get completed columns).
struct Svd3 {
    Mat3 U;
    Vec3 sigma;
    Mat3 V;
};
Svd3 svd3(const Mat3& M);

}  // namespace linalg
}  // namespace morphopt
