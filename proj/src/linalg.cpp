#include "morphopt/linalg.hpp"

#include <algorithm>
#include <cmath>

#include "morphopt/kernels.hpp"

namespace morphopt::linalg {

double dot(const double* x, const double* y, std::size_t n) {
    return kernels::table().dot(x, y, n);
}
double sumsq(const double* x, std::size_t n) { return kernels::table().sumsq(x, n); }
double sumsq_diff(const double* x, const double* y, std::size_t n) {
    return kernels::table().sumsq_diff(x, y, n);
}
void axpy(double a, const double* x, double* y, std::size_t n) {
    kernels::table().axpy(a, x, y, n);
}

void gemv(const Mat& A, const double* x, double* y) {
    const auto& k = kernels::table();
    for (int r = 0; r < A.rows; ++r) y[r] = k.dot(A.row(r), x, static_cast<std::size_t>(A.cols));
}

void gemv_t_add(const Mat& A, const double* x, double* y) {
    const auto& k = kernels::table();
    for (int r = 0; r < A.rows; ++r) k.axpy(x[r], A.row(r), y, static_cast<std::size_t>(A.cols));
}

void ger(Mat& A, double alpha, const double* x, const double* y) {
    const auto& k = kernels::table();
    for (int r = 0; r < A.rows; ++r) k.axpy(alpha * x[r], y, A.row(r), static_cast<std::size_t>(A.cols));
}

bool cholesky_solve(Mat A, const double* b, double* x) {
    const int n = A.rows;
    // factor A = L Lᵀ in the lower triangle
    for (int j = 0; j < n; ++j) {
        double d = A(j, j);
        for (int k = 0; k < j; ++k) d -= A(j, k) * A(j, k);
        if (d <= 0.0 || !std::isfinite(d)) return false;
        const double ljj = std::sqrt(d);
        A(j, j) = ljj;
        for (int i = j + 1; i < n; ++i) {
            double s = A(i, j);
            for (int k = 0; k < j; ++k) s -= A(i, k) * A(j, k);
            A(i, j) = s / ljj;
        }
    }
    // forward substitution L y = b
    for (int i = 0; i < n; ++i) {
        double s = b[i];
        for (int k = 0; k < i; ++k) s -= A(i, k) * x[k];
        x[i] = s / A(i, i);
    }
    // back substitution Lᵀ x = y
    for (int i = n - 1; i >= 0; --i) {
        double s = x[i];
        for (int k = i + 1; k < n; ++k) s -= A(k, i) * x[k];
        x[i] = s / A(i, i);
    }
    return true;
}

namespace {

Vec3 any_orthogonal(const Vec3& u) {
    const Vec3 cand = std::abs(u.x) < 0.9 ? Vec3{1, 0, 0} : Vec3{0, 1, 0};
    return u.cross(cand).normalized();
}

}  // namespace

// One-sided Jacobi: orthogonalize the columns of M by plane rotations
// accumulated into V; column norms become the singular values.
Svd3 svd3(const Mat3& M) {
    Mat3 A = M;
    Mat3 V = Mat3::identity();

    for (int sweep = 0; sweep < 60; ++sweep) {
        bool rotated = false;
        for (int p = 0; p < 2; ++p) {
            for (int q = p + 1; q < 3; ++q) {
                const Vec3 cp = A.col(p), cq = A.col(q);
                const double app = cp.dot(cp);
                const double aqq = cq.dot(cq);
                const double apq = cp.dot(cq);
                if (std::abs(apq) <= 1e-15 * std::sqrt(app * aqq) || apq == 0.0) continue;
                rotated = true;
                const double zeta = (aqq - app) / (2.0 * apq);
                const double t = (zeta >= 0.0)
                                     ? 1.0 / (zeta + std::sqrt(1.0 + zeta * zeta))
                                     : 1.0 / (zeta - std::sqrt(1.0 + zeta * zeta));
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double s = c * t;
                for (int k = 0; k < 3; ++k) {
                    const double akp = A(k, p), akq = A(k, q);
                    A(k, p) = c * akp - s * akq;
                    A(k, q) = s * akp + c * akq;
                    const double vkp = V(k, p), vkq = V(k, q);
                    V(k, p) = c * vkp - s * vkq;
                    V(k, q) = s * vkp + c * vkq;
                }
            }
        }
        if (!rotated) break;
    }

    // sort columns by descending norm
    std::array<int, 3> idx = {0, 1, 2};
    std::array<double, 3> norms = {A.col(0).norm(), A.col(1).norm(), A.col(2).norm()};
    std::sort(idx.begin(), idx.end(), [&](int i, int j) {
        return norms[static_cast<std::size_t>(i)] > norms[static_cast<std::size_t>(j)];
    });

    Svd3 out;
    Vec3 sigma{norms[static_cast<std::size_t>(idx[0])], norms[static_cast<std::size_t>(idx[1])],
               norms[static_cast<std::size_t>(idx[2])]};
    out.sigma = sigma;
    Mat3 Vs, U = Mat3::identity();
    const double tol = 1e-13 * std::max(sigma.x, 1e-300);
    int rank = 0;
    for (int j = 0; j < 3; ++j) {
        Vs.set_col(j, V.col(idx[j]));
        if (sigma[j] > tol) {
            U.set_col(j, A.col(idx[j]) / sigma[j]);
            ++rank;
        }
    }
    if (rank == 2) {
        U.set_col(2, U.col(0).cross(U.col(1)).normalized());
    } else if (rank == 1) {
        const Vec3 u1 = any_orthogonal(U.col(0));
        U.set_col(1, u1);
        U.set_col(2, U.col(0).cross(u1).normalized());
    } else if (rank == 0) {
        U = Mat3::identity();
    }
    out.U = U;
    out.V = Vs;
    return out;
}

}  // namespace morphopt::linalg
