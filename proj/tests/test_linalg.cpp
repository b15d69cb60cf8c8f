#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "morphopt/linalg.hpp"
#include "morphopt/rng.hpp"

using namespace morphopt;

namespace {

Mat random_mat(Rng& rng, int r, int c, double scale = 1.0) {
    Mat m(r, c);
    for (auto& v : m.a) v = rng.uniform(-scale, scale);
    return m;
}

Mat3 random_mat3(Rng& rng, double scale = 1.0) {
    Mat3 m;
    for (auto& v : m.a) v = rng.uniform(-scale, scale);
    return m;
}

double max_abs_diff(const Mat3& a, const Mat3& b) {
    double d = 0.0;
    for (int i = 0; i < 9; ++i) d = std::max(d, std::abs(a.a[i] - b.a[i]));
    return d;
}

}  // namespace

TEST_CASE("gemv, gemv_t_add and ger match naive loops") {
    Rng rng(3);
    const Mat A = random_mat(rng, 9, 13);
    Vec x(13), y(9), naive(9, 0.0);
    for (auto& v : x) v = rng.uniform(-1, 1);
    linalg::gemv(A, x.data(), y.data());
    for (int r = 0; r < 9; ++r)
        for (int c = 0; c < 13; ++c) naive[static_cast<std::size_t>(r)] += A(r, c) * x[static_cast<std::size_t>(c)];
    for (int r = 0; r < 9; ++r) CHECK(y[static_cast<std::size_t>(r)] == doctest::Approx(naive[static_cast<std::size_t>(r)]).epsilon(1e-13));

    Vec yt(13, 0.5), naive_t(13, 0.5);
    Vec w(9);
    for (auto& v : w) v = rng.uniform(-1, 1);
    linalg::gemv_t_add(A, w.data(), yt.data());
    for (int r = 0; r < 9; ++r)
        for (int c = 0; c < 13; ++c) naive_t[static_cast<std::size_t>(c)] += A(r, c) * w[static_cast<std::size_t>(r)];
    for (int c = 0; c < 13; ++c) CHECK(yt[static_cast<std::size_t>(c)] == doctest::Approx(naive_t[static_cast<std::size_t>(c)]).epsilon(1e-13));

    Mat B(9, 13), Bn(9, 13);
    linalg::ger(B, 0.7, w.data(), x.data());
    for (int r = 0; r < 9; ++r)
        for (int c = 0; c < 13; ++c) Bn(r, c) = 0.7 * w[static_cast<std::size_t>(r)] * x[static_cast<std::size_t>(c)];
    for (std::size_t i = 0; i < B.a.size(); ++i) CHECK(B.a[i] == doctest::Approx(Bn.a[i]).epsilon(1e-13));
}

TEST_CASE("cholesky_solve on SPD systems") {
    Rng rng(5);
    for (int trial = 0; trial < 20; ++trial) {
        const int n = 1 + static_cast<int>(rng.uniform_index(12));
        const Mat B = random_mat(rng, n, n);
        Mat A(n, n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                double s = 0.0;
                for (int t = 0; t < n; ++t) s += B(t, i) * B(t, j);
                A(i, j) = s + (i == j ? 0.5 : 0.0);
            }
        Vec b(static_cast<std::size_t>(n)), x(static_cast<std::size_t>(n));
        for (auto& v : b) v = rng.uniform(-1, 1);
        REQUIRE(linalg::cholesky_solve(A, b.data(), x.data()));
        Vec r(static_cast<std::size_t>(n), 0.0);
        linalg::gemv(A, x.data(), r.data());
        for (int i = 0; i < n; ++i) CHECK(r[static_cast<std::size_t>(i)] == doctest::Approx(b[static_cast<std::size_t>(i)]).epsilon(1e-8));
    }
    // not positive definite
    Mat bad(2, 2);
    bad(0, 0) = 0.0;
    Vec b = {1.0, 1.0}, x(2);
    CHECK_FALSE(linalg::cholesky_solve(bad, b.data(), x.data()));
}

TEST_CASE("svd3 reconstructs random matrices") {
    Rng rng(9);
    for (int trial = 0; trial < 200; ++trial) {
        const Mat3 M = random_mat3(rng, 2.0);
        const auto svd = linalg::svd3(M);

        CHECK(svd.sigma.x >= svd.sigma.y);
        CHECK(svd.sigma.y >= svd.sigma.z);
        CHECK(svd.sigma.z >= 0.0);

        Mat3 S = Mat3::zero();
        S(0, 0) = svd.sigma.x;
        S(1, 1) = svd.sigma.y;
        S(2, 2) = svd.sigma.z;
        const Mat3 rec = svd.U * S * svd.V.transposed();
        CHECK(max_abs_diff(rec, M) < 1e-10);

        const Mat3 utu = svd.U.transposed() * svd.U;
        const Mat3 vtv = svd.V.transposed() * svd.V;
        CHECK(max_abs_diff(utu, Mat3::identity()) < 1e-10);
        CHECK(max_abs_diff(vtv, Mat3::identity()) < 1e-10);
    }
}

TEST_CASE("svd3 handles rank deficiency") {
    // rank 1: outer product
    Mat3 M = Mat3::zero();
    const Vec3 u{1, 2, -1}, v{0.5, -1, 2};
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) M(i, j) = u[i] * v[j];
    const auto svd = linalg::svd3(M);
    CHECK(svd.sigma.y < 1e-10);
    Mat3 S = Mat3::zero();
    S(0, 0) = svd.sigma.x;
    S(1, 1) = svd.sigma.y;
    S(2, 2) = svd.sigma.z;
    CHECK(max_abs_diff(svd.U * S * svd.V.transposed(), M) < 1e-10);
    CHECK(max_abs_diff(svd.U.transposed() * svd.U, Mat3::identity()) < 1e-10);

    const auto zero_svd = linalg::svd3(Mat3::zero());
    CHECK(zero_svd.sigma.x == 0.0);
    CHECK(max_abs_diff(zero_svd.U.transposed() * zero_svd.U, Mat3::identity()) < 1e-12);
}

TEST_CASE("rodrigues rotations are orthonormal with unit determinant") {
    Rng rng(13);
    for (int trial = 0; trial < 100; ++trial) {
        const Vec3 axis = Vec3{rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)}.normalized();
        const double theta = rng.uniform(-6.3, 6.3);
        const Mat3 R = rodrigues(axis, theta);
        CHECK(max_abs_diff(R * R.transposed(), Mat3::identity()) < 1e-12);
        CHECK(R.det() == doctest::Approx(1.0).epsilon(1e-12));
        // the axis is fixed
        const Vec3 r = R * axis;
        CHECK((r - axis).norm() < 1e-12);
    }
}
