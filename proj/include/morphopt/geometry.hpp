#pragma once

#include <array>
#include <cmath>

namespace morphopt {

struct Vec3 {
    double x = 0.0, y = 0.0, z = 0.0;

    Vec3() = default;
    Vec3(double x_, double y_, double z_) : x(x_), y(y_), z(z_) {}

    Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
    Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
    Vec3 operator*(double k) const { return {x * k, y * k, z * k}; }
    Vec3 operator/(double k) const { return {x / k, y / k, z / k}; }
    Vec3 operator-() const { return {-x, -y, -z}; }
    Vec3& operator+=(const Vec3& o) { x += o.x; y += o.y; z += o.z; return *this; }
    Vec3& operator-=(const Vec3& o) { x -= o.x; y -= o.y; z -= o.z; return *this; }

    double dot(const Vec3& o) const { return x * o.x + y * o.y + z * o.z; }
    Vec3 cross(const Vec3& o) const {
        return {y * o.z - z * o.y, z * o.x - x * o.z, x * o.y - y * o.x};
    }
    double norm() const { return std::sqrt(dot(*this)); }
    double norm2() const { return dot(*this); }
    Vec3 normalized() const {
        const double n = norm();
        return n > 0.0 ? *this / n : Vec3{};
    }
    bool finite() const {
        return std::isfinite(x) && std::isfinite(y) && std::isfinite(z);
    }
    double operator[](int i) const { return i == 0 ? x : (i == 1 ? y : z); }
};

inline Vec3 operator*(double k, const Vec3& v) { return v * k; }

// Row-major 3x3 matrix.
struct Mat3 {
    std::array<double, 9> a{};

    static Mat3 identity() {
        Mat3 m;
        m.a = {1, 0, 0, 0, 1, 0, 0, 0, 1};
        return m;
    }
    static Mat3 zero() { return Mat3{}; }

    double& operator()(int r, int c) { return a[3 * r + c]; }
    double operator()(int r, int c) const { return a[3 * r + c]; }

    Vec3 operator*(const Vec3& v) const {
        return {a[0] * v.x + a[1] * v.y + a[2] * v.z,
                a[3] * v.x + a[4] * v.y + a[5] * v.z,
                a[6] * v.x + a[7] * v.y + a[8] * v.z};
    }
    Mat3 operator*(const Mat3& o) const {
        Mat3 r;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) {
                double s = 0.0;
                for (int k = 0; k < 3; ++k) s += (*this)(i, k) * o(k, j);
                r(i, j) = s;
            }
        return r;
    }
    Mat3 operator+(const Mat3& o) const {
        Mat3 r;
        for (int i = 0; i < 9; ++i) r.a[i] = a[i] + o.a[i];
        return r;
    }
    Mat3 operator*(double k) const {
        Mat3 r;
        for (int i = 0; i < 9; ++i) r.a[i] = a[i] * k;
        return r;
    }
    Mat3 transposed() const {
        Mat3 r;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) r(i, j) = (*this)(j, i);
        return r;
    }
    double det() const {
        return a[0] * (a[4] * a[8] - a[5] * a[7]) - a[1] * (a[3] * a[8] - a[5] * a[6]) +
               a[2] * (a[3] * a[7] - a[4] * a[6]);
    }
    Vec3 col(int j) const { return {a[j], a[3 + j], a[6 + j]}; }
    void set_col(int j, const Vec3& v) {
        a[j] = v.x;
        a[3 + j] = v.y;
        a[6 + j] = v.z;
    }
};

// Skew-symmetric matrix [w] with [w] v = w × v.
inline Mat3 skew(const Vec3& w) {
    Mat3 m;
    m.a = {0, -w.z, w.y, w.z, 0, -w.x, -w.y, w.x, 0};
    return m;
}

// Rodrigues rotation: exp([w] theta) for unit w.
inline Mat3 rodrigues(const Vec3& w, double theta) {
    const Mat3 K = skew(w);
    const Mat3 K2 = K * K;
    return Mat3::identity() + K * std::sin(theta) + K2 * (1.0 - std::cos(theta));
}

// Rigid transform T(x) = R x + p.
struct Transform {
    Mat3 R = Mat3::identity();
    Vec3 p;

    static Transform identity() { return {}; }

    Vec3 apply(const Vec3& v) const { return R * v + p; }
    Vec3 rotate(const Vec3& v) const { return R * v; }
    Transform operator*(const Transform& o) const { return {R * o.R, R * o.p + p}; }
    static Transform translation(const Vec3& t) { return {Mat3::identity(), t}; }
    static Transform rotation(const Mat3& R) { return {R, Vec3{}}; }
};

}  // namespace morphopt
