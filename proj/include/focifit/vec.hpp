#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <ostream>

namespace focifit {

inline constexpr double kPi = 3.14159265358979323846;

/// Small fixed-size vector for 2-D / 3-D points, foci and gradients.
template <int N>
struct Vec {
    static_assert(N == 2 || N == 3, "only 2-D and 3-D are supported");

    std::array<double, N> v{};

    constexpr Vec() = default;
    constexpr Vec(double x, double y)
        requires(N == 2)
        : v{x, y} {}
    constexpr Vec(double x, double y, double z)
        requires(N == 3)
        : v{x, y, z} {}

    double& operator[](int i) { return v[static_cast<std::size_t>(i)]; }
    double operator[](int i) const { return v[static_cast<std::size_t>(i)]; }

    Vec& operator+=(const Vec& o) {
        for (int i = 0; i < N; ++i) v[i] += o.v[i];
        return *this;
    }
    Vec& operator-=(const Vec& o) {
        for (int i = 0; i < N; ++i) v[i] -= o.v[i];
        return *this;
    }
    Vec& operator*=(double s) {
        for (double& x : v) x *= s;
        return *this;
    }

    friend Vec operator+(Vec a, const Vec& b) { return a += b; }
    friend Vec operator-(Vec a, const Vec& b) { return a -= b; }
    friend Vec operator*(Vec a, double s) { return a *= s; }
    friend Vec operator*(double s, Vec a) { return a *= s; }
    friend Vec operator/(Vec a, double s) { return a *= (1.0 / s); }
    friend Vec operator-(Vec a) { return a *= -1.0; }

    friend bool operator==(const Vec& a, const Vec& b) { return a.v == b.v; }
};

using Vec2 = Vec<2>;
using Vec3 = Vec<3>;

/// Data points are plain coordinate vectors.
using Point2 = Vec2;
using Point3 = Vec3;

template <int N>
double dot(const Vec<N>& a, const Vec<N>& b) {
    double s = 0.0;
    for (int i = 0; i < N; ++i) s += a[i] * b[i];
    return s;
}

template <int N>
double norm_squared(const Vec<N>& a) {
    return dot(a, a);
}

template <int N>
double norm(const Vec<N>& a) {
    return std::sqrt(norm_squared(a));
}

template <int N>
Vec<N> normalized(const Vec<N>& a) {
    return a / norm(a);
}

inline Vec3 cross(const Vec3& a, const Vec3& b) {
    return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2],
            a[0] * b[1] - a[1] * b[0]};
}

template <int N>
bool is_finite(const Vec<N>& a) {
    for (double x : a.v)
        if (!std::isfinite(x)) return false;
    return true;
}

template <int N>
std::ostream& operator<<(std::ostream& os, const Vec<N>& a) {
    os << '(';
    for (int i = 0; i < N; ++i) os << (i ? ", " : "") << a[i];
    return os << ')';
}

}  // namespace focifit
