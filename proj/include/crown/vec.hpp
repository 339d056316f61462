#pragma once

#include <array>
#include <cassert>
#include <cmath>
#include <cstddef>

namespace crown {

// Point in R^N for modest N (the constructions here live in 5 <= N <= 12).
// Fixed capacity avoids heap traffic in Monte Carlo inner loops.
struct Vec {
    static constexpr int max_dim = 12;

    std::array<double, max_dim> c{};
    int n = 0;

    Vec() = default;
    explicit Vec(int dim) : n(dim) { assert(dim >= 1 && dim <= max_dim); }

    double& operator[](int i) { return c[static_cast<std::size_t>(i)]; }
    double operator[](int i) const { return c[static_cast<std::size_t>(i)]; }
    int dim() const { return n; }

    Vec& operator+=(const Vec& o) {
        for (int i = 0; i < n; ++i) c[i] += o.c[i];
        return *this;
    }
    Vec& operator-=(const Vec& o) {
        for (int i = 0; i < n; ++i) c[i] -= o.c[i];
        return *this;
    }
    Vec& operator*=(double t) {
        for (int i = 0; i < n; ++i) c[i] *= t;
        return *this;
    }

    friend Vec operator+(Vec a, const Vec& b) { return a += b; }
    friend Vec operator-(Vec a, const Vec& b) { return a -= b; }
    friend Vec operator*(double t, Vec a) { return a *= t; }

    double norm2() const {
        double s = 0;
        for (int i = 0; i < n; ++i) s += c[i] * c[i];
        return s;
    }
    double norm() const { return std::sqrt(norm2()); }
};

inline double dot(const Vec& a, const Vec& b) {
    double s = 0;
    for (int i = 0; i < a.n; ++i) s += a[i] * b[i];
    return s;
}

inline double dist(const Vec& a, const Vec& b) {
    double s = 0;
    for (int i = 0; i < a.n; ++i) {
        double d = a[i] - b[i];
        s += d * d;
    }
    return std::sqrt(s);
}

}  // namespace crown
