#pragma once

#include <cmath>
#include <ostream>

namespace deltaforge {

/**
 * @brief Hyper-dual number a + b·ε₁ + c·ε₂ + d·ε₁ε₂ with ε₁² = ε₂² = 0.
 *
 * Seeding ε₁ along x_i and ε₂ along x_j and evaluating f gives
 * value = f, d1 = ∂_i f, d2 = ∂_j f and d12 = ∂_i∂_j f with no truncation
 * error. For a scalar function g applied to a hyper-dual argument,
 *
 *   g(x) = g(a) + g'(a)·b ε₁ + g'(a)·c ε₂ + (g'(a)·d + g''(a)·b·c) ε₁ε₂,
 *
 * which is what `apply` implements; every elementary function below only
 * supplies (g, g', g'').
 */
template <typename T>
struct HyperDual {
    T value{};
    T d1{};
    T d2{};
    T d12{};

    constexpr HyperDual() = default;
    constexpr HyperDual(T v) : value(v) {} // NOLINT: implicit lift of constants
    constexpr HyperDual(T v, T e1, T e2, T e12) : value(v), d1(e1), d2(e2), d12(e12) {}

    static constexpr HyperDual variable(T v, bool first, bool second) {
        return {v, first ? T(1) : T(0), second ? T(1) : T(0), T(0)};
    }

    constexpr bool is_constant() const { return d1 == T(0) && d2 == T(0) && d12 == T(0); }

    constexpr HyperDual& operator+=(const HyperDual& o) {
        value += o.value;
        d1 += o.d1;
        d2 += o.d2;
        d12 += o.d12;
        return *this;
    }
    constexpr HyperDual& operator-=(const HyperDual& o) {
        value -= o.value;
        d1 -= o.d1;
        d2 -= o.d2;
        d12 -= o.d12;
        return *this;
    }
    constexpr HyperDual& operator*=(const HyperDual& o) { return *this = *this * o; }
    constexpr HyperDual& operator/=(const HyperDual& o) { return *this = *this / o; }

    friend constexpr HyperDual operator+(HyperDual a, const HyperDual& b) { return a += b; }
    friend constexpr HyperDual operator-(HyperDual a, const HyperDual& b) { return a -= b; }
    friend constexpr HyperDual operator-(const HyperDual& a) {
        return {-a.value, -a.d1, -a.d2, -a.d12};
    }
    friend constexpr HyperDual operator*(const HyperDual& a, const HyperDual& b) {
        return {a.value * b.value, a.d1 * b.value + a.value * b.d1,
                a.d2 * b.value + a.value * b.d2,
                a.d12 * b.value + a.d1 * b.d2 + a.d2 * b.d1 + a.value * b.d12};
    }
    friend constexpr HyperDual operator/(const HyperDual& a, const HyperDual& b) {
        const T q = a.value / b.value;
        const T q1 = (a.d1 - q * b.d1) / b.value;
        const T q2 = (a.d2 - q * b.d2) / b.value;
        return {q, q1, q2, (a.d12 - q * b.d12 - q1 * b.d2 - q2 * b.d1) / b.value};
    }

    friend std::ostream& operator<<(std::ostream& os, const HyperDual& x) {
        return os << '(' << x.value << ", " << x.d1 << ", " << x.d2 << ", " << x.d12 << ')';
    }
};

template <typename T>
constexpr HyperDual<T> apply(const HyperDual<T>& x, T g, T dg, T d2g) {
    return {g, dg * x.d1, dg * x.d2, dg * x.d12 + d2g * x.d1 * x.d2};
}

template <typename T>
constexpr HyperDual<T> reciprocal(const HyperDual<T>& x) {
    const T inv = T(1) / x.value;
    return apply(x, inv, -inv * inv, T(2) * inv * inv * inv);
}

template <typename T>
HyperDual<T> sin(const HyperDual<T>& x) {
    using std::sin, std::cos;
    const T s = sin(x.value);
    return apply(x, s, cos(x.value), -s);
}

template <typename T>
HyperDual<T> cos(const HyperDual<T>& x) {
    using std::sin, std::cos;
    const T c = cos(x.value);
    return apply(x, c, -sin(x.value), -c);
}

template <typename T>
HyperDual<T> tan(const HyperDual<T>& x) {
    using std::tan;
    const T t = tan(x.value);
    const T sec2 = T(1) + t * t;
    return apply(x, t, sec2, T(2) * t * sec2);
}

template <typename T>
HyperDual<T> sinh(const HyperDual<T>& x) {
    using std::sinh, std::cosh;
    const T s = sinh(x.value);
    return apply(x, s, cosh(x.value), s);
}

template <typename T>
HyperDual<T> cosh(const HyperDual<T>& x) {
    using std::sinh, std::cosh;
    const T c = cosh(x.value);
    return apply(x, c, sinh(x.value), c);
}

template <typename T>
HyperDual<T> tanh(const HyperDual<T>& x) {
    using std::tanh;
    const T t = tanh(x.value);
    const T sech2 = T(1) - t * t;
    return apply(x, t, sech2, T(-2) * t * sech2);
}

template <typename T>
HyperDual<T> exp(const HyperDual<T>& x) {
    using std::exp;
    const T e = exp(x.value);
    return apply(x, e, e, e);
}

template <typename T>
HyperDual<T> log(const HyperDual<T>& x) {
    using std::log;
    const T inv = T(1) / x.value;
    return apply(x, log(x.value), inv, -inv * inv);
}

template <typename T>
HyperDual<T> sqrt(const HyperDual<T>& x) {
    using std::sqrt;
    const T r = sqrt(x.value);
    const T dr = T(0.5) / r;
    return apply(x, r, dr, -dr / (T(2) * x.value));
}

/// x^p for a constant real exponent. Negative bases are allowed when p is an
/// integer (std::pow semantics).
template <typename T>
HyperDual<T> pow(const HyperDual<T>& x, T p) {
    using std::pow;
    if (p == T(0)) return HyperDual<T>(T(1));
    if (p == T(1)) return x;
    if (p == T(2)) return x * x;
    const T g = pow(x.value, p);
    const T dg = p * pow(x.value, p - T(1));
    const T d2g = p * (p - T(1)) * pow(x.value, p - T(2));
    return apply(x, g, dg, d2g);
}

/// General x^y; falls back to the constant-exponent rule when y carries no
/// derivative part.
template <typename T>
HyperDual<T> pow(const HyperDual<T>& x, const HyperDual<T>& y) {
    if (y.is_constant()) return pow(x, y.value);
    return exp(y * log(x));
}

template <typename T>
bool isfinite(const HyperDual<T>& x) {
    using std::isfinite;
    return isfinite(x.value) && isfinite(x.d1) && isfinite(x.d2) && isfinite(x.d12);
}

using HyperDuald = HyperDual<double>;

} // namespace deltaforge
