#ifndef CONFHYP_SCALAR_HPP
#define CONFHYP_SCALAR_HPP

#include <boost/multiprecision/gmp.hpp>

#include <cmath>
#include <sstream>
#include <stdexcept>
#include <string>

namespace confhyp {

// Exact rational scalar. All identity checks in the engine are run in this
// mode; binary64 exists for finite-difference oracles and the CLI float mode.
using Rational = boost::multiprecision::mpq_rational;
using Integer = boost::multiprecision::mpz_int;

inline Rational rational_from_string(const std::string& s) {
    return Rational(s);
}

inline std::string to_coeff_string(const Rational& q) {
    std::ostringstream os;
    os << q;
    return os.str();
}

inline std::string to_coeff_string(double x) {
    std::ostringstream os;
    os.precision(17);
    os << x;
    return os.str();
}

inline bool scalar_is_zero(const Rational& q) { return q.is_zero(); }
inline bool scalar_is_zero(double x) { return x == 0.0; }

// Exact square root of a rational; requires numerator and denominator to be
// perfect squares. The geometric pipeline only takes square roots of
// quantities normalized so that this holds (e.g. |ds|^2 at the base point).
inline Rational scalar_sqrt(const Rational& q) {
    using boost::multiprecision::numerator;
    using boost::multiprecision::denominator;
    if (q < 0) throw std::domain_error("scalar_sqrt: negative rational");
    Integer n = numerator(q), d = denominator(q);
    Integer rn = sqrt(n), rd = sqrt(d);
    if (rn * rn != n || rd * rd != d)
        throw std::domain_error("scalar_sqrt: not a perfect square; rescale input so the base-point norm is a rational square");
    return Rational(rn, rd);
}

inline double scalar_sqrt(double x) {
    if (x < 0) throw std::domain_error("scalar_sqrt: negative");
    return std::sqrt(x);
}

template <class S>
S scalar_from_rational(const Rational& q);

template <>
inline Rational scalar_from_rational<Rational>(const Rational& q) { return q; }

template <>
inline double scalar_from_rational<double>(const Rational& q) {
    return q.convert_to<double>();
}

// First-order dual number over a base scalar: a + b*eps with eps^2 = 0.
// Used to take exact directional derivatives of the whole pipeline with
// respect to a metric perturbation (the polarization probes).
template <class S>
struct Dual {
    S a{};  // value part
    S b{};  // eps part

    Dual() = default;
    Dual(S a_) : a(std::move(a_)) {}
    Dual(S a_, S b_) : a(std::move(a_)), b(std::move(b_)) {}

    friend Dual operator+(const Dual& x, const Dual& y) { return {x.a + y.a, x.b + y.b}; }
    friend Dual operator-(const Dual& x, const Dual& y) { return {x.a - y.a, x.b - y.b}; }
    friend Dual operator-(const Dual& x) { return {-x.a, -x.b}; }
    friend Dual operator*(const Dual& x, const Dual& y) {
        return {x.a * y.a, x.a * y.b + x.b * y.a};
    }
    friend Dual operator/(const Dual& x, const Dual& y) {
        if (scalar_is_zero(y.a)) throw std::domain_error("Dual: division by nilpotent");
        S inv_a = S(1) / y.a;
        S v = x.a * inv_a;
        return {v, (x.b - v * y.b) * inv_a};
    }
    Dual& operator+=(const Dual& y) { a += y.a; b += y.b; return *this; }
    Dual& operator-=(const Dual& y) { a -= y.a; b -= y.b; return *this; }
    Dual& operator*=(const Dual& y) { *this = *this * y; return *this; }
    Dual& operator/=(const Dual& y) { *this = *this / y; return *this; }
    friend bool operator==(const Dual& x, const Dual& y) { return x.a == y.a && x.b == y.b; }
    friend bool operator<(const Dual& x, const Dual& y) { return x.a < y.a; }  // value order
    friend bool operator>(const Dual& x, const Dual& y) { return x.a > y.a; }
};

template <class S>
bool scalar_is_zero(const Dual<S>& x) { return scalar_is_zero(x.a) && scalar_is_zero(x.b); }

template <class S>
Dual<S> scalar_sqrt(const Dual<S>& x) {
    S r = scalar_sqrt(x.a);
    if (scalar_is_zero(r)) throw std::domain_error("Dual sqrt at zero");
    return {r, x.b / (S(2) * r)};
}

template <class S>
std::string to_coeff_string(const Dual<S>& x) {
    return to_coeff_string(x.a) + " + eps*(" + to_coeff_string(x.b) + ")";
}

// Two independent nilpotents: a + b1*e1 + b2*e2 + b12*e1*e2 with
// e1^2 = e2^2 = 0. The e1*e2 part is the exact bilinear (polarized) response.
template <class S>
struct Dual2 {
    S a{}, b1{}, b2{}, b12{};

    Dual2() = default;
    Dual2(S a_) : a(std::move(a_)) {}
    Dual2(S a_, S b1_, S b2_, S b12_)
        : a(std::move(a_)), b1(std::move(b1_)), b2(std::move(b2_)), b12(std::move(b12_)) {}

    friend Dual2 operator+(const Dual2& x, const Dual2& y) {
        return {x.a + y.a, x.b1 + y.b1, x.b2 + y.b2, x.b12 + y.b12};
    }
    friend Dual2 operator-(const Dual2& x, const Dual2& y) {
        return {x.a - y.a, x.b1 - y.b1, x.b2 - y.b2, x.b12 - y.b12};
    }
    friend Dual2 operator-(const Dual2& x) { return {-x.a, -x.b1, -x.b2, -x.b12}; }
    friend Dual2 operator*(const Dual2& x, const Dual2& y) {
        return {x.a * y.a,
                x.a * y.b1 + x.b1 * y.a,
                x.a * y.b2 + x.b2 * y.a,
                x.a * y.b12 + x.b12 * y.a + x.b1 * y.b2 + x.b2 * y.b1};
    }
    friend Dual2 operator/(const Dual2& x, const Dual2& y) {
        if (scalar_is_zero(y.a)) throw std::domain_error("Dual2: division by nilpotent");
        // y^{-1} = (a - n + n^2/a ...) with n nilpotent; here n^3 = 0 terms survive only in b12.
        S ia = S(1) / y.a;
        Dual2 inv{ia, -y.b1 * ia * ia, -y.b2 * ia * ia,
                  -y.b12 * ia * ia + S(2) * y.b1 * y.b2 * ia * ia * ia};
        return x * inv;
    }
    Dual2& operator+=(const Dual2& y) { *this = *this + y; return *this; }
    Dual2& operator-=(const Dual2& y) { *this = *this - y; return *this; }
    Dual2& operator*=(const Dual2& y) { *this = *this * y; return *this; }
    Dual2& operator/=(const Dual2& y) { *this = *this / y; return *this; }
    friend bool operator==(const Dual2& x, const Dual2& y) {
        return x.a == y.a && x.b1 == y.b1 && x.b2 == y.b2 && x.b12 == y.b12;
    }
    friend bool operator<(const Dual2& x, const Dual2& y) { return x.a < y.a; }
    friend bool operator>(const Dual2& x, const Dual2& y) { return x.a > y.a; }
};

template <class S>
bool scalar_is_zero(const Dual2<S>& x) {
    return scalar_is_zero(x.a) && scalar_is_zero(x.b1) && scalar_is_zero(x.b2) &&
           scalar_is_zero(x.b12);
}

template <class S>
Dual2<S> scalar_sqrt(const Dual2<S>& x) {
    S r = scalar_sqrt(x.a);
    if (scalar_is_zero(r)) throw std::domain_error("Dual2 sqrt at zero");
    S h = S(1) / (S(2) * r);
    // (r + c1 e1 + c2 e2 + c12 e1e2)^2 = x
    S c1 = x.b1 * h, c2 = x.b2 * h;
    return {r, c1, c2, (x.b12 - S(2) * c1 * c2) * h};
}

template <class S>
std::string to_coeff_string(const Dual2<S>& x) {
    return to_coeff_string(x.a) + " + e1*(" + to_coeff_string(x.b1) + ") + e2*(" +
           to_coeff_string(x.b2) + ") + e1e2*(" + to_coeff_string(x.b12) + ")";
}

template <class S>
Dual<S> scalar_from_rational_dual(const Rational& q) = delete;

template <>
inline Dual<Rational> scalar_from_rational<Dual<Rational>>(const Rational& q) {
    return Dual<Rational>(q);
}

template <>
inline Dual2<Rational> scalar_from_rational<Dual2<Rational>>(const Rational& q) {
    return Dual2<Rational>(q);
}

// Equality up to a tolerance; exact scalars ignore the tolerance.
inline bool scalar_close(const Rational& x, const Rational& y, double) { return x == y; }
inline bool scalar_close(double x, double y, double tol) { return std::abs(x - y) <= tol; }
template <class S>
bool scalar_close(const Dual<S>& x, const Dual<S>& y, double tol) {
    return scalar_close(x.a, y.a, tol) && scalar_close(x.b, y.b, tol);
}
template <class S>
bool scalar_close(const Dual2<S>& x, const Dual2<S>& y, double tol) {
    return scalar_close(x.a, y.a, tol) && scalar_close(x.b1, y.b1, tol) &&
           scalar_close(x.b2, y.b2, tol) && scalar_close(x.b12, y.b12, tol);
}

template <class S>
struct is_exact_scalar : std::true_type {};
template <>
struct is_exact_scalar<double> : std::false_type {};

}  // namespace confhyp

#endif
