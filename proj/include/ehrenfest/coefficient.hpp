#pragma once

#include <boost/multiprecision/cpp_int.hpp>
#include <cmath>
#include <complex>
#include <cstdint>
#include <string>

namespace ehrenfest {

using Rational = boost::multiprecision::cpp_rational;

/// Converts a finite double to the exact rational it represents.
inline Rational rational_from_double(double x) {
    if (x == 0.0) return Rational(0);
    int exp = 0;
    double mant = std::frexp(x, &exp);
    // 53 mantissa bits make the scaled mantissa integral
    auto num = boost::multiprecision::cpp_int(static_cast<long long>(std::ldexp(mant, 53)));
    exp -= 53;
    if (exp >= 0) return Rational(num << exp);
    return Rational(num, boost::multiprecision::cpp_int(1) << -exp);
}

/// Element of the ring Q(i)[sqrt2]: value = (re + i im) + (re2 + i im2) * sqrt(2).
///
/// Closed under addition and multiplication, which is all the symbolic layer
/// needs; sqrt(2) enters only through the q,p ladder convention. Zero tests
/// are exact.
struct Coefficient {
    Rational re{0}, im{0};    // rational part
    Rational re2{0}, im2{0};  // sqrt(2) part

    Coefficient() = default;
    Coefficient(int v) : re(v) {}
    Coefficient(const Rational& r) : re(r) {}
    Coefficient(const Rational& r, const Rational& i) : re(r), im(i) {}

    static Coefficient i() { return {Rational(0), Rational(1)}; }
    static Coefficient sqrt2() {
        Coefficient c;
        c.re2 = 1;
        return c;
    }
    /// 1/sqrt(2) == sqrt(2)/2
    static Coefficient inv_sqrt2() {
        Coefficient c;
        c.re2 = Rational(1, 2);
        return c;
    }
    static Coefficient from_double(double x) { return Coefficient(rational_from_double(x)); }
    static Coefficient from_complex(std::complex<double> z) {
        return {rational_from_double(z.real()), rational_from_double(z.imag())};
    }

    bool is_zero() const { return re == 0 && im == 0 && re2 == 0 && im2 == 0; }
    bool is_one() const { return re == 1 && im == 0 && re2 == 0 && im2 == 0; }

    Coefficient operator-() const {
        Coefficient c;
        c.re = -re;
        c.im = -im;
        c.re2 = -re2;
        c.im2 = -im2;
        return c;
    }

    Coefficient& operator+=(const Coefficient& o) {
        re += o.re;
        im += o.im;
        re2 += o.re2;
        im2 += o.im2;
        return *this;
    }
    Coefficient& operator-=(const Coefficient& o) { return *this += -o; }

    friend Coefficient operator+(Coefficient a, const Coefficient& b) { return a += b; }
    friend Coefficient operator-(Coefficient a, const Coefficient& b) { return a -= b; }

    friend Coefficient operator*(const Coefficient& a, const Coefficient& b) {
        // (x1 + y1 s)(x2 + y2 s) = x1 x2 + 2 y1 y2 + (x1 y2 + y1 x2) s,  s = sqrt(2)
        Coefficient c;
        // complex products of the four Gaussian-rational components
        auto mul_re = [](const Rational& ar, const Rational& ai, const Rational& br,
                         const Rational& bi) { return ar * br - ai * bi; };
        auto mul_im = [](const Rational& ar, const Rational& ai, const Rational& br,
                         const Rational& bi) { return ar * bi + ai * br; };
        c.re = mul_re(a.re, a.im, b.re, b.im) + 2 * mul_re(a.re2, a.im2, b.re2, b.im2);
        c.im = mul_im(a.re, a.im, b.re, b.im) + 2 * mul_im(a.re2, a.im2, b.re2, b.im2);
        c.re2 = mul_re(a.re, a.im, b.re2, b.im2) + mul_re(a.re2, a.im2, b.re, b.im);
        c.im2 = mul_im(a.re, a.im, b.re2, b.im2) + mul_im(a.re2, a.im2, b.re, b.im);
        return c;
    }
    Coefficient& operator*=(const Coefficient& o) { return *this = *this * o; }

    Coefficient conj() const {
        Coefficient c = *this;
        c.im = -c.im;
        c.im2 = -c.im2;
        return c;
    }

    bool operator==(const Coefficient& o) const = default;

    std::complex<double> to_complex() const {
        const double s = std::sqrt(2.0);
        return {static_cast<double>(re) + s * static_cast<double>(re2),
                static_cast<double>(im) + s * static_cast<double>(im2)};
    }
};

}  // namespace ehrenfest
