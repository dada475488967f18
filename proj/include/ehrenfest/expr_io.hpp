#pragma once

#include <cctype>
#include <cstdint>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>

#include "ehrenfest/operator_expr.hpp"

namespace ehrenfest {

// Plain-text expression syntax:
//   terms joined by + / -, factors like ad[3], a[3], n[2], q[0], p[0],
//   scalar atoms like 3, (3/2), i, -2i, r2, (1/2)ir2 (r2 denotes sqrt 2).
// print_expr is the exact inverse of parse_expr on canonical forms.

namespace detail_io {

inline std::string rational_str(const Rational& r) {
    std::ostringstream os;
    os << r;
    return os.str();
}

/// One scalar part, e.g. "3/2", "2i", "r2", "ir2"; fractions get parens only
/// when the part stands alone (nested parens would not re-parse).
inline std::string scalar_part(const Rational& r, bool imag, bool root2, bool wrap_fractions) {
    std::string mag = rational_str(r);
    bool neg = false;
    if (!mag.empty() && mag[0] == '-') {
        neg = true;
        mag.erase(0, 1);
    }
    const bool fraction = mag.find('/') != std::string::npos;
    std::string body;
    if (mag == "1" && (imag || root2)) body.clear();
    else body = (fraction && wrap_fractions) ? "(" + mag + ")" : mag;
    if (imag) body += "i";
    if (root2) body += "r2";
    return (neg ? "-" : "") + body;
}

inline std::string coefficient_str(const Coefficient& c) {
    int parts_present = (c.re != 0) + (c.im != 0) + (c.re2 != 0) + (c.im2 != 0);
    const bool wrap = parts_present <= 1;
    std::string parts[4];
    int n = 0;
    if (c.re != 0) parts[n++] = scalar_part(c.re, false, false, wrap);
    if (c.im != 0) parts[n++] = scalar_part(c.im, true, false, wrap);
    if (c.re2 != 0) parts[n++] = scalar_part(c.re2, false, true, wrap);
    if (c.im2 != 0) parts[n++] = scalar_part(c.im2, true, true, wrap);
    if (n == 0) return "0";
    if (n == 1) return parts[0];
    std::string out = "(" + parts[0];
    for (int k = 1; k < n; ++k) {
        if (parts[k][0] == '-') out += " - " + parts[k].substr(1);
        else out += " + " + parts[k];
    }
    return out + ")";
}

inline const char* factor_name(OpKind k) {
    switch (k) {
        case OpKind::Create: return "ad";
        case OpKind::Annihilate: return "a";
        case OpKind::Number: return "n";
        case OpKind::Position: return "q";
        case OpKind::Momentum: return "p";
        case OpKind::Identity: return "1";
    }
    return "?";
}

}  // namespace detail_io

inline std::string print_expr(const OperatorExpr& e) {
    using namespace detail_io;
    if (e.is_zero()) return "0";
    std::string out;
    bool first = true;
    for (const auto& t : e.terms()) {
        std::string cs;
        if (t.factors.empty()) cs = coefficient_str(t.coeff);
        else if (t.coeff.is_one()) cs.clear();
        else if ((-t.coeff).is_one()) cs = "-";
        else cs = coefficient_str(t.coeff);

        bool neg = !cs.empty() && cs[0] == '-';
        if (neg) cs.erase(0, 1);
        if (first) {
            if (neg) out += "-";
        } else {
            out += neg ? " - " : " + ";
        }
        first = false;

        std::string body = cs;
        for (const auto& f : t.factors) {
            if (!body.empty() && body != "-") body += " ";
            body += factor_name(f.kind);
            body += "[" + std::to_string(f.mode) + "]";
        }
        out += body;
    }
    return out;
}

class ParseError : public std::runtime_error {
  public:
    ParseError(const std::string& msg, std::size_t pos)
        : std::runtime_error(msg + " at offset " + std::to_string(pos)), pos_(pos) {}
    std::size_t position() const { return pos_; }

  private:
    std::size_t pos_;
};

namespace detail_io {

class Parser {
  public:
    explicit Parser(std::string_view s) : s_(s) {}

    OperatorExpr parse() {
        OperatorExpr e = OperatorExpr::zero();
        skip_ws();
        if (done()) throw ParseError("empty expression", pos_);
        bool neg = consume_sign();
        e = e + parse_term(neg);
        skip_ws();
        while (!done()) {
            char c = peek();
            if (c != '+' && c != '-') throw ParseError("expected + or -", pos_);
            ++pos_;
            skip_ws();
            e = e + parse_term(c == '-');
            skip_ws();
        }
        return e;
    }

  private:
    bool done() const { return pos_ >= s_.size(); }
    char peek() const { return s_[pos_]; }
    void skip_ws() {
        while (!done() && std::isspace(static_cast<unsigned char>(peek()))) ++pos_;
    }
    bool consume_sign() {
        if (!done() && peek() == '-') {
            ++pos_;
            skip_ws();
            return true;
        }
        if (!done() && peek() == '+') {
            ++pos_;
            skip_ws();
        }
        return false;
    }

    bool starts_factor() const {
        if (done()) return false;
        char c = peek();
        return c == 'a' || c == 'n' || c == 'q' || c == 'p' || c == 'i' || c == 'r' || c == '(' ||
               std::isdigit(static_cast<unsigned char>(c));
    }

    OperatorExpr parse_term(bool negate) {
        Coefficient coeff(negate ? -1 : 1);
        FactorSeq factors;
        bool any = false;
        while (true) {
            skip_ws();
            if (!starts_factor()) break;
            char c = peek();
            if (c == '(') {
                coeff *= parse_paren_scalar();
            } else if (std::isdigit(static_cast<unsigned char>(c)) || c == 'i' || c == 'r') {
                coeff *= parse_scalar_atom();
            } else {
                factors.push_back(parse_operator());
            }
            any = true;
        }
        if (!any) throw ParseError("expected term", pos_);
        return OperatorExpr::monomial(std::move(factors), coeff);
    }

    OperatorSymbol parse_operator() {
        OpKind kind;
        if (s_.substr(pos_, 3).starts_with("ad[")) {
            kind = OpKind::Create;
            pos_ += 2;
        } else {
            char c = peek();
            ++pos_;
            switch (c) {
                case 'a': kind = OpKind::Annihilate; break;
                case 'n': kind = OpKind::Number; break;
                case 'q': kind = OpKind::Position; break;
                case 'p': kind = OpKind::Momentum; break;
                default: throw ParseError("unknown operator", pos_ - 1);
            }
        }
        expect('[');
        std::uint32_t mode = parse_uint();
        expect(']');
        return {kind, mode};
    }

    void expect(char c) {
        if (done() || peek() != c)
            throw ParseError(std::string("expected '") + c + "'", pos_);
        ++pos_;
    }

    std::uint32_t parse_uint() {
        if (done() || !std::isdigit(static_cast<unsigned char>(peek())))
            throw ParseError("expected digit", pos_);
        std::uint64_t v = 0;
        while (!done() && std::isdigit(static_cast<unsigned char>(peek()))) {
            v = v * 10 + static_cast<std::uint64_t>(peek() - '0');
            if (v > 0xffffffffull) throw ParseError("index too large", pos_);
            ++pos_;
        }
        return static_cast<std::uint32_t>(v);
    }

    Rational parse_rational() {
        boost::multiprecision::cpp_int num = 0;
        if (done() || !std::isdigit(static_cast<unsigned char>(peek())))
            throw ParseError("expected number", pos_);
        while (!done() && std::isdigit(static_cast<unsigned char>(peek()))) {
            num = num * 10 + (peek() - '0');
            ++pos_;
        }
        if (!done() && peek() == '/') {
            ++pos_;
            boost::multiprecision::cpp_int den = 0;
            if (done() || !std::isdigit(static_cast<unsigned char>(peek())))
                throw ParseError("expected denominator", pos_);
            while (!done() && std::isdigit(static_cast<unsigned char>(peek()))) {
                den = den * 10 + (peek() - '0');
                ++pos_;
            }
            if (den == 0) throw ParseError("zero denominator", pos_);
            return Rational(num, den);
        }
        return Rational(num);
    }

    /// number? i? r2? with at least one present; no leading sign here.
    Coefficient parse_scalar_atom() {
        Rational mag(1);
        bool have = false;
        if (!done() && std::isdigit(static_cast<unsigned char>(peek()))) {
            mag = parse_rational();
            have = true;
        }
        bool imag = false, root2 = false;
        if (!done() && peek() == 'i') {
            imag = true;
            have = true;
            ++pos_;
        }
        if (!done() && s_.substr(pos_).starts_with("r2")) {
            root2 = true;
            have = true;
            pos_ += 2;
        }
        if (!have) throw ParseError("expected scalar", pos_);
        Coefficient c;
        if (!imag && !root2) c.re = mag;
        else if (imag && !root2) c.im = mag;
        else if (!imag && root2) c.re2 = mag;
        else c.im2 = mag;
        return c;
    }

    /// '(' signed scalar atoms joined by +/-, or a bare rational, ')';
    /// a trailing i / r2 after the closing paren binds to the whole group.
    Coefficient parse_paren_scalar() {
        expect('(');
        skip_ws();
        Coefficient total(0);
        bool neg = consume_sign();
        while (true) {
            Coefficient part = parse_scalar_atom();
            total += neg ? -part : part;
            skip_ws();
            if (done()) throw ParseError("unterminated scalar", pos_);
            if (peek() == ')') break;
            char c = peek();
            if (c != '+' && c != '-') throw ParseError("expected + - or )", pos_);
            neg = c == '-';
            ++pos_;
            skip_ws();
        }
        ++pos_;  // ')'
        if (!done() && peek() == 'i') {
            ++pos_;
            total *= Coefficient::i();
        }
        if (!done() && s_.substr(pos_).starts_with("r2")) {
            pos_ += 2;
            total *= Coefficient::sqrt2();
        }
        return total;
    }

    std::string_view s_;
    std::size_t pos_ = 0;
};

}  // namespace detail_io

inline OperatorExpr parse_expr(std::string_view s) { return detail_io::Parser(s).parse(); }

}  // namespace ehrenfest
