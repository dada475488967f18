#pragma once

#include <algorithm>
#include <compare>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <utility>
#include <vector>

#include "ehrenfest/coefficient.hpp"

namespace ehrenfest {

enum class OpKind : std::uint8_t { Create, Annihilate, Number, Momentum, Position, Identity };

/// A single mode-indexed operator factor. Identity carries mode 0.
struct OperatorSymbol {
    OpKind kind{OpKind::Identity};
    std::uint32_t mode{0};

    friend auto operator<=>(const OperatorSymbol&, const OperatorSymbol&) = default;
};

inline OperatorSymbol create_op(std::uint32_t mode) { return {OpKind::Create, mode}; }
inline OperatorSymbol annihilate_op(std::uint32_t mode) { return {OpKind::Annihilate, mode}; }
inline OperatorSymbol number_op(std::uint32_t mode) { return {OpKind::Number, mode}; }
inline OperatorSymbol position_op(std::uint32_t mode) { return {OpKind::Position, mode}; }
inline OperatorSymbol momentum_op(std::uint32_t mode) { return {OpKind::Momentum, mode}; }

/// Rank deciding canonical order of factors within one mode. Momentum before
/// Position so that q p rewrites to p q + i.
inline int kind_rank(OpKind k) {
    switch (k) {
        case OpKind::Create: return 0;
        case OpKind::Annihilate: return 1;
        case OpKind::Number: return 2;
        case OpKind::Momentum: return 3;
        case OpKind::Position: return 4;
        case OpKind::Identity: return 5;
    }
    return 5;
}

using FactorSeq = std::vector<OperatorSymbol>;

/// Lexicographic order on (mode, kind rank) pairs; the canonical term order.
struct FactorSeqLess {
    bool operator()(const FactorSeq& a, const FactorSeq& b) const {
        const std::size_t n = std::min(a.size(), b.size());
        for (std::size_t k = 0; k < n; ++k) {
            if (a[k].mode != b[k].mode) return a[k].mode < b[k].mode;
            const int ra = kind_rank(a[k].kind), rb = kind_rank(b[k].kind);
            if (ra != rb) return ra < rb;
        }
        return a.size() < b.size();
    }
};

struct Term {
    Coefficient coeff;
    FactorSeq factors;  // canonical order; empty list is the identity monomial
};

class OperatorExpr;
namespace detail {
const std::vector<Term>& same_mode_commutator(OpKind left, OpKind right);
}

/// Canonical sum of terms: factors per term sorted by (mode, kind rank) with
/// commutator corrections applied, like terms merged, zero terms dropped,
/// terms sorted lexicographically. Immutable in practice; all operations
/// return new values.
class OperatorExpr {
  public:
    OperatorExpr() = default;

    static OperatorExpr zero() { return {}; }
    static OperatorExpr identity() { return scalar(Coefficient(1)); }
    static OperatorExpr scalar(const Coefficient& c) {
        OperatorExpr e;
        if (!c.is_zero()) e.terms_.push_back({c, {}});
        return e;
    }
    static OperatorExpr symbol(OperatorSymbol s, const Coefficient& c = Coefficient(1)) {
        if (s.kind == OpKind::Identity) return scalar(c);
        OperatorExpr e;
        if (!c.is_zero()) e.terms_.push_back({c, {s}});
        return e;
    }
    /// Builds from an arbitrary factor product, canonicalizing.
    static OperatorExpr monomial(FactorSeq factors, const Coefficient& c = Coefficient(1)) {
        std::map<FactorSeq, Coefficient, FactorSeqLess> acc;
        canon_term_into(acc, c, std::move(factors));
        return from_map(acc);
    }

    const std::vector<Term>& terms() const { return terms_; }
    bool is_zero() const { return terms_.empty(); }

    int degree() const {
        std::size_t d = 0;
        for (const auto& t : terms_) d = std::max(d, t.factors.size());
        return static_cast<int>(d);
    }

    bool ladder_only() const {
        for (const auto& t : terms_)
            for (const auto& f : t.factors)
                if (f.kind != OpKind::Create && f.kind != OpKind::Annihilate) return false;
        return true;
    }

    /// Largest mode index appearing, or -1 for scalar expressions.
    int max_mode() const {
        int m = -1;
        for (const auto& t : terms_)
            for (const auto& f : t.factors) m = std::max(m, static_cast<int>(f.mode));
        return m;
    }

    friend OperatorExpr operator+(const OperatorExpr& a, const OperatorExpr& b) {
        std::map<FactorSeq, Coefficient, FactorSeqLess> acc;
        for (const auto& t : a.terms_) acc[t.factors] += t.coeff;
        for (const auto& t : b.terms_) acc[t.factors] += t.coeff;
        return from_map(acc);
    }
    friend OperatorExpr operator-(const OperatorExpr& a, const OperatorExpr& b) {
        return a + (-b);
    }
    OperatorExpr operator-() const {
        OperatorExpr e = *this;
        for (auto& t : e.terms_) t.coeff = -t.coeff;
        return e;
    }
    friend OperatorExpr operator*(const Coefficient& c, const OperatorExpr& e) {
        if (c.is_zero()) return {};
        OperatorExpr r = e;
        for (auto& t : r.terms_) t.coeff = c * t.coeff;
        return r;
    }

    /// Non-commutative product; cross terms keep lhs factors before rhs
    /// factors and are then re-canonicalized through the commutation rules.
    friend OperatorExpr operator*(const OperatorExpr& a, const OperatorExpr& b) {
        std::map<FactorSeq, Coefficient, FactorSeqLess> acc;
        for (const auto& ta : a.terms_)
            for (const auto& tb : b.terms_) {
                FactorSeq f = ta.factors;
                f.insert(f.end(), tb.factors.begin(), tb.factors.end());
                canon_term_into(acc, ta.coeff * tb.coeff, std::move(f));
            }
        return from_map(acc);
    }

    bool operator==(const OperatorExpr& o) const {
        if (terms_.size() != o.terms_.size()) return false;
        for (std::size_t k = 0; k < terms_.size(); ++k)
            if (terms_[k].factors != o.terms_[k].factors || terms_[k].coeff != o.terms_[k].coeff)
                return false;
        return true;
    }

    /// Hermitian adjoint: reverse each factor list, conjugate coefficients,
    /// re-canonicalize. q, p, n are self-adjoint; a <-> a†.
    OperatorExpr adjoint() const {
        std::map<FactorSeq, Coefficient, FactorSeqLess> acc;
        for (const auto& t : terms_) {
            FactorSeq f(t.factors.rbegin(), t.factors.rend());
            for (auto& s : f) {
                if (s.kind == OpKind::Create) s.kind = OpKind::Annihilate;
                else if (s.kind == OpKind::Annihilate) s.kind = OpKind::Create;
            }
            canon_term_into(acc, t.coeff.conj(), std::move(f));
        }
        return from_map(acc);
    }

  private:
    friend OperatorExpr commutator(const OperatorExpr&, const OperatorExpr&);

    static OperatorExpr from_map(const std::map<FactorSeq, Coefficient, FactorSeqLess>& acc) {
        OperatorExpr e;
        for (const auto& [f, c] : acc)
            if (!c.is_zero()) e.terms_.push_back({c, f});
        return e;
    }

    /// Rewrites coeff * factors into canonical monomials, accumulating into
    /// acc. Adjacent out-of-order pairs x y become y x + [x,y]; cross-mode
    /// pairs commute exactly.
    static void canon_term_into(std::map<FactorSeq, Coefficient, FactorSeqLess>& acc,
                                const Coefficient& coeff, FactorSeq factors) {
        std::erase_if(factors, [](const OperatorSymbol& s) { return s.kind == OpKind::Identity; });
        std::vector<std::pair<Coefficient, FactorSeq>> work;
        work.emplace_back(coeff, std::move(factors));
        while (!work.empty()) {
            auto [c, f] = std::move(work.back());
            work.pop_back();
            if (c.is_zero()) continue;
            bool canonical = true;
            for (std::size_t k = 0; k + 1 < f.size(); ++k) {
                const OperatorSymbol x = f[k], y = f[k + 1];
                const bool out_of_order =
                    x.mode > y.mode || (x.mode == y.mode && kind_rank(x.kind) > kind_rank(y.kind));
                if (!out_of_order) continue;
                canonical = false;
                FactorSeq swapped = f;
                std::swap(swapped[k], swapped[k + 1]);
                work.emplace_back(c, std::move(swapped));
                if (x.mode == y.mode) {
                    if (x.kind == OpKind::Annihilate && y.kind == OpKind::Create) {
                        // [a, a†] = 1, handled inline so the rule table can
                        // bootstrap from the ladder algebra
                        FactorSeq repl(f.begin(), f.begin() + k);
                        repl.insert(repl.end(), f.begin() + k + 2, f.end());
                        work.emplace_back(c, std::move(repl));
                        break;
                    }
                    for (const auto& ct : detail::same_mode_commutator(x.kind, y.kind)) {
                        FactorSeq repl(f.begin(), f.begin() + k);
                        for (auto s : ct.factors) {
                            s.mode = x.mode;
                            repl.push_back(s);
                        }
                        repl.insert(repl.end(), f.begin() + k + 2, f.end());
                        work.emplace_back(c * ct.coeff, std::move(repl));
                    }
                }
                break;
            }
            if (canonical) {
                auto [it, inserted] = acc.try_emplace(std::move(f), c);
                if (!inserted) it->second += c;
            }
        }
    }

    std::vector<Term> terms_;
};

/// Rewrites q, p, n into ladder operators under the convention
/// q = (a + a†)/sqrt2, p = -i(a - a†)/sqrt2 (hbar = 1, so [q,p] = i).
inline OperatorExpr to_ladder(const OperatorExpr& e) {
    OperatorExpr out;
    for (const auto& t : e.terms()) {
        OperatorExpr prod = OperatorExpr::scalar(t.coeff);
        for (const auto& f : t.factors) {
            OperatorExpr factor;
            switch (f.kind) {
                case OpKind::Create:
                case OpKind::Annihilate:
                    factor = OperatorExpr::symbol(f);
                    break;
                case OpKind::Number:
                    factor = OperatorExpr::monomial({create_op(f.mode), annihilate_op(f.mode)});
                    break;
                case OpKind::Position:
                    factor = Coefficient::inv_sqrt2() *
                             (OperatorExpr::symbol(annihilate_op(f.mode)) +
                              OperatorExpr::symbol(create_op(f.mode)));
                    break;
                case OpKind::Momentum:
                    factor = (-Coefficient::i() * Coefficient::inv_sqrt2()) *
                             (OperatorExpr::symbol(annihilate_op(f.mode)) -
                              OperatorExpr::symbol(create_op(f.mode)));
                    break;
                case OpKind::Identity:
                    factor = OperatorExpr::identity();
                    break;
            }
            prod = prod * factor;
        }
        out = out + prod;
    }
    return out;
}

inline OperatorExpr commutator(const OperatorExpr& a, const OperatorExpr& b) {
    // term-pairwise with an early out when mode sets are disjoint
    std::map<FactorSeq, Coefficient, FactorSeqLess> acc;
    for (const auto& ta : a.terms())
        for (const auto& tb : b.terms()) {
            bool shared = false;
            for (const auto& fa : ta.factors) {
                for (const auto& fb : tb.factors)
                    if (fa.mode == fb.mode) {
                        shared = true;
                        break;
                    }
                if (shared) break;
            }
            if (!shared) continue;
            const Coefficient c = ta.coeff * tb.coeff;
            FactorSeq ab = ta.factors;
            ab.insert(ab.end(), tb.factors.begin(), tb.factors.end());
            OperatorExpr::canon_term_into(acc, c, std::move(ab));
            FactorSeq ba = tb.factors;
            ba.insert(ba.end(), ta.factors.begin(), ta.factors.end());
            OperatorExpr::canon_term_into(acc, -c, std::move(ba));
        }
    return OperatorExpr::from_map(acc);
}

/// Normal ordering for ladder-only expressions; identical to canonical form,
/// with an explicit input check.
inline OperatorExpr normal_order(const OperatorExpr& e) {
    if (!e.ladder_only())
        throw std::invalid_argument(
            "normal_order: expression contains q/p/n symbols; call to_ladder first");
    return e;  // canonical ladder form is already normal ordered
}

namespace detail {

/// Same-mode commutator [left, right] for out-of-order kind pairs, expressed
/// over mode 0 (re-moded at use site). Derived from the ladder definitions;
/// the (Annihilate, Create) entry seeds the recursion.
inline const std::vector<Term>& same_mode_commutator(OpKind left, OpKind right) {
    static const auto table = [] {
        std::map<std::pair<OpKind, OpKind>, std::vector<Term>> t;
        t[{OpKind::Annihilate, OpKind::Create}] = {{Coefficient(1), {}}};
        const OpKind kinds[] = {OpKind::Create, OpKind::Annihilate, OpKind::Number,
                                OpKind::Momentum, OpKind::Position};
        for (OpKind x : kinds)
            for (OpKind y : kinds) {
                if (kind_rank(x) <= kind_rank(y)) continue;
                if (x == OpKind::Annihilate && y == OpKind::Create) continue;
                const OperatorExpr ex = to_ladder(OperatorExpr::symbol({x, 0}));
                const OperatorExpr ey = to_ladder(OperatorExpr::symbol({y, 0}));
                t[{x, y}] = commutator(ex, ey).terms();
            }
        return t;
    }();
    return table.at({left, right});
}

}  // namespace detail

}  // namespace ehrenfest
