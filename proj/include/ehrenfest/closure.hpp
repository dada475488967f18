#pragma once

#include <charconv>
#include <complex>
#include <cstddef>
#include <deque>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "ehrenfest/expr_io.hpp"
#include "ehrenfest/hamiltonian.hpp"
#include "ehrenfest/operator_expr.hpp"

namespace ehrenfest {

/// Identity of a tracked expectation value: a normal-ordered ladder monomial.
struct MomentKey {
    FactorSeq factors;  // empty = identity

    MomentKey() = default;
    explicit MomentKey(FactorSeq f) : factors(std::move(f)) {
        OperatorExpr e = OperatorExpr::monomial(factors);
        if (!e.ladder_only())
            throw std::invalid_argument("MomentKey: ladder operators only");
        if (e.terms().size() != 1 || e.terms()[0].factors != factors ||
            !e.terms()[0].coeff.is_one())
            throw std::invalid_argument("MomentKey: factor sequence not normal ordered");
    }

    static MomentKey annihilator(std::uint32_t mode) { return MomentKey({annihilate_op(mode)}); }
    static MomentKey creator(std::uint32_t mode) { return MomentKey({create_op(mode)}); }

    OperatorExpr expr() const { return OperatorExpr::monomial(factors); }
    int degree() const { return static_cast<int>(factors.size()); }

    /// Key of the adjoint monomial: per mode the creator and annihilator
    /// counts swap ((a†^j a^k)† = a†^k a^j), modes stay ascending.
    MomentKey adjoint() const {
        FactorSeq f(factors.rbegin(), factors.rend());
        for (auto& s : f)
            s.kind = s.kind == OpKind::Create ? OpKind::Annihilate : OpKind::Create;
        std::stable_sort(f.begin(), f.end(), [](const OperatorSymbol& a, const OperatorSymbol& b) {
            return a.mode != b.mode ? a.mode < b.mode : kind_rank(a.kind) < kind_rank(b.kind);
        });
        MomentKey k;
        k.factors = std::move(f);
        return k;
    }

    std::string str() const { return print_expr(expr()); }

    friend bool operator==(const MomentKey& a, const MomentKey& b) {
        return a.factors == b.factors;
    }
};

struct MomentKeyLess {
    bool operator()(const MomentKey& a, const MomentKey& b) const {
        return FactorSeqLess{}(a.factors, b.factors);
    }
};

/// All 2N first-moment keys <a_i>, <a_i†> in mode order.
inline std::vector<MomentKey> first_moment_seeds(std::size_t mode_count) {
    std::vector<MomentKey> seeds;
    seeds.reserve(2 * mode_count);
    for (std::size_t m = 0; m < mode_count; ++m) {
        seeds.push_back(MomentKey::creator(static_cast<std::uint32_t>(m)));
        seeds.push_back(MomentKey::annihilator(static_cast<std::uint32_t>(m)));
    }
    return seeds;
}

struct RhsEntry {
    std::complex<double> coeff;
    std::size_t var;
    std::optional<TimeFunction> time_dependence;  // multiplies coeff when set
};

struct ForcingEntry {
    std::complex<double> coeff;
    TimeFunction time_dependence;
};

/// First-order system d<key_k>/dt = sum_j c_kj(t) <key_j> + f_k(t).
struct OdeSystem {
    std::vector<MomentKey> variables;
    std::vector<std::vector<RhsEntry>> rhs;
    std::vector<std::vector<ForcingEntry>> forcing;
    bool truncated{false};
    std::optional<int> truncation_order;

    std::size_t size() const { return variables.size(); }

    std::optional<std::size_t> index_of(const MomentKey& k) const {
        for (std::size_t j = 0; j < variables.size(); ++j)
            if (variables[j] == k) return j;
        return std::nullopt;
    }
};

class HierarchyDivergence : public std::runtime_error {
  public:
    HierarchyDivergence(std::string monomial)
        : std::runtime_error("momental hierarchy does not close; first unbounded monomial: " +
                             monomial),
          monomial_(std::move(monomial)) {}
    const std::string& monomial() const { return monomial_; }

  private:
    std::string monomial_;
};

/// Recursive application of d<A>/dt = -i<[A,H]> (hbar = 1) from the seed
/// observables, breadth first, until the variable set closes. Moments of
/// degree above max_order are replaced by zero and the system is flagged
/// truncated. Without max_order a non-closing hierarchy raises
/// HierarchyDivergence.
inline OdeSystem derive_closure(const LadderHamiltonian& h, const std::vector<MomentKey>& seeds,
                                std::optional<int> max_order = std::nullopt) {
    if (seeds.empty()) throw std::invalid_argument("derive_closure: no seed observables");

    int seed_degree = 0;
    for (const auto& s : seeds) seed_degree = std::max(seed_degree, s.degree());
    // degree growth per recursion layer is bounded by deg(H) - 2; if degrees
    // keep climbing past this ceiling the hierarchy cannot close
    const int divergence_ceiling = std::max(seed_degree, h.static_part.degree()) + 8;

    OdeSystem sys;
    sys.truncation_order = max_order;
    std::map<MomentKey, std::size_t, MomentKeyLess> index;
    std::deque<std::size_t> todo;

    auto intern = [&](const FactorSeq& f) -> std::optional<std::size_t> {
        MomentKey k;
        k.factors = f;
        if (auto it = index.find(k); it != index.end()) return it->second;
        if (max_order && k.degree() > *max_order) {
            sys.truncated = true;
            return std::nullopt;
        }
        if (!max_order && k.degree() > divergence_ceiling)
            throw HierarchyDivergence(k.str());
        const std::size_t id = sys.variables.size();
        sys.variables.push_back(k);
        index.emplace(std::move(k), id);
        todo.push_back(id);
        return id;
    };

    for (const auto& s : seeds) intern(s.factors);

    const Coefficient minus_i = -Coefficient::i();
    while (!todo.empty()) {
        const std::size_t id = todo.front();
        todo.pop_front();
        const OperatorExpr a = sys.variables[id].expr();

        sys.rhs.resize(sys.variables.size());
        sys.forcing.resize(sys.variables.size());
        std::vector<RhsEntry> row;
        std::vector<ForcingEntry> force;

        auto accumulate = [&](const OperatorExpr& contribution,
                              std::optional<TimeFunction> tf) {
            for (const auto& t : contribution.terms()) {
                const std::complex<double> c = t.coeff.to_complex();
                if (t.factors.empty()) {
                    force.push_back({c, tf.value_or(TimeFunction::constant())});
                } else if (auto var = intern(t.factors)) {
                    row.push_back({c, *var, tf});
                }
            }
        };

        accumulate(minus_i * commutator(a, h.static_part), std::nullopt);
        for (const auto& [op, tf] : h.drives)
            accumulate(minus_i * commutator(a, op), tf);

        sys.rhs.resize(sys.variables.size());
        sys.forcing.resize(sys.variables.size());
        sys.rhs[id] = std::move(row);
        sys.forcing[id] = std::move(force);
    }
    sys.rhs.resize(sys.variables.size());
    sys.forcing.resize(sys.variables.size());
    return sys;
}

inline OdeSystem derive_closure(const OperatorExpr& h, const std::vector<MomentKey>& seeds,
                                std::optional<int> max_order = std::nullopt) {
    return derive_closure(LadderHamiltonian{h, {}}, seeds, max_order);
}

/// Nested commutators [A, [H,A], [H,[H,A]], ...] up to the given order. The
/// expectation of A at time t is then sum_k (i t)^k / k! <series[k]>_0.
inline std::vector<OperatorExpr> bch_series(const OperatorExpr& h, const OperatorExpr& a,
                                            int order) {
    if (order < 0) throw std::invalid_argument("bch_series: negative order");
    std::vector<OperatorExpr> out;
    out.reserve(static_cast<std::size_t>(order) + 1);
    out.push_back(a);
    for (int k = 1; k <= order; ++k) out.push_back(commutator(h, out.back()));
    return out;
}

inline std::vector<OperatorExpr> bch_series(const OperatorExpr& h, const MomentKey& a,
                                            int order) {
    return bch_series(h, a.expr(), order);
}

namespace detail_io {

/// Shortest round-trip decimal form.
inline std::string double_str(double x) {
    char buf[64];
    auto [p, ec] = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, p);
}

inline std::string complex_str(std::complex<double> z) {
    if (z.imag() == 0.0) return double_str(z.real());
    if (z.real() == 0.0) return double_str(z.imag()) + "i";
    std::string s = "(" + double_str(z.real());
    s += z.imag() < 0 ? " - " : " + ";
    s += double_str(std::abs(z.imag())) + "i)";
    return s;
}

inline std::string time_function_str(const TimeFunction& tf) {
    switch (tf.kind) {
        case TimeFunction::Kind::Constant: return "";
        case TimeFunction::Kind::Sin: return "sin(" + double_str(tf.omega) + " t)";
        case TimeFunction::Kind::Cos: return "cos(" + double_str(tf.omega) + " t)";
    }
    return "";
}

}  // namespace detail_io

/// One line per variable: d<key>/dt = c1 <key1> + c2 <key2> ... [+ f(t)]
inline std::string print_ode_system(const OdeSystem& sys) {
    using namespace detail_io;
    std::string out;
    for (std::size_t k = 0; k < sys.size(); ++k) {
        out += "d<" + sys.variables[k].str() + ">/dt =";
        bool any = false;
        for (const auto& e : sys.rhs[k]) {
            out += any ? " + " : " ";
            any = true;
            out += complex_str(e.coeff);
            if (e.time_dependence) out += " " + time_function_str(*e.time_dependence);
            out += " <" + sys.variables[e.var].str() + ">";
        }
        for (const auto& f : sys.forcing[k]) {
            out += any ? " + " : " ";
            any = true;
            out += complex_str(f.coeff);
            const std::string tf = time_function_str(f.time_dependence);
            if (!tf.empty()) out += " " + tf;
        }
        if (!any) out += " 0";
        out += "\n";
    }
    if (sys.truncated) {
        out += "# truncated at order " +
               (sys.truncation_order ? std::to_string(*sys.truncation_order) : std::string("?")) +
               "; dropped moments replaced by zero\n";
    }
    return out;
}

}  // namespace ehrenfest
