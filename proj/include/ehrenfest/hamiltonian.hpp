#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "ehrenfest/operator_expr.hpp"

namespace ehrenfest {

/// Scalar function of time attached to a drive term; only these families are
/// built in.
struct TimeFunction {
    enum class Kind { Constant, Sin, Cos };
    Kind kind{Kind::Constant};
    double omega{0.0};

    static TimeFunction constant() { return {Kind::Constant, 0.0}; }
    static TimeFunction sin(double w) { return {Kind::Sin, w}; }
    static TimeFunction cos(double w) { return {Kind::Cos, w}; }

    double operator()(double t) const {
        switch (kind) {
            case Kind::Constant: return 1.0;
            case Kind::Sin: return std::sin(omega * t);
            case Kind::Cos: return std::cos(omega * t);
        }
        return 1.0;
    }

    bool operator==(const TimeFunction&) const = default;
};

struct Coupling {
    std::uint32_t i, j;  // i < j after validation
    double strength;
};

struct ExtraTerm {
    OperatorExpr op;
    std::optional<TimeFunction> time_dependence;
};

/// Mode frequencies, position-position couplings and optional drive terms.
struct HamiltonianSpec {
    std::size_t mode_count{0};
    std::vector<double> frequencies;
    std::vector<Coupling> couplings;
    std::vector<ExtraTerm> extra_terms;
};

/// Canonical ladder form of a Hamiltonian; drive time dependence is carried
/// alongside the operators, never inside them.
struct LadderHamiltonian {
    OperatorExpr static_part;
    std::vector<std::pair<OperatorExpr, TimeFunction>> drives;
};

/// H = sum_i w_i (n_i + 1/2) + sum_{i<j} g_ij q_i q_j + extra terms,
/// expanded to canonical ladder form with exact coefficients.
inline LadderHamiltonian build_hamiltonian(const HamiltonianSpec& spec) {
    if (spec.frequencies.size() != spec.mode_count)
        throw std::invalid_argument("hamiltonian: frequencies length != mode_count");
    for (double w : spec.frequencies)
        if (!(w > 0.0)) throw std::invalid_argument("hamiltonian: frequencies must be positive");

    LadderHamiltonian h;
    OperatorExpr sum;
    for (std::size_t m = 0; m < spec.mode_count; ++m) {
        const Coefficient w = Coefficient::from_double(spec.frequencies[m]);
        const auto mode = static_cast<std::uint32_t>(m);
        sum = sum + w * (OperatorExpr::monomial({create_op(mode), annihilate_op(mode)}) +
                         OperatorExpr::scalar(Rational(1, 2)));
    }
    std::vector<std::vector<bool>> seen(spec.mode_count);
    for (const auto& c : spec.couplings) {
        std::uint32_t i = c.i, j = c.j;
        if (i > j) std::swap(i, j);
        if (i == j) throw std::invalid_argument("hamiltonian: diagonal coupling gamma_ii");
        if (j >= spec.mode_count) throw std::invalid_argument("hamiltonian: coupling index out of range");
        if (seen[i].empty()) seen[i].assign(spec.mode_count, false);
        if (seen[i][j]) throw std::invalid_argument("hamiltonian: duplicate coupling entry");
        seen[i][j] = true;
        sum = sum + Coefficient::from_double(c.strength) *
                        to_ladder(OperatorExpr::monomial({position_op(i), position_op(j)}));
    }
    for (const auto& extra : spec.extra_terms) {
        const OperatorExpr ladder = to_ladder(extra.op);
        if (extra.time_dependence && extra.time_dependence->kind != TimeFunction::Kind::Constant)
            h.drives.emplace_back(ladder, *extra.time_dependence);
        else
            sum = sum + ladder;
    }
    h.static_part = sum;
    return h;
}

}  // namespace ehrenfest
