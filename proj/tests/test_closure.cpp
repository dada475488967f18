#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <complex>
#include <map>
#include <random>

#include "ehrenfest/closure.hpp"
#include "ehrenfest/expr_io.hpp"
#include "ehrenfest/hamiltonian.hpp"

using namespace ehrenfest;
using cplx = std::complex<double>;

namespace {

HamiltonianSpec coupled_spec(std::vector<double> freqs, std::vector<Coupling> couplings) {
    HamiltonianSpec s;
    s.mode_count = freqs.size();
    s.frequencies = std::move(freqs);
    s.couplings = std::move(couplings);
    return s;
}

cplx rhs_coeff(const OdeSystem& sys, std::size_t row, const MomentKey& var) {
    cplx c = 0.0;
    const auto idx = sys.index_of(var);
    REQUIRE(idx.has_value());
    for (const auto& e : sys.rhs[row])
        if (e.var == *idx && !e.time_dependence) c += e.coeff;
    return c;
}

}  // namespace

TEST_CASE("build_hamiltonian: single free oscillator") {
    const auto h = build_hamiltonian(coupled_spec({1.0}, {}));
    CHECK(h.static_part == parse_expr("ad[0] a[0] + (1/2)"));
    CHECK(h.drives.empty());
}

TEST_CASE("build_hamiltonian: two-mode coupling expands q0 q1") {
    const double g = 0.25;  // exactly representable
    const auto h = build_hamiltonian(coupled_spec({1.0, 1.0}, {{0, 1, g}}));
    const auto expected =
        parse_expr("ad[0] a[0] + ad[1] a[1] + 1") +
        Coefficient(Rational(1, 8)) *
            parse_expr("a[0] a[1] + a[0] ad[1] + ad[0] a[1] + ad[0] ad[1]");
    CHECK(h.static_part == expected);
}

TEST_CASE("build_hamiltonian: validation") {
    CHECK_THROWS_AS(build_hamiltonian(coupled_spec({1.0}, {{0, 0, 1.0}})), std::invalid_argument);
    CHECK_THROWS_AS(build_hamiltonian(coupled_spec({1.0, 2.0}, {{0, 5, 1.0}})),
                    std::invalid_argument);
    CHECK_THROWS_AS(build_hamiltonian(coupled_spec({1.0, -2.0}, {})), std::invalid_argument);
    // duplicate entry, also via the swapped index order
    CHECK_THROWS_AS(build_hamiltonian(coupled_spec({1.0, 2.0}, {{0, 1, 1.0}, {1, 0, 1.0}})),
                    std::invalid_argument);
}

TEST_CASE("derive_closure: single harmonic oscillator closes in 2 variables") {
    const auto h = build_hamiltonian(coupled_spec({1.0}, {}));
    const auto sys = derive_closure(h, first_moment_seeds(1));
    REQUIRE(sys.size() == 2);
    CHECK_FALSE(sys.truncated);
    CHECK(rhs_coeff(sys, *sys.index_of(MomentKey::annihilator(0)), MomentKey::annihilator(0)) ==
          cplx(0.0, -1.0));
    CHECK(rhs_coeff(sys, *sys.index_of(MomentKey::creator(0)), MomentKey::creator(0)) ==
          cplx(0.0, 1.0));
}

TEST_CASE("derive_closure: p^2/2 + q^2/2 equals the number-operator form") {
    const auto h_expr = to_ladder(
        Coefficient(Rational(1, 2)) *
        (parse_expr("p[0] p[0]") + parse_expr("q[0] q[0]")));
    CHECK(h_expr == parse_expr("ad[0] a[0] + (1/2)"));
    const auto sys = derive_closure(h_expr, first_moment_seeds(1));
    CHECK(sys.size() == 2);
    // the ladder pair is exactly Eq-3-style motion: d<q>/dt = <p>, d<p>/dt = -<q>
    const auto ia = *sys.index_of(MomentKey::annihilator(0));
    const auto ic = *sys.index_of(MomentKey::creator(0));
    const cplx daa = rhs_coeff(sys, ia, MomentKey::annihilator(0));
    const cplx dcc = rhs_coeff(sys, ic, MomentKey::creator(0));
    // d<q>/dt = (d<a> + d<ad>)/sqrt2 = (-i<a> + i<ad>)/sqrt2 = <p>
    CHECK(daa == cplx(0.0, -1.0));
    CHECK(dcc == cplx(0.0, 1.0));
}

TEST_CASE("derive_closure: coupled quadratic Hamiltonians close with 2N variables") {
    std::mt19937 rng(5);
    std::uniform_real_distribution<double> freq(0.5, 2.0), coup(-0.2, 0.2);
    for (std::size_t n : {1u, 2u, 10u}) {
        std::vector<double> freqs;
        for (std::size_t m = 0; m < n; ++m) freqs.push_back(freq(rng));
        std::vector<Coupling> cs;
        for (std::uint32_t i = 0; i < n; ++i)
            for (std::uint32_t j = i + 1; j < n; ++j) cs.push_back({i, j, coup(rng)});
        const auto spec = coupled_spec(freqs, cs);
        const auto sys = derive_closure(build_hamiltonian(spec), first_moment_seeds(n));
        CHECK(sys.size() == 2 * n);
        CHECK_FALSE(sys.truncated);

        // hand-derived linear structure: d<a_k>/dt = -i w_k <a_k> - (i/2) sum_j g_kj (<a_j> + <a_j†>)
        for (std::uint32_t k = 0; k < n; ++k) {
            const auto row = *sys.index_of(MomentKey::annihilator(k));
            CHECK(std::abs(rhs_coeff(sys, row, MomentKey::annihilator(k)) -
                           cplx(0.0, -freqs[k])) < 1e-14);
            for (const auto& c : cs) {
                if (c.i != k && c.j != k) continue;
                const std::uint32_t other = c.i == k ? c.j : c.i;
                const cplx want(0.0, -0.5 * c.strength);
                CHECK(std::abs(rhs_coeff(sys, row, MomentKey::annihilator(other)) - want) < 1e-14);
                CHECK(std::abs(rhs_coeff(sys, row, MomentKey::creator(other)) - want) < 1e-14);
            }
        }
    }
}

TEST_CASE("derive_closure: conjugate-pair rows mirror each other") {
    std::mt19937 rng(17);
    std::uniform_real_distribution<double> freq(0.5, 2.0), coup(-0.3, 0.3);
    std::vector<double> freqs{freq(rng), freq(rng), freq(rng)};
    std::vector<Coupling> cs{{0, 1, coup(rng)}, {0, 2, coup(rng)}, {1, 2, coup(rng)}};
    const auto sys = derive_closure(build_hamiltonian(coupled_spec(freqs, cs)),
                                    first_moment_seeds(3));
    for (std::size_t row = 0; row < sys.size(); ++row) {
        const auto conj_row = *sys.index_of(sys.variables[row].adjoint());
        std::map<std::size_t, cplx> mirrored;
        for (const auto& e : sys.rhs[conj_row])
            mirrored[*sys.index_of(sys.variables[e.var].adjoint())] += e.coeff;
        for (const auto& e : sys.rhs[row]) {
            CHECK(std::abs(std::conj(mirrored[e.var]) - e.coeff) < 1e-14);
        }
    }
}

TEST_CASE("derive_closure: seeding with the Hamiltonian's moments conserves energy") {
    const auto spec = coupled_spec({1.0, 1.5}, {{0, 1, 0.25}});
    const auto h = build_hamiltonian(spec);
    std::vector<MomentKey> seeds;
    for (const auto& t : h.static_part.terms())
        if (!t.factors.empty()) seeds.push_back(MomentKey(t.factors));
    const auto sys = derive_closure(h, seeds);
    CHECK_FALSE(sys.truncated);
    // d<H>/dt = sum over H's monomials of c * rhs must vanish identically,
    // including the scalar parts the commutators push into constant forcing
    std::map<std::size_t, cplx> combined;
    cplx scalar = 0.0;
    for (const auto& t : h.static_part.terms()) {
        if (t.factors.empty()) continue;
        const auto row = *sys.index_of(MomentKey(t.factors));
        for (const auto& e : sys.rhs[row]) combined[e.var] += t.coeff.to_complex() * e.coeff;
        for (const auto& f : sys.forcing[row]) {
            CHECK(f.time_dependence == TimeFunction::constant());
            scalar += t.coeff.to_complex() * f.coeff;
        }
    }
    for (const auto& [var, c] : combined) CHECK(std::abs(c) < 1e-13);
    CHECK(std::abs(scalar) < 1e-13);
}

TEST_CASE("derive_closure: cubic coupling truncates with second-order moments tracked") {
    auto spec = coupled_spec({1.0, 1.0}, {});
    spec.extra_terms.push_back({Coefficient(Rational(1, 10)) *
                                    parse_expr("q[0] q[0] q[1]"),
                                std::nullopt});
    const auto h = build_hamiltonian(spec);
    const auto sys = derive_closure(h, {MomentKey::annihilator(0), MomentKey::creator(0)}, 3);
    CHECK(sys.truncated);
    CHECK(sys.truncation_order == 3);
    bool has_second_order = false;
    for (const auto& v : sys.variables) has_second_order |= v.degree() == 2;
    CHECK(has_second_order);
}

TEST_CASE("derive_closure: quartic potential diverges without max_order") {
    auto spec = coupled_spec({1.0}, {});
    spec.extra_terms.push_back(
        {Coefficient(Rational(1, 20)) * parse_expr("q[0] q[0] q[0] q[0]"), std::nullopt});
    const auto h = build_hamiltonian(spec);
    CHECK_THROWS_AS(derive_closure(h, first_moment_seeds(1)), HierarchyDivergence);
    const auto sys = derive_closure(h, first_moment_seeds(1), 4);
    CHECK(sys.truncated);
}

TEST_CASE("derive_closure: sinusoidal drive becomes scalar forcing on first moments") {
    auto spec = coupled_spec({1.0}, {});
    spec.extra_terms.push_back(
        {Coefficient(Rational(1, 4)) * parse_expr("q[0]"), TimeFunction::sin(0.5)});
    const auto h = build_hamiltonian(spec);
    REQUIRE(h.drives.size() == 1);
    const auto sys = derive_closure(h, first_moment_seeds(1));
    CHECK(sys.size() == 2);
    bool found = false;
    for (std::size_t row = 0; row < sys.size(); ++row)
        for (const auto& f : sys.forcing[row]) {
            CHECK(f.time_dependence == TimeFunction::sin(0.5));
            found = true;
        }
    CHECK(found);
}

TEST_CASE("bch_series: basic identities") {
    const auto h = Coefficient(2) * parse_expr("ad[0] a[0]");  // w = 2
    const auto a = MomentKey::annihilator(0);

    const auto order0 = bch_series(h, a, 0);
    REQUIRE(order0.size() == 1);
    CHECK(order0[0] == parse_expr("a[0]"));

    const auto order2 = bch_series(h, a, 2);
    REQUIRE(order2.size() == 3);
    CHECK(order2[1] == parse_expr("-2 a[0]"));
    CHECK(order2[2] == parse_expr("4 a[0]"));

    // conserved quantity: all nested commutators vanish
    const auto conserved = bch_series(h, MomentKey({create_op(0), annihilate_op(0)}), 4);
    for (std::size_t k = 1; k < conserved.size(); ++k) CHECK(conserved[k].is_zero());
}

TEST_CASE("ode pretty printer golden listing") {
    const auto sys =
        derive_closure(build_hamiltonian(coupled_spec({1.0}, {})), first_moment_seeds(1));
    CHECK(print_ode_system(sys) == "d<ad[0]>/dt = 1i <ad[0]>\nd<a[0]>/dt = -1i <a[0]>\n");
}

TEST_CASE("moment keys validate their input") {
    CHECK_THROWS_AS(MomentKey({annihilate_op(0), create_op(0)}), std::invalid_argument);
    CHECK_THROWS_AS(MomentKey({position_op(0)}), std::invalid_argument);
    const MomentKey k({create_op(0), annihilate_op(0), create_op(1)});
    CHECK(k.adjoint() == MomentKey({create_op(0), annihilate_op(0), annihilate_op(1)}));
    CHECK(k.adjoint().adjoint() == k);
}
