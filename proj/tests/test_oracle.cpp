#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "ehrenfest/expr_io.hpp"
#include "ehrenfest/fock_oracle.hpp"
#include "ehrenfest/hamiltonian.hpp"
#include "test_util.hpp"

using namespace ehrenfest;
using cplx = std::complex<double>;

TEST_CASE("vacuum expectations") {
    DenseState vac(1, 12);
    vac.amplitudes()[0] = 1.0;
    CHECK(std::abs(oracle_expectation(vac, parse_expr("n[0]"))) == 0.0);
    CHECK(std::abs(oracle_expectation(vac, parse_expr("ad[0] a[0]"))) == 0.0);
    CHECK(oracle_expectation(vac, OperatorExpr::identity()) == cplx(1.0));
}

TEST_CASE("coherent state at d=16: <a> = alpha within tail error") {
    const auto state = dense_state_from_spec(ProductCoherent{{cplx(1.0)}}, 16);
    CHECK(std::abs(oracle_expectation(state, parse_expr("a[0]")) - cplx(1.0)) < 1e-8);
    CHECK(std::abs(oracle_expectation(state, parse_expr("n[0]")) - cplx(1.0)) < 1e-8);
}

TEST_CASE("pair state: <q1> = sqrt2 xi / (1 + xi^2)") {
    const auto state = dense_state_from_spec(EntangledPaper{1.0, 0.5, 0.0, 2}, 12);
    const auto q1 = oracle_expectation(state, parse_expr("q[1]"));
    CHECK(std::abs(q1 - cplx(1.0 / std::sqrt(2.0))) < 1e-10);
}

TEST_CASE("truncation and range guards") {
    DenseState s(2, 8);
    s.amplitudes()[0] = 1.0;
    CHECK_THROWS_AS(oracle_expectation(s, parse_expr("a[3]")), std::invalid_argument);
    CHECK_THROWS_AS(
        oracle_expectation(s, parse_expr("a[0] a[0] a[0] a[0] a[0]")), std::invalid_argument);
}

TEST_CASE("hermiticity witness accepts H and rejects non-Hermitian operators") {
    DenseState ws(2, 10);
    const auto h = build_hamiltonian({2, {1.0, 1.3}, {{0, 1, 0.2}}, {}});
    CHECK(oracle_hermitian(ws, h.static_part));
    CHECK_FALSE(oracle_hermitian(ws, parse_expr("a[0]")));
    CHECK_FALSE(oracle_hermitian(ws, parse_expr("i n[0]")));
}

TEST_CASE("eigenstate evolution acquires only phase") {
    DenseState one(1, 10);
    one.amplitudes()[1] = 1.0;  // |1>
    const auto h = parse_expr("n[0] + (1/2)");
    const auto snaps = oracle_evolve(one, h, uniform_grid(5.0, 64));
    for (const auto& s : snaps) {
        CHECK(std::abs(oracle_expectation(s, parse_expr("n[0]")) - cplx(1.0)) < 1e-9);
        CHECK(std::abs(s.norm() - 1.0) < 1e-6);
    }
}

TEST_CASE("coherent evolution reproduces sqrt2 cos t") {
    const auto state = dense_state_from_spec(ProductCoherent{{cplx(1.0)}}, 16);
    const auto h = build_hamiltonian({1, {1.0}, {}, {}});
    const auto grid = uniform_grid(12.0, 256);
    const auto snaps = oracle_evolve(state, h.static_part, grid);
    for (std::size_t k = 0; k < grid.count; ++k) {
        const auto q = oracle_expectation(snaps[k], parse_expr("q[0]"));
        CHECK(std::abs(q - cplx(std::sqrt(2.0) * std::cos(grid.time(k)))) < 1e-6);
    }
}

TEST_CASE("commutator fidelity against dense matrix commutators") {
    std::mt19937 rng(404);
    DenseState geom(3, 12);
    std::normal_distribution<double> g;
    for (int rep = 0; rep < 30; ++rep) {
        const auto a = testutil::random_ladder_expr(rng, 3, 3, 3);
        const auto b = testutil::random_ladder_expr(rng, 3, 3, 3);
        const auto c = commutator(a, b);

        std::vector<cplx> v(geom.amplitudes().size());
        for (auto& x : v) x = {g(rng), g(rng)};
        const auto ab = geom.apply_expr(geom.apply_expr(v, b), a);
        const auto ba = geom.apply_expr(geom.apply_expr(v, a), b);
        const auto direct = geom.apply_expr(v, c);
        double scale = 1.0;
        for (const auto& x : ab) scale = std::max(scale, std::abs(x));
        for (std::size_t i = 0; i < v.size(); ++i) {
            if (!away_from_truncation_edge(geom, i)) continue;
            CHECK(std::abs((ab[i] - ba[i]) - direct[i]) < 1e-10 * scale);
        }
    }
}

TEST_CASE("evolution guards: non-Hermitian generator and norm drift") {
    const auto state = dense_state_from_spec(ProductCoherent{{cplx(1.0)}}, 12);
    CHECK_THROWS_AS(oracle_evolve(state, parse_expr("a[0]"), uniform_grid(1.0, 16)),
                    std::invalid_argument);

    // truncated Hermitian evolution is exactly unitary, so drift can only come
    // from integration error; a deliberately sloppy solver must trip the guard
    Rk45 sloppy;
    sloppy.rtol = 1e-2;
    sloppy.atol = 1e-2;
    const auto h = build_hamiltonian({1, {1.0}, {}, {}});
    CHECK_THROWS_AS(oracle_evolve(state, h.static_part, uniform_grid(200.0, 32), sloppy),
                    std::runtime_error);
}
