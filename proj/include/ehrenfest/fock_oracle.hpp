#pragma once

#include <cmath>
#include <complex>
#include <random>
#include <stdexcept>
#include <vector>

#include "ehrenfest/dynamics.hpp"
#include "ehrenfest/operator_expr.hpp"
#include "ehrenfest/rk45.hpp"
#include "ehrenfest/states.hpp"

namespace ehrenfest {

/// Dense truncated-Fock-space state vector for at most 4 modes. Brute-force
/// reference for the symbolic and closure machinery; never a performance
/// path.
class DenseState {
  public:
    DenseState(std::size_t mode_count, std::size_t truncation)
        : modes_(mode_count), dim_(truncation) {
        if (mode_count == 0 || mode_count > 4)
            throw std::invalid_argument("DenseState: 1..4 modes");
        if (truncation < 2 || truncation > 16)
            throw std::invalid_argument("DenseState: truncation 2..16");
        std::size_t total = 1;
        for (std::size_t m = 0; m < modes_; ++m) total *= dim_;
        amps_.assign(total, 0.0);
    }

    std::size_t mode_count() const { return modes_; }
    std::size_t truncation() const { return dim_; }
    std::vector<std::complex<double>>& amplitudes() { return amps_; }
    const std::vector<std::complex<double>>& amplitudes() const { return amps_; }

    std::size_t stride(std::size_t mode) const {
        std::size_t s = 1;
        for (std::size_t m = mode + 1; m < modes_; ++m) s *= dim_;
        return s;
    }
    std::size_t level(std::size_t index, std::size_t mode) const {
        return (index / stride(mode)) % dim_;
    }

    double norm() const {
        double n2 = 0.0;
        for (const auto& c : amps_) n2 += std::norm(c);
        return std::sqrt(n2);
    }

    void normalize() {
        const double n = norm();
        if (n == 0.0) throw std::invalid_argument("DenseState: zero state");
        for (auto& c : amps_) c /= n;
    }

    /// Applies one operator factor, building q, p, n from their numeric
    /// ladder actions (independent of the symbolic to_ladder route).
    std::vector<std::complex<double>> apply_symbol(
        const std::vector<std::complex<double>>& v, OperatorSymbol s) const {
        std::vector<std::complex<double>> out(v.size(), 0.0);
        const std::size_t str = stride(s.mode);
        auto each = [&](auto&& f) {
            for (std::size_t i = 0; i < v.size(); ++i) {
                if (v[i] == std::complex<double>(0.0)) continue;
                f(i, level(i, s.mode));
            }
        };
        const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
        switch (s.kind) {
            case OpKind::Annihilate:
                each([&](std::size_t i, std::size_t n) {
                    if (n >= 1) out[i - str] += std::sqrt(double(n)) * v[i];
                });
                break;
            case OpKind::Create:
                each([&](std::size_t i, std::size_t n) {
                    if (n + 1 < dim_) out[i + str] += std::sqrt(double(n + 1)) * v[i];
                });
                break;
            case OpKind::Number:
                each([&](std::size_t i, std::size_t n) { out[i] += double(n) * v[i]; });
                break;
            case OpKind::Position:
                each([&](std::size_t i, std::size_t n) {
                    if (n >= 1) out[i - str] += inv_sqrt2 * std::sqrt(double(n)) * v[i];
                    if (n + 1 < dim_) out[i + str] += inv_sqrt2 * std::sqrt(double(n + 1)) * v[i];
                });
                break;
            case OpKind::Momentum:
                each([&](std::size_t i, std::size_t n) {
                    const std::complex<double> im(0.0, 1.0);
                    if (n >= 1) out[i - str] += -im * inv_sqrt2 * std::sqrt(double(n)) * v[i];
                    if (n + 1 < dim_)
                        out[i + str] += im * inv_sqrt2 * std::sqrt(double(n + 1)) * v[i];
                });
                break;
            case OpKind::Identity:
                out = v;
                break;
        }
        return out;
    }

    std::vector<std::complex<double>> apply_expr(
        const std::vector<std::complex<double>>& v, const OperatorExpr& e) const {
        std::vector<std::complex<double>> acc(v.size(), 0.0);
        for (const auto& t : e.terms()) {
            std::vector<std::complex<double>> w = v;
            for (auto it = t.factors.rbegin(); it != t.factors.rend(); ++it)
                w = apply_symbol(w, *it);
            const std::complex<double> c = t.coeff.to_complex();
            for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += c * w[i];
        }
        return acc;
    }

  private:
    std::size_t modes_, dim_;
    std::vector<std::complex<double>> amps_;
};

/// <psi| E |psi> by dense factor application. Rejects expressions whose
/// degree crowds the truncation edge.
inline std::complex<double> oracle_expectation(const DenseState& state, const OperatorExpr& e) {
    if (e.max_mode() >= static_cast<int>(state.mode_count()))
        throw std::invalid_argument("oracle_expectation: mode out of range");
    if (static_cast<std::size_t>(e.degree()) + 4 > state.truncation())
        throw std::invalid_argument("oracle_expectation: degree too close to truncation");
    const auto w = state.apply_expr(state.amplitudes(), e);
    std::complex<double> s = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) s += std::conj(state.amplitudes()[i]) * w[i];
    return s;
}

/// Hermiticity witness through random matrix elements: <u,H v> vs <v,H u>*.
inline bool oracle_hermitian(const DenseState& workspace, const OperatorExpr& h,
                             double tol = 1e-12) {
    std::mt19937 rng(12345);
    std::normal_distribution<double> g;
    double scale = 1.0;
    for (const auto& t : h.terms()) scale = std::max(scale, std::abs(t.coeff.to_complex()));
    for (int rep = 0; rep < 8; ++rep) {
        std::vector<std::complex<double>> u(workspace.amplitudes().size());
        std::vector<std::complex<double>> v(u.size());
        for (auto& x : u) x = {g(rng), g(rng)};
        for (auto& x : v) x = {g(rng), g(rng)};
        const auto hv = workspace.apply_expr(v, h);
        const auto hu = workspace.apply_expr(u, h);
        std::complex<double> uhv = 0.0, vhu = 0.0;
        for (std::size_t i = 0; i < u.size(); ++i) {
            uhv += std::conj(u[i]) * hv[i];
            vhu += std::conj(v[i]) * hu[i];
        }
        const double mag =
            scale * static_cast<double>(u.size()) * static_cast<double>(h.degree() + 1);
        if (std::abs(uhv - std::conj(vhu)) > tol * std::max(1.0, mag)) return false;
    }
    return true;
}

/// Schrodinger evolution i d|psi>/dt = H |psi| on the dense amplitudes,
/// sampled on the grid; norm drift beyond 1e-6 aborts.
inline std::vector<DenseState> oracle_evolve(const DenseState& initial, const OperatorExpr& h,
                                             const TimeGrid& grid, const Rk45& solver = {}) {
    if (!oracle_hermitian(initial, h))
        throw std::invalid_argument("oracle_evolve: Hamiltonian is not Hermitian");
    std::vector<DenseState> snapshots;
    snapshots.reserve(grid.count);
    snapshots.push_back(initial);
    DenseState cur = initial;
    Rk45 rk = solver;
    const std::complex<double> minus_i(0.0, -1.0);
    auto rhs = [&](double, const Rk45::State& y, Rk45::State& dy) {
        dy = cur.apply_expr(y, h);
        for (auto& c : dy) c *= minus_i;
    };
    double t = grid.t0;
    const double norm0 = initial.norm();
    auto amps = initial.amplitudes();
    for (std::size_t k = 1; k < grid.count; ++k) {
        rk.advance(rhs, t, amps, grid.time(k));
        cur.amplitudes() = amps;
        if (std::abs(cur.norm() - norm0) > 1e-6)
            throw std::runtime_error("oracle_evolve: norm drift beyond 1e-6 (truncation leakage)");
        snapshots.push_back(cur);
    }
    return snapshots;
}

/// Builds the dense amplitudes of an InitialStateSpec; the entangled family
/// is limited to a single pair (3 modes) at oracle scale.
inline DenseState dense_state_from_spec(const InitialStateSpec& spec, std::size_t truncation) {
    validate_state(spec);
    const std::size_t modes = state_mode_count(spec);
    DenseState state(modes, truncation);
    auto& amps = state.amplitudes();

    if (const auto* pc = std::get_if<ProductCoherent>(&spec)) {
        std::vector<std::vector<std::complex<double>>> per_mode(modes);
        for (std::size_t m = 0; m < modes; ++m) {
            auto& v = per_mode[m];
            v.resize(truncation);
            const auto alpha = pc->alphas[m];
            std::complex<double> c = std::exp(-0.5 * std::norm(alpha));
            for (std::size_t n = 0; n < truncation; ++n) {
                v[n] = c;
                c *= alpha / std::sqrt(double(n + 1));
            }
        }
        for (std::size_t i = 0; i < amps.size(); ++i) {
            std::complex<double> prod = 1.0;
            for (std::size_t m = 0; m < modes; ++m) prod *= per_mode[m][state.level(i, m)];
            amps[i] = prod;
        }
        return state;
    }
    if (const auto* fs = std::get_if<FockSuperpositionProduct>(&spec)) {
        for (std::size_t i = 0; i < amps.size(); ++i) {
            std::complex<double> prod = 1.0;
            for (std::size_t m = 0; m < modes; ++m) {
                const auto& v = fs->amplitudes[m];
                const std::size_t n = state.level(i, m);
                prod *= n < v.size() ? v[n] : std::complex<double>(0.0);
            }
            amps[i] = prod;
        }
        return state;
    }

    const auto& e = std::get<EntangledPaper>(spec);
    if (e.bath_modes != 2)
        throw std::invalid_argument("dense_state_from_spec: oracle handles one bath pair only");
    const auto a = detail_states::entangled_amplitudes(e);
    const double dnorm = 1.0 / std::sqrt(1.0 + e.delta * e.delta);
    auto pair_amp = [](const std::array<std::complex<double>, 4>& p, std::size_t n1,
                       std::size_t n2) {
        if (n1 > 1 || n2 > 1) return std::complex<double>(0.0);
        return p[2 * n1 + n2];
    };
    for (std::size_t i = 0; i < amps.size(); ++i) {
        const std::size_t n0 = state.level(i, 0);
        if (n0 > 1) continue;
        const std::size_t n1 = state.level(i, 1);
        const std::size_t n2 = state.level(i, 2);
        amps[i] = dnorm * (a.sys1[n0] * pair_amp(a.pair1, n1, n2) +
                           e.delta * a.sys2[n0] * pair_amp(a.pair2, n1, n2));
    }
    state.normalize();
    return state;
}

/// True when index keeps every mode below the truncation edge (top 4 levels
/// excluded), for honest comparisons near the boundary.
inline bool away_from_truncation_edge(const DenseState& state, std::size_t index) {
    for (std::size_t m = 0; m < state.mode_count(); ++m)
        if (state.level(index, m) + 4 >= state.truncation()) return false;
    return true;
}

}  // namespace ehrenfest
