#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "ehrenfest/closure.hpp"
#include "ehrenfest/rk45.hpp"

namespace ehrenfest {

struct TimeGrid {
    double t0{0.0};
    double dt{0.0};
    std::size_t count{0};

    double time(std::size_t k) const { return t0 + dt * static_cast<double>(k); }
};

inline TimeGrid uniform_grid(double t_end, std::size_t samples, double t0 = 0.0) {
    if (samples < 2) throw std::invalid_argument("grid: need at least 2 samples");
    return {t0, (t_end - t0) / static_cast<double>(samples - 1), samples};
}

/// Sampled trajectories of all tracked expectation values.
struct TimeSeries {
    TimeGrid grid;
    std::vector<MomentKey> variable_keys;
    std::vector<std::vector<std::complex<double>>> values;  // [time][variable]

    std::vector<std::complex<double>> column(std::size_t var) const {
        std::vector<std::complex<double>> c(values.size());
        for (std::size_t k = 0; k < values.size(); ++k) c[k] = values[k][var];
        return c;
    }
};

/// RHS of the moment system: y' = C(t) y + f(t).
inline void ode_rhs(const OdeSystem& sys, double t,
                    const std::vector<std::complex<double>>& y,
                    std::vector<std::complex<double>>& dy) {
    for (std::size_t k = 0; k < sys.size(); ++k) {
        std::complex<double> acc = 0.0;
        for (const auto& e : sys.rhs[k]) {
            std::complex<double> c = e.coeff;
            if (e.time_dependence) c *= (*e.time_dependence)(t);
            acc += c * y[e.var];
        }
        for (const auto& f : sys.forcing[k]) acc += f.coeff * f.time_dependence(t);
        dy[k] = acc;
    }
}

inline TimeSeries integrate(const OdeSystem& sys, std::vector<std::complex<double>> y0,
                            const TimeGrid& grid, const Rk45& solver = {}) {
    if (y0.size() != sys.size()) throw std::invalid_argument("integrate: y0 length mismatch");
    if (!(grid.dt > 0.0) || grid.count < 2) throw std::invalid_argument("integrate: bad grid");
    TimeSeries out;
    out.grid = grid;
    out.variable_keys = sys.variables;
    out.values.reserve(grid.count);
    out.values.push_back(y0);
    Rk45 rk = solver;
    auto rhs = [&sys](double t, const Rk45::State& y, Rk45::State& dy) {
        ode_rhs(sys, t, y, dy);
    };
    double t = grid.t0;
    for (std::size_t k = 1; k < grid.count; ++k) {
        rk.advance(rhs, t, y0, grid.time(k));
        out.values.push_back(y0);
    }
    return out;
}

// ---------------------------------------------------------------------------
// small radix-2 FFT, enough for peak extraction and envelopes

namespace detail_fft {

inline void fft_inplace(std::vector<std::complex<double>>& a, bool inverse) {
    const std::size_t n = a.size();
    if (n == 0 || (n & (n - 1)) != 0) throw std::invalid_argument("fft: size must be a power of 2");
    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(a[i], a[j]);
    }
    for (std::size_t len = 2; len <= n; len <<= 1) {
        const double ang = (inverse ? 2.0 : -2.0) * std::numbers::pi / static_cast<double>(len);
        const std::complex<double> wlen(std::cos(ang), std::sin(ang));
        for (std::size_t i = 0; i < n; i += len) {
            std::complex<double> w(1.0);
            for (std::size_t k = 0; k < len / 2; ++k) {
                const auto u = a[i + k];
                const auto v = a[i + k + len / 2] * w;
                a[i + k] = u + v;
                a[i + k + len / 2] = u - v;
                w *= wlen;
            }
        }
    }
    if (inverse)
        for (auto& x : a) x /= static_cast<double>(n);
}

inline std::size_t floor_pow2(std::size_t n) {
    std::size_t p = 1;
    while (p * 2 <= n) p *= 2;
    return p;
}

}  // namespace detail_fft

/// Angular frequency (rad per unit time) of the dominant spectral peak of the
/// real part of one trace: Hann window, DC excluded, quadratic interpolation
/// over the three bins around the maximum. Ties resolve to the lower
/// frequency.
inline double dominant_frequency(const TimeSeries& series, std::size_t var) {
    const auto trace = series.column(var);
    if (trace.size() < 256) throw std::invalid_argument("dominant_frequency: need >= 256 samples");

    const std::size_t n = detail_fft::floor_pow2(trace.size());
    double mean = 0.0;
    for (std::size_t k = 0; k < n; ++k) mean += trace[k].real();
    mean /= static_cast<double>(n);

    bool all_zero = true;
    std::vector<std::complex<double>> buf(n);
    for (std::size_t k = 0; k < n; ++k) {
        const double x = trace[k].real();
        if (x != 0.0) all_zero = false;
        const double hann =
            0.5 * (1.0 - std::cos(2.0 * std::numbers::pi * static_cast<double>(k) /
                                  static_cast<double>(n - 1)));
        buf[k] = (x - mean) * hann;
    }
    if (all_zero) throw std::invalid_argument("dominant_frequency: trace is identically zero");

    detail_fft::fft_inplace(buf, false);
    std::size_t peak = 1;
    double peak_mag = 0.0;
    for (std::size_t k = 1; k <= n / 2; ++k) {
        const double m = std::abs(buf[k]);
        if (m > peak_mag) {
            peak_mag = m;
            peak = k;
        }
    }
    double delta = 0.0;
    if (peak > 1 && peak < n / 2) {
        const double m0 = std::abs(buf[peak - 1]);
        const double m1 = peak_mag;
        const double m2 = std::abs(buf[peak + 1]);
        const double denom = m0 - 2.0 * m1 + m2;
        if (denom != 0.0) delta = 0.5 * (m0 - m2) / denom;
    }
    const double bin = 2.0 * std::numbers::pi / (static_cast<double>(n) * series.grid.dt);
    return (static_cast<double>(peak) + delta) * bin;
}

/// Width of one refined FFT bin for a series of this length and spacing.
inline double frequency_bin_width(const TimeSeries& series) {
    const std::size_t n = detail_fft::floor_pow2(series.values.size());
    return 2.0 * std::numbers::pi / (static_cast<double>(n) * series.grid.dt);
}

/// Magnitude of the analytic signal of the real part of a trace.
inline std::vector<double> hilbert_envelope(const std::vector<double>& x) {
    const std::size_t n = detail_fft::floor_pow2(x.size());
    std::vector<std::complex<double>> buf(n);
    for (std::size_t k = 0; k < n; ++k) buf[k] = x[k];
    detail_fft::fft_inplace(buf, false);
    for (std::size_t k = 1; k < n / 2; ++k) buf[k] *= 2.0;
    for (std::size_t k = n / 2 + 1; k < n; ++k) buf[k] = 0.0;
    detail_fft::fft_inplace(buf, true);
    std::vector<double> env(n);
    for (std::size_t k = 0; k < n; ++k) env[k] = std::abs(buf[k]);
    return env;
}

// ---------------------------------------------------------------------------
// matrix-exponential fast path for exactly linear systems

class DenseMatrix {
  public:
    DenseMatrix(std::size_t n) : n_(n), a_(n * n) {}
    std::complex<double>& operator()(std::size_t r, std::size_t c) { return a_[r * n_ + c]; }
    const std::complex<double>& operator()(std::size_t r, std::size_t c) const {
        return a_[r * n_ + c];
    }
    std::size_t size() const { return n_; }

    DenseMatrix operator*(const DenseMatrix& o) const {
        DenseMatrix r(n_);
        for (std::size_t i = 0; i < n_; ++i)
            for (std::size_t k = 0; k < n_; ++k) {
                const auto v = (*this)(i, k);
                if (v == std::complex<double>(0.0)) continue;
                for (std::size_t j = 0; j < n_; ++j) r(i, j) += v * o(k, j);
            }
        return r;
    }

    std::vector<std::complex<double>> apply(const std::vector<std::complex<double>>& x) const {
        std::vector<std::complex<double>> y(n_);
        for (std::size_t i = 0; i < n_; ++i) {
            std::complex<double> acc = 0.0;
            for (std::size_t j = 0; j < n_; ++j) acc += (*this)(i, j) * x[j];
            y[i] = acc;
        }
        return y;
    }

    double max_abs() const {
        double m = 0.0;
        for (const auto& v : a_) m = std::max(m, std::abs(v));
        return m;
    }

  private:
    std::size_t n_;
    std::vector<std::complex<double>> a_;
};

/// Generator matrix of an autonomous linear system (no drives, no forcing).
inline DenseMatrix system_generator(const OdeSystem& sys) {
    for (std::size_t k = 0; k < sys.size(); ++k) {
        if (!sys.forcing[k].empty()) throw std::invalid_argument("generator: system has forcing");
        for (const auto& e : sys.rhs[k])
            if (e.time_dependence)
                throw std::invalid_argument("generator: system is time dependent");
    }
    DenseMatrix m(sys.size());
    for (std::size_t k = 0; k < sys.size(); ++k)
        for (const auto& e : sys.rhs[k]) m(k, e.var) += e.coeff;
    return m;
}

/// exp(M) by scaling and squaring with a Taylor core.
inline DenseMatrix matrix_exponential(const DenseMatrix& m) {
    const double norm = m.max_abs() * static_cast<double>(m.size());
    int squarings = 0;
    double scale = 1.0;
    while (norm * scale > 0.5) {
        scale *= 0.5;
        ++squarings;
    }
    DenseMatrix scaled(m.size());
    for (std::size_t i = 0; i < m.size(); ++i)
        for (std::size_t j = 0; j < m.size(); ++j) scaled(i, j) = m(i, j) * scale;

    DenseMatrix result(m.size());
    for (std::size_t i = 0; i < m.size(); ++i) result(i, i) = 1.0;
    DenseMatrix term = result;
    for (int k = 1; k <= 20; ++k) {
        term = term * scaled;
        for (std::size_t i = 0; i < m.size(); ++i)
            for (std::size_t j = 0; j < m.size(); ++j) term(i, j) /= static_cast<double>(k);
        double t_norm = 0.0;
        for (std::size_t i = 0; i < m.size(); ++i)
            for (std::size_t j = 0; j < m.size(); ++j) {
                result(i, j) += term(i, j);
                t_norm = std::max(t_norm, std::abs(term(i, j)));
            }
        if (t_norm < 1e-18) break;
    }
    for (int s = 0; s < squarings; ++s) result = result * result;
    return result;
}

///// Validation path for autonomous linear systems: steps the propagator
/// exp(C dt) across the grid.
inline TimeSeries integrate_expm(const OdeSystem& sys, std::vector<std::complex<double>> y0,
                                 const TimeGrid& grid) {
    if (y0.size() != sys.size()) throw std::invalid_argument("integrate_expm: y0 length mismatch");
    DenseMatrix gen = system_generator(sys);
    DenseMatrix step(gen.size());
    for (std::size_t i = 0; i < gen.size(); ++i)
        for (std::size_t j = 0; j < gen.size(); ++j) step(i, j) = gen(i, j) * grid.dt;
    const DenseMatrix propagator = matrix_exponential(step);
    TimeSeries out;
    out.grid = grid;
    out.variable_keys = sys.variables;
    out.values.reserve(grid.count);
    out.values.push_back(y0);
    for (std::size_t k = 1; k < grid.count; ++k) {
        y0 = propagator.apply(y0);
        out.values.push_back(y0);
    }
    return out;
}

///// Derived <q_m> trace from first-moment columns: (<a_m> + <a_m†>)/sqrt2.
inline std::vector<double> position_trace(const TimeSeries& series, std::uint32_t mode) {
    const auto ia = series.variable_keys;
    std::size_t va = ia.size(), vc = ia.size();
    for (std::size_t k = 0; k < ia.size(); ++k) {
        if (ia[k] == MomentKey::annihilator(mode)) va = k;
        if (ia[k] == MomentKey::creator(mode)) vc = k;
    }
    if (va == ia.size() || vc == ia.size())
        throw std::invalid_argument("position_trace: first moments of mode not tracked");
    std::vector<double> q(series.values.size());
    const double s = 1.0 / std::sqrt(2.0);
    for (std::size_t k = 0; k < series.values.size(); ++k)
        q[k] = s * (series.values[k][va] + series.values[k][vc]).real();
    return q;
}

}  // namespace ehrenfest
