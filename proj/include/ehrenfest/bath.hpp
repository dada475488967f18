#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <variant>
#include <vector>

#include "ehrenfest/hamiltonian.hpp"

namespace ehrenfest {

/// J(omega) = 2 gamma omega on [0, cutoff].
struct OhmicDensity {
    double gamma{1.0};
    double cutoff{1.0};
};

/// Lorentzian line centered on `center` with half width `width`, restricted
/// to [support_min, support_max].
struct LorentzianDensity {
    double center{1.0};
    double width{0.1};
    double weight{1.0};
    double support_min{0.2};
    double support_max{1.8};
};

/// Piecewise-linear density from (omega, J) samples.
struct TabulatedDensity {
    std::vector<std::pair<double, double>> points;  // omega ascending
};

using SpectralDensity = std::variant<OhmicDensity, LorentzianDensity, TabulatedDensity>;

inline std::pair<double, double> density_support(const SpectralDensity& d) {
    if (const auto* o = std::get_if<OhmicDensity>(&d)) return {0.0, o->cutoff};
    if (const auto* l = std::get_if<LorentzianDensity>(&d)) return {l->support_min, l->support_max};
    const auto& pts = std::get<TabulatedDensity>(d).points;
    if (pts.size() < 2) throw std::invalid_argument("tabulated density needs >= 2 points");
    return {pts.front().first, pts.back().first};
}

inline double density_value(const SpectralDensity& d, double w) {
    if (const auto* o = std::get_if<OhmicDensity>(&d)) {
        return (w < 0.0 || w > o->cutoff) ? 0.0 : 2.0 * o->gamma * w;
    }
    if (const auto* l = std::get_if<LorentzianDensity>(&d)) {
        if (w < l->support_min || w > l->support_max) return 0.0;
        const double x = (w - l->center) / l->width;
        return l->weight / (1.0 + x * x);
    }
    const auto& pts = std::get<TabulatedDensity>(d).points;
    if (w <= pts.front().first) return pts.front().second;
    if (w >= pts.back().first) return pts.back().second;
    auto it = std::upper_bound(pts.begin(), pts.end(), w,
                               [](double x, const auto& p) { return x < p.first; });
    const auto [w1, j1] = *(it - 1);
    const auto [w2, j2] = *it;
    return j1 + (j2 - j1) * (w - w1) / (w2 - w1);
}

inline void validate_density(const SpectralDensity& d) {
    const auto [lo, hi] = density_support(d);
    if (!(lo >= 0.0) || !(hi > lo)) throw std::invalid_argument("density support must be ordered and non-negative");
    for (int k = 0; k <= 64; ++k) {
        const double w = lo + (hi - lo) * k / 64.0;
        if (density_value(d, w) < 0.0) throw std::invalid_argument("density must be non-negative");
    }
}

namespace detail_bath {

/// Adaptive Simpson quadrature to tolerance tol.
inline double simpson(const std::function<double(double)>& f, double a, double b, double fa,
                      double fm, double fb, double whole, double tol, int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    const double flm = f(lm), frm = f(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    if (depth <= 0 || std::abs(left + right - whole) <= 15.0 * tol)
        return left + right + (left + right - whole) / 15.0;
    return simpson(f, a, m, fa, flm, fm, left, tol * 0.5, depth - 1) +
           simpson(f, m, b, fm, frm, fb, right, tol * 0.5, depth - 1);
}

inline double integrate(const std::function<double(double)>& f, double a, double b, double tol) {
    if (b <= a) return 0.0;
    const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return simpson(f, a, b, fa, fm, fb, whole, tol, 40);
}

}  // namespace detail_bath

/// Equal-weight stratified sampling: omega_k = F^-1((k - 1/2)/n) where F is
/// the normalized cumulative integral of J over its support. Sorted output.
inline std::vector<double> sample_frequencies(const SpectralDensity& density, std::size_t n) {
    if (n < 1) throw std::invalid_argument("sample_frequencies: n must be >= 1");
    validate_density(density);
    const auto [lo, hi] = density_support(density);
    auto j = [&](double w) { return density_value(density, w); };
    const double total = detail_bath::integrate(j, lo, hi, 1e-12);
    if (!(total > 0.0)) throw std::invalid_argument("sample_frequencies: density integrates to zero");

    std::vector<double> out;
    out.reserve(n);
    double left = lo;          // F is monotone; walk the quantiles left to right
    double cdf_left = 0.0;     // F(left) * total
    for (std::size_t k = 1; k <= n; ++k) {
        const double target = total * (double(k) - 0.5) / double(n);
        double a = left, b = hi;
        // bisection on F(w) = target, reusing the integral up to `left`
        for (int iter = 0; iter < 200 && (b - a) > 1e-10 * (hi - lo); ++iter) {
            const double m = 0.5 * (a + b);
            const double cdf_m = cdf_left + detail_bath::integrate(j, left, m, 1e-13);
            if (cdf_m < target) a = m;
            else b = m;
        }
        const double w = 0.5 * (a + b);
        cdf_left += detail_bath::integrate(j, left, w, 1e-13);
        left = w;
        out.push_back(w);
    }
    return out;
}

/// Star-coupled system-plus-bath spec: mode 0 at system_frequency, bath modes
/// at sampled frequencies, all couplings gamma_{0i} = coupling.
struct BathSpec {
    SpectralDensity density{LorentzianDensity{}};
    std::size_t mode_count{1};  // bath modes, excluding the system
    double coupling{0.0};
    double system_frequency{1.0};
};

inline HamiltonianSpec build_star(const BathSpec& spec) {
    if (spec.mode_count < 1) throw std::invalid_argument("build_star: need at least one bath mode");
    HamiltonianSpec h;
    h.mode_count = spec.mode_count + 1;
    h.frequencies.push_back(spec.system_frequency);
    const auto bath = sample_frequencies(spec.density, spec.mode_count);
    h.frequencies.insert(h.frequencies.end(), bath.begin(), bath.end());
    for (std::size_t m = 1; m <= spec.mode_count; ++m)
        h.couplings.push_back({0, static_cast<std::uint32_t>(m), spec.coupling});
    return h;
}

/// Default bath line shape: a high-quality-factor peak at the system
/// frequency. Not taken from published parameter values; configurable.
inline LorentzianDensity default_density(double system_frequency) {
    return {system_frequency, 0.1 * system_frequency, 1.0, 0.2 * system_frequency,
            1.8 * system_frequency};
}

}  // namespace ehrenfest
