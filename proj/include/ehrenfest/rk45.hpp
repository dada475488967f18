#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace ehrenfest {

/// Adaptive Dormand-Prince 5(4) pair over complex state vectors. Steps are
/// clamped onto requested sample times, so no separate dense-output
/// interpolant is needed.
class Rk45 {
  public:
    using State = std::vector<std::complex<double>>;
    using Rhs = std::function<void(double, const State&, State&)>;

    double rtol{1e-10};
    double atol{1e-12};
    double fixed_step{0.0};  // > 0 forces constant steps (no error control)

    /// Integrates from (t0, y) to t1, advancing y in place.
    void advance(const Rhs& rhs, double& t, State& y, double t1) {
        if (t1 == t) return;
        const double dir = t1 > t ? 1.0 : -1.0;
        State k1(y.size()), k2(y.size()), k3(y.size()), k4(y.size()), k5(y.size()), k6(y.size()),
            k7(y.size()), ytmp(y.size()), ynew(y.size());
        rhs(t, y, k1);
        double h = fixed_step > 0.0 ? dir * fixed_step : dir * initial_step(rhs, t, y, k1);
        while (dir * (t1 - t) > 0.0) {
            bool last = false;
            if (dir * (t + h - t1) >= 0.0) {
                h = t1 - t;
                last = true;
            }
            if (std::abs(h) < 1e-14 * std::max(1.0, std::abs(t))) {
                // a vanishing remainder after the final clamp is round-off, not failure
                if (last) {
                    t = t1;
                    break;
                }
                throw std::runtime_error("rk45: step size underflow at t = " + std::to_string(t));
            }

            auto stage = [&](State& k, double c, const double* a, int na) {
                for (std::size_t i = 0; i < y.size(); ++i) {
                    std::complex<double> acc = y[i];
                    const State* ks[] = {&k1, &k2, &k3, &k4, &k5, &k6};
                    for (int s = 0; s < na; ++s) acc += h * a[s] * (*ks[s])[i];
                    ytmp[i] = acc;
                }
                rhs(t + c * h, ytmp, k);
            };
            static constexpr double a2[] = {1.0 / 5};
            static constexpr double a3[] = {3.0 / 40, 9.0 / 40};
            static constexpr double a4[] = {44.0 / 45, -56.0 / 15, 32.0 / 9};
            static constexpr double a5[] = {19372.0 / 6561, -25360.0 / 2187, 64448.0 / 6561,
                                            -212.0 / 729};
            static constexpr double a6[] = {9017.0 / 3168, -355.0 / 33, 46732.0 / 5247,
                                            49.0 / 176, -5103.0 / 18656};
            static constexpr double b5[] = {35.0 / 384, 0.0, 500.0 / 1113, 125.0 / 192,
                                            -2187.0 / 6784, 11.0 / 84};
            static constexpr double b4[] = {5179.0 / 57600,    0.0,         7571.0 / 16695,
                                            393.0 / 640,       -92097.0 / 339200,
                                            187.0 / 2100};
            static constexpr double e7 = 1.0 / 40;  // b4 weight of k7

            stage(k2, 1.0 / 5, a2, 1);
            stage(k3, 3.0 / 10, a3, 2);
            stage(k4, 4.0 / 5, a4, 3);
            stage(k5, 8.0 / 9, a5, 4);
            stage(k6, 1.0, a6, 5);
            for (std::size_t i = 0; i < y.size(); ++i) {
                ynew[i] = y[i] + h * (b5[0] * k1[i] + b5[2] * k3[i] + b5[3] * k4[i] +
                                      b5[4] * k5[i] + b5[5] * k6[i]);
            }
            rhs(t + h, ynew, k7);  // FSAL

            double err = 0.0;
            for (std::size_t i = 0; i < y.size(); ++i) {
                const std::complex<double> e =
                    h * ((b5[0] - b4[0]) * k1[i] + (b5[2] - b4[2]) * k3[i] +
                         (b5[3] - b4[3]) * k4[i] + (b5[4] - b4[4]) * k5[i] +
                         (b5[5] - b4[5]) * k6[i] - e7 * k7[i]);
                const double sc = atol + rtol * std::max(std::abs(y[i]), std::abs(ynew[i]));
                const double r = std::abs(e) / sc;
                err += r * r;
            }
            err = std::sqrt(err / std::max<std::size_t>(1, y.size()));
            if (!std::isfinite(err))
                throw std::runtime_error("rk45: non-finite state at t = " + std::to_string(t));

            if (fixed_step > 0.0 || err <= 1.0) {
                t += h;
                y.swap(ynew);
                k1.swap(k7);
            }
            if (fixed_step == 0.0) {
                const double factor =
                    err == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(err, -0.2), 0.2, 5.0);
                h *= factor;
            }
        }
    }

  private:
    double initial_step(const Rhs& rhs, double t, const State& y, const State& f) const {
        double ynorm = 0.0, fnorm = 0.0;
        for (std::size_t i = 0; i < y.size(); ++i) {
            ynorm = std::max(ynorm, std::abs(y[i]));
            fnorm = std::max(fnorm, std::abs(f[i]));
        }
        if (fnorm < 1e-12) return 1e-3;
        return std::clamp(0.01 * std::max(ynorm, 1.0) / fnorm, 1e-8, 0.1);
    }
};

}  // namespace ehrenfest
