#pragma once

// Brute-force fixed-step RK4 for u'' = (V - z) u.  Test-only.

#include <cmath>
#include <complex>

#include <Eigen/Dense>

namespace oracle {

using Complex = std::complex<double>;

template <class F>
Eigen::Vector2cd rk4(const F& V, Complex z, double x0, double x1, Eigen::Vector2cd y, double h)
{
    const long n = std::max(1L, static_cast<long>(std::ceil(std::abs(x1 - x0) / h)));
    const double dx = (x1 - x0) / n;
    auto f = [&](double x, const Eigen::Vector2cd& s) { return Eigen::Vector2cd(s[1], (V(x) - z) * s[0]); };
    double x = x0;
    for (long i = 0; i < n; ++i) {
        const Eigen::Vector2cd k1 = f(x, y);
        const Eigen::Vector2cd k2 = f(x + 0.5 * dx, y + 0.5 * dx * k1);
        const Eigen::Vector2cd k3 = f(x + 0.5 * dx, y + 0.5 * dx * k2);
        const Eigen::Vector2cd k4 = f(x + dx, y + dx * k3);
        y += dx / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        x = x0 + (i + 1) * dx;
    }
    return y;
}

}  // namespace oracle
