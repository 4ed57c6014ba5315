#pragma once

// Complex-valued Schrodinger IVP  u'' = (V(x) - z) u  and its z-variational
// systems, integrated with an adaptive Dormand-Prince 8(5,3) pair.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <concepts>
#include <limits>
#include <vector>

#include <Eigen/Dense>

#include "defres/detail/dop853_tableau.hpp"
#include "defres/errors.hpp"

namespace defres {

using Complex = std::complex<double>;
using StateVector = Eigen::Vector2cd;
using TransferMatrix = Eigen::Matrix2cd;

template <int N>
using ComplexVector = Eigen::Matrix<Complex, N, 1>;

template <class F>
concept ScalarField = requires(const F& f, double x) {
    { f(x) } -> std::convertible_to<double>;
};

/// Step points of an accepted adaptive integration; front() == x0, back() == x1.
using Mesh = std::vector<double>;

struct OdeOptions {
    double tol = 1e-10;  ///< absolute and relative
    long max_steps = 10'000'000;
};

struct VariationalState {
    StateVector u = StateVector::Zero();
    StateVector dz_u = StateVector::Zero();
    StateVector dz2_u = StateVector::Zero();
};

namespace detail {

template <int N>
double rms_scaled(const ComplexVector<N>& v, const Eigen::Matrix<double, N, 1>& scale)
{
    return std::sqrt((v.cwiseAbs().array() / scale.array()).square().sum() / N);
}

template <int N, class Rhs>
struct Dop853 {
    using Vec = ComplexVector<N>;
    const Rhs& f;
    std::array<Vec, dop853::kStages + 1> K;

    // One step of size h from (x, y) with f(x, y) = f0 already in hand.
    Vec step(double x, double h, const Vec& y, const Vec& f0)
    {
        using namespace dop853;
        K[0] = f0;
        for (int s = 1; s < kStages; ++s) {
            Vec dy = Vec::Zero();
            for (int j = 0; j < s; ++j)
                if (kA[s][j] != 0.0) dy += kA[s][j] * K[j];
            K[s] = f(x + kC[s] * h, (y + h * dy).eval());
        }
        Vec incr = Vec::Zero();
        for (int j = 0; j < kStages; ++j)
            if (kB[j] != 0.0) incr += kB[j] * K[j];
        return y + h * incr;
    }

    double error_norm(double h, const Vec& y, const Vec& y_new, double tol) const
    {
        using namespace dop853;
        Vec e5 = Vec::Zero(), e3 = Vec::Zero();
        for (int j = 0; j <= kStages; ++j) {
            e5 += kE5[j] * K[j];
            e3 += kE3[j] * K[j];
        }
        const Eigen::Matrix<double, N, 1> scale =
            (tol + tol * y.cwiseAbs().cwiseMax(y_new.cwiseAbs()).array()).matrix();
        const double n5 = (e5.cwiseAbs().array() / scale.array()).square().sum();
        const double n3 = (e3.cwiseAbs().array() / scale.array()).square().sum();
        if (n5 == 0.0 && n3 == 0.0) return 0.0;
        return std::abs(h) * n5 / std::sqrt((n5 + 0.01 * n3) * N);
    }
};

}  // namespace detail

/// Adaptive integration of y' = f(x, y) from x0 to x1 (either direction).
/// Accepted step points are appended to `mesh` when given.
template <int N, class Rhs>
ComplexVector<N> integrate_system(const Rhs& f, double x0, double x1, ComplexVector<N> y,
                                  const OdeOptions& opts = {}, Mesh* mesh = nullptr)
{
    using Vec = ComplexVector<N>;
    if (mesh) {
        mesh->clear();
        mesh->push_back(x0);
    }
    if (x0 == x1) return y;
    const double dir = x1 > x0 ? 1.0 : -1.0;
    const double tol = opts.tol;
    detail::Dop853<N, Rhs> rk{f, {}};

    Vec f0 = f(x0, y);

    // Initial step (Hairer, Norsett & Wanner, II.4).
    double h;
    {
        const Eigen::Matrix<double, N, 1> scale = (tol + tol * y.cwiseAbs().array()).matrix();
        const double d0 = detail::rms_scaled<N>(y, scale);
        const double d1 = detail::rms_scaled<N>(f0, scale);
        double h0 = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
        h0 = std::min(h0, std::abs(x1 - x0));
        const Vec y1 = y + dir * h0 * f0;
        const Vec f1 = f(x0 + dir * h0, y1);
        const double d2 = detail::rms_scaled<N>((f1 - f0).eval(), scale) / h0;
        const double h1 = (d1 <= 1e-15 && d2 <= 1e-15) ? std::max(1e-6, h0 * 1e-3)
                                                        : std::pow(0.01 / std::max(d1, d2), 1.0 / 8.0);
        h = std::min({100 * h0, h1, std::abs(x1 - x0)});
    }

    double x = x0;
    bool rejected = false;
    for (long n = 0; n < opts.max_steps; ++n) {
        const double min_step = 10 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(x));
        if (h < min_step) throw IntegrationError("step-size underflow", x);
        bool last = false;
        double hs = dir * h;
        if (dir * (x + hs - x1) >= 0.0) {
            hs = x1 - x;
            last = true;
        }
        const Vec y_new = rk.step(x, hs, y, f0);
        const double x_new = last ? x1 : x + hs;
        const Vec f_new = f(x_new, y_new);
        rk.K[detail::dop853::kStages] = f_new;
        const double err = rk.error_norm(hs, y, y_new, tol);
        if (err < 1.0) {
            double factor = err == 0.0 ? 10.0 : std::min(10.0, 0.9 * std::pow(err, -1.0 / 8.0));
            if (rejected) factor = std::min(1.0, factor);
            x = x_new;
            y = y_new;
            f0 = f_new;
            if (mesh) mesh->push_back(x);
            if (last) return y;
            h = std::abs(hs) * factor;
            rejected = false;
        } else {
            h = std::abs(hs) * std::max(0.2, 0.9 * std::pow(err, -1.0 / 8.0));
            rejected = true;
        }
    }
    throw IntegrationError("maximum number of steps exceeded", x);
}

/// Integration along a prescribed mesh without error control.  Reusing the mesh
/// of a nearby reference integration makes the result an analytic function of
/// the parameters of `f`.
template <int N, class Rhs>
ComplexVector<N> integrate_system_on_mesh(const Rhs& f, const Mesh& mesh, ComplexVector<N> y)
{
    detail::Dop853<N, Rhs> rk{f, {}};
    for (std::size_t i = 0; i + 1 < mesh.size(); ++i) {
        const double x = mesh[i];
        y = rk.step(x, mesh[i + 1] - x, y, f(x, y));
    }
    return y;
}

namespace detail {

template <class F>
struct SchrodingerRhs {
    const F& V;
    Complex z;
    ComplexVector<2> operator()(double x, const ComplexVector<2>& y) const
    {
        return {y[1], (V(x) - z) * y[0]};
    }
};

template <class F>
struct PairRhs {
    const F& V;
    Complex z;
    ComplexVector<4> operator()(double x, const ComplexVector<4>& y) const
    {
        const Complex q = V(x) - z;
        ComplexVector<4> r;
        r << y[1], q * y[0], y[3], q * y[2];
        return r;
    }
};

// (u, u', d_z u, d_z u', d_z^2 u, d_z^2 u')
template <class F>
struct VariationalRhs {
    const F& V;
    Complex z;
    ComplexVector<6> operator()(double x, const ComplexVector<6>& y) const
    {
        const Complex q = V(x) - z;
        ComplexVector<6> r;
        r << y[1], q * y[0], y[3], q * y[2] - y[0], y[5], q * y[4] - 2.0 * y[2];
        return r;
    }
};

inline ComplexVector<6> pack(const VariationalState& s)
{
    ComplexVector<6> y;
    y << s.u, s.dz_u, s.dz2_u;
    return y;
}

inline VariationalState unpack(const ComplexVector<6>& y)
{
    return {y.segment<2>(0), y.segment<2>(2), y.segment<2>(4)};
}

}  // namespace detail

/// (u(x1), u'(x1)) for the solution with data `init` at x0.
template <ScalarField F>
StateVector integrate(const F& V, Complex z, double x0, double x1, const StateVector& init,
                      const OdeOptions& opts = {})
{
    return integrate_system<2>(detail::SchrodingerRhs<F>{V, z}, x0, x1, ComplexVector<2>(init), opts);
}

/// Columns: solutions with data (1,0) and (0,1) at x0, evaluated at x1.
template <ScalarField F>
TransferMatrix transfer_matrix(const F& V, Complex z, double x0, double x1, const OdeOptions& opts = {})
{
    ComplexVector<4> y;
    y << 1.0, 0.0, 0.0, 1.0;
    y = integrate_system<4>(detail::PairRhs<F>{V, z}, x0, x1, y, opts);
    TransferMatrix T;
    T << y[0], y[2], y[1], y[3];
    return T;
}

template <ScalarField F>
VariationalState integrate_variational(const F& V, Complex z, double x0, double x1,
                                       const VariationalState& init, const OdeOptions& opts = {},
                                       Mesh* mesh = nullptr)
{
    return detail::unpack(
        integrate_system<6>(detail::VariationalRhs<F>{V, z}, x0, x1, detail::pack(init), opts, mesh));
}

template <ScalarField F>
VariationalState integrate_variational_on_mesh(const F& V, Complex z, const Mesh& mesh,
                                               const VariationalState& init)
{
    return detail::unpack(integrate_system_on_mesh<6>(detail::VariationalRhs<F>{V, z}, mesh, detail::pack(init)));
}

/// Solution values at each of `xs` (monotone, starting point excluded) for
/// data `init` at x0.
template <ScalarField F>
std::vector<StateVector> integrate_sampled(const F& V, Complex z, double x0, const std::vector<double>& xs,
                                           const StateVector& init, const OdeOptions& opts = {})
{
    std::vector<StateVector> out;
    out.reserve(xs.size());
    StateVector y = init;
    double x = x0;
    for (double xn : xs) {
        y = integrate(V, z, x, xn, y, opts);
        x = xn;
        out.push_back(y);
    }
    return out;
}

/// Value data of the pair (u, v) at x1 together with the running quadratures
/// int_{x0}^{x1} u^2 and int_{x0}^{x1} u v (signed, so negative for x1 < x0).
struct PairWithIntegrals {
    StateVector u;
    StateVector v;
    Complex int_uu;
    Complex int_uv;
};

template <ScalarField F>
PairWithIntegrals integrate_with_integrals(const F& V, Complex z, double x0, double x1, const StateVector& u0,
                                           const StateVector& v0, const OdeOptions& opts = {})
{
    auto rhs = [&V, z](double x, const ComplexVector<6>& y) {
        const Complex q = V(x) - z;
        ComplexVector<6> r;
        r << y[1], q * y[0], y[3], q * y[2], y[0] * y[0], y[0] * y[2];
        return r;
    };
    ComplexVector<6> y;
    y << u0, v0, 0.0, 0.0;
    y = integrate_system<6>(rhs, x0, x1, y, opts);
    return {y.segment<2>(0), y.segment<2>(2), y[4], y[5]};
}

}  // namespace defres
