#include "defres/floquet.hpp"

#include <cmath>
#include <string>

#include "defres/errors.hpp"

namespace defres {

FloquetData monodromy(const PeriodicPotential& pp, Complex z, double tol, double base)
{
    FloquetData f;
    f.monodromy = transfer_matrix(pp, z, base, base + 1.0, OdeOptions{tol});
    f.discriminant = f.monodromy.trace();
    const Complex delta = f.discriminant;
    Complex s = std::sqrt(delta * delta - 4.0);
    if (std::real(std::conj(delta) * s) < 0.0) s = -s;
    f.lambda_large = 0.5 * (delta + s);
    f.lambda_small = f.monodromy.determinant() / f.lambda_large;
    f.k = -std::log(std::abs(f.lambda_small));
    return f;
}

std::vector<SpectralInterval> BandGapReport::gaps() const
{
    std::vector<SpectralInterval> out;
    for (const auto& iv : intervals)
        if (iv.kind == SpectralKind::gap) out.push_back(iv);
    return out;
}

namespace {

bool in_gap(Complex delta) { return std::abs(delta.real()) - 2.0 > kGapThreshold; }

}  // namespace

BandGapReport band_gap_scan(const PeriodicPotential& pp, double z_min, double z_max, int n_samples,
                            double resolution, double tol)
{
    if (n_samples < 2) throw ConfigError("band_gap_scan: n_samples must be >= 2");
    if (!(z_max > z_min)) throw ConfigError("band_gap_scan: window must satisfy z_min < z_max");

    BandGapReport report;
    report.resolution = resolution;
    const double dz = (z_max - z_min) / (n_samples - 1);
    for (int j = 0; j < n_samples; ++j) {
        const double z = j + 1 == n_samples ? z_max : z_min + j * dz;
        const Complex d = monodromy(pp, z, tol).discriminant;
        report.samples.push_back({z, d, in_gap(d)});
    }

    double start = z_min;
    for (int j = 0; j + 1 < n_samples; ++j) {
        const auto& a = report.samples[j];
        const auto& b = report.samples[j + 1];
        if (a.in_gap == b.in_gap) continue;
        double lo = a.z, hi = b.z;
        while (hi - lo > resolution) {
            const double mid = 0.5 * (lo + hi);
            if (in_gap(monodromy(pp, mid, tol).discriminant) == a.in_gap)
                lo = mid;
            else
                hi = mid;
        }
        const double edge = 0.5 * (lo + hi);
        report.intervals.push_back({start, edge, a.in_gap ? SpectralKind::gap : SpectralKind::band});
        start = edge;
    }
    report.intervals.push_back(
        {start, z_max, report.samples.back().in_gap ? SpectralKind::gap : SpectralKind::band});
    return report;
}

namespace {

Eigen::Vector2d eigenvector(const Eigen::Matrix2d& T, double lambda)
{
    const Eigen::Vector2d a(T(0, 1), lambda - T(0, 0));
    const Eigen::Vector2d b(lambda - T(1, 1), T(1, 0));
    const Eigen::Vector2d r = a.norm() >= b.norm() ? a : b;
    return r.normalized();
}

}  // namespace

GapBasis gap_basis(const PeriodicPotential& pp, double E, double base, double tol)
{
    const FloquetData f = monodromy(pp, E, tol, base);
    if (!in_gap(f.discriminant))
        throw PreconditionError("energy " + std::to_string(E) + " lies in a band (|Delta| = " +
                                std::to_string(std::abs(f.discriminant.real())) + ")");
    const Eigen::Matrix2d T = f.monodromy.real();
    GapBasis g;
    g.lambda_large = f.lambda_large.real();
    g.lambda_small = f.lambda_small.real();
    g.k = f.k;
    g.r_small = eigenvector(T, g.lambda_small);
    g.r_large = eigenvector(T, g.lambda_large);
    return g;
}

BlochFactors bloch_factors(const PeriodicPotential& pp, double E, int n, double base, double tol)
{
    const GapBasis g = gap_basis(pp, E, base, tol);
    auto normalize = [](Eigen::Vector2d r) {
        return std::abs(r[0]) > 1e-12 ? Eigen::Vector2d(r / r[0]) : Eigen::Vector2d(r / r[1]);
    };
    BlochFactors b;
    b.k = g.k;
    b.lambda_small = g.lambda_small;
    b.sign = g.lambda_small < 0.0 ? -1 : 1;
    b.decaying_data = normalize(g.r_small).cast<Complex>();
    b.growing_data = normalize(g.r_large).cast<Complex>();

    const OdeOptions opts{tol};
    StateVector us = b.decaying_data, ul = b.growing_data;
    double x = base;
    for (int j = 0; j <= n; ++j) {
        const double xn = base + static_cast<double>(j) / n;
        us = integrate(pp, E, x, xn, us, opts);
        ul = integrate(pp, E, x, xn, ul, opts);
        x = xn;
        b.x.push_back(xn);
        b.p.push_back(std::exp(g.k * (xn - base)) * us[0].real());
        b.q.push_back(std::exp(-g.k * (xn - base)) * ul[0].real());
    }
    return b;
}

}  // namespace defres
