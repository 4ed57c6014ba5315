#include "defres/potential.hpp"

#include <cmath>
#include <complex>
#include <numbers>
#include <random>
#include <string>

#include "defres/errors.hpp"

namespace defres {

double PeriodicPotential::operator()(double x) const
{
    // Reduce first so that V(x + 1) == V(x) up to the rounding of x + 1.
    const double t = x - std::floor(x);
    const std::complex<double> step = std::polar(1.0, 2.0 * std::numbers::pi * t);
    std::complex<double> phase(1.0, 0.0);
    double value = 0.0;
    const std::size_t n = std::max(cos_coeffs.size(), sin_coeffs.size() + 1);
    for (std::size_t j = 0; j < n; ++j) {
        if (j < cos_coeffs.size()) value += cos_coeffs[j] * phase.real();
        if (j >= 1 && j - 1 < sin_coeffs.size()) value += sin_coeffs[j - 1] * phase.imag();
        phase *= step;
    }
    return value;
}

bool PeriodicPotential::is_constant() const
{
    for (std::size_t j = 1; j < cos_coeffs.size(); ++j)
        if (cos_coeffs[j] != 0.0) return false;
    for (double b : sin_coeffs)
        if (b != 0.0) return false;
    return true;
}

double DefectPotential::operator()(double x) const
{
    const double s = (x - center) / rho;
    if (amplitude == 0.0 || std::abs(s) >= 1.0) return 0.0;
    switch (shape) {
    case DefectShape::smooth_bump:
        return amplitude * std::exp(-1.0 / (1.0 - s * s));
    case DefectShape::cosine_window: {
        const double c = std::cos(0.5 * std::numbers::pi * s);
        return amplitude * c * c;
    }
    }
    return 0.0;
}

double DefectPotential::support_radius() const { return std::abs(center) + rho; }

double Potential::operator()(double x) const
{
    if (half_line && x < 0.0) return 0.0;
    return periodic(x) + defect(x);
}

double Potential::rho() const { return defect.support_radius(); }

double Potential::rho_ceil() const { return std::ceil(rho()); }

double eval(const Potential& p, double x) { return p(x); }

double eval_truncated(const Potential& p, double M, double x)
{
    if (!(M > p.rho()))
        throw ConfigError("truncation radius M = " + std::to_string(M) +
                          " must exceed the defect support radius rho = " + std::to_string(p.rho()));
    return std::abs(x) <= M ? p(x) : 0.0;
}

bool check_parity(const Potential& p, double tol, int n, std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    const double r = p.rho() + 3.0;
    std::uniform_real_distribution<double> dist(-r, r);
    for (int i = 0; i < n; ++i) {
        const double x = dist(rng);
        if (std::abs(p(-x) - p(x)) > tol) return false;
    }
    return true;
}

void validate(const Potential& p)
{
    if (!(p.defect.rho > 0.0)) throw ConfigError("potential.defect.rho: must be > 0");
    if (!std::isfinite(p.defect.amplitude) || !std::isfinite(p.defect.center))
        throw ConfigError("potential.defect: amplitude and center must be finite");
    if (p.symmetric && p.half_line)
        throw ConfigError("potential: symmetric and half_line are mutually exclusive");
    if (p.symmetric && !check_parity(p))
        throw ConfigError("potential.symmetric: V(-x) != V(x) at sampled points");
}

}  // namespace defres
