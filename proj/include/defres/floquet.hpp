#pragma once

#include <vector>

#include <Eigen/Dense>

#include "defres/ode.hpp"
#include "defres/potential.hpp"

namespace defres {

struct FloquetData {
    TransferMatrix monodromy;
    Complex discriminant;  ///< trace of the monodromy
    Complex lambda_small;
    Complex lambda_large;
    double k = 0.0;  ///< -log|lambda_small|
};

/// Transfer matrix of the periodic part over [base, base + 1] and its
/// multipliers, the roots of lambda^2 - Delta lambda + 1.
FloquetData monodromy(const PeriodicPotential& pp, Complex z, double tol = 1e-12, double base = 0.0);

enum class SpectralKind { band, gap };

struct SpectralInterval {
    double lo = 0.0;
    double hi = 0.0;
    SpectralKind kind = SpectralKind::band;
};

struct DiscriminantSample {
    double z;
    Complex discriminant;
    bool in_gap;
};

struct BandGapReport {
    std::vector<SpectralInterval> intervals;  ///< disjoint, ordered, tiling the window
    std::vector<DiscriminantSample> samples;
    double resolution = 0.0;  ///< width to which each transition is bisected

    std::vector<SpectralInterval> gaps() const;
};

/// |Delta| - 2 above this counts as a gap; band edges and touching bands go to
/// the band side.
inline constexpr double kGapThreshold = 1e-9;

BandGapReport band_gap_scan(const PeriodicPotential& pp, double z_min, double z_max, int n_samples,
                            double resolution = 1e-8, double tol = 1e-12);

/// Real eigen-decomposition of the monodromy at a gap energy.
struct GapBasis {
    Eigen::Vector2d r_small;  ///< unit eigenvector, multiplier lambda_small
    Eigen::Vector2d r_large;  ///< unit eigenvector, multiplier lambda_large
    double lambda_small = 0.0;
    double lambda_large = 0.0;
    double k = 0.0;
};

/// Throws PreconditionError when E lies in a band (|Delta(E)| <= 2).
GapBasis gap_basis(const PeriodicPotential& pp, double E, double base = 0.0, double tol = 1e-12);

/// Samples of the Bloch factors over one period:  the decaying solution is
/// e^{-k(x - base)} p(x) and the growing one e^{k(x - base)} q(x).  In gaps
/// with negative multipliers (Delta < -2) p and q are antiperiodic, which
/// `sign` records: p(x + 1) = sign * p(x).
struct BlochFactors {
    std::vector<double> x;  ///< base + j / n, j = 0..n
    std::vector<double> p;
    std::vector<double> q;
    double k = 0.0;
    double lambda_small = 0.0;
    int sign = 1;
    StateVector decaying_data;  ///< (u, u') of the decaying solution at base, p(base) = 1
    StateVector growing_data;
};

BlochFactors bloch_factors(const PeriodicPotential& pp, double E, int n = 64, double base = 0.0,
                           double tol = 1e-12);

}  // namespace defres
