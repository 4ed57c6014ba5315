#pragma once

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "defres/floquet.hpp"
#include "defres/ode.hpp"
#include "defres/potential.hpp"

namespace defres {

enum class Parity { even, odd, none };

/// Normalization of a mode at the origin: `value` means Phi(0) = 1,
/// Phi'(0) = w; `derivative` means Phi(0) = -w, Phi'(0) = 1.
enum class Normalization { value, derivative };

/// Which solution of the IVP at the origin represents a mode.
struct ModeShape {
    Parity parity = Parity::even;
    double w0 = 0.0;
    Normalization normalization = Normalization::value;
    bool half_line = false;  ///< edge mode: Phi(0) = 1, Phi'(0) = sqrt(-E)

    /// (Phi(0), Phi'(0)) at energy E.
    StateVector initial_data(double E) const;
};

struct ProfileSample {
    double x;
    double phi;
    double dphi;
};

struct DefectMode {
    double E = 0.0;
    ModeShape shape;
    double k = 0.0;
    double k_fit = 0.0;
    double residual = 0.0;  ///< growing coefficient at the residual check point
    std::vector<ProfileSample> profile;
};

std::string to_string(Parity p);
std::string to_string(Normalization n);

/// Unit row vector annihilating the state of the solution that decays as
/// x -> +inf (side = +1, state at X) or as x -> -inf (side = -1, state at -X).
/// Its sign is fixed against `reference` when given, otherwise so that the
/// larger component is positive.
Eigen::RowVector2d growth_functional(const PeriodicPotential& pp, double E, double X, int side,
                                     const Eigen::RowVector2d* reference = nullptr, double tol = 1e-12);

/// Coefficient of the growing Floquet solution at X for the solution with
/// parity data at 0.  Zero exactly at defect eigenvalues of that parity.
double matching_function(const Potential& p, double E, Parity parity, double X,
                         const Eigen::RowVector2d* reference = nullptr, double tol = 1e-12);

struct DefectSearchOptions {
    int n_grid = 400;
    double tol = 1e-13;        ///< root polish width in E
    double X = 0.0;            ///< matching point; 0 selects rho_ceil + 5
    double profile_extent = 0.0;  ///< 0 selects rho_ceil + 8
    int samples_per_unit = 64;
    double ode_tol = 1e-12;
};

/// Defect eigenvalues of the untruncated operator inside `gap`, each with its
/// profile and decay data.  Symmetric potentials are searched per parity
/// class, others through the two-sided determinant, half-line potentials
/// through one-sided matching below zero.
std::vector<DefectMode> find_defect_modes(const Potential& p, const SpectralInterval& gap,
                                          const DefectSearchOptions& opts = {});

/// Samples of Phi on [-x_max, x_max] at spacing 1/samples_per_unit.
std::vector<ProfileSample> profile(const Potential& p, double E, const ModeShape& shape, double x_max,
                                   int samples_per_unit = 64, double tol = 1e-12);

/// Decay rate from a profile: least-squares slope of the log of the per-period
/// maxima of |Phi| on [x_lo, x_hi] (x_lo < x_hi, both on the same side of 0).
double fit_decay_rate(const std::vector<ProfileSample>& profile, double x_lo, double x_hi);

}  // namespace defres
