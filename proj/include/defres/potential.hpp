#pragma once

#include <cstdint>
#include <vector>

namespace defres {

/// 1-periodic background  sum_n a_n cos(2 pi n x) + sum_{n>=1} b_n sin(2 pi n x).
struct PeriodicPotential {
    std::vector<double> cos_coeffs;  ///< a_0, a_1, ...
    std::vector<double> sin_coeffs;  ///< b_1, b_2, ...

    double operator()(double x) const;

    bool is_constant() const;
};

enum class DefectShape { smooth_bump, cosine_window };

/// Compactly supported defect centred at `center`, vanishing identically for
/// |x - center| >= rho.
struct DefectPotential {
    double amplitude = 0.0;
    double rho = 0.5;
    DefectShape shape = DefectShape::smooth_bump;
    double center = 0.0;

    double operator()(double x) const;

    /// Radius about the origin outside which the defect vanishes.
    double support_radius() const;
};

/// V = V_per + V_def.  With `half_line` set, V vanishes for x < 0.
struct Potential {
    PeriodicPotential periodic;
    DefectPotential defect;
    bool symmetric = false;
    bool half_line = false;

    double operator()(double x) const;

    /// Radius rho about the origin beyond which V coincides with V_per
    /// (on the right, for half-line potentials).
    double rho() const;

    /// Smallest integer >= rho; integer base points align periods.
    double rho_ceil() const;
};

double eval(const Potential& p, double x);

/// V restricted to [-M, M] and zero outside.  Throws ConfigError when M <= rho.
double eval_truncated(const Potential& p, double M, double x);

/// Randomised check V(-x) == V(x) at `n` points in [-(rho + 3), rho + 3].
bool check_parity(const Potential& p, double tol = 1e-12, int n = 100, std::uint64_t seed = 0x5eed);

/// Throws ConfigError for malformed potentials (rho <= 0, symmetric flag that
/// fails the parity check, half-line flag together with the symmetric flag).
void validate(const Potential& p);

}  // namespace defres
