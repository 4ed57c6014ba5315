#pragma once

#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "defres/defect.hpp"
#include "defres/ode.hpp"
#include "defres/potential.hpp"

namespace defres {

enum class BranchMode { resonance, bound };

/// resonance: principal root on C \ (-inf, 0];  bound: Im sqrt z > 0 on
/// C \ [0, inf), so that i sqrt(z) = -sqrt|z| on the negative axis.
struct SqrtBranch {
    BranchMode mode = BranchMode::resonance;

    bool on_cut(Complex z) const;
    /// Throws PreconditionError on the cut.
    Complex operator()(Complex z) const;
};

struct ThetaEval {
    Complex theta;
    Complex d_z;
    Complex d_z2;
};

/// Theta^+ at +M and Theta^- at -M for the general (non-parity) problem.
/// Theta is affine in w, so d_w^2 Theta vanishes identically.
struct ThetaPmEval {
    ThetaEval plus;
    ThetaEval minus;
    Complex d_w_plus;
    Complex d_w_minus;
    Complex d_wz_plus;
    Complex d_wz_minus;
};

/// Basis solutions (data (1,0) and (0,1) at the origin) with their first and
/// second z-derivatives at +M and -M.  The step mesh is fixed by an adaptive
/// integration at z_ref and reused for every z, so results are analytic in z.
class Propagator {
public:
    Propagator(const Potential& p, double M, Complex z_ref, double tol = 1e-12, bool both_sides = true);

    struct Columns {
        VariationalState first;   ///< data (1,0)
        VariationalState second;  ///< data (0,1)
    };

    /// side = +1 for x = M, -1 for x = -M.
    Columns propagate(Complex z, int side, bool with_derivs = true) const;

    double M() const { return M_; }
    const Potential& potential() const { return p_; }
    const Mesh& mesh(int side) const { return side > 0 ? plus_ : minus_; }

private:
    const Potential& p_;
    double M_;
    Mesh plus_;
    Mesh minus_;
};

/// Theta for a parity mode (shape.parity even/odd) or a half-line edge mode
/// (shape.half_line, left-decaying data Phi(0) = 1, Phi'(0) = -i sqrt z).
ThetaEval theta(const Propagator& prop, Complex z, const ModeShape& shape, SqrtBranch branch,
                bool with_derivs = true);
ThetaEval theta(const Potential& p, Complex z, double M, const ModeShape& shape, SqrtBranch branch,
                bool with_derivs = true, double tol = 1e-12);

ThetaPmEval theta_pm(const Propagator& prop, Complex w, Complex z, Normalization norm, SqrtBranch branch,
                     bool with_derivs = true);
ThetaPmEval theta_pm(const Potential& p, Complex w, Complex z, double M, Normalization norm, SqrtBranch branch,
                     bool with_derivs = true, double tol = 1e-12);

struct SolveOptions {
    double step_tol = 1e-13;  ///< on |z_{n+1} - z_n|, scaled by max(1, |E|)
    double residual_tol = 1e-11;
    int max_iter = 200;
    int newton_after = 50;
    double ode_tol = 1e-12;
    double precondition_tol = 1e-8;
};

struct ResonanceResult {
    double E = 0.0;
    double M = 0.0;
    double k = 0.0;
    ModeShape shape;
    SqrtBranch branch;
    Complex z_star;
    std::optional<Complex> w_star;
    double residual = 0.0;
    std::vector<Complex> iterates;    ///< z_0 = E, z_1, ...
    std::vector<Complex> w_iterates;  ///< general case only
    Complex asymptotic_z1;
    std::optional<Complex> asymptotic_w1;
    Complex theta_E;   ///< Theta (resp. Theta^+) at E
    Complex dtheta_E;  ///< d_z Theta (resp. the Jacobian determinant) at E
    double lifetime = 0.0;  ///< 1 / (2 |Im z*|); infinite for real roots
    int iterations = 0;
    bool used_newton = false;
    bool rounding_limited = false;  ///< stopped at a floating-point fixed point above residual_tol
    double ball_radius = 0.0;  ///< e^{-kM} / M^2
    bool in_ball = false;
    std::optional<double> precondition_margin;
    std::optional<double> jacobian_scale;  ///< |N(eta)|, general case
};

/// Frozen-derivative iteration z <- z - Theta(z) / d_z Theta(E) from z_0 = E,
/// switching to Newton after `newton_after` iterations without convergence.
ResonanceResult solve_parity(const Potential& p, double E, Parity parity, double M, SqrtBranch branch,
                             const SolveOptions& opts = {});

/// Two-dimensional map zeta <- zeta - Xi Theta(zeta), Xi the inverse Jacobian
/// at eta = (w0, E).
ResonanceResult solve_general(const Potential& p, double E, double w0, Normalization norm, double M,
                              SqrtBranch branch, const SolveOptions& opts = {});

/// Negative-energy bound state of the truncated operator (real iteration).
/// `shape` is a parity shape; throws PreconditionError when the
/// non-degeneracy margin |v'(M) + sqrt|E| v(M)| falls below
/// opts.precondition_tol relative to |v'(M)| + sqrt|E| |v(M)|.
ResonanceResult solve_bound_negative(const Potential& p, double E, Parity parity, double M,
                                     const SolveOptions& opts = {});

/// Edge state of a half-line potential truncated at +M only.
ResonanceResult solve_edge(const Potential& p, double E, double M, const SolveOptions& opts = {});

struct AsymptoticParity {
    Complex z1;
    double re = 0.0;  ///< Re z1, closed form
    double im = 0.0;  ///< Im z1, closed form
    Complex dtheta_vp;       ///< d_z Theta(E) via variation of parameters
    Complex dtheta_leading;  ///< -int_0^M u^2 (v'(M) - i sqrt(E) v(M))
    double int_u2 = 0.0;
    StateVector u_M;
    StateVector v_M;
};

/// First-order prediction for a parity mode from u_E, v_E at M and int_0^M u_E^2.
AsymptoticParity asymptotic_parity(const Potential& p, double E, Parity parity, double M, SqrtBranch branch = {},
                                   double tol = 1e-12);

struct AsymptoticGeneral {
    Complex w1;
    Complex z1;
};

AsymptoticGeneral asymptotic_general(const Potential& p, double E, double w0, Normalization norm, double M,
                                     SqrtBranch branch = {}, double tol = 1e-12);

struct StateSample {
    double x;
    Complex phi;
    Complex dphi;
};

/// Phi* on n equispaced points of [-x_max, x_max]: u_{z*} inside [-M, M]
/// and the outgoing (or decaying) exponential tails outside.
std::vector<StateSample> resonant_state(const Potential& p, const ResonanceResult& r, double x_max, int n,
                                        double tol = 1e-12);

}  // namespace defres
