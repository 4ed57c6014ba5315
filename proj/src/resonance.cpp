#include "defres/resonance.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <string>

#include "defres/errors.hpp"
#include "defres/floquet.hpp"

namespace defres {

namespace {

constexpr Complex I{0.0, 1.0};

using Vec12 = ComplexVector<12>;

std::string sci(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3e", v);
    return buf;
}

void require_truncation(const Potential& p, double M)
{
    if (!(M > p.rho()))
        throw ConfigError("truncation radius M = " + std::to_string(M) +
                          " must exceed the defect support radius rho = " + std::to_string(p.rho()));
}

void require_nonzero_energy(double E)
{
    if (E == 0.0) throw PreconditionError("defect eigenvalue E = 0 is not supported");
}

struct ColumnsRhs {
    const Potential& V;
    Complex z;
    Vec12 operator()(double x, const Vec12& y) const
    {
        const Complex q = V(x) - z;
        Vec12 r;
        for (int c = 0; c < 12; c += 6)
            r.segment<6>(c) << y[c + 1], q * y[c], y[c + 3], q * y[c + 2] - y[c], y[c + 5],
                q * y[c + 4] - 2.0 * y[c + 2];
        return r;
    }
};

Vec12 basis_data()
{
    Vec12 y = Vec12::Zero();
    y[0] = 1.0;
    y[7] = 1.0;
    return y;
}

// Initial data a(z) e_1 + b(z) e_2 with z-derivatives.
struct Jet {
    Complex a = 0.0, a1 = 0.0, a2 = 0.0;
    Complex b = 0.0, b1 = 0.0, b2 = 0.0;
};

VariationalState combine(const Propagator::Columns& c, const Jet& j)
{
    VariationalState s;
    s.u = j.a * c.first.u + j.b * c.second.u;
    s.dz_u = j.a1 * c.first.u + j.a * c.first.dz_u + j.b1 * c.second.u + j.b * c.second.dz_u;
    s.dz2_u = j.a2 * c.first.u + 2.0 * j.a1 * c.first.dz_u + j.a * c.first.dz2_u + j.b2 * c.second.u +
              2.0 * j.b1 * c.second.dz_u + j.b * c.second.dz2_u;
    return s;
}

// u'(sM) - s i sqrt(z) u(sM) and its z-derivatives.
ThetaEval outgoing(const VariationalState& st, Complex z, SqrtBranch branch, int side)
{
    const Complex r = branch(z);
    const double sg = side;
    ThetaEval t;
    t.theta = st.u[1] - sg * I * r * st.u[0];
    t.d_z = st.dz_u[1] - sg * I * r * st.dz_u[0] - sg * I / (2.0 * r) * st.u[0];
    t.d_z2 = st.dz2_u[1] - sg * I * r * st.dz2_u[0] - sg * I / r * st.dz_u[0] +
             sg * I / (4.0 * r * r * r) * st.u[0];
    return t;
}

Jet parity_jet(const ModeShape& shape, Complex z, SqrtBranch branch)
{
    Jet j;
    if (shape.half_line) {
        const Complex r = branch(z);
        j.a = 1.0;
        j.b = -I * r;
        j.b1 = -I / (2.0 * r);
        j.b2 = I / (4.0 * r * r * r);
        return j;
    }
    switch (shape.parity) {
    case Parity::even: j.a = 1.0; break;
    case Parity::odd: j.b = 1.0; break;
    case Parity::none:
        throw ConfigError("theta: a parity (even/odd) or half-line mode is required; use theta_pm otherwise");
    }
    return j;
}

Jet general_jet(Complex w, Normalization norm)
{
    Jet j;
    if (norm == Normalization::value) {
        j.a = 1.0;
        j.b = w;
    } else {
        j.a = -w;
        j.b = 1.0;
    }
    return j;
}

Jet general_dw_jet(Normalization norm)
{
    Jet j;
    if (norm == Normalization::value)
        j.b = 1.0;
    else
        j.a = -1.0;
    return j;
}

double decay_rate(const Potential& p, double E, double tol) { return gap_basis(p.periodic, E, p.rho_ceil(), tol).k; }

// Consecutive sub-tolerance steps after which the iterate is taken as a
// fixed point in floating point even if the residual is above tolerance.
constexpr int kStallLimit = 5;

// Size of |Theta| produced by a one-ulp change of the root: no residual
// tolerance below this is meaningful.
double rounding_floor(double scale, double derivative)
{
    return 16.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, scale) * derivative;
}

void finish(ResonanceResult& r)
{
    r.ball_radius = std::exp(-r.k * r.M) / (r.M * r.M);
    r.in_ball = std::abs(r.z_star - r.E) <= r.ball_radius;
    const double im = r.z_star.imag();
    r.lifetime = im < 0.0 ? 1.0 / (2.0 * std::abs(im)) : std::numeric_limits<double>::infinity();
}

// One-dimensional root iteration shared by the parity, bound and edge solvers.
void iterate_scalar(ResonanceResult& r, const std::function<ThetaEval(Complex, bool)>& eval, bool real_axis,
                    const SolveOptions& o)
{
    const ThetaEval at_E = eval(r.E, true);
    r.theta_E = at_E.theta;
    r.dtheta_E = at_E.d_z;
    if (!(std::abs(at_E.d_z) > 0.0) || !std::isfinite(std::abs(at_E.d_z)))
        throw PreconditionError("d_z Theta(E) vanishes or is not finite");
    auto project = [real_axis](Complex c) { return real_axis ? Complex(c.real(), 0.0) : c; };
    r.asymptotic_z1 = project(r.E - at_E.theta / at_E.d_z);

    const double step_tol = o.step_tol * std::max(1.0, std::abs(r.E));
    const double residual_tol = std::max(o.residual_tol, rounding_floor(r.E, std::abs(r.dtheta_E)));
    Complex z = r.E;
    ThetaEval cur = at_E;
    bool newton = false;
    int stalled = 0;
    r.iterates = {z};
    for (int n = 0; n < o.max_iter; ++n) {
        const Complex denom = newton ? cur.d_z : r.dtheta_E;
        const Complex step = project(cur.theta / denom);
        z -= step;
        r.iterates.push_back(z);
        if (n + 1 >= o.newton_after) newton = true;
        cur = eval(z, newton);
        r.residual = std::abs(cur.theta);
        r.iterations = n + 1;
        stalled = std::abs(step) < step_tol ? stalled + 1 : 0;
        if ((stalled > 0 && r.residual < residual_tol) || stalled >= kStallLimit) {
            r.z_star = z;
            r.used_newton = newton && n + 1 > o.newton_after;
            r.rounding_limited = r.residual >= residual_tol;
            return;
        }
    }
    r.z_star = z;
    throw ConvergenceError("root iteration did not converge in " + std::to_string(o.max_iter) +
                           " iterations (residual " + sci(r.residual) + ")");
}

double precondition_margin(const Potential& p, double E, const StateVector& v0, double M, double tol)
{
    const StateVector v = integrate(p, E, 0.0, M, v0, OdeOptions{tol});
    const double a = std::sqrt(-E);
    const double vm = v[0].real(), dvm = v[1].real();
    return std::abs(dvm + a * vm) / (std::abs(dvm) + a * std::abs(vm));
}

StateVector partner_data(Parity parity) { return parity == Parity::odd ? StateVector(-1.0, 0.0) : StateVector(0.0, 1.0); }

}  // namespace

bool SqrtBranch::on_cut(Complex z) const
{
    if (z.imag() != 0.0) return false;
    return mode == BranchMode::resonance ? z.real() <= 0.0 : z.real() >= 0.0;
}

Complex SqrtBranch::operator()(Complex z) const
{
    if (on_cut(z))
        throw PreconditionError(std::string("z = ") + std::to_string(z.real()) + " lies on the branch cut of the " +
                                (mode == BranchMode::resonance ? "resonance" : "bound") + " square root");
    return mode == BranchMode::resonance ? std::sqrt(z) : I * std::sqrt(-z);
}

Propagator::Propagator(const Potential& p, double M, Complex z_ref, double tol, bool both_sides) : p_(p), M_(M)
{
    require_truncation(p, M);
    const OdeOptions opts{tol};
    integrate_system<12>(ColumnsRhs{p, z_ref}, 0.0, M, basis_data(), opts, &plus_);
    if (both_sides) integrate_system<12>(ColumnsRhs{p, z_ref}, 0.0, -M, basis_data(), opts, &minus_);
}

Propagator::Columns Propagator::propagate(Complex z, int side, bool with_derivs) const
{
    const Mesh& mesh = side > 0 ? plus_ : minus_;
    if (mesh.empty()) throw ConfigError("propagator was built without the requested side");
    Columns c;
    if (with_derivs) {
        const Vec12 y = integrate_system_on_mesh<12>(ColumnsRhs{p_, z}, mesh, basis_data());
        c.first = detail::unpack(y.segment<6>(0));
        c.second = detail::unpack(y.segment<6>(6));
    } else {
        ComplexVector<4> y;
        y << 1.0, 0.0, 0.0, 1.0;
        y = integrate_system_on_mesh<4>(detail::PairRhs<Potential>{p_, z}, mesh, y);
        c.first.u = y.segment<2>(0);
        c.second.u = y.segment<2>(2);
    }
    return c;
}

ThetaEval theta(const Propagator& prop, Complex z, const ModeShape& shape, SqrtBranch branch, bool with_derivs)
{
    const Jet j = parity_jet(shape, z, branch);
    return outgoing(combine(prop.propagate(z, +1, with_derivs), j), z, branch, +1);
}

ThetaEval theta(const Potential& p, Complex z, double M, const ModeShape& shape, SqrtBranch branch, bool with_derivs,
                double tol)
{
    branch(z);
    return theta(Propagator(p, M, z, tol, false), z, shape, branch, with_derivs);
}

ThetaPmEval theta_pm(const Propagator& prop, Complex w, Complex z, Normalization norm, SqrtBranch branch,
                     bool with_derivs)
{
    const Jet j = general_jet(w, norm);
    const Jet dj = general_dw_jet(norm);
    ThetaPmEval out;
    for (int side : {+1, -1}) {
        const Propagator::Columns c = prop.propagate(z, side, with_derivs);
        const ThetaEval t = outgoing(combine(c, j), z, branch, side);
        const ThetaEval dw = outgoing(combine(c, dj), z, branch, side);
        if (side > 0) {
            out.plus = t;
            out.d_w_plus = dw.theta;
            out.d_wz_plus = dw.d_z;
        } else {
            out.minus = t;
            out.d_w_minus = dw.theta;
            out.d_wz_minus = dw.d_z;
        }
    }
    return out;
}

ThetaPmEval theta_pm(const Potential& p, Complex w, Complex z, double M, Normalization norm, SqrtBranch branch,
                     bool with_derivs, double tol)
{
    branch(z);
    return theta_pm(Propagator(p, M, z, tol, true), w, z, norm, branch, with_derivs);
}

ResonanceResult solve_parity(const Potential& p, double E, Parity parity, double M, SqrtBranch branch,
                             const SolveOptions& opts)
{
    require_nonzero_energy(E);
    require_truncation(p, M);
    ResonanceResult r;
    r.E = E;
    r.M = M;
    r.branch = branch;
    r.shape.parity = parity;
    r.shape.normalization = parity == Parity::odd ? Normalization::derivative : Normalization::value;
    branch(E);
    r.k = decay_rate(p, E, opts.ode_tol);
    const Propagator prop(p, M, E, opts.ode_tol, false);
    iterate_scalar(
        r, [&](Complex z, bool d) { return theta(prop, z, r.shape, branch, d); }, false, opts);
    finish(r);
    return r;
}

ResonanceResult solve_bound_negative(const Potential& p, double E, Parity parity, double M, const SolveOptions& opts)
{
    require_nonzero_energy(E);
    require_truncation(p, M);
    if (E > 0.0) throw PreconditionError("solve_bound_negative requires E < 0");
    ResonanceResult r;
    r.E = E;
    r.M = M;
    r.branch = SqrtBranch{BranchMode::bound};
    r.shape.parity = parity;
    r.shape.normalization = parity == Parity::odd ? Normalization::derivative : Normalization::value;
    r.k = decay_rate(p, E, opts.ode_tol);
    r.precondition_margin = precondition_margin(p, E, partner_data(parity), M, opts.ode_tol);
    if (!(*r.precondition_margin > opts.precondition_tol))
        throw PreconditionError("non-degeneracy margin |v'(M) + sqrt|E| v(M)| too small: " +
                                sci(*r.precondition_margin));
    const Propagator prop(p, M, E, opts.ode_tol, false);
    iterate_scalar(
        r, [&](Complex z, bool d) { return theta(prop, z, r.shape, r.branch, d); }, true, opts);
    finish(r);
    return r;
}

ResonanceResult solve_edge(const Potential& p, double E, double M, const SolveOptions& opts)
{
    if (!p.half_line) throw ConfigError("solve_edge requires a half-line potential");
    require_nonzero_energy(E);
    require_truncation(p, M);
    if (E > 0.0) throw PreconditionError("solve_edge requires E < 0");
    ResonanceResult r;
    r.E = E;
    r.M = M;
    r.branch = SqrtBranch{BranchMode::bound};
    r.shape.parity = Parity::none;
    r.shape.half_line = true;
    r.shape.w0 = std::sqrt(-E);
    r.k = decay_rate(p, E, opts.ode_tol);
    r.precondition_margin = precondition_margin(p, E, StateVector(0.0, 1.0), M, opts.ode_tol);
    if (!(*r.precondition_margin > opts.precondition_tol))
        throw PreconditionError("non-degeneracy margin |v'(M) + sqrt|E| v(M)| too small: " +
                                sci(*r.precondition_margin));
    const Propagator prop(p, M, E, opts.ode_tol, false);
    iterate_scalar(
        r, [&](Complex z, bool d) { return theta(prop, z, r.shape, r.branch, d); }, true, opts);
    finish(r);
    return r;
}

ResonanceResult solve_general(const Potential& p, double E, double w0, Normalization norm, double M,
                              SqrtBranch branch, const SolveOptions& opts)
{
    require_nonzero_energy(E);
    require_truncation(p, M);
    branch(E);
    ResonanceResult r;
    r.E = E;
    r.M = M;
    r.branch = branch;
    r.shape = ModeShape{Parity::none, w0, norm, false};
    r.k = decay_rate(p, E, opts.ode_tol);
    const Propagator prop(p, M, E, opts.ode_tol, true);

    using Vec2 = Eigen::Vector2cd;
    using Mat2 = Eigen::Matrix2cd;
    auto jacobian = [](const ThetaPmEval& t) {
        Mat2 J;
        J << t.d_w_plus, t.plus.d_z, t.d_w_minus, t.minus.d_z;
        return J;
    };
    auto residual_vec = [](const ThetaPmEval& t) { return Vec2(t.plus.theta, t.minus.theta); };
    auto inverse = [](const Mat2& J) {
        const Complex n = J.determinant();
        if (!(std::abs(n) > 0.0) || !std::isfinite(std::abs(n)))
            throw PreconditionError("singular Jacobian of (Theta+, Theta-)");
        Mat2 X;
        X << J(1, 1), -J(0, 1), -J(1, 0), J(0, 0);
        return Mat2(X / n);
    };

    const ThetaPmEval at_eta = theta_pm(prop, w0, E, norm, branch, true);
    const Mat2 J_eta = jacobian(at_eta);
    r.jacobian_scale = std::abs(J_eta.determinant());
    const Mat2 Xi = inverse(J_eta);
    r.theta_E = at_eta.plus.theta;
    r.dtheta_E = J_eta.determinant();

    const Vec2 eta(w0, E);
    const Vec2 first = eta - Xi * residual_vec(at_eta);
    r.asymptotic_w1 = first[0];
    r.asymptotic_z1 = first[1];

    const double step_tol = opts.step_tol * std::max(1.0, std::abs(E));
    const double residual_tol =
        std::max(opts.residual_tol, rounding_floor(std::max(std::abs(E), std::abs(w0)), J_eta.cwiseAbs().maxCoeff()));
    Vec2 zeta = eta;
    ThetaPmEval cur = at_eta;
    bool newton = false;
    int stalled = 0;
    r.iterates = {Complex(E)};
    r.w_iterates = {Complex(w0)};
    for (int n = 0; n < opts.max_iter; ++n) {
        const Vec2 step = (newton ? inverse(jacobian(cur)) : Xi) * residual_vec(cur);
        zeta -= step;
        r.w_iterates.push_back(zeta[0]);
        r.iterates.push_back(zeta[1]);
        if (n + 1 >= opts.newton_after) newton = true;
        cur = theta_pm(prop, zeta[0], zeta[1], norm, branch, newton);
        r.residual = std::max(std::abs(cur.plus.theta), std::abs(cur.minus.theta));
        r.iterations = n + 1;
        stalled = step.cwiseAbs().maxCoeff() < step_tol ? stalled + 1 : 0;
        if ((stalled > 0 && r.residual < residual_tol) || stalled >= kStallLimit) {
            r.rounding_limited = r.residual >= residual_tol;
            r.z_star = zeta[1];
            r.w_star = zeta[0];
            r.used_newton = newton && n + 1 > opts.newton_after;
            finish(r);
            return r;
        }
    }
    r.z_star = zeta[1];
    r.w_star = zeta[0];
    throw ConvergenceError("two-dimensional iteration did not converge in " + std::to_string(opts.max_iter) +
                           " iterations (residual " + sci(r.residual) + ")");
}

AsymptoticParity asymptotic_parity(const Potential& p, double E, Parity parity, double M, SqrtBranch branch,
                                   double tol)
{
    require_nonzero_energy(E);
    require_truncation(p, M);
    if (parity == Parity::none) throw ConfigError("asymptotic_parity needs an even or odd mode");
    const StateVector u0 = ModeShape{parity}.initial_data(E);
    const PairWithIntegrals d = integrate_with_integrals(p, E, 0.0, M, u0, partner_data(parity), OdeOptions{tol});
    const Complex is = I * branch(E);
    const Complex B = d.int_uu;

    AsymptoticParity a;
    a.u_M = d.u;
    a.v_M = d.v;
    a.int_u2 = B.real();
    const Complex Q = d.u[1] - is * d.u[0];
    const Complex P = d.v[1] - is * d.v[0];
    if (E > 0.0) {
        const double u = d.u[0].real(), du = d.u[1].real(), v = d.v[0].real(), dv = d.v[1].real();
        const double denom = (dv * dv + E * v * v) * a.int_u2;
        a.re = E + (du * dv + E * u * v) / denom;
        a.im = -std::sqrt(E) / denom;
        a.z1 = Complex(a.re, a.im);
    } else {
        a.z1 = E + Q / (B * P);
        a.re = a.z1.real();
        a.im = a.z1.imag();
    }
    const Complex du_M = d.int_uv * d.u[0] - B * d.v[0];
    const Complex ddu_M = d.int_uv * d.u[1] - B * d.v[1];
    a.dtheta_vp = ddu_M - is * du_M - I / (2.0 * branch(E)) * d.u[0];
    a.dtheta_leading = -B * P;
    return a;
}

AsymptoticGeneral asymptotic_general(const Potential& p, double E, double w0, Normalization norm, double M,
                                     SqrtBranch branch, double tol)
{
    require_nonzero_energy(E);
    require_truncation(p, M);
    const double n2 = 1.0 + w0 * w0;
    const StateVector u0 = norm == Normalization::value ? StateVector(1.0, w0) : StateVector(-w0, 1.0);
    const StateVector v0 = norm == Normalization::value ? StateVector(-w0 / n2, 1.0 / n2)
                                                        : StateVector(-1.0 / n2, -w0 / n2);
    const OdeOptions opts{tol};
    const PairWithIntegrals right = integrate_with_integrals(p, E, 0.0, M, u0, v0, opts);
    const PairWithIntegrals left = integrate_with_integrals(p, E, 0.0, -M, u0, v0, opts);
    const Complex is = I * branch(E);
    const Complex A = -left.int_uu;
    const Complex B = right.int_uu;
    const Complex Itot = A + B;
    const Complex Pp = right.v[1] - is * right.v[0];
    const Complex Pm = left.v[1] + is * left.v[0];
    const Complex Qp = right.u[1] - is * right.u[0];
    const Complex Qm = left.u[1] + is * left.u[0];
    const Complex denom = Itot * Pp * Pm;
    return {w0 - (A * Pm * Qp + B * Pp * Qm) / denom, E - (Pp * Qm - Pm * Qp) / denom};
}

std::vector<StateSample> resonant_state(const Potential& p, const ResonanceResult& r, double x_max, int n,
                                        double tol)
{
    if (n < 2) throw ConfigError("resonant_state: n must be >= 2");
    const Complex z = r.z_star;
    StateVector init;
    if (r.shape.half_line)
        init = StateVector(1.0, -I * r.branch(z));
    else if (r.shape.parity != Parity::none)
        init = r.shape.initial_data(r.E);
    else {
        const Complex w = r.w_star.value_or(r.shape.w0);
        init = r.shape.normalization == Normalization::value ? StateVector(1.0, w) : StateVector(-w, 1.0);
    }
    const double M = r.M;
    const double left_end = r.shape.half_line ? -std::numeric_limits<double>::infinity() : -M;
    const OdeOptions opts{tol};
    const Complex is = I * r.branch(z);
    // Boundary data on the solver's own mesh, so the mismatch at +-M is the root residual.
    const Propagator prop(p, M, r.E, tol, !r.shape.half_line);
    auto boundary = [&](int side) {
        const Propagator::Columns c = prop.propagate(z, side, false);
        return StateVector(init[0] * c.first.u + init[1] * c.second.u);
    };
    const StateVector at_right = boundary(+1);
    const StateVector at_left = r.shape.half_line ? StateVector::Zero() : boundary(-1);

    std::vector<double> pos, neg;
    std::vector<double> xs(n);
    for (int j = 0; j < n; ++j) {
        xs[j] = -x_max + 2.0 * x_max * j / (n - 1);
        if (xs[j] > 0.0 && xs[j] <= M) pos.push_back(xs[j]);
        if (xs[j] < 0.0 && xs[j] >= left_end) neg.push_back(xs[j]);
    }
    std::reverse(neg.begin(), neg.end());
    const auto rp = integrate_sampled(p, z, 0.0, pos, init, opts);
    const auto rn = integrate_sampled(p, z, 0.0, neg, init, opts);

    std::vector<StateSample> out;
    out.reserve(n);
    std::size_t ip = 0;
    std::size_t in = neg.size();
    for (double x : xs) {
        if (x == M) {
            out.push_back({x, at_right[0], at_right[1]});
            if (ip < pos.size()) ++ip;
        } else if (x == -M && !r.shape.half_line) {
            --in;
            out.push_back({x, at_left[0], at_left[1]});
        } else if (x > M) {
            const Complex phi = at_right[0] * std::exp(is * (x - M));
            out.push_back({x, phi, is * phi});
        } else if (x < left_end) {
            const Complex phi = at_left[0] * std::exp(-is * (x + M));
            out.push_back({x, phi, -is * phi});
        } else if (x > 0.0) {
            out.push_back({x, rp[ip][0], rp[ip][1]});
            ++ip;
        } else if (x < 0.0) {
            --in;
            out.push_back({x, rn[in][0], rn[in][1]});
        } else {
            out.push_back({x, init[0], init[1]});
        }
    }
    return out;
}

}  // namespace defres
