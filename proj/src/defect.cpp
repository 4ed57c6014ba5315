#include "defres/defect.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include "defres/errors.hpp"
#include "defres/fit.hpp"

namespace defres {

StateVector ModeShape::initial_data(double E) const
{
    if (half_line) return {1.0, std::sqrt(-E)};
    switch (parity) {
    case Parity::even: return {1.0, 0.0};
    case Parity::odd: return {0.0, 1.0};
    case Parity::none: break;
    }
    return normalization == Normalization::value ? StateVector(1.0, w0) : StateVector(-w0, 1.0);
}

std::string to_string(Parity p)
{
    switch (p) {
    case Parity::even: return "even";
    case Parity::odd: return "odd";
    case Parity::none: return "none";
    }
    return "none";
}

std::string to_string(Normalization n) { return n == Normalization::value ? "value" : "derivative"; }

Eigen::RowVector2d growth_functional(const PeriodicPotential& pp, double E, double X, int side,
                                     const Eigen::RowVector2d* reference, double tol)
{
    const double base = side > 0 ? X : -X;
    const GapBasis g = gap_basis(pp, E, base, tol);
    const Eigen::Vector2d& r = side > 0 ? g.r_small : g.r_large;
    Eigen::RowVector2d ell(-r[1], r[0]);
    const bool flip = reference ? ell.dot(*reference) < 0.0
                                : (std::abs(ell[0]) >= std::abs(ell[1]) ? ell[0] < 0.0 : ell[1] < 0.0);
    if (flip) ell = -ell;
    return ell;
}

namespace {

void require_matching_point(const Potential& p, double X)
{
    if (X < p.rho()) throw PreconditionError("matching point X must lie outside the defect support");
}

double project(const Eigen::RowVector2d& ell, const StateVector& y) { return ell.dot(y.real()); }

// Growth functionals used for one evaluation, so that a scan can keep their
// orientation continuous in E.
struct Functionals {
    Eigen::RowVector2d plus = Eigen::RowVector2d::Zero();
    Eigen::RowVector2d minus = Eigen::RowVector2d::Zero();
};

using Criterion = std::function<double(double E, const Functionals* ref, Functionals* out)>;

Criterion one_sided(const Potential& p, ModeShape shape, double X, double tol)
{
    return [&p, shape, X, tol](double E, const Functionals* ref, Functionals* out) {
        const OdeOptions opts{tol};
        const StateVector y = integrate(p, E, 0.0, X, shape.initial_data(E), opts);
        const Eigen::RowVector2d ell = growth_functional(p.periodic, E, X, +1, ref ? &ref->plus : nullptr, tol);
        if (out) out->plus = ell;
        return project(ell, y);
    };
}

struct TwoSidedRows {
    Eigen::RowVector2d plus;
    Eigen::RowVector2d minus;
};

TwoSidedRows two_sided_rows(const Potential& p, double E, double X, const Functionals* ref, Functionals* out,
                            double tol)
{
    const OdeOptions opts{tol};
    const Eigen::Matrix2d Tp = transfer_matrix(p, E, 0.0, X, opts).real();
    const Eigen::Matrix2d Tm = transfer_matrix(p, E, 0.0, -X, opts).real();
    const Eigen::RowVector2d lp = growth_functional(p.periodic, E, X, +1, ref ? &ref->plus : nullptr, tol);
    const Eigen::RowVector2d lm = growth_functional(p.periodic, E, X, -1, ref ? &ref->minus : nullptr, tol);
    if (out) *out = {lp, lm};
    return {lp * Tp, lm * Tm};
}

Criterion two_sided(const Potential& p, double X, double tol)
{
    return [&p, X, tol](double E, const Functionals* ref, Functionals* out) {
        const TwoSidedRows r = two_sided_rows(p, E, X, ref, out, tol);
        return r.plus[0] * r.minus[1] - r.plus[1] * r.minus[0];
    };
}

// Bracketed secant with Illinois weighting; falls back to bisection whenever
// the secant point leaves the bracket.
double polish(const std::function<double(double)>& g, double a, double b, double fa, double fb, double tol)
{
    int side = 0;
    double c_prev = a;
    for (int it = 0; it < 200; ++it) {
        double c = (a * fb - b * fa) / (fb - fa);
        if (!(c > a && c < b)) c = 0.5 * (a + b);
        const double fc = g(c);
        if (fc == 0.0) return c;
        if ((fc > 0.0) == (fb > 0.0)) {
            b = c;
            fb = fc;
            if (side == -1) fa *= 0.5;
            side = -1;
        } else {
            a = c;
            fa = fc;
            if (side == 1) fb *= 0.5;
            side = 1;
        }
        if (b - a < tol || std::abs(c - c_prev) < 0.5 * tol) return c;
        c_prev = c;
    }
    throw ConvergenceError("defect root polish did not reach the requested width");
}

struct Sample {
    double E;
    double f;
    Functionals ell;
};

std::vector<Sample> scan(const Criterion& crit, const std::vector<double>& grid, const Functionals* start)
{
    std::vector<Sample> out;
    const Functionals* ref = start;
    for (double E : grid) {
        Sample s{E, 0.0, {}};
        s.f = crit(E, ref, &s.ell);
        out.push_back(s);
        ref = &out.back().ell;
    }
    return out;
}

std::vector<double> find_roots(const Criterion& crit, double lo, double hi, int n, double tol)
{
    std::vector<double> grid;
    for (int j = 0; j < n; ++j) grid.push_back(lo + (hi - lo) * (j + 1) / (n + 1));
    const std::vector<Sample> coarse = scan(crit, grid, nullptr);

    std::vector<std::pair<Sample, Sample>> brackets;
    auto collect = [&brackets](const std::vector<Sample>& s) {
        for (std::size_t j = 0; j + 1 < s.size(); ++j)
            if (s[j].f == 0.0 || (s[j].f > 0.0) != (s[j + 1].f > 0.0)) brackets.emplace_back(s[j], s[j + 1]);
    };
    collect(coarse);

    // A root pair inside one cell shows up as a local minimum of |f|.
    for (std::size_t j = 1; j + 1 < coarse.size(); ++j) {
        const double a = std::abs(coarse[j - 1].f), b = std::abs(coarse[j].f), c = std::abs(coarse[j + 1].f);
        const bool same = (coarse[j - 1].f > 0.0) == (coarse[j].f > 0.0) && (coarse[j].f > 0.0) == (coarse[j + 1].f > 0.0);
        if (!(same && b < a && b < c)) continue;
        std::vector<double> fine;
        const int m = 16;
        for (int i = 1; i < m; ++i) fine.push_back(coarse[j - 1].E + (coarse[j + 1].E - coarse[j - 1].E) * i / m);
        std::vector<Sample> s = scan(crit, fine, &coarse[j - 1].ell);
        s.insert(s.begin(), coarse[j - 1]);
        s.push_back(coarse[j + 1]);
        collect(s);
    }

    std::vector<double> roots;
    for (const auto& [a, b] : brackets) {
        if (a.f == 0.0) {
            roots.push_back(a.E);
            continue;
        }
        const Functionals ref = a.ell;
        auto g = [&crit, &ref](double E) { return crit(E, &ref, nullptr); };
        roots.push_back(polish(g, a.E, b.E, a.f, g(b.E), tol));
    }
    std::sort(roots.begin(), roots.end());
    roots.erase(std::unique(roots.begin(), roots.end(), [tol](double x, double y) { return y - x < 10 * tol; }),
                roots.end());
    return roots;
}

DefectMode assemble(const Potential& p, double E, ModeShape shape, const DefectSearchOptions& opts)
{
    const double extent = opts.profile_extent > 0.0 ? opts.profile_extent : p.rho_ceil() + 8.0;
    DefectMode m;
    m.E = E;
    const GapBasis g = gap_basis(p.periodic, E, p.rho_ceil(), opts.ode_tol);
    if (!(std::abs(g.lambda_large - g.lambda_small) > 1e-8))
        throw PreconditionError("degenerate Floquet multipliers at a defect eigenvalue");
    m.k = g.k;

    if (shape.parity == Parity::none && !shape.half_line) {
        // Null vector of the larger row of the two-sided system.
        const double X = opts.X > 0.0 ? opts.X : p.rho_ceil() + 5.0;
        const TwoSidedRows r = two_sided_rows(p, E, X, nullptr, nullptr, opts.ode_tol);
        const Eigen::RowVector2d row = r.plus.norm() >= r.minus.norm() ? r.plus : r.minus;
        const Eigen::Vector2d data = Eigen::Vector2d(-row[1], row[0]).normalized();
        double peak = std::abs(data[0]);
        std::vector<double> xs;
        for (int j = 1; j <= 8 * static_cast<int>(extent); ++j) xs.push_back(j / 8.0);
        const StateVector init = data.cast<Complex>();
        for (double sgn : {1.0, -1.0}) {
            std::vector<double> ys = xs;
            for (double& x : ys) x *= sgn;
            for (const auto& y : integrate_sampled(p, E, 0.0, ys, init, OdeOptions{opts.ode_tol}))
                peak = std::max(peak, std::abs(y[0]));
        }
        if (std::abs(data[0]) < 1e-3 * peak) {
            shape.normalization = Normalization::derivative;
            shape.w0 = -data[0] / data[1];
        } else {
            shape.normalization = Normalization::value;
            shape.w0 = data[1] / data[0];
        }
    }
    m.shape = shape;
    m.profile = profile(p, E, shape, extent, opts.samples_per_unit, opts.ode_tol);
    m.k_fit = fit_decay_rate(m.profile, p.rho() + 2.0, p.rho() + 8.0);

    const double Xr = p.rho_ceil() + 10.0;
    const OdeOptions ode{opts.ode_tol};
    const StateVector yr = integrate(p, E, 0.0, Xr, shape.initial_data(E), ode);
    m.residual = std::abs(project(growth_functional(p.periodic, E, Xr, +1, nullptr, opts.ode_tol), yr));
    if (!p.half_line && shape.parity == Parity::none) {
        const StateVector yl = integrate(p, E, 0.0, -Xr, shape.initial_data(E), ode);
        m.residual = std::max(
            m.residual, std::abs(project(growth_functional(p.periodic, E, Xr, -1, nullptr, opts.ode_tol), yl)));
    }
    return m;
}

}  // namespace

double matching_function(const Potential& p, double E, Parity parity, double X, const Eigen::RowVector2d* reference,
                         double tol)
{
    require_matching_point(p, X);
    const StateVector y = integrate(p, E, 0.0, X, ModeShape{parity}.initial_data(E), OdeOptions{tol});
    return project(growth_functional(p.periodic, E, X, +1, reference, tol), y);
}

std::vector<DefectMode> find_defect_modes(const Potential& p, const SpectralInterval& gap,
                                          const DefectSearchOptions& opts)
{
    const double X = opts.X > 0.0 ? opts.X : p.rho_ceil() + 5.0;
    require_matching_point(p, X);
    double lo = gap.lo, hi = gap.hi;
    if (p.half_line) hi = std::min(hi, 0.0);
    std::vector<DefectMode> modes;
    if (!(hi > lo)) return modes;

    if (p.half_line) {
        ModeShape shape;
        shape.parity = Parity::none;
        shape.half_line = true;
        for (double E : find_roots(one_sided(p, shape, X, opts.ode_tol), lo, hi, opts.n_grid, opts.tol)) {
            shape.w0 = std::sqrt(-E);
            modes.push_back(assemble(p, E, shape, opts));
        }
    } else if (p.symmetric) {
        for (Parity parity : {Parity::even, Parity::odd}) {
            ModeShape shape;
            shape.parity = parity;
            shape.normalization = parity == Parity::even ? Normalization::value : Normalization::derivative;
            for (double E : find_roots(one_sided(p, shape, X, opts.ode_tol), lo, hi, opts.n_grid, opts.tol))
                modes.push_back(assemble(p, E, shape, opts));
        }
        std::sort(modes.begin(), modes.end(), [](const DefectMode& a, const DefectMode& b) { return a.E < b.E; });
    } else {
        for (double E : find_roots(two_sided(p, X, opts.ode_tol), lo, hi, opts.n_grid, opts.tol))
            modes.push_back(assemble(p, E, ModeShape{Parity::none}, opts));
    }
    return modes;
}

std::vector<ProfileSample> profile(const Potential& p, double E, const ModeShape& shape, double x_max,
                                   int samples_per_unit, double tol)
{
    const int J = static_cast<int>(std::lround(x_max * samples_per_unit));
    std::vector<double> right, left;
    for (int j = 1; j <= J; ++j) {
        right.push_back(static_cast<double>(j) / samples_per_unit);
        left.push_back(-static_cast<double>(j) / samples_per_unit);
    }
    const StateVector init = shape.initial_data(E);
    const OdeOptions opts{tol};
    const auto r = integrate_sampled(p, E, 0.0, right, init, opts);
    const auto l = integrate_sampled(p, E, 0.0, left, init, opts);
    std::vector<ProfileSample> out;
    out.reserve(2 * J + 1);
    for (int j = J - 1; j >= 0; --j) out.push_back({left[j], l[j][0].real(), l[j][1].real()});
    out.push_back({0.0, init[0].real(), init[1].real()});
    for (int j = 0; j < J; ++j) out.push_back({right[j], r[j][0].real(), r[j][1].real()});
    return out;
}

double fit_decay_rate(const std::vector<ProfileSample>& prof, double x_lo, double x_hi)
{
    std::vector<double> t, logmax;
    const double a = std::min(std::abs(x_lo), std::abs(x_hi));
    const double b = std::max(std::abs(x_lo), std::abs(x_hi));
    const bool negative = x_hi <= 0.0;
    for (double s = a; s + 1.0 <= b + 1e-9; s += 1.0) {
        double peak = 0.0;
        for (const auto& q : prof) {
            const double d = negative ? -q.x : q.x;
            if (d >= s - 1e-12 && d < s + 1.0 - 1e-12) peak = std::max(peak, std::abs(q.phi));
        }
        if (peak > 0.0) {
            t.push_back(s);
            logmax.push_back(std::log(peak));
        }
    }
    return -least_squares(t, logmax).slope;
}

}  // namespace defres
