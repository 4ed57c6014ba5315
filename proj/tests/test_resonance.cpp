#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "defres/errors.hpp"
#include "defres/resonance.hpp"
#include "defres/sweep.hpp"
#include "oracles/rk4.hpp"
#include "reference.hpp"

using namespace defres;
using std::numbers::pi;

namespace {

// Frozen finite-difference oracle values for the truncated operators
// (Richardson over h = 2.5e-4 and 1.25e-4, Dirichlet walls at +-60).
constexpr double kRef3TruncE = -14.9333804367736, kRef3TruncErr = 4.036e-08;  // M = 8
constexpr double kRef4TruncE = -13.3118168854465, kRef4TruncErr = 5.277e-08;  // M = 8

const SqrtBranch kRes{BranchMode::resonance};
const SqrtBranch kBound{BranchMode::bound};

Potential free_potential()
{
    Potential p;
    p.symmetric = true;
    return p;
}

DefectMode mode_in(const Potential& p, double lo, double hi)
{
    for (const SpectralInterval& g : band_gap_scan(p.periodic, lo, hi, 401).gaps()) {
        const auto modes = find_defect_modes(p, g);
        if (!modes.empty()) return modes.front();
    }
    FAIL("no defect mode found");
    return {};
}

double rel(Complex a, Complex b) { return std::abs(a - b) / std::abs(b); }

// Theta for an even mode by brute-force RK4.
Complex theta_rk4(const Potential& p, Complex z, double M)
{
    const Eigen::Vector2cd y = oracle::rk4(p, z, 0.0, M, Eigen::Vector2cd(1.0, 0.0), 5e-4);
    return y[1] - Complex(0, 1) * std::sqrt(z) * y[0];
}

}  // namespace

TEST_CASE("square-root branches")
{
    CHECK(kRes(Complex(-1.0, -1e-3)).imag() < 0.0);
    CHECK(kRes(Complex(4.0, -0.5)).imag() < 0.0);
    for (double z : {-0.5, -3.0, -14.9}) {
        const Complex isq = Complex(0, 1) * kBound(z);
        CHECK(isq.imag() == 0.0);
        CHECK(isq.real() < 0.0);
        CHECK(std::abs(isq.real() + std::sqrt(-z)) < 1e-15);
    }
    CHECK_THROWS_AS(kRes(Complex(-2.0, 0.0)), PreconditionError);
    CHECK_THROWS_AS(kBound(Complex(2.0, 0.0)), PreconditionError);
}

TEST_CASE("free Theta closed form")
{
    const Potential p = free_potential();
    const ModeShape even{Parity::even};
    const ThetaEval t = theta(p, 1.0, pi, even, kRes);
    CHECK(std::abs(t.theta - Complex(0, 1)) < 1e-10);

    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> re(0.2, 20.0), im(-0.5, 0.5), mm(1.0, 12.0);
    for (int i = 0; i < 20; ++i) {
        const Complex z(re(rng), im(rng));
        const double M = mm(rng);
        const Complex s = std::sqrt(z);
        const Complex expected = -Complex(0, 1) * s * std::exp(-Complex(0, 1) * s * M);
        CHECK(rel(theta(p, z, M, even, kRes).theta, expected) < 1e-10);
        CHECK(std::abs(std::abs(theta(p, 1.0, M, even, kRes).theta) - 1.0) < 1e-10);
    }
}

TEST_CASE("theta_pm on the free line and on symmetric potentials")
{
    const ThetaPmEval f = theta_pm(free_potential(), 0.0, 1.0, pi, Normalization::value, kRes);
    CHECK(std::abs(f.plus.theta - Complex(0, 1)) < 1e-10);
    CHECK(std::abs(f.minus.theta + Complex(0, 1)) < 1e-10);

    // Reflection maps Theta^- of an even mode to -Theta^+ and of an odd mode to +Theta^+.
    const Complex z(14.3, -0.01);
    const ThetaPmEval e = theta_pm(ref::ref1(), 0.0, z, 8.0, Normalization::value, kRes);
    CHECK(std::abs(e.plus.theta + e.minus.theta) < 1e-10 * std::abs(e.plus.theta));
    CHECK(std::abs(e.plus.d_z + e.minus.d_z) < 1e-10 * std::abs(e.plus.d_z));
    const ThetaPmEval o = theta_pm(ref::ref1(), 0.0, z, 8.0, Normalization::derivative, kRes);
    CHECK(std::abs(o.plus.theta - o.minus.theta) < 1e-10 * std::abs(o.plus.theta));
    CHECK(std::abs(o.plus.d_z - o.minus.d_z) < 1e-10 * std::abs(o.plus.d_z));
}

TEST_CASE("variational derivatives of Theta against central differences")
{
    for (const Potential& p : {ref::ref1(), ref::ref2()}) {
        const DefectMode m = mode_in(p, 0.0, 60.0);
        for (double M : {6.0, 8.0, 10.0}) {
            const double h = 1e-5;
            if (m.shape.parity != Parity::none) {
                const ThetaEval t = theta(p, m.E, M, m.shape, kRes);
                const ThetaEval tp = theta(p, m.E + h, M, m.shape, kRes);
                const ThetaEval tm = theta(p, m.E - h, M, m.shape, kRes);
                CHECK(rel((tp.theta - tm.theta) / (2 * h), t.d_z) < 1e-6);
                CHECK(rel((tp.d_z - tm.d_z) / (2 * h), t.d_z2) < 1e-6);
            }
            const Normalization n = m.shape.normalization;
            const Complex w = m.shape.w0;
            const ThetaPmEval t = theta_pm(p, w, m.E, M, n, kRes);
            const ThetaPmEval zp = theta_pm(p, w, m.E + h, M, n, kRes);
            const ThetaPmEval zm = theta_pm(p, w, m.E - h, M, n, kRes);
            const ThetaPmEval wp = theta_pm(p, w + h, m.E, M, n, kRes);
            const ThetaPmEval wm = theta_pm(p, w - h, m.E, M, n, kRes);
            CHECK(rel((zp.plus.theta - zm.plus.theta) / (2 * h), t.plus.d_z) < 1e-6);
            CHECK(rel((zp.minus.theta - zm.minus.theta) / (2 * h), t.minus.d_z) < 1e-6);
            CHECK(rel((zp.plus.d_z - zm.plus.d_z) / (2 * h), t.plus.d_z2) < 1e-6);
            CHECK(rel((wp.plus.theta - wm.plus.theta) / (2 * h), t.d_w_plus) < 1e-6);
            CHECK(rel((wp.minus.theta - wm.minus.theta) / (2 * h), t.d_w_minus) < 1e-6);
            CHECK(rel((wp.plus.d_z - wm.plus.d_z) / (2 * h), t.d_wz_plus) < 1e-6);
            CHECK(rel((wp.minus.d_z - wm.minus.d_z) / (2 * h), t.d_wz_minus) < 1e-6);
        }
    }
}

TEST_CASE("Theta at the eigenvalue decays like exp(-kM)")
{
    const Potential p = ref::ref1();
    const DefectMode m = mode_in(p, 0.0, 60.0);
    std::vector<std::pair<double, double>> pts;
    for (int M = 4; M <= 12; ++M) pts.emplace_back(M, std::abs(theta(p, m.E, M, m.shape, kRes).theta));
    CHECK(std::abs(fit_rate(pts).slope + m.k) < 0.05 * m.k);
}

TEST_CASE("REF1 resonance at M = 8")
{
    const Potential p = ref::ref1();
    const DefectMode m = mode_in(p, 0.0, 60.0);
    const ResonanceResult r = solve_parity(p, m.E, m.shape.parity, 8.0, kRes);
    CHECK(r.residual < 1e-12);
    CHECK(r.z_star.imag() < 0.0);
    CHECK(std::abs(theta_rk4(p, r.z_star, 8.0)) < 1e-9 * std::abs(r.dtheta_E));
    CHECK(r.lifetime == doctest::Approx(1.0 / (2.0 * std::abs(r.z_star.imag()))));
    CHECK_FALSE(r.used_newton);
    for (std::size_t n = 2; n < r.iterates.size(); ++n) {
        const double prev = std::abs(r.iterates[n - 1] - r.iterates[n - 2]);
        const double gap = std::abs(r.iterates[n] - r.iterates[n - 1]);
        if (prev > 1e-14) CHECK(gap <= 0.5 * prev);
    }
}

TEST_CASE("first-order prediction")
{
    const Potential p = ref::ref1();
    const DefectMode m = mode_in(p, 0.0, 60.0);
    std::vector<std::pair<double, double>> pts;
    for (double M : {6.0, 8.0, 10.0, 12.0}) {
        const AsymptoticParity a = asymptotic_parity(p, m.E, m.shape.parity, M, kRes);
        const ResonanceResult r = solve_parity(p, m.E, m.shape.parity, M, kRes);
        CHECK(a.im < 0.0);
        CHECK(std::abs(a.dtheta_vp - r.dtheta_E) < 1e-8 * std::abs(r.dtheta_E));
        CHECK(std::abs(Complex(a.re, a.im) - r.asymptotic_z1) > 0.0);
        pts.emplace_back(M, std::abs(Complex(a.re, a.im) - r.asymptotic_z1));
    }
    CHECK(std::abs(fit_rate(pts).slope + 4 * m.k) < 0.25 * 4 * m.k);
}

TEST_CASE("relative error of the closed-form imaginary part shrinks like M exp(-2kM)")
{
    const Potential p = ref::ref1();
    const DefectMode m = mode_in(p, 0.0, 60.0);
    std::vector<std::pair<double, double>> pts;
    for (double M : {10.0, 14.0, 18.0, 22.0}) {
        const AsymptoticParity a = asymptotic_parity(p, m.E, m.shape.parity, M, kRes);
        const ResonanceResult r = solve_parity(p, m.E, m.shape.parity, M, kRes);
        pts.emplace_back(M, std::abs(r.z_star.imag() - a.im) / std::abs(r.z_star.imag()) / M);
    }
    CHECK(std::abs(fit_rate(pts).slope + 2 * m.k) < 0.1 * 2 * m.k);
}

TEST_CASE("closed-form imaginary part at M = 10 within one percent")
{
    const Potential p = ref::ref1();
    const DefectMode m = mode_in(p, 0.0, 60.0);
    const AsymptoticParity a = asymptotic_parity(p, m.E, m.shape.parity, 10.0, kRes);
    const ResonanceResult r = solve_parity(p, m.E, m.shape.parity, 10.0, kRes);
    CHECK(std::abs(r.z_star.imag() - a.im) / std::abs(r.z_star.imag()) < 1e-2);
}

TEST_CASE("general solver on a symmetric potential")
{
    const Potential p = ref::ref1();
    const DefectMode m = mode_in(p, 0.0, 60.0);
    for (double M : {8.0, 10.0}) {
        const ResonanceResult par = solve_parity(p, m.E, m.shape.parity, M, kRes);
        const ResonanceResult gen = solve_general(p, m.E, 0.0, Normalization::value, M, kRes);
        REQUIRE(gen.w_star);
        CHECK(std::abs(*gen.w_star) < 1e-8);
        CHECK(std::abs(gen.z_star - par.z_star) < 1e-10);

        const AsymptoticGeneral ag = asymptotic_general(p, m.E, 0.0, Normalization::value, M, kRes);
        const AsymptoticParity ap = asymptotic_parity(p, m.E, m.shape.parity, M, kRes);
        CHECK(std::abs(ag.w1) < 1e-9 * std::abs(ag.z1 - m.E));
        CHECK(std::abs(ag.z1 - Complex(ap.re, ap.im)) < 1e-9 * std::abs(ag.z1));
    }
}

TEST_CASE("REF2 general resonance")
{
    const Potential p = ref::ref2();
    const DefectMode m = mode_in(p, 0.0, 60.0);
    REQUIRE(m.shape.parity == Parity::none);
    std::vector<std::pair<double, double>> pts;
    for (double M : {6.0, 8.0, 10.0, 12.0}) {
        const ResonanceResult r = solve_general(p, m.E, m.shape.w0, m.shape.normalization, M, kRes);
        CHECK(r.residual < 1e-11);
        const ThetaPmEval t = theta_pm(p, *r.w_star, r.z_star, M, m.shape.normalization, kRes, true, 1e-14);
        const double scale = std::max(std::abs(t.plus.d_z), std::abs(t.minus.d_z));
        CHECK((std::abs(t.plus.theta) + std::abs(t.minus.theta)) / scale < 1e-10);
        CHECK(r.z_star.imag() < 0.0);
        const AsymptoticGeneral a = asymptotic_general(p, m.E, m.shape.w0, m.shape.normalization, M, kRes);
        pts.emplace_back(M, std::abs(r.z_star - a.z1) + std::abs(*r.w_star - a.w1));
    }
    CHECK(std::abs(fit_rate(pts).slope + 4 * 0.1930057707) < 0.25 * 4 * 0.1930057707);
}

TEST_CASE("REF3 truncated bound state")
{
    const Potential p = ref::ref3();
    const DefectMode m = mode_in(p, -40.0, 30.0);
    const ResonanceResult r = solve_bound_negative(p, m.E, m.shape.parity, 8.0);
    CHECK(r.z_star.imag() == 0.0);
    CHECK(std::abs(r.z_star.real() - kRef3TruncE) <= 5 * kRef3TruncErr);
    REQUIRE(r.precondition_margin);
    CHECK(*r.precondition_margin > 1e-8);

    DefectSearchOptions so;
    so.ode_tol = 1e-14;
    SolveOptions o;
    o.ode_tol = 1e-14;
    const DefectMode tight = find_defect_modes(p, band_gap_scan(p.periodic, -40.0, 30.0, 401).gaps()[0], so)[0];
    const SweepSummary s = run_sweep(p, tight, SolveKind::bound, {6, 7, 8, 9, 10, 11, 12}, o);
    REQUIRE(s.err_vs_E.fit);
    CHECK(s.err_vs_E.rel_error < 0.10);
}

TEST_CASE("REF4 truncated edge state")
{
    const Potential p = ref::ref4();
    const DefectMode m = mode_in(p, -40.0, 30.0);
    const ResonanceResult r8 = solve_edge(p, m.E, 8.0);
    CHECK(r8.z_star.imag() == 0.0);
    CHECK(std::abs(r8.z_star.real() - kRef4TruncE) <= 5 * kRef4TruncErr);
    for (double M : {12.0, 14.0}) {
        const ResonanceResult r = solve_edge(p, m.E, M);
        CHECK(r.z_star.imag() == 0.0);
        CHECK(std::abs(r.z_star - m.E) <= std::exp(-m.k * M) / (M * M));
    }
    const SweepSummary s = run_sweep(p, m, SolveKind::edge, {6, 8, 10, 12});
    REQUIRE(s.err_vs_E.fit);
    CHECK(s.err_vs_E.rel_error < 0.10);
}

TEST_CASE("resonant state tails")
{
    const Potential p = ref::ref1();
    const DefectMode m = mode_in(p, 0.0, 60.0);
    const double M = 8.0;
    const ResonanceResult r = solve_parity(p, m.E, m.shape.parity, M, kRes);
    const auto s = resonant_state(p, r, 30.0, 1201);
    std::vector<std::pair<double, double>> tail;
    for (const StateSample& q : s) {
        if (std::abs(q.x - M) < 1e-12) {
            const Complex isz = Complex(0, 1) * std::sqrt(r.z_star);
            CHECK(std::abs(q.dphi - isz * q.phi) <= r.residual + 1e-14);
        }
        if (q.x > M + 1) tail.emplace_back(q.x, std::abs(q.phi));
    }
    const double growth = fit_rate(tail).slope;
    CHECK(growth > 0.0);
    CHECK(std::abs(growth - std::abs(std::sqrt(r.z_star).imag())) < 1e-8);

    const Potential p3 = ref::ref3();
    const DefectMode m3 = mode_in(p3, -40.0, 30.0);
    const ResonanceResult b = solve_bound_negative(p3, m3.E, m3.shape.parity, M);
    std::vector<std::pair<double, double>> decay;
    for (const StateSample& q : resonant_state(p3, b, 14.0, 561))
        if (q.x > M + 0.5) decay.emplace_back(q.x, std::abs(q.phi));
    const double rate = -fit_rate(decay).slope;
    CHECK(std::abs(rate - std::sqrt(-b.z_star.real())) < 0.01 * std::sqrt(-b.z_star.real()));
}

TEST_CASE("preconditions")
{
    const Potential p = ref::ref1();
    CHECK_THROWS_AS(theta(p, Complex(-1.0, 0.0), 8.0, ModeShape{}, kRes), PreconditionError);
    CHECK_THROWS_AS(solve_edge(p, -1.0, 8.0), ConfigError);
    CHECK_THROWS(solve_parity(p, 14.31, Parity::even, 0.4, kRes));
}
