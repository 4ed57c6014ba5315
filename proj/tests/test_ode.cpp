#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "defres/errors.hpp"
#include "defres/ode.hpp"
#include "oracles/rk4.hpp"
#include "reference.hpp"

using namespace defres;
using std::numbers::pi;

namespace {

const auto zero = [](double) { return 0.0; };

double rel(Complex a, Complex b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

OdeOptions tight()
{
    OdeOptions o;
    o.tol = 1e-12;
    return o;
}

// Composite Simpson on an odd number of equispaced samples.
Complex simpson(const std::vector<Complex>& f, double h)
{
    Complex s = f.front() + f.back();
    for (std::size_t i = 1; i + 1 < f.size(); ++i) s += (i % 2 ? 4.0 : 2.0) * f[i];
    return s * h / 3.0;
}

}  // namespace

TEST_CASE("free solutions")
{
    const StateVector c = integrate(zero, 1.0, 0.0, pi, StateVector(1.0, 0.0));
    CHECK(std::abs(c[0] + 1.0) < 1e-9);
    CHECK(std::abs(c[1]) < 1e-9);
    const StateVector s = integrate(zero, 1.0, 0.0, pi / 2, StateVector(0.0, 1.0));
    CHECK(std::abs(s[0] - 1.0) < 1e-9);
    CHECK(std::abs(s[1]) < 1e-9);
}

TEST_CASE("REF1 at complex energy against fixed-step RK4")
{
    const Potential p = ref::ref1();
    const Complex z(5.0, 0.1);
    const StateVector y = integrate(p, z, 0.0, 3.0, StateVector(1.0, 0.0), tight());
    const Eigen::Vector2cd o = oracle::rk4(p, z, 0.0, 3.0, Eigen::Vector2cd(1.0, 0.0), 1e-5);
    CHECK(rel(y[0], o[0]) < 1e-8);
    CHECK(rel(y[1], o[1]) < 1e-8);
}

TEST_CASE("transfer matrices")
{
    const TransferMatrix T = transfer_matrix(zero, pi * pi, 0.0, 1.0, tight());
    CHECK((T + TransferMatrix::Identity()).norm() < 1e-9);

    const Potential p = ref::ref1();
    CHECK((transfer_matrix(p, 3.0, 2.5, 2.5) - TransferMatrix::Identity()).norm() == 0.0);

    const TransferMatrix T02 = transfer_matrix(p, 3.0, 0.0, 2.0, tight());
    const TransferMatrix T12 = transfer_matrix(p, 3.0, 1.0, 2.0, tight());
    const TransferMatrix T01 = transfer_matrix(p, 3.0, 0.0, 1.0, tight());
    CHECK((T02 - T12 * T01).norm() < 1e-9 * T02.norm());
}

TEST_CASE("variational equations, free case")
{
    VariationalState init;
    init.u = StateVector(1.0, 0.0);
    const VariationalState s = integrate_variational(zero, 1.0, 0.0, pi / 2, init, tight());
    CHECK(std::abs(s.dz_u[0] + pi / 4) < 1e-9);

    const double h = 1e-4;
    const VariationalState a = integrate_variational(zero, 1.0 + h, 0.0, pi, init, tight());
    const VariationalState b = integrate_variational(zero, 1.0 - h, 0.0, pi, init, tight());
    const VariationalState c = integrate_variational(zero, 1.0, 0.0, pi, init, tight());
    CHECK(std::abs(c.dz2_u[0] - (a.dz_u[0] - b.dz_u[0]) / (2 * h)) < 1e-5);
}

TEST_CASE("variational derivatives against central differences")
{
    const double h = 1e-6;
    for (const Potential& p : {ref::ref1(), ref::ref2()}) {
        for (Complex z : {Complex(5.0, 0.1), Complex(14.3, -0.02), Complex(-1.0, 0.0)}) {
            VariationalState init;
            init.u = StateVector(0.3, 1.0);
            const VariationalState s = integrate_variational(p, z, -1.0, 4.0, init, tight());
            const StateVector up = integrate(p, z + h, -1.0, 4.0, init.u, tight());
            const StateVector um = integrate(p, z - h, -1.0, 4.0, init.u, tight());
            const StateVector fd = (up - um) / (2 * h);
            CHECK(rel(s.dz_u[0], fd[0]) < 1e-6);
            CHECK(rel(s.dz_u[1], fd[1]) < 1e-6);
        }
    }
}

TEST_CASE("Wronskian conservation over [0, 30]")
{
    const Potential p = ref::ref1();
    for (Complex z : {Complex(20.0, 0.0), Complex(20.0, 0.1), Complex(2.0, -0.05)}) {
        double drift = 0.0;
        for (int j = 1; j <= 20; ++j) {
            const TransferMatrix T = transfer_matrix(p, z, 0.0, 1.5 * j, tight());
            drift = std::max(drift, std::abs(T(0, 0) * T(1, 1) - T(1, 0) * T(0, 1) - 1.0));
        }
        CHECK(drift < 1e-10);
    }
}

TEST_CASE("reversibility")
{
    const Potential p = ref::ref2();
    const StateVector init(0.7, -0.2);
    const Complex z(20.0, 0.1);
    const StateVector fwd = integrate(p, z, -2.0, 8.0, init, tight());
    const StateVector back = integrate(p, z, 8.0, -2.0, fwd, tight());
    CHECK((back - init).norm() < 1e-8);
}

TEST_CASE("variation of parameters identity")
{
    const Potential p = ref::ref1();
    const Complex z(7.0, 0.3);
    const int n = 10000;
    const double h = 5.0 / n;
    std::vector<double> xs(n);
    for (int i = 0; i < n; ++i) xs[i] = (i + 1) * h;
    const auto u = integrate_sampled(p, z, 0.0, xs, StateVector(1.0, 0.0), tight());
    const auto v = integrate_sampled(p, z, 0.0, xs, StateVector(0.0, 1.0), tight());
    std::vector<Complex> uv{0.0}, uu{1.0};
    for (int i = 0; i < n; ++i) {
        uv.push_back(u[i][0] * v[i][0]);
        uu.push_back(u[i][0] * u[i][0]);
    }
    VariationalState init;
    init.u = StateVector(1.0, 0.0);
    for (int m : {1000, 4000, 7000, 10000}) {
        const std::vector<Complex> a(uv.begin(), uv.begin() + m + 1), b(uu.begin(), uu.begin() + m + 1);
        const Complex predicted = simpson(a, h) * u[m - 1][0] - simpson(b, h) * v[m - 1][0];
        const VariationalState s = integrate_variational(p, z, 0.0, m * h, init, tight());
        CHECK(std::abs(s.dz_u[0] - predicted) < 1e-7);
    }
}

TEST_CASE("step budget exhaustion is reported with a location")
{
    OdeOptions o;
    o.max_steps = 5;
    bool thrown = false;
    try {
        integrate(ref::ref1(), Complex(5.0, 0.0), 0.0, 20.0, StateVector(1.0, 0.0), o);
    } catch (const IntegrationError& e) {
        thrown = true;
        CHECK(e.where() > 0.0);
        CHECK(e.where() < 20.0);
    }
    CHECK(thrown);
}
