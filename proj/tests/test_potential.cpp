#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "defres/errors.hpp"
#include "defres/potential.hpp"
#include "reference.hpp"

using namespace defres;

TEST_CASE("periodic cosine vanishes at a quarter period")
{
    Potential p;
    p.periodic.cos_coeffs = {0.0, 1.0};
    CHECK(std::abs(eval(p, 0.25)) < 1e-15);
}

TEST_CASE("constant background outside the defect")
{
    Potential p;
    p.periodic.cos_coeffs = {3.5};
    p.defect.amplitude = -2.0;
    CHECK(eval(p, p.rho() + 1) == 3.5);
    CHECK(eval(p, p.rho() + 2) == 3.5);
}

TEST_CASE("REF1 at the origin")
{
    const Potential p = ref::ref1();
    const double expected = 10.0 - 8.0 * std::exp(-1.0);
    CHECK(std::abs(eval(p, 0.0) - expected) < 1e-14);
    CHECK(std::abs(eval_truncated(p, 8.0, 0.0) - expected) < 1e-14);
}

TEST_CASE("truncation")
{
    const Potential p = ref::ref1();
    CHECK(eval_truncated(p, 8.0, 8.5) == 0.0);
    CHECK(eval_truncated(p, 8.0, -8.0) == eval(p, -8.0));
    CHECK(std::abs(eval_truncated(p, 8.0, -8.0) - 10.0) < 1e-12);
    CHECK_THROWS_AS(eval_truncated(p, 0.5, 0.0), ConfigError);
    CHECK_THROWS_AS(eval_truncated(p, 0.3, 0.0), ConfigError);
}

TEST_CASE("periodicity beyond the defect")
{
    std::mt19937_64 rng(7);
    for (const Potential& p : {ref::ref1(), ref::ref2(), ref::ref3()}) {
        std::uniform_real_distribution<double> u(p.rho(), p.rho() + 5);
        for (int i = 0; i < 1000; ++i) {
            const double x = u(rng);
            CHECK(std::abs(eval(p, x + 1) - eval(p, x)) < 1e-12);
        }
    }
}

TEST_CASE("defect support is exact")
{
    for (const Potential& p : {ref::ref1(), ref::ref2(), ref::ref3()}) {
        for (double x = p.rho(); x < p.rho() + 4; x += 0.0371) {
            CHECK(eval(p, x) - p.periodic(x) == 0.0);
            CHECK(eval(p, -x) - p.periodic(-x) == 0.0);
        }
    }
}

TEST_CASE("cosine window defect")
{
    Potential p;
    p.defect.shape = DefectShape::cosine_window;
    p.defect.amplitude = 2.0;
    p.defect.rho = 0.4;
    CHECK(eval(p, 0.0) == doctest::Approx(2.0));
    CHECK(eval(p, 0.4) == 0.0);
    CHECK(eval(p, 0.2) == doctest::Approx(1.0));
}

TEST_CASE("parity flag honesty")
{
    CHECK(check_parity(ref::ref1()));
    CHECK(check_parity(ref::ref3()));
    CHECK_FALSE(check_parity(ref::ref2()));

    Potential bad = ref::ref2();
    bad.symmetric = true;
    CHECK_THROWS_AS(validate(bad), ConfigError);

    Potential odd_bg = ref::ref1();
    odd_bg.periodic.sin_coeffs = {1.0};
    CHECK_FALSE(check_parity(odd_bg));

    Potential neg_rho = ref::ref1();
    neg_rho.defect.rho = -0.1;
    CHECK_THROWS_AS(validate(neg_rho), ConfigError);

    CHECK_NOTHROW(validate(ref::ref1()));
    CHECK_NOTHROW(validate(ref::ref4()));
}

TEST_CASE("half-line potential vanishes on the left")
{
    const Potential p = ref::ref4();
    CHECK(eval(p, -0.3) == 0.0);
    CHECK(eval(p, -5.0) == 0.0);
    CHECK(eval(p, 2.25) == eval(ref::ref3(), 2.25));
}
