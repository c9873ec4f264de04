#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "support/test_utils.hpp"
#include "vsense/perturb.hpp"

using namespace vsense;
namespace vt = vsense::testing;

TEST_CASE("box_of: zero epsilon gives the point box") {
    PerturbationSpec spec;
    spec.eps_series = 0.0;
    spec.eps_scalar = 0.0;
    const Vector x{0.1, 0.5, 0.9};
    const Box box = box_of(spec, x);
    CHECK(box.lo == x);
    CHECK(box.hi == x);
}

TEST_CASE("box_of: clips at the normalized range") {
    PerturbationSpec spec;  // defaults: 0.01 / 0.001
    Vector x(4, 0.5);
    x[0] = 0.005;
    const Box box = box_of(spec, x);
    CHECK(box.lo[0] == 0.0);
    CHECK(box.hi[0] == doctest::Approx(0.015).epsilon(1e-15));
}

TEST_CASE("box_of: default widths match the threat model") {
    PerturbationSpec spec;
    const Vector x(8, 0.5);
    const Box box = box_of(spec, x);
    for (int i = 0; i < 7; ++i) {
        CHECK(box.lo[i] == doctest::Approx(0.49).epsilon(1e-15));
        CHECK(box.hi[i] == doctest::Approx(0.51).epsilon(1e-15));
    }
    CHECK(box.lo[7] == doctest::Approx(0.499).epsilon(1e-15));
    CHECK(box.hi[7] == doctest::Approx(0.501).epsilon(1e-15));
}

TEST_CASE("box_of: rejects inputs outside the normalized range") {
    PerturbationSpec spec;
    CHECK_THROWS_AS(box_of(spec, Vector{0.5, 1.2}), std::domain_error);
    CHECK_THROWS_AS(box_of(spec, Vector{-0.1, 0.5}), std::domain_error);
}

TEST_CASE("box_of: x is always contained and widths grow with epsilon") {
    PerturbationSpec narrow, wide;
    wide.eps_series = 0.05;
    wide.eps_scalar = 0.005;
    Rng rng(9);
    for (int trial = 0; trial < 200; ++trial) {
        const Vector x = vt::random_point01(6, rng);
        const Box a = box_of(narrow, x);
        const Box b = box_of(wide, x);
        CHECK(contains(a, x));
        for (std::size_t i = 0; i < x.size(); ++i) {
            CHECK(b.lo[i] <= a.lo[i]);
            CHECK(b.hi[i] >= a.hi[i]);
        }
    }
}

TEST_CASE("sample_uniform: degenerate box returns the point exactly") {
    Box box{{0.25, 0.5}, {0.25, 0.5}};
    Rng rng(3);
    const Vector z = sample_uniform(box, rng);
    CHECK(z[0] == 0.25);
    CHECK(z[1] == 0.5);
}

TEST_CASE("sample_uniform: draws stay inside and average near the center") {
    Box box{{0.0}, {1.0}};
    Rng rng(12345);
    double sum = 0.0;
    for (int i = 0; i < 10000; ++i) {
        const Vector z = sample_uniform(box, rng);
        REQUIRE(contains(box, z));
        sum += z[0];
    }
    CHECK(std::abs(sum / 10000.0 - 0.5) < 0.02);
}

TEST_CASE("sample_uniform: membership holds on random clipped boxes") {
    PerturbationSpec spec;
    spec.eps_series = 0.03;
    Rng rng(77);
    for (int trial = 0; trial < 100; ++trial) {
        const Vector x = vt::random_point01(5, rng);
        const Box box = box_of(spec, x);
        const Vector z = sample_uniform(box, rng);
        CHECK(contains(box, z));
    }
}
