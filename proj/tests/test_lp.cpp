#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "support/lp_oracle.hpp"
#include "support/test_utils.hpp"
#include "vsense/lp.hpp"

using namespace vsense;
namespace vt = vsense::testing;

namespace {

lp::Problem box_problem(int n, int p) {
    lp::Problem pr;
    pr.c.assign(n, 0.0);
    pr.A = Matrix(p, n);
    pr.b.assign(p, 0.0);
    pr.lb.assign(n, 0.0);
    pr.ub.assign(n, 1.0);
    pr.sense = lp::Sense::Maximize;
    return pr;
}

}  // namespace

TEST_CASE("bound-only maximization") {
    lp::Problem pr = box_problem(1, 0);
    pr.c[0] = 1.0;
    const lp::Solution sol = lp::solve(pr);
    REQUIRE(sol.status == lp::Status::Optimal);
    CHECK(sol.value == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(sol.point[0] == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("facet optimum has a unique value") {
    lp::Problem pr = box_problem(2, 1);
    pr.c = {1.0, 1.0};
    pr.A(0, 0) = 1.0;
    pr.A(0, 1) = 1.0;
    pr.b[0] = 1.0;
    const lp::Solution sol = lp::solve(pr);
    REQUIRE(sol.status == lp::Status::Optimal);
    CHECK(sol.value == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(sol.point[0] + sol.point[1] <= 1.0 + 1e-8);
}

TEST_CASE("infeasible row is detected") {
    lp::Problem pr = box_problem(1, 1);
    pr.c[0] = 1.0;
    pr.A(0, 0) = 1.0;
    pr.b[0] = -0.5;
    const lp::Solution sol = lp::solve(pr);
    CHECK(sol.status == lp::Status::Infeasible);
}

TEST_CASE("minimization sense") {
    lp::Problem pr = box_problem(2, 1);
    pr.sense = lp::Sense::Minimize;
    pr.c = {1.0, -2.0};
    pr.A(0, 0) = 1.0;
    pr.A(0, 1) = 1.0;
    pr.b[0] = 1.5;
    const lp::Solution sol = lp::solve(pr);
    REQUIRE(sol.status == lp::Status::Optimal);
    // Best: v0 = 0, v1 = 1 (row slack 0.5 left over).
    CHECK(sol.value == doctest::Approx(-2.0).epsilon(1e-9));
}

TEST_CASE("negative lower bounds work") {
    lp::Problem pr = box_problem(2, 1);
    pr.lb = {-1.0, -2.0};
    pr.ub = {0.5, 3.0};
    pr.c = {-1.0, 1.0};
    pr.A(0, 0) = -1.0;
    pr.A(0, 1) = 1.0;
    pr.b[0] = 2.5;
    const lp::Solution sol = lp::solve(pr);
    REQUIRE(sol.status == lp::Status::Optimal);
    // -v0 + v1 <= 2.5 binds: v0 = -1 gives v1 <= 1.5, objective 1 + 1.5.
    CHECK(sol.value == doctest::Approx(2.5).epsilon(1e-9));
}

TEST_CASE("shape mismatches throw") {
    lp::Problem pr = box_problem(2, 1);
    pr.b.push_back(0.0);
    CHECK_THROWS_AS(lp::solve(pr), std::invalid_argument);
    lp::Problem pr2 = box_problem(2, 0);
    pr2.lb[0] = 2.0;  // lb > ub
    CHECK_THROWS_AS(lp::solve(pr2), std::invalid_argument);
}

TEST_CASE("random problems match vertex enumeration and satisfy feasibility") {
    Rng rng(718);
    int solved = 0, infeasible = 0;
    for (int trial = 0; trial < 120; ++trial) {
        const int n = 1 + static_cast<int>(rng.below(4));  // keep enumeration cheap
        const int p = static_cast<int>(rng.below(7));
        lp::Problem pr = box_problem(n, p);
        for (int j = 0; j < n; ++j) {
            pr.lb[j] = rng.uniform(-1.0, 0.5);
            pr.ub[j] = pr.lb[j] + rng.uniform(0.0, 2.0);
            pr.c[j] = rng.uniform(-2.0, 2.0);
        }
        for (int r = 0; r < p; ++r) {
            for (int j = 0; j < n; ++j) pr.A(r, j) = rng.uniform(-1.5, 1.5);
            pr.b[r] = rng.uniform(-1.0, 2.0);
        }
        pr.sense = rng.below(2) ? lp::Sense::Maximize : lp::Sense::Minimize;

        const lp::Solution sol = lp::solve(pr);
        const auto oracle = vt::lp_vertex_enumeration(pr);
        if (sol.status == lp::Status::Infeasible) {
            ++infeasible;
            CHECK_FALSE(oracle.has_value());
            continue;
        }
        ++solved;
        REQUIRE(oracle.has_value());
        CHECK(sol.value == doctest::Approx(*oracle).epsilon(1e-7).scale(1.0));

        // Reported point is feasible and consistent with the value.
        double cv = 0.0;
        for (int j = 0; j < n; ++j) {
            CHECK(sol.point[j] >= pr.lb[j] - 1e-10);
            CHECK(sol.point[j] <= pr.ub[j] + 1e-10);
            cv += pr.c[j] * sol.point[j];
        }
        for (int r = 0; r < p; ++r) {
            double lhs = 0.0;
            for (int j = 0; j < n; ++j) lhs += pr.A(r, j) * sol.point[j];
            CHECK(lhs <= pr.b[r] + 1e-8);
        }
        CHECK(std::abs(cv - sol.value) <= 1e-9);
    }
    // The sampler must exercise both outcomes.
    CHECK(solved > 30);
    CHECK(infeasible > 5);
}

TEST_CASE("larger problems agree with enumeration") {
    Rng rng(93);
    for (int trial = 0; trial < 6; ++trial) {
        const int n = 5, p = 5;
        lp::Problem pr = box_problem(n, p);
        for (int j = 0; j < n; ++j) {
            pr.c[j] = rng.uniform(-1.0, 1.0);
            pr.ub[j] = rng.uniform(0.5, 1.5);
        }
        for (int r = 0; r < p; ++r) {
            for (int j = 0; j < n; ++j) pr.A(r, j) = rng.uniform(-1.0, 1.0);
            pr.b[r] = rng.uniform(0.2, 1.5);  // origin feasible
        }
        const lp::Solution sol = lp::solve(pr);
        REQUIRE(sol.status == lp::Status::Optimal);
        const auto oracle = vt::lp_vertex_enumeration(pr);
        REQUIRE(oracle.has_value());
        CHECK(sol.value == doctest::Approx(*oracle).epsilon(1e-7).scale(1.0));
    }
}

TEST_CASE("identical problems give identical values") {
    Rng rng(4242);
    lp::Problem pr = box_problem(4, 3);
    for (auto& v : pr.c) v = rng.uniform(-1.0, 1.0);
    for (auto& v : pr.A.data()) v = rng.uniform(-1.0, 1.0);
    for (auto& v : pr.b) v = rng.uniform(0.0, 1.0);
    const lp::Solution a = lp::solve(pr);
    const lp::Solution b = lp::solve(pr);
    CHECK(a.value == b.value);
    CHECK(a.point == b.point);
    CHECK(a.iterations == b.iterations);
}
