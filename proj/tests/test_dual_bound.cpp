#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "support/test_utils.hpp"
#include "vsense/dual_bound.hpp"

using namespace vsense;
namespace vt = vsense::testing;

namespace {

Box random_box(const Vector& x, double eps, Rng& rng) {
    Box box;
    box.lo.resize(x.size());
    box.hi.resize(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double e = eps * rng.uniform01();
        box.lo[i] = std::max(0.0, x[i] - e);
        box.hi[i] = std::min(1.0, x[i] + e);
    }
    return box;
}

}  // namespace

TEST_CASE("preactivation intervals: point box reproduces the preactivations") {
    Rng rng(2);
    const DenseNet net = vt::random_net(4, 5, rng);
    const Vector x = vt::random_point01(4, rng);
    const Box box{x, x};
    const auto acts = preactivation_intervals(net, box);
    const Vector a = hidden_preactivations(net, x);
    for (int j = 0; j < net.hidden_dim; ++j) {
        CHECK(acts.l[j] == doctest::Approx(a[j]).epsilon(1e-15));
        CHECK(acts.u[j] == doctest::Approx(a[j]).epsilon(1e-15));
    }
}

TEST_CASE("preactivation intervals: sign-split row straddles zero") {
    DenseNet net = make_net(2, 1);
    net.W1(0, 0) = 1.0;
    net.W1(0, 1) = -1.0;
    const Box box{{0.0, 0.0}, {1.0, 1.0}};
    const auto acts = preactivation_intervals(net, box);
    CHECK(acts.l[0] == -1.0);
    CHECK(acts.u[0] == 1.0);
    CHECK(acts.phase[0] == Phase::Unstable);
}

TEST_CASE("preactivation intervals: sampled preactivations stay inside") {
    Rng rng(31);
    const DenseNet net = vt::random_net(4, 5, rng);
    const Vector x = vt::random_point01(4, rng);
    const Box box = random_box(x, 0.2, rng);
    const auto acts = preactivation_intervals(net, box);
    for (int s = 0; s < 1000; ++s) {
        const Vector z = sample_uniform(box, rng);
        const Vector a = hidden_preactivations(net, z);
        for (int j = 0; j < net.hidden_dim; ++j) {
            CHECK(a[j] >= acts.l[j] - 1e-12);
            CHECK(a[j] <= acts.u[j] + 1e-12);
        }
    }
}

TEST_CASE("preactivation intervals: phase matches the interval signs") {
    Rng rng(32);
    for (int trial = 0; trial < 50; ++trial) {
        const DenseNet net = vt::random_net(3, 4, rng);
        const Vector x = vt::random_point01(3, rng);
        const Box box = random_box(x, 0.3, rng);
        const auto acts = preactivation_intervals(net, box);
        for (int j = 0; j < net.hidden_dim; ++j) {
            switch (acts.phase[j]) {
                case Phase::Inactive: CHECK(acts.u[j] <= 0.0); break;
                case Phase::Active: CHECK(acts.l[j] >= 0.0); break;
                case Phase::Unstable:
                    CHECK(acts.l[j] < 0.0);
                    CHECK(acts.u[j] > 0.0);
                    break;
            }
        }
    }
}

TEST_CASE("dual bounds: point box collapses to f(x)") {
    Rng rng(21);
    for (int trial = 0; trial < 20; ++trial) {
        const DenseNet net = vt::random_net(5, 6, rng);
        const Vector x = vt::random_point01(5, rng);
        const Box box{x, x};
        const BoundPair b = dual_output_bounds(net, box);
        const double fx = forward(net, x);
        CHECK(std::abs(b.lower - fx) <= 1e-12);
        CHECK(std::abs(b.upper - fx) <= 1e-12);
    }
}

TEST_CASE("dual bounds: hand-evaluated single-unit box") {
    // f(z) = relu(z - 0.1) over z in [0, 0.15]: interval [-0.1, 0.05],
    // chord slope 1/3. The upper bound is tight at 0.05; the lower bound
    // is -1/30, strictly below the true minimum 0.
    DenseNet net = make_net(1, 1);
    net.W1(0, 0) = 1.0;
    net.b1[0] = -0.1;
    net.w2[0] = 1.0;
    const Box box{{0.0}, {0.15}};
    const BoundPair b = dual_output_bounds(net, box);
    CHECK(b.upper == doctest::Approx(0.05).epsilon(1e-12));
    CHECK(b.lower == doctest::Approx(-1.0 / 30.0).epsilon(1e-12));
}

TEST_CASE("dual bounds: all-stable network equals the exact linear extrema") {
    Rng rng(55);
    for (int trial = 0; trial < 20; ++trial) {
        DenseNet net = vt::random_net(3, 4, rng, 0.5);
        // Large positive biases force every unit active over [0,1]^K; flip two
        // units inactive with large negative biases.
        for (int j = 0; j < net.hidden_dim; ++j) net.b1[j] = 5.0 + rng.uniform01();
        net.b1[0] = -9.0;
        net.b1[1] = -8.0;
        const Vector x = vt::random_point01(3, rng);
        const Box box = random_box(x, 0.2, rng);
        const auto acts = preactivation_intervals(net, box);
        for (auto ph : acts.phase) REQUIRE(ph != Phase::Unstable);

        // Exact extrema of the induced linear function over the box.
        Vector coef(3, 0.0);
        double cst = net.b2;
        for (int j = 2; j < net.hidden_dim; ++j) {
            cst += net.w2[j] * net.b1[j];
            for (int i = 0; i < 3; ++i) coef[i] += net.w2[j] * net.W1(j, i);
        }
        double lo = cst, hi = cst;
        for (int i = 0; i < 3; ++i) {
            lo += std::min(coef[i] * box.lo[i], coef[i] * box.hi[i]);
            hi += std::max(coef[i] * box.lo[i], coef[i] * box.hi[i]);
        }
        const BoundPair b = dual_output_bounds(net, box);
        CHECK(b.lower == doctest::Approx(lo).epsilon(1e-12));
        CHECK(b.upper == doctest::Approx(hi).epsilon(1e-12));
    }
}

TEST_CASE("dual bounds: sampled outputs never escape the certified interval") {
    Rng rng(91);
    for (int trial = 0; trial < 10; ++trial) {
        const DenseNet net = vt::random_net(4, 6, rng);
        const Vector x = vt::random_point01(4, rng);
        const Box box = random_box(x, 0.15, rng);
        const BoundPair b = dual_output_bounds(net, box);
        REQUIRE(b.lower <= b.upper);
        for (int s = 0; s < 1000; ++s) {
            const Vector z = sample_uniform(box, rng);
            const double fz = forward(net, z);
            CHECK(fz >= b.lower - 1e-9);
            CHECK(fz <= b.upper + 1e-9);
        }
    }
}

TEST_CASE("dual bounds: growing every epsilon never shrinks the interval") {
    Rng rng(17);
    PerturbationSpec spec;
    spec.eps_series = 0.02;
    spec.eps_scalar = 0.002;
    for (int trial = 0; trial < 200; ++trial) {
        const DenseNet net = vt::random_net(4, 5, rng);
        const Vector x = vt::random_point01(4, rng);
        const BoundPair a = dual_output_bounds(net, box_of(spec, x));
        for (double alpha : {1.0, 1.5, 3.0, 10.0}) {
            const BoundPair b = dual_output_bounds(net, box_of(spec.scaled(alpha), x));
            CHECK(b.lower <= a.lower + 1e-12);
            CHECK(b.upper >= a.upper - 1e-12);
        }
    }
}

TEST_CASE("robust_mse: branch selection") {
    CHECK(robust_mse(BoundPair{0.4, 0.4}, 0.4) == 0.0);
    CHECK(robust_mse(BoundPair{0.0, 1.0}, 0.3) == doctest::Approx(0.49).epsilon(1e-15));
    CHECK(robust_mse(BoundPair{0.2, 0.4}, 0.4) == doctest::Approx(0.04).epsilon(1e-15));
}

TEST_CASE("robust_mse dominates the squared error of every sampled point") {
    Rng rng(44);
    const DenseNet net = vt::random_net(4, 5, rng);
    const Vector x = vt::random_point01(4, rng);
    const Box box = random_box(x, 0.1, rng);
    const BoundPair b = dual_output_bounds(net, box);
    const double y = rng.uniform01();
    const double rm = robust_mse(b, y);
    for (int s = 0; s < 500; ++s) {
        const Vector z = sample_uniform(box, rng);
        const double d = forward(net, z) - y;
        CHECK(rm >= d * d - 1e-9);
    }
}

TEST_CASE("certified_relative_error: examples and the y=0 domain error") {
    CHECK(certified_relative_error(BoundPair{0.5, 0.5}, 0.5) == 0.0);
    CHECK(certified_relative_error(BoundPair{0.45, 0.55}, 0.5) ==
          doctest::Approx(0.10).epsilon(1e-12));
    CHECK(certified_relative_error(BoundPair{0.4, 0.7}, 0.5) ==
          doctest::Approx(0.40).epsilon(1e-12));
    CHECK_THROWS_AS(certified_relative_error(BoundPair{0.1, 0.2}, 0.0), std::domain_error);
}

TEST_CASE("robust MSE gradients match finite differences away from kinks and ties") {
    Rng rng(202);
    int tested = 0;
    while (tested < 10) {
        DenseNet net = vt::random_net(3, 4, rng);
        std::vector<Vector> xs;
        std::vector<Box> boxes;
        Vector ys;
        bool usable = true;
        for (int k = 0; k < 2; ++k) {
            const Vector x = vt::random_point01(3, rng);
            const Box box = random_box(x, 0.1, rng);
            const double y = rng.uniform01();
            const auto acts = preactivation_intervals(net, box);
            for (int j = 0; j < net.hidden_dim; ++j) {
                if (std::abs(acts.l[j]) < 1e-3 || std::abs(acts.u[j]) < 1e-3) usable = false;
            }
            DualTape tape;
            const BoundPair b = dual_output_bounds(net, box, &tape);
            const double dl = (b.lower - y) * (b.lower - y);
            const double du = (b.upper - y) * (b.upper - y);
            if (std::abs(dl - du) < 1e-6) usable = false;
            // The corner choice flips where an input coefficient crosses
            // zero; keep the finite-difference probe away from those kinks.
            for (int d = 0; d < 2; ++d) {
                for (double gi : tape.g[d]) {
                    if (std::abs(gi) < 1e-4) usable = false;
                }
            }
            xs.push_back(x);
            boxes.push_back(box);
            ys.push_back(y);
        }
        if (!usable) continue;
        ++tested;

        Batch batch;
        for (const auto& x : xs) batch.x.push_back(x);
        batch.y = ys;

        Gradients g(net);
        robust_mse_loss_gradients(net, batch, boxes, g);
        const auto fd = vt::finite_difference_gradient(net, [&](const DenseNet& n) {
            return robust_mse_loss(n, batch, boxes);
        });
        CHECK(vt::max_gradient_mismatch(g, fd) <= 1e-3);
    }
}
