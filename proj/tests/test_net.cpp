#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>

#include "support/test_utils.hpp"
#include "vsense/net.hpp"

using namespace vsense;
namespace vt = vsense::testing;

TEST_CASE("forward: constant network outputs its bias") {
    DenseNet net = make_net(4, 3);
    net.b2 = 0.7;
    const Vector x{0.1, 0.9, 0.4, 0.0};
    CHECK(forward(net, x) == doctest::Approx(0.7).epsilon(0.0));
}

TEST_CASE("forward: single unit clamps below the kink and is linear above") {
    DenseNet net = make_net(1, 1);
    net.W1(0, 0) = 1.0;
    net.b1[0] = -0.1;
    net.w2[0] = 1.0;
    CHECK(forward(net, Vector{0.05}) == 0.0);
    CHECK(forward(net, Vector{0.3}) == doctest::Approx(0.2).epsilon(1e-15));
}

TEST_CASE("forward: dimension mismatch throws") {
    DenseNet net = make_net(3, 2);
    CHECK_THROWS_AS(forward(net, Vector{0.1, 0.2}), std::invalid_argument);
    CHECK_THROWS_AS(hidden_preactivations(net, Vector{0.1, 0.2, 0.3, 0.4}),
                    std::invalid_argument);
}

TEST_CASE("forward is bitwise deterministic") {
    Rng rng(11);
    const DenseNet net = vt::random_net(6, 5, rng);
    const Vector x = vt::random_point01(6, rng);
    CHECK(forward(net, x) == forward(net, x));
}

TEST_CASE("init_net: bounds, determinism, and finiteness") {
    Rng a(42), b(42), c(43);
    const DenseNet n1 = init_net(9, 7, a);
    const DenseNet n2 = init_net(9, 7, b);
    const DenseNet n3 = init_net(9, 7, c);
    CHECK(n1.W1 == n2.W1);
    CHECK(n1.b1 == n2.b1);
    CHECK(n1.w2 == n2.w2);
    CHECK(n1.b2 == n2.b2);
    CHECK(n1.W1.data() != n3.W1.data());
    CHECK(all_finite(n1));
    const double r1 = 1.0 / std::sqrt(9.0), r2 = 1.0 / std::sqrt(7.0);
    for (double v : n1.W1.data()) CHECK(std::abs(v) <= r1);
    for (double v : n1.b1) CHECK(std::abs(v) <= r1);
    for (double v : n1.w2) CHECK(std::abs(v) <= r2);
    CHECK(std::abs(n1.b2) <= r2);
}

TEST_CASE("all_finite flags NaN and infinity") {
    DenseNet net = make_net(2, 2);
    CHECK(all_finite(net));
    net.w2[1] = std::nan("");
    CHECK_FALSE(all_finite(net));
    net.w2[1] = 0.0;
    net.b2 = INFINITY;
    CHECK_FALSE(all_finite(net));
}

TEST_CASE("mse gradients: constant network closed form") {
    DenseNet net = make_net(3, 2);
    net.b2 = 0.9;
    Batch batch;
    const Vector x{0.2, 0.4, 0.6};
    batch.x.push_back(x);
    batch.y.push_back(0.5);
    Gradients g(net);
    const double loss = mse_loss_gradients(net, batch, g);
    CHECK(loss == doctest::Approx(0.16).epsilon(1e-12));
    CHECK(g.b2 == doctest::Approx(2.0 * (0.9 - 0.5)).epsilon(1e-12));
    for (double v : g.W1.data()) CHECK(v == 0.0);
    for (double v : g.b1) CHECK(v == 0.0);
    for (double v : g.w2) CHECK(v == 0.0);
}

TEST_CASE("mse gradients: duplicating the batch leaves the mean gradient unchanged") {
    Rng rng(5);
    const DenseNet net = vt::random_net(4, 3, rng);
    Batch one, two;
    const Vector xa = vt::random_point01(4, rng);
    const Vector xb = vt::random_point01(4, rng);
    one.x = {xa, xb};
    one.y = {0.3, 0.8};
    two.x = {xa, xb, xa, xb};
    two.y = {0.3, 0.8, 0.3, 0.8};
    Gradients g1(net), g2(net);
    const double l1 = mse_loss_gradients(net, one, g1);
    const double l2 = mse_loss_gradients(net, two, g2);
    CHECK(l1 == doctest::Approx(l2).epsilon(1e-14));
    for (std::size_t k = 0; k < g1.W1.data().size(); ++k) {
        CHECK(g1.W1.data()[k] == doctest::Approx(g2.W1.data()[k]).epsilon(1e-13));
    }
    CHECK(g1.b2 == doctest::Approx(g2.b2).epsilon(1e-13));
}

TEST_CASE("mse gradients match central finite differences away from kinks") {
    Rng rng(101);
    int tested = 0;
    while (tested < 8) {
        DenseNet net = vt::random_net(3, 4, rng);
        Batch batch;
        Vector x1 = vt::random_point01(3, rng), x2 = vt::random_point01(3, rng);
        batch.x = {x1, x2};
        batch.y = {rng.uniform01(), rng.uniform01()};

        // Resample when any pre-activation sits near the ReLU kink.
        bool near_kink = false;
        for (const auto& x : batch.x) {
            for (double a : hidden_preactivations(net, x)) {
                if (std::abs(a) < 1e-3) near_kink = true;
            }
        }
        if (near_kink) continue;
        ++tested;

        Gradients g(net);
        mse_loss_gradients(net, batch, g);
        const auto fd = vt::finite_difference_gradient(
            net, [&batch](const DenseNet& n) { return mse_loss(n, batch); });
        CHECK(vt::max_gradient_mismatch(g, fd) <= 1e-3);
    }
}

TEST_CASE("empty batch is rejected") {
    DenseNet net = make_net(2, 2);
    Batch batch;
    Gradients g(net);
    CHECK_THROWS_AS(mse_loss_gradients(net, batch, g), std::invalid_argument);
    CHECK_THROWS_AS(mse_loss(net, batch), std::invalid_argument);
}

TEST_CASE("model JSON round trip is exact and keeps metadata") {
    Rng rng(77);
    DenseNet net = vt::random_net(5, 4, rng);
    net.meta = ModelMeta{"robust", 123, 0.01, 0.001, 0.0};
    const auto path = std::filesystem::temp_directory_path() / "vsense_model_rt.json";
    save_model(net, path);
    const DenseNet back = load_model(path);
    CHECK(back.input_dim == net.input_dim);
    CHECK(back.hidden_dim == net.hidden_dim);
    CHECK(back.W1 == net.W1);
    CHECK(back.b1 == net.b1);
    CHECK(back.w2 == net.w2);
    CHECK(back.b2 == net.b2);
    CHECK(back.meta.mode == "robust");
    CHECK(back.meta.seed == 123);
    CHECK(back.meta.eps_series == 0.01);
    CHECK(back.meta.eps_scalar == 0.001);
    std::filesystem::remove(path);
}

TEST_CASE("model JSON writes floats with 17 significant digits") {
    DenseNet net = make_net(1, 1);
    net.W1(0, 0) = 0.1;  // not exactly representable; needs all digits
    const std::string text = model_to_json(net);
    CHECK(text.find("0.10000000000000001") != std::string::npos);
}
