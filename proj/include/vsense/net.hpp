#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "vsense/linalg.hpp"
#include "vsense/rng.hpp"

namespace vsense {

// Training provenance stored alongside the weights.
struct ModelMeta {
    std::string mode = "standard";
    std::uint64_t seed = 0;
    double eps_series = 0.0;
    double eps_scalar = 0.0;
    double lambda = 0.0;
};

// Single-hidden-layer ReLU regression network:
//   f(x) = w2 . relu(W1 x + b1) + b2
struct DenseNet {
    int input_dim = 0;
    int hidden_dim = 0;
    Matrix W1;      // hidden_dim x input_dim
    Vector b1;      // hidden_dim
    Vector w2;      // hidden_dim
    double b2 = 0.0;
    ModelMeta meta;
};

// Zero-initialized network of the given shape.
DenseNet make_net(int input_dim, int hidden_dim);

// Seeded init, uniform in +-1/sqrt(fan_in) per layer. Draw order is fixed:
// W1 row-major, b1, w2, b2.
DenseNet init_net(int input_dim, int hidden_dim, Rng& rng);

// W1 x + b1. Throws std::invalid_argument on a size mismatch.
Vector hidden_preactivations(const DenseNet& net, std::span<const double> x);

double forward(const DenseNet& net, std::span<const double> x);

bool all_finite(const DenseNet& net);

// Parameter-shaped accumulator used for gradients and optimizer velocity.
struct Gradients {
    Matrix W1;
    Vector b1;
    Vector w2;
    double b2 = 0.0;

    Gradients() = default;
    explicit Gradients(const DenseNet& net)
        : W1(net.hidden_dim, net.input_dim), b1(net.hidden_dim, 0.0),
          w2(net.hidden_dim, 0.0) {}

    void zero();
    // this += a * other
    void add_scaled(const Gradients& other, double a);
};

// A batch referencing externally owned feature rows.
struct Batch {
    std::vector<std::span<const double>> x;
    Vector y;
    std::size_t size() const { return y.size(); }
};

// Mean squared error over the batch: (1/B) sum (f(x_i) - y_i)^2.
double mse_loss(const DenseNet& net, const Batch& batch);

// Same, also accumulating d(loss)/d(params) * weight into grads.
// Throws std::invalid_argument on an empty batch.
double mse_loss_gradients(const DenseNet& net, const Batch& batch, Gradients& grads,
                          double weight = 1.0);

// JSON round trip. Floats are written with 17 significant digits so that
// loading reproduces the weights bit for bit.
std::string model_to_json(const DenseNet& net);
DenseNet model_from_json(const std::string& text);
void save_model(const DenseNet& net, const std::filesystem::path& path);
DenseNet load_model(const std::filesystem::path& path);

}  // namespace vsense
