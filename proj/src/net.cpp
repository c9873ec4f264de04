#include "vsense/net.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "vsense/io_util.hpp"

namespace vsense {

DenseNet make_net(int input_dim, int hidden_dim) {
    if (input_dim < 1 || hidden_dim < 1) {
        throw std::invalid_argument("make_net: dimensions must be positive");
    }
    DenseNet net;
    net.input_dim = input_dim;
    net.hidden_dim = hidden_dim;
    net.W1 = Matrix(hidden_dim, input_dim);
    net.b1.assign(hidden_dim, 0.0);
    net.w2.assign(hidden_dim, 0.0);
    net.b2 = 0.0;
    return net;
}

DenseNet init_net(int input_dim, int hidden_dim, Rng& rng) {
    DenseNet net = make_net(input_dim, hidden_dim);
    const double r1 = 1.0 / std::sqrt(static_cast<double>(input_dim));
    const double r2 = 1.0 / std::sqrt(static_cast<double>(hidden_dim));
    for (int j = 0; j < hidden_dim; ++j) {
        for (int i = 0; i < input_dim; ++i) net.W1(j, i) = rng.uniform(-r1, r1);
    }
    for (int j = 0; j < hidden_dim; ++j) net.b1[j] = rng.uniform(-r1, r1);
    for (int j = 0; j < hidden_dim; ++j) net.w2[j] = rng.uniform(-r2, r2);
    net.b2 = rng.uniform(-r2, r2);
    return net;
}

Vector hidden_preactivations(const DenseNet& net, std::span<const double> x) {
    if (static_cast<int>(x.size()) != net.input_dim) {
        throw std::invalid_argument("forward: input has wrong dimension");
    }
    Vector a(net.hidden_dim);
    for (int j = 0; j < net.hidden_dim; ++j) {
        a[j] = dot(net.W1.row(j), x) + net.b1[j];
    }
    return a;
}

double forward(const DenseNet& net, std::span<const double> x) {
    if (static_cast<int>(x.size()) != net.input_dim) {
        throw std::invalid_argument("forward: input has wrong dimension");
    }
    double out = net.b2;
    for (int j = 0; j < net.hidden_dim; ++j) {
        const double a = dot(net.W1.row(j), x) + net.b1[j];
        if (a > 0.0) out += net.w2[j] * a;
    }
    return out;
}

bool all_finite(const DenseNet& net) {
    for (double v : net.W1.data()) {
        if (!std::isfinite(v)) return false;
    }
    for (double v : net.b1) {
        if (!std::isfinite(v)) return false;
    }
    for (double v : net.w2) {
        if (!std::isfinite(v)) return false;
    }
    return std::isfinite(net.b2);
}

void Gradients::zero() {
    W1.fill(0.0);
    b1.assign(b1.size(), 0.0);
    w2.assign(w2.size(), 0.0);
    b2 = 0.0;
}

void Gradients::add_scaled(const Gradients& other, double a) {
    for (std::size_t i = 0; i < W1.data().size(); ++i) W1.data()[i] += a * other.W1.data()[i];
    for (std::size_t i = 0; i < b1.size(); ++i) b1[i] += a * other.b1[i];
    for (std::size_t i = 0; i < w2.size(); ++i) w2[i] += a * other.w2[i];
    b2 += a * other.b2;
}

double mse_loss(const DenseNet& net, const Batch& batch) {
    if (batch.size() == 0) throw std::invalid_argument("mse_loss: empty batch");
    double loss = 0.0;
    for (std::size_t k = 0; k < batch.size(); ++k) {
        const double d = forward(net, batch.x[k]) - batch.y[k];
        loss += d * d;
    }
    return loss / static_cast<double>(batch.size());
}

double mse_loss_gradients(const DenseNet& net, const Batch& batch, Gradients& grads,
                          double weight) {
    if (batch.size() == 0) throw std::invalid_argument("mse_loss_gradients: empty batch");
    const double inv_b = 1.0 / static_cast<double>(batch.size());
    double loss = 0.0;
    Vector a(net.hidden_dim);
    for (std::size_t k = 0; k < batch.size(); ++k) {
        const auto x = batch.x[k];
        a = hidden_preactivations(net, x);
        double out = net.b2;
        for (int j = 0; j < net.hidden_dim; ++j) {
            if (a[j] > 0.0) out += net.w2[j] * a[j];
        }
        const double diff = out - batch.y[k];
        loss += diff * diff;

        const double up = weight * inv_b * 2.0 * diff;
        grads.b2 += up;
        for (int j = 0; j < net.hidden_dim; ++j) {
            if (a[j] <= 0.0) continue;
            grads.w2[j] += up * a[j];
            const double uj = up * net.w2[j];
            grads.b1[j] += uj;
            for (int i = 0; i < net.input_dim; ++i) grads.W1(j, i) += uj * x[i];
        }
    }
    return loss * inv_b;
}

std::string model_to_json(const DenseNet& net) {
    std::ostringstream out;
    auto write_vec = [&out](const Vector& v) {
        out << '[';
        for (std::size_t i = 0; i < v.size(); ++i) {
            if (i) out << ',';
            out << fmt17(v[i]);
        }
        out << ']';
    };
    out << "{\n";
    out << "  \"input_dim\": " << net.input_dim << ",\n";
    out << "  \"hidden_dim\": " << net.hidden_dim << ",\n";
    out << "  \"W1\": [";
    for (int j = 0; j < net.hidden_dim; ++j) {
        if (j) out << ',';
        out << "\n    [";
        for (int i = 0; i < net.input_dim; ++i) {
            if (i) out << ',';
            out << fmt17(net.W1(j, i));
        }
        out << ']';
    }
    out << "\n  ],\n";
    out << "  \"b1\": ";
    write_vec(net.b1);
    out << ",\n  \"w2\": ";
    write_vec(net.w2);
    out << ",\n  \"b2\": " << fmt17(net.b2) << ",\n";
    out << "  \"meta\": {\"mode\": \"" << net.meta.mode << "\", \"seed\": " << net.meta.seed
        << ", \"eps_series\": " << fmt17(net.meta.eps_series)
        << ", \"eps_scalar\": " << fmt17(net.meta.eps_scalar)
        << ", \"lambda\": " << fmt17(net.meta.lambda) << "}\n";
    out << "}\n";
    return out.str();
}

DenseNet model_from_json(const std::string& text) {
    const nlohmann::json j = nlohmann::json::parse(text);
    DenseNet net = make_net(j.at("input_dim").get<int>(), j.at("hidden_dim").get<int>());
    const auto& w1 = j.at("W1");
    if (static_cast<int>(w1.size()) != net.hidden_dim) {
        throw std::runtime_error("model: W1 row count does not match hidden_dim");
    }
    for (int r = 0; r < net.hidden_dim; ++r) {
        const auto& row = w1.at(r);
        if (static_cast<int>(row.size()) != net.input_dim) {
            throw std::runtime_error("model: W1 column count does not match input_dim");
        }
        for (int c = 0; c < net.input_dim; ++c) net.W1(r, c) = row.at(c).get<double>();
    }
    net.b1 = j.at("b1").get<Vector>();
    net.w2 = j.at("w2").get<Vector>();
    net.b2 = j.at("b2").get<double>();
    if (static_cast<int>(net.b1.size()) != net.hidden_dim ||
        static_cast<int>(net.w2.size()) != net.hidden_dim) {
        throw std::runtime_error("model: bias/output vector size mismatch");
    }
    if (j.contains("meta")) {
        const auto& m = j.at("meta");
        net.meta.mode = m.value("mode", std::string("standard"));
        net.meta.seed = m.value("seed", std::uint64_t{0});
        net.meta.eps_series = m.value("eps_series", 0.0);
        net.meta.eps_scalar = m.value("eps_scalar", 0.0);
        net.meta.lambda = m.value("lambda", 0.0);
    }
    return net;
}

void save_model(const DenseNet& net, const std::filesystem::path& path) {
    write_file_atomic(path, model_to_json(net));
}

DenseNet load_model(const std::filesystem::path& path) {
    return model_from_json(read_file(path));
}

}  // namespace vsense
