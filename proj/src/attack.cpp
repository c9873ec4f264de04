#include "vsense/attack.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace vsense {

namespace {

// Gradient of f with respect to the input at z.
void input_gradient(const DenseNet& net, std::span<const double> z, Vector& g) {
    g.assign(net.input_dim, 0.0);
    for (int j = 0; j < net.hidden_dim; ++j) {
        const double a = dot(net.W1.row(j), z) + net.b1[j];
        if (a <= 0.0) continue;
        const double wj = net.w2[j];
        for (int i = 0; i < net.input_dim; ++i) g[i] += wj * net.W1(j, i);
    }
}

double sign_of(double v) { return v > 0.0 ? 1.0 : v < 0.0 ? -1.0 : 0.0; }

}  // namespace

AttackResult pgd_attack(const DenseNet& net, std::span<const double> x, double y, const Box& box,
                        const AttackConfig& cfg, Rng& rng) {
    if (y == 0.0) throw std::domain_error("pgd_attack: y must be nonzero");
    if (!contains(box, x)) throw std::invalid_argument("pgd_attack: x outside box");
    const int K = net.input_dim;

    Vector best(x.begin(), x.end());
    double clean = forward(net, x) - y;
    double best_sq = clean * clean;

    Vector z(K), g(K);
    const int restarts = std::max(1, cfg.restarts);
    for (int r = 0; r < restarts; ++r) {
        if (r == 0 && !cfg.random_start) {
            z.assign(x.begin(), x.end());
        } else {
            z = sample_uniform(box, rng);
            const double d0 = forward(net, z) - y;
            if (d0 * d0 > best_sq) {
                best_sq = d0 * d0;
                best = z;
            }
        }
        for (int step = 0; step < cfg.steps; ++step) {
            const double diff = forward(net, z) - y;
            input_gradient(net, z, g);
            for (int i = 0; i < K; ++i) {
                // At the squared-error stationary point f(z) = y the gradient
                // vanishes; step along the sign of the output gradient to
                // escape.
                const double dir = diff != 0.0 ? sign_of(diff * g[i]) : sign_of(g[i]);
                const double step_size = i + 1 < K ? cfg.step_series : cfg.step_scalar;
                z[i] = std::clamp(z[i] + step_size * dir, box.lo[i], box.hi[i]);
            }
            const double d = forward(net, z) - y;
            if (d * d > best_sq) {
                best_sq = d * d;
                best = z;
            }
        }
    }

    return AttackResult{std::move(best), std::sqrt(best_sq) / std::abs(y)};
}

double noise_error(const DenseNet& net, std::span<const double> x, double y, const Box& box,
                   int draws, Rng& rng) {
    if (y == 0.0) throw std::domain_error("noise_error: y must be nonzero");
    if (draws < 1) throw std::invalid_argument("noise_error: draws must be >= 1");
    (void)x;
    double sum = 0.0;
    for (int d = 0; d < draws; ++d) {
        const Vector z = sample_uniform(box, rng);
        sum += std::abs(forward(net, z) - y);
    }
    return sum / (draws * std::abs(y));
}

Vector pgd_extremize(const DenseNet& net, const Box& box, double direction, int steps) {
    const int K = net.input_dim;
    Vector z(K), step(K);
    for (int i = 0; i < K; ++i) {
        z[i] = 0.5 * (box.lo[i] + box.hi[i]);
        step[i] = (box.hi[i] - box.lo[i]) / 8.0;
    }
    Vector best = z;
    double best_val = direction * forward(net, z);
    Vector g(K);
    for (int s = 0; s < steps; ++s) {
        input_gradient(net, z, g);
        for (int i = 0; i < K; ++i) {
            z[i] = std::clamp(z[i] + step[i] * sign_of(direction * g[i]), box.lo[i], box.hi[i]);
        }
        const double v = direction * forward(net, z);
        if (v > best_val) {
            best_val = v;
            best = z;
        }
    }
    return best;
}

}  // namespace vsense
