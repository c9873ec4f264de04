#pragma once

#include <cmath>
#include <functional>
#include <vector>

#include "vsense/net.hpp"
#include "vsense/perturb.hpp"
#include "vsense/rng.hpp"

namespace vsense::testing {

inline int param_count(const DenseNet& net) {
    return net.hidden_dim * net.input_dim + 2 * net.hidden_dim + 1;
}

// Flat view of all parameters in W1, b1, w2, b2 order.
inline double& param_ref(DenseNet& net, int idx) {
    const int w1 = net.hidden_dim * net.input_dim;
    if (idx < w1) return net.W1.data()[idx];
    idx -= w1;
    if (idx < net.hidden_dim) return net.b1[idx];
    idx -= net.hidden_dim;
    if (idx < net.hidden_dim) return net.w2[idx];
    return net.b2;
}

inline double grad_entry(const Gradients& g, int idx) {
    const int w1 = static_cast<int>(g.W1.data().size());
    if (idx < w1) return g.W1.data()[idx];
    idx -= w1;
    if (idx < static_cast<int>(g.b1.size())) return g.b1[idx];
    idx -= static_cast<int>(g.b1.size());
    if (idx < static_cast<int>(g.w2.size())) return g.w2[idx];
    return g.b2;
}

inline DenseNet random_net(int input_dim, int hidden_dim, Rng& rng, double scale = 1.0) {
    DenseNet net = make_net(input_dim, hidden_dim);
    for (auto& v : net.W1.data()) v = rng.uniform(-scale, scale);
    for (auto& v : net.b1) v = rng.uniform(-scale, scale);
    for (auto& v : net.w2) v = rng.uniform(-scale, scale);
    net.b2 = rng.uniform(-scale, scale);
    return net;
}

inline Vector random_point01(int dim, Rng& rng) {
    Vector x(dim);
    for (auto& v : x) v = rng.uniform01();
    return x;
}

// Central finite differences of an arbitrary scalar loss over the parameters.
inline std::vector<double> finite_difference_gradient(
    const DenseNet& net, const std::function<double(const DenseNet&)>& loss, double h = 1e-5) {
    DenseNet work = net;
    std::vector<double> fd(param_count(net));
    for (int k = 0; k < param_count(net); ++k) {
        double& p = param_ref(work, k);
        const double saved = p;
        p = saved + h;
        const double plus = loss(work);
        p = saved - h;
        const double minus = loss(work);
        p = saved;
        fd[k] = (plus - minus) / (2.0 * h);
    }
    return fd;
}

// Largest relative deviation between analytic and finite-difference
// gradients, with an absolute floor so near-zero entries compare sanely.
inline double max_gradient_mismatch(const Gradients& g, const std::vector<double>& fd,
                                    double floor = 1e-6) {
    double worst = 0.0;
    for (std::size_t k = 0; k < fd.size(); ++k) {
        const double a = grad_entry(g, static_cast<int>(k));
        const double denom = std::max({std::abs(a), std::abs(fd[k]), floor});
        worst = std::max(worst, std::abs(a - fd[k]) / denom);
    }
    return worst;
}

}  // namespace vsense::testing
