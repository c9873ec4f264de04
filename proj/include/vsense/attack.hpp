#pragma once

#include "vsense/net.hpp"
#include "vsense/perturb.hpp"

namespace vsense {

struct AttackConfig {
    int steps = 10;
    double step_series = 0.0025;
    double step_scalar = 0.00025;
    int restarts = 1;
    bool random_start = false;
};

struct AttackResult {
    Vector z;          // worst iterate found, always inside the box
    double adv_err;    // |f(z) - y| / |y|
};

// Projected gradient ascent on (f(z) - y)^2 with per-feature step sizes.
// The clean point is always a candidate, so adv_err >= clean relative error.
// The RNG is consumed only for random starts.
AttackResult pgd_attack(const DenseNet& net, std::span<const double> x, double y, const Box& box,
                        const AttackConfig& cfg, Rng& rng);

// Mean relative error under uniform noise from the box.
double noise_error(const DenseNet& net, std::span<const double> x, double y, const Box& box,
                   int draws, Rng& rng);

// Deterministic projected gradient ascent on direction * f(z), used to seed
// branch-and-bound incumbents. Returns the best iterate.
Vector pgd_extremize(const DenseNet& net, const Box& box, double direction, int steps);

}  // namespace vsense
