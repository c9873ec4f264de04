#pragma once

#include <array>
#include <vector>

#include "vsense/net.hpp"
#include "vsense/perturb.hpp"

namespace vsense {

// Certified output interval for one example: l <= f(z) <= u for all z in the box.
struct BoundPair {
    double lower = 0.0;
    double upper = 0.0;
};

enum class Phase { Inactive, Active, Unstable };

// Interval-arithmetic ranges of the hidden pre-activations over a box.
struct PreactivationIntervals {
    Vector l, u;
    std::vector<Phase> phase;
};

PreactivationIntervals preactivation_intervals(const DenseNet& net, const Box& box);

// Phase used by the bound and the verifier: a straddling interval narrower
// than 1e-12 is classified stable by midpoint sign, which keeps the chord
// slope u/(u-l) away from a vanishing denominator.
Phase effective_phase(double l, double u);

// Intermediates of the bound computation kept for the backward pass.
// Direction index 0 is c = +1 (upper bound), 1 is c = -1 (lower bound).
struct DualTape {
    Vector l, u;                     // pre-activation intervals
    std::vector<Phase> phase;        // effective phase (degenerate units resolved)
    Vector s;                        // chord slope u/(u-l) for unstable units
    std::array<Vector, 2> nu;        // per-unit pass-through coefficients
    std::array<Vector, 2> g;         // induced linear input coefficients
    std::array<double, 2> J{};       // bound values: upper = J[0], lower = -J[1]
};

// Duality/linear-relaxation output bounds over the box. If tape is non-null
// the intermediates are recorded for gradient accumulation.
BoundPair dual_output_bounds(const DenseNet& net, const Box& box, DualTape* tape = nullptr);

// Adds upstream * dJ/d(params) for direction dir (0: c=+1, 1: c=-1) to grads.
// Unit phases, the sign tests, and the box-corner choices are treated as
// locally constant; everything else is differentiated analytically.
void accumulate_dual_bound_gradient(const DenseNet& net, const Box& box, const DualTape& tape,
                                    int dir, double upstream, Gradients& grads);

// Certified worst-case squared error: max((l-y)^2, (u-y)^2).
double robust_mse(const BoundPair& bounds, double y);

// Worst-case relative error implied by the bounds: max(|l-y|, |u-y|) / |y|.
// Throws std::domain_error when y == 0.
double certified_relative_error(const BoundPair& bounds, double y);

// Mean robust MSE over a batch, one box per example.
double robust_mse_loss(const DenseNet& net, const Batch& batch, const std::vector<Box>& boxes);

// Same, accumulating weight * d(loss)/d(params) into grads.
double robust_mse_loss_gradients(const DenseNet& net, const Batch& batch,
                                 const std::vector<Box>& boxes, Gradients& grads,
                                 double weight = 1.0);

}  // namespace vsense
