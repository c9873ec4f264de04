#pragma once

#include <span>

#include "vsense/linalg.hpp"
#include "vsense/rng.hpp"

namespace vsense {

// Per-feature noise model: the first K-1 features (the sensor time series)
// share eps_series, the last feature (the scalar sensor) uses eps_scalar.
// Epsilons are absolute offsets in normalized units.
struct PerturbationSpec {
    double eps_series = 0.01;
    double eps_scalar = 0.001;
    double clip_lo = 0.0;
    double clip_hi = 1.0;

    double eps_for(std::size_t i, std::size_t dim) const {
        return i + 1 < dim ? eps_series : eps_scalar;
    }

    PerturbationSpec scaled(double factor) const {
        PerturbationSpec s = *this;
        s.eps_series *= factor;
        s.eps_scalar *= factor;
        return s;
    }

    bool zero() const { return eps_series == 0.0 && eps_scalar == 0.0; }
};

// Axis-aligned admissible input region around one example.
struct Box {
    Vector lo, hi;
    std::size_t dim() const { return lo.size(); }
};

// B(x): per-feature eps interval clipped to the normalized range.
// Throws std::domain_error if x falls outside [clip_lo, clip_hi].
Box box_of(const PerturbationSpec& spec, std::span<const double> x);

bool contains(const Box& box, std::span<const double> z);

// Coordinate-wise independent uniform draw; always lands inside the box.
Vector sample_uniform(const Box& box, Rng& rng);

}  // namespace vsense
