#include "vsense/perturb.hpp"

#include <algorithm>
#include <stdexcept>

namespace vsense {

Box box_of(const PerturbationSpec& spec, std::span<const double> x) {
    Box box;
    box.lo.resize(x.size());
    box.hi.resize(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (x[i] < spec.clip_lo || x[i] > spec.clip_hi) {
            throw std::domain_error("box_of: input outside normalized range");
        }
        const double eps = spec.eps_for(i, x.size());
        box.lo[i] = std::max(spec.clip_lo, x[i] - eps);
        box.hi[i] = std::min(spec.clip_hi, x[i] + eps);
    }
    return box;
}

bool contains(const Box& box, std::span<const double> z) {
    if (z.size() != box.dim()) return false;
    for (std::size_t i = 0; i < z.size(); ++i) {
        if (z[i] < box.lo[i] || z[i] > box.hi[i]) return false;
    }
    return true;
}

Vector sample_uniform(const Box& box, Rng& rng) {
    Vector z(box.dim());
    for (std::size_t i = 0; i < z.size(); ++i) {
        z[i] = std::clamp(rng.uniform(box.lo[i], box.hi[i]), box.lo[i], box.hi[i]);
    }
    return z;
}

}  // namespace vsense
