#pragma once

#include "vsense/linalg.hpp"

namespace vsense::lp {

enum class Sense { Maximize, Minimize };
enum class Status { Optimal, Infeasible };

// Dense LP with box-bounded variables:
//   optimize c.v  subject to  A v <= b,  lb <= v <= ub.
// All bounds must be finite; the verifier only ever builds box-bounded
// problems, so no free-variable handling exists.
struct Problem {
    Vector c;
    Matrix A;   // p x n
    Vector b;
    Vector lb, ub;
    Sense sense = Sense::Maximize;
};

struct Solution {
    Status status = Status::Infeasible;
    double value = 0.0;
    Vector point;
    int iterations = 0;
};

// Bounded-variable revised simplex, two phases, Bland's rule engaged on
// degeneracy so termination is guaranteed. Throws std::invalid_argument on
// malformed shapes and std::logic_error if an unbounded ray is detected
// (impossible for a well-formed box-bounded problem, hence a defect).
Solution solve(const Problem& problem);

}  // namespace vsense::lp
