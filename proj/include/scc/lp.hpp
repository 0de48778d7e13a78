#pragma once

// Small dense linear programs. The geometry module only ever solves problems
// with a handful of variables and at most a few dozen rows, so a tableau
// simplex with Bland's rule is plenty.

#include "scc/types.hpp"

namespace scc::lp {

enum class Status { Optimal, Infeasible, Unbounded };

/// maximize c'x  s.t.  A_ub x <= b_ub,  A_eq x = b_eq,  lower <= x <= upper.
/// Infinite bounds are allowed on either side.
struct Problem {
    Vector objective;
    Matrix a_ub;
    Vector b_ub;
    Matrix a_eq;
    Vector b_eq;
    Vector lower;
    Vector upper;

    explicit Problem(Eigen::Index num_vars);
};

struct Solution {
    Status status = Status::Infeasible;
    Vector x;
    double objective = 0.0;
};

Solution maximize(const Problem& problem);

}  // namespace scc::lp
