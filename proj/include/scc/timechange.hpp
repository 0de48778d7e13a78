#pragma once

// Clocks, their right inverses, and composition of paths with clocks.

#include "scc/paths.hpp"

#include <optional>

namespace scc {

struct TimeChange {
    CadlagPath forward;  // a(t) = t + U(t) . u_hat1
    CadlagPath inverse;  // c(t) = inf{s : a(s) > t}
};

/// Requires U without jumps on (0, T] and U . u_hat1 nondecreasing. An
/// initial jump is allowed; it shifts the clock to start at U(0) . u_hat1.
TimeChange stretch(const CadlagPath& u, const Vector& u_hat1);

/// c(t) = inf{s >= 0 : a(s) > t} on [0, a(T)]. Flat pieces of a become jumps
/// of c and jumps of a become flat pieces. At t = a(T) the infimum is over an
/// empty set inside the horizon; c is set to T there, and evaluating c
/// beyond a(T) raises HorizonExhausted.
CadlagPath right_inverse(const CadlagPath& a);

/// X o clock on the joint refinement. Throws HorizonExhausted when the
/// clock leaves X's horizon.
CadlagPath rescale_path(const CadlagPath& x, const CadlagPath& clock);

struct CovIdentity {
    double lhs = 0.0;
    double rhs = 0.0;
    double gap = 0.0;
};

/// Both sides of int_{[0,T]} f(s) dF(a(s)) = int_{[0,a(T)]} f(c(s-)) dF(s),
/// with f(0) F(0) as the mass at 0. F defaults to the identity on [0, a(T)].
CovIdentity cov_identity_check(const CadlagPath& f, const CadlagPath& a,
                               const std::optional<CadlagPath>& big_f = std::nullopt);

}  // namespace scc
