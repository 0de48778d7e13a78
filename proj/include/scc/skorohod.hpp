#pragma once

// One-direction Skorohod map into a polyhedral cone.
//
// With g the shortfall along v0, g(x + a v0) = (g(x) - a)^+, so the minimal
// pushing is explicit: eta(t) = sup_{s <= t} g(phi(s)) and psi = phi + v0 eta.
// On a linear piece of phi, g(phi) is the positive part of a maximum of
// affine functions, so eta is their upper envelope together with the running
// maximum; the solver inserts the envelope's kinks as breakpoints.

#include "scc/geometry.hpp"
#include "scc/paths.hpp"

#include <algorithm>
#include <string>
#include <vector>

namespace scc {

class SkorohodStepper {
public:
    SkorohodStepper(const PolyCone& w_cone, const Vector& v0);

    /// Resets at time 0 and returns eta(0) = g(phi(0)).
    double start(const Vector& phi0);

    /// Advances across the linear piece phi0 -> phi_left on (t0, t1) and the
    /// jump phi_left -> phi_value at t1. Kinks of eta strictly inside the
    /// piece are reported as sink(fraction, eta) with fraction in (0, 1).
    template <class Sink>
    void advance(double t0, const Vector& phi0, double t1, const Vector& phi_left,
                 const Vector& phi_value, Sink&& sink);

    [[nodiscard]] double eta() const noexcept { return eta_; }
    [[nodiscard]] double eta_left() const noexcept { return eta_left_; }
    [[nodiscard]] const Shortfall& shortfall() const noexcept { return g_; }

private:
    Shortfall g_;
    Vector intercept_;
    Vector slope_;
    double eta_ = 0.0;
    double eta_left_ = 0.0;
};

struct SkorohodSolution {
    CadlagPath psi;
    CadlagPath eta;
};

/// Throws InitialStateOutsideCone when phi(0) is not in W (tolerance 1e-12)
/// and DirectionNotInterior when v0 is not interior to W.
SkorohodSolution skorohod_solve(const CadlagPath& phi, const PolyCone& w_cone, const Vector& v0);

struct LipschitzRatio {
    double num = 0.0;
    double bound = 0.0;
};

/// (|psi1 - psi2|* + |eta1 - eta2|*) / |phi1 - phi2|* against 1 + 2L(1 + |v0|).
LipschitzRatio lipschitz_ratio(const CadlagPath& phi1, const CadlagPath& phi2,
                               const PolyCone& w_cone, const Vector& v0, double t_end);

struct SkorohodCheck {
    bool eta_starts_nonnegative = true;
    bool eta_nondecreasing = true;
    bool psi_in_cone = true;
    bool identity_inside = true;  // phi in W everywhere => eta == 0
    bool complementarity = true;
    bool state_identity = true;   // psi == phi + v0 eta
    std::vector<std::string> failures;

    [[nodiscard]] bool ok() const noexcept { return failures.empty(); }
};

/// Checks the properties of a solution on its breakpoints.
SkorohodCheck verify_skorohod(const CadlagPath& phi, const SkorohodSolution& sol,
                              const PolyCone& w_cone, const Vector& v0, double tol = 1e-10);

// ---------------------------------------------------------------------------

template <class Sink>
void SkorohodStepper::advance(double t0, const Vector& phi0, double t1, const Vector& phi_left,
                              const Vector& phi_value, Sink&& sink) {
    // ratio_j(s) = intercept_j + slope_j s along phi0 + s (phi_left - phi0)
    g_.ratios_into(phi0, intercept_);
    g_.ratios_into(phi_left, slope_);
    slope_ -= intercept_;

    double cur_a = eta_;
    double cur_b = 0.0;
    double s = 0.0;
    const double span = t1 - t0;
    const Eigen::Index m = slope_.size();
    for (;;) {
        double next = 1.0;
        Eigen::Index pick = -1;
        for (Eigen::Index j = 0; j < m; ++j) {
            const double b = slope_(j);
            if (b <= cur_b) continue;
            const double cross = (cur_a - intercept_(j)) / (b - cur_b);
            const double at = cross < s ? s : cross;
            if (at < next || (at == next && pick >= 0 && b > slope_(pick))) {
                next = at;
                pick = j;
            }
        }
        if (pick < 0) break;
        // envelope switches to line `pick` at `next`
        const double value = cur_a + cur_b * next;
        cur_a = value - slope_(pick) * next;
        cur_b = slope_(pick);
        const double t = t0 + next * span;
        if (next > s && t > t0 && t < t1) sink(next, value);
        s = next;
    }
    eta_left_ = cur_a + cur_b;
    eta_ = std::max(eta_left_, g_(phi_value));
}

}  // namespace scc
