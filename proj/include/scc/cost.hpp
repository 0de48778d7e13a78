#pragma once

// Discounted costs: pathwise evaluation, Monte Carlo estimation with a
// truncation tail bound, the rescaled-clock representation, and the
// smoothing convergence and moment diagnostics.

#include "scc/dynamics.hpp"
#include "scc/timechange.hpp"

#include <cstdint>
#include <vector>

namespace scc {

struct PathCost {
    double holding = 0.0;  // int_0^T e^{-gamma t} l(W(t)) dt
    double control = 0.0;  // int_{[0,T]} e^{-gamma t} h . dU(t), including h . U(0) at 0
    double total = 0.0;
};

/// Throws NotAdmissible if U has an increment outside U or W leaves W
/// at a breakpoint (skipped when `check` is false).
PathCost pathwise_cost(const ProblemInstance& inst, const CadlagPath& u, const CadlagPath& w, double t_end,
                       bool check = true);

struct CostEstimate {
    double value = 0.0;
    double std_error = 0.0;
    std::int64_t paths = 0;
    double tail_bound = 0.0;
    std::uint64_t seed = 0;
    double holding = 0.0;
    double holding_se = 0.0;
    double control = 0.0;
    double control_se = 0.0;
    double terminal_moment = 0.0;  // mean |W(T)|^alpha
    double control_rate = 0.0;     // mean h . (U(T) - U(T/2)) / (T/2)
};

struct MonteCarloOptions {
    int threads = 1;
    /// Grid times at which to record |W(t)|^moment_order per path.
    std::vector<double> checkpoints;
    double moment_order = 2.0;
};

struct MonteCarloResult {
    CostEstimate estimate;
    std::vector<PathCost> per_path;
    /// moments[c] = per-path |W(checkpoints[c])|^r
    std::vector<std::vector<double>> moments;
};

/// Averages pathwise costs over grid.paths paths. The reduction runs in path
/// order with compensated sums, so the result does not depend on threads.
MonteCarloResult monte_carlo(const ProblemInstance& inst, const Vector& w, const Policy& policy,
                             const SimGrid& grid, const MonteCarloOptions& opts = {});

CostEstimate monte_carlo_cost(const ProblemInstance& inst, const Vector& w, const Policy& policy,
                              const SimGrid& grid, int threads = 1);

struct RescaledCost {
    double total = 0.0;        // rescaled holding + gamma int e^{-gamma c} h . U^ dc
    double direct = 0.0;       // pathwise_cost total
    double gap_vs_direct = 0.0;
};

/// Evaluates the cost on the stretched clock c = inverse of t + U(t) . u_hat1.
/// U may jump only at 0.
RescaledCost rescaled_cost(const ProblemInstance& inst, const CadlagPath& u, const CadlagPath& w, double t_end);

struct ConvergenceRow {
    int k = 0;
    double cost = 0.0;     // J(w, U_k)
    double error = 0.0;    // |J(w, U_k) - J(w, U)|
    double std_error = 0.0;
    double diff_std_error = 0.0;  // std error of the paired difference
    double sup_eta = 0.0;
    double c2_empirical = 0.0;
    bool bound_holds = true;
};

struct ConvergenceTable {
    double base_cost = 0.0;  // J(w, U)
    double base_std_error = 0.0;
    std::vector<ConvergenceRow> rows;

    /// True when the error column is nonincreasing from some row on, ending below its start.
    [[nodiscard]] bool eventually_decreasing() const;
};

/// Deterministic study for a given (B, U).
ConvergenceTable convergence_study(const ProblemInstance& inst, const Vector& w, const CadlagPath& b,
                                   const CadlagPath& u, const std::vector<int>& ks);

/// Monte Carlo study with common random numbers across k.
ConvergenceTable convergence_study(const ProblemInstance& inst, const Vector& w, const Policy& policy,
                                   const SimGrid& grid, const std::vector<int>& ks, int threads = 1);

struct MomentRow {
    double t = 0.0;
    double value = 0.0;  // e^{-gamma t} mean |W(t)|^r
    double std_error = 0.0;
};

struct MomentTable {
    std::vector<MomentRow> rows;
    bool decreasing = false;
};

/// Checkpoints default to {T/4, T/2, 3T/4, T}; they are snapped to the grid.
MomentTable moment_decay_check(const ProblemInstance& inst, const Vector& w, const Policy& policy,
                               const SimGrid& grid, double r, std::vector<double> checkpoints = {},
                               int threads = 1);

}  // namespace scc
