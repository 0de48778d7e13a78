#pragma once

// Brownian control problem data, its admissibility and cost, and the
// reduction to the equivalent workload formulation via M R = G K.

#include "scc/cost.hpp"
#include "scc/dynamics.hpp"

#include <json.hpp>

#include <optional>
#include <string>
#include <vector>

namespace scc {

struct BCPInstance {
    Matrix r;        // m x n
    Matrix k;        // p x n
    Vector q;        // initial queue lengths
    Vector b;        // drift of B~
    Matrix sigma;    // covariance of B~
    double gamma = 1.0;
    Vector h;        // p
    Vector cost;     // linear holding cost coefficients, all > 0
    bool continuous_selection = false;  // asserted by the user, never checked
    Matrix sigma_factor;

    [[nodiscard]] Eigen::Index m() const noexcept { return r.rows(); }
    [[nodiscard]] Eigen::Index n() const noexcept { return r.cols(); }
    [[nodiscard]] Eigen::Index p() const noexcept { return k.rows(); }
};

BCPInstance make_bcp_instance(Matrix r, Matrix k, Vector q, Vector b, Matrix sigma, double gamma, Vector h,
                              Vector cost, bool continuous_selection = false);
BCPInstance bcp_from_json(const nlohmann::json& j);
nlohmann::json to_json(const BCPInstance& inst);

struct WorkloadData {
    Matrix m;         // k x m
    Matrix g;         // k x p
    Eigen::Index k = 0;
    Matrix ker_k;     // n x (n - p), basis of ker K
    Matrix n_basis;   // m x r, basis of R ker K
    bool rational = false;
    double residual = 0.0;  // max |M R - G K|
    std::string provenance;
};

struct ReductionOptions {
    std::optional<Matrix> m;         // user-supplied workload matrix
    bool repair_nonnegative = true;  // sign flips and +-1 recombination of the raw basis
    bool allow_rational = true;      // exact arithmetic when all entries are integers
};

/// Throws RankDeficient when rank K < p, NonnegativeBasisNotFound when no
/// nonnegative basis of the complement of R ker K is found.
WorkloadData workload_reduction(const Matrix& r, const Matrix& k, const ReductionOptions& options = {});
nlohmann::json to_json(const WorkloadData& wd);

struct EwfReport {
    bool pass = true;
    std::vector<std::string> failures;
};

EwfReport validate_ewf_assumptions(const WorkloadData& wd);

struct BcpAdmissibility {
    bool admissible = true;
    std::optional<double> time;
    std::optional<Eigen::Index> index;
    std::string what;  // "monotonicity" or "queue"
};

/// U = K Y nondecreasing from U(0-) = 0 and Q = q + B~ + R Y >= 0 at every breakpoint.
BcpAdmissibility bcp_admissible(const BCPInstance& inst, const CadlagPath& y, const CadlagPath& b,
                                double tol = 1e-10);

/// Queue length process Q = q + B~ + R Y.
CadlagPath queue_process(const BCPInstance& inst, const CadlagPath& y, const CadlagPath& b);

/// Y = R^{-1} L with L the componentwise 1-d regulator of q + B~ (R square).
CadlagPath regulator_control(const BCPInstance& inst, const CadlagPath& b);

struct InducedCost {
    Vector m;              // least-squares solution of M^T m = c
    double residual = 0.0; // |M^T m - c|
    bool fiber_constant = false;
};

InducedCost induced_cost(const BCPInstance& inst, const WorkloadData& wd);

/// EWF instance: W = cone generated by the columns of M, U = R^p_+,
/// b = M b~, Sigma = M Sigma~ M^T, cost l(w) = m . w.
ProblemInstance ewf_instance(const BCPInstance& inst, const WorkloadData& wd);

struct EwfMapping {
    Vector w;
    CadlagPath u;
    CadlagPath w_path;
    CadlagPath b;            // M B~
    double state_residual = 0.0;  // max |W - (w + M B~ + G U)| at breakpoints
};

/// Throws NotAdmissible if Y is not admissible for the BCP.
EwfMapping map_bcp_to_ewf(const BCPInstance& inst, const WorkloadData& wd, const CadlagPath& y,
                          const CadlagPath& b);

struct CostEquivalence {
    double j_bcp = 0.0;
    std::optional<double> j_ewf;
    std::optional<double> gap;
    bool fiber_constant = false;
    std::string note;
};

/// Pathwise BCP cost against the EWF cost of the mapped pair. The EWF side is
/// only evaluated when the holding cost factors through M.
CostEquivalence bcp_cost_and_equivalence(const BCPInstance& inst, const WorkloadData& wd, const CadlagPath& y,
                                         const CadlagPath& b, double t_end);

std::string describe(const WorkloadData& wd, const EwfReport& report);

}  // namespace scc
