#pragma once

// Problem data, Brownian sampling, the state equation W = w + B + G U,
// admissibility, and the built-in control policies.

#include "scc/geometry.hpp"
#include "scc/paths.hpp"
#include "scc/rng.hpp"
#include "scc/running_cost.hpp"

#include <json.hpp>

#include <cstdint>
#include <functional>
#include <optional>
#include <string>

namespace scc {

struct ProblemInstance {
    Matrix g;
    Vector b;
    Matrix sigma;
    PolyCone w_cone = PolyCone::orthant(1);
    PolyCone u_cone = PolyCone::orthant(1);
    double gamma = 1.0;
    Vector h;
    RunningCost cost = RunningCost::linear(Vector::Ones(1));
    StructuralVectors structural;
    Matrix sigma_factor;  // sigma_factor * sigma_factor^T = sigma

    [[nodiscard]] Eigen::Index k() const noexcept { return g.rows(); }
    [[nodiscard]] Eigen::Index p() const noexcept { return g.cols(); }
};

/// Validates the data, factors Sigma and computes structural vectors (unless
/// provided). Throws on the first violated invariant.
ProblemInstance make_instance(Matrix g, Vector b, Matrix sigma, PolyCone w_cone, PolyCone u_cone,
                              double gamma, Vector h, RunningCost cost,
                              std::optional<StructuralVectors> structural = std::nullopt);

ProblemInstance instance_from_json(const nlohmann::json& j);
nlohmann::json to_json(const ProblemInstance& inst);

/// Symmetric factor of a PSD matrix; NotFactorizable below -1e-10.
Matrix psd_factor(const Matrix& sigma);

struct SimGrid {
    double dt = 1e-3;
    double horizon = 1.0;
    std::uint64_t seed = 1;
    std::int64_t paths = 1;

    [[nodiscard]] std::int64_t steps() const;
    /// Throws InvalidArgument unless dt > 0 and horizon / dt is an integer.
    void validate() const;
};

/// Grid skeleton of b t + sigma Z(t) at t_i = i dt. Increments use the
/// counter-based stream keyed by (seed, path_index, step).
CadlagPath sample_brownian(const ProblemInstance& inst, const SimGrid& grid, std::uint64_t path_index);
CadlagPath sample_brownian(const Vector& drift, const Matrix& sigma_factor, const SimGrid& grid,
                           std::uint64_t path_index);

/// Increments of one Brownian path, b dt + sigma sqrt(dt) Z. Step i (1-based)
/// consumes normals (i - 1) k, ..., i k - 1 of the path's stream.
class BrownianSampler {
public:
    BrownianSampler(const ProblemInstance& inst, const SimGrid& grid, std::uint64_t path_index);
    BrownianSampler(const Vector& drift, const Matrix& sigma_factor, const SimGrid& grid, std::uint64_t path_index);
    void increment(std::uint64_t step, Vector& out);

private:
    Vector drift_;
    Matrix scale_;
    Vector z_;
    NormalStream normals_;
};

/// W = w + B + G U on the joint refinement, with W(0-) = w.
CadlagPath state_process(const Vector& w, const CadlagPath& b, const CadlagPath& u, const Matrix& g);

struct AdmissibilityReport {
    bool admissible = true;
    std::optional<double> time;
    std::optional<Eigen::Index> facet;
    std::string what;  // "increment" or "state"
};

/// Checks increments of U in the control cone and W in the state cone at every
/// breakpoint; between breakpoints both are linear, so convexity covers them.
AdmissibilityReport check_admissible(const ProblemInstance& inst, const Vector& w, const CadlagPath& b,
                                     const CadlagPath& u, double tol = 1e-10);

struct ControlledPath {
    CadlagPath u;
    CadlagPath w;
};

/// U = u0 eta, W = psi for (psi, eta) the reflection of w + B.
ControlledPath reflection_policy(const ProblemInstance& inst, const Vector& w, const CadlagPath& b);

/// A jump `jump` (in the control cone) at time s, with reflection on top.
ControlledPath impulse_reflection_policy(const ProblemInstance& inst, const Vector& w, const CadlagPath& b,
                                         double s, const Vector& jump);

struct Policy {
    std::string name;
    std::function<ControlledPath(const ProblemInstance&, const Vector&, const CadlagPath&)> apply;
    /// True for the plain reflection policy, which Monte Carlo evaluates
    /// without materializing paths.
    bool streaming_reflection = false;
};

Policy make_reflection_policy();
Policy make_impulse_reflection_policy(double s, Vector jump);
/// U == 0; admissible only while w + B stays in W.
Policy make_zero_policy();
Policy policy_from_json(const nlohmann::json& j);

struct SmoothedControl {
    CadlagPath u;    // U_k = U^c + U^{k,c} + u0 eta_k
    CadlagPath w;    // W_k
    CadlagPath eta;  // eta_k
    double sup_w = 0.0;    // |W_k|*_T
    double scale = 0.0;    // |w| + |W(T)| + |B|*_T
    double c2 = 0.0;       // bound constant: |W_k|* <= c2 * scale
    double c2_empirical = 0.0;
    bool bound_holds = false;
};

/// Mollifies the jump part of U with window 1/k and reflects what remains.
SmoothedControl smooth_control(const ProblemInstance& inst, const Vector& w, const CadlagPath& b,
                               const CadlagPath& u, int k);

}  // namespace scc
