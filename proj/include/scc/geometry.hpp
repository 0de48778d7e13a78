#pragma once

#include "scc/types.hpp"

#include <optional>
#include <vector>

namespace scc {

/// Closed convex polyhedral cone {x : A x >= 0} with unit-norm facet rows.
///
/// Construction normalizes every row of A and rejects cones whose interior
/// is empty. A cone with no facets is the whole space.
class PolyCone {
public:
    PolyCone(Eigen::Index dim, Matrix facets);
    explicit PolyCone(Matrix facets);

    static PolyCone orthant(Eigen::Index dim);
    /// Cone generated by the columns of `generators` (must span the space).
    static PolyCone from_generators(const Matrix& generators);

    [[nodiscard]] Eigen::Index dim() const noexcept { return dim_; }
    [[nodiscard]] Eigen::Index num_facets() const noexcept { return facets_.rows(); }
    [[nodiscard]] const Matrix& facets() const noexcept { return facets_; }

    [[nodiscard]] bool contains(const Vector& x, double tol = 0.0) const;
    [[nodiscard]] bool is_pointed() const;

private:
    Eigen::Index dim_;
    Matrix facets_;
};

bool cone_contains(const PolyCone& cone, const Vector& x, double tol = 0.0);

/// Unit extreme rays, sorted lexicographically. Pointed cones only.
std::vector<Vector> extreme_rays(const PolyCone& cone);

struct StructuralVectors {
    Vector v0;
    Vector u0;
    Vector u_hat1;
    Vector v_hat1;
    double a0 = 0.0;
};

/// Picks v0 in the joint interior of G U and W, u0 in U with G u0 = v0, and a
/// positive certificate (u_hat1, v_hat1, a0) for the angle condition on the
/// generators of U, W and G U. Throws InfeasibleGeometry when none exists.
StructuralVectors find_structural_vectors(const PolyCone& w_cone, const PolyCone& u_cone,
                                          const Matrix& g);

/// Throws InvalidArgument naming the first violated invariant.
void validate_structural_vectors(const StructuralVectors& sv, const PolyCone& w_cone,
                                 const PolyCone& u_cone, const Matrix& g);

/// g(x) = min{a >= 0 : x + a v0 in W} = max_j ((-A_j x) / (A_j v0))^+.
class Shortfall {
public:
    Shortfall(const PolyCone& w_cone, const Vector& v0);

    [[nodiscard]] double operator()(const Vector& x) const;
    /// Per-facet ratio (-A_j x)/(A_j v0), without the positive part.
    [[nodiscard]] Vector ratios(const Vector& x) const { return -(scaled_ * x); }
    /// Same as ratios(), written into a preallocated vector.
    void ratios_into(const Vector& x, Vector& out) const noexcept {
        for (Eigen::Index j = 0; j < scaled_.rows(); ++j) {
            double acc = 0.0;
            for (Eigen::Index c = 0; c < scaled_.cols(); ++c) acc -= scaled_(j, c) * x(c);
            out(j) = acc;
        }
    }
    /// max_j 1/(A_j v0): Lipschitz constant of g in the Euclidean norm.
    [[nodiscard]] double lipschitz() const noexcept { return lipschitz_; }
    [[nodiscard]] const Vector& direction() const noexcept { return v0_; }
    [[nodiscard]] Eigen::Index dim() const noexcept { return v0_.size(); }

private:
    Matrix scaled_;  // rows A_j / (A_j v0)
    Vector v0_;
    double lipschitz_ = 0.0;
};

double shortfall(const PolyCone& w_cone, const Vector& v0, const Vector& x);

struct AssumptionReport {
    std::optional<double> a1;  // min over unit rays of h . r
    std::optional<double> c_g; // lower bound on |G u| / |u| over U
    bool satisfied = false;
};

/// Checks: (a1 > 0) or (alpha_ell > 0 and c_G > 0). Part (ii) is only needed
/// on the alpha_ell > 0 branch.
AssumptionReport check_assumption_2_2(const PolyCone& u_cone, const Matrix& g, const Vector& h,
                                      double alpha_ell);

/// Minimum Euclidean norm over the convex hull of the columns of `points`
/// (Wolfe's algorithm). Returns the minimizing point.
Vector min_norm_point(const Matrix& points);

Eigen::Index numeric_rank(const Matrix& m, double tol = 1e-10);

}  // namespace scc
