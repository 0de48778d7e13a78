#pragma once

// Right-continuous paths with left limits on a finite set of breakpoints.
//
// Between consecutive breakpoints t_{i-1} < t_i a path moves linearly from
// value(t_{i-1}) to left(t_i); a jump sits at t_i whenever left(t_i) differs
// from value(t_i). left(t_0) is the value at 0-, which is 0 for controls.

#include "scc/geometry.hpp"
#include "scc/types.hpp"

#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

namespace scc {

class CadlagPath {
public:
    CadlagPath() = default;
    CadlagPath(std::vector<double> times, Matrix left, Matrix values);

    /// Path without jumps (including at 0): left == values.
    static CadlagPath continuous(std::vector<double> times, Matrix values);
    static CadlagPath constant(const Vector& v, double horizon);
    /// Single jump of size `jump` at time s (s = 0 gives an initial jump from 0-).
    static CadlagPath step(const Vector& jump, double s, double horizon);

    [[nodiscard]] Eigen::Index dim() const noexcept { return values_.rows(); }
    [[nodiscard]] std::size_t size() const noexcept { return times_.size(); }
    [[nodiscard]] double horizon() const noexcept { return times_.back(); }
    [[nodiscard]] const std::vector<double>& times() const noexcept { return times_; }
    [[nodiscard]] double time(std::size_t i) const { return times_[i]; }
    [[nodiscard]] const Matrix& values() const noexcept { return values_; }
    [[nodiscard]] const Matrix& lefts() const noexcept { return left_; }
    [[nodiscard]] auto value(std::size_t i) const { return values_.col(static_cast<Eigen::Index>(i)); }
    [[nodiscard]] auto left(std::size_t i) const { return left_.col(static_cast<Eigen::Index>(i)); }
    [[nodiscard]] Vector jump(std::size_t i) const { return value(i) - left(i); }

    /// Right-continuous evaluation, 0 <= t <= horizon.
    [[nodiscard]] Vector at(double t) const;
    [[nodiscard]] Vector left_limit(double t) const;
    /// Scalar shortcuts for one-dimensional paths.
    [[nodiscard]] double scalar_at(double t) const { return at(t)(0); }

    /// Largest jump norm over t > 0 (the jump at 0 is excluded).
    [[nodiscard]] double max_jump() const;
    [[nodiscard]] bool is_continuous(double tol = 1e-12) const;

private:
    [[nodiscard]] std::size_t locate(double t) const;

    std::vector<double> times_;
    Matrix left_;
    Matrix values_;
};

struct Decomposition {
    CadlagPath continuous_part;
    CadlagPath jump_part;
};

/// Sorted union of breakpoint times (paths must share a horizon).
std::vector<double> refine_times(const CadlagPath& a, const CadlagPath& b);
/// Re-express `p` on a superset of its breakpoints.
CadlagPath resample(const CadlagPath& p, const std::vector<double>& times);
/// Restriction to [0, t_end], inserting t_end as a breakpoint if needed.
CadlagPath truncate(const CadlagPath& p, double t_end);

struct LinearTerm {
    Matrix coefficient;  // result_dim x path.dim()
    const CadlagPath* path;
};
/// offset + sum_i coefficient_i * path_i on the joint refinement.
CadlagPath linear_combination(const Vector& offset, const std::vector<LinearTerm>& terms);

CadlagPath operator+(const CadlagPath& a, const CadlagPath& b);
CadlagPath operator-(const CadlagPath& a, const CadlagPath& b);
CadlagPath apply(const Matrix& m, const CadlagPath& p);
CadlagPath shift(const CadlagPath& p, const Vector& offset);
/// Scalar path t -> p(t) . v.
CadlagPath dot(const CadlagPath& p, const Vector& v);

bool increments_in_cone(const CadlagPath& path, const PolyCone& cone, double tol = 0.0);
Decomposition decompose_jumps(const CadlagPath& u);
/// k int_{(t-1/k)^+}^t Ud(s) ds + k (1/k - t)^+ Ud(0), exact for piecewise constant Ud.
CadlagPath mollify(const CadlagPath& ud, int k);

/// int_{[0,T]} f dF for scalar paths, F nondecreasing; the mass at 0 is f(0) F(0).
double stieltjes_integral(const CadlagPath& f, const CadlagPath& big_f, double t_end);
/// Same with a callable integrand; continuous pieces use 8-point Gauss-Legendre.
double stieltjes_integral(const std::function<double(double)>& f, const CadlagPath& big_f,
                          double t_end);
/// int_{[0,T]} e^{-gamma t} dF(t), exact.
double discounted_stieltjes(double gamma, const CadlagPath& big_f, double t_end);
/// int_0^T e^{-gamma t} f(t) dt for a scalar path, exact per segment.
double discounted_integral(double gamma, const CadlagPath& f, double t_end);

double sup_norm(const CadlagPath& p, double t_end);

/// int_0^1 u^m e^{-x u} du for m in {0,1,2}, stable near x = 0.
double exp_moment(int m, double x);

nlohmann::json to_json(const CadlagPath& p);
CadlagPath path_from_json(const nlohmann::json& j);
void write_csv(std::ostream& os, const CadlagPath& p);

}  // namespace scc
