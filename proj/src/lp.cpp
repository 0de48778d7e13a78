#include "scc/lp.hpp"

#include "scc/error.hpp"

#include <cmath>
#include <limits>
#include <vector>

namespace scc::lp {

namespace {

constexpr double kPivotEps = 1e-11;
constexpr double kInf = std::numeric_limits<double>::infinity();

// Standard form after variable substitution: x_orig = offset + map * y, y >= 0.
struct Substitution {
    Vector offset;
    Matrix map;  // orig x num_std
};

void pivot(Matrix& t, Eigen::Index row, Eigen::Index col) {
    t.row(row) /= t(row, col);
    for (Eigen::Index i = 0; i < t.rows(); ++i) {
        if (i != row && t(i, col) != 0.0) t.row(i) -= t(i, col) * t.row(row);
    }
}

// Minimizes the objective held in the last tableau row. Returns false when
// unbounded. Only columns < allowed_cols may enter.
bool run_simplex(Matrix& t, std::vector<Eigen::Index>& basis, Eigen::Index allowed_cols) {
    const auto m = static_cast<Eigen::Index>(basis.size());
    const Eigen::Index rhs = t.cols() - 1;
    for (int iter = 0; iter < 100000; ++iter) {
        Eigen::Index enter = -1;
        for (Eigen::Index j = 0; j < allowed_cols; ++j) {
            if (t(m, j) < -kPivotEps) {
                enter = j;
                break;
            }
        }
        if (enter < 0) return true;
        Eigen::Index leave = -1;
        double best = kInf;
        for (Eigen::Index i = 0; i < m; ++i) {
            if (t(i, enter) <= kPivotEps) continue;
            const double ratio = t(i, rhs) / t(i, enter);
            if (ratio < best - 1e-13 ||
                (ratio <= best + 1e-13 && leave >= 0 && basis[i] < basis[leave])) {
                best = ratio;
                leave = i;
            }
        }
        if (leave < 0) return false;
        pivot(t, leave, enter);
        basis[leave] = enter;
    }
    throw Error(ErrorKind::LinearProgramFailed, "simplex iteration limit reached");
}

}  // namespace

Problem::Problem(Eigen::Index num_vars)
    : objective(Vector::Zero(num_vars)),
      a_ub(0, num_vars),
      b_ub(0),
      a_eq(0, num_vars),
      b_eq(0),
      lower(Vector::Constant(num_vars, -kInf)),
      upper(Vector::Constant(num_vars, kInf)) {}

Solution maximize(const Problem& p) {
    const Eigen::Index n = p.objective.size();
    if (p.a_ub.cols() != n || p.a_eq.cols() != n || p.b_ub.size() != p.a_ub.rows() ||
        p.b_eq.size() != p.a_eq.rows() || p.lower.size() != n || p.upper.size() != n) {
        throw Error(ErrorKind::DimensionMismatch, "lp: inconsistent problem dimensions");
    }

    // Substitute variables so that every standard variable is nonnegative.
    std::vector<std::pair<Eigen::Index, double>> columns;  // (orig var, sign)
    Vector offset = Vector::Zero(n);
    std::vector<std::pair<Eigen::Index, double>> extra_upper;  // (std col, bound)
    for (Eigen::Index j = 0; j < n; ++j) {
        const bool lo = std::isfinite(p.lower(j));
        const bool hi = std::isfinite(p.upper(j));
        if (lo) {
            offset(j) = p.lower(j);
            columns.emplace_back(j, 1.0);
            if (hi) extra_upper.emplace_back(columns.size() - 1, p.upper(j) - p.lower(j));
        } else if (hi) {
            offset(j) = p.upper(j);
            columns.emplace_back(j, -1.0);
        } else {
            columns.emplace_back(j, 1.0);
            columns.emplace_back(j, -1.0);
        }
    }
    const auto ns = static_cast<Eigen::Index>(columns.size());
    Matrix map = Matrix::Zero(n, ns);
    for (Eigen::Index c = 0; c < ns; ++c) map(columns[c].first, c) = columns[c].second;

    const Eigen::Index n_ub = p.a_ub.rows() + static_cast<Eigen::Index>(extra_upper.size());
    const Eigen::Index n_eq = p.a_eq.rows();
    const Eigen::Index m = n_ub + n_eq;
    const Eigen::Index n_cols = ns + n_ub;  // structural + slacks
    const Eigen::Index n_total = n_cols + m;  // + artificials

    Matrix rows = Matrix::Zero(m, n_cols);
    Vector rhs(m);
    rows.topLeftCorner(p.a_ub.rows(), ns) = p.a_ub * map;
    rhs.head(p.a_ub.rows()) = p.b_ub - p.a_ub * offset;
    for (std::size_t e = 0; e < extra_upper.size(); ++e) {
        const auto r = p.a_ub.rows() + static_cast<Eigen::Index>(e);
        rows(r, extra_upper[e].first) = 1.0;
        rhs(r) = extra_upper[e].second;
    }
    for (Eigen::Index r = 0; r < n_ub; ++r) rows(r, ns + r) = 1.0;
    rows.bottomLeftCorner(n_eq, ns) = p.a_eq * map;
    rhs.tail(n_eq) = p.b_eq - p.a_eq * offset;

    Matrix t = Matrix::Zero(m + 1, n_total + 1);
    for (Eigen::Index r = 0; r < m; ++r) {
        const double sign = rhs(r) < 0.0 ? -1.0 : 1.0;
        t.block(r, 0, 1, n_cols) = sign * rows.row(r);
        t(r, n_cols + r) = 1.0;
        t(r, n_total) = sign * rhs(r);
    }
    std::vector<Eigen::Index> basis(m);
    for (Eigen::Index r = 0; r < m; ++r) basis[r] = n_cols + r;

    // Phase 1: minimize the sum of artificials.
    for (Eigen::Index r = 0; r < m; ++r) {
        t.block(m, 0, 1, n_cols) -= t.block(r, 0, 1, n_cols);
        t(m, n_total) -= t(r, n_total);
    }
    run_simplex(t, basis, n_total);
    const double scale = 1.0 + rhs.cwiseAbs().sum();
    if (-t(m, n_total) > 1e-9 * scale) return Solution{Status::Infeasible, Vector(), 0.0};

    for (Eigen::Index r = 0; r < m; ++r) {
        if (basis[r] < n_cols) continue;
        for (Eigen::Index j = 0; j < n_cols; ++j) {
            if (std::abs(t(r, j)) > 1e-9) {
                pivot(t, r, j);
                basis[r] = j;
                break;
            }
        }
    }

    // Phase 2: minimize -c'x over the structural columns.
    Vector cost = Vector::Zero(n_total);
    cost.head(ns) = -(map.transpose() * p.objective);
    t.row(m).setZero();
    t.block(m, 0, 1, n_total) = cost.transpose();
    for (Eigen::Index r = 0; r < m; ++r) {
        const double cb = cost(basis[r]);
        if (cb != 0.0) t.row(m) -= cb * t.row(r);
    }
    if (!run_simplex(t, basis, n_cols)) return Solution{Status::Unbounded, Vector(), 0.0};

    Vector y = Vector::Zero(n_total);
    for (Eigen::Index r = 0; r < m; ++r) y(basis[r]) = t(r, n_total);
    Solution s;
    s.status = Status::Optimal;
    s.x = offset + map * y.head(ns);
    s.objective = p.objective.dot(s.x);
    return s;
}

}  // namespace scc::lp
