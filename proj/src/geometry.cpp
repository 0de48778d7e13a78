#include "scc/geometry.hpp"

#include "scc/error.hpp"
#include "scc/lp.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <sstream>

namespace scc {

namespace {

constexpr double kUnitTol = 1e-12;

void for_each_combination(int n, int r, const std::function<void(const std::vector<int>&)>& fn) {
    if (r < 0 || r > n) return;
    std::vector<int> idx(r);
    for (int i = 0; i < r; ++i) idx[i] = i;
    while (true) {
        fn(idx);
        int i = r - 1;
        while (i >= 0 && idx[i] == n - r + i) --i;
        if (i < 0) return;
        ++idx[i];
        for (int j = i + 1; j < r; ++j) idx[j] = idx[j - 1] + 1;
    }
}

// 1-dimensional kernel of a (k-1) x k system, or nullopt.
std::optional<Vector> line_kernel(const Matrix& rows) {
    Eigen::FullPivLU<Matrix> lu(rows);
    lu.setThreshold(1e-10);
    if (lu.dimensionOfKernel() != 1) return std::nullopt;
    Vector n = lu.kernel().col(0);
    return Vector(n / n.norm());
}

void push_unique(std::vector<Vector>& out, const Vector& v) {
    for (const auto& u : out) {
        if ((u - v).norm() < 1e-9) return;
    }
    out.push_back(v);
}

bool lex_less(const Vector& a, const Vector& b) {
    for (Eigen::Index i = 0; i < a.size(); ++i) {
        if (a(i) < b(i) - 1e-12) return true;
        if (a(i) > b(i) + 1e-12) return false;
    }
    return false;
}

struct Certificate {
    Vector direction;
    double a = 0.0;
};

// max a s.t. r . d >= a for all unit generators r, |d|_inf <= 1; then rescaled
// so that d is a unit vector.
Certificate angle_certificate(const std::vector<Vector>& generators, Eigen::Index dim) {
    lp::Problem p(dim + 1);
    p.objective(dim) = 1.0;
    p.a_ub = Matrix::Zero(static_cast<Eigen::Index>(generators.size()), dim + 1);
    p.b_ub = Vector::Zero(p.a_ub.rows());
    for (std::size_t i = 0; i < generators.size(); ++i) {
        const auto r = static_cast<Eigen::Index>(i);
        p.a_ub.row(r).head(dim) = -generators[i].transpose();
        p.a_ub(r, dim) = 1.0;
    }
    p.lower.head(dim).setConstant(-1.0);
    p.upper.head(dim).setConstant(1.0);
    p.upper(dim) = 2.0;
    const auto sol = lp::maximize(p);
    if (sol.status != lp::Status::Optimal) {
        throw Error(ErrorKind::LinearProgramFailed, "angle certificate program did not solve");
    }
    Certificate c;
    const Vector d = sol.x.head(dim);
    const double norm = d.norm();
    if (norm <= 0.0 || sol.x(dim) <= 0.0) return c;
    c.direction = d / norm;
    c.a = sol.x(dim) / norm;
    // The LP optimum is exact only up to pivot tolerance; use the realized slack.
    for (const auto& g : generators) c.a = std::min(c.a, g.dot(c.direction));
    return c;
}

}  // namespace

Eigen::Index numeric_rank(const Matrix& m, double tol) {
    if (m.rows() == 0 || m.cols() == 0) return 0;
    Eigen::JacobiSVD<Matrix> svd(m);
    const auto& s = svd.singularValues();
    const double cut = tol * std::max(1.0, s(0));
    return (s.array() > cut).count();
}

PolyCone::PolyCone(Eigen::Index dim, Matrix facets) : dim_(dim), facets_(std::move(facets)) {
    if (dim_ < 1) throw Error(ErrorKind::InvalidArgument, "cone dimension must be positive");
    if (facets_.rows() > 0 && facets_.cols() != dim_) {
        throw Error(ErrorKind::DimensionMismatch, "facet matrix width differs from cone dimension");
    }
    if (facets_.rows() == 0) facets_.resize(0, dim_);
    for (Eigen::Index j = 0; j < facets_.rows(); ++j) {
        const double n = facets_.row(j).norm();
        if (n < 1e-14) throw Error(ErrorKind::InvalidArgument, "zero facet normal");
        facets_.row(j) /= n;
    }
    if (facets_.rows() == 0) return;

    // max s s.t. A x >= s, |x|_inf <= 1, s <= 1.
    lp::Problem p(dim_ + 1);
    p.objective(dim_) = 1.0;
    p.a_ub = Matrix::Zero(facets_.rows(), dim_ + 1);
    p.a_ub.leftCols(dim_) = -facets_;
    p.a_ub.col(dim_).setOnes();
    p.b_ub = Vector::Zero(facets_.rows());
    p.lower.head(dim_).setConstant(-1.0);
    p.upper.head(dim_).setConstant(1.0);
    p.upper(dim_) = 1.0;
    const auto sol = lp::maximize(p);
    if (sol.status != lp::Status::Optimal || sol.objective <= 1e-9) {
        throw Error(ErrorKind::EmptyInterior, "cone has empty interior");
    }
}

PolyCone::PolyCone(Matrix facets) : PolyCone(facets.cols(), facets) {}

PolyCone PolyCone::orthant(Eigen::Index dim) { return PolyCone(dim, Matrix::Identity(dim, dim)); }

PolyCone PolyCone::from_generators(const Matrix& generators) {
    const Eigen::Index k = generators.rows();
    std::vector<Vector> gens;
    for (Eigen::Index i = 0; i < generators.cols(); ++i) {
        const double n = generators.col(i).norm();
        if (n > 1e-14) gens.emplace_back(generators.col(i) / n);
    }
    Matrix stacked(k, static_cast<Eigen::Index>(gens.size()));
    for (std::size_t i = 0; i < gens.size(); ++i) stacked.col(static_cast<Eigen::Index>(i)) = gens[i];
    if (numeric_rank(stacked) < k) {
        throw Error(ErrorKind::EmptyInterior, "generators do not span the space");
    }

    std::vector<Vector> normals;
    auto classify = [&](const Vector& n) {
        double lo = 0.0;
        double hi = 0.0;
        for (const auto& g : gens) {
            const double s = n.dot(g);
            lo = std::min(lo, s);
            hi = std::max(hi, s);
        }
        if (lo >= -1e-10) push_unique(normals, n);
        else if (hi <= 1e-10) push_unique(normals, Vector(-n));
    };
    if (k == 1) {
        classify(Vector::Ones(1));
    } else {
        for_each_combination(static_cast<int>(gens.size()), static_cast<int>(k - 1),
                             [&](const std::vector<int>& idx) {
                                 Matrix rows(k - 1, k);
                                 for (std::size_t r = 0; r < idx.size(); ++r) {
                                     rows.row(static_cast<Eigen::Index>(r)) = gens[idx[r]].transpose();
                                 }
                                 if (auto n = line_kernel(rows)) classify(*n);
                             });
    }
    std::sort(normals.begin(), normals.end(), lex_less);
    Matrix facets(static_cast<Eigen::Index>(normals.size()), k);
    for (std::size_t i = 0; i < normals.size(); ++i) facets.row(static_cast<Eigen::Index>(i)) = normals[i].transpose();
    return PolyCone(k, facets);
}

bool PolyCone::contains(const Vector& x, double tol) const {
    if (x.size() != dim_) throw Error(ErrorKind::DimensionMismatch, "point dimension differs from cone");
    if (tol < 0.0) throw Error(ErrorKind::InvalidArgument, "negative tolerance");
    if (facets_.rows() == 0) return true;
    return ((facets_ * x).array() >= -tol).all();
}

bool PolyCone::is_pointed() const { return numeric_rank(facets_) == dim_; }

bool cone_contains(const PolyCone& cone, const Vector& x, double tol) { return cone.contains(x, tol); }

std::vector<Vector> extreme_rays(const PolyCone& cone) {
    if (!cone.is_pointed()) {
        throw Error(ErrorKind::Unsupported, "extreme rays requested for a non-pointed cone");
    }
    const Eigen::Index k = cone.dim();
    const Matrix& a = cone.facets();
    std::vector<Vector> rays;
    auto consider = [&](const Vector& n) {
        if (cone.contains(n, 1e-10)) push_unique(rays, n);
        else if (cone.contains(-n, 1e-10)) push_unique(rays, Vector(-n));
    };
    if (k == 1) {
        consider(Vector::Ones(1));
    } else {
        for_each_combination(static_cast<int>(a.rows()), static_cast<int>(k - 1),
                             [&](const std::vector<int>& idx) {
                                 Matrix rows(k - 1, k);
                                 for (std::size_t r = 0; r < idx.size(); ++r) {
                                     rows.row(static_cast<Eigen::Index>(r)) = a.row(idx[r]);
                                 }
                                 if (auto n = line_kernel(rows)) consider(*n);
                             });
    }
    std::sort(rays.begin(), rays.end(), lex_less);
    return rays;
}

StructuralVectors find_structural_vectors(const PolyCone& w_cone, const PolyCone& u_cone,
                                          const Matrix& g) {
    const Eigen::Index k = w_cone.dim();
    const Eigen::Index p = u_cone.dim();
    if (g.rows() != k || g.cols() != p) {
        throw Error(ErrorKind::DimensionMismatch, "G must be k x p for W in R^k and U in R^p");
    }
    if (numeric_rank(g) < k) {
        throw Error(ErrorKind::InfeasibleGeometry, "rank(G) < k: G U has empty interior");
    }

    const auto u_rays = extreme_rays(u_cone);
    const auto w_rays = extreme_rays(w_cone);
    Matrix gu(k, static_cast<Eigen::Index>(u_rays.size()));
    for (std::size_t i = 0; i < u_rays.size(); ++i) gu.col(static_cast<Eigen::Index>(i)) = g * u_rays[i];
    const PolyCone gu_cone = PolyCone::from_generators(gu);

    std::vector<Vector> v_gens = w_rays;
    for (Eigen::Index i = 0; i < gu.cols(); ++i) {
        const double n = gu.col(i).norm();
        if (n > 1e-14) v_gens.emplace_back(gu.col(i) / n);
    }
    const auto cert_u = angle_certificate(u_rays, p);
    const auto cert_v = angle_certificate(v_gens, k);
    if (cert_u.a <= 1e-9) throw Error(ErrorKind::InfeasibleGeometry, "no positive angle certificate for U");
    if (cert_v.a <= 1e-9) {
        throw Error(ErrorKind::InfeasibleGeometry, "no positive angle certificate for W and G U");
    }

    // v0: maximize the smallest facet slack over W and G U jointly.
    Matrix joint(w_cone.num_facets() + gu_cone.num_facets(), k);
    joint << w_cone.facets(), gu_cone.facets();
    lp::Problem pv(k + 1);
    pv.objective(k) = 1.0;
    pv.a_ub = Matrix::Zero(joint.rows(), k + 1);
    pv.a_ub.leftCols(k) = -joint;
    pv.a_ub.col(k).setOnes();
    pv.b_ub = Vector::Zero(joint.rows());
    pv.lower.head(k).setConstant(-1.0);
    pv.upper.head(k).setConstant(1.0);
    pv.upper(k) = 1.0;
    const auto sv_sol = lp::maximize(pv);
    if (sv_sol.status != lp::Status::Optimal || sv_sol.objective <= 1e-9) {
        throw Error(ErrorKind::InfeasibleGeometry, "G U and the interior of W do not intersect");
    }
    StructuralVectors sv;
    sv.v0 = sv_sol.x.head(k).normalized();
    sv.u_hat1 = cert_u.direction;
    sv.v_hat1 = cert_v.direction;
    sv.a0 = std::min(cert_u.a, cert_v.a);

    // u0: min u_hat1 . u  s.t.  G u = v0, u in U.
    lp::Problem pu(p);
    pu.objective = -sv.u_hat1;
    pu.a_eq = g;
    pu.b_eq = sv.v0;
    pu.a_ub = -u_cone.facets();
    pu.b_ub = Vector::Zero(u_cone.num_facets());
    const auto u_sol = lp::maximize(pu);
    if (u_sol.status != lp::Status::Optimal) {
        throw Error(ErrorKind::InfeasibleGeometry, "no u0 in U with G u0 = v0");
    }
    sv.u0 = u_sol.x;
    return sv;
}

void validate_structural_vectors(const StructuralVectors& sv, const PolyCone& w_cone,
                                 const PolyCone& u_cone, const Matrix& g) {
    auto fail = [](const std::string& what) { throw Error(ErrorKind::InvalidArgument, what); };
    const Eigen::Index k = w_cone.dim();
    const Eigen::Index p = u_cone.dim();
    if (sv.v0.size() != k || sv.v_hat1.size() != k || sv.u0.size() != p || sv.u_hat1.size() != p) {
        throw Error(ErrorKind::DimensionMismatch, "structural vector dimensions do not match the cones");
    }
    if (std::abs(sv.v0.norm() - 1.0) > 1e-9) fail("v0 is not a unit vector");
    if (std::abs(sv.u_hat1.norm() - 1.0) > 1e-9) fail("u_hat1 is not a unit vector");
    if (std::abs(sv.v_hat1.norm() - 1.0) > 1e-9) fail("v_hat1 is not a unit vector");
    if (!(sv.a0 > 0.0)) fail("a0 must be positive");
    if (w_cone.num_facets() > 0 && (w_cone.facets() * sv.v0).minCoeff() <= 0.0) fail("v0 not interior to W");
    if ((g * sv.u0 - sv.v0).norm() > 1e-10) fail("G u0 != v0");
    if (!u_cone.contains(sv.u0, 1e-10)) fail("u0 not in U");

    const auto u_rays = extreme_rays(u_cone);
    Matrix gu(k, static_cast<Eigen::Index>(u_rays.size()));
    for (std::size_t i = 0; i < u_rays.size(); ++i) gu.col(static_cast<Eigen::Index>(i)) = g * u_rays[i];
    const PolyCone gu_cone = PolyCone::from_generators(gu);
    if (gu_cone.num_facets() > 0 && (gu_cone.facets() * sv.v0).minCoeff() <= 0.0) fail("v0 not interior to G U");

    for (const auto& r : u_rays) {
        if (r.dot(sv.u_hat1) < sv.a0 - 1e-10) fail("angle condition fails on a ray of U");
    }
    for (const auto& r : extreme_rays(w_cone)) {
        if (r.dot(sv.v_hat1) < sv.a0 - 1e-10) fail("angle condition fails on a ray of W");
    }
    for (Eigen::Index i = 0; i < gu.cols(); ++i) {
        const double n = gu.col(i).norm();
        if (n > 1e-14 && gu.col(i).dot(sv.v_hat1) < sv.a0 * n - 1e-10) {
            fail("angle condition fails on a generator of G U");
        }
    }
}

Shortfall::Shortfall(const PolyCone& w_cone, const Vector& v0) : v0_(v0) {
    if (v0.size() != w_cone.dim()) throw Error(ErrorKind::DimensionMismatch, "v0 dimension differs from W");
    const Matrix& a = w_cone.facets();
    scaled_ = a;
    for (Eigen::Index j = 0; j < a.rows(); ++j) {
        const double d = a.row(j).dot(v0);
        if (!(d > 0.0)) {
            std::ostringstream os;
            os << "reflection direction is not interior: A_" << j << " . v0 = " << d;
            throw Error(ErrorKind::DirectionNotInterior, os.str());
        }
        scaled_.row(j) /= d;
        lipschitz_ = std::max(lipschitz_, 1.0 / d);
    }
}

double Shortfall::operator()(const Vector& x) const {
    double m = 0.0;
    for (Eigen::Index j = 0; j < scaled_.rows(); ++j) {
        double acc = 0.0;
        for (Eigen::Index c = 0; c < scaled_.cols(); ++c) acc -= scaled_(j, c) * x(c);
        m = std::max(m, acc);
    }
    return m;
}

double shortfall(const PolyCone& w_cone, const Vector& v0, const Vector& x) {
    if (x.size() != w_cone.dim()) throw Error(ErrorKind::DimensionMismatch, "point dimension differs from W");
    return Shortfall(w_cone, v0)(x);
}

Vector min_norm_point(const Matrix& points) {
    const Eigen::Index n = points.cols();
    if (n == 0) throw Error(ErrorKind::InvalidArgument, "min_norm_point needs at least one point");
    const Vector sq = points.colwise().squaredNorm().transpose();
    const double scale = std::max(sq.maxCoeff(), 1e-300);
    Eigen::Index first = 0;
    sq.minCoeff(&first);
    std::vector<Eigen::Index> active{first};
    Vector lambda = Vector::Ones(1);
    Vector x = points.col(first);

    auto active_points = [&]() {
        Matrix s(points.rows(), static_cast<Eigen::Index>(active.size()));
        for (std::size_t i = 0; i < active.size(); ++i) s.col(static_cast<Eigen::Index>(i)) = points.col(active[i]);
        return s;
    };

    for (int major = 0; major < 10000; ++major) {
        Eigen::Index j = 0;
        (points.transpose() * x).minCoeff(&j);
        if (x.dot(points.col(j)) > x.squaredNorm() - 1e-13 * scale) break;
        if (std::find(active.begin(), active.end(), j) != active.end()) break;
        active.push_back(j);
        lambda.conservativeResize(lambda.size() + 1);
        lambda(lambda.size() - 1) = 0.0;

        for (int minor = 0; minor < 10000; ++minor) {
            const Matrix s = active_points();
            const Eigen::Index m = s.cols();
            Matrix kkt = Matrix::Zero(m + 1, m + 1);
            kkt.topLeftCorner(m, m) = s.transpose() * s;
            kkt.block(0, m, m, 1).setOnes();
            kkt.block(m, 0, 1, m).setOnes();
            Vector rhs = Vector::Zero(m + 1);
            rhs(m) = 1.0;
            const Vector mu = kkt.completeOrthogonalDecomposition().solve(rhs).head(m);
            if (mu.minCoeff() > 1e-14) {
                lambda = mu;
                break;
            }
            double theta = 1.0;
            for (Eigen::Index i = 0; i < m; ++i) {
                if (mu(i) <= 1e-14 && lambda(i) - mu(i) > 0.0) {
                    theta = std::min(theta, lambda(i) / (lambda(i) - mu(i)));
                }
            }
            lambda = lambda + theta * (mu - lambda);
            std::vector<Eigen::Index> kept;
            std::vector<double> kept_lambda;
            for (Eigen::Index i = 0; i < m; ++i) {
                if (lambda(i) > 1e-14) {
                    kept.push_back(active[static_cast<std::size_t>(i)]);
                    kept_lambda.push_back(lambda(i));
                }
            }
            if (kept.empty()) {
                Eigen::Index best = 0;
                lambda.maxCoeff(&best);
                kept.push_back(active[static_cast<std::size_t>(best)]);
                kept_lambda.push_back(1.0);
            }
            active = kept;
            lambda = Eigen::Map<Vector>(kept_lambda.data(), static_cast<Eigen::Index>(kept_lambda.size()));
            lambda /= lambda.sum();
        }
        x = active_points() * lambda;
    }
    return x;
}

AssumptionReport check_assumption_2_2(const PolyCone& u_cone, const Matrix& g, const Vector& h,
                                      double alpha_ell) {
    if (g.cols() != u_cone.dim() || h.size() != u_cone.dim()) {
        throw Error(ErrorKind::DimensionMismatch, "G and h must act on the control space");
    }
    const auto rays = extreme_rays(u_cone);
    AssumptionReport rep;
    double a1 = std::numeric_limits<double>::infinity();
    Matrix images(g.rows(), static_cast<Eigen::Index>(rays.size()));
    for (std::size_t i = 0; i < rays.size(); ++i) {
        a1 = std::min(a1, h.dot(rays[i]));
        images.col(static_cast<Eigen::Index>(i)) = g * rays[i];
    }
    rep.a1 = a1;
    rep.c_g = min_norm_point(images).norm();
    const bool cost_branch = a1 > kUnitTol;
    const bool growth_branch = alpha_ell > 0.0 && *rep.c_g > kUnitTol;
    rep.satisfied = cost_branch || growth_branch;
    return rep;
}

}  // namespace scc
