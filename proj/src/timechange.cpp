#include "scc/timechange.hpp"

#include "scc/error.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace scc {

namespace {

void require_clock(const CadlagPath& a, const char* what) {
    if (a.dim() != 1) throw Error(ErrorKind::DimensionMismatch, std::string(what) + " must be scalar");
    const double tol = 1e-12 * (1.0 + a.values().cwiseAbs().maxCoeff());
    if (a.value(0)(0) < -tol) throw Error(ErrorKind::InvalidArgument, std::string(what) + " starts below 0");
    for (std::size_t i = 1; i < a.size(); ++i) {
        if (a.left(i)(0) < a.value(i - 1)(0) - tol || a.value(i)(0) < a.left(i)(0) - tol) {
            std::ostringstream os;
            os << what << " decreases near t = " << a.time(i);
            throw Error(ErrorKind::InvalidArgument, os.str());
        }
    }
}

}  // namespace

TimeChange stretch(const CadlagPath& u, const Vector& u_hat1) {
    if (u.dim() != u_hat1.size()) throw Error(ErrorKind::DimensionMismatch, "u_hat1 dimension differs from U");
    if (!u.is_continuous(1e-12)) throw Error(ErrorKind::InvalidPath, "stretch needs a control without jumps");
    const CadlagPath proj = dot(u, u_hat1);
    Matrix left(1, static_cast<Eigen::Index>(u.size()));
    Matrix values(1, static_cast<Eigen::Index>(u.size()));
    const double tol = 1e-12 * (1.0 + proj.values().cwiseAbs().maxCoeff());
    for (std::size_t i = 0; i < u.size(); ++i) {
        const auto c = static_cast<Eigen::Index>(i);
        if (i > 0 && proj.left(i)(0) < proj.value(i - 1)(0) - tol) {
            std::ostringstream os;
            os << "U . u_hat1 decreases near t = " << u.time(i);
            throw Error(ErrorKind::InvalidPath, os.str());
        }
        values(0, c) = u.time(i) + proj.value(i)(0);
        left(0, c) = u.time(i) + proj.left(i)(0);
    }
    left(0, 0) = 0.0;
    CadlagPath forward(u.times(), left, values);
    CadlagPath inverse = right_inverse(forward);
    return {std::move(forward), std::move(inverse)};
}

CadlagPath right_inverse(const CadlagPath& a) {
    require_clock(a, "clock");
    // vertices (x, y) = (a, s) of the completed graph, in order
    std::vector<std::pair<double, double>> pts;
    pts.reserve(2 * a.size() + 1);
    if (a.value(0)(0) > 0.0) pts.emplace_back(0.0, 0.0);
    pts.emplace_back(a.value(0)(0), 0.0);
    for (std::size_t i = 1; i < a.size(); ++i) {
        pts.emplace_back(a.left(i)(0), a.time(i));
        if (a.value(i)(0) != a.left(i)(0)) pts.emplace_back(a.value(i)(0), a.time(i));
    }
    const double horizon = pts.back().first;
    if (!(horizon > 0.0)) throw Error(ErrorKind::InvalidArgument, "clock never leaves 0");

    std::vector<double> times;
    std::vector<double> lefts;
    std::vector<double> values;
    std::size_t j = 0;
    while (j < pts.size()) {
        // group of vertices sharing x (up to rounding that keeps x monotone)
        const double x = pts[j].first;
        const double lo = pts[j].second;
        double hi = lo;
        std::size_t k = j + 1;
        while (k < pts.size() && pts[k].first <= x) hi = pts[k++].second;
        if (times.empty() || x > times.back()) {
            times.push_back(x);
            lefts.push_back(lo);
            values.push_back(hi);
        } else {
            values.back() = hi;
        }
        j = k;
    }
    if (times.front() != 0.0) throw Error(ErrorKind::InvalidPath, "clock inverse does not start at 0");
    if (times.size() < 2) throw Error(ErrorKind::InvalidArgument, "clock never leaves 0");
    values.back() = a.horizon();
    lefts.front() = 0.0;

    const auto n = static_cast<Eigen::Index>(times.size());
    Matrix l(1, n);
    Matrix v(1, n);
    for (Eigen::Index c = 0; c < n; ++c) {
        l(0, c) = lefts[static_cast<std::size_t>(c)];
        v(0, c) = values[static_cast<std::size_t>(c)];
    }
    return CadlagPath(std::move(times), std::move(l), std::move(v));
}

CadlagPath rescale_path(const CadlagPath& x, const CadlagPath& clock) {
    if (clock.dim() != 1) throw Error(ErrorKind::DimensionMismatch, "clock must be scalar");
    const double top = clock.values().maxCoeff();
    if (top > x.horizon() * (1.0 + 1e-12) + 1e-12) {
        std::ostringstream os;
        os << "clock reaches " << top << " beyond the path horizon " << x.horizon();
        throw Error(ErrorKind::HorizonExhausted, os.str());
    }
    if (clock.values().minCoeff() < 0.0) throw Error(ErrorKind::InvalidArgument, "clock takes negative values");

    const auto& xt = x.times();
    std::vector<double> times;
    std::vector<Vector> lefts;
    std::vector<Vector> values;
    times.reserve(clock.size() + x.size());

    times.push_back(0.0);
    const double c0 = clock.value(0)(0);
    lefts.push_back(c0 == 0.0 ? Vector(x.left(0)) : x.at(c0));
    values.push_back(x.at(c0));

    for (std::size_t i = 1; i < clock.size(); ++i) {
        const double t0 = clock.time(i - 1);
        const double t1 = clock.time(i);
        const double ca = clock.value(i - 1)(0);
        const double cb = clock.left(i)(0);
        if (cb < ca) throw Error(ErrorKind::InvalidArgument, "clock decreases");
        if (cb > ca) {
            auto it = std::upper_bound(xt.begin(), xt.end(), ca);
            for (; it != xt.end() && *it < cb; ++it) {
                const double t = t0 + (*it - ca) / (cb - ca) * (t1 - t0);
                if (!(t > times.back()) || !(t < t1)) continue;
                times.push_back(t);
                lefts.push_back(x.left_limit(*it));
                values.push_back(x.at(*it));
            }
            lefts.push_back(x.left_limit(std::min(cb, x.horizon())));
        } else {
            lefts.push_back(x.at(cb));
        }
        times.push_back(t1);
        values.push_back(x.at(std::min(clock.value(i)(0), x.horizon())));
    }

    const auto n = static_cast<Eigen::Index>(times.size());
    Matrix l(x.dim(), n);
    Matrix v(x.dim(), n);
    for (Eigen::Index c = 0; c < n; ++c) {
        l.col(c) = lefts[static_cast<std::size_t>(c)];
        v.col(c) = values[static_cast<std::size_t>(c)];
    }
    return CadlagPath(std::move(times), std::move(l), std::move(v));
}

CovIdentity cov_identity_check(const CadlagPath& f, const CadlagPath& a,
                               const std::optional<CadlagPath>& big_f) {
    if (f.dim() != 1) throw Error(ErrorKind::DimensionMismatch, "integrand must be scalar");
    require_clock(a, "clock");
    if (std::abs(a.value(0)(0)) > 0.0) throw Error(ErrorKind::InvalidArgument, "clock must satisfy a(0) = 0");
    if (f.values().minCoeff() < 0.0 || f.lefts().minCoeff() < 0.0) {
        throw Error(ErrorKind::InvalidArgument, "integrand must be nonnegative");
    }
    const double end = a.values().maxCoeff();
    const CadlagPath big = big_f ? truncate(*big_f, end)
                                 : CadlagPath::continuous({0.0, end}, (Matrix(1, 2) << 0.0, end).finished());
    require_clock(big, "integrator");

    CovIdentity out;
    const CadlagPath composed = big_f ? rescale_path(big, a) : a;
    out.lhs = stieltjes_integral(f, composed, a.horizon());

    const CadlagPath c = right_inverse(a);
    const CadlagPath fc = rescale_path(f, c);
    const auto times = refine_times(fc, big);
    const CadlagPath fr = resample(fc, times);
    const CadlagPath br = resample(big, times);
    double rhs = f.value(0)(0) * br.value(0)(0);
    for (std::size_t i = 1; i < times.size(); ++i) {
        const double rise = br.left(i)(0) - br.value(i - 1)(0);
        rhs += 0.5 * (fr.value(i - 1)(0) + fr.left(i)(0)) * rise;
        const double jump = br.value(i)(0) - br.left(i)(0);
        if (jump != 0.0) rhs += f.scalar_at(std::min(c.left_limit(times[i])(0), f.horizon())) * jump;
    }
    out.rhs = rhs;
    out.gap = std::abs(out.lhs - out.rhs);
    return out;
}

}  // namespace scc
