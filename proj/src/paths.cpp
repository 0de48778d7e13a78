#include "scc/paths.hpp"

#include "scc/error.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <ostream>
#include <sstream>

namespace scc {

namespace {

constexpr double kTimeSlack = 1e-12;

void require_scalar(const CadlagPath& p, const char* what) {
    if (p.dim() != 1) {
        throw Error(ErrorKind::DimensionMismatch, std::string(what) + " must be a scalar path");
    }
}

void require_nondecreasing(const CadlagPath& f) {
    const double scale = 1.0 + f.values().cwiseAbs().maxCoeff();
    const double tol = 1e-12 * scale;
    for (std::size_t i = 1; i < f.size(); ++i) {
        if (f.left(i)(0) < f.value(i - 1)(0) - tol || f.value(i)(0) < f.left(i)(0) - tol) {
            std::ostringstream os;
            os << "integrator decreases near t = " << f.time(i);
            throw Error(ErrorKind::InvalidArgument, os.str());
        }
    }
}

// Gauss-Legendre nodes/weights on [-1, 1].
constexpr std::array<double, 8> kGlNodes = {
    -0.9602898564975363, -0.7966664774136267, -0.5255324099163290, -0.1834346424956498,
    0.1834346424956498,  0.5255324099163290,  0.7966664774136267,  0.9602898564975363};
constexpr std::array<double, 8> kGlWeights = {
    0.1012285362903763, 0.2223810344533745, 0.3137066458778873, 0.3626837833783620,
    0.3626837833783620, 0.3137066458778873, 0.2223810344533745, 0.1012285362903763};

}  // namespace

CadlagPath::CadlagPath(std::vector<double> times, Matrix left, Matrix values)
    : times_(std::move(times)), left_(std::move(left)), values_(std::move(values)) {
    if (times_.size() < 2) throw Error(ErrorKind::InvalidPath, "a path needs at least two breakpoints");
    if (times_.front() != 0.0) throw Error(ErrorKind::InvalidPath, "paths start at t = 0");
    for (std::size_t i = 1; i < times_.size(); ++i) {
        if (!(times_[i] > times_[i - 1])) {
            throw Error(ErrorKind::InvalidPath, "breakpoint times must be strictly increasing");
        }
    }
    const auto n = static_cast<Eigen::Index>(times_.size());
    if (left_.cols() != n || values_.cols() != n || left_.rows() != values_.rows() || values_.rows() < 1) {
        throw Error(ErrorKind::DimensionMismatch, "left/value matrices must be dim x breakpoints");
    }
}

CadlagPath CadlagPath::continuous(std::vector<double> times, Matrix values) {
    Matrix left = values;
    return CadlagPath(std::move(times), std::move(left), std::move(values));
}

CadlagPath CadlagPath::constant(const Vector& v, double horizon) {
    Matrix m(v.size(), 2);
    m.col(0) = v;
    m.col(1) = v;
    return continuous({0.0, horizon}, m);
}

CadlagPath CadlagPath::step(const Vector& jump, double s, double horizon) {
    const Eigen::Index d = jump.size();
    if (s < 0.0 || s > horizon) throw Error(ErrorKind::InvalidArgument, "step time outside horizon");
    if (s == 0.0) {
        Matrix left = Matrix::Zero(d, 2);
        Matrix values(d, 2);
        values.col(0) = jump;
        values.col(1) = jump;
        left.col(1) = jump;
        return CadlagPath({0.0, horizon}, left, values);
    }
    if (s == horizon) {
        Matrix left = Matrix::Zero(d, 2);
        Matrix values = Matrix::Zero(d, 2);
        values.col(1) = jump;
        return CadlagPath({0.0, horizon}, left, values);
    }
    Matrix left = Matrix::Zero(d, 3);
    Matrix values = Matrix::Zero(d, 3);
    values.col(1) = jump;
    values.col(2) = jump;
    left.col(2) = jump;
    return CadlagPath({0.0, s, horizon}, left, values);
}

std::size_t CadlagPath::locate(double t) const {
    if (!(t >= 0.0)) {
        std::ostringstream os;
        os << "negative or NaN time " << t;
        throw Error(ErrorKind::InvalidArgument, os.str());
    }
    if (t > horizon() * (1.0 + kTimeSlack) + kTimeSlack) {
        std::ostringstream os;
        os << "time " << t << " beyond horizon " << horizon();
        throw Error(ErrorKind::HorizonExhausted, os.str());
    }
    // index of the last breakpoint <= t
    auto it = std::upper_bound(times_.begin(), times_.end(), t);
    return static_cast<std::size_t>(std::distance(times_.begin(), it)) - 1;
}

Vector CadlagPath::at(double t) const {
    const std::size_t i = locate(t);
    if (times_[i] == t || i + 1 == times_.size()) return value(i);
    const double w = (t - times_[i]) / (times_[i + 1] - times_[i]);
    return (1.0 - w) * value(i) + w * left(i + 1);
}

Vector CadlagPath::left_limit(double t) const {
    const std::size_t i = locate(t);
    if (times_[i] == t) return left(i);
    if (i + 1 == times_.size()) return value(i);
    const double w = (t - times_[i]) / (times_[i + 1] - times_[i]);
    return (1.0 - w) * value(i) + w * left(i + 1);
}

double CadlagPath::max_jump() const {
    double m = 0.0;
    for (std::size_t i = 1; i < size(); ++i) m = std::max(m, (value(i) - left(i)).norm());
    return m;
}

bool CadlagPath::is_continuous(double tol) const {
    const double scale = 1.0 + values_.cwiseAbs().maxCoeff();
    return max_jump() <= tol * scale;
}

std::vector<double> refine_times(const CadlagPath& a, const CadlagPath& b) {
    const double ta = a.horizon();
    const double tb = b.horizon();
    if (std::abs(ta - tb) > kTimeSlack * std::max(1.0, ta)) {
        throw Error(ErrorKind::DimensionMismatch, "paths have different horizons");
    }
    if (a.times() == b.times()) return a.times();
    std::vector<double> out;
    out.reserve(a.size() + b.size());
    std::set_union(a.times().begin(), a.times().end(), b.times().begin(), b.times().end(),
                   std::back_inserter(out));
    // near-identical horizons collapse onto the first path's horizon
    while (out.size() >= 2 && out.back() > ta && out.back() - ta <= kTimeSlack * std::max(1.0, ta)) out.pop_back();
    if (out.back() != ta) out.push_back(ta);
    return out;
}

CadlagPath resample(const CadlagPath& p, const std::vector<double>& times) {
    if (times == p.times()) return p;
    const auto n = static_cast<Eigen::Index>(times.size());
    Matrix left(p.dim(), n);
    Matrix values(p.dim(), n);
    std::size_t j = 0;  // current segment start in p
    const auto& pt = p.times();
    for (Eigen::Index i = 0; i < n; ++i) {
        const double t = times[static_cast<std::size_t>(i)];
        while (j + 1 < pt.size() && pt[j + 1] <= t) ++j;
        if (pt[j] == t) {
            left.col(i) = p.left(j);
            values.col(i) = p.value(j);
        } else if (j + 1 < pt.size()) {
            const double w = (t - pt[j]) / (pt[j + 1] - pt[j]);
            values.col(i) = (1.0 - w) * p.value(j) + w * p.left(j + 1);
            left.col(i) = values.col(i);
        } else {
            values.col(i) = p.value(j);
            left.col(i) = values.col(i);
        }
    }
    return CadlagPath(times, std::move(left), std::move(values));
}

CadlagPath truncate(const CadlagPath& p, double t_end) {
    if (!(t_end > 0.0) || t_end > p.horizon() * (1.0 + kTimeSlack)) {
        throw Error(ErrorKind::InvalidArgument, "truncation time outside (0, horizon]");
    }
    if (t_end >= p.horizon()) return p;
    std::vector<double> times;
    for (double t : p.times()) {
        if (t < t_end) times.push_back(t);
    }
    times.push_back(t_end);
    const auto n = static_cast<Eigen::Index>(times.size());
    Matrix left(p.dim(), n);
    Matrix values(p.dim(), n);
    for (Eigen::Index i = 0; i + 1 < n; ++i) {
        left.col(i) = p.left(static_cast<std::size_t>(i));
        values.col(i) = p.value(static_cast<std::size_t>(i));
    }
    left.col(n - 1) = p.left_limit(t_end);
    values.col(n - 1) = p.at(t_end);
    return CadlagPath(std::move(times), std::move(left), std::move(values));
}

CadlagPath linear_combination(const Vector& offset, const std::vector<LinearTerm>& terms) {
    if (terms.empty()) throw Error(ErrorKind::InvalidArgument, "linear_combination needs a path");
    std::vector<double> times = terms.front().path->times();
    for (std::size_t i = 1; i < terms.size(); ++i) {
        if (terms[i].path->times() != times) {
            CadlagPath probe = CadlagPath::constant(Vector::Zero(1), times.back());
            probe = resample(probe, times);
            times = refine_times(probe, *terms[i].path);
        }
    }
    const Eigen::Index d = offset.size();
    const auto n = static_cast<Eigen::Index>(times.size());
    Matrix left = offset.replicate(1, n);
    Matrix values = left;
    for (const auto& term : terms) {
        if (term.coefficient.rows() != d || term.coefficient.cols() != term.path->dim()) {
            throw Error(ErrorKind::DimensionMismatch, "coefficient shape does not match path/offset");
        }
        const CadlagPath r = resample(*term.path, times);
        left.noalias() += term.coefficient * r.lefts();
        values.noalias() += term.coefficient * r.values();
    }
    return CadlagPath(std::move(times), std::move(left), std::move(values));
}

CadlagPath operator+(const CadlagPath& a, const CadlagPath& b) {
    if (a.dim() != b.dim()) throw Error(ErrorKind::DimensionMismatch, "path dimensions differ");
    const Matrix id = Matrix::Identity(a.dim(), a.dim());
    return linear_combination(Vector::Zero(a.dim()), {{id, &a}, {id, &b}});
}

CadlagPath operator-(const CadlagPath& a, const CadlagPath& b) {
    if (a.dim() != b.dim()) throw Error(ErrorKind::DimensionMismatch, "path dimensions differ");
    const Matrix id = Matrix::Identity(a.dim(), a.dim());
    return linear_combination(Vector::Zero(a.dim()), {{id, &a}, {Matrix(-id), &b}});
}

CadlagPath apply(const Matrix& m, const CadlagPath& p) {
    if (m.cols() != p.dim()) throw Error(ErrorKind::DimensionMismatch, "matrix width differs from path dim");
    return CadlagPath(p.times(), m * p.lefts(), m * p.values());
}

CadlagPath shift(const CadlagPath& p, const Vector& offset) {
    if (offset.size() != p.dim()) throw Error(ErrorKind::DimensionMismatch, "offset dimension differs");
    Matrix left = p.lefts().colwise() + offset;
    Matrix values = p.values().colwise() + offset;
    return CadlagPath(p.times(), std::move(left), std::move(values));
}

CadlagPath dot(const CadlagPath& p, const Vector& v) {
    if (v.size() != p.dim()) throw Error(ErrorKind::DimensionMismatch, "vector dimension differs from path");
    return apply(v.transpose(), p);
}

bool increments_in_cone(const CadlagPath& path, const PolyCone& cone, double tol) {
    if (path.dim() != cone.dim()) throw Error(ErrorKind::DimensionMismatch, "path and cone dimensions differ");
    if (!cone.contains(path.value(0), tol)) return false;
    for (std::size_t i = 1; i < path.size(); ++i) {
        if (!cone.contains(path.left(i) - path.value(i - 1), tol)) return false;
        if (!cone.contains(path.value(i) - path.left(i), tol)) return false;
    }
    return true;
}

Decomposition decompose_jumps(const CadlagPath& u) {
    const auto n = static_cast<Eigen::Index>(u.size());
    Matrix j_left(u.dim(), n);
    Matrix j_values(u.dim(), n);
    Vector running = Vector::Zero(u.dim());
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto idx = static_cast<std::size_t>(i);
        j_left.col(i) = running;
        running += u.value(idx) - u.left(idx);
        j_values.col(i) = running;
    }
    // the jump part starts from 0 at 0-, so the initial jump lands in it
    j_left.col(0).setZero();
    Matrix c_left = u.lefts() - j_left;
    Matrix c_values = u.values() - j_values;
    c_left.col(0) = u.left(0);
    c_values.col(0) = u.left(0);
    return {CadlagPath(u.times(), std::move(c_left), std::move(c_values)),
            CadlagPath(u.times(), std::move(j_left), std::move(j_values))};
}

CadlagPath mollify(const CadlagPath& ud, int k) {
    if (k < 1) throw Error(ErrorKind::InvalidArgument, "mollifier index k must be >= 1");
    const double scale = 1.0 + ud.values().cwiseAbs().maxCoeff();
    for (std::size_t i = 1; i < ud.size(); ++i) {
        if ((ud.left(i) - ud.value(i - 1)).cwiseAbs().maxCoeff() > 1e-12 * scale) {
            throw Error(ErrorKind::InvalidPath, "mollify expects a piecewise constant (pure jump) path");
        }
    }
    const double width = 1.0 / static_cast<double>(k);
    const double horizon = ud.horizon();
    const auto& ut = ud.times();

    // cumulative integral at breakpoints
    std::vector<Vector> cumulative(ut.size(), Vector::Zero(ud.dim()));
    for (std::size_t i = 1; i < ut.size(); ++i) {
        cumulative[i] = cumulative[i - 1] + ud.value(i - 1) * (ut[i] - ut[i - 1]);
    }
    auto integral_to = [&](double t) -> Vector {
        auto it = std::upper_bound(ut.begin(), ut.end(), t);
        const auto i = static_cast<std::size_t>(std::distance(ut.begin(), it)) - 1;
        return cumulative[i] + ud.value(i) * (t - ut[i]);
    };

    std::vector<double> times = ut;
    for (double t : ut) {
        if (t + width < horizon) times.push_back(t + width);
    }
    std::sort(times.begin(), times.end());
    times.erase(std::unique(times.begin(), times.end()), times.end());

    const auto n = static_cast<Eigen::Index>(times.size());
    Matrix values(ud.dim(), n);
    const Vector initial = ud.value(0);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double t = times[static_cast<std::size_t>(i)];
        const double lower = std::max(t - width, 0.0);
        Vector v = static_cast<double>(k) * (integral_to(t) - integral_to(lower));
        if (t < width) v += (1.0 - static_cast<double>(k) * t) * initial;
        values.col(i) = v;
    }
    Matrix left = values;
    left.col(0) = ud.left(0);
    return CadlagPath(std::move(times), std::move(left), std::move(values));
}

double stieltjes_integral(const CadlagPath& f, const CadlagPath& big_f, double t_end) {
    require_scalar(f, "integrand");
    require_scalar(big_f, "integrator");
    require_nondecreasing(big_f);
    const CadlagPath ft = truncate(f, t_end);
    const CadlagPath bt = truncate(big_f, t_end);
    const auto times = refine_times(ft, bt);
    const CadlagPath fr = resample(ft, times);
    const CadlagPath br = resample(bt, times);
    double sum = fr.value(0)(0) * br.value(0)(0);
    for (std::size_t i = 1; i < times.size(); ++i) {
        const double d_big = br.left(i)(0) - br.value(i - 1)(0);
        sum += 0.5 * (fr.value(i - 1)(0) + fr.left(i)(0)) * d_big;
        sum += fr.value(i)(0) * (br.value(i)(0) - br.left(i)(0));
    }
    return sum;
}

double stieltjes_integral(const std::function<double(double)>& f, const CadlagPath& big_f,
                          double t_end) {
    require_scalar(big_f, "integrator");
    require_nondecreasing(big_f);
    const CadlagPath bt = truncate(big_f, t_end);
    double sum = f(0.0) * bt.value(0)(0);
    for (std::size_t i = 1; i < bt.size(); ++i) {
        const double t0 = bt.time(i - 1);
        const double t1 = bt.time(i);
        const double slope = (bt.left(i)(0) - bt.value(i - 1)(0)) / (t1 - t0);
        if (slope != 0.0) {
            double seg = 0.0;
            for (std::size_t q = 0; q < kGlNodes.size(); ++q) {
                const double t = 0.5 * (t0 + t1) + 0.5 * (t1 - t0) * kGlNodes[q];
                seg += kGlWeights[q] * f(t);
            }
            sum += slope * 0.5 * (t1 - t0) * seg;
        }
        sum += f(t1) * (bt.value(i)(0) - bt.left(i)(0));
    }
    return sum;
}

namespace {

// kMomentSeries[m][j] = 1 / (j! (m + j + 1)), so that
// int_0^1 u^m e^{-x u} du = sum_j kMomentSeries[m][j] (-x)^j.
constexpr int kSeriesTerms = 20;

constexpr std::array<std::array<double, kSeriesTerms>, 3> make_moment_series() {
    std::array<std::array<double, kSeriesTerms>, 3> out{};
    for (int m = 0; m < 3; ++m) {
        double fact = 1.0;
        for (int j = 0; j < kSeriesTerms; ++j) {
            if (j > 0) fact *= j;
            out[m][j] = 1.0 / (fact * (m + j + 1));
        }
    }
    return out;
}

constexpr auto kMomentSeries = make_moment_series();

}  // namespace

double exp_moment(int m, double x) {
    if (m < 0 || m > 2) throw Error(ErrorKind::InvalidArgument, "exp_moment supports m in {0,1,2}");
    const double ax = std::abs(x);
    if (ax < 0.5) {
        // truncation error below 0.5^n / n! relative to the leading term
        const int n = ax < 1e-3 ? 6 : (ax < 0.05 ? 10 : kSeriesTerms);
        const auto& c = kMomentSeries[static_cast<std::size_t>(m)];
        double acc = c[static_cast<std::size_t>(n - 1)];
        for (int j = n - 2; j >= 0; --j) acc = acc * (-x) + c[static_cast<std::size_t>(j)];
        return acc;
    }
    const double e = std::exp(-x);
    switch (m) {
        case 0: return -std::expm1(-x) / x;
        case 1: return (1.0 - e * (1.0 + x)) / (x * x);
        default: return (2.0 - e * (x * x + 2.0 * x + 2.0)) / (x * x * x);
    }
}

double discounted_stieltjes(double gamma, const CadlagPath& big_f, double t_end) {
    require_scalar(big_f, "integrator");
    require_nondecreasing(big_f);
    const CadlagPath bt = truncate(big_f, t_end);
    double sum = bt.value(0)(0);
    for (std::size_t i = 1; i < bt.size(); ++i) {
        const double t0 = bt.time(i - 1);
        const double h = bt.time(i) - t0;
        const double rise = bt.left(i)(0) - bt.value(i - 1)(0);
        if (rise != 0.0) sum += std::exp(-gamma * t0) * rise * exp_moment(0, gamma * h);
        const double jump = bt.value(i)(0) - bt.left(i)(0);
        if (jump != 0.0) sum += std::exp(-gamma * bt.time(i)) * jump;
    }
    return sum;
}

double discounted_integral(double gamma, const CadlagPath& f, double t_end) {
    require_scalar(f, "integrand");
    const CadlagPath ft = truncate(f, t_end);
    double sum = 0.0;
    for (std::size_t i = 1; i < ft.size(); ++i) {
        const double t0 = ft.time(i - 1);
        const double h = ft.time(i) - t0;
        const double y0 = ft.value(i - 1)(0);
        const double y1 = ft.left(i)(0);
        const double x = gamma * h;
        sum += std::exp(-gamma * t0) * h * (y0 * exp_moment(0, x) + (y1 - y0) * exp_moment(1, x));
    }
    return sum;
}

double sup_norm(const CadlagPath& p, double t_end) {
    const CadlagPath pt = truncate(p, t_end);
    // |linear|^2 is convex on each segment, so endpoints suffice
    double m = 0.0;
    for (std::size_t i = 0; i < pt.size(); ++i) {
        m = std::max(m, pt.value(i).norm());
        if (i > 0) m = std::max(m, pt.left(i).norm());
    }
    return m;
}

nlohmann::json to_json(const CadlagPath& p) {
    nlohmann::json j;
    j["times"] = p.times();
    auto columns = [](const Matrix& m) {
        nlohmann::json arr = nlohmann::json::array();
        for (Eigen::Index c = 0; c < m.cols(); ++c) {
            std::vector<double> v(m.rows());
            for (Eigen::Index r = 0; r < m.rows(); ++r) v[static_cast<std::size_t>(r)] = m(r, c);
            arr.push_back(v);
        }
        return arr;
    };
    j["left"] = columns(p.lefts());
    j["values"] = columns(p.values());
    return j;
}

CadlagPath path_from_json(const nlohmann::json& j) {
    try {
        auto times = j.at("times").get<std::vector<double>>();
        auto read = [&](const char* key) {
            const auto& arr = j.at(key);
            if (arr.size() != times.size()) {
                throw Error(ErrorKind::InvalidPath, std::string("'") + key + "' length differs from 'times'");
            }
            const auto dim = arr.empty() ? 0 : arr.at(0).size();
            Matrix m(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(arr.size()));
            for (std::size_t c = 0; c < arr.size(); ++c) {
                const auto col = arr.at(c).get<std::vector<double>>();
                if (col.size() != dim) throw Error(ErrorKind::InvalidPath, "ragged path entries");
                for (std::size_t r = 0; r < dim; ++r) {
                    m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = col[r];
                }
            }
            return m;
        };
        Matrix values = read("values");
        Matrix left = j.contains("left") ? read("left") : values;
        return CadlagPath(std::move(times), std::move(left), std::move(values));
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::InvalidPath, std::string("malformed path JSON: ") + e.what());
    }
}

void write_csv(std::ostream& os, const CadlagPath& p) {
    os << "t";
    for (Eigen::Index r = 0; r < p.dim(); ++r) os << ",left_" << r;
    for (Eigen::Index r = 0; r < p.dim(); ++r) os << ",value_" << r;
    os << '\n';
    os.precision(17);
    for (std::size_t i = 0; i < p.size(); ++i) {
        os << p.time(i);
        for (Eigen::Index r = 0; r < p.dim(); ++r) os << ',' << p.left(i)(r);
        for (Eigen::Index r = 0; r < p.dim(); ++r) os << ',' << p.value(i)(r);
        os << '\n';
    }
}

}  // namespace scc
