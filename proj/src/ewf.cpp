#include "scc/ewf.hpp"

#include "scc/error.hpp"
#include "scc/io.hpp"
#include "scc/skorohod.hpp"

#include <boost/multiprecision/cpp_int.hpp>

#include <algorithm>
#include <cmath>
#include <sstream>

namespace scc {

namespace {

using Rat = boost::multiprecision::cpp_rational;

struct RMat {
    Eigen::Index rows = 0;
    Eigen::Index cols = 0;
    std::vector<Rat> a;

    RMat() = default;
    RMat(Eigen::Index r, Eigen::Index c) : rows(r), cols(c), a(static_cast<std::size_t>(r * c)) {}
    Rat& operator()(Eigen::Index i, Eigen::Index j) { return a[static_cast<std::size_t>(i * cols + j)]; }
    const Rat& operator()(Eigen::Index i, Eigen::Index j) const {
        return a[static_cast<std::size_t>(i * cols + j)];
    }
};

bool integer_valued(const Matrix& m) {
    for (Eigen::Index i = 0; i < m.size(); ++i) {
        const double x = m.data()[i];
        if (!std::isfinite(x) || std::abs(x) > 1e9 || x != std::round(x)) return false;
    }
    return true;
}

RMat to_rat(const Matrix& m) {
    RMat out(m.rows(), m.cols());
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = 0; j < m.cols(); ++j) out(i, j) = Rat(std::llround(m(i, j)));
    return out;
}

Matrix to_double(const RMat& m) {
    Matrix out(m.rows, m.cols);
    for (Eigen::Index i = 0; i < m.rows; ++i)
        for (Eigen::Index j = 0; j < m.cols; ++j) out(i, j) = m(i, j).convert_to<double>();
    return out;
}

RMat mul(const RMat& x, const RMat& y) {
    RMat out(x.rows, y.cols);
    for (Eigen::Index i = 0; i < x.rows; ++i)
        for (Eigen::Index l = 0; l < x.cols; ++l) {
            if (x(i, l) == 0) continue;
            for (Eigen::Index j = 0; j < y.cols; ++j) out(i, j) += x(i, l) * y(l, j);
        }
    return out;
}

RMat transpose(const RMat& x) {
    RMat out(x.cols, x.rows);
    for (Eigen::Index i = 0; i < x.rows; ++i)
        for (Eigen::Index j = 0; j < x.cols; ++j) out(j, i) = x(i, j);
    return out;
}

// Reduced row echelon form in place; returns the pivot columns.
std::vector<Eigen::Index> rref(RMat& x) {
    std::vector<Eigen::Index> pivots;
    Eigen::Index row = 0;
    for (Eigen::Index c = 0; c < x.cols && row < x.rows; ++c) {
        Eigen::Index piv = row;
        while (piv < x.rows && x(piv, c) == 0) ++piv;
        if (piv == x.rows) continue;
        for (Eigen::Index j = 0; j < x.cols; ++j) std::swap(x(row, j), x(piv, j));
        const Rat inv = 1 / x(row, c);
        for (Eigen::Index j = 0; j < x.cols; ++j) x(row, j) *= inv;
        for (Eigen::Index i = 0; i < x.rows; ++i) {
            if (i == row || x(i, c) == 0) continue;
            const Rat f = x(i, c);
            for (Eigen::Index j = 0; j < x.cols; ++j) x(i, j) -= f * x(row, j);
        }
        pivots.push_back(c);
        ++row;
    }
    return pivots;
}

Eigen::Index rank(RMat x) { return static_cast<Eigen::Index>(rref(x).size()); }

// Columns span {v : x v = 0}; one vector per free column.
RMat nullspace(const RMat& x) {
    RMat e = x;
    const auto pivots = rref(e);
    std::vector<Eigen::Index> free;
    for (Eigen::Index c = 0, pi = 0; c < x.cols; ++c) {
        if (pi < static_cast<Eigen::Index>(pivots.size()) && pivots[static_cast<std::size_t>(pi)] == c) ++pi;
        else free.push_back(c);
    }
    RMat out(x.cols, static_cast<Eigen::Index>(free.size()));
    for (std::size_t f = 0; f < free.size(); ++f) {
        const auto col = static_cast<Eigen::Index>(f);
        out(free[f], col) = 1;
        for (std::size_t i = 0; i < pivots.size(); ++i) out(pivots[i], col) = -e(static_cast<Eigen::Index>(i), free[f]);
    }
    return out;
}

RMat inverse(const RMat& x) {
    RMat aug(x.rows, 2 * x.cols);
    for (Eigen::Index i = 0; i < x.rows; ++i) {
        for (Eigen::Index j = 0; j < x.cols; ++j) aug(i, j) = x(i, j);
        aug(i, x.cols + i) = 1;
    }
    const auto pivots = rref(aug);
    if (static_cast<Eigen::Index>(pivots.size()) < x.rows || (x.rows > 0 && pivots.back() >= x.cols)) {
        throw Error(ErrorKind::RankDeficient, "K K^T is singular");
    }
    RMat out(x.rows, x.cols);
    for (Eigen::Index i = 0; i < x.rows; ++i)
        for (Eigen::Index j = 0; j < x.cols; ++j) out(i, j) = aug(i, x.cols + j);
    return out;
}

double max_abs(const Matrix& m) { return m.size() > 0 ? m.cwiseAbs().maxCoeff() : 0.0; }

// Scalar traits for the nonnegativity repair, which runs on either field.
bool nonneg(double v) { return v >= -1e-12; }
bool nonneg(const Rat& v) { return v >= 0; }
bool nonzero(double v) { return std::abs(v) > 1e-12; }
bool nonzero(const Rat& v) { return v != 0; }
Rat abs_of(const Rat& v) { return v < 0 ? Rat(-v) : v; }
double abs_of(double v) { return std::abs(v); }

template <class T>
using Rows = std::vector<std::vector<T>>;

Eigen::Index rows_rank(const Rows<double>& rows, Eigen::Index m) {
    Matrix x(static_cast<Eigen::Index>(rows.size()), m);
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (Eigen::Index j = 0; j < m; ++j) x(static_cast<Eigen::Index>(i), j) = rows[i][static_cast<std::size_t>(j)];
    return numeric_rank(x);
}

Eigen::Index rows_rank(const Rows<Rat>& rows, Eigen::Index m) {
    RMat x(static_cast<Eigen::Index>(rows.size()), m);
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (Eigen::Index j = 0; j < m; ++j) x(static_cast<Eigen::Index>(i), j) = rows[i][static_cast<std::size_t>(j)];
    return rank(x);
}

// Row-reduced basis of the same row space, a sparse starting point for the repair.
void row_reduce(Rows<double>& rows) {
    std::size_t row = 0;
    const std::size_t cols = rows.empty() ? 0 : rows[0].size();
    for (std::size_t c = 0; c < cols && row < rows.size(); ++c) {
        std::size_t piv = row;
        for (std::size_t i = row + 1; i < rows.size(); ++i)
            if (std::abs(rows[i][c]) > std::abs(rows[piv][c])) piv = i;
        if (std::abs(rows[piv][c]) <= 1e-12) continue;
        std::swap(rows[row], rows[piv]);
        const double d = rows[row][c];
        for (auto& v : rows[row]) v /= d;
        for (std::size_t i = 0; i < rows.size(); ++i) {
            if (i == row) continue;
            const double f = rows[i][c];
            for (std::size_t j = 0; j < cols; ++j) rows[i][j] -= f * rows[row][j];
        }
        ++row;
    }
    for (auto& r : rows)
        for (auto& v : r)
            if (std::abs(v) <= 1e-13) v = 0.0;
}

void row_reduce(Rows<Rat>& rows) {
    if (rows.empty()) return;
    RMat x(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows[0].size()));
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < rows[i].size(); ++j) x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    rref(x);
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < rows[i].size(); ++j) rows[i][j] = x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
}

template <class T>
bool row_nonneg(const std::vector<T>& row) {
    return std::all_of(row.begin(), row.end(), [](const T& v) { return nonneg(v); });
}

template <class T>
std::string offending_entries(const Rows<T>& rows) {
    std::ostringstream os;
    bool first = true;
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < rows[i].size(); ++j)
            if (!nonneg(rows[i][j])) {
                os << (first ? "" : ", ") << "M[" << i << "][" << j << "] = " << static_cast<double>(rows[i][j]);
                first = false;
            }
    return os.str();
}

// Row reduction and sign flips, then a search over +-1 combinations for k <= 4; rows are then
// scaled to unit max-entry. Appends what was done to `log`.
template <class T>
Rows<T> repair_nonnegative(Rows<T> rows, Eigen::Index m, std::string& log) {
    row_reduce(rows);
    log += "row-reduced, ";
    for (auto& row : rows) {
        std::vector<T> neg(row.size());
        for (std::size_t j = 0; j < row.size(); ++j) neg[j] = -row[j];
        if (!row_nonneg(row) && row_nonneg(neg)) row = neg;
    }
    const bool all_ok = std::all_of(rows.begin(), rows.end(), [](const auto& r) { return row_nonneg(r); });
    if (all_ok) {
        log += "sign flips";
    } else {
        const std::size_t k = rows.size();
        if (k > 4) {
            throw Error(ErrorKind::NonnegativeBasisNotFound,
                        "mixed-sign workload rows (" + offending_entries(rows) + "); supply M explicitly");
        }
        // coefficient vectors in {-1, 0, 1}^k, fewest nonzeros first
        std::vector<std::vector<int>> coeffs;
        std::size_t total = 1;
        for (std::size_t i = 0; i < k; ++i) total *= 3;
        for (std::size_t code = 1; code < total; ++code) {
            std::vector<int> c(k);
            std::size_t x = code;
            for (std::size_t i = 0; i < k; ++i) {
                c[i] = static_cast<int>(x % 3) - 1;
                x /= 3;
            }
            if (std::any_of(c.begin(), c.end(), [](int v) { return v != 0; })) coeffs.push_back(c);
        }
        std::stable_sort(coeffs.begin(), coeffs.end(), [](const auto& a, const auto& b) {
            return std::count(a.begin(), a.end(), 0) > std::count(b.begin(), b.end(), 0);
        });
        Rows<T> chosen;
        for (const auto& c : coeffs) {
            std::vector<T> cand(static_cast<std::size_t>(m), T(0));
            for (std::size_t i = 0; i < k; ++i)
                if (c[i] != 0)
                    for (std::size_t j = 0; j < cand.size(); ++j) cand[j] += T(c[i]) * rows[i][j];
            if (!row_nonneg(cand)) continue;
            if (std::none_of(cand.begin(), cand.end(), [](const T& v) { return nonzero(v); })) continue;
            chosen.push_back(cand);
            if (rows_rank(chosen, m) < static_cast<Eigen::Index>(chosen.size())) chosen.pop_back();
            if (chosen.size() == k) break;
        }
        if (chosen.size() < k) {
            throw Error(ErrorKind::NonnegativeBasisNotFound,
                        "no nonnegative basis among +-1 combinations (" + offending_entries(rows) +
                            "); supply M explicitly");
        }
        rows = std::move(chosen);
        log += "+-1 recombination";
    }
    for (auto& row : rows) {
        T big(0);
        for (const auto& v : row) big = std::max(big, abs_of(v));
        if (nonzero(big))
            for (auto& v : row) v /= big;
    }
    log += ", rows scaled to unit max entry";
    return rows;
}

template <class T>
Rows<T> complement_rows_from(const Matrix& x) {
    Rows<T> rows(static_cast<std::size_t>(x.rows()));
    for (Eigen::Index i = 0; i < x.rows(); ++i)
        for (Eigen::Index j = 0; j < x.cols(); ++j) rows[static_cast<std::size_t>(i)].push_back(T(x(i, j)));
    return rows;
}

WorkloadData reduce_rational(const Matrix& r, const Matrix& k, const ReductionOptions& opt) {
    const RMat rr = to_rat(r);
    const RMat kr = to_rat(k);
    const Eigen::Index m = r.rows();
    if (rank(kr) != k.rows()) throw Error(ErrorKind::RankDeficient, "K must have full row rank");

    WorkloadData wd;
    wd.rational = true;
    const RMat ker = nullspace(kr);
    const RMat nmat = mul(rr, ker);
    RMat ne = nmat;
    const auto npiv = rref(ne);
    const auto rdim = static_cast<Eigen::Index>(npiv.size());
    RMat nb(m, rdim);
    for (Eigen::Index c = 0; c < rdim; ++c)
        for (Eigen::Index i = 0; i < m; ++i) nb(i, c) = nmat(i, npiv[static_cast<std::size_t>(c)]);
    wd.k = m - rdim;
    wd.ker_k = to_double(ker);
    wd.n_basis = to_double(nb);

    RMat mr;
    if (opt.m) {
        mr = to_rat(*opt.m);
        wd.provenance = "M supplied by the user";
    } else {
        // complement of N: null space of N^T, one row per vector
        RMat comp = transpose(nullspace(transpose(nmat)));
        Rows<Rat> rows(static_cast<std::size_t>(comp.rows));
        for (Eigen::Index i = 0; i < comp.rows; ++i)
            for (Eigen::Index j = 0; j < m; ++j) rows[static_cast<std::size_t>(i)].push_back(comp(i, j));
        wd.provenance = "M: rational null-space basis of N^T";
        if (opt.repair_nonnegative) {
            wd.provenance += "; ";
            rows = repair_nonnegative(std::move(rows), m, wd.provenance);
        }
        mr = RMat(static_cast<Eigen::Index>(rows.size()), m);
        for (std::size_t i = 0; i < rows.size(); ++i)
            for (Eigen::Index j = 0; j < m; ++j) mr(static_cast<Eigen::Index>(i), j) = rows[i][static_cast<std::size_t>(j)];
    }
    if (mr.rows != wd.k || mr.cols != m) throw Error(ErrorKind::DimensionMismatch, "M must be k x m");
    const RMat mn = mul(mr, nb);
    if (std::any_of(mn.a.begin(), mn.a.end(), [](const Rat& v) { return v != 0; })) {
        throw Error(ErrorKind::InvalidArgument, "M does not annihilate R ker K");
    }
    if (rank(mr) != wd.k) throw Error(ErrorKind::RankDeficient, "M must have full row rank");

    const RMat kt = transpose(kr);
    const RMat g = mul(mul(mul(mr, rr), kt), inverse(mul(kr, kt)));
    const RMat lhs = mul(mr, rr);
    const RMat rhs = mul(g, kr);
    Rat worst(0);
    for (std::size_t i = 0; i < lhs.a.size(); ++i) worst = std::max(worst, abs_of(Rat(lhs.a[i] - rhs.a[i])));
    wd.residual = worst.convert_to<double>();
    wd.m = to_double(mr);
    wd.g = to_double(g);
    wd.provenance += "; G = M R K^T (K K^T)^-1 (minimum norm), exact";
    return wd;
}

WorkloadData reduce_float(const Matrix& r, const Matrix& k, const ReductionOptions& opt) {
    const Eigen::Index m = r.rows();
    const Eigen::Index n = r.cols();
    const Eigen::Index p = k.rows();
    if (numeric_rank(k) != p) throw Error(ErrorKind::RankDeficient, "K must have full row rank");

    WorkloadData wd;
    Eigen::JacobiSVD<Matrix> ksvd(k, Eigen::ComputeFullV);
    wd.ker_k = ksvd.matrixV().rightCols(n - p);
    const Matrix nmat = r * wd.ker_k;
    Eigen::Index rdim = 0;
    Matrix comp;
    if (nmat.cols() > 0 && numeric_rank(nmat) > 0) {
        Eigen::JacobiSVD<Matrix> nsvd(nmat, Eigen::ComputeFullU);
        rdim = numeric_rank(nmat);
        wd.n_basis = nsvd.matrixU().leftCols(rdim);
        comp = nsvd.matrixU().rightCols(m - rdim).transpose();
    } else {
        wd.n_basis = Matrix(m, 0);
        comp = Matrix::Identity(m, m);
    }
    wd.k = m - rdim;

    if (opt.m) {
        wd.m = *opt.m;
        wd.provenance = "M supplied by the user";
    } else {
        wd.provenance = "M: orthonormal complement of N";
        if (opt.repair_nonnegative) {
            wd.provenance += "; ";
            auto rows = repair_nonnegative(complement_rows_from<double>(comp), m, wd.provenance);
            wd.m = Matrix(static_cast<Eigen::Index>(rows.size()), m);
            for (std::size_t i = 0; i < rows.size(); ++i)
                for (Eigen::Index j = 0; j < m; ++j) wd.m(static_cast<Eigen::Index>(i), j) = rows[i][static_cast<std::size_t>(j)];
        } else {
            wd.m = comp;
        }
    }
    if (wd.m.rows() != wd.k || wd.m.cols() != m) throw Error(ErrorKind::DimensionMismatch, "M must be k x m");
    const double scale = std::max(1.0, wd.m.norm());
    if (max_abs(wd.m * wd.n_basis) > 1e-10 * scale) {
        throw Error(ErrorKind::InvalidArgument, "M does not annihilate R ker K");
    }
    if (numeric_rank(wd.m) != wd.k) throw Error(ErrorKind::RankDeficient, "M must have full row rank");

    wd.g = wd.m * r * k.transpose() * (k * k.transpose()).inverse();
    const Matrix diff = wd.m * r - wd.g * k;
    wd.residual = max_abs(diff);
    wd.provenance += "; G = M R K^T (K K^T)^-1 (minimum norm), floating point";
    return wd;
}

double breakpoint_gap(const CadlagPath& a, const CadlagPath& b) {
    const auto times = refine_times(a, b);
    const CadlagPath x = resample(a, times);
    const CadlagPath y = resample(b, times);
    double worst = 0.0;
    for (std::size_t i = 0; i < times.size(); ++i) {
        worst = std::max(worst, max_abs(x.value(i) - y.value(i)));
        worst = std::max(worst, max_abs(x.left(i) - y.left(i)));
    }
    return worst;
}

}  // namespace

BCPInstance make_bcp_instance(Matrix r, Matrix k, Vector q, Vector b, Matrix sigma, double gamma, Vector h,
                              Vector cost, bool continuous_selection) {
    const Eigen::Index m = r.rows();
    const Eigen::Index n = r.cols();
    const Eigen::Index p = k.rows();
    if (m < 1 || n < 1 || p < 1) throw Error(ErrorKind::DimensionMismatch, "R and K must be nonempty");
    if (k.cols() != n) throw Error(ErrorKind::DimensionMismatch, "K must have as many columns as R");
    if (p > n || numeric_rank(k) != p) throw Error(ErrorKind::RankDeficient, "K must have full row rank");
    if (q.size() != m || b.size() != m || sigma.rows() != m || sigma.cols() != m || cost.size() != m) {
        throw Error(ErrorKind::DimensionMismatch, "q, b~, Sigma~ and the cost must live in R^m");
    }
    if (h.size() != p) throw Error(ErrorKind::DimensionMismatch, "h must live in R^p");
    if ((q.array() < 0.0).any()) throw Error(ErrorKind::InvalidArgument, "q must be nonnegative");
    if ((h.array() < 0.0).any()) throw Error(ErrorKind::InvalidArgument, "h must be nonnegative");
    if (!(cost.array() > 0.0).all()) throw Error(ErrorKind::InvalidArgument, "cost coefficients must be positive");
    if (!(gamma > 0.0)) throw Error(ErrorKind::InvalidArgument, "discount rate must be positive");
    Eigen::LLT<Matrix> llt(sigma);
    if (llt.info() != Eigen::Success || !sigma.isApprox(sigma.transpose())) {
        throw Error(ErrorKind::NotFactorizable, "Sigma~ must be symmetric positive definite");
    }

    BCPInstance inst;
    inst.sigma_factor = psd_factor(sigma);
    inst.r = std::move(r);
    inst.k = std::move(k);
    inst.q = std::move(q);
    inst.b = std::move(b);
    inst.sigma = std::move(sigma);
    inst.gamma = gamma;
    inst.h = std::move(h);
    inst.cost = std::move(cost);
    inst.continuous_selection = continuous_selection;
    return inst;
}

BCPInstance bcp_from_json(const nlohmann::json& j) {
    try {
        return make_bcp_instance(matrix_from_json(j.at("R"), "R"), matrix_from_json(j.at("K"), "K"),
                                 vector_from_json(j.at("q"), "q"), vector_from_json(j.at("b"), "b"),
                                 matrix_from_json(j.at("Sigma"), "Sigma"), j.at("gamma").get<double>(),
                                 vector_from_json(j.at("h"), "h"), vector_from_json(j.at("cost"), "cost"),
                                 j.value("continuous_selection", false));
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::ConfigInvalid, std::string("bcp instance: ") + e.what());
    }
}

nlohmann::json to_json(const BCPInstance& inst) {
    return {{"R", matrix_to_json(inst.r)},
            {"K", matrix_to_json(inst.k)},
            {"q", to_json(inst.q)},
            {"b", to_json(inst.b)},
            {"Sigma", matrix_to_json(inst.sigma)},
            {"gamma", inst.gamma},
            {"h", to_json(inst.h)},
            {"cost", to_json(inst.cost)},
            {"continuous_selection", inst.continuous_selection}};
}

WorkloadData workload_reduction(const Matrix& r, const Matrix& k, const ReductionOptions& options) {
    if (k.cols() != r.cols()) throw Error(ErrorKind::DimensionMismatch, "K must have as many columns as R");
    if (k.rows() < 1 || k.rows() > k.cols()) throw Error(ErrorKind::RankDeficient, "K must be p x n with p <= n");
    const bool exact = options.allow_rational && integer_valued(r) && integer_valued(k) &&
                       (!options.m || integer_valued(*options.m));
    return exact ? reduce_rational(r, k, options) : reduce_float(r, k, options);
}

nlohmann::json to_json(const WorkloadData& wd) {
    return {{"M", matrix_to_json(wd.m)},
            {"G", matrix_to_json(wd.g)},
            {"k", wd.k},
            {"ker_K", matrix_to_json(wd.ker_k)},
            {"N_basis", matrix_to_json(wd.n_basis)},
            {"rational", wd.rational},
            {"residual", wd.residual},
            {"provenance", wd.provenance}};
}

EwfReport validate_ewf_assumptions(const WorkloadData& wd) {
    EwfReport rep;
    auto fail = [&](std::string s) {
        rep.pass = false;
        rep.failures.push_back(std::move(s));
    };
    if (wd.k < 1) {
        fail("k = 0: R ker K spans the whole queue space");
        return rep;
    }
    if (numeric_rank(wd.m) != wd.k) fail("M is not of full rank");
    if (numeric_rank(wd.g) != wd.k) fail("G is not of full rank");
    for (Eigen::Index i = 0; i < wd.m.rows(); ++i)
        for (Eigen::Index j = 0; j < wd.m.cols(); ++j)
            if (wd.m(i, j) < -1e-12) {
                std::ostringstream os;
                os << "M[" << i << "][" << j << "] = " << wd.m(i, j)
                   << " is negative; flip the row sign or recombine rows, or supply M";
                fail(os.str());
            }
    for (Eigen::Index i = 0; i < wd.g.rows(); ++i)
        for (Eigen::Index j = 0; j < wd.g.cols(); ++j)
            if (wd.g(i, j) < -1e-12) {
                std::ostringstream os;
                os << "G[" << i << "][" << j << "] = " << wd.g(i, j) << " is negative";
                fail(os.str());
            }
    for (Eigen::Index j = 0; j < wd.g.cols(); ++j) {
        if (!(wd.g.col(j).array() > 1e-10).any()) {
            fail("G column " + std::to_string(j) + " has no strictly positive entry");
        }
    }
    if (max_abs(wd.m * wd.n_basis) > 1e-10) {
        fail("rows of M are not orthogonal to R ker K");
    }
    return rep;
}

CadlagPath queue_process(const BCPInstance& inst, const CadlagPath& y, const CadlagPath& b) {
    if (y.dim() != inst.n() || b.dim() != inst.m()) throw Error(ErrorKind::DimensionMismatch, "Y or B~ has the wrong dimension");
    const Matrix id = Matrix::Identity(inst.m(), inst.m());
    return linear_combination(inst.q, {{id, &b}, {inst.r, &y}});
}

BcpAdmissibility bcp_admissible(const BCPInstance& inst, const CadlagPath& y, const CadlagPath& b, double tol) {
    BcpAdmissibility rep;
    const CadlagPath u = apply(inst.k, y);
    // U(0-) = 0
    Vector prev = Vector::Zero(u.dim());
    for (std::size_t i = 0; i < u.size(); ++i) {
        const Vector left = i == 0 ? prev : Vector(u.left(i));
        const Vector d1 = left - prev;
        const Vector d2 = u.value(i) - left;
        for (Eigen::Index c = 0; c < u.dim(); ++c) {
            if (d1(c) < -tol || d2(c) < -tol) {
                rep.admissible = false;
                rep.time = u.time(i);
                rep.index = c;
                rep.what = "monotonicity";
                return rep;
            }
        }
        prev = u.value(i);
    }
    const CadlagPath q = queue_process(inst, y, b);
    for (std::size_t i = 0; i < q.size(); ++i) {
        for (Eigen::Index c = 0; c < q.dim(); ++c) {
            if (q.value(i)(c) < -tol || (i > 0 && q.left(i)(c) < -tol)) {
                rep.admissible = false;
                rep.time = q.time(i);
                rep.index = c;
                rep.what = "queue";
                return rep;
            }
        }
    }
    return rep;
}

CadlagPath regulator_control(const BCPInstance& inst, const CadlagPath& b) {
    if (inst.r.rows() != inst.r.cols()) throw Error(ErrorKind::Unsupported, "regulator control needs a square R");
    const Eigen::Index m = inst.m();
    const CadlagPath x = shift(b, inst.q);
    const PolyCone half_line = PolyCone::orthant(1);
    const Vector up = Vector::Ones(1);
    // kinks of the regulators add breakpoints, so collect all before stacking
    std::vector<CadlagPath> etas;
    std::vector<double> times = x.times();
    for (Eigen::Index c = 0; c < m; ++c) {
        Vector e = Vector::Zero(m);
        e(c) = 1.0;
        etas.push_back(skorohod_solve(dot(x, e), half_line, up).eta);
        times = refine_times(CadlagPath::continuous(times, Matrix::Zero(1, static_cast<Eigen::Index>(times.size()))),
                             etas.back());
    }
    Matrix left(m, static_cast<Eigen::Index>(times.size()));
    Matrix values(m, static_cast<Eigen::Index>(times.size()));
    for (Eigen::Index c = 0; c < m; ++c) {
        const CadlagPath eta = resample(etas[static_cast<std::size_t>(c)], times);
        left.row(c) = eta.lefts().row(0);
        values.row(c) = eta.values().row(0);
    }
    const Eigen::FullPivLU<Matrix> lu(inst.r);
    if (!lu.isInvertible()) throw Error(ErrorKind::RankDeficient, "R must be invertible");
    const Matrix rinv = lu.inverse();
    return CadlagPath(std::move(times), rinv * left, rinv * values);
}

InducedCost induced_cost(const BCPInstance& inst, const WorkloadData& wd) {
    InducedCost ic;
    const Matrix mt = wd.m.transpose();
    ic.m = mt.completeOrthogonalDecomposition().solve(inst.cost);
    ic.residual = (mt * ic.m - inst.cost).norm();
    ic.fiber_constant = ic.residual <= 1e-10 * std::max(1.0, inst.cost.norm());
    return ic;
}

ProblemInstance ewf_instance(const BCPInstance& inst, const WorkloadData& wd) {
    const InducedCost ic = induced_cost(inst, wd);
    RunningCost cost = RunningCost::linear(ic.m);
    PolyCone w_cone = PolyCone::from_generators(wd.m);
    cost.derive_certificate(w_cone);
    return make_instance(wd.g, wd.m * inst.b, wd.m * inst.sigma * wd.m.transpose(), std::move(w_cone),
                         PolyCone::orthant(inst.p()), inst.gamma, inst.h, std::move(cost));
}

EwfMapping map_bcp_to_ewf(const BCPInstance& inst, const WorkloadData& wd, const CadlagPath& y, const CadlagPath& b) {
    const auto adm = bcp_admissible(inst, y, b);
    if (!adm.admissible) {
        throw Error(ErrorKind::NotAdmissible,
                    "Y is not admissible (" + adm.what + " at t = " + std::to_string(*adm.time) + ")");
    }
    EwfMapping out;
    out.w = wd.m * inst.q;
    out.u = apply(inst.k, y);
    out.b = apply(wd.m, b);
    out.w_path = apply(wd.m, queue_process(inst, y, b));
    const CadlagPath rhs = state_process(out.w, out.b, out.u, wd.g);
    out.state_residual = breakpoint_gap(out.w_path, rhs);
    return out;
}

CostEquivalence bcp_cost_and_equivalence(const BCPInstance& inst, const WorkloadData& wd, const CadlagPath& y,
                                         const CadlagPath& b, double t_end) {
    const EwfMapping map = map_bcp_to_ewf(inst, wd, y, b);
    const CadlagPath q = queue_process(inst, y, b);
    CostEquivalence out;
    out.j_bcp = discounted_integral(inst.gamma, dot(q, inst.cost), t_end) +
                discounted_stieltjes(inst.gamma, dot(map.u, inst.h), t_end);
    const InducedCost ic = induced_cost(inst, wd);
    out.fiber_constant = ic.fiber_constant;
    if (!ic.fiber_constant) {
        std::ostringstream os;
        os << "holding cost is not constant on workload fibers (|M^T m - c| = " << ic.residual
           << "); the effective workload cost needs a fiberwise minimization and is not computed";
        out.note = os.str();
        return out;
    }
    const ProblemInstance ewf = ewf_instance(inst, wd);
    const PathCost pc = pathwise_cost(ewf, map.u, map.w_path, t_end);
    out.j_ewf = pc.total;
    out.gap = std::abs(out.j_bcp - pc.total);
    return out;
}

std::string describe(const WorkloadData& wd, const EwfReport& report) {
    const Eigen::IOFormat fmt(Eigen::StreamPrecision, 0, " ", "\n", "  [", "]");
    std::ostringstream os;
    os << "workload dimension k = " << wd.k << (wd.rational ? " (exact arithmetic)" : " (floating point)") << "\n";
    os << "M =\n" << wd.m.format(fmt) << "\n";
    os << "G =\n" << wd.g.format(fmt) << "\n";
    os << "max |M R - G K| = " << wd.residual << "\n";
    os << "provenance: " << wd.provenance << "\n";
    os << "assumptions: " << (report.pass ? "pass" : "fail") << "\n";
    for (const auto& f : report.failures) os << "  - " << f << "\n";
    return os.str();
}

}  // namespace scc
