#include <catch2/catch_amalgamated.hpp>

#include "scc/error.hpp"
#include "scc/ewf.hpp"
#include "scc/skorohod.hpp"

#include <cmath>
#include <random>

using namespace scc;
using Catch::Approx;

namespace {

Matrix mat(std::initializer_list<std::initializer_list<double>> rows) {
    Matrix m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.begin()->size()));
    Eigen::Index i = 0;
    for (const auto& r : rows) {
        Eigen::Index j = 0;
        for (double x : r) m(i, j++) = x;
        ++i;
    }
    return m;
}

Vector vec(std::initializer_list<double> xs) {
    Vector v(static_cast<Eigen::Index>(xs.size()));
    Eigen::Index i = 0;
    for (double x : xs) v(i++) = x;
    return v;
}

BCPInstance two_class(Vector cost) {
    return make_bcp_instance(Matrix::Identity(2, 2), mat({{1, 1}}), vec({1, 2}), vec({0, 0}),
                             Matrix::Identity(2, 2), 1.0, vec({1}), std::move(cost));
}

BCPInstance single_server(double q) {
    return make_bcp_instance(mat({{1}}), mat({{1}}), vec({q}), vec({0}), mat({{1}}), 1.0, vec({1}), vec({1}));
}

double max_abs(const Matrix& m) { return m.size() ? m.cwiseAbs().maxCoeff() : 0.0; }

}  // namespace

TEST_CASE("two-class single-resource reduction", "[ewf]") {
    const Matrix r = Matrix::Identity(2, 2);
    const Matrix k = mat({{1, 1}});
    const auto wd = workload_reduction(r, k);
    CHECK(wd.rational);
    REQUIRE(wd.k == 1);
    CHECK(wd.m == mat({{1, 1}}));
    CHECK(wd.g == mat({{1}}));
    CHECK(wd.residual == 0.0);
    // ker K is spanned by (1, -1) up to scale
    REQUIRE(wd.ker_k.cols() == 1);
    CHECK(wd.ker_k(0, 0) == -wd.ker_k(1, 0));
    // M R x = G K x on every basis vector
    for (int j = 0; j < 2; ++j) {
        Vector e = Vector::Zero(2);
        e(j) = 1.0;
        CHECK((wd.m * r * e - wd.g * k * e).norm() == 0.0);
    }
    CHECK(validate_ewf_assumptions(wd).pass);
    CHECK(wd.provenance.find("minimum norm") != std::string::npos);
}

TEST_CASE("no workload collapse when K is the identity", "[ewf]") {
    const Matrix r = mat({{1, 0}, {1, 1}});
    const auto wd = workload_reduction(r, Matrix::Identity(2, 2));
    CHECK(wd.k == 2);
    CHECK(wd.m == Matrix::Identity(2, 2));
    CHECK(wd.g == r);
    CHECK(wd.residual == 0.0);
}

TEST_CASE("degenerate network is flagged", "[ewf]") {
    const auto wd = workload_reduction(Matrix::Zero(2, 2), mat({{1, 1}}));
    CHECK(wd.k == 2);
    CHECK(wd.m == Matrix::Identity(2, 2));
    CHECK(max_abs(wd.g) == 0.0);
    const auto rep = validate_ewf_assumptions(wd);
    CHECK_FALSE(rep.pass);
    bool column_flagged = false;
    for (const auto& f : rep.failures) column_flagged |= f.find("G column 0") != std::string::npos;
    CHECK(column_flagged);
}

TEST_CASE("zero column of G is reported with its index", "[ewf]") {
    WorkloadData wd;
    wd.k = 1;
    wd.m = mat({{1, 1}});
    wd.g = mat({{1, 0}});
    const auto rep = validate_ewf_assumptions(wd);
    CHECK_FALSE(rep.pass);
    REQUIRE(rep.failures.size() == 1);
    CHECK(rep.failures[0].find("G column 1") != std::string::npos);
}

TEST_CASE("rank-deficient K", "[ewf]") {
    CHECK_THROWS_MATCHES(workload_reduction(Matrix::Identity(2, 2), mat({{1, 1}, {2, 2}})), Error,
                         Catch::Matchers::Predicate<Error>([](const Error& e) {
                             return e.kind() == ErrorKind::RankDeficient;
                         }));
}

TEST_CASE("raw orthonormal complement with mixed signs", "[ewf]") {
    // R ker K = span{(1,1,1)}: every vector of its complement sums to zero
    const Matrix r = mat({{1, 0}, {1, 0}, {1, 0}});
    const Matrix k = mat({{1, 1}});
    ReductionOptions raw;
    raw.repair_nonnegative = false;
    raw.allow_rational = false;
    const auto wd = workload_reduction(r, k, raw);
    CHECK(wd.k == 2);
    CHECK(wd.residual <= 1e-10);
    CHECK(max_abs(wd.m * wd.m.transpose() - Matrix::Identity(2, 2)) <= 1e-12);
    const auto rep = validate_ewf_assumptions(wd);
    CHECK_FALSE(rep.pass);
    bool suggests_repair = false;
    for (const auto& f : rep.failures) suggests_repair |= f.find("flip the row sign") != std::string::npos;
    CHECK(suggests_repair);

    for (bool rational : {true, false}) {
        ReductionOptions opt;
        opt.allow_rational = rational;
        CHECK_THROWS_MATCHES(workload_reduction(r, k, opt), Error,
                             Catch::Matchers::Predicate<Error>([](const Error& e) {
                                 return e.kind() == ErrorKind::NonnegativeBasisNotFound &&
                                        std::string(e.what()).find("M[") != std::string::npos;
                             }));
    }
}

TEST_CASE("recombination finds a nonnegative basis", "[ewf]") {
    // complement of (1,-1,1) has the rational basis (1,1,0), (-1,0,1)
    const Matrix r = mat({{1, 0}, {0, 1}, {1, 0}});
    const auto wd = workload_reduction(r, mat({{1, 1}}));
    REQUIRE(wd.k == 2);
    CHECK((wd.m.array() >= 0.0).all());
    CHECK(wd.residual == 0.0);
    CHECK(max_abs(wd.m * wd.n_basis) == 0.0);
    CHECK(wd.provenance.find("recombination") != std::string::npos);
}

TEST_CASE("user supplied M", "[ewf]") {
    ReductionOptions opt;
    opt.m = mat({{2, 2}});
    const auto wd = workload_reduction(Matrix::Identity(2, 2), mat({{1, 1}}), opt);
    CHECK(wd.g == mat({{2}}));
    CHECK(wd.provenance.find("user") != std::string::npos);
    opt.m = mat({{1, 0}});
    CHECK_THROWS_AS(workload_reduction(Matrix::Identity(2, 2), mat({{1, 1}}), opt), Error);
}

TEST_CASE("float mode agrees with rational mode", "[ewf]") {
    const Matrix r = mat({{1, 0, 0}, {-1, 1, 0}, {0, 0, 1}});
    const Matrix k = mat({{1, 0, 1}, {0, 1, 0}});
    const auto exact = workload_reduction(r, k);
    ReductionOptions opt;
    opt.allow_rational = false;
    const auto approx = workload_reduction(r, k, opt);
    REQUIRE(exact.k == approx.k);
    CHECK(exact.residual == 0.0);
    CHECK(approx.residual <= 1e-10 * approx.m.norm() * r.norm());
    CHECK(max_abs(exact.m - approx.m) <= 1e-10);
    CHECK(max_abs(exact.g - approx.g) <= 1e-10);
}

TEST_CASE("null-space invariance and dimension audit", "[ewf][property]") {
    std::mt19937_64 rng(17);
    std::uniform_int_distribution<int> entry(-2, 2);
    int trials = 0;
    for (int t = 0; t < 200; ++t) {
        const Eigen::Index m = 2 + t % 3;
        const Eigen::Index n = 2 + (t / 3) % 3;
        const Eigen::Index p = 1 + t % static_cast<int>(n);
        Matrix r(m, n), k(p, n);
        for (Eigen::Index i = 0; i < r.size(); ++i) r.data()[i] = entry(rng);
        for (Eigen::Index i = 0; i < k.size(); ++i) k.data()[i] = entry(rng);
        if (numeric_rank(k) != p) continue;
        for (bool rational : {true, false}) {
            ReductionOptions opt;
            opt.repair_nonnegative = false;
            opt.allow_rational = rational;
            const auto wd = workload_reduction(r, k, opt);
            CHECK(wd.k + numeric_rank(r * wd.ker_k) == m);
            CHECK(wd.ker_k.cols() == n - p);
            CHECK(max_abs(k * wd.ker_k) <= 1e-10);
            CHECK(max_abs(wd.m * r * wd.ker_k) <= 1e-10);
            if (wd.k > 0) CHECK(numeric_rank(wd.m) == wd.k);
            if (rational) CHECK(wd.residual == 0.0);
            else CHECK(wd.residual <= 1e-10 * std::max(1.0, wd.m.norm() * r.norm()));
        }
        ++trials;
    }
    CHECK(trials > 50);
}

TEST_CASE("BCP admissibility", "[ewf]") {
    const auto inst = two_class(vec({1, 1}));
    const auto b = CadlagPath::continuous({0.0, 1.0}, mat({{0.0, 0.1}, {0.0, -0.1}}));
    const auto zero = CadlagPath::constant(Vector::Zero(2), 1.0);
    CHECK(bcp_admissible(inst, zero, b).admissible);

    // K Y = -t decreases
    const auto y = CadlagPath::continuous({0.0, 1.0}, mat({{0.0, -0.5}, {0.0, -0.5}}));
    const auto rep = bcp_admissible(inst, y, b);
    CHECK_FALSE(rep.admissible);
    CHECK(rep.what == "monotonicity");

    // drives the first queue negative
    const auto big = CadlagPath::continuous({0.0, 1.0}, mat({{0.0, -3.0}, {0.0, 0.0}}));
    const auto rep2 = bcp_admissible(inst, zero, big);
    CHECK_FALSE(rep2.admissible);
    CHECK(rep2.what == "queue");
    CHECK(*rep2.index == 0);
}

TEST_CASE("single server regulator", "[ewf]") {
    const auto inst = single_server(0.3);
    const SimGrid grid{1e-3, 2.0, 5, 1};
    const auto b = sample_brownian(inst.b, inst.sigma_factor, grid, 0);
    const auto y = regulator_control(inst, b);
    CHECK(bcp_admissible(inst, y, b).admissible);

    // oracle: U(t) = max(0, sup_{s <= t} -(q + B(s))) on the grid
    double run = 0.0;
    double worst = 0.0;
    for (std::size_t i = 0; i < b.size(); ++i) {
        run = std::max(run, -(0.3 + b.value(i)(0)));
        worst = std::max(worst, std::abs(y.scalar_at(b.time(i)) - run));
    }
    CHECK(worst <= 1e-12);

    const auto wd = workload_reduction(inst.r, inst.k);
    const auto map = map_bcp_to_ewf(inst, wd, y, b);
    CHECK(map.w(0) == 0.3);
    CHECK(map.state_residual <= 1e-12);
    const auto sol = skorohod_solve(shift(b, inst.q), PolyCone::orthant(1), vec({1}));
    for (std::size_t i = 0; i < b.size(); i += 50) {
        CHECK(map.w_path.scalar_at(b.time(i)) == Approx(sol.psi.scalar_at(b.time(i))).margin(1e-12));
        CHECK(map.u.scalar_at(b.time(i)) == Approx(sol.eta.scalar_at(b.time(i))).margin(1e-12));
    }

    const auto eq = bcp_cost_and_equivalence(inst, wd, y, b, 2.0);
    CHECK(eq.fiber_constant);
    REQUIRE(eq.gap);
    CHECK(*eq.gap <= 1e-6);
}

TEST_CASE("mapping the two-class network", "[ewf]") {
    const auto inst = two_class(vec({1, 1}));
    const auto wd = workload_reduction(inst.r, inst.k);
    const auto b = CadlagPath::continuous({0.0, 0.5, 1.0}, mat({{0.0, 0.2, -0.1}, {0.0, -0.3, 0.4}}));
    const auto zero = CadlagPath::constant(Vector::Zero(2), 1.0);
    const auto map = map_bcp_to_ewf(inst, wd, zero, b);
    CHECK(map.w(0) == 3.0);
    CHECK(map.state_residual == 0.0);
    for (double t : {0.0, 0.25, 0.5, 1.0}) {
        CHECK(map.u.scalar_at(t) == 0.0);
        CHECK(map.w_path.scalar_at(t) == Approx(3.0 + b.at(t).sum()).margin(1e-14));
    }

    // moving mass inside ker K leaves the workload alone
    const auto shuffle = CadlagPath::continuous({0.0, 1.0}, mat({{0.0, 0.5}, {0.0, -0.5}}));
    const auto map2 = map_bcp_to_ewf(inst, wd, shuffle, b);
    for (double t : {0.0, 0.3, 0.5, 0.9, 1.0}) {
        CHECK(map2.u.scalar_at(t) == 0.0);
        CHECK(map2.w_path.scalar_at(t) == Approx(map.w_path.scalar_at(t)).margin(1e-14));
    }

    const auto ewf = ewf_instance(inst, wd);
    CHECK(check_admissible(ewf, map.w, map.b, map.u).admissible);
    CHECK(check_admissible(ewf, map2.w, map2.b, map2.u).admissible);
}

TEST_CASE("cost equivalence on seeded paths", "[ewf]") {
    const auto inst = two_class(vec({1, 1}));
    const auto wd = workload_reduction(inst.r, inst.k);
    const auto ewf = ewf_instance(inst, wd);
    const SimGrid grid{1e-2, 5.0, 99, 10};
    for (std::uint64_t i = 0; i < 10; ++i) {
        const auto b = sample_brownian(inst.b, inst.sigma_factor, grid, i);
        const auto y = regulator_control(inst, b);
        const auto map = map_bcp_to_ewf(inst, wd, y, b);
        CHECK(map.state_residual <= 1e-12);
        CHECK(check_admissible(ewf, map.w, map.b, map.u).admissible);
        const auto eq = bcp_cost_and_equivalence(inst, wd, y, b, grid.horizon);
        REQUIRE(eq.gap);
        CHECK(*eq.gap <= 1e-6);
    }

    const auto skewed = two_class(vec({2, 1}));
    const auto b = sample_brownian(skewed.b, skewed.sigma_factor, grid, 0);
    const auto eq = bcp_cost_and_equivalence(skewed, wd, regulator_control(skewed, b), b, grid.horizon);
    CHECK_FALSE(eq.fiber_constant);
    CHECK_FALSE(eq.gap);
    CHECK_FALSE(eq.j_ewf);
    CHECK(eq.note.find("fiber") != std::string::npos);
}

TEST_CASE("BCP instance validation and JSON", "[ewf]") {
    const auto inst = two_class(vec({1, 1}));
    const auto back = bcp_from_json(to_json(inst));
    CHECK(back.r == inst.r);
    CHECK(back.k == inst.k);
    CHECK(back.q == inst.q);
    CHECK(back.cost == inst.cost);
    CHECK_THROWS_AS(two_class(vec({1, 0})), Error);
    CHECK_THROWS_AS(make_bcp_instance(Matrix::Identity(2, 2), mat({{1, 1}}), vec({-1, 0}), vec({0, 0}),
                                      Matrix::Identity(2, 2), 1.0, vec({1}), vec({1, 1})),
                    Error);
    CHECK_THROWS_AS(make_bcp_instance(Matrix::Identity(2, 2), mat({{1, 1}}), vec({1, 0}), vec({0, 0}),
                                      Matrix::Zero(2, 2), 1.0, vec({1}), vec({1, 1})),
                    Error);
    CHECK_THROWS_AS(bcp_from_json(nlohmann::json{{"R", 1}}), Error);
}
