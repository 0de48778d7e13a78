#include <catch2/catch_amalgamated.hpp>

#include "scc/error.hpp"
#include "scc/skorohod.hpp"

#include <cmath>
#include <random>

using namespace scc;
using Catch::Approx;

namespace {

Matrix row(std::initializer_list<double> xs) {
    Matrix m(1, static_cast<Eigen::Index>(xs.size()));
    Eigen::Index i = 0;
    for (double x : xs) m(0, i++) = x;
    return m;
}

Vector vec(std::initializer_list<double> xs) {
    Vector v(static_cast<Eigen::Index>(xs.size()));
    Eigen::Index i = 0;
    for (double x : xs) v(i++) = x;
    return v;
}

// Implicit recursion eta_i = max(eta_{i-1}, g(phi(t_i))) on a dense grid.
double recursion_eta(const CadlagPath& phi, const Shortfall& g, double t_end, int n) {
    double eta = 0.0;
    for (int i = 0; i <= n; ++i) eta = std::max(eta, g(phi.at(t_end * i / n)));
    return eta;
}

CadlagPath random_walk(std::mt19937_64& rng, Eigen::Index dim, int steps, double dt, const Vector& start,
                       bool jumps) {
    std::normal_distribution<double> n(0.0, 1.0);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<double> ts{0.0};
    Matrix l(dim, steps + 1), v(dim, steps + 1);
    l.col(0) = start;
    v.col(0) = start;
    for (int i = 1; i <= steps; ++i) {
        ts.push_back(i * dt);
        Vector step(dim);
        for (Eigen::Index d = 0; d < dim; ++d) step(d) = std::sqrt(dt) * n(rng) - 0.3 * dt;
        l.col(i) = v.col(i - 1) + step;
        v.col(i) = l.col(i);
        if (jumps && u(rng) < 0.05) {
            for (Eigen::Index d = 0; d < dim; ++d) v(d, i) += 0.5 * n(rng);
        }
    }
    return CadlagPath(ts, l, v);
}

}  // namespace

TEST_CASE("one-dimensional running supremum", "[skorohod]") {
    const auto h = PolyCone::orthant(1);
    const auto phi = CadlagPath::continuous({0.0, 1.0}, row({0.0, -1.0}));
    const auto sol = skorohod_solve(phi, h, vec({1.0}));
    for (double t : {0.0, 0.3, 1.0}) {
        CHECK(sol.eta.scalar_at(t) == Approx(t).margin(1e-15));
        CHECK(sol.psi.scalar_at(t) == Approx(0.0).margin(1e-15));
    }
}

TEST_CASE("paths inside the cone are untouched", "[skorohod]") {
    const auto q = PolyCone::orthant(2);
    Matrix v(2, 3);
    v << 1, 0.5, 2,
         1, 3, 0;
    const auto phi = CadlagPath::continuous({0.0, 1.0, 2.0}, v);
    const auto sol = skorohod_solve(phi, q, vec({1, 1}).normalized());
    CHECK(sol.eta.values().norm() == 0.0);
    CHECK(sol.psi.values() == phi.values());
}

TEST_CASE("quadrant example", "[skorohod]") {
    const auto q = PolyCone::orthant(2);
    const Vector v0 = vec({1, 1}).normalized();
    Matrix v(2, 2);
    v << 1, 1,
         1, -1;
    const auto phi = CadlagPath::continuous({0.0, 1.0}, v);
    const auto sol = skorohod_solve(phi, q, v0);
    CHECK(sol.eta.scalar_at(1.0) == Approx(std::sqrt(2.0)).epsilon(1e-14));
    CHECK((sol.psi.at(1.0) - vec({2, 0})).norm() < 1e-14);
    // the crossing at t = 1/2 is a breakpoint
    bool has_half = false;
    for (double t : sol.eta.times()) has_half = has_half || std::abs(t - 0.5) < 1e-15;
    CHECK(has_half);
    const Shortfall g(q, v0);
    for (double t : {0.25, 0.6, 0.8, 1.0}) {
        CHECK(sol.eta.scalar_at(t) == Approx(std::sqrt(2.0) * std::max(2 * t - 1, 0.0)).margin(1e-14));
        CHECK(sol.eta.scalar_at(t) == Approx(recursion_eta(phi, g, t, 20000)).margin(1e-12));
    }
}

TEST_CASE("initial state and direction are checked", "[skorohod]") {
    const auto h = PolyCone::orthant(1);
    const auto phi = CadlagPath::continuous({0.0, 1.0}, row({-0.1, 0.0}));
    try {
        skorohod_solve(phi, h, vec({1.0}));
        FAIL("expected InitialStateOutsideCone");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::InitialStateOutsideCone);
    }
    CHECK_THROWS_AS(skorohod_solve(phi, h, vec({-1.0})), Error);
}

TEST_CASE("jumps of the input are reflected instantly", "[skorohod]") {
    const auto h = PolyCone::orthant(1);
    const CadlagPath phi({0.0, 1.0, 2.0}, row({0.5, 0.5, -1.0}), row({0.5, -2.0, -1.0}));
    const auto sol = skorohod_solve(phi, h, vec({1.0}));
    CHECK(sol.eta.left_limit(1.0)(0) == 0.0);
    CHECK(sol.eta.scalar_at(1.0) == Approx(2.0));
    CHECK(sol.psi.scalar_at(1.0) == Approx(0.0));
    CHECK(sol.eta.scalar_at(2.0) == Approx(2.0));
    CHECK(sol.psi.scalar_at(2.0) == Approx(1.0));
}

TEST_CASE("properties on random paths", "[skorohod]") {
    std::mt19937_64 rng(2024);
    Matrix wedge_facets(2, 2);
    wedge_facets << 1, 0, -1, 1;
    const std::vector<std::pair<PolyCone, Vector>> cases = {
        {PolyCone::orthant(2), vec({1, 1}).normalized()},
        {PolyCone(wedge_facets), vec({1, 3}).normalized()},
    };
    for (const auto& [cone, v0] : cases) {
        const Shortfall g(cone, v0);
        for (int trial = 0; trial < 100; ++trial) {
            const auto phi = random_walk(rng, 2, 200, 0.01, vec({0.2, 0.5}), trial % 2 == 0);
            const auto sol = skorohod_solve(phi, cone, v0);
            const auto check = verify_skorohod(phi, sol, cone, v0);
            INFO(trial);
            for (const auto& f : check.failures) INFO(f);
            CHECK(check.ok());
            // idempotence
            const auto again = skorohod_solve(sol.psi, cone, v0);
            CHECK(again.eta.values().cwiseAbs().maxCoeff() <= 1e-12);
            // implicit recursion at the breakpoints of phi
            double eta = 0.0;
            for (std::size_t i = 0; i < phi.size(); ++i) {
                if (i > 0) eta = std::max(eta, g(phi.left(i)));
                eta = std::max(eta, g(phi.value(i)));
                CHECK(sol.eta.scalar_at(phi.time(i)) == Approx(eta).margin(1e-12));
            }
            // Lipschitz ratio against a perturbed input
            const auto other = random_walk(rng, 2, 200, 0.01, vec({0.3, 0.4}), false);
            const Matrix half = 0.5 * Matrix::Identity(2, 2);
            const auto mixed = linear_combination(Vector::Zero(2), {{half, &phi}, {half, &other}});
            const auto lr = lipschitz_ratio(phi, mixed, cone, v0, 2.0);
            CHECK(lr.num <= lr.bound);
        }
    }
}

TEST_CASE("lipschitz ratio", "[skorohod]") {
    const auto h = PolyCone::orthant(1);
    const auto phi = CadlagPath::continuous({0.0, 1.0, 2.0}, row({0.0, -1.0, 0.5}));
    const auto lr0 = lipschitz_ratio(phi, phi, h, vec({1.0}), 2.0);
    CHECK(lr0.num == 0.0);
    CHECK(lr0.bound == Approx(5.0));
    const double c = 0.3;
    const auto shifted = shift(phi, vec({c}));
    const auto lr = lipschitz_ratio(phi, shifted, h, vec({1.0}), 2.0);
    CHECK(lr.num <= lr.bound);
    const auto a = skorohod_solve(phi, h, vec({1.0}));
    const auto b = skorohod_solve(shifted, h, vec({1.0}));
    CHECK(sup_norm(a.eta - b.eta, 2.0) <= c + 1e-15);
}
