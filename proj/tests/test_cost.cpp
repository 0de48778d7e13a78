#include <catch2/catch_amalgamated.hpp>

#include "scc/cost.hpp"
#include "scc/error.hpp"

#include <cmath>
#include <numbers>
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

ProblemInstance one_d(double b, double sigma, RunningCost cost = RunningCost::linear(vec({1}))) {
    return make_instance(mat({{1}}), vec({b}), mat({{sigma}}), PolyCone::orthant(1), PolyCone::orthant(1), 1.0,
                         vec({1}), std::move(cost));
}

// Random nondecreasing piecewise-linear control with occasional jumps.
CadlagPath random_control(std::mt19937_64& rng, double horizon) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const int n = 2 + static_cast<int>(unit(rng) * 10);
    std::vector<double> times{0.0};
    for (int i = 1; i <= n; ++i) times.push_back(horizon * i / n);
    Matrix left(1, n + 1), values(1, n + 1);
    double level = 0.0;
    left(0, 0) = 0.0;
    level = unit(rng) < 0.5 ? unit(rng) : 0.0;
    values(0, 0) = level;
    for (int i = 1; i <= n; ++i) {
        level += unit(rng);
        left(0, i) = level;
        if (unit(rng) < 0.3) level += unit(rng);
        values(0, i) = level;
    }
    return CadlagPath(std::move(times), std::move(left), std::move(values));
}

}  // namespace

TEST_CASE("growth validation", "[cost]") {
    auto lin = RunningCost::linear(vec({1}));
    lin.set_certificate({1, 0, 1, 1});
    CHECK(validate_growth(lin, PolyCone::orthant(1)).pass);

    auto quad = RunningCost::power(1.0, 2.0);
    quad.set_certificate({1, 0, 1, 1});
    const auto rep = validate_growth(quad, PolyCone::orthant(1));
    CHECK_FALSE(rep.pass);
    CHECK(rep.worst_radius == Approx(100.0).epsilon(0.01));

    auto flat = RunningCost::power(1.0, 0.0);
    flat.set_certificate({1, 0, 1, 0});
    const auto rep2 = validate_growth(flat, PolyCone::orthant(2));
    CHECK(rep2.pass);
    CHECK(rep2.samples == 10000);

    auto derived = RunningCost::linear(vec({1, 2}));
    derived.derive_certificate(PolyCone::orthant(2));
    CHECK(validate_growth(derived, PolyCone::orthant(2)).pass);
}

TEST_CASE("pathwise cost examples", "[cost]") {
    const auto inst = one_d(0.0, 1.0);
    const double horizon = 40.0;
    const auto w = CadlagPath::constant(vec({2}), horizon);
    const auto zero = CadlagPath::constant(vec({0}), horizon);
    const auto c = pathwise_cost(inst, zero, w, horizon);
    CHECK(c.holding == Approx(2.0).epsilon(1e-12));
    CHECK(c.control == 0.0);

    const auto jump = CadlagPath::step(vec({1}), 1.5, horizon);
    const auto cj = pathwise_cost(inst, jump, w, horizon, false);
    CHECK(cj.control == Approx(std::exp(-1.5)).epsilon(1e-14));

    const auto initial = CadlagPath::step(vec({0.7}), 0.0, horizon);
    const auto ci = pathwise_cost(inst, initial, w, horizon, false);
    CHECK(ci.control == Approx(0.7).epsilon(1e-14));
    CHECK(ci.total == ci.holding + ci.control);
}

TEST_CASE("pathwise cost rejects inadmissible pairs", "[cost]") {
    const auto inst = one_d(0.0, 1.0);
    const auto w = CadlagPath::continuous({0.0, 1.0}, mat({{0.0, -1.0}}));
    CHECK_THROWS_AS(pathwise_cost(inst, CadlagPath::constant(vec({0}), 1.0), w, 1.0), Error);
}

TEST_CASE("integration by parts for the control term", "[cost][property]") {
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 200; ++trial) {
        const double horizon = 5.0;
        const double gamma = 0.2 + 0.1 * (trial % 20);
        const auto u = random_control(rng, horizon);
        const double lhs = discounted_stieltjes(gamma, u, horizon);
        const double rhs = std::exp(-gamma * horizon) * u.scalar_at(horizon) + gamma * discounted_integral(gamma, u, horizon);
        CHECK(lhs == Approx(rhs).epsilon(1e-12));
    }
}

TEST_CASE("costs are nonnegative and monotone in the horizon", "[cost][property]") {
    const auto inst = one_d(0.0, 1.0);
    const SimGrid grid{0.01, 4.0, 5, 1};
    for (std::uint64_t i = 0; i < 20; ++i) {
        const auto b = sample_brownian(inst, grid, i);
        const auto pol = reflection_policy(inst, vec({0.2}), b);
        const auto short_run = pathwise_cost(inst, pol.u, pol.w, 2.0);
        const auto long_run = pathwise_cost(inst, pol.u, pol.w, 4.0);
        CHECK(short_run.holding >= 0.0);
        CHECK(short_run.control >= 0.0);
        CHECK(long_run.total >= short_run.total);
    }
}

TEST_CASE("Monte Carlo without noise is exact", "[cost]") {
    const auto inst = one_d(0.0, 0.0);
    const SimGrid grid{0.1, 10.0, 1, 50};
    const auto est = monte_carlo_cost(inst, vec({1.5}), make_reflection_policy(), grid);
    const auto direct = pathwise_cost(inst, CadlagPath::constant(vec({0}), 10.0), CadlagPath::constant(vec({1.5}), 10.0), 10.0);
    CHECK(est.value == Approx(direct.total).epsilon(1e-13));
    CHECK(est.std_error == 0.0);
    CHECK(est.paths == 50);
    CHECK(est.tail_bound > 0.0);

    // tail bound shrinks as the horizon grows
    const SimGrid longer{0.1, 20.0, 1, 50};
    CHECK(monte_carlo_cost(inst, vec({1.5}), make_reflection_policy(), longer).tail_bound < est.tail_bound);
}

TEST_CASE("Monte Carlo is independent of thread count", "[cost]") {
    const auto inst = one_d(0.0, 1.0);
    const SimGrid grid{0.01, 5.0, 123, 400};
    const auto a = monte_carlo_cost(inst, vec({0}), make_reflection_policy(), grid, 1);
    const auto b = monte_carlo_cost(inst, vec({0}), make_reflection_policy(), grid, 4);
    CHECK(a.value == b.value);
    CHECK(a.std_error == b.std_error);
    CHECK(a.tail_bound == b.tail_bound);
}

TEST_CASE("streaming and materialized reflection agree", "[cost]") {
    const auto inst = one_d(0.0, 1.0);
    const SimGrid grid{0.01, 5.0, 8, 50};
    Policy slow = make_reflection_policy();
    slow.streaming_reflection = false;
    const auto fast = monte_carlo(inst, vec({0.1}), make_reflection_policy(), grid);
    const auto mat_run = monte_carlo(inst, vec({0.1}), slow, grid);
    REQUIRE(fast.per_path.size() == mat_run.per_path.size());
    for (std::size_t i = 0; i < fast.per_path.size(); ++i) {
        CHECK(fast.per_path[i].holding == Approx(mat_run.per_path[i].holding).epsilon(1e-12));
        CHECK(fast.per_path[i].control == Approx(mat_run.per_path[i].control).epsilon(1e-12));
    }
}

TEST_CASE("Monte Carlo aborts on inadmissible paths", "[cost]") {
    const auto inst = one_d(0.0, 1.0);
    const SimGrid grid{0.01, 1.0, 31, 10};
    try {
        (void)monte_carlo_cost(inst, vec({0.5}), make_zero_policy(), grid);
        FAIL("expected NotAdmissible");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::NotAdmissible);
        const std::string what = e.what();
        CHECK(what.find("seed 31") != std::string::npos);
        CHECK(what.find("path") != std::string::npos);
    }
}

TEST_CASE("reflected Brownian motion, small sample", "[cost]") {
    const auto inst = one_d(0.0, 1.0);
    const SimGrid grid{1e-3, 20.0, 7, 2000};
    const auto est = monte_carlo_cost(inst, vec({0}), make_reflection_policy(), grid, 4);
    const double target = 1.0 / std::sqrt(2.0);
    CHECK(std::abs(est.holding - target) <= 4.0 * est.holding_se + 0.05);
    CHECK(std::abs(est.control - target) <= 4.0 * est.control_se + 0.05);
}

TEST_CASE("rescaled cost", "[cost]") {
    const auto inst = one_d(0.0, 1.0);
    const double horizon = 3.0;
    const auto zero = CadlagPath::constant(vec({0}), horizon);
    const auto w = CadlagPath::continuous({0.0, horizon}, mat({{1.0, 2.0}}));
    const auto r0 = rescaled_cost(inst, zero, w, horizon);
    CHECK(r0.gap_vs_direct == 0.0);

    const auto ramp = CadlagPath::continuous({0.0, 1.0, horizon}, mat({{0.0, 2.0, 2.5}}));
    const auto wr = state_process(vec({1}), zero, ramp, inst.g);
    const auto r1 = rescaled_cost(inst, ramp, wr, horizon);
    CHECK(r1.gap_vs_direct <= 1e-9);

    const SimGrid grid{0.01, 5.0, 44, 1};
    for (std::uint64_t i = 0; i < 20; ++i) {
        const auto b = sample_brownian(inst, grid, i);
        const auto pol = reflection_policy(inst, vec({0}), b);
        CHECK(rescaled_cost(inst, pol.u, pol.w, grid.horizon).gap_vs_direct <= 1e-6);
    }
    CHECK_THROWS_AS(rescaled_cost(inst, CadlagPath::step(vec({1}), 1.0, horizon), w, horizon), Error);
}

TEST_CASE("deterministic smoothing convergence", "[cost]") {
    const auto inst = one_d(0.0, 1.0);
    const double horizon = 40.0;
    const auto b = CadlagPath::constant(vec({0}), horizon);
    const auto u = CadlagPath::step(vec({1}), 1.0, horizon);
    const std::vector<int> ks = {2, 8, 32, 128};
    const auto table = convergence_study(inst, vec({0}), b, u, ks);
    const double tail = std::exp(-horizon);
    CHECK(table.base_cost == Approx(2.0 * std::exp(-1.0) - tail).epsilon(1e-12));
    for (const auto& row : table.rows) {
        // ramp over [1, 1 + a]: holding e^{-1}(1 - e^{-a}(1 + a))/a + e^{-1-a}, control e^{-1}(1 - e^{-a})/a
        const double a = 1.0 / row.k;
        const double e1 = std::exp(-1.0);
        const double oracle = e1 * (1.0 - std::exp(-a) * (1.0 + a)) / a + std::exp(-1.0 - a) - tail +
                              e1 * (1.0 - std::exp(-a)) / a;
        CHECK(row.cost == Approx(oracle).epsilon(1e-12));
        CHECK(row.error <= 2.0 / row.k);
        CHECK(row.sup_eta == 0.0);
    }
    CHECK(table.eventually_decreasing());

    const auto cont = convergence_study(inst, vec({0}), b, CadlagPath::continuous({0.0, horizon}, mat({{0.0, 1.0}})), ks);
    for (const auto& row : cont.rows) CHECK(row.error <= 1e-15);
}

TEST_CASE("moment decay diagnostics", "[cost]") {
    const SimGrid grid{0.01, 4.0, 3, 20};
    const auto still = one_d(0.0, 0.0);
    const auto t1 = moment_decay_check(still, vec({2}), make_reflection_policy(), grid, 2.0);
    REQUIRE(t1.rows.size() == 4);
    for (const auto& row : t1.rows) CHECK(row.value == Approx(std::exp(-row.t) * 4.0).epsilon(1e-12));
    CHECK(t1.decreasing);

    // discrete monitoring pulls |W|^2 down by about 2 * 0.5826 sqrt(dt) E|W(t)|
    const auto rbm = one_d(0.0, 1.0);
    const SimGrid big{1e-3, 8.0, 3, 4000};
    const auto t2 = moment_decay_check(rbm, vec({0}), make_reflection_policy(), big, 2.0, {2.0, 4.0, 6.0, 8.0}, 4);
    for (const auto& row : t2.rows) {
        const double bias = 2.0 * 0.5826 * std::sqrt(big.dt) * std::sqrt(2.0 * row.t / std::numbers::pi);
        CHECK(std::abs(row.value - std::exp(-row.t) * row.t) <= 4.0 * row.std_error + std::exp(-row.t) * bias);
    }
    CHECK(t2.decreasing);

    const auto exploding = one_d(5.0, 0.0);
    const SimGrid unit{0.01, 1.0, 3, 5};
    const auto t3 = moment_decay_check(exploding, vec({1}), make_zero_policy(), unit, 2.0);
    for (const auto& row : t3.rows) CHECK(row.value == Approx(std::exp(-row.t) * std::pow(1.0 + 5.0 * row.t, 2)).epsilon(1e-10));
    CHECK_FALSE(t3.decreasing);
}
