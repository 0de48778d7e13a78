#include <catch2/catch_amalgamated.hpp>

#include "scc/error.hpp"
#include "scc/paths.hpp"

#include <cmath>
#include <random>
#include <sstream>

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

// 1_{t >= s} on [0, T]
CadlagPath indicator(double s, double horizon, double size = 1.0) {
    return CadlagPath::step(vec({size}), s, horizon);
}

}  // namespace

TEST_CASE("path construction and evaluation", "[paths]") {
    const CadlagPath p({0.0, 1.0, 2.0}, row({0.0, 1.0, 3.0}), row({0.0, 2.0, 3.0}));
    CHECK(p.scalar_at(0.5) == Approx(0.5));
    CHECK(p.scalar_at(1.0) == Approx(2.0));
    CHECK(p.left_limit(1.0)(0) == Approx(1.0));
    CHECK(p.scalar_at(1.5) == Approx(2.5));
    CHECK(p.max_jump() == Approx(1.0));
    CHECK_FALSE(p.is_continuous());
    CHECK_THROWS_AS(CadlagPath({0.0, 0.0}, row({0, 0}), row({0, 0})), Error);
    CHECK_THROWS_AS(CadlagPath({0.5, 1.0}, row({0, 0}), row({0, 0})), Error);
    try {
        (void)p.at(2.5);
        FAIL("expected HorizonExhausted");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::HorizonExhausted);
    }
}

TEST_CASE("increments in cone", "[paths]") {
    const auto q = PolyCone::orthant(2);
    Matrix v(2, 2);
    v << 0, 1, 0, 1;
    CHECK(increments_in_cone(CadlagPath::continuous({0.0, 1.0}, v), q));
    v << 0, 1, 0, -1;
    CHECK_FALSE(increments_in_cone(CadlagPath::continuous({0.0, 1.0}, v), q));
    CHECK(increments_in_cone(CadlagPath::step(vec({1, 0}), 1.0, 2.0), q));
    CHECK_FALSE(increments_in_cone(CadlagPath::step(vec({1, -0.1}), 1.0, 2.0), q));
}

TEST_CASE("jump decomposition", "[paths]") {
    const auto c = CadlagPath::continuous({0.0, 2.0}, row({0.0, 2.0}));
    auto d = decompose_jumps(c);
    CHECK(d.continuous_part.values().isApprox(c.values()));
    CHECK(d.jump_part.values().norm() == 0.0);

    const auto j = indicator(1.0, 2.0);
    d = decompose_jumps(j);
    CHECK(d.continuous_part.values().norm() == 0.0);
    CHECK(d.jump_part.values() == j.values());

    // t + 1_{t>=1}
    const auto u = c + j;
    d = decompose_jumps(u);
    for (double t : {0.0, 0.5, 1.0, 1.5, 2.0}) {
        CHECK(d.continuous_part.scalar_at(t) == Approx(t));
        CHECK(d.jump_part.scalar_at(t) == (t >= 1.0 ? 1.0 : 0.0));
    }
    CHECK(d.continuous_part.is_continuous());

    // initial jump lands in the jump part; reconstruction is exact
    const CadlagPath w({0.0, 1.0, 3.0}, row({0.0, 2.5, 4.0}), row({0.5, 3.0, 4.0}));
    d = decompose_jumps(w);
    CHECK(d.jump_part.value(0)(0) == 0.5);
    const auto back = d.continuous_part + d.jump_part;
    CHECK(back.values() == w.values());
    for (std::size_t i = 1; i < w.size(); ++i) CHECK(back.left(i)(0) == w.left(i)(0));
}

TEST_CASE("mollifier", "[paths]") {
    const auto m = mollify(indicator(1.0, 3.0), 2);
    for (double t : {0.0, 0.5, 1.0}) CHECK(m.scalar_at(t) == Approx(0.0).margin(1e-15));
    CHECK(m.scalar_at(1.25) == Approx(0.5));
    CHECK(m.scalar_at(1.5) == Approx(1.0));
    CHECK(m.scalar_at(2.7) == Approx(1.0));
    CHECK(m.is_continuous());

    for (int k : {1, 3, 10}) {
        const auto c = mollify(CadlagPath::step(vec({2.5}), 0.0, 4.0), k);
        for (double t : {0.0, 0.05, 0.3, 1.0, 3.9}) CHECK(c.scalar_at(t) == Approx(2.5));
    }
    CHECK(mollify(CadlagPath::constant(vec({0.0}), 2.0), 4).values().norm() == 0.0);
    CHECK_THROWS_AS(mollify(CadlagPath::continuous({0.0, 1.0}, row({0.0, 1.0})), 2), Error);
}

TEST_CASE("mollifier convergence and domination", "[paths]") {
    // Ud with jumps at 0, 0.7 and 2 in the quadrant
    Matrix l(2, 4), v(2, 4);
    l << 0, 1, 1.5, 1.5,
         0, 0, 2, 3;
    v << 1, 1.5, 1.5, 1.5,
         0, 2, 3, 3;
    const CadlagPath ud({0.0, 0.7, 2.0, 4.0}, l, v);
    const Vector u_hat1 = vec({1, 1}).normalized();
    const double a0 = 1.0 / std::sqrt(2.0);
    const double top = ud.value(3).dot(u_hat1);
    std::vector<double> probe = {0.3, 1.1, 1.9, 2.4, 3.5};
    std::vector<double> prev(probe.size(), 1e300);
    for (int k : {2, 8, 32, 128}) {
        const auto m = mollify(ud, k);
        CHECK(m.is_continuous());
        CHECK(increments_in_cone(m, PolyCone::orthant(2), 1e-12));
        for (std::size_t i = 0; i < m.size(); ++i) CHECK(a0 * m.value(i).norm() <= top + 1e-12);
        for (std::size_t i = 0; i < probe.size(); ++i) {
            const double err = (m.at(probe[i]) - ud.at(probe[i])).norm();
            CHECK(err <= prev[i] + 1e-15);
            prev[i] = err;
        }
    }
    for (double e : prev) CHECK(e == Approx(0.0).margin(1e-12));
}

TEST_CASE("stieltjes integrals", "[paths]") {
    const auto one = CadlagPath::constant(vec({1.0}), 5.0);
    const auto id5 = CadlagPath::continuous({0.0, 5.0}, row({0.0, 5.0}));
    CHECK(stieltjes_integral(one, id5, 5.0) == Approx(5.0));

    const auto f = CadlagPath::continuous({0.0, 1.0}, row({0.0, 1.0}));
    const auto two_t = CadlagPath::continuous({0.0, 1.0}, row({0.0, 2.0}));
    CHECK(stieltjes_integral(f, two_t, 1.0) == Approx(1.0));

    // e^{-t} on a fine grid against a unit jump at s
    const double s = 0.8;
    std::vector<double> ts;
    Matrix ev(1, 10001);
    for (int i = 0; i <= 10000; ++i) {
        ts.push_back(2.0 * i / 10000.0);
        ev(0, i) = std::exp(-ts.back());
    }
    const auto ef = CadlagPath::continuous(ts, ev);
    CHECK(stieltjes_integral(ef, indicator(s, 2.0), 2.0) == Approx(std::exp(-s)).epsilon(1e-6));
    CHECK(stieltjes_integral([](double t) { return std::exp(-t); }, indicator(s, 2.0), 2.0) ==
          Approx(std::exp(-s)).epsilon(1e-14));

    // int 1 dF = F(T), including the mass F(0) at 0
    const CadlagPath big({0.0, 1.0, 2.0}, row({0.0, 1.5, 2.0}), row({0.5, 1.7, 2.0}));
    CHECK(stieltjes_integral(CadlagPath::constant(vec({1.0}), 2.0), big, 2.0) == Approx(2.0));
    CHECK(stieltjes_integral(CadlagPath::constant(vec({1.0}), 2.0), big, 1.5) == Approx(big.scalar_at(1.5)));

    const CadlagPath dec({0.0, 1.0}, row({0.0, 0.0}), row({1.0, 0.5}));
    CHECK_THROWS_AS(stieltjes_integral(one, dec, 1.0), Error);
}

TEST_CASE("discounted integrals are exact", "[paths]") {
    const double g = 1.3;
    const CadlagPath f({0.0, 0.4, 1.7, 3.0}, row({0.0, 1.0, -2.0, 0.5}), row({0.2, 1.0, 0.0, 0.5}));
    // oracle: fine composite Simpson on each linear piece
    double oracle = 0.0;
    for (std::size_t i = 1; i < f.size(); ++i) {
        const double a = f.time(i - 1), b = f.time(i);
        const int n = 2000;
        const double h = (b - a) / n;
        auto y = [&](double t) {
            const double w = (t - a) / (b - a);
            return std::exp(-g * t) * ((1 - w) * f.value(i - 1)(0) + w * f.left(i)(0));
        };
        double s = y(a) + y(b);
        for (int j = 1; j < n; ++j) s += (j % 2 ? 4.0 : 2.0) * y(a + j * h);
        oracle += s * h / 3.0;
    }
    CHECK(discounted_integral(g, f, 3.0) == Approx(oracle).epsilon(1e-12));

    const CadlagPath big({0.0, 1.0, 2.5}, row({0.0, 2.0, 2.5}), row({0.3, 2.4, 2.5}));
    const double expect = 0.3 + 1.7 * (1.0 - std::exp(-g)) / g + 0.4 * std::exp(-g) +
                          (0.1 / 1.5) * (std::exp(-g) - std::exp(-2.5 * g)) / g;
    CHECK(discounted_stieltjes(g, big, 2.5) == Approx(expect).epsilon(1e-13));

    for (int m = 0; m <= 2; ++m) {
        for (double x : {1e-9, 0.1, 0.4999, 0.5, 0.5001, 3.0, 50.0}) {
            // Simpson oracle
            const int n = 20000;
            double s = 0.0;
            for (int j = 0; j <= n; ++j) {
                const double u = static_cast<double>(j) / n;
                const double w = (j == 0 || j == n) ? 1.0 : (j % 2 ? 4.0 : 2.0);
                s += w * std::pow(u, m) * std::exp(-x * u);
            }
            CHECK(exp_moment(m, x) == Approx(s / (3.0 * n)).epsilon(1e-10));
        }
    }
}

TEST_CASE("sup norm", "[paths]") {
    CHECK(sup_norm(CadlagPath::continuous({0.0, 2.0}, row({0.0, 2.0})), 2.0) == Approx(2.0));
    const CadlagPath jumpy({0.0, 1.0, 2.0}, row({0.0, 1.0, 0.0}), row({0.0, 5.0, 0.0}));
    CHECK(sup_norm(jumpy, 2.0) == Approx(5.0));
    Matrix v(2, 2);
    v << 1, 0, 0, 1;
    CHECK(sup_norm(CadlagPath::continuous({0.0, 1.0}, v), 1.0) == Approx(1.0));
    CHECK(sup_norm(jumpy, 0.5) == Approx(0.5));
}

TEST_CASE("linear combination and resampling", "[paths]") {
    const CadlagPath a({0.0, 1.0, 2.0}, row({0.0, 1.0, 3.0}), row({0.0, 2.0, 3.0}));
    const CadlagPath b = CadlagPath::continuous({0.0, 0.5, 2.0}, row({1.0, 0.0, 3.0}));
    const auto s = a + b;
    CHECK(s.size() == 4);
    for (double t : {0.0, 0.25, 0.5, 0.9, 1.0, 1.6, 2.0}) CHECK(s.scalar_at(t) == Approx(a.scalar_at(t) + b.scalar_at(t)));
    CHECK(s.left_limit(1.0)(0) == Approx(1.0 + b.scalar_at(1.0)));
    const auto r = resample(a, {0.0, 0.3, 1.0, 1.5, 2.0});
    CHECK(r.scalar_at(0.3) == Approx(0.3));
    CHECK(r.left(2)(0) == Approx(1.0));
    const auto tr = truncate(a, 1.5);
    CHECK(tr.horizon() == 1.5);
    CHECK(tr.scalar_at(1.5) == Approx(2.5));
}

TEST_CASE("json and csv round trip", "[paths]") {
    const CadlagPath a({0.0, 1.0, 2.0}, row({0.0, 1.0, 3.0}), row({0.25, 2.0, 3.0}));
    const auto back = path_from_json(nlohmann::json::parse(to_json(a).dump()));
    CHECK(back.times() == a.times());
    CHECK(back.values() == a.values());
    CHECK(back.lefts() == a.lefts());
    std::ostringstream os;
    write_csv(os, a);
    CHECK(os.str().rfind("t,left_0,value_0\n", 0) == 0);
    CHECK_THROWS_AS(path_from_json(nlohmann::json::parse(R"({"times":[0,1],"values":[[0]]})")), Error);
}
