#include <catch2/catch_amalgamated.hpp>

#include "scc/error.hpp"
#include "scc/timechange.hpp"

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

// c(t) = inf{s : a(s) > t} by bisection on the right-continuous a.
double inverse_by_bisection(const CadlagPath& a, double t) {
    double lo = 0.0, hi = a.horizon();
    if (a.scalar_at(0.0) > t) return 0.0;
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        (a.scalar_at(mid) > t ? hi : lo) = mid;
    }
    return hi;
}

}  // namespace

TEST_CASE("stretch clocks", "[timechange]") {
    const Vector u_hat1 = vec({1.0});
    auto tc = stretch(CadlagPath::constant(vec({0.0}), 3.0), u_hat1);
    for (double t : {0.0, 1.0, 2.5}) {
        CHECK(tc.forward.scalar_at(t) == Approx(t));
        CHECK(tc.inverse.scalar_at(t) == Approx(t));
    }
    tc = stretch(CadlagPath::continuous({0.0, 2.0}, row({0.0, 4.0})), u_hat1);
    CHECK(tc.forward.scalar_at(1.0) == Approx(3.0));
    CHECK(tc.inverse.scalar_at(3.0) == Approx(1.0));
    CHECK(tc.inverse.scalar_at(4.5) == Approx(1.5));

    tc = stretch(CadlagPath::continuous({0.0, 1.0, 3.0}, row({0.0, 1.0, 1.0})), u_hat1);
    CHECK(tc.forward.scalar_at(1.0) == Approx(2.0));
    CHECK(tc.forward.scalar_at(2.0) == Approx(3.0));
    CHECK(tc.inverse.scalar_at(1.0) == Approx(0.5));
    CHECK(tc.inverse.scalar_at(2.0) == Approx(1.0));
    CHECK(tc.inverse.scalar_at(3.0) == Approx(2.0));

    CHECK_THROWS_AS(stretch(CadlagPath::step(vec({1.0}), 1.0, 2.0), u_hat1), Error);
    CHECK_THROWS_AS(stretch(CadlagPath::continuous({0.0, 1.0}, row({0.0, -1.0})), u_hat1), Error);
}

TEST_CASE("right inverse", "[timechange]") {
    auto c = right_inverse(CadlagPath::continuous({0.0, 2.0}, row({0.0, 4.0})));
    CHECK(c.scalar_at(1.0) == Approx(0.5));

    // flat at level 1 on [1, 2]
    c = right_inverse(CadlagPath::continuous({0.0, 1.0, 2.0, 3.0}, row({0.0, 1.0, 1.0, 2.0})));
    CHECK(c.left_limit(1.0)(0) == Approx(1.0));
    CHECK(c.scalar_at(1.0) == Approx(2.0));
    CHECK(c.scalar_at(0.5) == Approx(0.5));

    // jump 1 -> 2 at s = 1
    const CadlagPath a({0.0, 1.0, 2.0}, row({0.0, 1.0, 3.0}), row({0.0, 2.0, 3.0}));
    c = right_inverse(a);
    for (double t : {1.0, 1.3, 1.99}) CHECK(c.scalar_at(t) == Approx(1.0));
    CHECK(c.scalar_at(2.5) == Approx(1.5));
    try {
        (void)c.at(3.5);
        FAIL("expected HorizonExhausted");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::HorizonExhausted);
    }
    for (double t = 0.0; t < 3.0; t += 0.01) CHECK(c.scalar_at(t) == Approx(inverse_by_bisection(a, t)).margin(1e-12));
}

TEST_CASE("rescaling", "[timechange]") {
    const CadlagPath x({0.0, 1.0, 2.0}, row({0.0, 1.0, 3.0}), row({0.0, 2.0, 3.0}));
    const auto same = rescale_path(x, CadlagPath::continuous({0.0, 2.0}, row({0.0, 2.0})));
    for (double t : {0.0, 0.5, 1.0, 1.5, 2.0}) CHECK(same.scalar_at(t) == Approx(x.scalar_at(t)));
    CHECK(same.left_limit(1.0)(0) == Approx(1.0));

    // t^2 on a grid composed with t/2
    std::vector<double> ts;
    Matrix sq(1, 41);
    for (int i = 0; i <= 40; ++i) {
        ts.push_back(i * 0.1);
        sq(0, i) = ts.back() * ts.back();
    }
    const auto half = rescale_path(CadlagPath::continuous(ts, sq), CadlagPath::continuous({0.0, 4.0}, row({0.0, 2.0})));
    for (int i = 0; i <= 20; ++i) CHECK(half.scalar_at(2.0 * ts[i]) == Approx(ts[i] * ts[i]).margin(1e-14));

    const auto u = CadlagPath::continuous({0.0, 2.0}, row({0.0, 2.0}));
    const auto c = right_inverse(CadlagPath::continuous({0.0, 2.0}, row({0.0, 4.0})));
    const auto uh = rescale_path(u, c);
    CHECK(uh.scalar_at(3.0) == Approx(1.5));
    CHECK_THROWS_AS(rescale_path(u, CadlagPath::continuous({0.0, 1.0}, row({0.0, 3.0}))), Error);
}

TEST_CASE("change of variables", "[timechange]") {
    // f(s) = s, a(s) = 2s: both sides equal T^2
    const double horizon = 1.5;
    const auto fa = CadlagPath::continuous({0.0, horizon}, row({0.0, horizon}));
    const auto aa = CadlagPath::continuous({0.0, horizon}, row({0.0, 2 * horizon}));
    const auto r = cov_identity_check(fa, aa);
    CHECK(r.lhs == Approx(horizon * horizon));
    CHECK(r.rhs == Approx(horizon * horizon));
    CHECK(r.gap <= 1e-12);

    const CadlagPath clock({0.0, 1.0, 2.0, 3.0}, row({0.0, 1.0, 1.0, 3.0}), row({0.0, 1.0, 1.5, 3.0}));
    const auto one = cov_identity_check(CadlagPath::constant(vec({1.0}), 3.0), clock);
    CHECK(one.lhs == Approx(3.0));
    CHECK(one.gap <= 1e-12);
}

TEST_CASE("change of variables against a Riemann oracle", "[timechange]") {
    // a has a flat piece on [1, 1.5] and a jump at 2; f is piecewise linear with a jump
    const CadlagPath a({0.0, 1.0, 1.5, 2.0, 3.0}, row({0.0, 1.0, 1.0, 1.8, 3.5}), row({0.0, 1.0, 1.0, 2.4, 3.5}));
    const CadlagPath f({0.0, 0.7, 2.2, 3.0}, row({1.0, 2.0, 0.5, 1.0}), row({1.0, 0.3, 0.9, 1.0}));
    const CadlagPath big({0.0, 0.9, 2.0, 3.5}, row({0.0, 0.45, 2.0, 3.0}), row({0.2, 0.8, 2.1, 3.0}));
    for (const auto& bf : {std::optional<CadlagPath>{}, std::optional<CadlagPath>{big}}) {
        const auto r = cov_identity_check(f, a, bf);
        CHECK(r.gap <= 1e-9);
        // rhs oracle: midpoint Riemann-Stieltjes sums against the continuous part of F,
        // with c by bisection, plus f(c(s-)) at the jumps of F
        const int n = 1000000;
        const double end = a.scalar_at(3.0);
        auto jumps_upto = [&](double s) {
            double acc = 0.0;
            if (!bf) return acc;
            for (std::size_t i = 1; i < bf->size(); ++i)
                if (bf->time(i) <= s) acc += bf->value(i)(0) - bf->left(i)(0);
            return acc;
        };
        auto cont = [&](double s) { return (bf ? bf->scalar_at(s) : s) - jumps_upto(s); };
        double oracle = f.scalar_at(0.0) * (bf ? bf->scalar_at(0.0) : 0.0);
        double prev = cont(0.0);
        for (int i = 1; i <= n; ++i) {
            const double s = end * i / n;
            const double cur = cont(s);
            oracle += f.scalar_at(std::min(inverse_by_bisection(a, end * (i - 0.5) / n), 3.0)) * (cur - prev);
            prev = cur;
        }
        if (bf) {
            for (std::size_t i = 1; i < bf->size(); ++i) {
                const double j = bf->value(i)(0) - bf->left(i)(0);
                if (j != 0.0) oracle += f.scalar_at(inverse_by_bisection(a, bf->time(i) - 1e-12)) * j;
            }
        }
        CHECK(r.rhs == Approx(oracle).epsilon(2e-5));
        CHECK(r.lhs == Approx(oracle).epsilon(2e-5));
    }
}
