#include "scc/skorohod.hpp"

#include "scc/error.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace scc {

namespace {

constexpr double kInitialTol = 1e-12;

double min_slack(const PolyCone& cone, const Vector& x) {
    if (cone.num_facets() == 0) return std::numeric_limits<double>::infinity();
    return (cone.facets() * x).minCoeff();
}

}  // namespace

SkorohodStepper::SkorohodStepper(const PolyCone& w_cone, const Vector& v0)
    : g_(w_cone, v0),
      intercept_(Vector::Zero(w_cone.num_facets())),
      slope_(Vector::Zero(w_cone.num_facets())) {}

double SkorohodStepper::start(const Vector& phi0) {
    const double g0 = g_(phi0);
    if (g0 > kInitialTol) {
        std::ostringstream os;
        os << "phi(0) is outside W (shortfall " << g0 << ")";
        throw Error(ErrorKind::InitialStateOutsideCone, os.str());
    }
    eta_ = g0;
    eta_left_ = 0.0;
    return eta_;
}

SkorohodSolution skorohod_solve(const CadlagPath& phi, const PolyCone& w_cone, const Vector& v0) {
    if (phi.dim() != w_cone.dim()) throw Error(ErrorKind::DimensionMismatch, "path and cone dimensions differ");
    SkorohodStepper stepper(w_cone, v0);
    const Eigen::Index d = phi.dim();

    // flat column-major buffers: point i occupies [i d, (i + 1) d)
    std::vector<double> times;
    std::vector<double> eta_left;
    std::vector<double> eta_value;
    std::vector<double> phi_left;
    std::vector<double> phi_value;
    times.reserve(phi.size() + phi.size() / 8);
    auto push = [d](std::vector<double>& buf, const auto& x) {
        for (Eigen::Index r = 0; r < d; ++r) buf.push_back(x(r));
    };

    Vector a = phi.value(0);
    times.push_back(0.0);
    eta_left.push_back(0.0);
    eta_value.push_back(stepper.start(a));
    push(phi_left, phi.left(0));
    push(phi_value, a);

    Vector b_left(d);
    Vector b_value(d);
    Vector x(d);
    for (std::size_t i = 1; i < phi.size(); ++i) {
        const double t0 = phi.time(i - 1);
        const double t1 = phi.time(i);
        b_left = phi.left(i);
        b_value = phi.value(i);
        stepper.advance(t0, a, t1, b_left, b_value, [&](double s, double eta) {
            times.push_back(t0 + s * (t1 - t0));
            x = a + s * (b_left - a);
            push(phi_left, x);
            push(phi_value, x);
            eta_left.push_back(eta);
            eta_value.push_back(eta);
        });
        times.push_back(t1);
        push(phi_left, b_left);
        push(phi_value, b_value);
        eta_left.push_back(stepper.eta_left());
        eta_value.push_back(stepper.eta());
        a = b_value;
    }

    const auto n = static_cast<Eigen::Index>(times.size());
    using RowMap = Eigen::Map<const Eigen::RowVectorXd>;
    Matrix eta_l = RowMap(eta_left.data(), n);
    Matrix eta_v = RowMap(eta_value.data(), n);
    Matrix psi_l = Eigen::Map<const Matrix>(phi_left.data(), d, n);
    Matrix psi_v = Eigen::Map<const Matrix>(phi_value.data(), d, n);
    psi_l.noalias() += v0 * eta_l;
    psi_v.noalias() += v0 * eta_v;
    return {CadlagPath(times, std::move(psi_l), std::move(psi_v)),
            CadlagPath(std::move(times), std::move(eta_l), std::move(eta_v))};
}

LipschitzRatio lipschitz_ratio(const CadlagPath& phi1, const CadlagPath& phi2,
                               const PolyCone& w_cone, const Vector& v0, double t_end) {
    const Shortfall g(w_cone, v0);
    LipschitzRatio out;
    out.bound = 1.0 + 2.0 * g.lipschitz() * (1.0 + v0.norm());
    const double den = sup_norm(phi1 - phi2, t_end);
    if (den == 0.0) return out;
    const auto s1 = skorohod_solve(phi1, w_cone, v0);
    const auto s2 = skorohod_solve(phi2, w_cone, v0);
    out.num = (sup_norm(s1.psi - s2.psi, t_end) + sup_norm(s1.eta - s2.eta, t_end)) / den;
    return out;
}

SkorohodCheck verify_skorohod(const CadlagPath& phi, const SkorohodSolution& sol,
                              const PolyCone& w_cone, const Vector& v0, double tol) {
    SkorohodCheck r;
    auto fail = [&](bool& flag, const std::string& msg) {
        if (flag) r.failures.push_back(msg);
        flag = false;
    };
    const CadlagPath& eta = sol.eta;
    const CadlagPath& psi = sol.psi;
    const double scale = 1.0 + eta.values().cwiseAbs().maxCoeff();

    if (eta.value(0)(0) < -tol) fail(r.eta_starts_nonnegative, "eta(0) < 0");
    for (std::size_t i = 1; i < eta.size(); ++i) {
        if (eta.left(i)(0) < eta.value(i - 1)(0) - tol * scale || eta.value(i)(0) < eta.left(i)(0) - tol * scale) {
            std::ostringstream os;
            os << "eta decreases at t = " << eta.time(i);
            fail(r.eta_nondecreasing, os.str());
        }
    }
    for (std::size_t i = 0; i < psi.size(); ++i) {
        const double tl = tol * (1.0 + psi.value(i).norm());
        if (!w_cone.contains(psi.value(i), tl) || (i > 0 && !w_cone.contains(psi.left(i), tl))) {
            std::ostringstream os;
            os << "psi leaves W at t = " << psi.time(i);
            fail(r.psi_in_cone, os.str());
        }
    }

    bool inside = true;
    for (std::size_t i = 0; i < phi.size() && inside; ++i) {
        inside = w_cone.contains(phi.value(i)) && (i == 0 || w_cone.contains(phi.left(i)));
    }
    if (inside && eta.values().cwiseAbs().maxCoeff() != 0.0) fail(r.identity_inside, "phi stays in W but eta != 0");

    for (std::size_t i = 1; i < eta.size(); ++i) {
        const double cont = eta.left(i)(0) - eta.value(i - 1)(0);
        if (cont > tol * scale && min_slack(w_cone, psi.left(i)) > tol * (1.0 + psi.left(i).norm())) {
            std::ostringstream os;
            os << "eta increases on (" << eta.time(i - 1) << ", " << eta.time(i) << ") away from the boundary";
            fail(r.complementarity, os.str());
        }
        const double jump = eta.value(i)(0) - eta.left(i)(0);
        if (jump > tol * scale && min_slack(w_cone, psi.value(i)) > tol * (1.0 + psi.value(i).norm())) {
            std::ostringstream os;
            os << "eta jumps at t = " << eta.time(i) << " away from the boundary";
            fail(r.complementarity, os.str());
        }
    }

    const CadlagPath phi_r = resample(phi, psi.times());
    for (std::size_t i = 0; i < psi.size(); ++i) {
        const Vector d = psi.value(i) - phi_r.value(i) - v0 * eta.value(i)(0);
        if (d.cwiseAbs().maxCoeff() > tol * (1.0 + phi_r.value(i).norm() + eta.value(i)(0))) {
            fail(r.state_identity, "psi != phi + v0 eta");
            break;
        }
    }
    return r;
}

}  // namespace scc
