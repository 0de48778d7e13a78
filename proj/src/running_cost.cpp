#include "scc/running_cost.hpp"

#include "scc/error.hpp"
#include "scc/paths.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

namespace scc {

namespace {

constexpr std::array<double, 8> kNodes = {
    -0.9602898564975363, -0.7966664774136267, -0.5255324099163290, -0.1834346424956498,
    0.1834346424956498,  0.5255324099163290,  0.7966664774136267,  0.9602898564975363};
constexpr std::array<double, 8> kWeights = {
    0.1012285362903763, 0.2223810344533745, 0.3137066458778873, 0.3626837833783620,
    0.3626837833783620, 0.3137066458778873, 0.2223810344533745, 0.1012285362903763};

}  // namespace

RunningCost RunningCost::linear(Vector c) {
    RunningCost r;
    r.kind_ = Kind::Linear;
    r.coef_ = std::move(c);
    r.alpha_ = 1.0;
    return r;
}

RunningCost RunningCost::power(double c, double alpha) {
    if (!(c > 0.0) || !(alpha >= 0.0)) throw Error(ErrorKind::InvalidArgument, "power cost needs c > 0, alpha >= 0");
    RunningCost r;
    r.kind_ = Kind::Power;
    r.scale_ = c;
    r.alpha_ = alpha;
    r.cert_ = {c, 0.0, c, alpha};
    return r;
}

void RunningCost::derive_certificate(const PolyCone& w_cone) {
    if (kind_ == Kind::Power) {
        cert_ = {scale_, 0.0, scale_, alpha_};
        return;
    }
    if (coef_.size() != w_cone.dim()) throw Error(ErrorKind::DimensionMismatch, "cost coefficients differ from W");
    // on W, c . w = sum lambda_i c . r_i with |w| <= sum lambda_i, so the ray minimum is a lower rate
    double lo = std::numeric_limits<double>::infinity();
    for (const auto& r : extreme_rays(w_cone)) lo = std::min(lo, coef_.dot(r));
    if (lo < -1e-12) throw Error(ErrorKind::InvalidArgument, "linear cost is negative on W");
    cert_ = {std::max(lo, 0.0), 0.0, coef_.norm(), 1.0};
}

double RunningCost::operator()(const Vector& w) const {
    if (kind_ == Kind::Linear) return coef_.dot(w);
    if (alpha_ == 0.0) return scale_;
    if (alpha_ == 2.0) return scale_ * w.squaredNorm();
    return scale_ * std::pow(w.norm(), alpha_);
}

double RunningCost::discounted_segment(double lead, const std::array<double, 3>& moments, const Vector& wa,
                                       const Vector& wb) const {
    if (kind_ == Kind::Linear) {
        const double ya = coef_.dot(wa);
        const double yb = coef_.dot(wb);
        return lead * (ya * moments[0] + (yb - ya) * moments[1]);
    }
    if (alpha_ == 0.0) return lead * scale_ * moments[0];
    // |wa + u d|^2 = |wa|^2 + 2 u wa.d + u^2 |d|^2
    const double aa = wa.squaredNorm();
    const double ad = wa.dot(wb) - aa;
    const double dd = (wb - wa).squaredNorm();
    return lead * scale_ * (aa * moments[0] + 2.0 * ad * moments[1] + dd * moments[2]);
}

double RunningCost::discounted_segment(double gamma, double t0, double h, const Vector& wa,
                                       const Vector& wb) const {
    const double x = gamma * h;
    const double lead = std::exp(-gamma * t0) * h;
    if (has_closed_form()) {
        const std::array<double, 3> moments = {exp_moment(0, x), exp_moment(1, x),
                                               kind_ == Kind::Power && alpha_ == 2.0 ? exp_moment(2, x) : 0.0};
        return discounted_segment(lead, moments, wa, wb);
    }
    double acc = 0.0;
    for (std::size_t q = 0; q < kNodes.size(); ++q) {
        const double u = 0.5 * (1.0 + kNodes[q]);
        acc += kWeights[q] * std::exp(-x * u) * std::pow(((1.0 - u) * wa + u * wb).norm(), alpha_);
    }
    return lead * scale_ * 0.5 * acc;
}

std::string RunningCost::describe() const {
    std::ostringstream os;
    if (kind_ == Kind::Linear) {
        os << "linear c=[";
        for (Eigen::Index i = 0; i < coef_.size(); ++i) os << (i ? "," : "") << coef_(i);
        os << "]";
    } else {
        os << "power c=" << scale_ << " alpha=" << alpha_;
    }
    return os.str();
}

GrowthReport validate_growth(const RunningCost& cost, const PolyCone& w_cone, std::uint64_t seed) {
    const auto rays = extreme_rays(w_cone);
    const auto& c = cost.certificate();
    std::mt19937_64 rng(seed);
    std::exponential_distribution<double> e(1.0);
    std::uniform_int_distribution<std::size_t> pick(0, rays.size() - 1);
    GrowthReport rep;
    rep.worst_lower_slack = std::numeric_limits<double>::infinity();
    rep.worst_upper_slack = std::numeric_limits<double>::infinity();
    double worst = std::numeric_limits<double>::infinity();
    const std::array<double, 4> radii = {0.1, 1.0, 10.0, 100.0};
    for (double radius : radii) {
        for (int i = 0; i < 2500; ++i) {
            Vector dir = Vector::Zero(w_cone.dim());
            if (i < static_cast<int>(rays.size())) {
                dir = rays[static_cast<std::size_t>(i)];
            } else {
                for (const auto& r : rays) dir += e(rng) * r;
                if (i % 3 == 0) dir = rays[pick(rng)] + 1e-3 * dir;
            }
            if (dir.norm() == 0.0) continue;
            const Vector w = radius * dir.normalized();
            const double l = cost(w);
            const double p = std::pow(w.norm(), c.alpha);
            const double lower = l - (c.c1 * p - c.c2);
            const double upper = c.c3 * (p + 1.0) - l;
            rep.worst_lower_slack = std::min(rep.worst_lower_slack, lower);
            rep.worst_upper_slack = std::min(rep.worst_upper_slack, upper);
            if (std::min(lower, upper) < worst) {
                worst = std::min(lower, upper);
                rep.worst_radius = radius;
            }
            ++rep.samples;
        }
    }
    rep.pass = rep.worst_lower_slack >= -1e-9 && rep.worst_upper_slack >= -1e-9;
    return rep;
}

RunningCost running_cost_from_json(const nlohmann::json& j, const PolyCone& w_cone) {
    const std::string kind = j.at("kind").get<std::string>();
    RunningCost cost;
    if (kind == "linear") {
        const auto c = j.at("c").get<std::vector<double>>();
        cost = RunningCost::linear(Eigen::Map<const Vector>(c.data(), static_cast<Eigen::Index>(c.size())));
        cost.derive_certificate(w_cone);
    } else if (kind == "power") {
        cost = RunningCost::power(j.at("c").get<double>(), j.at("alpha").get<double>());
    } else {
        throw Error(ErrorKind::ConfigInvalid, "unknown running cost kind '" + kind + "'");
    }
    if (j.contains("certificate")) {
        const auto& g = j.at("certificate");
        cost.set_certificate({g.at("c1").get<double>(), g.at("c2").get<double>(), g.at("c3").get<double>(),
                              g.at("alpha").get<double>()});
    }
    return cost;
}

nlohmann::json to_json(const RunningCost& cost) {
    nlohmann::json j;
    if (cost.kind() == RunningCost::Kind::Linear) {
        j["kind"] = "linear";
        j["c"] = std::vector<double>(cost.coefficients().data(),
                                     cost.coefficients().data() + cost.coefficients().size());
    } else {
        j["kind"] = "power";
        j["c"] = cost.scale();
        j["alpha"] = cost.exponent();
    }
    const auto& c = cost.certificate();
    j["certificate"] = {{"c1", c.c1}, {"c2", c.c2}, {"c3", c.c3}, {"alpha", c.alpha}};
    return j;
}

}  // namespace scc
