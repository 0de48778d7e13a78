#include "scc/dynamics.hpp"

#include "scc/error.hpp"
#include "scc/io.hpp"
#include "scc/rng.hpp"
#include "scc/skorohod.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <cmath>
#include <limits>
#include <sstream>

namespace scc {

Matrix psd_factor(const Matrix& sigma) {
    if (sigma.rows() != sigma.cols()) throw Error(ErrorKind::DimensionMismatch, "covariance must be square");
    if ((sigma - sigma.transpose()).cwiseAbs().maxCoeff() > 1e-12 * (1.0 + sigma.cwiseAbs().maxCoeff())) {
        throw Error(ErrorKind::NotFactorizable, "covariance is not symmetric");
    }
    Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (sigma + sigma.transpose()));
    const Vector ev = es.eigenvalues();
    if (ev.size() > 0 && ev.minCoeff() < -1e-10) {
        std::ostringstream os;
        os << "covariance has eigenvalue " << ev.minCoeff();
        throw Error(ErrorKind::NotFactorizable, os.str());
    }
    const Vector root = ev.cwiseMax(0.0).cwiseSqrt();
    return es.eigenvectors() * root.asDiagonal() * es.eigenvectors().transpose();
}

ProblemInstance make_instance(Matrix g, Vector b, Matrix sigma, PolyCone w_cone, PolyCone u_cone, double gamma,
                              Vector h, RunningCost cost, std::optional<StructuralVectors> structural) {
    const Eigen::Index k = g.rows();
    const Eigen::Index p = g.cols();
    if (k < 1 || p < k) throw Error(ErrorKind::RankDeficient, "G must be k x p with k <= p");
    if (numeric_rank(g) != k) throw Error(ErrorKind::RankDeficient, "G must have full row rank");
    if (b.size() != k || sigma.rows() != k || w_cone.dim() != k) {
        throw Error(ErrorKind::DimensionMismatch, "b, Sigma and W must live in R^k");
    }
    if (u_cone.dim() != p || h.size() != p) throw Error(ErrorKind::DimensionMismatch, "U and h must live in R^p");
    if (!(gamma > 0.0)) throw Error(ErrorKind::InvalidArgument, "discount rate must be positive");
    for (const auto& r : extreme_rays(u_cone)) {
        if (h.dot(r) < -1e-12) throw Error(ErrorKind::InvalidArgument, "h . u < 0 on an extreme ray of U");
    }
    if (cost.kind() == RunningCost::Kind::Linear && cost.coefficients().size() != k) {
        throw Error(ErrorKind::DimensionMismatch, "linear cost must act on R^k");
    }

    if (cost.certificate().c3 == 0.0) cost.derive_certificate(w_cone);

    ProblemInstance inst;
    inst.sigma_factor = psd_factor(sigma);
    if (structural) {
        validate_structural_vectors(*structural, w_cone, u_cone, g);
        inst.structural = *structural;
    } else {
        inst.structural = find_structural_vectors(w_cone, u_cone, g);
    }
    inst.g = std::move(g);
    inst.b = std::move(b);
    inst.sigma = std::move(sigma);
    inst.w_cone = std::move(w_cone);
    inst.u_cone = std::move(u_cone);
    inst.gamma = gamma;
    inst.h = std::move(h);
    inst.cost = std::move(cost);
    return inst;
}

ProblemInstance instance_from_json(const nlohmann::json& j) {
    try {
        Matrix g = matrix_from_json(j.at("G"), "G");
        PolyCone w_cone = cone_from_json(j.at("W"));
        PolyCone u_cone = cone_from_json(j.at("U"));
        RunningCost cost = running_cost_from_json(j.at("cost"), w_cone);
        std::optional<StructuralVectors> sv;
        if (j.contains("structural")) {
            const auto& s = j.at("structural");
            sv = StructuralVectors{vector_from_json(s.at("v0"), "v0"), vector_from_json(s.at("u0"), "u0"),
                                   vector_from_json(s.at("u_hat1"), "u_hat1"),
                                   vector_from_json(s.at("v_hat1"), "v_hat1"), s.at("a0").get<double>()};
        }
        return make_instance(std::move(g), vector_from_json(j.at("b"), "b"), matrix_from_json(j.at("Sigma"), "Sigma"),
                             std::move(w_cone), std::move(u_cone), j.at("gamma").get<double>(),
                             vector_from_json(j.at("h"), "h"), std::move(cost), sv);
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::ConfigInvalid, std::string("instance: ") + e.what());
    }
}

nlohmann::json to_json(const ProblemInstance& inst) {
    const auto& s = inst.structural;
    return {{"G", matrix_to_json(inst.g)},
            {"b", to_json(inst.b)},
            {"Sigma", matrix_to_json(inst.sigma)},
            {"W", to_json(inst.w_cone)},
            {"U", to_json(inst.u_cone)},
            {"gamma", inst.gamma},
            {"h", to_json(inst.h)},
            {"cost", to_json(inst.cost)},
            {"structural",
             {{"v0", to_json(s.v0)},
              {"u0", to_json(s.u0)},
              {"u_hat1", to_json(s.u_hat1)},
              {"v_hat1", to_json(s.v_hat1)},
              {"a0", s.a0}}}};
}

std::int64_t SimGrid::steps() const {
    validate();
    return static_cast<std::int64_t>(std::llround(horizon / dt));
}

void SimGrid::validate() const {
    if (!(dt > 0.0) || !(horizon > 0.0)) throw Error(ErrorKind::InvalidArgument, "grid needs dt > 0 and T > 0");
    const double n = horizon / dt;
    if (std::abs(n - std::round(n)) > 1e-9 * std::max(1.0, n)) {
        throw Error(ErrorKind::InvalidArgument, "T / dt must be an integer");
    }
    if (std::round(n) > 4.0e9) throw Error(ErrorKind::InvalidArgument, "too many grid steps");
    if (paths < 1) throw Error(ErrorKind::InvalidArgument, "path count must be positive");
}

BrownianSampler::BrownianSampler(const ProblemInstance& inst, const SimGrid& grid, std::uint64_t path_index)
    : BrownianSampler(inst.b, inst.sigma_factor, grid, path_index) {}

BrownianSampler::BrownianSampler(const Vector& drift, const Matrix& sigma_factor, const SimGrid& grid,
                                 std::uint64_t path_index)
    : drift_(drift * grid.dt),
      scale_(sigma_factor * std::sqrt(grid.dt)),
      z_(drift.size()),
      normals_(grid.seed, path_index) {
    if (sigma_factor.rows() != drift.size() || sigma_factor.cols() != drift.size()) {
        throw Error(ErrorKind::DimensionMismatch, "drift and covariance factor sizes differ");
    }
}

void BrownianSampler::increment(std::uint64_t step, Vector& out) {
    const Eigen::Index k = z_.size();
    const std::uint64_t base = (step - 1) * static_cast<std::uint64_t>(k);
    for (Eigen::Index d = 0; d < k; ++d) z_(d) = normals_(base + static_cast<std::uint64_t>(d));
    for (Eigen::Index r = 0; r < k; ++r) {
        double acc = drift_(r);
        for (Eigen::Index c = 0; c < k; ++c) acc += scale_(r, c) * z_(c);
        out(r) = acc;
    }
}

CadlagPath sample_brownian(const ProblemInstance& inst, const SimGrid& grid, std::uint64_t path_index) {
    return sample_brownian(inst.b, inst.sigma_factor, grid, path_index);
}

CadlagPath sample_brownian(const Vector& drift, const Matrix& sigma_factor, const SimGrid& grid,
                           std::uint64_t path_index) {
    const auto n = grid.steps();
    const Eigen::Index k = drift.size();
    std::vector<double> times(static_cast<std::size_t>(n + 1));
    Matrix values(k, n + 1);
    values.col(0).setZero();
    times[0] = 0.0;
    Vector inc(k);
    BrownianSampler sampler(drift, sigma_factor, grid, path_index);
    for (std::int64_t i = 1; i <= n; ++i) {
        times[static_cast<std::size_t>(i)] = static_cast<double>(i) * grid.dt;
        sampler.increment(static_cast<std::uint64_t>(i), inc);
        values.col(i) = values.col(i - 1) + inc;
    }
    return CadlagPath::continuous(std::move(times), std::move(values));
}

CadlagPath state_process(const Vector& w, const CadlagPath& b, const CadlagPath& u, const Matrix& g) {
    if (b.dim() != w.size() || g.rows() != w.size() || g.cols() != u.dim()) {
        throw Error(ErrorKind::DimensionMismatch, "state equation dimensions disagree");
    }
    return linear_combination(w, {{Matrix::Identity(w.size(), w.size()), &b}, {g, &u}});
}

namespace {

// Index of the most violated facet if x is outside the cone beyond tolerance.
std::optional<Eigen::Index> violated_facet(const PolyCone& cone, const Vector& x, double tol) {
    if (cone.num_facets() == 0) return std::nullopt;
    Eigen::Index j = 0;
    const double m = (cone.facets() * x).minCoeff(&j);
    if (m < -tol * (1.0 + x.norm())) return j;
    return std::nullopt;
}

}  // namespace

AdmissibilityReport check_admissible(const ProblemInstance& inst, const Vector& w, const CadlagPath& b,
                                     const CadlagPath& u, double tol) {
    AdmissibilityReport rep;
    auto record = [&](double t, Eigen::Index facet, const char* what) {
        if (!rep.admissible && *rep.time <= t) return;
        rep.admissible = false;
        rep.time = t;
        rep.facet = facet;
        rep.what = what;
    };
    if (u.dim() != inst.p()) throw Error(ErrorKind::DimensionMismatch, "control dimension differs from p");
    if (auto f = violated_facet(inst.u_cone, u.value(0) - u.left(0), tol)) record(0.0, *f, "increment");
    for (std::size_t i = 1; i < u.size() && rep.admissible; ++i) {
        if (auto f = violated_facet(inst.u_cone, u.left(i) - u.value(i - 1), tol)) record(u.time(i - 1), *f, "increment");
        else if (auto f2 = violated_facet(inst.u_cone, u.value(i) - u.left(i), tol)) record(u.time(i), *f2, "increment");
    }
    const CadlagPath state = state_process(w, b, u, inst.g);
    for (std::size_t i = 0; i < state.size(); ++i) {
        if (rep.time && *rep.time <= state.time(i)) break;
        if (i > 0) {
            if (auto f = violated_facet(inst.w_cone, state.left(i), tol)) {
                // the exit happens inside (t_{i-1}, t_i]; report the crossing time of the linear piece
                const Vector a = state.value(i - 1);
                const Vector d = state.left(i) - a;
                const double slope = inst.w_cone.facets().row(*f).dot(d);
                const double s = slope < 0.0 ? std::clamp(-inst.w_cone.facets().row(*f).dot(a) / slope, 0.0, 1.0) : 1.0;
                record(state.time(i - 1) + s * (state.time(i) - state.time(i - 1)), *f, "state");
                break;
            }
        }
        if (auto f = violated_facet(inst.w_cone, state.value(i), tol)) {
            record(state.time(i), *f, "state");
            break;
        }
    }
    return rep;
}

ControlledPath reflection_policy(const ProblemInstance& inst, const Vector& w, const CadlagPath& b) {
    const Vector& v0 = inst.structural.v0;
    const CadlagPath phi = shift(b, w);
    auto sol = skorohod_solve(phi, inst.w_cone, v0);
    CadlagPath u = apply(inst.structural.u0, sol.eta);
    return {std::move(u), std::move(sol.psi)};
}

ControlledPath impulse_reflection_policy(const ProblemInstance& inst, const Vector& w, const CadlagPath& b,
                                         double s, const Vector& jump) {
    if (jump.size() != inst.p()) throw Error(ErrorKind::DimensionMismatch, "impulse must live in R^p");
    if (!inst.u_cone.contains(jump, 1e-12)) throw Error(ErrorKind::NotAdmissible, "impulse is not in the control cone");
    const CadlagPath impulse = CadlagPath::step(jump, s, b.horizon());
    const CadlagPath phi = linear_combination(w, {{Matrix::Identity(w.size(), w.size()), &b}, {inst.g, &impulse}});
    auto sol = skorohod_solve(phi, inst.w_cone, inst.structural.v0);
    const Matrix u0 = inst.structural.u0;
    CadlagPath u = linear_combination(Vector::Zero(inst.p()),
                                      {{Matrix::Identity(inst.p(), inst.p()), &impulse}, {u0, &sol.eta}});
    return {std::move(u), std::move(sol.psi)};
}

Policy make_reflection_policy() {
    return {"reflection", [](const ProblemInstance& inst, const Vector& w, const CadlagPath& b) {
                return reflection_policy(inst, w, b);
            },
            true};
}

Policy make_impulse_reflection_policy(double s, Vector jump) {
    return {"impulse-reflection",
            [s, jump = std::move(jump)](const ProblemInstance& inst, const Vector& w, const CadlagPath& b) {
                return impulse_reflection_policy(inst, w, b, s, jump);
            },
            false};
}

Policy make_zero_policy() {
    return {"zero",
            [](const ProblemInstance& inst, const Vector& w, const CadlagPath& b) {
                CadlagPath u = CadlagPath::constant(Vector::Zero(inst.p()), b.horizon());
                CadlagPath state = state_process(w, b, u, inst.g);
                return ControlledPath{std::move(u), std::move(state)};
            },
            false};
}

Policy policy_from_json(const nlohmann::json& j) {
    const std::string name = j.is_string() ? j.get<std::string>() : j.at("name").get<std::string>();
    if (name == "reflection") return make_reflection_policy();
    if (name == "zero") return make_zero_policy();
    if (name == "impulse-reflection") {
        return make_impulse_reflection_policy(j.at("time").get<double>(), vector_from_json(j.at("jump"), "jump"));
    }
    throw Error(ErrorKind::ConfigInvalid, "unknown policy '" + name + "'");
}

SmoothedControl smooth_control(const ProblemInstance& inst, const Vector& w, const CadlagPath& b,
                               const CadlagPath& u, int k) {
    const auto adm = check_admissible(inst, w, b, u);
    if (!adm.admissible) {
        std::ostringstream os;
        os << "smooth_control needs an admissible pair (" << adm.what << " violation at t = " << *adm.time << ")";
        throw Error(ErrorKind::NotAdmissible, os.str());
    }
    const auto parts = decompose_jumps(u);
    const CadlagPath ukc = mollify(parts.jump_part, k);
    const Eigen::Index dk = inst.k();
    const CadlagPath tilde = linear_combination(
        w, {{Matrix::Identity(dk, dk), &b}, {inst.g, &parts.continuous_part}, {inst.g, &ukc}});
    auto sol = skorohod_solve(tilde, inst.w_cone, inst.structural.v0);
    const Matrix u0 = inst.structural.u0;
    const Matrix id = Matrix::Identity(inst.p(), inst.p());
    CadlagPath uk = linear_combination(Vector::Zero(inst.p()),
                                       {{id, &parts.continuous_part}, {id, &ukc}, {u0, &sol.eta}});

    SmoothedControl out{std::move(uk), std::move(sol.psi), std::move(sol.eta)};
    const double horizon = b.horizon();
    const CadlagPath state = state_process(w, b, u, inst.g);
    out.sup_w = sup_norm(out.w, horizon);
    out.scale = w.norm() + state.at(horizon).norm() + sup_norm(b, horizon);
    // |U(t)| <= |G U(T)| / c_G and |G U(T)| <= scale; W~_k = w + B + G (U^c + U^{k,c}) with
    // |U^c|, |U^{k,c}| <= |U(T)|; reflection adds at most L |W~_k|* times |v0| = 1.
    const auto rep = check_assumption_2_2(inst.u_cone, inst.g, inst.h, 0.0);
    const double cg = rep.c_g.value_or(0.0);
    const Shortfall g(inst.w_cone, inst.structural.v0);
    const double gnorm = Eigen::JacobiSVD<Matrix>(inst.g).singularValues()(0);
    const double amp = inst.structural.a0 > 0.0 && cg > 0.0 ? 2.0 * gnorm / (inst.structural.a0 * cg)
                                                            : std::numeric_limits<double>::infinity();
    out.c2 = (1.0 + g.lipschitz() * inst.structural.v0.norm()) * (1.0 + amp);
    out.c2_empirical = out.scale > 0.0 ? out.sup_w / out.scale : 0.0;
    out.bound_holds = out.sup_w <= out.c2 * out.scale * (1.0 + 1e-12) + 1e-12;
    return out;
}

}  // namespace scc
