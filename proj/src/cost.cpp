#include "scc/cost.hpp"

#include "scc/error.hpp"
#include "scc/parallel.hpp"
#include "scc/skorohod.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace scc {

namespace {

struct PathStats {
    PathCost cost;
    double terminal_moment = 0.0;
    double hu_half = 0.0;
    double hu_end = 0.0;
    std::vector<double> moments;
};

// e^{-gamma t0} int_0^h e^{-gamma u} (ya + (yb - ya) u / h) du
double linear_segment(double gamma, double t0, double h, double ya, double yb) {
    const double x = gamma * h;
    return std::exp(-gamma * t0) * h * (ya * exp_moment(0, x) + (yb - ya) * exp_moment(1, x));
}

std::vector<std::int64_t> checkpoint_steps(const SimGrid& grid, const std::vector<double>& checkpoints) {
    std::vector<std::int64_t> out;
    const auto n = grid.steps();
    for (double t : checkpoints) {
        if (t < 0.0 || t > grid.horizon * (1.0 + 1e-12)) throw Error(ErrorKind::InvalidArgument, "checkpoint outside [0, T]");
        out.push_back(std::clamp<std::int64_t>(std::llround(t / grid.dt), 0, n));
    }
    return out;
}

// Reflection policy, evaluated while the path is generated. Mirrors
// skorohod_solve + pathwise_cost on the same breakpoints.
PathStats reflection_stats(const ProblemInstance& inst, const Vector& w, const SimGrid& grid, std::uint64_t index,
                           const std::vector<std::int64_t>& checkpoints, double order) {
    const auto n = grid.steps();
    const auto half = n / 2;
    const double gamma = inst.gamma;
    const Vector& v0 = inst.structural.v0;
    const double hu0 = inst.h.dot(inst.structural.u0);
    const double alpha = inst.cost.certificate().alpha;
    SkorohodStepper stepper(inst.w_cone, v0);
    BrownianSampler sampler(inst, grid, index);

    PathStats out;
    out.moments.assign(checkpoints.size(), 0.0);
    const Eigen::Index k = inst.k();
    Vector phi_a = w;
    Vector phi_b(k);
    Vector inc(k);
    Vector psi_a(k);
    Vector psi_m(k);
    const double eta0 = stepper.start(phi_a);
    psi_a = phi_a + v0 * eta0;
    double eta_a = eta0;
    double t_a = 0.0;
    double holding = 0.0;
    double control = hu0 * eta0;

    auto record = [&](std::int64_t step, const Vector& psi, double eta) {
        for (std::size_t c = 0; c < checkpoints.size(); ++c) {
            if (checkpoints[c] == step) out.moments[c] = std::pow(psi.norm(), order);
        }
        if (step == half) out.hu_half = hu0 * eta;
    };
    record(0, psi_a, eta_a);

    // moments for a full grid step, the common case
    const double x_step = gamma * grid.dt;
    const std::array<double, 3> step_moments = {exp_moment(0, x_step), exp_moment(1, x_step), exp_moment(2, x_step)};
    const bool closed = inst.cost.has_closed_form();

    for (std::int64_t i = 1; i <= n; ++i) {
        const double t0 = static_cast<double>(i - 1) * grid.dt;
        const double t1 = static_cast<double>(i) * grid.dt;
        sampler.increment(static_cast<std::uint64_t>(i), inc);
        phi_b = phi_a + inc;
        stepper.advance(t0, phi_a, t1, phi_b, phi_b, [&](double s, double eta) {
            const double t_m = t0 + s * (t1 - t0);
            psi_m = phi_a + s * (phi_b - phi_a) + v0 * eta;
            holding += inst.cost.discounted_segment(gamma, t_a, t_m - t_a, psi_a, psi_m);
            if (eta != eta_a) control += hu0 * (eta - eta_a) * std::exp(-gamma * t_a) * exp_moment(0, gamma * (t_m - t_a));
            psi_a.swap(psi_m);
            eta_a = eta;
            t_a = t_m;
        });
        const double eta_b = stepper.eta_left();
        psi_m = phi_b + v0 * eta_b;
        if (t_a == t0 && closed) {
            const double disc = std::exp(-gamma * t0);
            holding += inst.cost.discounted_segment(disc * grid.dt, step_moments, psi_a, psi_m);
            if (eta_b != eta_a) control += hu0 * (eta_b - eta_a) * disc * step_moments[0];
        } else {
            holding += inst.cost.discounted_segment(gamma, t_a, t1 - t_a, psi_a, psi_m);
            if (eta_b != eta_a) control += hu0 * (eta_b - eta_a) * std::exp(-gamma * t_a) * exp_moment(0, gamma * (t1 - t_a));
        }
        psi_a.swap(psi_m);
        eta_a = eta_b;
        t_a = t1;
        phi_a.swap(phi_b);
        record(i, psi_a, eta_a);
    }
    out.cost = {holding, control, holding + control};
    out.terminal_moment = std::pow(psi_a.norm(), alpha);
    out.hu_end = hu0 * eta_a;
    return out;
}

PathStats policy_stats(const ProblemInstance& inst, const Vector& w, const Policy& policy, const SimGrid& grid,
                       std::uint64_t index, const std::vector<std::int64_t>& checkpoints, double order) {
    const CadlagPath b = sample_brownian(inst, grid, index);
    const ControlledPath cp = policy.apply(inst, w, b);
    const auto adm = check_admissible(inst, w, b, cp.u);
    if (!adm.admissible) {
        std::ostringstream os;
        os << "policy '" << policy.name << "' is not admissible on path " << index << " (seed " << grid.seed
           << "): " << adm.what << " violation at t = " << *adm.time;
        throw Error(ErrorKind::NotAdmissible, os.str());
    }
    PathStats out;
    out.cost = pathwise_cost(inst, cp.u, cp.w, grid.horizon, false);
    const double alpha = inst.cost.certificate().alpha;
    out.terminal_moment = std::pow(cp.w.at(grid.horizon).norm(), alpha);
    const auto n = grid.steps();
    out.hu_half = inst.h.dot(cp.u.at(static_cast<double>(n / 2) * grid.dt));
    out.hu_end = inst.h.dot(cp.u.at(grid.horizon));
    for (auto step : checkpoints) {
        out.moments.push_back(std::pow(cp.w.at(static_cast<double>(step) * grid.dt).norm(), order));
    }
    return out;
}

struct MeanSe {
    double mean = 0.0;
    double se = 0.0;
};

MeanSe mean_se(const std::vector<double>& xs) {
    CompensatedSum s;
    for (double x : xs) s.add(x);
    const double n = static_cast<double>(xs.size());
    const double mean = s.value() / n;
    if (xs.size() < 2) return {mean, 0.0};
    CompensatedSum v;
    for (double x : xs) v.add((x - mean) * (x - mean));
    return {mean, std::sqrt(v.value() / (n - 1.0) / n)};
}

}  // namespace

PathCost pathwise_cost(const ProblemInstance& inst, const CadlagPath& u, const CadlagPath& w, double t_end,
                       bool check) {
    if (check) {
        if (!increments_in_cone(u, inst.u_cone, 1e-10)) {
            throw Error(ErrorKind::NotAdmissible, "control has an increment outside the control cone");
        }
        for (std::size_t i = 0; i < w.size(); ++i) {
            const double tol = 1e-10 * (1.0 + w.value(i).norm());
            if (!inst.w_cone.contains(w.value(i), tol) || (i > 0 && !inst.w_cone.contains(w.left(i), tol))) {
                std::ostringstream os;
                os << "state leaves W at t = " << w.time(i);
                throw Error(ErrorKind::NotAdmissible, os.str());
            }
        }
    }
    const CadlagPath wt = truncate(w, t_end);
    PathCost out;
    for (std::size_t i = 1; i < wt.size(); ++i) {
        const double t0 = wt.time(i - 1);
        out.holding += inst.cost.discounted_segment(inst.gamma, t0, wt.time(i) - t0, wt.value(i - 1), wt.left(i));
    }
    out.control = discounted_stieltjes(inst.gamma, dot(u, inst.h), t_end);
    out.total = out.holding + out.control;
    return out;
}

MonteCarloResult monte_carlo(const ProblemInstance& inst, const Vector& w, const Policy& policy, const SimGrid& grid,
                             const MonteCarloOptions& opts) {
    grid.validate();
    if (w.size() != inst.k()) throw Error(ErrorKind::DimensionMismatch, "initial state must live in R^k");
    if (!inst.w_cone.contains(w, 1e-12)) throw Error(ErrorKind::InitialStateOutsideCone, "initial state is outside W");
    const auto steps = checkpoint_steps(grid, opts.checkpoints);
    const auto n = grid.paths;
    std::vector<PathStats> stats(static_cast<std::size_t>(n));
    parallel_for(n, opts.threads, [&](std::int64_t i) {
        const auto idx = static_cast<std::uint64_t>(i);
        stats[static_cast<std::size_t>(i)] =
            policy.streaming_reflection ? reflection_stats(inst, w, grid, idx, steps, opts.moment_order)
                                        : policy_stats(inst, w, policy, grid, idx, steps, opts.moment_order);
    });

    MonteCarloResult res;
    res.per_path.reserve(stats.size());
    std::vector<double> total, holding, control, terminal, rate;
    for (const auto& s : stats) {
        res.per_path.push_back(s.cost);
        total.push_back(s.cost.total);
        holding.push_back(s.cost.holding);
        control.push_back(s.cost.control);
        terminal.push_back(s.terminal_moment);
        rate.push_back((s.hu_end - s.hu_half) / (grid.horizon - static_cast<double>(grid.steps() / 2) * grid.dt));
    }
    res.moments.assign(steps.size(), {});
    for (std::size_t c = 0; c < steps.size(); ++c) {
        for (const auto& s : stats) res.moments[c].push_back(s.moments[c]);
    }

    auto& e = res.estimate;
    const auto t = mean_se(total);
    const auto hm = mean_se(holding);
    const auto cm = mean_se(control);
    e.value = t.mean;
    e.std_error = t.se;
    e.holding = hm.mean;
    e.holding_se = hm.se;
    e.control = cm.mean;
    e.control_se = cm.se;
    e.paths = n;
    e.seed = grid.seed;
    e.terminal_moment = mean_se(terminal).mean;
    e.control_rate = std::max(0.0, mean_se(rate).mean);
    const double decay = std::exp(-inst.gamma * grid.horizon) / inst.gamma;
    e.tail_bound = decay * inst.cost.certificate().c3 * (e.terminal_moment + 1.0) + decay * e.control_rate;
    return res;
}

CostEstimate monte_carlo_cost(const ProblemInstance& inst, const Vector& w, const Policy& policy, const SimGrid& grid,
                              int threads) {
    MonteCarloOptions opts;
    opts.threads = threads;
    return monte_carlo(inst, w, policy, grid, opts).estimate;
}

RescaledCost rescaled_cost(const ProblemInstance& inst, const CadlagPath& u, const CadlagPath& w, double t_end) {
    const CadlagPath ut = truncate(u, t_end);
    const CadlagPath wt = truncate(w, t_end);
    RescaledCost out;
    out.direct = pathwise_cost(inst, ut, wt, t_end).total;

    const TimeChange tc = stretch(ut, inst.structural.u_hat1);
    const CadlagPath& c = tc.inverse;
    const CadlagPath w_hat = rescale_path(wt, c);
    const CadlagPath hu_hat = dot(rescale_path(ut, c), inst.h);
    auto times = refine_times(w_hat, hu_hat);
    const CadlagPath cr = resample(c, times);
    const CadlagPath wr = resample(w_hat, times);
    const CadlagPath hr = resample(hu_hat, times);

    const double gamma = inst.gamma;
    CompensatedSum holding;
    CompensatedSum control;
    for (std::size_t i = 1; i < times.size(); ++i) {
        // on a piece, c is linear from ca to cb; substituting t = c(s) keeps the
        // integrand exponential-times-polynomial in s
        const double ca = cr.value(i - 1)(0);
        const double dc = cr.left(i)(0) - ca;
        if (dc > 0.0) {
            holding.add(inst.cost.discounted_segment(gamma, ca, dc, wr.value(i - 1), wr.left(i)));
            control.add(gamma * linear_segment(gamma, ca, dc, hr.value(i - 1)(0), hr.left(i)(0)));
        }
        const double jump = cr.value(i)(0) - cr.left(i)(0);
        if (jump > 0.0) {
            const double disc = std::exp(-gamma * cr.value(i)(0)) * jump;
            holding.add(disc * inst.cost(wr.value(i)));
            control.add(gamma * disc * hr.value(i)(0));
        }
    }
    out.total = holding.value() + control.value();
    const double boundary = std::exp(-gamma * t_end) * inst.h.dot(ut.at(t_end));
    out.gap_vs_direct = std::abs(out.total + boundary - out.direct);
    return out;
}

bool ConvergenceTable::eventually_decreasing() const {
    if (rows.size() < 2) return true;
    const double last = rows.back().error;
    const double prev = rows[rows.size() - 2].error;
    const double tol = 1e-14 * (1.0 + std::abs(base_cost));
    return last <= prev + tol && last <= rows.front().error + tol;
}

ConvergenceTable convergence_study(const ProblemInstance& inst, const Vector& w, const CadlagPath& b,
                                   const CadlagPath& u, const std::vector<int>& ks) {
    const double horizon = b.horizon();
    ConvergenceTable table;
    const CadlagPath state = state_process(w, b, u, inst.g);
    table.base_cost = pathwise_cost(inst, u, state, horizon).total;
    for (int k : ks) {
        const auto sm = smooth_control(inst, w, b, u, k);
        ConvergenceRow row;
        row.k = k;
        row.cost = pathwise_cost(inst, sm.u, sm.w, horizon).total;
        row.error = std::abs(row.cost - table.base_cost);
        row.sup_eta = sup_norm(sm.eta, horizon);
        row.c2_empirical = sm.c2_empirical;
        row.bound_holds = sm.bound_holds;
        table.rows.push_back(row);
    }
    return table;
}

ConvergenceTable convergence_study(const ProblemInstance& inst, const Vector& w, const Policy& policy,
                                   const SimGrid& grid, const std::vector<int>& ks, int threads) {
    grid.validate();
    const auto n = grid.paths;
    const std::size_t nk = ks.size();
    std::vector<double> base(static_cast<std::size_t>(n));
    std::vector<std::vector<double>> jk(nk, std::vector<double>(static_cast<std::size_t>(n)));
    std::vector<std::vector<double>> eta(nk, std::vector<double>(static_cast<std::size_t>(n)));
    std::vector<std::vector<double>> c2(nk, std::vector<double>(static_cast<std::size_t>(n)));
    std::vector<std::vector<char>> holds(nk, std::vector<char>(static_cast<std::size_t>(n)));
    parallel_for(n, threads, [&](std::int64_t i) {
        const auto idx = static_cast<std::size_t>(i);
        const CadlagPath b = sample_brownian(inst, grid, static_cast<std::uint64_t>(i));
        const ControlledPath cp = policy.apply(inst, w, b);
        base[idx] = pathwise_cost(inst, cp.u, cp.w, grid.horizon).total;
        for (std::size_t q = 0; q < nk; ++q) {
            const auto sm = smooth_control(inst, w, b, cp.u, ks[q]);
            jk[q][idx] = pathwise_cost(inst, sm.u, sm.w, grid.horizon).total;
            eta[q][idx] = sup_norm(sm.eta, grid.horizon);
            c2[q][idx] = sm.c2_empirical;
            holds[q][idx] = sm.bound_holds ? 1 : 0;
        }
    });
    ConvergenceTable table;
    const auto b = mean_se(base);
    table.base_cost = b.mean;
    table.base_std_error = b.se;
    for (std::size_t q = 0; q < nk; ++q) {
        ConvergenceRow row;
        row.k = ks[q];
        const auto m = mean_se(jk[q]);
        row.cost = m.mean;
        row.std_error = m.se;
        row.error = std::abs(m.mean - b.mean);
        std::vector<double> diff(static_cast<std::size_t>(n));
        for (std::size_t i = 0; i < diff.size(); ++i) diff[i] = jk[q][i] - base[i];
        row.diff_std_error = mean_se(diff).se;
        row.sup_eta = mean_se(eta[q]).mean;
        row.c2_empirical = *std::max_element(c2[q].begin(), c2[q].end());
        row.bound_holds = std::all_of(holds[q].begin(), holds[q].end(), [](char h) { return h != 0; });
        table.rows.push_back(row);
    }
    return table;
}

MomentTable moment_decay_check(const ProblemInstance& inst, const Vector& w, const Policy& policy,
                               const SimGrid& grid, double r, std::vector<double> checkpoints, int threads) {
    if (!(r > 0.0)) throw Error(ErrorKind::InvalidArgument, "moment order must be positive");
    if (checkpoints.empty()) {
        const double t = grid.horizon;
        checkpoints = {t / 4.0, t / 2.0, 3.0 * t / 4.0, t};
    }
    MonteCarloOptions opts;
    opts.threads = threads;
    opts.checkpoints = checkpoints;
    opts.moment_order = r;
    const auto res = monte_carlo(inst, w, policy, grid, opts);
    const auto steps = checkpoint_steps(grid, checkpoints);
    MomentTable table;
    for (std::size_t c = 0; c < steps.size(); ++c) {
        const double t = static_cast<double>(steps[c]) * grid.dt;
        const auto m = mean_se(res.moments[c]);
        const double disc = std::exp(-inst.gamma * t);
        table.rows.push_back({t, disc * m.mean, disc * m.se});
    }
    table.decreasing = true;
    for (std::size_t c = 1; c < table.rows.size(); ++c) {
        if (table.rows[c].value > table.rows[c - 1].value) table.decreasing = false;
    }
    return table;
}

}  // namespace scc
